//! Coherent systems: normalized positive functions on the vertices that are
//! harmonic for the link, `nu(z') = sum_z nu(z) kappa(z, z')`, stored up to a
//! finite depth.

use crate::error::{Error, Result};
use crate::graph::{GradedGraph, VertexId, VertexMap};
use crate::link::{DiagonalObservable, LinkEngine};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct CoherentSystem<S> {
    pub values: VertexMap<S>,
}

impl<S: Scalar> CoherentSystem<S> {
    pub fn new(values: VertexMap<S>) -> Self {
        CoherentSystem { values }
    }

    pub fn depth(&self) -> usize {
        self.values.levels() - 1
    }

    pub fn get(&self, z: VertexId) -> &S {
        &self.values[z]
    }

    /// Restriction to levels `0..=n`.
    pub fn truncate(&self, n: usize) -> Self {
        CoherentSystem {
            values: VertexMap(self.values.0[..=n.min(self.depth())].to_vec()),
        }
    }

    /// `(1 - t) self + t other`.
    pub fn mix(&self, other: &Self, t: &S) -> Self {
        let s = S::one() - t.clone();
        let values = self
            .values
            .0
            .iter()
            .zip(&other.values.0)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| s.clone() * x.clone() + t.clone() * y.clone())
                    .collect()
            })
            .collect();
        CoherentSystem {
            values: VertexMap(values),
        }
    }

    /// Root defect `|nu(root) - 1|`, worst level-mass defect, and vertices
    /// with infinite `Z` carrying non-zero mass.
    pub fn invariant_defects(&self, engine: &LinkEngine<'_, S>) -> InvariantDefects<S> {
        let g = engine.graph();
        let root = (self.values[VertexId::ROOT].clone() - S::one()).abs();
        let mut level_mass = S::zero();
        let mut infinite_mass = Vec::new();
        for n in 0..=self.depth().min(g.depth()) {
            let total: S = self.values.level(n).iter().cloned().sum();
            let d = (total - S::one()).abs();
            if d > level_mass {
                level_mass = d;
            }
            for z in g.vertices(n) {
                if !engine.table().is_finite(z) && !self.values[z].is_zero() {
                    infinite_mass.push(z);
                }
            }
        }
        InvariantDefects {
            root,
            level_mass,
            infinite_mass,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantDefects<S> {
    pub root: S,
    pub level_mass: S,
    pub infinite_mass: Vec<VertexId>,
}

/// A probability vector on one level.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelMeasure<S> {
    pub level: usize,
    pub weights: Vec<S>,
}

impl<S: Scalar> LevelMeasure<S> {
    /// Checks non-negativity and total mass one (within `S::default_tol()`
    /// per entry).
    pub fn new(level: usize, weights: Vec<S>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| **w < S::zero()) {
            return Err(Error::InvalidMeasure(format!("negative weight {w}")));
        }
        let total: S = weights.iter().cloned().sum();
        let tol = S::default_tol() * S::from_usize_exact(weights.len().max(1));
        if !total.within(&S::one(), &tol) {
            return Err(Error::InvalidMeasure(format!("total mass {total}")));
        }
        Ok(LevelMeasure { level, weights })
    }

    pub fn point_mass(g: &GradedGraph, z: VertexId) -> Self {
        let mut weights = vec![S::zero(); g.level_size(z.level)];
        weights[z.index] = S::one();
        LevelMeasure {
            level: z.level,
            weights,
        }
    }

    pub fn uniform(g: &GradedGraph, level: usize) -> Self {
        let n = g.level_size(level);
        LevelMeasure {
            level,
            weights: vec![S::from_ratio(1, n as i64); n],
        }
    }
}

#[derive(Clone, Debug)]
pub struct HarmonicReport<S> {
    /// `residuals[n][i] = |nu(z') - sum_z nu(z) kappa(z, z')|` for `z'` the
    /// `i`-th vertex of level `n < depth`.
    pub residuals: Vec<Vec<S>>,
    pub max_residual: S,
    pub worst: Option<VertexId>,
    pub passed: bool,
}

/// Pushes `mu` down through the link to every lower level.
pub fn extend_down<S: Scalar>(
    engine: &LinkEngine<'_, S>,
    mu: &LevelMeasure<S>,
) -> Result<CoherentSystem<S>> {
    let g = engine.graph();
    let top = mu.level;
    if top > g.depth() {
        return Err(Error::LevelOutOfRange {
            level: top,
            depth: g.depth(),
        });
    }
    if mu.weights.len() != g.level_size(top) {
        return Err(Error::InvalidMeasure(format!(
            "{} weights for {} vertices",
            mu.weights.len(),
            g.level_size(top)
        )));
    }
    for z in g.vertices(top) {
        if !engine.table().is_finite(z) && !mu.weights[z.index].is_zero() {
            return Err(Error::MassOnInfiniteVertex(g.vertex_key(z)));
        }
    }
    let mut levels = vec![Vec::new(); top + 1];
    levels[top] = mu.weights.clone();
    for n in (0..top).rev() {
        let mut next = vec![S::zero(); g.level_size(n)];
        for z in g.vertices(n + 1) {
            let mass = &levels[n + 1][z.index];
            if mass.is_zero() {
                continue;
            }
            for e in g.incoming(z) {
                let lower = g.source(e);
                next[lower.index] =
                    next[lower.index].clone() + mass.clone() * engine.adjacent(z, lower)?;
            }
        }
        levels[n] = next;
    }
    Ok(CoherentSystem::new(VertexMap(levels)))
}

/// Harmonicity residuals at every level below the system's depth.
pub fn check_harmonic<S: Scalar>(
    engine: &LinkEngine<'_, S>,
    nu: &CoherentSystem<S>,
    tol: &S,
) -> Result<HarmonicReport<S>> {
    let g = engine.graph();
    let depth = nu.depth();
    if depth > g.depth() {
        return Err(Error::LevelOutOfRange {
            level: depth,
            depth: g.depth(),
        });
    }
    let mut residuals = Vec::with_capacity(depth);
    let mut max_residual = S::zero();
    let mut worst = None;
    for n in 0..depth {
        let mut pushed = vec![S::zero(); g.level_size(n)];
        for z in g.vertices(n + 1) {
            let mass = nu.get(z);
            if mass.is_zero() {
                continue;
            }
            for e in g.incoming(z) {
                let lower = g.source(e);
                pushed[lower.index] =
                    pushed[lower.index].clone() + mass.clone() * engine.adjacent(z, lower)?;
            }
        }
        let row: Vec<S> = g
            .vertices(n)
            .map(|z| (nu.get(z).clone() - pushed[z.index].clone()).abs())
            .collect();
        for (i, r) in row.iter().enumerate() {
            if *r > max_residual {
                max_residual = r.clone();
                worst = Some(VertexId::new(n, i));
            }
        }
        residuals.push(row);
    }
    let passed = max_residual <= *tol;
    Ok(HarmonicReport {
        residuals,
        max_residual,
        worst,
        passed,
    })
}

/// `omega(a) = sum_z nu(z) tau^z(z a)` for a level-`n` observable given as
/// one diagonal part per vertex. Parts may be omitted where `nu` vanishes.
pub fn state_eval<S: Scalar>(
    engine: &LinkEngine<'_, S>,
    nu: &CoherentSystem<S>,
    n: usize,
    a: &[Option<DiagonalObservable<S>>],
) -> Result<S> {
    let g = engine.graph();
    if n > nu.depth() || n > g.depth() {
        return Err(Error::LevelOutOfRange {
            level: n,
            depth: nu.depth().min(g.depth()),
        });
    }
    if a.len() != g.level_size(n) {
        return Err(Error::MissingObservable(format!("level {n}")));
    }
    let mut total = S::zero();
    for z in g.vertices(n) {
        let mass = nu.get(z);
        if mass.is_zero() {
            continue;
        }
        let part = a[z.index]
            .as_ref()
            .ok_or_else(|| Error::MissingObservable(g.vertex_key(z)))?;
        total = total + mass.clone() * engine.tau_eval(z, part)?;
    }
    Ok(total)
}

/// The level-`n` marginal of `nu`.
pub fn decompose_at_level<S: Scalar>(nu: &CoherentSystem<S>, n: usize) -> Result<LevelMeasure<S>> {
    if n > nu.depth() {
        return Err(Error::LevelOutOfRange {
            level: n,
            depth: nu.depth(),
        });
    }
    Ok(LevelMeasure {
        level: n,
        weights: nu.values.level(n).to_vec(),
    })
}

/// `kappa(z(m), z)` along a strictly level-increasing path.
pub fn boundary_kernel_approx<S: Scalar>(
    engine: &LinkEngine<'_, S>,
    path: &[VertexId],
    z: VertexId,
) -> Result<Vec<S>> {
    let g = engine.graph();
    for w in path.windows(2) {
        if w[1].level <= w[0].level {
            return Err(Error::LevelOrderViolation {
                upper: w[1].level,
                lower: w[0].level,
            });
        }
    }
    for &v in path {
        g.check_vertex(v)?;
        if !engine.table().is_finite(v) {
            return Err(Error::InfiniteVertexOnPath(g.vertex_key(v)));
        }
        if v.level < z.level {
            return Err(Error::LevelOrderViolation {
                upper: v.level,
                lower: z.level,
            });
        }
    }
    let Some(last) = path.last() else {
        return Ok(Vec::new());
    };
    let columns = engine.kernel_columns(z, last.level)?;
    Ok(path
        .iter()
        .map(|v| columns[v.level - z.level][v.index].clone())
        .collect())
}
