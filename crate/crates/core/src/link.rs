//! Markov links between levels, local Gibbs states and conditional
//! expectations on diagonal observables.
//!
//! The closed form used throughout is
//!
//! ```text
//! kappa(z, z'') = Z(z'') * W(z'' -> z) / Z(z)      if Z(z) < inf
//!               = 0                                 otherwise
//! ```
//!
//! where `W(z'' -> z)` sums `prod Z(e_i)` over edge paths from `z''` up to
//! `z`. The factor `Z(z'')` accounts for the trace over `H_{z''}`; it
//! disappears only when every vertex partition function equals one.
//! [`LinkEngine::link_by_trace`] evaluates the same quantity directly as
//! `Tr(rho_z P_{z''}) / Z(z)` on the canonical basis.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::flow::{FlowSpec, PartitionTable};
use crate::graph::{BasisElement, GradedGraph, VertexId};
use crate::scalar::{Extended, Scalar};

/// A real function on the canonical basis of `H_z`, i.e. a diagonal element
/// of `z A_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalObservable<S> {
    pub vertex: VertexId,
    pub values: Vec<S>,
}

impl<S: Scalar> DiagonalObservable<S> {
    pub fn new(vertex: VertexId, values: Vec<S>) -> Self {
        DiagonalObservable { vertex, values }
    }

    pub fn constant(g: &GradedGraph, vertex: VertexId, value: S) -> Result<Self> {
        let dim = g.dim_vertex(vertex)? as usize;
        Ok(DiagonalObservable {
            vertex,
            values: vec![value; dim],
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Link values between two levels. Rows are upper-level vertices, columns
/// lower-level vertices; rows of infinite-`Z` vertices are stored as zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkMatrix<S> {
    pub upper: usize,
    pub lower: usize,
    pub entries: Vec<Vec<S>>,
    pub finite_rows: Vec<bool>,
}

impl<S: Scalar> LinkMatrix<S> {
    pub fn get(&self, row: usize, col: usize) -> &S {
        &self.entries[row][col]
    }

    pub fn row_sum(&self, row: usize) -> S {
        self.entries[row].iter().cloned().sum()
    }

    /// Matrix product `self * other`; `other.upper` must equal `self.lower`.
    pub fn compose(&self, other: &LinkMatrix<S>) -> Vec<Vec<S>> {
        assert_eq!(self.lower, other.upper, "levels do not chain");
        self.entries
            .iter()
            .map(|row| {
                (0..other.entries.first().map_or(0, |r| r.len()))
                    .map(|j| {
                        row.iter()
                            .zip(&other.entries)
                            .filter(|(a, _)| !a.is_zero())
                            .map(|(a, r)| a.clone() * r[j].clone())
                            .sum()
                    })
                    .collect()
            })
            .collect()
    }
}

/// Gibbs state of one vertex: canonical basis, `rho_{beta,z}` diagonal and
/// `Z_beta(z)`.
#[derive(Clone, Debug)]
pub struct LocalState<S> {
    pub vertex: VertexId,
    pub basis: Vec<BasisElement>,
    pub rho: Vec<S>,
    pub partition: S,
}

impl<S: Scalar> LocalState<S> {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `tau(a) = sum_i rho_i a_i / Z`.
    pub fn tau(&self, a: &DiagonalObservable<S>) -> Result<S> {
        if a.vertex != self.vertex || a.values.len() != self.rho.len() {
            return Err(Error::MissingObservable(format!(
                "observable of size {} for {:?} (dim {})",
                a.values.len(),
                self.vertex,
                self.rho.len()
            )));
        }
        let total: S = self
            .rho
            .iter()
            .zip(&a.values)
            .map(|(r, v)| r.clone() * v.clone())
            .sum();
        Ok(total / self.partition.clone())
    }

    /// Projection onto the paths through `lower` (the central element `z z''`).
    pub fn indicator_through(&self, g: &GradedGraph, lower: VertexId) -> DiagonalObservable<S> {
        let values = self
            .basis
            .iter()
            .map(|b| {
                let through = lower.level <= self.vertex.level
                    && g.path_vertices(&b.path[..lower.level]).last() == Some(&lower);
                if through {
                    S::one()
                } else {
                    S::zero()
                }
            })
            .collect();
        DiagonalObservable::new(self.vertex, values)
    }
}

#[derive(Clone, Debug)]
pub struct MarkovReport<S> {
    pub level: usize,
    pub negative_entries: usize,
    pub max_row_defect: S,
    pub max_root_defect: S,
    pub max_composition_defect: S,
    /// Upper-level vertices with infinite partition function (zero rows,
    /// normalization skipped).
    pub infinite_rows: Vec<VertexId>,
    pub passed: bool,
}

pub struct LinkEngine<'a, S> {
    flow: &'a FlowSpec<S>,
    table: PartitionTable<S>,
}

impl<'a, S: Scalar> LinkEngine<'a, S> {
    pub fn new(flow: &'a FlowSpec<S>) -> Result<Self> {
        Ok(LinkEngine {
            flow,
            table: flow.vertex_partition()?,
        })
    }

    pub fn flow(&self) -> &'a FlowSpec<S> {
        self.flow
    }

    pub fn graph(&self) -> &'a GradedGraph {
        self.flow.graph()
    }

    pub fn table(&self) -> &PartitionTable<S> {
        &self.table
    }

    fn finite_z(&self, z: VertexId) -> Option<&S> {
        self.table.vertex_z(z).finite()
    }

    /// `kappa(z, z')` for `z` at level `n` and `z'` at level `n - 1`.
    pub fn adjacent(&self, z: VertexId, lower: VertexId) -> Result<S> {
        let g = self.graph();
        g.check_vertex(z)?;
        g.check_vertex(lower)?;
        if z.level != lower.level + 1 {
            return Err(Error::NonAdjacentLevels {
                upper: z.level,
                lower: lower.level,
            });
        }
        let Some(zz) = self.finite_z(z) else {
            return Ok(S::zero());
        };
        match g.edge_between(z, lower) {
            None => Ok(S::zero()),
            Some(e) => {
                let ze = self.table.edge_z(e).finite().cloned();
                let zl = self.finite_z(lower).cloned();
                match (ze, zl) {
                    (Some(ze), Some(zl)) => Ok(zl * ze / zz.clone()),
                    // unreachable when Z(z) is finite
                    _ => Ok(S::zero()),
                }
            }
        }
    }

    /// `W(from -> z)` for every `z` at `level >= from.level`.
    pub fn forward_weights(&self, from: VertexId, level: usize) -> Vec<Extended<S>> {
        let g = self.graph();
        let mut cur = vec![Extended::zero(); g.level_size(from.level)];
        cur[from.index] = Extended::Finite(S::one());
        for n in from.level + 1..=level {
            let mut next = vec![Extended::zero(); g.level_size(n)];
            for e in g.edge_ids(n) {
                let edge = g.edge(e);
                let term = cur[edge.source].mul(self.table.edge_z(e));
                next[edge.target] = next[edge.target].add(&term);
            }
            cur = next;
        }
        cur
    }

    fn kernel_from_weight(&self, z: VertexId, lower: VertexId, w: &Extended<S>) -> S {
        let Some(zz) = self.finite_z(z) else {
            return S::zero();
        };
        match (self.finite_z(lower), w.finite()) {
            (Some(zl), Some(w)) => zl.clone() * w.clone() / zz.clone(),
            _ => S::zero(),
        }
    }

    /// `kappa(z, z'')` for `z''` at any level `<= z.level`; same level gives
    /// the indicator `z == z''` on finite vertices.
    pub fn kernel(&self, z: VertexId, lower: VertexId) -> Result<S> {
        let g = self.graph();
        g.check_vertex(z)?;
        g.check_vertex(lower)?;
        if lower.level > z.level {
            return Err(Error::LevelOrderViolation {
                upper: z.level,
                lower: lower.level,
            });
        }
        let w = &self.forward_weights(lower, z.level)[z.index];
        Ok(self.kernel_from_weight(z, lower, w))
    }

    /// `kappa(z, z'')` with `z''` strictly below `z`.
    pub fn multi(&self, z: VertexId, lower: VertexId) -> Result<S> {
        if lower.level >= z.level {
            return Err(Error::LevelOrderViolation {
                upper: z.level,
                lower: lower.level,
            });
        }
        self.kernel(z, lower)
    }

    /// `kappa(z, lower)` for every `z` at `level`.
    pub fn column(&self, lower: VertexId, level: usize) -> Result<Vec<S>> {
        let g = self.graph();
        g.check_vertex(lower)?;
        if level < lower.level || level > g.depth() {
            return Err(Error::LevelOrderViolation {
                upper: level,
                lower: lower.level,
            });
        }
        let w = self.forward_weights(lower, level);
        Ok(g.vertices(level)
            .map(|z| self.kernel_from_weight(z, lower, &w[z.index]))
            .collect())
    }

    /// `kappa(z, lower)` for every `z` at every level from `lower.level` up
    /// to `max_level`, in one sweep. Entry `[k]` holds level `lower.level + k`.
    pub fn kernel_columns(&self, lower: VertexId, max_level: usize) -> Result<Vec<Vec<S>>> {
        let g = self.graph();
        g.check_vertex(lower)?;
        if max_level < lower.level || max_level > g.depth() {
            return Err(Error::LevelOrderViolation {
                upper: max_level,
                lower: lower.level,
            });
        }
        let mut out = Vec::with_capacity(max_level - lower.level + 1);
        let mut cur = vec![Extended::zero(); g.level_size(lower.level)];
        cur[lower.index] = Extended::Finite(S::one());
        for n in lower.level..=max_level {
            if n > lower.level {
                let mut next = vec![Extended::zero(); g.level_size(n)];
                for e in g.edge_ids(n) {
                    let edge = g.edge(e);
                    let term = cur[edge.source].mul(self.table.edge_z(e));
                    next[edge.target] = next[edge.target].add(&term);
                }
                cur = next;
            }
            out.push(
                g.vertices(n)
                    .map(|z| self.kernel_from_weight(z, lower, &cur[z.index]))
                    .collect(),
            );
        }
        Ok(out)
    }

    /// The link as a matrix from level `upper` down to level `lower`.
    pub fn matrix(&self, upper: usize, lower: usize) -> Result<LinkMatrix<S>> {
        let g = self.graph();
        if upper <= lower {
            return Err(Error::LevelOrderViolation { upper, lower });
        }
        if upper > g.depth() {
            return Err(Error::LevelOutOfRange {
                level: upper,
                depth: g.depth(),
            });
        }
        let mut entries = vec![vec![S::zero(); g.level_size(lower)]; g.level_size(upper)];
        for v in g.vertices(lower) {
            for (i, k) in self.column(v, upper)?.into_iter().enumerate() {
                entries[i][v.index] = k;
            }
        }
        let finite_rows = g.vertices(upper).map(|z| self.table.is_finite(z)).collect();
        Ok(LinkMatrix {
            upper,
            lower,
            entries,
            finite_rows,
        })
    }

    pub fn local_state(&self, z: VertexId) -> Result<LocalState<S>> {
        let g = self.graph();
        g.check_vertex(z)?;
        let partition = self
            .finite_z(z)
            .cloned()
            .ok_or_else(|| Error::InfinitePartitionFunction(g.vertex_key(z)))?;
        let (basis, rho) = self.flow.local_weights(z)?;
        Ok(LocalState {
            vertex: z,
            basis,
            rho,
            partition,
        })
    }

    /// `tau^{z}(a)`, the normalized Gibbs state of `z` on a diagonal observable.
    pub fn tau_eval(&self, z: VertexId, a: &DiagonalObservable<S>) -> Result<S> {
        self.local_state(z)?.tau(a)
    }

    /// `Tr(rho_z P_{z''}) / Z(z)`, evaluated on the canonical basis.
    pub fn link_by_trace(&self, z: VertexId, lower: VertexId) -> Result<S> {
        if !self.table.is_finite(z) {
            return Ok(S::zero());
        }
        let state = self.local_state(z)?;
        state.tau(&state.indicator_through(self.graph(), lower))
    }

    /// Embedding `iota_{z z'}`: the value on each basis element of `z`
    /// passing through `z'` is `a` at the corresponding basis element of
    /// `z'`; elsewhere zero.
    pub fn embed(&self, a: &DiagonalObservable<S>, z: VertexId) -> Result<DiagonalObservable<S>> {
        let g = self.graph();
        let lower = a.vertex;
        if lower.level > z.level {
            return Err(Error::LevelOrderViolation {
                upper: z.level,
                lower: lower.level,
            });
        }
        let lower_basis = g.basis(lower)?;
        if lower_basis.len() != a.values.len() {
            return Err(Error::MissingObservable(g.vertex_key(lower)));
        }
        let index: HashMap<&BasisElement, usize> = lower_basis
            .iter()
            .enumerate()
            .map(|(i, b)| (b, i))
            .collect();
        let values = g
            .basis(z)?
            .iter()
            .map(|b| {
                let p = b.prefix(lower.level);
                index.get(&p).map_or_else(S::zero, |&i| a.values[i].clone())
            })
            .collect();
        Ok(DiagonalObservable::new(z, values))
    }

    /// Embeds a level-`m` observable `sum_{z'} z' a_{z'}` into every vertex
    /// of level `n`. Missing parts count as zero.
    pub fn embed_level(
        &self,
        parts: &[Option<DiagonalObservable<S>>],
        m: usize,
        n: usize,
    ) -> Result<Vec<Option<DiagonalObservable<S>>>> {
        let g = self.graph();
        if m > n || n > g.depth() {
            return Err(Error::LevelOrderViolation { upper: n, lower: m });
        }
        if parts.len() != g.level_size(m) {
            return Err(Error::MissingObservable(format!("level {m}")));
        }
        let mut indices: Vec<HashMap<BasisElement, usize>> = Vec::with_capacity(parts.len());
        for v in g.vertices(m) {
            indices.push(
                g.basis(v)?
                    .into_iter()
                    .enumerate()
                    .map(|(i, b)| (b, i))
                    .collect(),
            );
        }
        let mut out = Vec::with_capacity(g.level_size(n));
        for z in g.vertices(n) {
            let values = g
                .basis(z)?
                .iter()
                .map(|b| {
                    let through = g.path_vertices(&b.path[..m]).last().copied();
                    let through = through.expect("root is always visited");
                    let prefix = b.prefix(m);
                    match &parts[through.index] {
                        Some(a) => indices[through.index]
                            .get(&prefix)
                            .and_then(|&i| a.values.get(i).cloned())
                            .unwrap_or_else(S::zero),
                        None => S::zero(),
                    }
                })
                .collect();
            out.push(Some(DiagonalObservable::new(z, values)));
        }
        Ok(out)
    }

    /// Coefficients of `E_n(a) = sum_{z finite} tau^z(z a) z`; zero on
    /// infinite-`Z` vertices.
    pub fn conditional_expectation(
        &self,
        n: usize,
        a: &[Option<DiagonalObservable<S>>],
    ) -> Result<Vec<S>> {
        let g = self.graph();
        if n > g.depth() {
            return Err(Error::LevelOutOfRange {
                level: n,
                depth: g.depth(),
            });
        }
        if a.len() != g.level_size(n) {
            return Err(Error::MissingObservable(format!("level {n}")));
        }
        g.vertices(n)
            .map(|z| {
                if !self.table.is_finite(z) {
                    return Ok(S::zero());
                }
                match &a[z.index] {
                    Some(obs) => self.tau_eval(z, obs),
                    None => Err(Error::MissingObservable(g.vertex_key(z))),
                }
            })
            .collect()
    }

    /// `|tau^z(iota_{zz'}(a)) - kappa(z,z') tau^{z'}(a)| <= tol`.
    pub fn verify_compatibility(
        &self,
        z: VertexId,
        lower: VertexId,
        a: &DiagonalObservable<S>,
        tol: &S,
    ) -> Result<bool> {
        let g = self.graph();
        for v in [z, lower] {
            if !self.table.is_finite(v) {
                return Err(Error::InfinitePartitionFunction(g.vertex_key(v)));
            }
        }
        let lhs = self.tau_eval(z, &self.embed(a, z)?)?;
        let rhs = self.kernel(z, lower)? * self.tau_eval(lower, a)?;
        Ok(lhs.within(&rhs, tol))
    }

    /// Non-negativity, normalization of finite rows, `kappa(z, root) = 1`,
    /// and Chapman-Kolmogorov through every intermediate level, for all
    /// links out of level `n`.
    pub fn verify_markov(&self, n: usize, tol: &S) -> Result<MarkovReport<S>> {
        let g = self.graph();
        if n > g.depth() {
            return Err(Error::LevelOutOfRange {
                level: n,
                depth: g.depth(),
            });
        }
        let mut report = MarkovReport {
            level: n,
            negative_entries: 0,
            max_row_defect: S::zero(),
            max_root_defect: S::zero(),
            max_composition_defect: S::zero(),
            infinite_rows: g
                .vertices(n)
                .filter(|&z| !self.table.is_finite(z))
                .collect(),
            passed: true,
        };
        let mut cache: HashMap<(usize, usize), LinkMatrix<S>> = HashMap::new();
        let mut get = |u: usize, l: usize| -> Result<LinkMatrix<S>> {
            if let Some(m) = cache.get(&(u, l)) {
                return Ok(m.clone());
            }
            let m = self.matrix(u, l)?;
            cache.insert((u, l), m.clone());
            Ok(m)
        };
        let bump = |slot: &mut S, v: S| {
            if v > *slot {
                *slot = v;
            }
        };
        for m in 0..n {
            let k = get(n, m)?;
            for (i, row) in k.entries.iter().enumerate() {
                report.negative_entries += row.iter().filter(|v| **v < S::zero()).count();
                if !k.finite_rows[i] {
                    if row.iter().any(|v| !v.is_zero()) {
                        report.negative_entries += 1;
                    }
                    continue;
                }
                bump(&mut report.max_row_defect, (k.row_sum(i) - S::one()).abs());
                if m == 0 {
                    bump(
                        &mut report.max_root_defect,
                        (row[0].clone() - S::one()).abs(),
                    );
                }
            }
            for l in 0..m {
                let direct = get(n, l)?;
                let lower = get(m, l)?;
                let composed = k.compose(&lower);
                for (r1, r2) in direct.entries.iter().zip(&composed) {
                    for (a, b) in r1.iter().zip(r2) {
                        bump(
                            &mut report.max_composition_defect,
                            (a.clone() - b.clone()).abs(),
                        );
                    }
                }
            }
        }
        report.passed = report.negative_entries == 0
            && report.max_row_defect <= *tol
            && report.max_root_defect <= *tol
            && report.max_composition_defect <= *tol;
        Ok(report)
    }
}
