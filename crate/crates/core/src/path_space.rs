//! Central measures on the path space: cylinder probabilities, down and up
//! samplers, and the ergodic-method table.
//!
//! Samplers use ChaCha8 seeded through `SeedableRng::seed_from_u64`. Each
//! categorical draw consumes one `f64` from `Rng::random` and selects by
//! cumulative weight in vertex order, so a seed determines the output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{GradedGraph, VertexId};
use crate::harmonic::CoherentSystem;
use crate::link::LinkEngine;
use crate::scalar::Scalar;

/// A descending run of edge-connected vertices `z_n, z_{n-1}, ..., z_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderSpec {
    vertices: Vec<VertexId>,
}

impl CylinderSpec {
    pub fn new(g: &GradedGraph, vertices: Vec<VertexId>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidCylinder("empty".into()));
        }
        for &v in &vertices {
            if !g.contains(v) {
                return Err(Error::InvalidCylinder(format!("unknown vertex {v:?}")));
            }
        }
        for w in vertices.windows(2) {
            if w[0].level != w[1].level + 1 {
                return Err(Error::InvalidCylinder(format!(
                    "levels {} and {} are not consecutive",
                    w[0].level, w[1].level
                )));
            }
            if g.edge_between(w[0], w[1]).is_none() {
                return Err(Error::InvalidCylinder(format!(
                    "no edge between {} and {}",
                    g.vertex_key(w[0]),
                    g.vertex_key(w[1])
                )));
            }
        }
        Ok(CylinderSpec { vertices })
    }

    /// Builds from an upward path (levels increasing), e.g. a sampled path.
    pub fn from_upward(g: &GradedGraph, path: &[VertexId]) -> Result<Self> {
        Self::new(g, path.iter().rev().copied().collect())
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn top(&self) -> VertexId {
        self.vertices[0]
    }
}

/// `nu(z_n) kappa(z_n, z_{n-1}) ... kappa(z_{m+1}, z_m)`.
pub fn cylinder_prob<S: Scalar>(
    engine: &LinkEngine<'_, S>,
    nu: &CoherentSystem<S>,
    c: &CylinderSpec,
) -> Result<S> {
    let top = c.top();
    if top.level > nu.depth() {
        return Err(Error::InvalidCylinder(format!(
            "top level {} exceeds system depth {}",
            top.level,
            nu.depth()
        )));
    }
    let mut p = nu.get(top).clone();
    for w in c.vertices.windows(2) {
        if p.is_zero() {
            break;
        }
        p = p * engine.adjacent(w[0], w[1])?;
    }
    Ok(p)
}

/// One sampled path, levels `1..=n` in increasing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampledPath {
    pub seed: u64,
    /// Zero-based index of this draw within its sampler.
    pub draw: u64,
    pub vertices: Vec<VertexId>,
}

pub struct PathSampler {
    seed: u64,
    rng: ChaCha8Rng,
    draws: u64,
}

impl PathSampler {
    pub fn new(seed: u64) -> Self {
        PathSampler {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            draws: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Index of a categorical draw with the given non-negative weights.
    fn pick(&mut self, weights: &[f64]) -> Option<usize> {
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 {
            return None;
        }
        let u = self.rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut last = None;
        for (i, &w) in weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            acc += w;
            last = Some(i);
            if u < acc {
                return Some(i);
            }
        }
        last
    }

    fn finish(&mut self, vertices: Vec<VertexId>) -> SampledPath {
        let draw = self.draws;
        self.draws += 1;
        SampledPath {
            seed: self.seed,
            draw,
            vertices,
        }
    }

    /// Draws `z_n` from `nu` on level `n`, then descends with `kappa`.
    pub fn sample_down<S: Scalar>(
        &mut self,
        engine: &LinkEngine<'_, S>,
        nu: &CoherentSystem<S>,
        n: usize,
    ) -> Result<SampledPath> {
        let g = engine.graph();
        if n > nu.depth() || n > g.depth() {
            return Err(Error::LevelOutOfRange {
                level: n,
                depth: nu.depth().min(g.depth()),
            });
        }
        let weights: Vec<f64> = nu.values.level(n).iter().map(|v| v.as_f64()).collect();
        let top = self
            .pick(&weights)
            .ok_or_else(|| Error::ZeroMassVertex(format!("level {n}")))?;
        let mut z = VertexId::new(n, top);
        let mut path = vec![z];
        while z.level > 1 {
            let lowers: Vec<VertexId> = g.incoming(z).map(|e| g.source(e)).collect();
            let weights = lowers
                .iter()
                .map(|&l| engine.adjacent(z, l).map(|k| k.as_f64()))
                .collect::<Result<Vec<f64>>>()?;
            let i = self
                .pick(&weights)
                .ok_or_else(|| Error::ZeroMassVertex(g.vertex_key(z)))?;
            z = lowers[i];
            path.push(z);
        }
        path.reverse();
        Ok(self.finish(path))
    }

    /// Grows a path from the root with `p(z' -> z) = nu(z) kappa(z, z') / nu(z')`.
    pub fn sample_up<S: Scalar>(
        &mut self,
        engine: &LinkEngine<'_, S>,
        nu: &CoherentSystem<S>,
        n: usize,
    ) -> Result<SampledPath> {
        let g = engine.graph();
        if n > nu.depth() || n > g.depth() {
            return Err(Error::LevelOutOfRange {
                level: n,
                depth: nu.depth().min(g.depth()),
            });
        }
        let mut z = VertexId::ROOT;
        let mut path = Vec::with_capacity(n);
        for _ in 0..n {
            if nu.get(z).is_zero() {
                return Err(Error::ZeroMassVertex(g.vertex_key(z)));
            }
            let uppers: Vec<VertexId> = g.outgoing(z).map(|e| g.target(e)).collect();
            let weights = uppers
                .iter()
                .map(|&u| {
                    engine
                        .adjacent(u, z)
                        .map(|k| (nu.get(u).clone() * k).as_f64())
                })
                .collect::<Result<Vec<f64>>>()?;
            let i = self
                .pick(&weights)
                .ok_or_else(|| Error::ZeroMassVertex(g.vertex_key(z)))?;
            z = uppers[i];
            path.push(z);
        }
        Ok(self.finish(path))
    }
}

/// Rows `m -> kappa(z(m), target)` along a growing path.
#[derive(Clone, Debug, PartialEq)]
pub struct ErgodicTable<S> {
    pub targets: Vec<VertexId>,
    pub levels: Vec<usize>,
    pub values: Vec<Vec<S>>,
    /// Per row, `max_target |kappa(z(m), target) - nu(target)|`, when a
    /// reference system was supplied.
    pub deviation: Option<Vec<S>>,
}

/// Evaluates the link from every vertex of `path` to every target. Rows are
/// emitted only for path vertices at or above every target's level.
pub fn ergodic_experiment<S: Scalar>(
    engine: &LinkEngine<'_, S>,
    nu: Option<&CoherentSystem<S>>,
    targets: &[VertexId],
    path: &[VertexId],
) -> Result<ErgodicTable<S>> {
    let g = engine.graph();
    for &t in targets {
        g.check_vertex(t)?;
    }
    let floor = targets.iter().map(|t| t.level).max().unwrap_or(0);
    let rows: Vec<VertexId> = path.iter().copied().filter(|v| v.level >= floor).collect();
    let mut columns = Vec::with_capacity(targets.len());
    for &t in targets {
        columns.push(crate::harmonic::boundary_kernel_approx(engine, &rows, t)?);
    }
    let values: Vec<Vec<S>> = (0..rows.len())
        .map(|r| columns.iter().map(|c| c[r].clone()).collect())
        .collect();
    let deviation = nu.map(|nu| {
        values
            .iter()
            .map(|row| {
                row.iter()
                    .zip(targets)
                    .map(|(v, &t)| {
                        let reference = if t.level <= nu.depth() {
                            nu.get(t).clone()
                        } else {
                            S::zero()
                        };
                        (v.clone() - reference).abs()
                    })
                    .fold(S::zero(), |a, b| if b > a { b } else { a })
            })
            .collect()
    });
    Ok(ErgodicTable {
        targets: targets.to_vec(),
        levels: rows.iter().map(|v| v.level).collect(),
        values,
        deviation,
    })
}
