//! Ready-made graphs, flows and coherent systems: Pascal, q-weighted Pascal,
//! Young with Plancherel, plus seeded random generators for tests.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flow::{EdgeThermal, FlowSpec};
use crate::graph::{Edge, GradedGraph, VertexMap};
use crate::harmonic::CoherentSystem;
use crate::scalar::Scalar;

/// Largest depth accepted by [`young`].
pub const YOUNG_MAX_DEPTH: usize = 12;

/// Pascal graph to depth `n`: vertex `(n, k)` is labelled `k`, with edges
/// from `(n-1, k)` and `(n-1, k-1)`.
pub fn pascal(n: usize) -> Result<GradedGraph> {
    if n < 1 {
        return Err(Error::ParameterOutOfRange(format!("depth {n} < 1")));
    }
    let levels = (0..=n)
        .map(|l| (0..=l).map(|k| k.to_string()).collect())
        .collect();
    let edges = (1..=n)
        .map(|l| {
            let mut row = Vec::with_capacity(2 * l);
            for k in 0..=l {
                if k < l {
                    row.push(Edge {
                        source: k,
                        target: k,
                        multiplicity: 1,
                    });
                }
                if k > 0 {
                    row.push(Edge {
                        source: k - 1,
                        target: k,
                        multiplicity: 1,
                    });
                }
            }
            row
        })
        .collect();
    GradedGraph::new(levels, edges)
}

/// Pascal graph with every edge spectrum `{0}`.
pub fn pascal_flow<S: Scalar>(n: usize, beta: S) -> Result<FlowSpec<S>> {
    Ok(FlowSpec::ground(Arc::new(pascal(n)?), beta))
}

/// `nu_p(n, k) = C(n, k) p^k (1 - p)^(n - k)`.
pub fn bernoulli_system<S: Scalar>(n: usize, p: S) -> Result<CoherentSystem<S>> {
    if !(p > S::zero() && p < S::one()) {
        return Err(Error::ParameterOutOfRange(format!("p = {p} not in (0, 1)")));
    }
    if n < 1 {
        return Err(Error::ParameterOutOfRange(format!("depth {n} < 1")));
    }
    let q = S::one() - p.clone();
    let mut levels: Vec<Vec<S>> = vec![vec![S::one()]];
    for l in 1..=n {
        let prev = &levels[l - 1];
        let row = (0..=l)
            .map(|k| {
                let stay = if k < l {
                    prev[k].clone() * q.clone()
                } else {
                    S::zero()
                };
                let step = if k > 0 {
                    prev[k - 1].clone() * p.clone()
                } else {
                    S::zero()
                };
                stay + step
            })
            .collect();
        levels.push(row);
    }
    Ok(CoherentSystem::new(VertexMap(levels)))
}

/// Pascal graph whose left step into `(n, k)` has Boltzmann weight `q^k`
/// and whose right step has weight 1. A path then weighs `q` to the number
/// of (right, left) inversions, so `Z(n, k)` is the Gaussian binomial
/// `[n choose k]_q`, and at `q = 1` the link is the classical one.
///
/// Putting `q^k` on the right step instead gives every path into `(n, k)`
/// the same weight and a link that does not see `q` at all.
pub fn q_pascal<S: Scalar>(n: usize, q: S, beta: S) -> Result<FlowSpec<S>> {
    if !(q > S::zero() && q <= S::one()) {
        return Err(Error::ParameterOutOfRange(format!("q = {q} not in (0, 1]")));
    }
    if beta.is_zero() {
        return Err(Error::ParameterOutOfRange("beta must be non-zero".into()));
    }
    let g = Arc::new(pascal(n)?);
    let thermal = g.edge_map_with(|_, e| {
        if e.source == e.target {
            EdgeThermal::Boltzmann(vec![q.powu(e.target as u32)])
        } else {
            EdgeThermal::Boltzmann(vec![S::one()])
        }
    });
    FlowSpec::new(g, beta, thermal)
}

/// Partitions of `n` in reverse-lexicographic order.
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=rest.min(max)).rev() {
            cur.push(part);
            go(rest - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// Label of a partition: `(3,1,1)`; the empty partition is `()`.
pub fn partition_label(p: &[usize]) -> String {
    let parts: Vec<String> = p.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

/// Young's lattice to depth `n <= 12`: partitions of each size, an edge for
/// every added box.
pub fn young(n: usize) -> Result<GradedGraph> {
    if n > YOUNG_MAX_DEPTH {
        return Err(Error::DepthLimit {
            depth: n,
            limit: YOUNG_MAX_DEPTH,
        });
    }
    if n < 1 {
        return Err(Error::ParameterOutOfRange(format!("depth {n} < 1")));
    }
    let parts: Vec<Vec<Vec<usize>>> = (0..=n).map(partitions).collect();
    let mut edges = Vec::with_capacity(n);
    for l in 1..=n {
        let index: std::collections::HashMap<&[usize], usize> = parts[l - 1]
            .iter()
            .enumerate()
            .map(|(i, p)| (p.as_slice(), i))
            .collect();
        let mut row = Vec::new();
        for (t, lambda) in parts[l].iter().enumerate() {
            for i in 0..lambda.len() {
                // removable corner: the next row is strictly shorter
                if i + 1 < lambda.len() && lambda[i + 1] == lambda[i] {
                    continue;
                }
                let mut mu = lambda.clone();
                mu[i] -= 1;
                if mu[i] == 0 {
                    mu.pop();
                }
                row.push(Edge {
                    source: index[mu.as_slice()],
                    target: t,
                    multiplicity: 1,
                });
            }
        }
        edges.push(row);
    }
    let levels = parts
        .iter()
        .map(|ps| ps.iter().map(|p| partition_label(p)).collect())
        .collect();
    GradedGraph::new(levels, edges)
}

pub fn young_flow<S: Scalar>(n: usize, beta: S) -> Result<FlowSpec<S>> {
    Ok(FlowSpec::ground(Arc::new(young(n)?), beta))
}

/// `nu(lambda) = dim(lambda)^2 / n!`.
pub fn plancherel_system<S: Scalar>(n: usize) -> Result<CoherentSystem<S>> {
    let g = young(n)?;
    let mut levels = Vec::with_capacity(n + 1);
    let mut factorial: i64 = 1;
    for l in 0..=n {
        if l > 0 {
            factorial *= l as i64;
        }
        let row = g
            .vertices(l)
            .map(|z| {
                let d = g.dim_vertex(z)? as i64;
                Ok(S::from_ratio(d * d, factorial))
            })
            .collect::<Result<Vec<S>>>()?;
        levels.push(row);
    }
    Ok(CoherentSystem::new(VertexMap(levels)))
}

/// Seeded random graphs, flows, links and measures.
pub mod random {
    use std::sync::Arc;

    use rand::Rng;

    use crate::error::Result;
    use crate::flow::{EdgeThermal, FlowSpec};
    use crate::graph::{Edge, EdgeMap, GradedGraph, VertexMap};
    use crate::harmonic::LevelMeasure;
    use crate::link::LinkEngine;
    use crate::realize::AbstractLink;
    use crate::scalar::{Extended, Scalar};

    /// A valid graph with `1..=max_width` vertices per level and
    /// multiplicities in `1..=max_mult`.
    pub fn graph<R: Rng>(
        rng: &mut R,
        depth: usize,
        max_width: usize,
        max_mult: u32,
    ) -> GradedGraph {
        let widths: Vec<usize> = (0..=depth)
            .map(|n| {
                if n == 0 {
                    1
                } else {
                    rng.random_range(1..=max_width)
                }
            })
            .collect();
        let levels = widths
            .iter()
            .enumerate()
            .map(|(n, &w)| {
                if n == 0 {
                    vec!["1".to_string()]
                } else {
                    (0..w).map(|i| format!("v{n}_{i}")).collect()
                }
            })
            .collect();
        let mut edges = Vec::with_capacity(depth);
        for n in 1..=depth {
            let (below, here) = (widths[n - 1], widths[n]);
            let mut joined = vec![vec![false; below]; here];
            for row in joined.iter_mut() {
                let first = rng.random_range(0..below);
                row[first] = true;
                for cell in row.iter_mut() {
                    if rng.random_bool(0.35) {
                        *cell = true;
                    }
                }
            }
            for s in 0..below {
                if !joined.iter().any(|row| row[s]) {
                    let t = rng.random_range(0..here);
                    joined[t][s] = true;
                }
            }
            let mut row = Vec::new();
            for (t, sources) in joined.iter().enumerate() {
                for (s, &on) in sources.iter().enumerate() {
                    if on {
                        row.push(Edge {
                            source: s,
                            target: t,
                            multiplicity: rng.random_range(1..=max_mult),
                        });
                    }
                }
            }
            edges.push(row);
        }
        GradedGraph::new(levels, edges).expect("random graph is well formed")
    }

    /// Edge spectra drawn uniformly from `[-1, 1]`.
    pub fn spectral_flow<R: Rng>(rng: &mut R, g: Arc<GradedGraph>, beta: f64) -> FlowSpec<f64> {
        let thermal = g.edge_map_with(|_, e| {
            EdgeThermal::Spectrum(
                (0..e.multiplicity)
                    .map(|_| rng.random_range(-1.0..=1.0))
                    .collect(),
            )
        });
        FlowSpec::new(g, beta, thermal).expect("thermal data matches the graph")
    }

    /// Boltzmann weights `k / 8` with `k` in `1..=16`; exact in any field.
    pub fn boltzmann_flow<S: Scalar, R: Rng>(
        rng: &mut R,
        g: Arc<GradedGraph>,
        beta: S,
    ) -> FlowSpec<S> {
        let thermal = g.edge_map_with(|_, e| {
            EdgeThermal::Boltzmann(
                (0..e.multiplicity)
                    .map(|_| S::from_ratio(rng.random_range(1..=16), 8))
                    .collect(),
            )
        });
        FlowSpec::new(g, beta, thermal).expect("thermal data matches the graph")
    }

    /// Incoming weights proportional to random integers in `1..=9`.
    pub fn link<S: Scalar, R: Rng>(rng: &mut R, g: Arc<GradedGraph>) -> AbstractLink<S> {
        let mut weights: EdgeMap<S> = g.edge_map(S::zero());
        for n in 1..=g.depth() {
            for z in g.vertices(n) {
                let ids: Vec<_> = g.incoming(z).collect();
                let raw: Vec<i64> = ids.iter().map(|_| rng.random_range(1..=9)).collect();
                let total: i64 = raw.iter().sum();
                for (e, r) in ids.into_iter().zip(raw) {
                    weights[e] = S::from_ratio(r, total);
                }
            }
        }
        AbstractLink::new(g, weights).expect("rows are normalized")
    }

    /// A probability vector on `level` supported on finite-`Z` vertices.
    /// Falls back to zero weights if none are finite.
    pub fn level_measure<S: Scalar, R: Rng>(
        rng: &mut R,
        engine: &LinkEngine<'_, S>,
        level: usize,
    ) -> LevelMeasure<S> {
        let g = engine.graph();
        let raw: Vec<i64> = g
            .vertices(level)
            .map(|z| {
                if engine.table().is_finite(z) {
                    rng.random_range(0..=9)
                } else {
                    0
                }
            })
            .collect();
        let mut raw = raw;
        let total: i64 = raw.iter().sum();
        let total = if total == 0 {
            match g.vertices(level).find(|&z| engine.table().is_finite(z)) {
                Some(z) => {
                    raw[z.index] = 1;
                    1
                }
                None => 1,
            }
        } else {
            total
        };
        LevelMeasure {
            level,
            weights: raw.into_iter().map(|r| S::from_ratio(r, total)).collect(),
        }
    }

    /// An admissible gauge `lambda_e = Lambda(r(e)) - Lambda(s(e))` from a
    /// random potential with `Lambda(root) = 0`.
    pub fn gauge<S: Scalar, R: Rng>(rng: &mut R, g: &GradedGraph) -> EdgeMap<S> {
        let mut potential: VertexMap<S> = g.vertex_map(S::zero());
        for z in g.all_vertices().skip(1) {
            potential[z] = S::from_ratio(rng.random_range(-8..=8), 4);
        }
        let mut shifts = g.edge_map(S::zero());
        for e in g.all_edge_ids() {
            shifts[e] = potential[g.target(e)].clone() - potential[g.source(e)].clone();
        }
        shifts
    }

    /// Marks each edge above level 1 as having infinite partition value
    /// with probability `fraction`.
    pub fn with_infinite_edges<S: Scalar, R: Rng>(
        rng: &mut R,
        flow: &FlowSpec<S>,
        fraction: f64,
    ) -> Result<FlowSpec<S>> {
        let mut thermal = flow.thermal_map().clone();
        for e in flow.graph().all_edge_ids() {
            if e.level >= 2 && rng.random_bool(fraction) {
                thermal[e] = EdgeThermal::PartitionOnly(Extended::Infinite);
            }
        }
        FlowSpec::new(flow.graph_arc().clone(), flow.beta().clone(), thermal)
    }
}
