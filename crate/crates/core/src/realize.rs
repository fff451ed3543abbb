//! Realizing a prescribed link by edge thermal data normalized so that every
//! vertex partition function equals one; the induced link is then
//! `kappa(r(e), s(e)) = Z_beta(e)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flow::{EdgeThermal, FlowSpec};
use crate::graph::{EdgeId, EdgeMap, GradedGraph};
use crate::link::LinkEngine;
use crate::scalar::{positive, Scalar};

/// Prescribed link weights `kappa(e) > 0`, summing to one over the incoming
/// edges of every non-root vertex.
#[derive(Clone, Debug)]
pub struct AbstractLink<S> {
    graph: Arc<GradedGraph>,
    weights: EdgeMap<S>,
}

impl<S: Scalar> AbstractLink<S> {
    /// Row sums are checked within `S::default_tol()` per incoming edge.
    pub fn new(graph: Arc<GradedGraph>, weights: EdgeMap<S>) -> Result<Self> {
        if weights.0.len() != graph.depth() {
            return Err(Error::InvalidLink(format!(
                "{} weight levels for depth {}",
                weights.0.len(),
                graph.depth()
            )));
        }
        for n in 1..=graph.depth() {
            if weights.level(n).len() != graph.edges(n).len() {
                return Err(Error::InvalidLink(format!("level {n}: wrong edge count")));
            }
            for e in graph.edge_ids(n) {
                let w = &weights[e];
                if !(*w > S::zero() && *w <= S::one()) {
                    return Err(Error::InvalidLink(format!(
                        "{}: weight {w} outside (0, 1]",
                        crate::flow::edge_key(&graph, e)
                    )));
                }
            }
            for z in graph.vertices(n) {
                let ids: Vec<EdgeId> = graph.incoming(z).collect();
                let total: S = ids.iter().map(|&e| weights[e].clone()).sum();
                let tol = S::default_tol() * S::from_usize_exact(ids.len());
                if !total.within(&S::one(), &tol) {
                    return Err(Error::InvalidLink(format!(
                        "{}: incoming weights sum to {total}",
                        graph.vertex_key(z)
                    )));
                }
            }
        }
        Ok(AbstractLink { graph, weights })
    }

    pub fn graph(&self) -> &Arc<GradedGraph> {
        &self.graph
    }

    pub fn weight(&self, e: EdgeId) -> &S {
        &self.weights[e]
    }

    pub fn weights(&self) -> &EdgeMap<S> {
        &self.weights
    }
}

/// How the Boltzmann weights of an edge share its prescribed total.
#[derive(Clone, Debug, PartialEq)]
pub enum SpectrumStyle<S> {
    /// `m(e)` equal weights `kappa(e) / m(e)`.
    Uniform,
    /// Weights proportional to `r^0, r^1, ..., r^{m-1}`.
    Geometric(S),
}

fn boltzmann_profile<S: Scalar>(total: &S, m: usize, style: &SpectrumStyle<S>) -> Vec<S> {
    match style {
        SpectrumStyle::Uniform => vec![total.clone() / S::from_usize_exact(m); m],
        SpectrumStyle::Geometric(r) => {
            let powers: Vec<S> = (0..m as u32).map(|i| r.powu(i)).collect();
            let norm: S = powers.iter().cloned().sum();
            powers
                .into_iter()
                .map(|p| p * total.clone() / norm.clone())
                .collect()
        }
    }
}

/// Edge thermal data realizing `k` at inverse temperature `beta`.
///
/// Eigenvalues `-ln(w) / beta` are emitted when the logarithm exists in `S`;
/// otherwise (exact arithmetic with `w != 1`) the Boltzmann weights
/// themselves are stored.
pub fn realize_link<S: Scalar>(
    k: &AbstractLink<S>,
    beta: &S,
    style: &SpectrumStyle<S>,
) -> Result<FlowSpec<S>> {
    if beta.is_zero() {
        return Err(Error::BetaZero);
    }
    if let SpectrumStyle::Geometric(r) = style {
        if !positive(r) {
            return Err(Error::ParameterOutOfRange(format!("geometric ratio {r}")));
        }
    }
    let g = &k.graph;
    let thermal = g.edge_map_with(|e, edge| {
        let weights = boltzmann_profile(&k.weights[e], edge.multiplicity as usize, style);
        let energies: Option<Vec<S>> = weights
            .iter()
            .map(|w| w.ln().map(|l| -l / beta.clone()))
            .collect();
        match energies {
            Some(spectrum) => EdgeThermal::Spectrum(spectrum),
            None => EdgeThermal::Boltzmann(weights),
        }
    });
    FlowSpec::new(g.clone(), beta.clone(), thermal)
}

#[derive(Clone, Debug)]
pub struct RealizationReport<S> {
    /// `max_z |Z_beta(z) - 1|`; `None` when some `Z_beta(z)` is infinite.
    pub max_partition_defect: Option<S>,
    pub max_link_defect: S,
    pub worst_edge: Option<EdgeId>,
    pub partition_ok: bool,
    pub link_ok: bool,
}

impl<S> RealizationReport<S> {
    pub fn passed(&self) -> bool {
        self.partition_ok && self.link_ok
    }
}

pub fn verify_realization<S: Scalar>(
    flow: &FlowSpec<S>,
    k: &AbstractLink<S>,
    tol: &S,
) -> Result<RealizationReport<S>> {
    let g = flow.graph();
    if g != &*k.graph {
        return Err(Error::GraphMismatch);
    }
    let engine = LinkEngine::new(flow)?;
    let mut max_z = Some(S::zero());
    for z in g.all_vertices() {
        match (engine.table().vertex_z(z).finite(), max_z.as_mut()) {
            (Some(v), Some(m)) => {
                let d = (v.clone() - S::one()).abs();
                if d > *m {
                    *m = d;
                }
            }
            _ => max_z = None,
        }
    }
    let mut max_link = S::zero();
    let mut worst_edge = None;
    for e in g.all_edge_ids() {
        let got = engine.adjacent(g.target(e), g.source(e))?;
        let d = (got - k.weights[e].clone()).abs();
        if d > max_link || worst_edge.is_none() {
            if d > max_link {
                max_link = d;
            }
            worst_edge = Some(e);
        }
    }
    let partition_ok = max_z.as_ref().is_some_and(|m| *m <= *tol);
    let link_ok = max_link <= *tol;
    Ok(RealizationReport {
        max_partition_defect: max_z,
        max_link_defect: max_link,
        worst_edge,
        partition_ok,
        link_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn pascal_link<S: Scalar>(n: usize) -> AbstractLink<S> {
        let g = Arc::new(catalog::pascal(n).unwrap());
        let w = g.edge_map_with(|e, edge| {
            let (n, k) = (e.level as i64, edge.target as i64);
            if edge.source == edge.target {
                S::from_ratio(n - k, n)
            } else {
                S::from_ratio(k, n)
            }
        });
        AbstractLink::new(g, w).unwrap()
    }

    #[test]
    fn exact_pascal_round_trip() {
        let k = pascal_link::<BigRational>(5);
        let f = realize_link(&k, &q(1, 1), &SpectrumStyle::Uniform).unwrap();
        let r = verify_realization(&f, &k, &q(0, 1)).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r.max_link_defect, q(0, 1));
    }

    #[test]
    fn chain_gets_zero_spectrum() {
        let g = Arc::new(
            crate::graph::GraphBuilder::new()
                .vertex(0, "1")
                .vertex(1, "a")
                .vertex(2, "b")
                .edge(1, "1", "a", 1)
                .edge(2, "a", "b", 1)
                .build()
                .unwrap(),
        );
        let k = AbstractLink::new(g.clone(), g.edge_map(q(1, 1))).unwrap();
        let f = realize_link(&k, &q(1, 1), &SpectrumStyle::Uniform).unwrap();
        for e in g.all_edge_ids() {
            assert_eq!(f.thermal(e), &EdgeThermal::Spectrum(vec![q(0, 1)]));
        }
    }

    #[test]
    fn perturbed_eigenvalue_fails_link_check() {
        let k = pascal_link::<f64>(3);
        let f = realize_link(&k, &1.0, &SpectrumStyle::Uniform).unwrap();
        let g = f.graph_arc().clone();
        let eps = 1e-4;
        let mut thermal = f.thermal_map().clone();
        let e = EdgeId { level: 2, index: 0 };
        if let EdgeThermal::Spectrum(v) = &mut thermal[e] {
            v[0] += eps;
        }
        let bumped = FlowSpec::new(g, 1.0, thermal).unwrap();
        let r = verify_realization(&bumped, &k, &1e-10).unwrap();
        assert!(!r.link_ok);
        assert!(r.max_link_defect > 0.1 * eps && r.max_link_defect < 10.0 * eps);
    }

    #[test]
    fn rejects_bad_links() {
        let g = Arc::new(catalog::pascal(2).unwrap());
        assert!(AbstractLink::new(g.clone(), g.edge_map(q(1, 2))).is_err());
        let k = pascal_link::<BigRational>(2);
        assert_eq!(
            realize_link(&k, &q(0, 1), &SpectrumStyle::Uniform).unwrap_err(),
            Error::BetaZero
        );
    }
}
