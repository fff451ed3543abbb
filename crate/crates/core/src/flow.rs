//! Thermal data on a graded graph: inverse temperature, per-edge Hamiltonian
//! spectra, edge and vertex partition functions, local density spectra and
//! gauge shifts.
//!
//! Edge Hamiltonians are stored spectrally. An edge may carry
//!
//! * its eigenvalues (`Spectrum`), Boltzmann factors `exp(-beta * lambda)`;
//! * the Boltzmann factors themselves (`Boltzmann`), i.e. the spectrum of
//!   `exp(-beta H_e)`, which stays exact over the rationals when prescribed;
//! * only its partition value (`PartitionOnly`), possibly `+inf`, for edges
//!   whose operator is not modelled.

use std::sync::Arc;

use crate::dense::{DenseMatrix, MatrixEntry};
use crate::error::{Error, Result};
use crate::graph::{BasisElement, EdgeId, EdgeMap, GradedGraph, VertexId, VertexMap};
use crate::scalar::{positive, Extended, Scalar};

/// Default cap on `dim H_z` for dense-matrix operations.
pub const DEFAULT_DENSE_LIMIT: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub enum EdgeThermal<S> {
    Spectrum(Vec<S>),
    Boltzmann(Vec<S>),
    PartitionOnly(Extended<S>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PartitionTable<S> {
    pub edge: EdgeMap<Extended<S>>,
    pub vertex: VertexMap<Extended<S>>,
}

impl<S: Scalar> PartitionTable<S> {
    pub fn vertex_z(&self, z: VertexId) -> &Extended<S> {
        &self.vertex[z]
    }

    pub fn edge_z(&self, e: EdgeId) -> &Extended<S> {
        &self.edge[e]
    }

    pub fn is_finite(&self, z: VertexId) -> bool {
        self.vertex[z].is_finite()
    }

    /// Splits level `n` into finite-`Z` and infinite-`Z` vertex indices.
    pub fn classify(&self, n: usize) -> Classification {
        let mut c = Classification::default();
        for (i, z) in self.vertex.level(n).iter().enumerate() {
            if z.is_finite() {
                c.finite.push(i);
            } else {
                c.infinite.push(i);
            }
        }
        c
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Classification {
    pub finite: Vec<usize>,
    pub infinite: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct FlowSpec<S> {
    graph: Arc<GradedGraph>,
    beta: S,
    thermal: EdgeMap<EdgeThermal<S>>,
    dense_limit: usize,
}

impl<S: Scalar> FlowSpec<S> {
    pub fn new(graph: Arc<GradedGraph>, beta: S, thermal: EdgeMap<EdgeThermal<S>>) -> Result<Self> {
        if thermal.0.len() != graph.depth() {
            return Err(Error::ThermalDataMissing(format!(
                "thermal data covers {} levels, graph has {}",
                thermal.0.len(),
                graph.depth()
            )));
        }
        for n in 1..=graph.depth() {
            if thermal.level(n).len() != graph.edges(n).len() {
                return Err(Error::ThermalDataMissing(format!(
                    "edge count mismatch at level {n}"
                )));
            }
            for e in graph.edge_ids(n) {
                let m = graph.edge(e).multiplicity as usize;
                match &thermal[e] {
                    EdgeThermal::Spectrum(v) if v.len() != m => {
                        return Err(Error::InvalidThermal(format!(
                            "{}: spectrum has {} eigenvalues, multiplicity is {m}",
                            edge_key(&graph, e),
                            v.len()
                        )))
                    }
                    EdgeThermal::Boltzmann(v) if v.len() != m => {
                        return Err(Error::InvalidThermal(format!(
                            "{}: {} Boltzmann factors, multiplicity is {m}",
                            edge_key(&graph, e),
                            v.len()
                        )))
                    }
                    EdgeThermal::Boltzmann(v) if v.iter().any(|w| !positive(w)) => {
                        return Err(Error::InvalidThermal(format!(
                            "{}: Boltzmann factors must be positive",
                            edge_key(&graph, e)
                        )))
                    }
                    EdgeThermal::PartitionOnly(Extended::Finite(v)) if !positive(v) => {
                        return Err(Error::InvalidThermal(format!(
                            "{}: partition value must be positive",
                            edge_key(&graph, e)
                        )))
                    }
                    _ => {}
                }
            }
        }
        Ok(FlowSpec {
            graph,
            beta,
            thermal,
            dense_limit: DEFAULT_DENSE_LIMIT,
        })
    }

    /// Every edge gets the spectrum `{0, .., 0}` (size `m(e)`), so `Z(e) = m(e)` at any beta.
    pub fn ground(graph: Arc<GradedGraph>, beta: S) -> Self {
        let thermal = graph
            .edge_map_with(|_, e| EdgeThermal::Spectrum(vec![S::zero(); e.multiplicity as usize]));
        FlowSpec::new(graph, beta, thermal).expect("shapes match by construction")
    }

    pub fn with_dense_limit(mut self, limit: usize) -> Self {
        self.dense_limit = limit;
        self
    }

    pub fn dense_limit(&self) -> usize {
        self.dense_limit
    }

    pub fn graph(&self) -> &GradedGraph {
        &self.graph
    }

    pub fn graph_arc(&self) -> &Arc<GradedGraph> {
        &self.graph
    }

    pub fn beta(&self) -> &S {
        &self.beta
    }

    pub fn thermal(&self, e: EdgeId) -> &EdgeThermal<S> {
        &self.thermal[e]
    }

    pub fn thermal_map(&self) -> &EdgeMap<EdgeThermal<S>> {
        &self.thermal
    }

    fn boltzmann(&self, lambda: &S) -> Result<S> {
        S::exp_neg(&(self.beta.clone() * lambda.clone())).ok_or_else(|| {
            Error::NumericModeConflict(format!(
                "exp(-{} * {}) is not representable exactly",
                self.beta, lambda
            ))
        })
    }

    /// Spectrum of `exp(-beta H_e)`.
    pub fn edge_weights(&self, e: EdgeId) -> Result<Vec<S>> {
        match &self.thermal[e] {
            EdgeThermal::Spectrum(v) => v.iter().map(|l| self.boltzmann(l)).collect(),
            EdgeThermal::Boltzmann(w) => Ok(w.clone()),
            EdgeThermal::PartitionOnly(_) => {
                Err(Error::ThermalDataMissing(edge_key(&self.graph, e)))
            }
        }
    }

    /// Spectrum of `H_e`.
    pub fn edge_energies(&self, e: EdgeId) -> Result<Vec<S>> {
        match &self.thermal[e] {
            EdgeThermal::Spectrum(v) => Ok(v.clone()),
            EdgeThermal::Boltzmann(w) => {
                if self.beta.is_zero() {
                    return Err(Error::BetaZero);
                }
                w.iter()
                    .map(|x| {
                        x.ln().map(|l| -l / self.beta.clone()).ok_or_else(|| {
                            Error::NumericModeConflict(format!("ln({x}) is not representable"))
                        })
                    })
                    .collect()
            }
            EdgeThermal::PartitionOnly(_) => {
                Err(Error::ThermalDataMissing(edge_key(&self.graph, e)))
            }
        }
    }

    /// `Z_beta(e) = Tr exp(-beta H_e)`.
    pub fn edge_partition(&self, e: EdgeId) -> Result<Extended<S>> {
        if e.level == 0
            || e.level > self.graph.depth()
            || e.index >= self.graph.edges(e.level).len()
        {
            return Err(Error::EdgeNotFound(format!("{e:?}")));
        }
        match &self.thermal[e] {
            EdgeThermal::PartitionOnly(v) => Ok(v.clone()),
            _ => Ok(Extended::Finite(self.edge_weights(e)?.into_iter().sum())),
        }
    }

    /// Edge and vertex partition functions, the latter by the level
    /// recursion `Z(z) = sum_{r(e)=z} Z(e) Z(s(e))`.
    pub fn vertex_partition(&self) -> Result<PartitionTable<S>> {
        let g = &*self.graph;
        let mut edge = Vec::with_capacity(g.depth());
        for n in 1..=g.depth() {
            let row: Result<Vec<_>> = g.edge_ids(n).map(|e| self.edge_partition(e)).collect();
            edge.push(row?);
        }
        let edge = EdgeMap(edge);
        let mut vertex = g.vertex_map(Extended::zero());
        vertex[VertexId::ROOT] = Extended::Finite(S::one());
        for n in 1..=g.depth() {
            for z in g.vertices(n) {
                let mut acc = Extended::zero();
                for e in g.incoming(z) {
                    acc = acc.add(&edge[e].mul(&vertex[g.source(e)]));
                }
                vertex[z] = acc;
            }
        }
        Ok(PartitionTable { edge, vertex })
    }

    pub fn classify_vertices(&self, n: usize) -> Result<Classification> {
        if n > self.graph.depth() {
            return Err(Error::LevelOutOfRange {
                level: n,
                depth: self.graph.depth(),
            });
        }
        Ok(self.vertex_partition()?.classify(n))
    }

    /// Canonical basis of `H_z` with the diagonal of `rho_{beta,z}` in that basis.
    pub fn local_weights(&self, z: VertexId) -> Result<(Vec<BasisElement>, Vec<S>)> {
        let g = &*self.graph;
        let basis = g.basis(z)?;
        let mut cache: Vec<Vec<Option<Vec<S>>>> = (1..=z.level)
            .map(|n| vec![None; g.edges(n).len()])
            .collect();
        let mut rho = Vec::with_capacity(basis.len());
        for b in &basis {
            let mut w = S::one();
            for (k, (&ei, &j)) in b.path.iter().zip(&b.eigen).enumerate() {
                if cache[k][ei].is_none() {
                    cache[k][ei] = Some(self.edge_weights(EdgeId {
                        level: k + 1,
                        index: ei,
                    })?);
                }
                w = w * cache[k][ei].as_ref().expect("filled above")[j].clone();
            }
            rho.push(w);
        }
        Ok((basis, rho))
    }

    /// Eigenvalues of `rho_{beta,z}` in canonical basis order.
    pub fn rho_spectrum(&self, z: VertexId) -> Result<Vec<S>> {
        Ok(self.local_weights(z)?.1)
    }

    /// Eigenvalues of the vertex Hamiltonian `H_z`, path-wise sums of edge
    /// eigenvalues, in canonical basis order.
    pub fn vertex_hamiltonian_spectrum(&self, z: VertexId) -> Result<Vec<S>> {
        let g = &*self.graph;
        let basis = g.basis(z)?;
        let mut out = Vec::with_capacity(basis.len());
        for b in &basis {
            let mut h = S::zero();
            for (k, (&ei, &j)) in b.path.iter().zip(&b.eigen).enumerate() {
                h = h + self.edge_energies(EdgeId {
                    level: k + 1,
                    index: ei,
                })?[j]
                    .clone();
            }
            out.push(h);
        }
        Ok(out)
    }

    /// Path sums `Lambda(z)` of the shifts, or `None` if two paths into some
    /// vertex disagree.
    pub fn gauge_potential(&self, shifts: &EdgeMap<S>) -> Option<VertexMap<S>> {
        self.potential_or_conflict(shifts).ok()
    }

    fn potential_or_conflict(
        &self,
        shifts: &EdgeMap<S>,
    ) -> std::result::Result<VertexMap<S>, VertexId> {
        let g = &*self.graph;
        let tol = S::default_tol();
        let mut pot = g.vertex_map(S::zero());
        for n in 1..=g.depth() {
            for z in g.vertices(n) {
                let mut value: Option<S> = None;
                for e in g.incoming(z) {
                    let candidate = pot[g.source(e)].clone() + shifts[e].clone();
                    match &value {
                        None => value = Some(candidate),
                        Some(v) => {
                            let scale = S::one().max_abs(v).max_abs(&candidate);
                            if !v.within(&candidate, &(tol.clone() * scale)) {
                                return Err(z);
                            }
                        }
                    }
                }
                pot[z] = value.unwrap_or_else(S::zero);
            }
        }
        Ok(pot)
    }

    /// Whether every root-to-`z` path accumulates the same total shift.
    pub fn gauge_check(&self, shifts: &EdgeMap<S>) -> bool {
        self.gauge_potential(shifts).is_some()
    }

    /// `H'_e = H_e + lambda_e`, for an admissible family of shifts.
    pub fn apply_gauge(&self, shifts: &EdgeMap<S>) -> Result<Self> {
        let g = &*self.graph;
        if let Err(z) = self.potential_or_conflict(shifts) {
            return Err(Error::InadmissibleGauge(g.vertex_key(z)));
        }
        let mut thermal = self.thermal.clone();
        for e in g.all_edge_ids() {
            let shift = &shifts[e];
            thermal[e] = match &self.thermal[e] {
                EdgeThermal::Spectrum(v) => {
                    EdgeThermal::Spectrum(v.iter().map(|l| l.clone() + shift.clone()).collect())
                }
                EdgeThermal::Boltzmann(w) => {
                    let f = self.boltzmann(shift)?;
                    EdgeThermal::Boltzmann(w.iter().map(|x| x.clone() * f.clone()).collect())
                }
                EdgeThermal::PartitionOnly(Extended::Finite(v)) => {
                    let f = self.boltzmann(shift)?;
                    EdgeThermal::PartitionOnly(Extended::Finite(v.clone() * f))
                }
                EdgeThermal::PartitionOnly(Extended::Infinite) => {
                    EdgeThermal::PartitionOnly(Extended::Infinite)
                }
            };
        }
        Ok(FlowSpec {
            graph: self.graph.clone(),
            beta: self.beta.clone(),
            thermal,
            dense_limit: self.dense_limit,
        })
    }

    /// Replaces Boltzmann-factor data by the equivalent eigenvalues
    /// `-ln(w) / beta`.
    pub fn to_spectral(&self) -> Result<Self> {
        let mut thermal = self.thermal.clone();
        for e in self.graph.all_edge_ids() {
            if let EdgeThermal::Boltzmann(_) = &self.thermal[e] {
                thermal[e] = EdgeThermal::Spectrum(self.edge_energies(e)?);
            }
        }
        Ok(FlowSpec {
            graph: self.graph.clone(),
            beta: self.beta.clone(),
            thermal,
            dense_limit: self.dense_limit,
        })
    }

    /// Checks `Tr(rho a b) = Tr(rho b alpha_{i beta}(a))` with
    /// `alpha_{i beta}(a) = rho a rho^{-1}`, within `tol * Z_beta(z)`.
    ///
    /// Matrices are expressed in the canonical basis of `H_z`.
    pub fn kms_verify<T: MatrixEntry<S>>(
        &self,
        z: VertexId,
        a: &DenseMatrix<T>,
        b: &DenseMatrix<T>,
        tol: &S,
    ) -> Result<bool> {
        let dim = self.graph.dim_vertex(z)?;
        if dim > self.dense_limit as u128 {
            return Err(Error::DimensionLimitExceeded {
                dim,
                limit: self.dense_limit,
            });
        }
        let n = dim as usize;
        if a.dim() != n || b.dim() != n {
            return Err(Error::InvalidThermal(format!(
                "observables must be {n}x{n} at {}",
                self.graph.vertex_key(z)
            )));
        }
        let table = self.vertex_partition()?;
        let zz = table
            .vertex_z(z)
            .finite()
            .cloned()
            .ok_or_else(|| Error::InfinitePartitionFunction(self.graph.vertex_key(z)))?;
        let rho_s = self.rho_spectrum(z)?;
        let rho: Vec<T> = rho_s.iter().cloned().map(T::from).collect();
        let rho_m = DenseMatrix::diagonal(&rho);
        let mut rotated = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let v = rho[i].clone() * a.get(i, j).clone() / rho[j].clone();
                rotated.set(i, j, v);
            }
        }
        let lhs = rho_m.mul(a).mul(b).trace();
        let rhs = rho_m.mul(b).mul(&rotated).trace();
        let bound = tol.clone() * zz;
        Ok((lhs - rhs).modulus_sq() <= bound.clone() * bound)
    }
}

trait MaxAbs {
    fn max_abs(self, other: &Self) -> Self;
}

impl<S: Scalar> MaxAbs for S {
    fn max_abs(self, other: &Self) -> Self {
        let o = other.abs();
        if o > self {
            o
        } else {
            self
        }
    }
}

pub(crate) fn edge_key(g: &GradedGraph, e: EdgeId) -> String {
    format!(
        "{}->{}",
        g.vertex_key(g.source(e)),
        g.vertex_key(g.target(e))
    )
}
