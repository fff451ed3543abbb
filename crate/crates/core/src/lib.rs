//! Thermodynamics on graded branching graphs.
//!
//! A [`GradedGraph`] with per-edge Hamiltonian spectra and an inverse
//! temperature (a [`FlowSpec`]) determines partition functions, local Gibbs
//! states and a Markov link between levels ([`LinkEngine`]). Coherent
//! systems ([`CoherentSystem`]) are the harmonic functions of that link; the
//! [`path_space`] module samples the associated central measures, and
//! [`realize`] solves the inverse problem of producing spectra for a
//! prescribed link.
//!
//! Everything numeric is generic over [`Scalar`], implemented for
//! [`BigRational`] (exact) and `f64`/`f32`.

pub mod catalog;
pub mod dense;
pub mod error;
pub mod flow;
pub mod graph;
pub mod harmonic;
pub mod io;
pub mod link;
pub mod path_space;
pub mod realize;
pub mod scalar;

pub use num_rational::BigRational;

pub use dense::{DenseMatrix, MatrixEntry};
pub use error::{Error, Result};
pub use flow::{Classification, EdgeThermal, FlowSpec, PartitionTable, DEFAULT_DENSE_LIMIT};
pub use graph::{
    BasisElement, Edge, EdgeId, EdgeMap, GradedGraph, GraphBuilder, ValidationReport, VertexId,
    VertexMap, Violation,
};
pub use harmonic::{
    boundary_kernel_approx, check_harmonic, decompose_at_level, extend_down, state_eval,
    CoherentSystem, HarmonicReport, LevelMeasure,
};
pub use link::{DiagonalObservable, LinkEngine, LinkMatrix, LocalState, MarkovReport};
pub use path_space::{
    cylinder_prob, ergodic_experiment, CylinderSpec, ErgodicTable, PathSampler, SampledPath,
};
pub use realize::{
    realize_link, verify_realization, AbstractLink, RealizationReport, SpectrumStyle,
};
pub use scalar::{Extended, Scalar};

pub type ExactFlow = FlowSpec<BigRational>;
pub type FloatFlow = FlowSpec<f64>;
pub type ExactSystem = CoherentSystem<BigRational>;
pub type FloatSystem = CoherentSystem<f64>;
pub type ExactLinkMatrix = LinkMatrix<BigRational>;
pub type FloatLinkMatrix = LinkMatrix<f64>;
pub type ExactPartitionTable = PartitionTable<BigRational>;
pub type FloatPartitionTable = PartitionTable<f64>;
