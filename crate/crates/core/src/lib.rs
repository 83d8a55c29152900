//! Orthogonal trace-sum maximization (OTSM): maximize `Σ_{i<j} tr(O_iᵀ S_ij O_j)`
//! over blocks `O_i` with orthonormal columns.
//!
//! The crate provides the problem representation, a convergent proximal block
//! relaxation solver, a post-hoc certificate of global optimality, builders for
//! MAXDIFF/CCA, generalized Procrustes and orthogonal least squares, and a
//! seeded benchmark harness.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix the scalar to `f64`.

pub mod builders;
pub mod certificate;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod objective;
pub mod oscillation;
pub mod problem;
pub mod scalar;
pub mod solver;

pub use builders::{
    build_maxdiff, build_ols, build_procrustes, hard_example, synth_procrustes, OlsData,
    OlsProblem, ProcrustesProblem, SyntheticProcrustes, ViewData,
};
pub use certificate::{
    certificate_matrix, certificate_matrix_with_taus, certify, dual_upper_bound,
    reduced_certificate, CertificateReport, CertifyOptions, ReducedCertificate, Verdict,
};
pub use error::{OtsmError, Result};
pub use linalg::{nuclear_norm, polar_project};
pub use objective::{
    lagrange_multipliers, lifted_objective, objective, stationarity, StationarityReport,
};
pub use oscillation::{oscillation_demo, OscillationTrace};
pub use problem::{BlockDims, BlockOrthogonal, OtsmProblem};
pub use scalar::Real;
pub use solver::{
    init_identity, init_spectral, solve, step_block, Alpha, InitStrategy, SolveReport,
    SolverConfig, StopReason,
};

pub type Matrix = nalgebra::DMatrix<f64>;
pub type Problem = OtsmProblem<f64>;
pub type Point = BlockOrthogonal<f64>;
pub type Config = SolverConfig<f64>;
pub type Report = SolveReport<f64>;
pub type Certificate = CertificateReport<f64>;
pub type Stationarity = StationarityReport<f64>;
