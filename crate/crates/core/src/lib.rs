//! Steady-state energy covariance of dissipative stochastic systems.
//!
//! A self-adjoint generator with strictly negative spectrum drives
//! du = L u dt + noise; in the eigenbasis of L the stationary covariance P
//! solves the matrix Lyapunov equation Lambda P + P Lambda = -Q and is given
//! entrywise by P_jk = Q_jk / (-(lambda_j + lambda_k)). This crate builds
//! the three classical eigenbases (Dirichlet disk, quantum harmonic
//! oscillator, sphere), projects noise models onto them by quadrature,
//! solves and bounds the covariance, and validates everything against
//! independent oracles and an exactly discretized Ornstein-Uhlenbeck
//! simulation.
//!
//! Module map:
//! - [`spectrum`]: mode indexing and the `DissipativeSpectrum` invariants.
//! - [`basis`]: disk / oscillator / sphere spectra and eigenfunctions, plus
//!   Gram-matrix checks (with Bessel machinery in [`basis::bessel`]).
//! - [`quadrature`]: Gauss-Legendre, periodic trapezoid, Gauss-Hermite.
//! - [`lyapunov`]: the spectral solve, two oracles, truncation and
//!   semigroup/integral bounds.
//! - [`noise`]: white / diagonal / kernel noise projection and the azimuthal
//!   block-structure diagnostic.
//! - [`sim`]: exact OU discretization, batch-means errors, comparison.
//! - [`matrix`]: dense symmetric matrix support (Jacobi eigensolver).
//!
//! Everything is deterministic: fixed inputs (including seeds and thread
//! counts) reproduce results bit for bit.

pub mod basis;
pub mod error;
pub mod lyapunov;
pub mod matrix;
pub mod noise;
pub mod quadrature;
pub mod sim;
pub mod spectrum;

pub use basis::{gram_matrix, Basis, GramResult};
pub use error::{Error, Result};
pub use lyapunov::{
    integral_bound_check, lyapunov_residual, quadrature_oracle_covariance, semigroup_decay_check,
    solve_dense_lyapunov, solve_spectral_lyapunov, truncation_bound, LyapunovSolution,
    TruncationBound,
};
pub use matrix::{operator_norm_sym, psd_check, sym_eigen, sym_eigenvalues, PsdReport, SymMatrix};
pub use noise::{block_structure_report, project_noise, NoiseProjection, NoiseSpec};
pub use quadrature::{
    gauss_hermite_rule, gauss_legendre_rule, map_to_radial, trapezoid_periodic_rule,
    QuadratureRule, QuadratureSet,
};
pub use sim::{
    compare_covariance, default_burn_in, exact_step_covariance, simulate, CompareReport, SimConfig,
    SimResult,
};
pub use spectrum::{DissipativeSpectrum, Geometry, GeometryParams, ModeIndex, Parity};
