//! Exact spectral toolkit for the Bernoulli-Laplace two-urn Markov chain.
//!
//! Two urns of capacities `n1` and `n2` hold `nw` white and `nb` black balls.
//! Each step swaps a uniformly chosen ball of urn 1 with one of urn 2. The
//! crate diagonalizes the transition kernel in closed form, symmetrizes it,
//! and evaluates exact m-step distributions and total-variation curves,
//! with brute-force oracles to check every identity.

pub mod error;
pub mod matrix;
pub mod mixing;
pub mod model;
pub mod oracle;
pub mod scalar;
pub mod spectral;
pub mod symmetry;
pub mod verify;

pub use error::{Error, Result};
pub use matrix::DenseMatrix;
pub use model::{
    build_kernel, canonicalize, new_model, stationary_distribution, transition_row,
    DistributionVector, ModelParams, Relabel, StateMap, TridiagonalKernel,
};
pub use scalar::{Backend, Rational, Scalar};
pub use spectral::{eigen_basis, eigenvalue, spectrum, EigenBasis, Spectrum};
pub use symmetry::{spectral_power, symmetric_system, SpectralExpansion, SymmetricEigenSystem};
