//! Fourier multipliers and eigenvalues of linear state-based peridynamic
//! operators with kernel `‖w‖^{−β}` on the ball `B_δ(0)`.
//!
//! - [`hypergeom`]: generalized hypergeometric series `pFq`.
//! - [`multipliers`]: scalar and tensor multipliers in closed form.
//! - [`oracle`]: direct quadrature of the integral representations.
//! - [`spectrum`]: eigenpairs and spectral solves on a periodic box.

pub mod error;
pub mod hypergeom;
pub mod multipliers;
pub mod oracle;
pub mod spectrum;

pub use error::{Error, Result};
pub use hypergeom::{pfq, EvalResult, PfqParams};
pub use multipliers::{
    eigen_decomposition, eigenvalue_parallel, eigenvalue_transverse, navier_eigenvalues,
    scalar_multiplier, tensor_multiplier, EigenDecomposition, FreqVector, Material,
    NonlocalParams, TensorMultiplier,
};
pub use oracle::{Quad, QuadratureSpec};
pub use spectrum::{FourierField, Mode, SpectrumRecord, TorusSpec};
