//! Closed-form Fourier multipliers of the linear state-based peridynamic
//! operator with kernel `c^{δ,β} ‖w‖^{-β}` on the ball `B_δ(0)`.
//!
//! Every quantity is a function of `z = -‖ν‖²δ²/4` through a handful of
//! hypergeometric series. With `a = (n+2-β)/2`, `h = (n+2)/2`,
//! `h' = (n+4)/2` and `b = (n+4-β)/2`:
//!
//! ```text
//! m(ν)   = -‖ν‖² ₂F₃(1, a; 2, h, b; z)
//! α_b1   = -μ‖ν‖² ₂F₃(1, a; 2, h', b; z)            (= λ₂)
//! α_b2   = -2μ ₁F₂(a; h', b; z)
//! α_s    = -(λ*-μ) ₁F₂(a; h, b; z)²
//! M(ν)   = α_b1 I + (α_b2 + α_s) ν⊗ν
//! λ₁     = -‖ν‖² (3μ ₃F₄(1, 5/2, a; 2, 3/2, h', b; z) + (λ*-μ) ₁F₂(a; h, b; z)²)
//! ```

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hypergeom::{f_form_derivatives, hyp, PfqParams};

/// Dimension `n`, horizon `δ` and kernel exponent `β` of the operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlocalParams {
    n: usize,
    delta: f64,
    beta: f64,
}

impl NonlocalParams {
    /// Requires `n ≥ 1`, `δ > 0` and `β < n + 2`.
    pub fn new(n: usize, delta: f64, beta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("dimension n must be at least 1"));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::invalid(format!("horizon delta = {delta} must be > 0")));
        }
        if !(beta.is_finite() && beta < n as f64 + 2.0) {
            return Err(Error::invalid(format!(
                "kernel exponent beta = {beta} must satisfy beta < n + 2 = {}",
                n + 2
            )));
        }
        Ok(NonlocalParams { n, delta, beta })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `z = -‖ν‖²δ²/4`.
    pub fn argument(&self, nu_norm_sq: f64) -> f64 {
        -0.25 * nu_norm_sq * self.delta * self.delta
    }

    fn series_params(&self) -> SeriesParams {
        let n = self.n as f64;
        SeriesParams {
            a: 0.5 * (n + 2.0 - self.beta),
            h: 0.5 * (n + 2.0),
            h_next: 0.5 * (n + 4.0),
            b: 0.5 * (n + 4.0 - self.beta),
        }
    }

    pub(crate) fn check_dim(&self, nu: &[f64]) -> Result<()> {
        if nu.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: nu.len(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct SeriesParams {
    a: f64,
    h: f64,
    h_next: f64,
    b: f64,
}

/// Lamé parameters: shear modulus `μ` and second parameter `λ*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    mu: f64,
    lambda_star: f64,
}

impl Material {
    pub fn new(mu: f64, lambda_star: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::invalid(format!("shear modulus mu = {mu} must be > 0")));
        }
        if !lambda_star.is_finite() {
            return Err(Error::invalid("lambda_star must be finite"));
        }
        Ok(Material { mu, lambda_star })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn lambda_star(&self) -> f64 {
        self.lambda_star
    }

    /// `λ* ≥ −2μ`, the range where the local Navier operator is stable and
    /// where non-positivity of the eigenvalues is checked.
    pub fn is_admissible(&self) -> bool {
        self.lambda_star >= -2.0 * self.mu
    }
}

/// Angular frequency vector `ν`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreqVector(Vec<f64>);

impl FreqVector {
    pub fn new(nu: Vec<f64>) -> Self {
        FreqVector(nu)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

impl From<Vec<f64>> for FreqVector {
    fn from(v: Vec<f64>) -> Self {
        FreqVector(v)
    }
}

impl AsRef<[f64]> for FreqVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// `M(ν) = α_b1 I + (α_b2 + α_s) ν⊗ν` with its coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorMultiplier {
    pub matrix: DMatrix<f64>,
    pub alpha_b1: f64,
    pub alpha_b2: f64,
    pub alpha_s: f64,
}

impl TensorMultiplier {
    fn assemble(nu: &[f64], alpha_b1: f64, alpha_b2: f64, alpha_s: f64) -> Self {
        let n = nu.len();
        let rank_one = alpha_b2 + alpha_s;
        let matrix = DMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { alpha_b1 } else { 0.0 };
            diag + rank_one * (nu[i] * nu[j])
        });
        TensorMultiplier {
            matrix,
            alpha_b1,
            alpha_b2,
            alpha_s,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `λ₁` along `ν`, `λ₂` on the orthogonal complement, and the eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub lambda1: f64,
    pub lambda2: f64,
    /// `basis[0] = ν/‖ν‖`; the remaining `n − 1` vectors span `ν^⊥`.
    pub basis: Vec<DVector<f64>>,
}

impl EigenDecomposition {
    /// Eigenvalue attached to `basis[j]`.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        if j == 0 {
            self.lambda1
        } else {
            self.lambda2
        }
    }

    pub fn transverse_multiplicity(&self) -> usize {
        self.basis.len().saturating_sub(1)
    }
}

pub(crate) fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    norm_sq(v).sqrt()
}

/// `Γ(n/2 + 1)` for integer `n`.
fn gamma_half_dim_plus_one(n: usize) -> f64 {
    let (mut value, mut x) = if n % 2 == 0 {
        (1.0, 1.0)
    } else {
        (0.5 * std::f64::consts::PI.sqrt(), 1.5)
    };
    let target = n as f64 / 2.0 + 1.0;
    while x < target {
        value *= x;
        x += 1.0;
    }
    value
}

/// `c^{δ,β} = 2(n+2−β) Γ(n/2+1) / (π^{n/2} δ^{n+2−β})`.
pub fn scaling_constant(params: &NonlocalParams) -> f64 {
    scaling_constant_raw(params.n, params.delta, params.beta)
}

/// Same formula without the `β < n + 2` requirement (used for `c^{δ,β+2}`).
pub(crate) fn scaling_constant_raw(n: usize, delta: f64, beta: f64) -> f64 {
    let nf = n as f64;
    let s = nf + 2.0 - beta;
    2.0 * s * gamma_half_dim_plus_one(n) / (std::f64::consts::PI.powf(nf / 2.0) * delta.powf(s))
}

/// Scalar multiplier `m(ν)` of the nonlocal Laplacian.
pub fn scalar_multiplier(params: &NonlocalParams, nu: &[f64]) -> Result<f64> {
    params.check_dim(nu)?;
    let s2 = norm_sq(nu);
    if s2 == 0.0 {
        return Ok(0.0);
    }
    let p = params.series_params();
    let z = params.argument(s2);
    Ok(-s2 * hyp(&[1.0, p.a], &[2.0, p.h, p.b], z)?)
}

/// `∇m(ν) = −2 f'(z) ν` where `m = (4/δ²) f(z)` and `f(z) = z·₂F₃(1, a; 2, h, b; z)`.
pub fn scalar_multiplier_gradient(params: &NonlocalParams, nu: &[f64]) -> Result<Vec<f64>> {
    params.check_dim(nu)?;
    let d = form_derivatives(params, norm_sq(nu))?;
    Ok(nu.iter().map(|x| -2.0 * d.f_prime * x).collect())
}

/// `∇∇m(ν) = −2 f'(z) I + δ² f''(z) ν⊗ν`.
pub fn scalar_multiplier_hessian(params: &NonlocalParams, nu: &[f64]) -> Result<DMatrix<f64>> {
    params.check_dim(nu)?;
    let d = form_derivatives(params, norm_sq(nu))?;
    Ok(hessian_from(params.delta, nu, d.f_prime, d.f_double_prime))
}

fn hessian_from(delta: f64, nu: &[f64], f_prime: f64, f_double_prime: f64) -> DMatrix<f64> {
    let n = nu.len();
    DMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j { -2.0 * f_prime } else { 0.0 };
        diag + delta * delta * f_double_prime * (nu[i] * nu[j])
    })
}

fn form_derivatives(
    params: &NonlocalParams,
    nu_norm_sq: f64,
) -> Result<crate::hypergeom::FormDerivatives> {
    let p = params.series_params();
    let series = PfqParams::new(vec![1.0, p.a], vec![2.0, p.h, p.b])?;
    f_form_derivatives(&series, params.argument(nu_norm_sq))
}

/// Bond part through the Hessian of `m^{δ,β+2}`:
/// `M_b = −(n+2)μ c^{δ,β}/c^{δ,β+2} (∇∇m^{δ,β+2} + 2I)`.
///
/// Undefined at `β = n` where the constant ratio degenerates; only used as a
/// cross-check of [`tensor_multiplier_bond`].
pub fn tensor_multiplier_bond_via_hessian(
    params: &NonlocalParams,
    material: &Material,
    nu: &[f64],
) -> Result<DMatrix<f64>> {
    params.check_dim(nu)?;
    let n = params.n as f64;
    if params.beta == n {
        return Err(Error::invalid("Hessian route is singular at beta = n"));
    }
    // Parameters of m^{δ,β+2}; β+2 may exceed n+2 so they are built directly.
    let a = 0.5 * (n - params.beta);
    let series = PfqParams::new(vec![1.0, a], vec![2.0, 0.5 * (n + 2.0), a + 1.0])?;
    let d = f_form_derivatives(&series, params.argument(norm_sq(nu)))?;
    let hess = hessian_from(params.delta, nu, d.f_prime, d.f_double_prime);
    let ratio = scaling_constant(params) / scaling_constant_raw(params.n, params.delta, params.beta + 2.0);
    let scale = -(n + 2.0) * material.mu * ratio;
    Ok((hess + DMatrix::identity(params.n, params.n) * 2.0) * scale)
}

fn bond_coefficients(params: &NonlocalParams, material: &Material, s2: f64) -> Result<(f64, f64)> {
    if s2 == 0.0 {
        return Ok((0.0, 0.0));
    }
    let p = params.series_params();
    let z = params.argument(s2);
    let alpha_b1 = -material.mu * s2 * hyp(&[1.0, p.a], &[2.0, p.h_next, p.b], z)?;
    let alpha_b2 = -2.0 * material.mu * hyp(&[p.a], &[p.h_next, p.b], z)?;
    Ok((alpha_b1, alpha_b2))
}

/// `₁F₂(a; h, b; z)`, the radial profile of `∇m`.
fn state_profile(params: &NonlocalParams, s2: f64) -> Result<f64> {
    let p = params.series_params();
    hyp(&[p.a], &[p.h, p.b], params.argument(s2))
}

fn state_coefficient(params: &NonlocalParams, material: &Material, s2: f64) -> Result<f64> {
    let shift = material.lambda_star - material.mu;
    if s2 == 0.0 || shift == 0.0 {
        return Ok(0.0);
    }
    let f = state_profile(params, s2)?;
    Ok(-shift * f * f)
}

/// Bond-based part `M_b(ν) = α_b1 I + α_b2 ν⊗ν` (`alpha_s = 0`).
pub fn tensor_multiplier_bond(
    params: &NonlocalParams,
    material: &Material,
    nu: &[f64],
) -> Result<TensorMultiplier> {
    params.check_dim(nu)?;
    let (b1, b2) = bond_coefficients(params, material, norm_sq(nu))?;
    Ok(TensorMultiplier::assemble(nu, b1, b2, 0.0))
}

/// State-based part `M_s(ν) = α_s ν⊗ν`, rank at most one.
pub fn tensor_multiplier_state(
    params: &NonlocalParams,
    material: &Material,
    nu: &[f64],
) -> Result<TensorMultiplier> {
    params.check_dim(nu)?;
    let s = state_coefficient(params, material, norm_sq(nu))?;
    Ok(TensorMultiplier::assemble(nu, 0.0, 0.0, s))
}

/// Full multiplier `M = M_b + M_s`.
pub fn tensor_multiplier(
    params: &NonlocalParams,
    material: &Material,
    nu: &[f64],
) -> Result<TensorMultiplier> {
    params.check_dim(nu)?;
    let s2 = norm_sq(nu);
    let (b1, b2) = bond_coefficients(params, material, s2)?;
    let s = state_coefficient(params, material, s2)?;
    Ok(TensorMultiplier::assemble(nu, b1, b2, s))
}

/// Multiplier of the Navier operator, `−(λ*+μ) ν⊗ν − μ‖ν‖² I`.
pub fn navier_multiplier(material: &Material, nu: &[f64]) -> DMatrix<f64> {
    let n = nu.len();
    let s2 = norm_sq(nu);
    DMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j { -material.mu * s2 } else { 0.0 };
        diag - (material.lambda_star + material.mu) * (nu[i] * nu[j])
    })
}

/// `λ₁^N = −(λ*+2μ)‖ν‖²` and `λ₂^N = −μ‖ν‖²`.
pub fn navier_eigenvalues(material: &Material, nu_norm_sq: f64) -> (f64, f64) {
    (
        -(material.lambda_star + 2.0 * material.mu) * nu_norm_sq,
        -material.mu * nu_norm_sq,
    )
}

/// Eigenvalue along `ν`, from the merged two-series form.
pub fn eigenvalue_parallel(params: &NonlocalParams, material: &Material, nu: &[f64]) -> Result<f64> {
    params.check_dim(nu)?;
    let s2 = norm_sq(nu);
    if s2 == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    let p = params.series_params();
    let z = params.argument(s2);
    let merged = hyp(&[1.0, 2.5, p.a], &[2.0, 1.5, p.h_next, p.b], z)?;
    let f = state_profile(params, s2)?;
    Ok(-s2 * (3.0 * material.mu * merged + (material.lambda_star - material.mu) * f * f))
}

/// Eigenvalue along `ν` from the unmerged three-series form. Kept as an
/// independent route for checking [`eigenvalue_parallel`].
pub fn eigenvalue_parallel_three_term(
    params: &NonlocalParams,
    material: &Material,
    nu: &[f64],
) -> Result<f64> {
    params.check_dim(nu)?;
    let s2 = norm_sq(nu);
    if s2 == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    let p = params.series_params();
    let z = params.argument(s2);
    let mu = material.mu;
    let t1 = mu * hyp(&[1.0, p.a], &[2.0, p.h_next, p.b], z)?;
    let t2 = 2.0 * mu * hyp(&[p.a], &[p.h_next, p.b], z)?;
    let f = state_profile(params, s2)?;
    Ok(-s2 * (t1 + t2 + (material.lambda_star - mu) * f * f))
}

/// Eigenvalue on `ν^⊥` (multiplicity `n − 1`); independent of `λ*`.
pub fn eigenvalue_transverse(params: &NonlocalParams, material: &Material, nu: &[f64]) -> Result<f64> {
    params.check_dim(nu)?;
    let s2 = norm_sq(nu);
    if s2 == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    let p = params.series_params();
    Ok(-material.mu * s2 * hyp(&[1.0, p.a], &[2.0, p.h_next, p.b], params.argument(s2))?)
}

/// Deterministic orthonormal basis led by `ν/‖ν‖`.
///
/// The complement is Gram–Schmidt applied, in index order, to the standard
/// basis vectors other than `e_i` with `i = argmax |ν_i|` (lowest index on
/// ties). For `ν = 0` the standard basis is returned.
pub fn eigen_basis(nu: &[f64]) -> Vec<DVector<f64>> {
    let n = nu.len();
    let len = norm(nu);
    if len == 0.0 {
        return (0..n).map(|i| DVector::from_fn(n, |j, _| f64::from(u8::from(i == j)))).collect();
    }
    let mut pivot = 0;
    for (i, x) in nu.iter().enumerate() {
        if x.abs() > nu[pivot].abs() {
            pivot = i;
        }
    }
    let mut basis = Vec::with_capacity(n);
    basis.push(DVector::from_iterator(n, nu.iter().map(|x| x / len)));
    for i in (0..n).filter(|&i| i != pivot) {
        let mut v = DVector::from_fn(n, |j, _| f64::from(u8::from(i == j)));
        // Two passes keep the result orthogonal to rounding level.
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dot(&v);
                v -= b * proj;
            }
        }
        let vn = v.norm();
        basis.push(v / vn);
    }
    basis
}

/// Eigenvalues and eigenbasis of `M(ν)`; all zero with the standard basis at `ν = 0`.
pub fn eigen_decomposition(
    params: &NonlocalParams,
    material: &Material,
    nu: &[f64],
) -> Result<EigenDecomposition> {
    params.check_dim(nu)?;
    let basis = eigen_basis(nu);
    if norm_sq(nu) == 0.0 {
        return Ok(EigenDecomposition {
            lambda1: 0.0,
            lambda2: 0.0,
            basis,
        });
    }
    Ok(EigenDecomposition {
        lambda1: eigenvalue_parallel(params, material, nu)?,
        lambda2: eigenvalue_transverse(params, material, nu)?,
        basis,
    })
}
