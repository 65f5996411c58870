//! Brute-force quadrature of the integral representations over `B_δ(0)`.
//!
//! This is the independent check on the hypergeometric path in
//! [`crate::multipliers`]: nothing here evaluates a hypergeometric series.
//!
//! Integrals are taken in radial–angular coordinates after rotating `ν` onto
//! the first axis. In 1-D the ball is `[-δ, δ]` folded onto `r ∈ [0, δ]`; in
//! 2-D the angle is integrated numerically over `[0, 2π]`; in 3-D the
//! azimuth is integrated analytically and the polar direction is sampled in
//! `t = cos θ`. The radial integrand behaves like `r^γ` at the origin with
//! `γ > −1`; the inner panel `[0, a]` uses the substitution `r = a t^m`
//! with `m` chosen so that the leading power becomes a non-negative
//! integer, and the rest of `[a, δ]` is split geometrically and by phase.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::multipliers::{norm, Material, NonlocalParams};

/// Largest dimension supported by the quadrature path.
pub const MAX_DIM: usize = 3;

/// Quadrature resolution and acceptance threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Gauss–Legendre nodes per radial panel.
    pub radial_points: usize,
    /// Gauss–Legendre nodes per angular panel.
    pub angular_points: usize,
    /// Inner radial panel ends at `singularity_split · δ` (or earlier when
    /// `1/‖ν‖` is smaller).
    pub singularity_split: f64,
    /// The result is computed at this level and the previous one; each
    /// level doubles the nodes per panel.
    pub refinement_levels: usize,
    /// Relative tolerance on the error estimate, measured against the
    /// largest component of the result.
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            radial_points: 64,
            angular_points: 64,
            singularity_split: 0.1,
            refinement_levels: 2,
            tolerance: 1e-9,
        }
    }
}

impl QuadratureSpec {
    fn validate(&self) -> Result<()> {
        if self.radial_points < 16 || self.angular_points < 16 {
            return Err(Error::invalid("quadrature needs at least 16 nodes per panel"));
        }
        if !(self.singularity_split > 0.0 && self.singularity_split < 1.0) {
            return Err(Error::invalid("singularity_split must lie in (0, 1)"));
        }
        if self.refinement_levels < 1 {
            return Err(Error::invalid("refinement_levels must be at least 1"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::invalid("quadrature tolerance must be positive"));
        }
        Ok(())
    }

    /// The same spec with twice the nodes in both directions.
    pub fn doubled(&self) -> Self {
        QuadratureSpec {
            radial_points: 2 * self.radial_points,
            angular_points: 2 * self.angular_points,
            ..*self
        }
    }
}

/// A quadrature value with its error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Quad<T> {
    pub value: T,
    pub err_est: f64,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else { p1 };
            dp = nf * (x * p - p0) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Rule { nodes, weights }
    }

    /// Nodes and weights mapped to `[lo, hi]`.
    fn on(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }
}

/// A direction sample in the rotated frame (`ν` along the first axis).
///
/// `first` and `second` hold `ω_i` and `ω_i ω_j`, averaged over any
/// coordinate that was integrated analytically.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Direction {
    pub u: f64,
    pub first: [f64; MAX_DIM],
    pub second: [[f64; MAX_DIM]; MAX_DIM],
}

/// Phase (in radians) one Gauss–Legendre panel is asked to resolve.
fn phase_budget(points: usize) -> f64 {
    points as f64 / 4.0
}

fn visit_directions(
    n: usize,
    phase_rate: f64,
    base_points: usize,
    rule: &Rule,
    mut f: impl FnMut(f64, &Direction),
) {
    match n {
        1 => {
            for u in [1.0, -1.0] {
                let mut d = Direction {
                    u,
                    ..Default::default()
                };
                d.first[0] = u;
                d.second[0][0] = 1.0;
                f(1.0, &d);
            }
        }
        2 => {
            let tau = 2.0 * std::f64::consts::PI;
            let panels = ((4.0 * phase_rate / phase_budget(base_points)).ceil() as usize).max(4);
            let width = tau / panels as f64;
            for p in 0..panels {
                let lo = p as f64 * width;
                for (theta, w) in rule.on(lo, lo + width) {
                    let (s, c) = theta.sin_cos();
                    let mut d = Direction {
                        u: c,
                        ..Default::default()
                    };
                    d.first[0] = c;
                    d.first[1] = s;
                    d.second[0][0] = c * c;
                    d.second[0][1] = c * s;
                    d.second[1][0] = c * s;
                    d.second[1][1] = s * s;
                    f(w, &d);
                }
            }
        }
        3 => {
            let tau = 2.0 * std::f64::consts::PI;
            let panels = ((2.0 * phase_rate / phase_budget(base_points)).ceil() as usize).max(1);
            let width = 2.0 / panels as f64;
            for p in 0..panels {
                let lo = -1.0 + p as f64 * width;
                for (t, w) in rule.on(lo, lo + width) {
                    let mut d = Direction {
                        u: t,
                        ..Default::default()
                    };
                    let perp = 0.5 * (1.0 - t * t);
                    d.first[0] = t;
                    d.second[0][0] = t * t;
                    d.second[1][1] = perp;
                    d.second[2][2] = perp;
                    f(tau * w, &d);
                }
            }
        }
        _ => unreachable!("dimension checked by caller"),
    }
}

/// Compensated summation; the oracle sums up to millions of terms.
#[derive(Debug, Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Radial panels `(lo, hi)` covering `[a, δ]`: geometric in `r`, then
/// subdivided so each carries at most one phase budget of oscillation.
fn outer_panels(a: f64, delta: f64, s: f64, budget: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut lo = a;
    while lo < delta {
        let hi = (2.0 * lo).min(delta);
        let pieces = ((s * (hi - lo) / budget).ceil() as usize).max(1);
        let step = (hi - lo) / pieces as f64;
        for i in 0..pieces {
            let p_lo = lo + i as f64 * step;
            let p_hi = if i + 1 == pieces { hi } else { p_lo + step };
            out.push((p_lo, p_hi));
        }
        lo = hi;
    }
    out
}

/// `∫_{B_δ(0)} f(w) dw` for integrands that depend on `w` through `r = ‖w‖`
/// and a [`Direction`]. `leading_power` is the exponent `γ` of the full
/// radial integrand (including the `r^{n-1}` Jacobian) at the origin.
fn ball_integral_level<const K: usize>(
    n: usize,
    delta: f64,
    s: f64,
    leading_power: f64,
    spec: &QuadratureSpec,
    scale: usize,
    f: &impl Fn(f64, &Direction) -> [f64; K],
) -> ([f64; K], f64) {
    let radial = Rule::new(spec.radial_points * scale / 2);
    let angular = Rule::new(spec.angular_points * scale / 2);
    let budget = phase_budget(spec.radial_points);

    let mut inner_end = spec.singularity_split * delta;
    if s > 0.0 {
        inner_end = inner_end.min(1.0 / s);
    }
    let gamma1 = leading_power + 1.0;
    let k = (6.0 * gamma1).ceil().max(1.0);
    let m = k / gamma1;

    let mut acc = [Neumaier::default(); K];
    // Sum of |contributions|, the scale of accumulated rounding.
    let mut abs_sum = [0.0; K];
    let mut add_shell = |r: f64, weight: f64, acc: &mut [Neumaier; K]| {
        let jac = weight * r.powi(n as i32 - 1);
        visit_directions(n, s * r, spec.angular_points, &angular, |w, dir| {
            let v = f(r, dir);
            for ((a, b), x) in acc.iter_mut().zip(abs_sum.iter_mut()).zip(v) {
                let c = jac * w * x;
                a.add(c);
                *b += c.abs();
            }
        });
    };

    for (t, w) in radial.on(0.0, 1.0) {
        let r = inner_end * t.powf(m);
        let dr = inner_end * m * t.powf(m - 1.0);
        add_shell(r, w * dr, &mut acc);
    }
    for (lo, hi) in outer_panels(inner_end, delta, s, budget) {
        for (r, w) in radial.on(lo, hi) {
            add_shell(r, w, &mut acc);
        }
    }
    (acc.map(|a| a.total()), abs_sum.iter().fold(0.0, |m: f64, x| m.max(*x)))
}

fn ball_integral<const K: usize>(
    n: usize,
    delta: f64,
    s: f64,
    leading_power: f64,
    spec: &QuadratureSpec,
    f: impl Fn(f64, &Direction) -> [f64; K],
) -> Result<Quad<[f64; K]>> {
    spec.validate()?;
    let fine_scale = 1usize << spec.refinement_levels;
    let (fine, abs_sum) = ball_integral_level(n, delta, s, leading_power, spec, fine_scale, &f);
    let (coarse, _) = ball_integral_level(n, delta, s, leading_power, spec, fine_scale / 2, &f);
    let magnitude = fine.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let diff = fine
        .iter()
        .zip(&coarse)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let err_est = diff + 64.0 * f64::EPSILON * abs_sum.max(magnitude);
    if err_est > spec.tolerance * magnitude.max(f64::MIN_POSITIVE) && magnitude > 0.0 {
        return Err(Error::AccuracyNotReached {
            estimate: err_est,
            tolerance: spec.tolerance * magnitude,
        });
    }
    Ok(Quad {
        value: fine,
        err_est,
    })
}

fn check_oracle_params(params: &NonlocalParams, nu: &[f64]) -> Result<()> {
    params.check_dim(nu)?;
    if params.n() > MAX_DIM {
        return Err(Error::invalid(format!(
            "quadrature oracle supports n <= {MAX_DIM}, got n = {}",
            params.n()
        )));
    }
    Ok(())
}

/// `cos x − 1` without cancellation.
fn cos_minus_one(x: f64) -> f64 {
    let h = (0.5 * x).sin();
    -2.0 * h * h
}

/// `sin x − x`; a Taylor branch covers small `|x|` where the subtraction cancels.
pub(crate) fn sin_minus_x(x: f64) -> f64 {
    if x.abs() < 0.5 {
        let x2 = x * x;
        // −x³/3! + x⁵/5! − … − x¹⁷/17!
        let mut term = -x * x2 / 6.0;
        let mut sum = term;
        let mut k = 3.0;
        while k < 18.0 {
            term *= -x2 / ((k + 1.0) * (k + 2.0));
            sum += term;
            k += 2.0;
        }
        sum
    } else {
        x.sin() - x
    }
}

/// Householder reflection `H` with `H e₁ = ν/‖ν‖` (symmetric, orthogonal).
fn frame(nu: &[f64]) -> DMatrix<f64> {
    let n = nu.len();
    let len = norm(nu);
    let mut v = DVector::from_iterator(n, nu.iter().map(|x| -x / len));
    v[0] += 1.0;
    let vv = v.dot(&v);
    let mut h = DMatrix::identity(n, n);
    if vv > 1e-30 {
        h -= (&v * v.transpose()) * (2.0 / vv);
    }
    h
}

fn leading_power(params: &NonlocalParams) -> f64 {
    params.n() as f64 + 1.0 - params.beta()
}

fn scaling(params: &NonlocalParams) -> f64 {
    crate::multipliers::scaling_constant(params)
}

/// `c ∫_{B_δ} (cos(ν·w) − 1) / ‖w‖^β dw`.
pub fn scalar_multiplier_quad(
    params: &NonlocalParams,
    nu: &[f64],
    spec: &QuadratureSpec,
) -> Result<Quad<f64>> {
    check_oracle_params(params, nu)?;
    let s = norm(nu);
    if s == 0.0 {
        return Ok(Quad {
            value: 0.0,
            err_est: 0.0,
        });
    }
    let beta = params.beta();
    let q = ball_integral(params.n(), params.delta(), s, leading_power(params), spec, |r, d| {
        [cos_minus_one(s * r * d.u) * r.powf(-beta)]
    })?;
    let c = scaling(params);
    Ok(Quad {
        value: c * q.value[0],
        err_est: c * q.err_est,
    })
}

/// Entries of `∫ w⊗w/‖w‖^{β+2} (cos(ν·w) − 1) dw` in the rotated frame.
fn bond_moments(params: &NonlocalParams, s: f64, spec: &QuadratureSpec) -> Result<Quad<[f64; 9]>> {
    let beta = params.beta();
    ball_integral(params.n(), params.delta(), s, leading_power(params), spec, |r, d| {
        let g = cos_minus_one(s * r * d.u) * r.powf(-beta);
        let mut out = [0.0; 9];
        for i in 0..MAX_DIM {
            for j in 0..MAX_DIM {
                out[3 * i + j] = d.second[i][j] * g;
            }
        }
        out
    })
}

/// `∫ w/‖w‖^β sin(ν·w) dw` in the rotated frame.
fn state_moments(params: &NonlocalParams, s: f64, spec: &QuadratureSpec) -> Result<Quad<[f64; 3]>> {
    let beta = params.beta();
    ball_integral(params.n(), params.delta(), s, leading_power(params), spec, |r, d| {
        let g = (s * r * d.u).sin() * r.powf(1.0 - beta);
        [d.first[0] * g, d.first[1] * g, d.first[2] * g]
    })
}

fn rotate_back(h: &DMatrix<f64>, rotated: &DMatrix<f64>) -> DMatrix<f64> {
    let m = h * rotated * h.transpose();
    // Symmetrize away rounding from the two products.
    (&m + m.transpose()) * 0.5
}

/// `(n+2) μ c ∫ w⊗w/‖w‖^{β+2} (cos(ν·w) − 1) dw`.
pub fn tensor_bond_quad(
    params: &NonlocalParams,
    material: &Material,
    nu: &[f64],
    spec: &QuadratureSpec,
) -> Result<Quad<DMatrix<f64>>> {
    check_oracle_params(params, nu)?;
    let n = params.n();
    let s = norm(nu);
    if s == 0.0 {
        return Ok(Quad {
            value: DMatrix::zeros(n, n),
            err_est: 0.0,
        });
    }
    let q = bond_moments(params, s, spec)?;
    let scale = (n as f64 + 2.0) * material.mu() * scaling(params);
    let rotated = DMatrix::from_fn(n, n, |i, j| scale * q.value[3 * i + j]);
    Ok(Quad {
        value: rotate_back(&frame(nu), &rotated),
        err_est: scale * q.err_est,
    })
}

/// `−(λ*−μ) c²/4 · v⊗v` with `v = ∫ w/‖w‖^β sin(ν·w) dw`.
pub fn tensor_state_quad(
    params: &NonlocalParams,
    material: &Material,
    nu: &[f64],
    spec: &QuadratureSpec,
) -> Result<Quad<DMatrix<f64>>> {
    check_oracle_params(params, nu)?;
    let n = params.n();
    let s = norm(nu);
    let shift = material.lambda_star() - material.mu();
    if s == 0.0 || shift == 0.0 {
        return Ok(Quad {
            value: DMatrix::zeros(n, n),
            err_est: 0.0,
        });
    }
    let q = state_moments(params, s, spec)?;
    let rotated = DVector::from_fn(n, |i, _| q.value[i]);
    let v = frame(nu) * rotated;
    let c = scaling(params);
    let scale = -shift * c * c / 4.0;
    let vmax = v.amax();
    Ok(Quad {
        value: (&v * v.transpose()) * scale,
        err_est: scale.abs() * (2.0 * vmax * q.err_est + q.err_est * q.err_est),
    })
}

/// Eigenvalue along `ν` from its integral form.
pub fn lambda1_quad(
    params: &NonlocalParams,
    material: &Material,
    nu: &[f64],
    spec: &QuadratureSpec,
) -> Result<Quad<f64>> {
    check_oracle_params(params, nu)?;
    let s = norm(nu);
    if s == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    let beta = params.beta();
    let q = ball_integral(params.n(), params.delta(), s, leading_power(params), spec, |r, d| {
        let x = s * r * d.u;
        let rb = r.powf(-beta);
        [d.u * d.u * cos_minus_one(x) * rb, d.u * x.sin() * r * rb]
    })?;
    let n = params.n() as f64;
    let c = scaling(params);
    let bond = (n + 2.0) * material.mu() * c;
    let half = 0.5 * c * q.value[1];
    let shift = material.lambda_star() - material.mu();
    Ok(Quad {
        value: bond * q.value[0] - shift * half * half,
        err_est: bond * q.err_est + shift.abs() * c * half.abs() * q.err_est,
    })
}

/// Eigenvalue transverse to `ν` from its integral form.
pub fn lambda2_quad(
    params: &NonlocalParams,
    material: &Material,
    nu: &[f64],
    spec: &QuadratureSpec,
) -> Result<Quad<f64>> {
    check_oracle_params(params, nu)?;
    let s = norm(nu);
    if s == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    let beta = params.beta();
    let q = ball_integral(params.n(), params.delta(), s, leading_power(params), spec, |r, d| {
        [d.u * sin_minus_x(s * r * d.u) * r.powf(-beta - 1.0) / s]
    })?;
    let scale = (params.n() as f64 + 2.0) * material.mu() * scaling(params);
    Ok(Quad {
        value: scale * q.value[0],
        err_est: scale * q.err_est,
    })
}

/// Checks `∫ w_i w_j/‖w‖^{β+2} dw = 2 δ_ij / c^{δ,β+2}` and returns the
/// largest deviation relative to the diagonal value. Requires `β < n`.
pub fn moment_identity_check(params: &NonlocalParams, spec: &QuadratureSpec) -> Result<f64> {
    let n = params.n();
    if n > MAX_DIM {
        return Err(Error::invalid(format!("quadrature oracle supports n <= {MAX_DIM}")));
    }
    let beta = params.beta();
    if beta >= n as f64 {
        return Err(Error::invalid(format!(
            "moment integral diverges for beta = {beta} >= n = {n}"
        )));
    }
    let q = ball_integral(n, params.delta(), 0.0, n as f64 - 1.0 - beta, spec, |r, d| {
        let rb = r.powf(-beta);
        let mut out = [0.0; 9];
        for i in 0..MAX_DIM {
            for j in 0..MAX_DIM {
                out[3 * i + j] = d.second[i][j] * rb;
            }
        }
        out
    })?;
    let diag = 2.0 / crate::multipliers::scaling_constant_raw(n, params.delta(), beta + 2.0);
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let expected = if i == j { diag } else { 0.0 };
            dev = dev.max((q.value[3 * i + j] - expected).abs() / diag);
        }
    }
    Ok(dev)
}

/// `𝓛 ψ(x)` for the plane wave `ψ(y) = e^{iν·y} γ`, by quadrature of the
/// bond integral and the factorized state double integral.
///
/// Odd first-order terms that vanish by symmetry are subtracted inside the
/// integrands (`cos − 1` and `sin x − x`), so every radial integrand is
/// absolutely integrable for `β < n + 2`.
pub fn apply_to_plane_wave(
    params: &NonlocalParams,
    material: &Material,
    nu: &[f64],
    gamma: &[Complex64],
    x: &[f64],
    spec: &QuadratureSpec,
) -> Result<Vec<Complex64>> {
    check_oracle_params(params, nu)?;
    let n = params.n();
    if gamma.len() != n || x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: gamma.len().min(x.len()),
        });
    }
    let s = norm(nu);
    if s == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); n]);
    }
    let beta = params.beta();
    let q = ball_integral(n, params.delta(), s, leading_power(params), spec, |r, d| {
        let xw = s * r * d.u;
        let rb = r.powf(-beta);
        let cm = cos_minus_one(xw) * rb;
        let sm = sin_minus_x(xw) * rb;
        let mut out = [0.0; 24];
        for i in 0..MAX_DIM {
            for j in 0..MAX_DIM {
                out[3 * i + j] = d.second[i][j] * cm;
                out[9 + 3 * i + j] = d.second[i][j] * sm;
            }
            out[18 + i] = d.first[i] * cm * r;
            out[21 + i] = d.first[i] * xw.sin() * rb * r;
        }
        out
    })?;

    let h = frame(nu);
    let c = scaling(params);
    let bond_scale = (n as f64 + 2.0) * material.mu() * c;
    let re_b = rotate_back(&h, &DMatrix::from_fn(n, n, |i, j| q.value[3 * i + j]));
    let im_b = rotate_back(&h, &DMatrix::from_fn(n, n, |i, j| q.value[9 + 3 * i + j]));
    let re_v = &h * DVector::from_fn(n, |i, _| q.value[18 + i]);
    let im_v = &h * DVector::from_fn(n, |i, _| q.value[21 + i]);

    let state_scale = (material.lambda_star() - material.mu()) * c * c / 4.0;
    let v: Vec<Complex64> = (0..n).map(|i| Complex64::new(re_v[i], im_v[i])).collect();
    let v_dot_gamma: Complex64 = v.iter().zip(gamma).map(|(a, g)| a * g).sum();
    let phase = Complex64::from_polar(1.0, nu.iter().zip(x).map(|(a, b)| a * b).sum());

    Ok((0..n)
        .map(|i| {
            let bond: Complex64 = (0..n)
                .map(|j| Complex64::new(re_b[(i, j)], im_b[(i, j)]) * gamma[j])
                .sum();
            (bond * bond_scale + v[i] * v_dot_gamma * state_scale) * phase
        })
        .collect())
}
