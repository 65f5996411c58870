//! Generalized hypergeometric series `pFq(a; b; z)` for real arguments.
//!
//! Summation runs in `f64` first. When the partial sums show heavy
//! cancellation (large negative `z`, where individual terms dwarf the
//! result) the series is re-summed in exact-product fixed-point arithmetic
//! over big integers, with the precision sized from the observed
//! cancellation ratio.
//!
//! The three manipulation identities used to simplify the tensor multipliers
//! are exposed as operations so they can be checked directly:
//! [`f_form_derivatives`], [`pfq_minus_one`] and [`merge_linear_combination`].

use num_bigint::BigInt;
use num_traits::{Float, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Relative tolerance used by the multiplier code.
pub const DEFAULT_REL_TOL: f64 = 1e-15;

const MIN_REL_TOL: f64 = 1e-15;
const MAX_REL_TOL: f64 = 1e-6;
const MAX_TERMS: usize = 10_000;
/// Cancellation ratio `max|term| / |sum|` above which `f64` summation is abandoned.
const CANCELLATION_RATIO: f64 = 1e8;
const MAX_PRECISION_BITS: u32 = 8192;

/// Numerator and denominator parameter lists of a `pFq` series.
#[derive(Debug, Clone, PartialEq)]
pub struct PfqParams {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl PfqParams {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if let Some(x) = a.iter().chain(b.iter()).find(|x| !x.is_finite()) {
            return Err(Error::invalid(format!("non-finite series parameter {x}")));
        }
        if let Some(&bj) = b.iter().find(|&&bj| is_nonpositive_integer(bj)) {
            return Err(Error::invalid(format!(
                "denominator parameter {bj} is a nonpositive integer"
            )));
        }
        if a.len() > b.len() + 1 {
            return Err(Error::invalid(format!(
                "p = {} > q + 1 = {}: series has zero radius of convergence",
                a.len(),
                b.len() + 1
            )));
        }
        Ok(PfqParams { a, b })
    }

    pub fn numerators(&self) -> &[f64] {
        &self.a
    }

    pub fn denominators(&self) -> &[f64] {
        &self.b
    }

    pub fn p(&self) -> usize {
        self.a.len()
    }

    pub fn q(&self) -> usize {
        self.b.len()
    }

    /// `∏a`, the product of the numerator parameters (1 when empty).
    pub fn numerator_product(&self) -> f64 {
        self.a.iter().product()
    }

    /// `∏b`, the product of the denominator parameters (1 when empty).
    pub fn denominator_product(&self) -> f64 {
        self.b.iter().product()
    }

    /// `(a + c; b + c)`.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        PfqParams::new(
            self.a.iter().map(|x| x + c).collect(),
            self.b.iter().map(|x| x + c).collect(),
        )
    }

    /// `(a0, a; b0, b)`.
    pub fn prepended(&self, a0: f64, b0: f64) -> Result<Self> {
        let mut a = Vec::with_capacity(self.a.len() + 1);
        a.push(a0);
        a.extend_from_slice(&self.a);
        let mut b = Vec::with_capacity(self.b.len() + 1);
        b.push(b0);
        b.extend_from_slice(&self.b);
        PfqParams::new(a, b)
    }

    /// Drops numerator/denominator pairs that are exactly equal; they
    /// contribute a factor of one to every term.
    fn cancelled(&self) -> (Vec<f64>, Vec<f64>) {
        let mut a = self.a.clone();
        let mut b = Vec::with_capacity(self.b.len());
        for &bj in &self.b {
            match a.iter().position(|&ai| ai == bj) {
                Some(i) => {
                    a.remove(i);
                }
                None => b.push(bj),
            }
        }
        (a, b)
    }
}

/// A series value together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    /// Truncation bound from the stopping rule plus a rounding estimate.
    pub abs_error_estimate: f64,
    pub terms_used: usize,
    /// 53 for plain `f64` summation, otherwise the extended working precision.
    pub precision_bits: u32,
}

/// Rising factorial `(a)_k = a (a+1) ··· (a+k-1)`.
pub fn pochhammer(a: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (a + f64::from(j)))
}

/// `pFq(a; b; z) = Σ (a)_k / (b)_k · z^k / k!`.
pub fn pfq(params: &PfqParams, z: f64, target_rel_tol: f64) -> Result<EvalResult> {
    check_tolerance(target_rel_tol)?;
    if !z.is_finite() {
        return Err(Error::invalid(format!("non-finite argument z = {z}")));
    }
    let (a, b) = params.cancelled();
    if a.len() == b.len() + 1 && z.abs() >= 1.0 {
        return Err(Error::NonConvergent { terms: 0, z });
    }
    if z == 0.0 {
        return Ok(EvalResult {
            value: 1.0,
            abs_error_estimate: 0.0,
            terms_used: 1,
            precision_bits: 53,
        });
    }

    let plain = sum_f64(&a, &b, z, target_rel_tol)?;
    let ratio = plain.max_abs_term / plain.value.abs();
    let rounding = 2.0 * f64::EPSILON * plain.abs_sum;
    if ratio <= CANCELLATION_RATIO && rounding <= target_rel_tol * plain.value.abs() {
        return Ok(EvalResult {
            value: plain.value,
            abs_error_estimate: plain.truncation + rounding,
            terms_used: plain.terms,
            precision_bits: 53,
        });
    }

    // The f64 sum may be pure rounding noise, so the ratio it implies is only
    // a lower bound; widen until the extended result confirms the precision.
    let mut bits = precision_for_ratio(ratio);
    loop {
        let ext = sum_extended(&a, &b, z, target_rel_tol, bits, plain.max_abs_term)?;
        let needed = precision_for_ratio(plain.max_abs_term / ext.value.abs());
        if needed <= bits || bits >= MAX_PRECISION_BITS {
            return Ok(ext);
        }
        bits = needed.min(MAX_PRECISION_BITS);
    }
}

/// `pFq(a; b; z) − 1` through `(∏a/∏b) · z · p+1Fq+1(1, a+1; 2, b+1; z)`,
/// which keeps full relative accuracy as `z → 0`.
pub fn pfq_minus_one(params: &PfqParams, z: f64, target_rel_tol: f64) -> Result<EvalResult> {
    check_tolerance(target_rel_tol)?;
    let factor = params.numerator_product() / params.denominator_product() * z;
    if factor == 0.0 {
        return Ok(EvalResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            terms_used: 1,
            precision_bits: 53,
        });
    }
    let inner = params.shifted(1.0)?.prepended(1.0, 2.0)?;
    let r = pfq(&inner, z, target_rel_tol)?;
    Ok(EvalResult {
        value: factor * r.value,
        abs_error_estimate: factor.abs() * r.abs_error_estimate,
        ..r
    })
}

/// Right-hand side of the merge identity
/// `c·p+1Fq+1(1, a; 2, b; z) + d·pFq(a; b; z)
///   = (c+d)·p+2Fq+2(1, (c+2d)/d, a; 2, (c+d)/d, b; z)`.
pub fn merge_linear_combination(c: f64, d: f64, params: &PfqParams, z: f64) -> Result<EvalResult> {
    if d == 0.0 {
        return Err(Error::invalid("merge requires d != 0"));
    }
    let lower = (c + d) / d;
    if is_nonpositive_integer(lower) {
        return Err(Error::invalid(format!(
            "(c + d)/d = {lower} is a nonpositive integer"
        )));
    }
    let upper = (c + 2.0 * d) / d;
    let mut a = vec![1.0, upper];
    a.extend_from_slice(params.numerators());
    let mut b = vec![2.0, lower];
    b.extend_from_slice(params.denominators());
    let r = pfq(&PfqParams::new(a, b)?, z, DEFAULT_REL_TOL)?;
    Ok(EvalResult {
        value: (c + d) * r.value,
        abs_error_estimate: (c + d).abs() * r.abs_error_estimate,
        ..r
    })
}

/// `f`, `f'` and `f''` for `f(z) = z · pFq(a; b; z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormDerivatives {
    pub f: f64,
    pub f_prime: f64,
    pub f_double_prime: f64,
}

/// Evaluates `f(z) = z·pFq(a; b; z)` and its first two derivatives:
/// `f' = p+1Fq+1(a'; b'; z)` and `f'' = (∏a'/∏b')·p+1Fq+1(a'+1; b'+1; z)`
/// with `a' = (2, a)`, `b' = (1, b)`.
pub fn f_form_derivatives(params: &PfqParams, z: f64) -> Result<FormDerivatives> {
    let f = z * pfq(params, z, DEFAULT_REL_TOL)?.value;
    let primed = params.prepended(2.0, 1.0)?;
    let f_prime = pfq(&primed, z, DEFAULT_REL_TOL)?.value;
    let scale = primed.numerator_product() / primed.denominator_product();
    let f_double_prime = scale * pfq(&primed.shifted(1.0)?, z, DEFAULT_REL_TOL)?.value;
    Ok(FormDerivatives {
        f,
        f_prime,
        f_double_prime,
    })
}

/// Shorthand used throughout the crate: value of `pFq(a; b; z)` at the default tolerance.
pub(crate) fn hyp(a: &[f64], b: &[f64], z: f64) -> Result<f64> {
    let params = PfqParams::new(a.to_vec(), b.to_vec())?;
    Ok(pfq(&params, z, DEFAULT_REL_TOL)?.value)
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

fn check_tolerance(tol: f64) -> Result<()> {
    if (MIN_REL_TOL..=MAX_REL_TOL).contains(&tol) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "target relative tolerance {tol:e} outside [{MIN_REL_TOL:e}, {MAX_REL_TOL:e}]"
        )))
    }
}

/// `64 + ceil(3.33 · log10(ratio))` bits.
fn precision_for_ratio(ratio: f64) -> u32 {
    if !ratio.is_finite() {
        return MAX_PRECISION_BITS;
    }
    let extra = (3.33 * ratio.max(1.0).log10()).ceil() as u32;
    (64 + extra).min(MAX_PRECISION_BITS)
}

/// Tail bound `|t_{k+1}| / (1 − ρ)` given the next term and the current term ratio.
fn tail_bound(next_abs: f64, ratio_abs: f64) -> f64 {
    if next_abs == 0.0 {
        0.0
    } else if ratio_abs <= 0.5 {
        2.0 * next_abs
    } else if ratio_abs < 1.0 {
        next_abs / (1.0 - ratio_abs)
    } else {
        f64::INFINITY
    }
}

fn term_ratio(a: &[f64], b: &[f64], z: f64, k: usize) -> f64 {
    let kf = k as f64;
    let mut r = z / (kf + 1.0);
    for &ai in a {
        r *= ai + kf;
    }
    for &bj in b {
        r /= bj + kf;
    }
    r
}

struct PlainSum {
    value: f64,
    truncation: f64,
    terms: usize,
    max_abs_term: f64,
    abs_sum: f64,
}

/// Stops once three consecutive terms are below `tol·|sum|` and the
/// a-posteriori tail bound is too.
fn sum_f64(a: &[f64], b: &[f64], z: f64, tol: f64) -> Result<PlainSum> {
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut abs_sum = 1.0_f64;
    let mut max_abs_term = 1.0_f64;
    let mut small_run = 0;
    for k in 0..MAX_TERMS {
        term *= term_ratio(a, b, z, k);
        if !term.is_finite() {
            return Err(Error::NonConvergent { terms: k + 1, z });
        }
        sum += term;
        abs_sum += term.abs();
        max_abs_term = max_abs_term.max(term.abs());
        if term.abs() <= tol * sum.abs() {
            small_run += 1;
        } else {
            small_run = 0;
        }
        if small_run >= 3 {
            let rho = term_ratio(a, b, z, k + 1).abs();
            let truncation = tail_bound(term.abs() * rho, rho);
            if truncation <= tol * sum.abs() {
                return Ok(PlainSum {
                    value: sum,
                    truncation,
                    terms: k + 2,
                    max_abs_term,
                    abs_sum,
                });
            }
        }
    }
    Err(Error::NonConvergent {
        terms: MAX_TERMS,
        z,
    })
}

/// Exact dyadic rational `m · 2^e` of an `f64`.
#[derive(Debug, Clone)]
struct Dyadic {
    mantissa: BigInt,
    exponent: i64,
}

impl Dyadic {
    fn from_f64(x: f64) -> Self {
        let (m, e, sign) = Float::integer_decode(x);
        let mut mantissa = BigInt::from(m);
        if sign < 0 {
            mantissa = -mantissa;
        }
        let exponent = i64::from(e);
        if exponent >= 0 {
            Dyadic {
                mantissa: mantissa << exponent as usize,
                exponent: 0,
            }
        } else {
            Dyadic { mantissa, exponent }
        }
    }

    /// `x + k` as `(integer, exponent)`, exactly.
    fn plus_integer(&self, k: u64) -> (BigInt, i64) {
        let shifted = BigInt::from(k) << (-self.exponent) as usize;
        (&self.mantissa + shifted, self.exponent)
    }
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// Value of the fixed-point integer `x · 2^-frac_bits`.
fn fixed_to_f64(x: &BigInt, frac_bits: i64) -> f64 {
    let shift = (x.bits() as i64 - 64).max(0);
    let top = (x >> shift as usize).to_f64().unwrap_or(0.0);
    ldexp(top, shift - frac_bits)
}

/// Re-sums the series with every term ratio applied exactly and a single
/// truncation per term at `frac_bits` fractional bits.
fn sum_extended(
    a: &[f64],
    b: &[f64],
    z: f64,
    tol: f64,
    precision_bits: u32,
    max_abs_term: f64,
) -> Result<EvalResult> {
    let top_bit = max_abs_term.log2().ceil() as i64;
    let frac_bits = (i64::from(precision_bits) - top_bit + 16).max(64);
    let a: Vec<Dyadic> = a.iter().map(|&x| Dyadic::from_f64(x)).collect();
    let b: Vec<Dyadic> = b.iter().map(|&x| Dyadic::from_f64(x)).collect();
    let z = Dyadic::from_f64(z);

    let mut term = BigInt::one() << frac_bits as usize;
    let mut sum = term.clone();
    let mut small_run = 0;
    for k in 0..MAX_TERMS as u64 {
        let mut num = z.mantissa.clone();
        let mut den = BigInt::from(k + 1);
        let mut shift = z.exponent;
        for ai in &a {
            let (x, e) = ai.plus_integer(k);
            num *= x;
            shift += e;
        }
        for bj in &b {
            let (x, e) = bj.plus_integer(k);
            den *= x;
            shift -= e;
        }
        let mut scaled = term * num;
        if shift >= 0 {
            scaled <<= shift as usize;
        } else {
            den <<= (-shift) as usize;
        }
        term = scaled / den;
        sum += &term;

        if term.is_zero() {
            // Terminating series, or the term dropped below the resolution.
            small_run += 1;
        } else {
            let t = fixed_to_f64(&term, frac_bits).abs();
            let s = fixed_to_f64(&sum, frac_bits).abs();
            if t <= tol * s {
                small_run += 1;
            } else {
                small_run = 0;
            }
        }
        if small_run >= 3 {
            let t = fixed_to_f64(&term, frac_bits).abs();
            let value = fixed_to_f64(&sum, frac_bits);
            let kf = k as usize + 1;
            let a64: Vec<f64> = a.iter().map(dyadic_to_f64).collect();
            let b64: Vec<f64> = b.iter().map(dyadic_to_f64).collect();
            let rho = term_ratio(&a64, &b64, dyadic_to_f64(&z), kf).abs();
            let truncation = tail_bound(t * rho, rho);
            if truncation <= tol * value.abs() || term.is_zero() && truncation == 0.0 {
                let resolution = ldexp(kf as f64 + 1.0, -frac_bits);
                return Ok(EvalResult {
                    value,
                    abs_error_estimate: truncation + resolution,
                    terms_used: kf + 1,
                    precision_bits,
                });
            }
        }
        if term.abs().bits() > (frac_bits as u64 + 4096) {
            break;
        }
    }
    Err(Error::NonConvergent {
        terms: MAX_TERMS,
        z: dyadic_to_f64(&z),
    })
}

fn dyadic_to_f64(d: &Dyadic) -> f64 {
    fixed_to_f64(&d.mantissa, -d.exponent)
}
