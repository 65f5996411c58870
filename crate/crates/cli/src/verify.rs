//! Dual-path sweep: hypergeometric closed forms against direct quadrature.
//!
//! Tuples come from a Halton sequence with a seeded random shift, so runs
//! are reproducible and cover the parameter box evenly.

use nalgebra::DMatrix;
use peridyn_core::multipliers::{
    eigenvalue_parallel, eigenvalue_transverse, scalar_multiplier, tensor_multiplier_bond,
    tensor_multiplier_state,
};
use peridyn_core::oracle::{
    lambda1_quad, lambda2_quad, scalar_multiplier_quad, tensor_bond_quad, tensor_state_quad,
    QuadratureSpec,
};
use peridyn_core::{Material, NonlocalParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::{CliError, Outcome};

/// Absolute floor of the pass criterion `|diff| ≤ max(tol·|ref|, ABS_FLOOR)`.
pub const ABS_FLOOR: f64 = 1e-8;

const PRIMES: [u64; 9] = [2, 3, 5, 7, 11, 13, 17, 19, 23];

/// Optional pins applied to every tuple.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub n: Option<usize>,
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tuple {
    pub n: usize,
    pub delta: f64,
    pub beta: f64,
    pub mu: f64,
    pub lambda_star: f64,
    pub nu: Vec<f64>,
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// `count` tuples over n ∈ {1,2,3}, δ ∈ [0.1,4], β ∈ [−2, n+2−0.05],
/// μ ∈ [0.5,3], λ* ∈ [−2μ, 3], ‖ν‖ ∈ [0, 20].
pub fn sample_tuples(seed: u64, count: usize, overrides: Overrides) -> Vec<Tuple> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = PRIMES.iter().map(|_| rng.random::<f64>()).collect();
    (0..count as u64)
        .map(|i| {
            let u: Vec<f64> = PRIMES
                .iter()
                .zip(&shift)
                .map(|(&b, s)| (radical_inverse(i + 1, b) + s).fract())
                .collect();
            let n = overrides.n.unwrap_or(1 + ((3.0 * u[0]) as usize).min(2));
            let delta = 0.1 + 3.9 * u[1];
            let beta = overrides
                .beta
                .unwrap_or(-2.0 + (n as f64 + 4.0 - 0.05) * u[2]);
            let mu = 0.5 + 2.5 * u[3];
            let lambda_star = -2.0 * mu + (3.0 + 2.0 * mu) * u[4];
            let len = 20.0 * u[5];
            let mut dir: Vec<f64> = u[6..].iter().cycle().take(n).map(|x| 2.0 * x - 1.0).collect();
            let dn = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            if dn < 1e-6 {
                dir = vec![0.0; n];
                dir[0] = 1.0;
            } else {
                dir.iter_mut().for_each(|x| *x /= dn);
            }
            Tuple {
                n,
                delta,
                beta,
                mu,
                lambda_star,
                nu: dir.into_iter().map(|x| x * len).collect(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub quantity: String,
    pub hypergeometric: f64,
    pub quadrature: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    pub pass: bool,
}

impl Comparison {
    fn new(quantity: String, hypergeometric: f64, quadrature: f64, tol: f64) -> Self {
        let abs_error = (hypergeometric - quadrature).abs();
        let rel_error = if hypergeometric == 0.0 {
            if abs_error == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            abs_error / hypergeometric.abs()
        };
        Comparison {
            quantity,
            hypergeometric,
            quadrature,
            abs_error,
            rel_error,
            pass: abs_error <= (tol * hypergeometric.abs()).max(ABS_FLOOR),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TupleReport {
    pub index: usize,
    #[serde(flatten)]
    pub tuple: Tuple,
    pub comparisons: Vec<Comparison>,
}

impl TupleReport {
    pub fn passed(&self) -> bool {
        self.comparisons.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub seed: u64,
    pub count: usize,
    pub tol: f64,
    pub passed: bool,
    pub failures: usize,
    pub max_rel_error: f64,
    pub tuples: Vec<TupleReport>,
}

impl Report {
    pub fn new(seed: u64, tol: f64, tuples: Vec<TupleReport>) -> Self {
        let failures = tuples.iter().filter(|r| !r.passed()).count();
        // Relative error is only meaningful above the absolute floor.
        let max_rel_error = tuples
            .iter()
            .flat_map(|r| r.comparisons.iter())
            .filter(|c| c.hypergeometric.abs() > ABS_FLOOR)
            .map(|c| c.rel_error)
            .fold(0.0, f64::max);
        Report {
            seed,
            count: tuples.len(),
            tol,
            passed: failures == 0,
            failures,
            max_rel_error,
            tuples,
        }
    }

    pub fn outcome(&self) -> Outcome {
        if self.passed {
            Outcome::Success
        } else {
            Outcome::VerificationFailed
        }
    }
}

fn matrix_comparisons(
    name: &str,
    hyp: &DMatrix<f64>,
    quad: &DMatrix<f64>,
    tol: f64,
    out: &mut Vec<Comparison>,
) {
    for i in 0..hyp.nrows() {
        for j in 0..hyp.ncols() {
            out.push(Comparison::new(format!("{name}[{i},{j}]"), hyp[(i, j)], quad[(i, j)], tol));
        }
    }
}

/// Compares scalar multiplier, both tensor parts (entrywise) and both
/// eigenvalues for one tuple.
pub fn compare_tuple(
    tuple: &Tuple,
    spec: &QuadratureSpec,
    tol: f64,
) -> Result<Vec<Comparison>, CliError> {
    let params = NonlocalParams::new(tuple.n, tuple.delta, tuple.beta)?;
    let material = Material::new(tuple.mu, tuple.lambda_star)?;
    let nu = &tuple.nu;
    let mut out = Vec::new();

    out.push(Comparison::new(
        "scalar".into(),
        scalar_multiplier(&params, nu)?,
        scalar_multiplier_quad(&params, nu, spec)?.value,
        tol,
    ));
    let hb = tensor_multiplier_bond(&params, &material, nu)?.matrix;
    let qb = tensor_bond_quad(&params, &material, nu, spec)?.value;
    matrix_comparisons("M_b", &hb, &qb, tol, &mut out);
    let hs = tensor_multiplier_state(&params, &material, nu)?.matrix;
    let qs = tensor_state_quad(&params, &material, nu, spec)?.value;
    matrix_comparisons("M_s", &hs, &qs, tol, &mut out);

    // Both eigenvalues vanish at ν = 0 by continuity.
    let (h1, q1, h2, q2) = if nu.iter().all(|x| *x == 0.0) {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        (
            eigenvalue_parallel(&params, &material, nu)?,
            lambda1_quad(&params, &material, nu, spec)?.value,
            eigenvalue_transverse(&params, &material, nu)?,
            lambda2_quad(&params, &material, nu, spec)?.value,
        )
    };
    out.push(Comparison::new("lambda1".into(), h1, q1, tol));
    out.push(Comparison::new("lambda2".into(), h2, q2, tol));
    Ok(out)
}

/// Runs the sweep. Tuples are evaluated in parallel on the current rayon
/// pool; the report order is the tuple order.
pub fn run(
    seed: u64,
    count: usize,
    tol: f64,
    overrides: Overrides,
    spec: &QuadratureSpec,
) -> Result<Report, CliError> {
    if count == 0 {
        return Err(CliError::Usage("count must be at least 1".into()));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::Usage(format!("tol must be positive, got {tol}")));
    }
    let tuples = sample_tuples(seed, count, overrides);
    let reports = tuples
        .into_par_iter()
        .enumerate()
        .map(|(index, tuple)| {
            let comparisons = compare_tuple(&tuple, spec, tol)?;
            Ok(TupleReport {
                index,
                tuple,
                comparisons,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Report::new(seed, tol, reports))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuples_stay_in_ranges() {
        for t in sample_tuples(3, 200, Overrides::default()) {
            assert!((1..=3).contains(&t.n));
            assert!((0.1..=4.0).contains(&t.delta));
            assert!(t.beta >= -2.0 && t.beta <= t.n as f64 + 2.0 - 0.05);
            assert!((0.5..=3.0).contains(&t.mu));
            assert!(t.lambda_star >= -2.0 * t.mu && t.lambda_star <= 3.0);
            let len = t.nu.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!(len <= 20.0 + 1e-12);
            assert_eq!(t.nu.len(), t.n);
        }
    }

    #[test]
    fn tuples_are_seeded() {
        let a = sample_tuples(1, 5, Overrides::default());
        assert_eq!(a, sample_tuples(1, 5, Overrides::default()));
        assert_ne!(a, sample_tuples(2, 5, Overrides::default()));
    }

    #[test]
    fn overrides_pin_fields() {
        let o = Overrides {
            n: Some(2),
            beta: Some(1.5),
        };
        assert!(sample_tuples(9, 20, o).iter().all(|t| t.n == 2 && t.beta == 1.5));
    }

    #[test]
    fn pass_rule() {
        assert!(Comparison::new("x".into(), 1.0, 1.0 + 5e-7, 1e-6).pass);
        assert!(!Comparison::new("x".into(), 1.0, 1.0 + 2e-6, 1e-6).pass);
        assert!(Comparison::new("x".into(), 0.0, 5e-9, 1e-6).pass);
        assert!(!Comparison::new("x".into(), 0.0, 2e-8, 1e-6).pass);
    }
}
