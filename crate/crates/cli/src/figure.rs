//! Eigenvalue curves `λ₁(‖ν‖)`, `λ₂(‖ν‖)` over a grid of horizons and
//! kernel exponents.

use std::fs;
use std::path::{Path, PathBuf};

use peridyn_core::multipliers::{eigenvalue_parallel, eigenvalue_transverse};
use peridyn_core::{Material, NonlocalParams};
use rayon::prelude::*;

use crate::output::{num, write_atomic};
use crate::CliError;

pub const HEADER: &str = "n,delta,beta,mu,lambda_star,nu_norm,lambda1,lambda2";

/// Default shear modulus and `λ*` values.
pub const DEFAULT_MU: f64 = 1.0;
pub const DEFAULT_LAMBDA_STARS: [f64; 5] = [-1.9, -1.0, 0.0, 1.0, 2.0];

/// Horizons of the default grid (columns): near-local, unit, and large.
pub const DEFAULT_DELTAS: [f64; 3] = [1e-3, 1.0, 2.0];

/// Kernel exponents of the default grid (rows): near-local, linear,
/// logarithmic and bounded growth of `λ₂`.
pub fn default_betas(n: usize) -> [f64; 4] {
    let n = n as f64;
    [n + 2.0 - 1e-3, n + 1.0, n, n - 1.0]
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureJob {
    pub n: usize,
    pub mu: f64,
    pub lambda_stars: Vec<f64>,
    pub delta: f64,
    pub beta: f64,
    pub nu_norm_min: f64,
    pub nu_norm_max: f64,
    pub samples: usize,
}

impl FigureJob {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.samples < 2 {
            return Err(CliError::Usage("samples must be at least 2".into()));
        }
        if !(self.nu_norm_min >= 0.0 && self.nu_norm_min < self.nu_norm_max) {
            return Err(CliError::Usage(format!(
                "need 0 <= nu_norm_min < nu_norm_max, got [{}, {}]",
                self.nu_norm_min, self.nu_norm_max
            )));
        }
        if self.lambda_stars.is_empty() {
            return Err(CliError::Usage("at least one --lambda-star is required".into()));
        }
        Ok(())
    }

    pub fn nu_norms(&self) -> impl Iterator<Item = f64> + '_ {
        let step = (self.nu_norm_max - self.nu_norm_min) / (self.samples - 1) as f64;
        (0..self.samples).map(move |i| {
            if i + 1 == self.samples {
                self.nu_norm_max
            } else {
                self.nu_norm_min + step * i as f64
            }
        })
    }

    /// File name inside the output directory, e.g. `delta=1_beta=4.csv`.
    pub fn file_name(&self) -> String {
        format!("delta={}_beta={}.csv", self.delta, self.beta)
    }
}

/// All jobs of the default figure: every (δ, β) panel of the grid.
pub fn default_jobs(n: usize, samples: usize, nu_norm_max: f64) -> Vec<FigureJob> {
    let mut jobs = Vec::new();
    for beta in default_betas(n) {
        for delta in DEFAULT_DELTAS {
            jobs.push(FigureJob {
                n,
                mu: DEFAULT_MU,
                lambda_stars: DEFAULT_LAMBDA_STARS.to_vec(),
                delta,
                beta,
                nu_norm_min: 0.0,
                nu_norm_max,
                samples,
            });
        }
    }
    jobs
}

/// Eigenvalues at one sample; `lambda1[i]` belongs to `lambda_stars[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub nu_norm: f64,
    pub lambda1: Vec<f64>,
    pub lambda2: f64,
}

/// Evaluates a job; `ν` points along the first axis.
pub fn compute(job: &FigureJob) -> Result<Vec<Sample>, CliError> {
    job.validate()?;
    let params = NonlocalParams::new(job.n, job.delta, job.beta)?;
    let materials = job
        .lambda_stars
        .iter()
        .map(|&ls| Material::new(job.mu, ls))
        .collect::<Result<Vec<_>, _>>()?;
    let norms: Vec<f64> = job.nu_norms().collect();
    norms
        .into_par_iter()
        .map(|s| {
            let mut nu = vec![0.0; job.n];
            nu[0] = s;
            if s == 0.0 {
                return Ok(Sample {
                    nu_norm: s,
                    lambda1: vec![0.0; materials.len()],
                    lambda2: 0.0,
                });
            }
            let lambda1 = materials
                .iter()
                .map(|m| eigenvalue_parallel(&params, m, &nu))
                .collect::<Result<Vec<_>, _>>()?;
            let lambda2 = eigenvalue_transverse(&params, &materials[0], &nu)?;
            Ok(Sample {
                nu_norm: s,
                lambda1,
                lambda2,
            })
        })
        .collect()
}

/// Long-format CSV: per sample one row per `λ*` carrying `λ₁`, then one
/// row with `lambda_star = NA` carrying `λ₂`.
pub fn to_csv(job: &FigureJob, samples: &[Sample]) -> String {
    let mut out = String::with_capacity(samples.len() * (job.lambda_stars.len() + 1) * 120);
    out.push_str(HEADER);
    out.push('\n');
    let prefix = format!("{},{},{},{}", job.n, num(job.delta), num(job.beta), num(job.mu));
    for s in samples {
        let nu = num(s.nu_norm);
        for (ls, l1) in job.lambda_stars.iter().zip(&s.lambda1) {
            out.push_str(&format!("{prefix},{},{nu},{},NA\n", num(*ls), num(*l1)));
        }
        out.push_str(&format!("{prefix},NA,{nu},NA,{}\n", num(s.lambda2)));
    }
    out
}

/// Computes every job, then writes one CSV per job into `dir`. Nothing is
/// written unless all jobs evaluate; files already written are removed if
/// a later write fails.
pub fn run(jobs: &[FigureJob], dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let tables = jobs
        .iter()
        .map(|job| compute(job).map(|s| (job.file_name(), to_csv(job, &s))))
        .collect::<Result<Vec<_>, _>>()?;
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::with_capacity(tables.len());
    for (name, csv) in tables {
        let path = dir.join(name);
        if let Err(e) = write_atomic(&path, &csv) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(e);
        }
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_job() -> FigureJob {
        FigureJob {
            n: 3,
            mu: 1.0,
            lambda_stars: vec![-1.0, 2.0],
            delta: 1.0,
            beta: 3.0,
            nu_norm_min: 0.0,
            nu_norm_max: 2.0,
            samples: 3,
        }
    }

    #[test]
    fn default_grid_has_twelve_panels() {
        let jobs = default_jobs(3, 1000, 15.0);
        assert_eq!(jobs.len(), 12);
        let mut names: Vec<_> = jobs.iter().map(FigureJob::file_name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 12);
    }

    #[test]
    fn csv_layout() {
        let job = small_job();
        let samples = compute(&job).unwrap();
        let csv = to_csv(&job, &samples);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], HEADER);
        assert_eq!(lines.len(), 1 + 3 * 3);
        let first: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(first[0], "3");
        assert_eq!(first[7], "NA");
        assert_eq!(first[6].parse::<f64>().unwrap(), 0.0);
        let l2_row: Vec<&str> = lines[3].split(',').collect();
        assert_eq!((l2_row[4], l2_row[6]), ("NA", "NA"));
        assert_eq!(l2_row[7].parse::<f64>().unwrap(), 0.0);
    }

    #[test]
    fn sample_grid_is_equispaced_and_hits_ends() {
        let job = FigureJob {
            samples: 1000,
            nu_norm_max: 15.0,
            ..small_job()
        };
        let v: Vec<f64> = job.nu_norms().collect();
        assert_eq!(v.len(), 1000);
        assert_eq!((v[0], v[999]), (0.0, 15.0));
        assert!((v[1] - 15.0 / 999.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_jobs() {
        assert!(compute(&FigureJob { samples: 1, ..small_job() }).is_err());
        assert!(compute(&FigureJob { nu_norm_min: 3.0, ..small_job() }).is_err());
        assert!(compute(&FigureJob { beta: 5.0, ..small_job() }).is_err());
    }
}
