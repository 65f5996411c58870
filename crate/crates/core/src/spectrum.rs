//! Eigenpairs of the operator on the periodic box `Π [0, ℓ_i)` and spectral
//! apply/solve for truncated Fourier series.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::multipliers::{eigen_basis, eigen_decomposition, tensor_multiplier, Material, NonlocalParams};

/// Eigenvalues below this magnitude make `solve_periodic` refuse the mode.
pub const DEGENERATE_EIGENVALUE: f64 = 1e-14;

/// Side lengths of the periodic box.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusSpec {
    lengths: Vec<f64>,
}

impl TorusSpec {
    pub fn new(lengths: Vec<f64>) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::invalid("torus needs at least one length"));
        }
        if let Some(l) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::invalid(format!("torus lengths must be positive, got {l}")));
        }
        Ok(TorusSpec { lengths })
    }

    /// The cube `[0, 2π)^n`, on which `ν_k = k`.
    pub fn standard(n: usize) -> Self {
        TorusSpec {
            lengths: vec![2.0 * PI; n],
        }
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

/// `ν_k = (2π k_i / ℓ_i)_i`.
pub fn frequency_vector(k: &[i64], torus: &TorusSpec) -> Result<Vec<f64>> {
    torus.check(k.len())?;
    Ok(k.iter()
        .zip(torus.lengths())
        .map(|(&ki, l)| 2.0 * PI * ki as f64 / l)
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRecord {
    pub k: Vec<i64>,
    pub nu: Vec<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub multiplicity2: usize,
}

impl SpectrumRecord {
    pub fn nu_norm(&self) -> f64 {
        self.nu.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// All `k ∈ {−K, …, K}^n` in lexicographic order (`k_1` most significant).
pub fn mode_box(n: usize, k_max: i64) -> Vec<Vec<i64>> {
    let side = (2 * k_max + 1) as usize;
    let total = side.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            let mut k = vec![0; n];
            for slot in k.iter_mut().rev() {
                *slot = (idx % side) as i64 - k_max;
                idx /= side;
            }
            k
        })
        .collect()
}

/// One record per mode in the box `|k_i| ≤ k_max`, ordered by [`mode_box`].
pub fn spectrum_table(
    params: &NonlocalParams,
    material: &Material,
    torus: &TorusSpec,
    k_max: i64,
) -> Result<Vec<SpectrumRecord>> {
    if k_max < 0 {
        return Err(Error::invalid("k_max must be non-negative"));
    }
    let n = params.n();
    torus.check(n)?;
    mode_box(n, k_max)
        .into_par_iter()
        .map(|k| {
            let nu = frequency_vector(&k, torus)?;
            let eig = eigen_decomposition(params, material, &nu)?;
            Ok(SpectrumRecord {
                k,
                nu,
                lambda1: eig.lambda1,
                lambda2: eig.lambda2,
                multiplicity2: n - 1,
            })
        })
        .collect()
}

/// Which eigenvector field of a mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// `ν_k` itself (not normalised).
    Parallel,
    /// The `j`-th basis vector of the eigendecomposition, `2 ≤ j ≤ n`.
    Transverse(usize),
}

/// `φ_k(x) = e^{iν_k·x} ζ` with `ζ = ν_k` or a transverse basis vector.
pub fn eigenfield(k: &[i64], torus: &TorusSpec, which: Mode, x: &[f64]) -> Result<Vec<Complex64>> {
    let nu = frequency_vector(k, torus)?;
    torus.check(x.len())?;
    if k.iter().all(|&ki| ki == 0) {
        return Err(Error::ZeroMode);
    }
    let n = nu.len();
    let zeta: Vec<f64> = match which {
        Mode::Parallel => nu.clone(),
        Mode::Transverse(j) if (2..=n).contains(&j) => eigen_basis(&nu)[j - 1].iter().copied().collect(),
        Mode::Transverse(j) => {
            return Err(Error::invalid(format!("transverse index {j} outside 2..={n}")))
        }
    };
    let phase = Complex64::from_polar(1.0, nu.iter().zip(x).map(|(a, b)| a * b).sum());
    Ok(zeta.into_iter().map(|z| phase * z).collect())
}

/// Truncated Fourier series `Σ_k c_k e^{iν_k·x}` with `c_k ∈ ℂ^n`, `|k_i| ≤ cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    n: usize,
    cutoff: i64,
    coefficients: BTreeMap<Vec<i64>, Vec<Complex64>>,
}

impl FourierField {
    pub fn zeros(n: usize, cutoff: i64) -> Self {
        FourierField {
            n,
            cutoff,
            coefficients: BTreeMap::new(),
        }
    }

    /// A real field from modes `(k, γ)`: each sets `c_k = γ` and `c_{−k} = conj γ`.
    pub fn from_real_modes<I>(n: usize, cutoff: i64, modes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<i64>, Vec<Complex64>)>,
    {
        let mut field = FourierField::zeros(n, cutoff);
        for (k, gamma) in modes {
            field.set_real_mode(&k, &gamma)?;
        }
        Ok(field)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn cutoff(&self) -> i64 {
        self.cutoff
    }

    fn check_mode(&self, k: &[i64], c: &[Complex64]) -> Result<()> {
        if k.len() != self.n || c.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: if k.len() != self.n { k.len() } else { c.len() },
            });
        }
        if k.iter().any(|ki| ki.abs() > self.cutoff) {
            return Err(Error::invalid(format!("mode {k:?} outside cutoff {}", self.cutoff)));
        }
        Ok(())
    }

    pub fn insert(&mut self, k: Vec<i64>, c: Vec<Complex64>) -> Result<()> {
        self.check_mode(&k, &c)?;
        self.coefficients.insert(k, c);
        Ok(())
    }

    /// Sets `c_k = γ` and `c_{−k} = conj γ`; at `k = 0` only the real part is kept.
    pub fn set_real_mode(&mut self, k: &[i64], gamma: &[Complex64]) -> Result<()> {
        self.check_mode(k, gamma)?;
        let minus: Vec<i64> = k.iter().map(|x| -x).collect();
        if minus == k {
            let re = gamma.iter().map(|g| Complex64::new(g.re, 0.0)).collect();
            self.coefficients.insert(k.to_vec(), re);
        } else {
            self.coefficients.insert(k.to_vec(), gamma.to_vec());
            self.coefficients.insert(minus, gamma.iter().map(|g| g.conj()).collect());
        }
        Ok(())
    }

    pub fn get(&self, k: &[i64]) -> Option<&[Complex64]> {
        self.coefficients.get(k).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i64>, &Vec<Complex64>)> {
        self.coefficients.iter()
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: Complex64, other: &FourierField, b: Complex64) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let zero = vec![Complex64::new(0.0, 0.0); self.n];
        let mut out = FourierField::zeros(self.n, self.cutoff.max(other.cutoff));
        for k in self.coefficients.keys().chain(other.coefficients.keys()) {
            if out.coefficients.contains_key(k) {
                continue;
            }
            let x = self.coefficients.get(k).unwrap_or(&zero);
            let y = other.coefficients.get(k).unwrap_or(&zero);
            let c = x.iter().zip(y).map(|(x, y)| a * x + b * y).collect();
            out.coefficients.insert(k.clone(), c);
        }
        Ok(out)
    }

    /// Largest coefficient-wise `|self − other|`, missing modes counted as zero.
    pub fn max_abs_diff(&self, other: &FourierField) -> f64 {
        let zero = vec![Complex64::new(0.0, 0.0); self.n.max(other.n)];
        self.coefficients
            .keys()
            .chain(other.coefficients.keys())
            .map(|k| {
                let x = self.coefficients.get(k).unwrap_or(&zero);
                let y = other.coefficients.get(k).unwrap_or(&zero);
                x.iter().zip(y).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|c_{−k} − conj c_k|`; zero for fields representing real data.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let zero = vec![Complex64::new(0.0, 0.0); self.n];
        self.coefficients
            .iter()
            .map(|(k, c)| {
                let minus: Vec<i64> = k.iter().map(|x| -x).collect();
                let m = self.coefficients.get(&minus).unwrap_or(&zero);
                c.iter().zip(m).map(|(a, b)| (a.conj() - b).norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Evaluates the series at `x`.
    pub fn evaluate(&self, torus: &TorusSpec, x: &[f64]) -> Result<Vec<Complex64>> {
        torus.check(self.n)?;
        torus.check(x.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        for (k, c) in &self.coefficients {
            let nu = frequency_vector(k, torus)?;
            let phase = Complex64::from_polar(1.0, nu.iter().zip(x).map(|(a, b)| a * b).sum());
            for (o, ci) in out.iter_mut().zip(c) {
                *o += phase * ci;
            }
        }
        Ok(out)
    }
}

fn mat_vec(m: &DMatrix<f64>, v: &[Complex64]) -> Vec<Complex64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| v[j] * m[(i, j)]).sum())
        .collect()
}

fn check_field(field: &FourierField, params: &NonlocalParams, torus: &TorusSpec) -> Result<()> {
    torus.check(params.n())?;
    if field.n != params.n() {
        return Err(Error::DimensionMismatch {
            expected: params.n(),
            got: field.n,
        });
    }
    Ok(())
}

/// `out(k) = M(ν_k) · in(k)`.
pub fn apply_operator(
    field: &FourierField,
    params: &NonlocalParams,
    material: &Material,
    torus: &TorusSpec,
) -> Result<FourierField> {
    check_field(field, params, torus)?;
    let modes: Vec<_> = field.coefficients.iter().collect();
    let out = modes
        .into_par_iter()
        .map(|(k, c)| {
            let nu = frequency_vector(k, torus)?;
            let m = tensor_multiplier(params, material, &nu)?;
            Ok((k.clone(), mat_vec(&m.matrix, c)))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(FourierField {
        n: field.n,
        cutoff: field.cutoff,
        coefficients: out,
    })
}

/// Solves `𝓛 u = rhs` mode by mode in the eigenbasis, with `u(0) = 0`.
pub fn solve_periodic(
    rhs: &FourierField,
    params: &NonlocalParams,
    material: &Material,
    torus: &TorusSpec,
) -> Result<FourierField> {
    check_field(rhs, params, torus)?;
    let scale = rhs
        .coefficients
        .values()
        .flatten()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    let origin = vec![0; rhs.n];
    if let Some(c0) = rhs.get(&origin) {
        let norm = c0.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if norm > 1e-12 * (1.0 + scale) {
            return Err(Error::SingularMode { norm });
        }
    }
    let modes: Vec<_> = rhs.coefficients.iter().filter(|(k, _)| **k != origin).collect();
    let mut out = modes
        .into_par_iter()
        .map(|(k, c)| {
            let nu = frequency_vector(k, torus)?;
            let eig = eigen_decomposition(params, material, &nu)?;
            let mut u = vec![Complex64::new(0.0, 0.0); rhs.n];
            for (j, b) in eig.basis.iter().enumerate() {
                let lambda = eig.eigenvalue(j);
                if lambda.abs() < DEGENERATE_EIGENVALUE {
                    return Err(Error::DegenerateEigenvalue {
                        k: k.clone(),
                        value: lambda,
                    });
                }
                let coord: Complex64 = b.iter().zip(c).map(|(bi, ci)| ci * *bi).sum::<Complex64>() / lambda;
                for (ui, bi) in u.iter_mut().zip(b.iter()) {
                    *ui += coord * *bi;
                }
            }
            Ok((k.clone(), u))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    if rhs.coefficients.contains_key(&origin) {
        out.insert(origin, vec![Complex64::new(0.0, 0.0); rhs.n]);
    }
    Ok(FourierField {
        n: rhs.n,
        cutoff: rhs.cutoff,
        coefficients: out,
    })
}
