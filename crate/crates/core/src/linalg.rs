//! Dense real symmetric matrices, a cyclic Jacobi eigensolver, and the
//! definiteness tests built on it.
//!
//! Every Gram matrix and distance matrix in the crate ends up here. The
//! verdicts use a relative slack: a spectrum passes a sign test at tolerance
//! `tol` when its eigenvalues clear `tol * max(1, |lambda|_max)`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Default relative slack for definiteness verdicts.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Input asymmetry below this is averaged away; above it construction fails.
pub const SYMMETRY_SLACK: f64 = 1e-12;

const MAX_SWEEPS: usize = 60;
const OFF_DIAGONAL_RTOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
    #[serde(skip)]
    max_asymmetry: f64,
}

impl SymMatrix {
    /// Builds a matrix from rows, averaging `a[i][j]` and `a[j][i]`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::NotSquare {
                    row: i,
                    len: row.len(),
                    expected: n,
                });
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
        let mut data = vec![0.0; n * n];
        let mut max_asymmetry: f64 = 0.0;
        for i in 0..n {
            data[i * n + i] = rows[i][i];
            for j in (i + 1)..n {
                let (a, b) = (rows[i][j], rows[j][i]);
                max_asymmetry = max_asymmetry.max((a - b).abs());
                let avg = if a == b { a } else { 0.5 * (a + b) };
                data[i * n + j] = avg;
                data[j * n + i] = avg;
            }
        }
        if max_asymmetry > SYMMETRY_SLACK {
            return Err(Error::Asymmetric {
                asymmetry: max_asymmetry,
            });
        }
        Ok(Self {
            n,
            data,
            max_asymmetry,
        })
    }

    /// Evaluates `f` on the upper triangle (including the diagonal) and
    /// mirrors it. Each entry is computed independently of the others.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Ok(Self {
            n,
            data,
            max_asymmetry: 0.0,
        })
    }

    pub fn try_from_upper_fn(
        n: usize,
        mut f: impl FnMut(usize, usize) -> Result<f64>,
    ) -> Result<Self> {
        let mut first_err = None;
        let m = Self::from_upper_fn(n, |i, j| match f(i, j) {
            Ok(v) => v,
            Err(e) => {
                first_err.get_or_insert(e);
                0.0
            }
        });
        match first_err {
            Some(e) => Err(e),
            None => m,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self {
            n,
            data,
            max_asymmetry: 0.0,
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
            max_asymmetry: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Largest `|a_ij - a_ji|` seen by [`SymMatrix::from_rows`].
    pub fn max_asymmetry(&self) -> f64 {
        self.max_asymmetry
    }

    /// Applies `f` to every entry.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&v| f(v)).collect(),
            max_asymmetry: self.max_asymmetry,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.map(|v| v * factor)
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `c^T A c`.
    pub fn quadratic_form(&self, c: &[f64]) -> f64 {
        self.mul_vec(c).iter().zip(c).map(|(a, b)| a * b).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// `Q^T A Q` for a matrix `Q` given as a list of columns.
    fn congruence(&self, columns: &[Vec<f64>]) -> Result<SymMatrix> {
        let aq: Vec<Vec<f64>> = columns.iter().map(|q| self.mul_vec(q)).collect();
        SymMatrix::from_upper_fn(columns.len(), |i, j| {
            columns[i].iter().zip(&aq[j]).map(|(a, b)| a * b).sum()
        })
    }
}

/// Eigenvalues in ascending order with aligned orthonormal eigenvectors.
#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    /// Max `||A v - lambda v||` over the computed pairs.
    pub residual: f64,
    pub sweeps: usize,
}

impl Spectrum {
    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.min().abs().max(self.max().abs())
    }

    /// Absolute threshold `tol * max(1, |lambda|_max)`.
    pub fn threshold(&self, tol: f64) -> f64 {
        tol * self.spectral_radius().max(1.0)
    }
}

/// Full symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps stop once the off-diagonal Frobenius norm drops to
/// `1e-14 * ||A||_F`; the budget is 60 sweeps.
pub fn eigvalsh(m: &SymMatrix) -> Result<Spectrum> {
    jacobi(m, MAX_SWEEPS)
}

fn jacobi(m: &SymMatrix, max_sweeps: usize) -> Result<Spectrum> {
    let n = m.n;
    let mut a = m.data.clone();
    let mut v = SymMatrix::identity(n).data;
    let norm = m.frobenius_norm();
    let target = OFF_DIAGONAL_RTOL * norm;

    let off_norm = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    let mut off = off_norm(&a);
    while off > target {
        if sweeps == max_sweeps {
            let spectrum = assemble(m, &a, &v, sweeps);
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
                residual: spectrum.residual,
            });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if theta.is_finite() {
                    theta.signum() / (theta.abs() + theta.hypot(1.0))
                } else {
                    0.0
                };
                if t == 0.0 {
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;
                    continue;
                }
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
        off = off_norm(&a);
    }
    Ok(assemble(m, &a, &v, sweeps))
}

fn assemble(m: &SymMatrix, a: &[f64], v: &[f64], sweeps: usize) -> Spectrum {
    let n = m.n;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]).then(i.cmp(&j)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let eigenvectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&col| (0..n).map(|k| v[k * n + col]).collect())
        .collect();
    let residual = eigenvalues
        .iter()
        .zip(&eigenvectors)
        .map(|(&lambda, vec)| {
            m.mul_vec(vec)
                .iter()
                .zip(vec)
                .map(|(av, x)| (av - lambda * x).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max);
    Spectrum {
        eigenvalues,
        eigenvectors,
        residual,
        sweeps,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PsdVerdict {
    pub psd: bool,
    pub min_eigenvalue: f64,
    /// Absolute slack the minimum eigenvalue was compared against.
    pub threshold: f64,
    /// Eigenvector of the minimum eigenvalue; `c^T A c` equals it.
    pub min_eigenvector: Vec<f64>,
}

/// PSD iff `lambda_min >= -tol * max(1, |lambda|_max)`.
pub fn is_psd(m: &SymMatrix, tol: f64) -> Result<PsdVerdict> {
    let spectrum = eigvalsh(m)?;
    Ok(psd_from_spectrum(&spectrum, tol))
}

pub fn psd_from_spectrum(spectrum: &Spectrum, tol: f64) -> PsdVerdict {
    let threshold = spectrum.threshold(tol);
    let min_eigenvalue = spectrum.min();
    PsdVerdict {
        psd: min_eigenvalue >= -threshold,
        min_eigenvalue,
        threshold,
        min_eigenvector: spectrum.eigenvectors[0].clone(),
    }
}

/// Orthonormal basis of `{c : sum c_i = 0}` in R^n, returned as `n - 1`
/// columns. Column `k` (1-based) is `(1, ..., 1, -k, 0, ..., 0) / sqrt(k(k+1))`.
pub fn helmert_basis(n: usize) -> Vec<Vec<f64>> {
    (1..n)
        .map(|k| {
            let scale = 1.0 / ((k * (k + 1)) as f64).sqrt();
            (0..n)
                .map(|i| match i.cmp(&k) {
                    std::cmp::Ordering::Less => scale,
                    std::cmp::Ordering::Equal => -(k as f64) * scale,
                    std::cmp::Ordering::Greater => 0.0,
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CndVerdict {
    pub cnd: bool,
    /// Largest value of `c^T A c` over unit sum-zero `c` (0 when n = 1).
    pub max_form: f64,
    pub threshold: f64,
    /// Unit sum-zero vector attaining `max_form`; present when `cnd` is false.
    pub witness: Option<Vec<f64>>,
}

/// Conditional negative definiteness: `c^T A c <= 0` for every `c` with
/// zero coordinate sum, decided as PSD-ness of `-Q^T A Q` for the Helmert
/// basis `Q`.
pub fn is_cnd(m: &SymMatrix, tol: f64) -> Result<CndVerdict> {
    let n = m.n;
    if n == 1 {
        return Ok(CndVerdict {
            cnd: true,
            max_form: 0.0,
            threshold: 0.0,
            witness: None,
        });
    }
    let q = helmert_basis(n);
    let restricted = m.congruence(&q)?.scaled(-1.0);
    let spectrum = eigvalsh(&restricted)?;
    let verdict = psd_from_spectrum(&spectrum, tol);
    let witness = (!verdict.psd).then(|| {
        let coeffs = &verdict.min_eigenvector;
        (0..n)
            .map(|i| q.iter().zip(coeffs).map(|(col, c)| col[i] * c).sum())
            .collect()
    });
    Ok(CndVerdict {
        cnd: verdict.psd,
        max_form: -verdict.min_eigenvalue,
        threshold: verdict.threshold,
        witness,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NegativeTypeCheck {
    pub positive_count: usize,
    /// Exactly one positive eigenvalue. Necessary for negative type, not sufficient.
    pub passes: bool,
    pub threshold: f64,
    pub eigenvalues: Vec<f64>,
}

pub fn negative_type_necessary(m: &SymMatrix, tol: f64) -> Result<NegativeTypeCheck> {
    let spectrum = eigvalsh(m)?;
    let threshold = spectrum.threshold(tol);
    let positive_count = spectrum
        .eigenvalues
        .iter()
        .filter(|&&l| l > threshold)
        .count();
    Ok(NegativeTypeCheck {
        positive_count,
        passes: positive_count == 1,
        threshold,
        eigenvalues: spectrum.eigenvalues,
    })
}
