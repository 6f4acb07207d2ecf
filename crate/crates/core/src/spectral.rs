//! Hermitian eigendecomposition, spectral matrix functions, Schatten norms
//! and the entropy functional `Ent(X) = tau(X ln X) - tau(X) ln tau(X)`.
//!
//! Norms use the normalized trace, so `||I||_p = 1` for every `p`, except
//! `p = inf`, which is the plain largest singular value.

use std::f64::consts::LN_2;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{domain_error, Error, Result};
use crate::operator::{DenseOperator, C64, HERMITIAN_TOL};

/// Eigenvalues in `[-PSD_CLAMP_REL * lambda_max, 0)` are treated as 0.
pub const PSD_CLAMP_REL: f64 = 1e-10;
/// How far `xi` may leave `[0, ln 2]` through roundoff before it is an error.
pub const XI_CLAMP: f64 = 1e-10;

/// Eigenvalues (ascending) and orthonormal eigenvectors (columns).
#[derive(Debug, Clone)]
pub struct Spectrum {
    n: usize,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<C64>,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.eigenvectors
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max)
    }

    /// `V diag(f(lambda)) V^dagger`, made exactly Hermitian.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseOperator {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let fl = f(l);
            scaled.column_mut(j).scale_mut(fl);
        }
        let m = &scaled * v.adjoint();
        DenseOperator::from_parts(self.n, m, None).hermitian_part()
    }

    /// Eigenvalues after the PSD clamping rule.
    pub fn psd_eigenvalues(&self) -> Result<Vec<f64>> {
        let scale = self.max_abs_eigenvalue();
        let floor = -PSD_CLAMP_REL * scale;
        let min = self.eigenvalues.first().copied().unwrap_or(0.0);
        if min < floor {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(self.eigenvalues.iter().map(|&l| l.max(0.0)).collect())
    }

    /// `tau(X^p)` for PSD `X`.
    pub fn trace_power(&self, p: f64) -> Result<f64> {
        let ev = self.psd_eigenvalues()?;
        Ok(mean(ev.iter().map(|&l| pow0(l, p))))
    }

    /// `Ent(X^p)` for PSD `X`, computed from the eigenvalues of `X`.
    pub fn entropy_of_power(&self, p: f64) -> Result<f64> {
        let ev = self.psd_eigenvalues()?;
        entropy_of_values(ev.iter().map(|&l| pow0(l, p)))
    }

    /// `Ent(X^2)` for any Hermitian `X` (no positivity needed).
    pub fn entropy_of_square(&self) -> Result<f64> {
        entropy_of_values(self.eigenvalues.iter().map(|&l| l * l))
    }

    /// `tau(X^2)` for any Hermitian `X`.
    pub fn trace_square(&self) -> f64 {
        mean(self.eigenvalues.iter().map(|&l| l * l))
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut count = 0usize;
    let mut sum = 0.0;
    for v in values {
        sum += v;
        count += 1;
    }
    sum / count as f64
}

/// `x^p` with `0^p = 0` for `p > 0`.
fn pow0(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.powf(p)
    }
}

/// `mean(m ln m) - mean(m) ln mean(m)` over nonnegative values, with
/// `0 ln 0 = 0`. Evaluated as `mean(m ln(m / mean))` to avoid cancellation.
pub(crate) fn entropy_of_values(values: impl Iterator<Item = f64> + Clone) -> Result<f64> {
    let avg = mean(values.clone());
    if avg <= 0.0 {
        return Err(Error::ZeroOperator);
    }
    let ent = mean(values.map(|m| if m > 0.0 { m * (m / avg).ln() } else { 0.0 }));
    Ok(ent.max(0.0))
}

fn is_diagonal(m: &DMatrix<C64>) -> bool {
    let d = m.nrows();
    (0..d).all(|c| (0..d).all(|r| r == c || m[(r, c)] == C64::new(0.0, 0.0)))
}

/// Full spectrum of a Hermitian operator.
pub fn eig_hermitian(x: &DenseOperator) -> Result<Spectrum> {
    if x.hermitian_hint() == Some(false) {
        return Err(Error::NotHermitian {
            deviation: x.hermitian_deviation(),
        });
    }
    let dev = x.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let dim = x.dim();
    let m = x.matrix();

    if is_diagonal(m) {
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| m[(a, a)].re.total_cmp(&m[(b, b)].re));
        let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
        let mut eigenvectors = DMatrix::zeros(dim, dim);
        for (col, &i) in order.iter().enumerate() {
            eigenvectors[(i, col)] = C64::new(1.0, 0.0);
        }
        return Ok(Spectrum {
            n: x.n(),
            eigenvalues,
            eigenvectors,
        });
    }

    let sym = x.hermitian_part().into_matrix();
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 1000 * dim).ok_or(Error::NoConvergence)?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = DMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Spectrum {
        n: x.n(),
        eigenvalues,
        eigenvectors,
    })
}

/// Singular values, descending order not guaranteed.
pub fn singular_values(x: &DenseOperator) -> Vec<f64> {
    if x.hermitian_hint() == Some(true)
        || (x.hermitian_hint().is_none() && x.hermitian_deviation() <= HERMITIAN_TOL)
    {
        if let Ok(spec) = eig_hermitian(x) {
            return spec.eigenvalues.iter().map(|l| l.abs()).collect();
        }
    }
    x.matrix()
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect()
}

/// `|X| = sqrt(X^dagger X)`, via the SVD `X = U S V^dagger` as `V S V^dagger`.
pub fn abs_operator(x: &DenseOperator) -> DenseOperator {
    if x.hermitian_hint() != Some(false) && x.hermitian_deviation() <= HERMITIAN_TOL {
        if let Ok(spec) = eig_hermitian(x) {
            return spec.map(f64::abs);
        }
    }
    let svd = x.matrix().clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^dagger");
    let mut scaled = v_t.adjoint();
    for (j, &s) in svd.singular_values.iter().enumerate() {
        scaled.column_mut(j).scale_mut(s);
    }
    let m = &scaled * &v_t;
    DenseOperator::from_parts(x.n(), m, None).hermitian_part()
}

/// Schatten norm from singular values: `(2^-n sum sigma^p)^(1/p)`, or
/// `max sigma` for `p = inf`.
pub fn schatten_from_singular(singular: &[f64], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(domain_error("p", p, "[1, inf]"));
    }
    let largest = singular.iter().cloned().fold(0.0, f64::max);
    if p.is_infinite() || largest == 0.0 {
        return Ok(largest);
    }
    let inner = mean(singular.iter().map(|&s| (s / largest).powf(p)));
    Ok(largest * inner.powf(1.0 / p))
}

/// `||X||_p = tau(|X|^p)^(1/p)` for `p >= 1`; `p = f64::INFINITY` gives the
/// largest singular value.
pub fn schatten_norm(x: &DenseOperator, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(domain_error("p", p, "[1, inf]"));
    }
    schatten_from_singular(&singular_values(x), p)
}

/// `Ent(X)` for PSD `X`.
pub fn entropy(x: &DenseOperator) -> Result<f64> {
    eig_hermitian(x)?.entropy_of_power(1.0)
}

/// `xi = Ent(X^2) / (n tau(X^2))`, which lies in `[0, ln 2]`.
pub fn xi(x: &DenseOperator) -> Result<f64> {
    xi_from_spectrum(&eig_hermitian(x)?)
}

pub fn xi_from_spectrum(spec: &Spectrum) -> Result<f64> {
    let ent = spec.entropy_of_power(2.0)?;
    let tau2 = spec.trace_power(2.0)?;
    clamp_xi(ent / (spec.n() as f64 * tau2))
}

pub(crate) fn clamp_xi(value: f64) -> Result<f64> {
    if value < -XI_CLAMP || value > LN_2 + XI_CLAMP || value.is_nan() {
        return Err(domain_error("xi", value, "[0, ln 2]"));
    }
    Ok(value.clamp(0.0, LN_2))
}

/// `X^p` for PSD `X`.
pub fn psd_power(x: &DenseOperator, p: f64) -> Result<DenseOperator> {
    let spec = eig_hermitian(x)?;
    spec.psd_eigenvalues()?;
    Ok(spec.map(|l| pow0(l.max(0.0), p)))
}
