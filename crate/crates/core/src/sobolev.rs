//! The improved log-Sobolev inequality `alpha(xi) Ent(X^2) <= <X, K_n X>`
//! with `xi = Ent(X^2) / (n tau(X^2))`.
//!
//! `phi(xi) = 1/2 - sqrt(x (1 - x))` where `x = h^{-1}(ln 2 - xi)`, and
//! `alpha(xi) = phi(xi) / xi`, extended by continuity to `alpha(0) = 1/2`.
//! `alpha` maps `[0, ln 2]` onto `[1/2, 1/(2 ln 2)]`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain_error, Error, Result};
use crate::operator::DenseOperator;
use crate::report::{CheckReport, Verdict};
use crate::semigroup::{dirichlet_form, dirichlet_pairing};
use crate::spectral::{self, eig_hermitian, PSD_CLAMP_REL};

/// Inputs this close outside a function's domain are clamped onto it.
pub const DOMAIN_SLACK: f64 = 1e-12;
/// Iteration count for [`binary_entropy_inverse`].
pub const BISECTION_STEPS: usize = 60;
/// Below this `xi`, `alpha` is evaluated from its Taylor series.
pub const ALPHA_SERIES_CUTOFF: f64 = 1e-8;
/// Default tolerance for inequality checks, relative to `max(1, |rhs|)`.
pub const DEFAULT_TOL: f64 = 1e-9;

fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Binary entropy `h(s) = -s ln s - (1-s) ln(1-s)` in nats.
pub fn binary_entropy(s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(domain_error("s", s, "[0, 1]"));
    }
    Ok(-xlnx(s) - xlnx(1.0 - s))
}

fn clamp_into(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<f64> {
    if value.is_nan() || value < lo - DOMAIN_SLACK || value > hi + DOMAIN_SLACK {
        return Err(domain_error(name, value, format!("[{lo}, {hi}]")));
    }
    Ok(value.clamp(lo, hi))
}

/// Inverse of `h` restricted to `[0, 1/2]`, by bisection.
pub fn binary_entropy_inverse(y: f64) -> Result<f64> {
    let y = clamp_into("y", y, 0.0, LN_2)?;
    if y == 0.0 {
        return Ok(0.0);
    }
    if y == LN_2 {
        return Ok(0.5);
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if -xlnx(mid) - xlnx(1.0 - mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `ln 2 - h(1/2 - d)` for `d in [0, 1/2]`, accurate for small `d`.
fn entropy_deficit(d: f64) -> f64 {
    let two_d = 2.0 * d;
    if two_d < 0.1 {
        // sum_k (2d)^(2k) / (2k (2k - 1))
        let q = two_d * two_d;
        let mut power = q;
        let mut sum = 0.0;
        let mut k = 1.0;
        loop {
            let term = power / (2.0 * k * (2.0 * k - 1.0));
            sum += term;
            if term <= 1e-18 * sum {
                return sum;
            }
            power *= q;
            k += 1.0;
        }
    }
    let minus = if two_d >= 1.0 {
        0.0
    } else {
        (1.0 - two_d) * (-two_d).ln_1p()
    };
    0.5 * ((1.0 + two_d) * two_d.ln_1p() + minus)
}

/// Solves `entropy_deficit(d) = xi` for `d = 1/2 - h^{-1}(ln 2 - xi)`.
///
/// The deficit is increasing and convex in `d` with derivative
/// `2 atanh(2d)`, so Newton steps are taken inside a shrinking bracket and
/// replaced by bisection whenever they leave it.
fn deficit_root(xi: f64) -> f64 {
    if xi <= 0.0 {
        return 0.0;
    }
    if xi >= LN_2 {
        return 0.5;
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    // deficit(d) >= 2 d^2, so sqrt(xi / 2) bounds the root from above.
    let mut d = (xi / 2.0).sqrt().min(0.5 * (1.0 - f64::EPSILON));
    for _ in 0..200 {
        let f = entropy_deficit(d) - xi;
        if f > 0.0 {
            hi = d;
        } else if f < 0.0 {
            lo = d;
        } else {
            return d;
        }
        let slope = 2.0 * (2.0 * d).atanh();
        let newton = d - f / slope;
        let next = if slope.is_finite() && slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - d).abs() <= 2.0 * f64::EPSILON * d || hi - lo <= 2.0 * f64::EPSILON * hi {
            return next;
        }
        d = next;
    }
    d
}

/// `phi(xi) = 1/2 - sqrt(h^{-1}(ln 2 - xi) (1 - h^{-1}(ln 2 - xi)))`.
pub fn phi(xi: f64) -> Result<f64> {
    let xi = clamp_into("xi", xi, 0.0, LN_2)?;
    Ok(phi_unchecked(xi))
}

fn phi_unchecked(xi: f64) -> f64 {
    let d = deficit_root(xi);
    // 1/2 - sqrt(1/4 - d^2), rationalized
    d * d / (0.5 + (0.25 - d * d).max(0.0).sqrt())
}

/// `alpha(xi) = phi(xi) / xi`, with `alpha(0) = 1/2`.
pub fn alpha(xi: f64) -> Result<f64> {
    let xi = clamp_into("xi", xi, 0.0, LN_2)?;
    Ok(alpha_unchecked(xi))
}

/// `alpha` for an argument already known to lie in `[0, ln 2]`.
pub(crate) fn alpha_unchecked(xi: f64) -> f64 {
    if xi < ALPHA_SERIES_CUTOFF {
        0.5 + xi / 12.0 + 11.0 / 180.0 * xi * xi
    } else {
        phi_unchecked(xi) / xi
    }
}

/// Both sides of the improved log-Sobolev inequality for one operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsiReport {
    pub xi: f64,
    pub alpha_xi: f64,
    /// `alpha(xi) Ent(X^2)`
    pub lhs: f64,
    /// `<X, K_n X>`
    pub rhs: f64,
    pub gap: f64,
    /// `Ent(X^2) / 2`, the standard log-Sobolev lower bound.
    pub classical_lhs: f64,
    pub tol: f64,
    pub verdict: Verdict,
}

impl LsiReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_check(&self, name: &str) -> CheckReport {
        CheckReport::inequality(name, self.lhs, self.rhs, self.tol)
    }
}

/// Checks `alpha(xi) Ent(X^2) <= <X, K_n X>` for PSD `X != 0`.
pub fn lsi_check(x: &DenseOperator, tol: f64) -> Result<LsiReport> {
    let spec = eig_hermitian(x)?;
    let ent = spec.entropy_of_power(2.0)?;
    let xi = spectral::xi_from_spectrum(&spec)?;
    let alpha_xi = alpha_unchecked(xi);
    let lhs = alpha_xi * ent;
    let rhs = dirichlet_form(x);
    let check = CheckReport::inequality("lsi", lhs, rhs, tol);
    Ok(LsiReport {
        xi,
        alpha_xi,
        lhs,
        rhs,
        gap: check.gap,
        classical_lhs: 0.5 * ent,
        tol,
        verdict: check.verdict,
    })
}

/// The modified log-Sobolev inequality and the Stroock-Varopoulos step it
/// rests on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModifiedLsiReport {
    /// `4 alpha(xi) Ent(X^2) <= <ln X^2, K_n X^2>`
    pub modified: CheckReport,
    /// `<X, K_n X> <= <ln X^2, K_n X^2> / 4`
    pub stroock_varopoulos: CheckReport,
}

impl ModifiedLsiReport {
    pub fn passed(&self) -> bool {
        self.modified.passed() && self.stroock_varopoulos.passed()
    }
}

/// Checks the modified log-Sobolev inequality for positive definite `X`.
pub fn modified_lsi_check(x: &DenseOperator, tol: f64) -> Result<ModifiedLsiReport> {
    let spec = eig_hermitian(x)?;
    let ev = spec.psd_eigenvalues()?;
    let largest = ev.last().copied().unwrap_or(0.0);
    if largest == 0.0 {
        return Err(Error::ZeroOperator);
    }
    let smallest = spec.eigenvalues()[0];
    if smallest <= PSD_CLAMP_REL * largest {
        return Err(Error::Singular {
            min_eigenvalue: smallest,
        });
    }
    let ent = spec.entropy_of_power(2.0)?;
    let xi = spectral::xi_from_spectrum(&spec)?;
    let square = spec.map(|l| l * l);
    let log_square = spec.map(|l| 2.0 * l.ln());
    let energy = dirichlet_pairing(&log_square, &square)?.re;
    let modified =
        CheckReport::inequality("modified_lsi", 4.0 * alpha_unchecked(xi) * ent, energy, tol);
    let stroock_varopoulos = CheckReport::inequality(
        "stroock_varopoulos_log",
        dirichlet_form(x),
        0.25 * energy,
        tol,
    );
    Ok(ModifiedLsiReport {
        modified,
        stroock_varopoulos,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: h^{-1} by bisection on h itself, then the
    /// composed formula for phi.
    fn phi_oracle(xi: f64) -> f64 {
        let target = LN_2 - xi;
        let (mut lo, mut hi) = (0.0f64, 0.5f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let h = -mid * mid.ln() - (1.0 - mid) * (1.0 - mid).ln();
            if h < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = 0.5 * (lo + hi);
        0.5 - (x * (1.0 - x)).sqrt()
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - LN_2).abs() < 1e-16);
        let s: f64 = 0.11;
        let direct = -s * s.ln() - (1.0 - s) * (1.0 - s).ln();
        assert_eq!(binary_entropy(0.11).unwrap(), direct);
        assert!((binary_entropy(0.3).unwrap() - binary_entropy(0.7).unwrap()).abs() < 1e-16);
        assert!(binary_entropy(1.2).is_err());
        assert!(binary_entropy(-0.1).is_err());
    }

    #[test]
    fn binary_entropy_inverse_values() {
        assert_eq!(binary_entropy_inverse(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy_inverse(LN_2).unwrap(), 0.5);
        let x = binary_entropy_inverse(0.5).unwrap();
        assert!((binary_entropy(x).unwrap() - 0.5).abs() <= 1e-13);
        assert!((0.0..=0.5).contains(&x));
        assert_eq!(binary_entropy_inverse(LN_2 + 1e-13).unwrap(), 0.5);
        assert!(binary_entropy_inverse(-1e-6).is_err());
        assert!(binary_entropy_inverse(0.7).is_err());
    }

    #[test]
    fn inverse_round_trips_across_range() {
        for i in 0..=2000 {
            let y = LN_2 * i as f64 / 2000.0;
            let x = binary_entropy_inverse(y).unwrap();
            assert!((binary_entropy(x).unwrap() - y).abs() <= 1e-12, "y={y}");
        }
    }

    #[test]
    fn phi_boundary_and_oracle() {
        assert_eq!(phi(0.0).unwrap(), 0.0);
        assert!((phi(LN_2).unwrap() - 0.5).abs() < 1e-15);
        for xi in [1e-3, 0.05, 0.3, 0.5, 0.69] {
            let (a, b) = (phi(xi).unwrap(), phi_oracle(xi));
            assert!((a - b).abs() < 1e-12, "xi={xi}: {a} vs {b}");
        }
        assert!(phi(0.8).is_err());
    }

    #[test]
    fn alpha_endpoints_and_oracle() {
        assert_eq!(alpha(0.0).unwrap(), 0.5);
        let top = 1.0 / (2.0 * LN_2);
        assert!((alpha(LN_2).unwrap() - top).abs() < 1e-15);
        assert!((top - 0.7213475).abs() < 1e-7);
        assert!((alpha(0.3).unwrap() - phi_oracle(0.3) / 0.3).abs() < 1e-12);
        // high-precision reference value
        assert!((alpha(0.3).unwrap() - 0.532_643_351_290_162_4).abs() < 1e-14);
        assert!(alpha(-0.01).is_err());
    }

    #[test]
    fn alpha_series_joins_direct_evaluation() {
        // phi(xi)/xi -> 1/2; the series and the direct path agree near the cutoff
        for xi in [2e-8, 1e-7, 1e-6, 1e-5] {
            let direct = phi(xi).unwrap() / xi;
            let series = 0.5 + xi / 12.0 + 11.0 / 180.0 * xi * xi;
            assert!((direct - series).abs() < 1e-9, "xi={xi}");
        }
        assert!((alpha(1e-4).unwrap() - 0.500_008_333_944_499_3).abs() < 1e-13);
    }

    #[test]
    fn alpha_is_at_least_half_and_monotone() {
        let grid = 10_000;
        let mut prev = 0.5;
        for i in 0..=grid {
            let xi = LN_2 * i as f64 / grid as f64;
            let a = alpha(xi).unwrap();
            assert!(a >= 0.5);
            assert!(a >= prev - 1e-12, "xi={xi}");
            prev = a;
        }
    }

    #[test]
    fn phi_second_differences_nonnegative() {
        let step = 1e-3;
        let count = (LN_2 / step) as usize;
        let vals: Vec<f64> = (0..=count).map(|i| phi(i as f64 * step).unwrap()).collect();
        for w in vals.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-9);
        }
    }

    #[test]
    fn lsi_single_qubit_equality() {
        for r in [0.0, 0.1, 0.4, 0.8, 0.99, 1.0] {
            let x = DenseOperator::from_diagonal(1, &[(1.0f64 + r).sqrt(), (1.0f64 - r).sqrt()])
                .unwrap();
            let rep = lsi_check(&x, DEFAULT_TOL).unwrap();
            let expected = 0.5 * (1.0 - (1.0 - r * r).sqrt());
            assert!((rep.lhs - expected).abs() < 1e-10, "r={r}");
            assert!((rep.rhs - expected).abs() < 1e-10, "r={r}");
            assert!(rep.passed());
        }
    }

    #[test]
    fn lsi_rejects_non_psd_and_zero() {
        let x = DenseOperator::from_diagonal(1, &[1.0, -0.5]).unwrap();
        assert!(matches!(
            lsi_check(&x, 1e-9),
            Err(Error::NotPositive { .. })
        ));
        let z = DenseOperator::zeros(2).unwrap();
        assert!(matches!(lsi_check(&z, 1e-9), Err(Error::ZeroOperator)));
    }

    #[test]
    fn modified_lsi_two_by_two_closed_form() {
        let x = DenseOperator::from_diagonal(1, &[1.1, 0.9]).unwrap();
        let rep = modified_lsi_check(&x, DEFAULT_TOL).unwrap();
        let (a, b) = (1.21f64, 0.81f64);
        let tau2 = (a + b) / 2.0;
        let ent = (a * a.ln() + b * b.ln()) / 2.0 - tau2 * tau2.ln();
        let energy = 0.1 * (a / b).ln();
        let xi = ent / tau2;
        let expected_lhs = 4.0 * phi_oracle(xi) / xi * ent;
        assert!((rep.modified.rhs - energy).abs() < 1e-14);
        assert!((rep.modified.lhs - expected_lhs).abs() < 1e-12);
        // tau(X^2) - tau(X)^2 = 0.01
        assert!((rep.stroock_varopoulos.lhs - 0.01).abs() < 1e-15);
        assert!(rep.passed());
    }

    #[test]
    fn modified_lsi_identity_and_singular() {
        let rep = modified_lsi_check(&DenseOperator::identity(2).unwrap(), DEFAULT_TOL).unwrap();
        assert_eq!(rep.modified.lhs, 0.0);
        assert!(rep.modified.rhs.abs() < 1e-15);
        assert!(rep.passed());
        let p = DenseOperator::from_diagonal(1, &[1.0, 0.0]).unwrap();
        assert!(matches!(
            modified_lsi_check(&p, DEFAULT_TOL),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn modified_lsi_product_state() {
        let rho = DenseOperator::from_diagonal(1, &[0.7, 0.3]).unwrap();
        let x = rho.tensor_power(2).unwrap();
        assert!(modified_lsi_check(&x, DEFAULT_TOL).unwrap().passed());
    }
}
