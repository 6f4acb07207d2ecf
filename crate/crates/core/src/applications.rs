//! Consequences of the improved log-Sobolev inequality: a Faber-Krahn type
//! bound on the Dirichlet-form ratio of low-rank operators, and a degree
//! versus rank bound (quantum Schwartz-Zippel).
//!
//! Ranks `R` are mapped to `r1 = h^{-1}(ln(R) / n)` for every integer
//! `1 <= R <= 2^n`, which reproduces the `R = e^{n h(r1)}` parametrization
//! whenever that form is exact. `R = 1` is the `r1 -> 0` limit, where the
//! degree bound equals `1/2`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain_error, Error, Result};
use crate::operator::{
    check_qubits, inverse_pauli_transform, numerical_rank, pauli_transform, singular_rank,
    DenseOperator,
};
use crate::report::{CheckReport, Verdict};
use crate::semigroup::dirichlet_form;
use crate::sobolev::{binary_entropy, binary_entropy_inverse};
use crate::spectral::eig_hermitian;

fn check_rank(rank: usize, n: usize) -> Result<()> {
    check_qubits(n)?;
    if rank == 0 || rank > 1usize << n {
        return Err(domain_error("R", rank as f64, format!("[1, 2^{n}]")));
    }
    Ok(())
}

/// `r1 = h^{-1}(ln(R) / n)`.
pub fn rank_parameter(rank: usize, n: usize) -> Result<f64> {
    check_rank(rank, n)?;
    binary_entropy_inverse((rank as f64).ln() / n as f64)
}

/// Lower bound on `<X, K_n X> / (n tau(X^2))` for PSD `X` of rank `R`.
pub fn faber_krahn_bound(rank: usize, n: usize) -> Result<f64> {
    let r = rank_parameter(rank, n)?;
    Ok(0.5 - (r * (1.0 - r)).sqrt())
}

/// Checks `faber_krahn_bound(rank X, n) <= <X, K_n X> / (n tau(X^2))`.
pub fn faber_krahn_check(x: &DenseOperator, tol: f64) -> Result<CheckReport> {
    let spec = eig_hermitian(x)?;
    spec.psd_eigenvalues()?;
    let tau2 = spec.trace_power(2.0)?;
    if tau2 == 0.0 {
        return Err(Error::ZeroOperator);
    }
    let rank = numerical_rank(x, None)?;
    let bound = faber_krahn_bound(rank, x.n())?;
    let ratio = dirichlet_form(x) / (x.n() as f64 * tau2);
    Ok(CheckReport::inequality("faber_krahn", bound, ratio, tol)
        .with_instance(None, format!("n={};rank={rank}", x.n())))
}

/// `Pi_k`: keeps the Pauli components of weight at most `k`.
pub fn low_pass(x: &DenseOperator, k: usize) -> Result<DenseOperator> {
    if k > x.n() {
        return Err(domain_error("k", k as f64, format!("[0, {}]", x.n())));
    }
    let c = pauli_transform(x).scale_by_weight(|w| if w as usize <= k { 1.0 } else { 0.0 });
    let out = inverse_pauli_transform(&c);
    Ok(if x.hermitian_hint() == Some(true) {
        out.hermitian_part()
    } else {
        out
    })
}

/// `1/2 - sqrt(r1 (1 - r1))` for `0 < r1 <= 1/2`.
pub fn sz_bound(r1: f64) -> Result<f64> {
    if !(r1 > 0.0 && r1 <= 0.5) {
        return Err(domain_error("r1", r1, "(0, 1/2]"));
    }
    Ok(0.5 - (r1 * (1.0 - r1)).sqrt())
}

/// The earlier degree bound `(ln 2 - h(r1)) / 2`, as quoted for comparison.
pub fn mo10_bound(r1: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&r1) {
        return Err(domain_error("r1", r1, "[0, 1/2]"));
    }
    Ok(0.5 * (LN_2 - binary_entropy(r1)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeRankReport {
    pub n: usize,
    pub rank: usize,
    pub r1: f64,
    pub degree: usize,
    /// Fourier coefficients at or below this magnitude count as zero.
    pub degree_threshold: f64,
    pub new_bound: f64,
    pub mo10_bound: f64,
    pub tol: f64,
    pub new_verdict: Verdict,
    pub mo10_verdict: Verdict,
}

impl DegreeRankReport {
    pub fn passed(&self) -> bool {
        self.new_verdict == Verdict::Pass
    }

    pub fn degree_ratio(&self) -> f64 {
        self.degree as f64 / self.n as f64
    }

    pub fn to_check(&self) -> CheckReport {
        CheckReport::inequality(
            "schwartz_zippel",
            self.new_bound,
            self.degree_ratio(),
            self.tol,
        )
        .with_instance(
            None,
            format!("n={};rank={};degree={}", self.n, self.rank, self.degree),
        )
    }
}

fn verdict(ratio: f64, bound: f64, tol: f64) -> Verdict {
    if ratio >= bound - tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Checks `deg(X) / n >= 1/2 - sqrt(r1 (1 - r1))` for `X != 0`.
pub fn sz_check(x: &DenseOperator, tol: f64) -> Result<DegreeRankReport> {
    if x.is_zero() {
        return Err(Error::ZeroOperator);
    }
    let n = x.n();
    let rank = singular_rank(x);
    let r1 = rank_parameter(rank, n)?;
    let coeffs = pauli_transform(x);
    let degree_threshold = coeffs.default_threshold();
    let degree = coeffs.degree(degree_threshold);
    let new_bound = if r1 == 0.0 { 0.5 } else { sz_bound(r1)? };
    let mo10 = mo10_bound(r1)?;
    let ratio = degree as f64 / n as f64;
    Ok(DegreeRankReport {
        n,
        rank,
        r1,
        degree,
        degree_threshold,
        new_bound,
        mo10_bound: mo10,
        tol,
        new_verdict: verdict(ratio, new_bound, tol),
        mo10_verdict: verdict(ratio, mo10, tol),
    })
}

/// Faber-Krahn data for the diagonal projector onto a Hamming ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HammingBallRow {
    pub n: usize,
    pub radius: usize,
    pub rank: usize,
    pub bound: f64,
    pub ratio: f64,
    pub gap: f64,
}

/// Projector onto computational basis states of Hamming weight `<= radius`.
pub fn hamming_ball(n: usize, radius: usize) -> Result<DenseOperator> {
    check_qubits(n)?;
    let diag: Vec<f64> = (0..1usize << n)
        .map(|i| {
            if i.count_ones() as usize <= radius {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    DenseOperator::from_diagonal(n, &diag)
}

/// Bound and Dirichlet-form ratio for the Hamming-ball projector. The gap
/// is reported, not asserted to shrink: tightness holds only as `n -> inf`.
pub fn hamming_ball_trend(n: usize, radius: usize) -> Result<HammingBallRow> {
    let x = hamming_ball(n, radius)?;
    let check = faber_krahn_check(&x, 0.0)?;
    let rank = (0..1usize << n)
        .filter(|i| i.count_ones() as usize <= radius)
        .count();
    Ok(HammingBallRow {
        n,
        radius,
        rank,
        bound: check.lhs,
        ratio: check.rhs,
        gap: check.gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{hs_inner, pauli_matrix, MultiIndex};
    use crate::testutil::{random_hermitian, random_square};

    #[test]
    fn faber_krahn_bound_endpoints() {
        for n in 1..=4 {
            assert!(faber_krahn_bound(1 << n, n).unwrap().abs() < 1e-15);
            assert_eq!(faber_krahn_bound(1, n).unwrap(), 0.5);
        }
        assert!(faber_krahn_bound(0, 2).is_err());
        assert!(faber_krahn_bound(5, 2).is_err());
    }

    #[test]
    fn faber_krahn_bound_oracle() {
        // r = h^{-1}(ln(2)/4) by bisection on h directly
        let target = 2f64.ln() / 4.0;
        let (mut lo, mut hi) = (0.0f64, 0.5f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let h = -mid * mid.ln() - (1.0 - mid) * (1.0 - mid).ln();
            if h < target {
                lo = mid
            } else {
                hi = mid
            }
        }
        let r = 0.5 * (lo + hi);
        let expected = 0.5 - (r * (1.0 - r)).sqrt();
        assert!((faber_krahn_bound(2, 4).unwrap() - expected).abs() < 1e-13);
    }

    #[test]
    fn faber_krahn_identity_and_pure_state() {
        let rep = faber_krahn_check(&DenseOperator::identity(3).unwrap(), 1e-9).unwrap();
        assert!(rep.lhs.abs() < 1e-15 && rep.rhs.abs() < 1e-15 && rep.passed());
        let mut diag = vec![0.0; 8];
        diag[0] = 1.0;
        let p = DenseOperator::from_diagonal(3, &diag).unwrap();
        let rep = faber_krahn_check(&p, 1e-9).unwrap();
        assert_eq!(rep.lhs, 0.5);
        // dense oracle: <P, K P> = tau(P K P) through the generator sum
        let dense = crate::semigroup::dirichlet_form_dense(&p);
        assert!((rep.rhs - dense / (3.0 * 0.125)).abs() < 1e-14);
        assert!(rep.passed());
    }

    #[test]
    fn low_pass_cases() {
        let x = random_square(3, 5);
        assert!((low_pass(&x, 3).unwrap().matrix() - x.matrix()).norm() < 1e-13);
        let tau = crate::operator::normalized_trace(&x);
        let c0 = low_pass(&x, 0).unwrap();
        let id = DenseOperator::identity(3).unwrap();
        assert!((c0.matrix() - id.matrix() * tau).norm() < 1e-13);
        assert!(low_pass(&x, 4).is_err());
        // naive filter: sum over weight <= 1 strings of <sigma_s, X> sigma_s
        let mut naive = nalgebra::DMatrix::zeros(8, 8);
        for i in 0..64 {
            let s = MultiIndex::from_linear(3, i);
            if s.weight() <= 1 {
                let p = pauli_matrix(&s);
                naive += p.matrix() * hs_inner(&p, &x).unwrap();
            }
        }
        assert!((low_pass(&x, 1).unwrap().matrix() - naive).norm() < 1e-13);
    }

    #[test]
    fn low_pass_is_an_orthogonal_projection() {
        let x = random_square(2, 1);
        let y = random_square(2, 2);
        for k in 0..=2 {
            let px = low_pass(&x, k).unwrap();
            let ppx = low_pass(&px, k).unwrap();
            assert!((ppx.matrix() - px.matrix()).norm() < 1e-14);
            let a = hs_inner(&y, &px).unwrap();
            let b = hs_inner(&low_pass(&y, k).unwrap(), &x).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn low_pass_dominated_by_noise() {
        for seed in 0..5 {
            let x = random_hermitian(3, seed);
            for k in 0..=3 {
                for t in [0.05, 0.3, 1.0] {
                    let lhs = hs_inner(&x, &low_pass(&x, k).unwrap()).unwrap().re;
                    let noisy = crate::semigroup::depolarize(&x, t).unwrap();
                    let rhs = (t * k as f64).exp() * hs_inner(&x, &noisy).unwrap().re;
                    assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn sz_bound_values() {
        assert_eq!(sz_bound(0.5).unwrap(), 0.0);
        assert!((sz_bound(1e-15).unwrap() - 0.5).abs() < 1e-7);
        assert!((sz_bound(0.25).unwrap() - (0.5 - 3f64.sqrt() / 4.0)).abs() < 1e-16);
        assert!(sz_bound(0.0).is_err());
        assert!(sz_bound(0.6).is_err());
    }

    #[test]
    fn sz_check_pure_state_and_identity() {
        let p = DenseOperator::from_diagonal(2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let rep = sz_check(&p, 1e-9).unwrap();
        assert_eq!((rep.rank, rep.degree), (1, 2));
        assert_eq!(rep.new_bound, 0.5);
        assert!(rep.passed());
        let rep = sz_check(&DenseOperator::identity(3).unwrap(), 1e-9).unwrap();
        assert_eq!((rep.rank, rep.degree), (8, 0));
        assert!(rep.new_bound.abs() < 1e-15);
        assert!(rep.passed());
        assert!(sz_check(&DenseOperator::zeros(2).unwrap(), 1e-9).is_err());
    }

    #[test]
    fn hamming_ball_trend_row() {
        let row = hamming_ball_trend(6, 1).unwrap();
        assert_eq!(row.rank, 7);
        assert!(row.gap >= 0.0);
    }
}
