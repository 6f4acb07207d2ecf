//! The qubit depolarizing semigroup `Psi_t^{(x)n} = exp(-t K_n)` and its
//! generator `K_n = sum_i L_i`, where `L(X) = X - tau(X) I` acts on one qubit.
//!
//! In the Pauli basis both are diagonal: `K_n sigma_s = |s| sigma_s` and
//! `Psi_t sigma_s = exp(-t|s|) sigma_s`. The Pauli path is the primary one;
//! the dense per-qubit routines are kept as an independent reference.

use nalgebra::DMatrix;

use crate::error::{domain_error, Error, Result};
use crate::operator::{
    hs_inner, inverse_pauli_transform, normalized_trace, pauli_transform, DenseOperator, C64,
};

/// Times beyond this return the limit `tau(X) I`.
pub const MAX_TIME: f64 = 700.0;

/// The generator `K_n` on `n` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorAction {
    n: usize,
}

impl GeneratorAction {
    pub fn new(n: usize) -> Result<Self> {
        crate::operator::check_qubits(n)?;
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Eigenvalue of `K_n` on `sigma_s`.
    pub fn eigenvalue(&self, weight: usize) -> f64 {
        weight as f64
    }

    pub fn apply(&self, x: &DenseOperator) -> Result<DenseOperator> {
        if x.n() != self.n {
            return Err(Error::QubitMismatch {
                left: self.n,
                right: x.n(),
            });
        }
        Ok(generator_apply_pauli(x))
    }
}

/// Average over qubit `qubit`, tensored back with the identity there:
/// `(tau_q (x) id)(X) (x) I_q`.
fn partial_average(x: &DenseOperator, qubit: usize) -> DenseOperator {
    let n = x.n();
    let dim = x.dim();
    let bit = 1usize << (n - 1 - qubit);
    let m = x.matrix();
    let out = DMatrix::from_fn(dim, dim, |r, c| {
        if (r & bit) != (c & bit) {
            return C64::new(0.0, 0.0);
        }
        let (r0, c0) = (r & !bit, c & !bit);
        (m[(r0, c0)] + m[(r0 | bit, c0 | bit)]) * 0.5
    });
    DenseOperator::from_parts(n, out, x.hermitian_hint())
}

/// `L_i(X)`: the single-qubit generator on qubit `qubit` (0-based, qubit 0
/// most significant), identity elsewhere.
pub fn lindblad_apply(x: &DenseOperator, qubit: usize) -> Result<DenseOperator> {
    if qubit >= x.n() {
        return Err(Error::QubitIndex {
            index: qubit,
            n: x.n(),
        });
    }
    Ok(x - &partial_average(x, qubit))
}

/// `K_n X = sum_i L_i X`, evaluated densely.
pub fn generator_apply(x: &DenseOperator) -> DenseOperator {
    let mut acc = DenseOperator::from_parts(x.n(), DMatrix::zeros(x.dim(), x.dim()), Some(true));
    for q in 0..x.n() {
        acc = &acc + &(x - &partial_average(x, q));
    }
    acc
}

/// `K_n X` through the Pauli expansion (`x_s -> |s| x_s`).
pub fn generator_apply_pauli(x: &DenseOperator) -> DenseOperator {
    let c = pauli_transform(x).scale_by_weight(|w| w as f64);
    restore_hint(inverse_pauli_transform(&c), x)
}

fn restore_hint(out: DenseOperator, like: &DenseOperator) -> DenseOperator {
    // Pauli-diagonal maps with real multipliers preserve Hermiticity.
    if like.hermitian_hint() == Some(true) {
        out.hermitian_part()
    } else {
        out
    }
}

fn check_time(t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(domain_error("t", t, "[0, inf)"));
    }
    Ok(t)
}

/// `Psi_t^{(x)n}(X)`, applied as `x_s -> exp(-t|s|) x_s`.
pub fn depolarize(x: &DenseOperator, t: f64) -> Result<DenseOperator> {
    let t = check_time(t)?;
    if t == 0.0 {
        return Ok(x.clone());
    }
    if t > MAX_TIME {
        let tau = normalized_trace(x);
        let dim = x.dim();
        let m = DMatrix::from_diagonal_element(dim, dim, tau);
        let hint = if tau.im == 0.0 { Some(true) } else { None };
        return Ok(DenseOperator::from_parts(x.n(), m, hint));
    }
    let c = pauli_transform(x).scale_by_weight(|w| (-t * w as f64).exp());
    Ok(restore_hint(inverse_pauli_transform(&c), x))
}

/// Reference path: one qubit at a time,
/// `X -> e^{-t} X + (1 - e^{-t}) (tau_q (x) id)(X) (x) I`.
pub fn depolarize_dense(x: &DenseOperator, t: f64) -> Result<DenseOperator> {
    let t = check_time(t)?;
    let keep = (-t).exp();
    let mut y = x.clone();
    for q in 0..x.n() {
        let avg = partial_average(&y, q);
        y = &y.scale(keep) + &avg.scale(1.0 - keep);
    }
    Ok(y)
}

/// Dirichlet form `<X, K_n X> = sum_s |s| |x_s|^2`.
pub fn dirichlet_form(x: &DenseOperator) -> f64 {
    pauli_transform(x).weighted_norm_sqr(|w| w as f64)
}

/// `<X, K_n X>` evaluated with the dense generator; real part of the inner product.
pub fn dirichlet_form_dense(x: &DenseOperator) -> f64 {
    hs_inner(x, &generator_apply(x))
        .expect("same qubit count")
        .re
}

/// `<Y, K_n Z>` through the Pauli expansion.
pub fn dirichlet_pairing(y: &DenseOperator, z: &DenseOperator) -> Result<C64> {
    if y.n() != z.n() {
        return Err(Error::QubitMismatch {
            left: y.n(),
            right: z.n(),
        });
    }
    let cy = pauli_transform(y);
    let cz = pauli_transform(z);
    let w = crate::operator::weights(y.n());
    Ok(cy
        .as_slice()
        .iter()
        .zip(cz.as_slice())
        .zip(w)
        .map(|((a, b), w)| a.conj() * b * w as f64)
        .sum())
}
