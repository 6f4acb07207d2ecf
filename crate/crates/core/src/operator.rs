//! Dense n-qubit operators and their Pauli (Fourier) expansion.
//!
//! Operators are stored as `2^n x 2^n` complex matrices. Qubit 0 is the most
//! significant bit of a computational-basis index, so `sigma_1 (x) sigma_0`
//! acts as `X` on qubit 0. Multi-indices `s in {0,1,2,3}^n` are ordered
//! lexicographically with the same convention: the linear position of `s`
//! is `sum_j s_j 4^(n-1-j)`.

use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral;
use crate::MAX_QUBITS;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Relative tolerance for treating an operator as Hermitian in spectral routines.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Relative tolerance a stored `hermitian_hint = true` must satisfy.
pub const HERMITIAN_HINT_TOL: f64 = 1e-12;
/// Default relative threshold for a nonzero Fourier coefficient.
pub const DEGREE_REL_THRESHOLD: f64 = 1e-12;
/// Default relative threshold for a nonzero eigenvalue.
pub const RANK_REL_TOL: f64 = 1e-10;

pub(crate) fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        Err(Error::QubitCount(n))
    } else {
        Ok(())
    }
}

/// A Pauli string `s in {0,1,2,3}^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    pub fn new(entries: Vec<u8>) -> Result<Self> {
        check_qubits(entries.len())?;
        if let Some(bad) = entries.iter().find(|&&e| e > 3) {
            return Err(Error::MultiIndex(format!("entry {bad} not in 0..=3")));
        }
        Ok(Self(entries))
    }

    /// The all-identity string on `n` qubits.
    pub fn identity(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// Inverse of [`MultiIndex::linear`].
    pub fn from_linear(n: usize, mut index: usize) -> Self {
        let mut entries = vec![0u8; n];
        for slot in entries.iter_mut().rev() {
            *slot = (index % 4) as u8;
            index /= 4;
        }
        Self(entries)
    }

    pub fn linear(&self) -> usize {
        self.0.iter().fold(0, |acc, &e| acc * 4 + e as usize)
    }

    pub fn entries(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of non-identity factors `|s|`.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&e| e != 0).count()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.0 {
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl FromStr for MultiIndex {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let entries = s
            .chars()
            .map(|c| match c {
                '0'..='3' => Ok(c as u8 - b'0'),
                _ => Err(Error::MultiIndex(format!("invalid symbol {c:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }
}

/// Pauli weights of every linear index on `n` qubits.
pub fn weights(n: usize) -> Vec<u32> {
    let len = 1usize << (2 * n);
    let mut w = vec![0u32; len];
    for i in 1..len {
        w[i] = w[i / 4] + u32::from(i % 4 != 0);
    }
    w
}

/// An n-qubit operator stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    n: usize,
    matrix: DMatrix<C64>,
    hermitian_hint: Option<bool>,
}

impl DenseOperator {
    /// Wraps a matrix, checking its shape and that all entries are finite.
    pub fn new(n: usize, matrix: DMatrix<C64>) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Dimension {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                expected: dim,
            });
        }
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite("operator matrix"));
        }
        Ok(Self {
            n,
            matrix,
            hermitian_hint: None,
        })
    }

    pub(crate) fn from_parts(n: usize, matrix: DMatrix<C64>, hermitian: Option<bool>) -> Self {
        debug_assert_eq!(matrix.nrows(), 1 << n);
        Self {
            n,
            matrix,
            hermitian_hint: hermitian,
        }
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        Self::new(n, DMatrix::from_fn(dim, dim, f))
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        Ok(Self::from_parts(n, DMatrix::identity(dim, dim), Some(true)))
    }

    pub fn zeros(n: usize) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        Ok(Self::from_parts(n, DMatrix::zeros(dim, dim), Some(true)))
    }

    /// A real diagonal operator in the computational basis.
    pub fn from_diagonal(n: usize, diagonal: &[f64]) -> Result<Self> {
        check_qubits(n)?;
        let dim = 1usize << n;
        if diagonal.len() != dim {
            return Err(Error::Dimension {
                rows: diagonal.len(),
                cols: diagonal.len(),
                expected: dim,
            });
        }
        let mut m = DMatrix::zeros(dim, dim);
        for (i, &d) in diagonal.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        let mut op = Self::new(n, m)?;
        op.hermitian_hint = Some(true);
        Ok(op)
    }

    /// The rank-one operator `|v><v|`.
    pub fn outer(n: usize, v: &[C64]) -> Result<Self> {
        let col = nalgebra::DVector::from_column_slice(v);
        let m = &col * col.adjoint();
        let mut op = Self::new(n, m)?;
        op.hermitian_hint = Some(true);
        Ok(op)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn hermitian_hint(&self) -> Option<bool> {
        self.hermitian_hint
    }

    /// Records that the operator is (or is not) Hermitian. A `true` hint is
    /// only accepted when the matrix is Hermitian to `HERMITIAN_HINT_TOL`.
    pub fn with_hermitian_hint(mut self, hermitian: bool) -> Result<Self> {
        if hermitian {
            let dev = self.hermitian_deviation();
            if dev > HERMITIAN_HINT_TOL {
                return Err(Error::NotHermitian { deviation: dev });
            }
        }
        self.hermitian_hint = Some(hermitian);
        Ok(self)
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |X - X^dagger|` relative to `max |X|` (0 for the zero operator).
    pub fn hermitian_deviation(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let d = self.dim();
        let mut dev = 0.0f64;
        for r in 0..d {
            for c in r..d {
                dev = dev.max((self.matrix[(r, c)] - self.matrix[(c, r)].conj()).norm());
            }
        }
        dev / scale
    }

    pub fn is_hermitian(&self) -> bool {
        match self.hermitian_hint {
            Some(h) => h,
            None => self.hermitian_deviation() <= HERMITIAN_TOL,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|z| *z == ZERO)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(self.n, self.matrix.adjoint(), self.hermitian_hint)
    }

    /// `(X + X^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let m = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        Self::from_parts(self.n, m, Some(true))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_parts(
            self.n,
            &self.matrix * C64::new(factor, 0.0),
            self.hermitian_hint,
        )
    }

    /// Tensor product `self (x) other`; `self` occupies the leading qubits.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        check_qubits(self.n + other.n)?;
        let hint = match (self.hermitian_hint, other.hermitian_hint) {
            (Some(true), Some(true)) => Some(true),
            _ => None,
        };
        Ok(Self::from_parts(
            self.n + other.n,
            self.matrix.kronecker(&other.matrix),
            hint,
        ))
    }

    /// n-fold tensor power.
    pub fn tensor_power(&self, copies: usize) -> Result<Self> {
        check_qubits(self.n * copies)?;
        let mut out = self.clone();
        for _ in 1..copies {
            out = out.kron(self)?;
        }
        Ok(out)
    }

    fn same_qubits(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            Err(Error::QubitMismatch {
                left: self.n,
                right: other.n,
            })
        } else {
            Ok(())
        }
    }
}

impl Add for &DenseOperator {
    type Output = DenseOperator;

    fn add(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.n, rhs.n, "qubit count mismatch");
        let hint = match (self.hermitian_hint, rhs.hermitian_hint) {
            (Some(true), Some(true)) => Some(true),
            _ => None,
        };
        DenseOperator::from_parts(self.n, &self.matrix + &rhs.matrix, hint)
    }
}

impl Sub for &DenseOperator {
    type Output = DenseOperator;

    fn sub(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.n, rhs.n, "qubit count mismatch");
        let hint = match (self.hermitian_hint, rhs.hermitian_hint) {
            (Some(true), Some(true)) => Some(true),
            _ => None,
        };
        DenseOperator::from_parts(self.n, &self.matrix - &rhs.matrix, hint)
    }
}

impl Mul for &DenseOperator {
    type Output = DenseOperator;

    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        assert_eq!(self.n, rhs.n, "qubit count mismatch");
        DenseOperator::from_parts(self.n, &self.matrix * &rhs.matrix, None)
    }
}

fn single_pauli(k: u8) -> DMatrix<C64> {
    match k {
        0 => DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ONE]),
        1 => DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        2 => DMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        3 => DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        _ => unreachable!("MultiIndex entries are validated"),
    }
}

/// `sigma_s = sigma_{s_1} (x) ... (x) sigma_{s_n}`.
pub fn pauli_matrix(s: &MultiIndex) -> DenseOperator {
    let m = s
        .entries()
        .iter()
        .skip(1)
        .fold(single_pauli(s.entries()[0]), |acc, &k| {
            acc.kronecker(&single_pauli(k))
        });
    DenseOperator::from_parts(s.len(), m, Some(true))
}

/// Normalized trace `tr(X) / 2^n`.
pub fn normalized_trace(x: &DenseOperator) -> C64 {
    x.matrix.trace() / x.dim() as f64
}

/// Hilbert-Schmidt inner product `tau(X^dagger Y)`, conjugate-linear in `x`.
pub fn hs_inner(x: &DenseOperator, y: &DenseOperator) -> Result<C64> {
    x.same_qubits(y)?;
    let sum: C64 = x
        .matrix
        .iter()
        .zip(y.matrix.iter())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(sum / x.dim() as f64)
}

/// Fourier coefficients `x_s = <sigma_s, X>` in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliCoefficients {
    n: usize,
    coeffs: Vec<C64>,
}

impl PauliCoefficients {
    pub fn new(n: usize, coeffs: Vec<C64>) -> Result<Self> {
        check_qubits(n)?;
        let len = 1usize << (2 * n);
        if coeffs.len() != len {
            return Err(Error::Dimension {
                rows: coeffs.len(),
                cols: 1,
                expected: len,
            });
        }
        if coeffs
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite("Pauli coefficients"));
        }
        Ok(Self { n, coeffs })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        check_qubits(n)?;
        Ok(Self {
            n,
            coeffs: vec![ZERO; 1 << (2 * n)],
        })
    }

    /// Coefficient vector with a single 1 at `s`.
    pub fn indicator(s: &MultiIndex) -> Self {
        let mut coeffs = vec![ZERO; 1 << (2 * s.len())];
        coeffs[s.linear()] = ONE;
        Self { n: s.len(), coeffs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn get(&self, s: &MultiIndex) -> C64 {
        self.coeffs[s.linear()]
    }

    pub fn set(&mut self, s: &MultiIndex, value: C64) {
        self.coeffs[s.linear()] = value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, C64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (MultiIndex::from_linear(self.n, i), c))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `sum_s |x_s|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Multiplies each coefficient by `f(|s|)`.
    pub fn scale_by_weight(&self, f: impl Fn(u32) -> f64) -> Self {
        let table: Vec<f64> = (0..=self.n as u32).map(&f).collect();
        let coeffs = self
            .coeffs
            .iter()
            .zip(weights(self.n))
            .map(|(c, w)| c * table[w as usize])
            .collect();
        Self { n: self.n, coeffs }
    }

    /// `sum_s f(|s|) |x_s|^2`.
    pub fn weighted_norm_sqr(&self, f: impl Fn(u32) -> f64) -> f64 {
        let table: Vec<f64> = (0..=self.n as u32).map(&f).collect();
        self.coeffs
            .iter()
            .zip(weights(self.n))
            .map(|(c, w)| table[w as usize] * c.norm_sqr())
            .sum()
    }

    /// Largest `|s|` with `|x_s| > threshold`; 0 when no coefficient qualifies.
    pub fn degree(&self, threshold: f64) -> usize {
        self.coeffs
            .iter()
            .zip(weights(self.n))
            .filter(|(c, _)| c.norm() > threshold)
            .map(|(_, w)| w as usize)
            .max()
            .unwrap_or(0)
    }

    /// `DEGREE_REL_THRESHOLD * max_s |x_s|`.
    pub fn default_threshold(&self) -> f64 {
        DEGREE_REL_THRESHOLD * self.max_abs()
    }
}

/// Position of entry `(row, col)` in the interleaved per-qubit layout: qubit
/// `j` contributes the base-4 digit `2 r_j + c_j` at place `4^(n-1-j)`.
fn interleave(n: usize, row: usize, col: usize) -> usize {
    let mut idx = 0;
    for k in 0..n {
        idx |= ((row >> k) & 1) << (2 * k + 1);
        idx |= ((col >> k) & 1) << (2 * k);
    }
    idx
}

/// Applies a 4-point map to every qubit's digit in turn.
fn per_qubit_pass(n: usize, data: &mut [C64], map: impl Fn([C64; 4]) -> [C64; 4]) {
    for j in 0..n {
        let stride = 1usize << (2 * (n - 1 - j));
        for block in (0..data.len()).step_by(4 * stride) {
            for off in 0..stride {
                let base = block + off;
                let input = [
                    data[base],
                    data[base + stride],
                    data[base + 2 * stride],
                    data[base + 3 * stride],
                ];
                let out = map(input);
                for (k, v) in out.into_iter().enumerate() {
                    data[base + k * stride] = v;
                }
            }
        }
    }
}

/// Pauli expansion of `x` in `O(n 4^n)` operations.
pub fn pauli_transform(x: &DenseOperator) -> PauliCoefficients {
    let n = x.n;
    let dim = x.dim();
    let mut data = vec![ZERO; dim * dim];
    for c in 0..dim {
        for r in 0..dim {
            data[interleave(n, r, c)] = x.matrix[(r, c)];
        }
    }
    // digits: 0 = (r0,c0), 1 = (r0,c1), 2 = (r1,c0), 3 = (r1,c1)
    per_qubit_pass(n, &mut data, |[x00, x01, x10, x11]| {
        [
            (x00 + x11) * 0.5,
            (x01 + x10) * 0.5,
            I * (x01 - x10) * 0.5,
            (x00 - x11) * 0.5,
        ]
    });
    PauliCoefficients { n, coeffs: data }
}

/// `sum_s c_s sigma_s`.
pub fn inverse_pauli_transform(c: &PauliCoefficients) -> DenseOperator {
    let n = c.n;
    let dim = 1usize << n;
    let mut data = c.coeffs.clone();
    per_qubit_pass(n, &mut data, |[c0, c1, c2, c3]| {
        [c0 + c3, c1 - I * c2, c1 + I * c2, c0 - c3]
    });
    let m = DMatrix::from_fn(dim, dim, |r, col| data[interleave(n, r, col)]);
    DenseOperator::from_parts(n, m, None)
}

/// `deg(X)` with the default relative threshold.
pub fn degree(x: &DenseOperator) -> usize {
    let coeffs = pauli_transform(x);
    let threshold = coeffs.default_threshold();
    coeffs.degree(threshold)
}

pub fn degree_with_threshold(x: &DenseOperator, threshold: f64) -> Result<usize> {
    if !(threshold >= 0.0) {
        return Err(crate::error::domain_error(
            "threshold",
            threshold,
            "[0, inf)",
        ));
    }
    Ok(pauli_transform(x).degree(threshold))
}

/// Number of eigenvalues of a Hermitian operator with `|lambda| > tol`.
/// `tol = None` uses `RANK_REL_TOL * max |lambda|`.
pub fn numerical_rank(x: &DenseOperator, tol: Option<f64>) -> Result<usize> {
    let spectrum = spectral::eig_hermitian(x)?;
    let largest = spectrum
        .eigenvalues()
        .iter()
        .map(|l| l.abs())
        .fold(0.0, f64::max);
    let tol = tol.unwrap_or(RANK_REL_TOL * largest);
    if !(tol >= 0.0) {
        return Err(crate::error::domain_error("tol", tol, "[0, inf)"));
    }
    Ok(spectrum
        .eigenvalues()
        .iter()
        .filter(|l| l.abs() > tol)
        .count())
}

/// Number of singular values above `RANK_REL_TOL * sigma_max`; works for
/// non-Hermitian input.
pub fn singular_rank(x: &DenseOperator) -> usize {
    let sv = spectral::singular_values(x);
    let largest = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > RANK_REL_TOL * largest).count()
}
