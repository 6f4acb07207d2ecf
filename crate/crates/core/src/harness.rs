//! Seeded instance generators, the lemma fuzz suite, theorem fuzzing and
//! the data behind the `alpha` plot and the pure-state mixture comparison.
//!
//! All randomness comes from xoshiro256++ seeded through `seed_from_u64`
//! (SplitMix64 expansion), so instances are reproducible across platforms.
//! Every trial derives its own instance seed; a report descriptor of the
//! form `check=<name>;n=<n>;seed=<instance seed>` is enough to replay it.

use std::f64::consts::LN_2;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::applications::{faber_krahn_check, sz_check};
use crate::error::{domain_error, Error, Result};
use crate::hyperc::hc_check;
use crate::operator::{check_qubits, DenseOperator, C64};
use crate::report::{CheckReport, Table};
use crate::semigroup::{depolarize, dirichlet_form, dirichlet_pairing};
use crate::sobolev::{alpha, lsi_check};
use crate::spectral::{
    eig_hermitian, entropy_of_values, psd_power, schatten_from_singular, singular_values,
};

pub const GENERATOR_NAME: &str = "xoshiro256++";
pub const ALGEBRAIC_TOL: f64 = 1e-9;
pub const FD_TOL: f64 = 1e-5;
/// Positivity shift for Stroock-Varopoulos instances, relative to `lambda_max`.
pub const SV_SHIFT: f64 = 1e-6;

fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Standard complex Gaussian entries: real and imaginary parts `N(0, 1/2)`.
fn gaussian(rng: &mut Xoshiro256PlusPlus, rows: usize, cols: usize) -> DMatrix<C64> {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    })
}

fn psd_from_factor(n: usize, g: DMatrix<C64>) -> DenseOperator {
    DenseOperator::new(n, g.adjoint() * g)
        .expect("square factor product")
        .hermitian_part()
}

/// `G^dagger G` with `G` a `2^n x 2^n` standard complex Gaussian matrix.
pub fn gen_random_psd(n: usize, seed: u64) -> Result<DenseOperator> {
    check_qubits(n)?;
    let dim = 1usize << n;
    Ok(psd_from_factor(n, gaussian(&mut rng(seed), dim, dim)))
}

/// `G^dagger G` with `G` of shape `rank x 2^n`; rank exactly `rank` almost surely.
pub fn gen_random_psd_rank(n: usize, rank: usize, seed: u64) -> Result<DenseOperator> {
    check_qubits(n)?;
    let dim = 1usize << n;
    if rank == 0 || rank > dim {
        return Err(domain_error("rank", rank as f64, format!("[1, {dim}]")));
    }
    Ok(psd_from_factor(n, gaussian(&mut rng(seed), rank, dim)))
}

/// A square standard complex Gaussian matrix (generically non-normal).
pub fn gen_random_operator(n: usize, seed: u64) -> Result<DenseOperator> {
    check_qubits(n)?;
    let dim = 1usize << n;
    DenseOperator::new(n, gaussian(&mut rng(seed), dim, dim))
}

/// `(G + G^dagger) / 2`.
pub fn gen_random_hermitian(n: usize, seed: u64) -> Result<DenseOperator> {
    Ok(gen_random_operator(n, seed)?.hermitian_part())
}

/// Haar-like unitary from the QR factorization of a Gaussian matrix.
pub fn gen_random_unitary(n: usize, seed: u64) -> Result<DenseOperator> {
    check_qubits(n)?;
    let dim = 1usize << n;
    let qr = gaussian(&mut rng(seed), dim, dim).qr();
    let (q, r) = qr.unpack();
    let phases = DMatrix::from_fn(dim, dim, |i, j| {
        if i == j {
            let d = r[(i, i)];
            if d.norm() > 0.0 {
                d / d.norm()
            } else {
                C64::new(1.0, 0.0)
            }
        } else {
            C64::new(0.0, 0.0)
        }
    });
    DenseOperator::new(n, q * phases)
}

/// `rho^{(x)n}` for a one-qubit PSD `rho`.
pub fn gen_product(rho: &DenseOperator, n: usize) -> Result<DenseOperator> {
    if rho.n() != 1 {
        return Err(Error::QubitMismatch {
            left: rho.n(),
            right: 1,
        });
    }
    check_qubits(n)?;
    eig_hermitian(rho)?.psd_eigenvalues()?;
    rho.tensor_power(n)
}

fn check_unit(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(domain_error("s", s, "[0, 1]"));
    }
    Ok(())
}

/// `|psi_s><psi_s|` with `|psi_s> = sqrt(s)|00> + sqrt(1-s)|11>`.
pub fn gen_psi_s(s: f64) -> Result<DenseOperator> {
    check_unit(s)?;
    let zero = C64::new(0.0, 0.0);
    let v = [
        C64::new(s.sqrt(), 0.0),
        zero,
        zero,
        C64::new((1.0 - s).sqrt(), 0.0),
    ];
    DenseOperator::outer(2, &v)
}

/// `s |phi><phi| + (1 - s) (I/2) (x) (I/2)` with `|phi> = (|00> + |11>)/sqrt 2`.
pub fn gen_fig1b(s: f64) -> Result<DenseOperator> {
    check_unit(s)?;
    let bell = gen_psi_s(0.5)?;
    let mixed = DenseOperator::identity(2)?.scale(0.25);
    Ok(&bell.scale(s) + &mixed.scale(1.0 - s))
}

/// The block form `X = [[A, C], [C^dagger, B]]` with respect to the leading qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDecomposition {
    pub a: DenseOperator,
    pub b: DenseOperator,
    pub c: DenseOperator,
    pub parent: DenseOperator,
}

impl BlockDecomposition {
    pub fn split(parent: &DenseOperator) -> Result<Self> {
        let n = parent.n();
        if n < 2 {
            return Err(Error::QubitCount(n));
        }
        let half = parent.dim() / 2;
        let m = parent.matrix();
        let block = |r: usize, c: usize| {
            DenseOperator::new(n - 1, m.view((r, c), (half, half)).into_owned())
        };
        let hint = parent.hermitian_hint();
        let a = block(0, 0)?;
        let b = block(half, half)?;
        let (a, b) = if hint == Some(true) {
            (a.hermitian_part(), b.hermitian_part())
        } else {
            (a, b)
        };
        Ok(Self {
            a,
            b,
            c: block(0, half)?,
            parent: parent.clone(),
        })
    }

    /// `[[A, C], [C^dagger, B]]`.
    pub fn reassemble(&self) -> DenseOperator {
        let half = self.a.dim();
        let mut m = DMatrix::zeros(2 * half, 2 * half);
        m.view_mut((0, 0), (half, half)).copy_from(self.a.matrix());
        m.view_mut((half, half), (half, half))
            .copy_from(self.b.matrix());
        m.view_mut((0, half), (half, half))
            .copy_from(self.c.matrix());
        m.view_mut((half, 0), (half, half))
            .copy_from(&self.c.matrix().adjoint());
        DenseOperator::new(self.a.n() + 1, m).expect("blocks are consistent")
    }

    /// `M = [[||A||_2, ||C||_2], [||C^dagger||_2, ||B||_2]]` on one qubit.
    pub fn norm_matrix(&self) -> DenseOperator {
        let norm = |x: &DenseOperator| {
            schatten_from_singular(&singular_values(x), 2.0).expect("p = 2 is valid")
        };
        let c = norm(&self.c);
        let entries = [norm(&self.a), c, c, norm(&self.b)];
        DenseOperator::from_fn(1, |r, col| C64::new(entries[2 * r + col], 0.0))
            .expect("one qubit")
            .with_hermitian_hint(true)
            .expect("symmetric")
    }
}

/// `Ent(|X|^2)` from singular values; zero for the zero operator.
fn entropy_abs_square(x: &DenseOperator) -> Result<f64> {
    let sv = singular_values(x);
    match entropy_of_values(sv.iter().map(|s| s * s)) {
        Err(Error::ZeroOperator) => Ok(0.0),
        other => other,
    }
}

/// The checks run by [`run_lemma_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LemmaCheck {
    BlockEntropy,
    DirichletAbs,
    StroockVaropoulos,
    NormDerivative,
    FlowDerivative,
    RenyiBound,
    XiRange,
}

impl LemmaCheck {
    pub const ALL: [LemmaCheck; 7] = [
        LemmaCheck::BlockEntropy,
        LemmaCheck::DirichletAbs,
        LemmaCheck::StroockVaropoulos,
        LemmaCheck::NormDerivative,
        LemmaCheck::FlowDerivative,
        LemmaCheck::RenyiBound,
        LemmaCheck::XiRange,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaCheck::BlockEntropy => "lemma2_block_entropy",
            LemmaCheck::DirichletAbs => "lemma3_dirichlet_abs",
            LemmaCheck::StroockVaropoulos => "stroock_varopoulos",
            LemmaCheck::NormDerivative => "lemma1_i",
            LemmaCheck::FlowDerivative => "lemma1_ii",
            LemmaCheck::RenyiBound => "lemma1_iii",
            LemmaCheck::XiRange => "appendix_a_range",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    fn is_finite_difference(self) -> bool {
        matches!(
            self,
            LemmaCheck::NormDerivative | LemmaCheck::FlowDerivative
        )
    }

    /// Smallest qubit count the check accepts.
    fn min_qubits(self) -> usize {
        if self == LemmaCheck::BlockEntropy {
            2
        } else {
            1
        }
    }
}

/// Theorem-level checks used by the fuzz command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TheoremCheck {
    Lsi,
    LsiProduct,
    FaberKrahn,
    SchwartzZippel,
    Hypercontractivity,
}

impl TheoremCheck {
    pub const ALL: [TheoremCheck; 5] = [
        TheoremCheck::Lsi,
        TheoremCheck::LsiProduct,
        TheoremCheck::FaberKrahn,
        TheoremCheck::SchwartzZippel,
        TheoremCheck::Hypercontractivity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremCheck::Lsi => "lsi",
            TheoremCheck::LsiProduct => "lsi_product",
            TheoremCheck::FaberKrahn => "faber_krahn",
            TheoremCheck::SchwartzZippel => "schwartz_zippel",
            TheoremCheck::Hypercontractivity => "hc",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub min_n: usize,
    pub max_n: usize,
    /// Tolerance for algebraic inequalities.
    pub tol: f64,
    /// Relative tolerance for finite-difference identities.
    pub fd_tol: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            min_n: 1,
            max_n: 3,
            tol: ALGEBRAIC_TOL,
            fd_tol: FD_TOL,
        }
    }
}

impl SuiteOptions {
    fn validate(&self) -> Result<()> {
        check_qubits(self.min_n)?;
        check_qubits(self.max_n)?;
        if self.min_n > self.max_n {
            return Err(domain_error(
                "min_n",
                self.min_n as f64,
                format!("[1, {}]", self.max_n),
            ));
        }
        for (name, v) in [("tol", self.tol), ("fd_tol", self.fd_tol)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(domain_error(name, v, "[0, inf)"));
            }
        }
        Ok(())
    }

    /// Qubit count for a trial; checks with a larger minimum are lifted.
    fn qubits(&self, trial: usize, min: usize) -> usize {
        let lo = self.min_n.max(min);
        let hi = self.max_n.max(lo);
        lo + trial % (hi - lo + 1)
    }
}

/// SplitMix64 finalizer used to derive per-trial instance seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn name_tag(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ b as u64).wrapping_mul(0x100_0000_01b3)
    })
}

/// Instance seed for `(suite seed, check, trial)`.
pub fn instance_seed(seed: u64, check: &str, trial: usize) -> u64 {
    mix(mix(seed ^ name_tag(check)).wrapping_add(trial as u64))
}

fn descriptor(check: &str, n: usize, seed: u64, extra: &str) -> String {
    if extra.is_empty() {
        format!("check={check};n={n};seed={seed}")
    } else {
        format!("check={check};n={n};seed={seed};{extra}")
    }
}

fn error_report(name: &str, n: usize, seed: u64, tol: f64, err: &Error) -> CheckReport {
    CheckReport::inequality(name, f64::NAN, f64::NAN, tol)
        .with_instance(
            Some(seed),
            descriptor(name, n, seed, &format!("error={err}")),
        )
        .with_generator(GENERATOR_NAME)
}

fn finish(report: CheckReport, name: &str, n: usize, seed: u64, extra: &str) -> CheckReport {
    report
        .with_instance(Some(seed), descriptor(name, n, seed, extra))
        .with_generator(GENERATOR_NAME)
}

/// Runs one lemma check on the instance determined by `(n, seed)`.
pub fn lemma_check(check: LemmaCheck, n: usize, seed: u64, opts: &SuiteOptions) -> CheckReport {
    let name = check.name();
    let tol = if check.is_finite_difference() {
        opts.fd_tol
    } else {
        opts.tol
    };
    match lemma_instance(check, n, seed, tol) {
        Ok((report, extra)) => finish(report, name, n, seed, &extra),
        Err(e) => error_report(name, n, seed, tol, &e),
    }
}

fn lemma_instance(
    check: LemmaCheck,
    n: usize,
    seed: u64,
    tol: f64,
) -> Result<(CheckReport, String)> {
    let name = check.name();
    let mut params = rng(seed ^ 0x5a5a_5a5a_5a5a_5a5a);
    match check {
        LemmaCheck::BlockEntropy => {
            let x = gen_random_psd(n, seed)?;
            let blocks = BlockDecomposition::split(&x)?;
            let lhs = eig_hermitian(&x)?.entropy_of_power(2.0)?;
            let m = blocks.norm_matrix();
            let rhs = eig_hermitian(&m)?.entropy_of_power(2.0)?
                + 0.5 * eig_hermitian(&blocks.a)?.entropy_of_power(2.0)?
                + 0.5 * eig_hermitian(&blocks.b)?.entropy_of_power(2.0)?
                + entropy_abs_square(&blocks.c)?;
            Ok((CheckReport::inequality(name, lhs, rhs, tol), String::new()))
        }
        LemmaCheck::DirichletAbs => {
            let c = gen_random_operator(n, seed)?;
            let abs_c = crate::spectral::abs_operator(&c);
            let abs_c_adj = crate::spectral::abs_operator(&c.adjoint());
            let lhs = dirichlet_form(&abs_c) + dirichlet_form(&abs_c_adj);
            let rhs = dirichlet_form(&c) + dirichlet_form(&c.adjoint());
            Ok((CheckReport::inequality(name, lhs, rhs, tol), String::new()))
        }
        LemmaCheck::StroockVaropoulos => {
            let p = 4.0 - 3.0 * params.gen::<f64>();
            let x = gen_random_psd(n, seed)?;
            let lmax = eig_hermitian(&x)?.max_abs_eigenvalue();
            let eps = SV_SHIFT * lmax;
            let x = &x + &DenseOperator::identity(n)?.scale(eps);
            let lhs = 4.0 * (p - 1.0) / (p * p) * dirichlet_form(&x);
            let rhs =
                dirichlet_pairing(&psd_power(&x, 2.0 / p)?, &psd_power(&x, 2.0 - 2.0 / p)?)?.re;
            Ok((
                CheckReport::inequality(name, lhs, rhs, tol),
                format!("p={p};shift={eps}"),
            ))
        }
        LemmaCheck::NormDerivative => {
            let p = 1.5 + 2.5 * params.gen::<f64>();
            let x = gen_random_psd(n, seed)?;
            let spec = eig_hermitian(&x)?;
            let ev = spec.psd_eigenvalues()?;
            let norm = |q: f64| schatten_from_singular(&ev, q);
            let h = 1e-5 * p.max(1.0);
            let fd = (norm(p + h)? - norm(p - h)?) / (2.0 * h);
            let analytic = spec.entropy_of_power(p)? / (p * p * norm(p)?.powf(p - 1.0));
            Ok((
                CheckReport::equality(name, fd, analytic, tol),
                format!("p={p}"),
            ))
        }
        LemmaCheck::FlowDerivative => {
            let p0 = 1.2 + 1.8 * params.gen::<f64>();
            let rate = 0.5 + 1.5 * params.gen::<f64>();
            let t = 0.05 + 0.95 * params.gen::<f64>();
            let x = gen_random_psd(n, seed)?;
            let p_of = |s: f64| 1.0 + (p0 - 1.0) * (rate * s).exp();
            let f = |s: f64| -> Result<f64> {
                let y = depolarize(&x, s)?;
                schatten_from_singular(&eig_hermitian(&y)?.psd_eigenvalues()?, p_of(s))
            };
            let h = 1e-5;
            let fd = (f(t + h)? - f(t - h)?) / (2.0 * h);
            let p = p_of(t);
            let dp = rate * (p0 - 1.0) * (rate * t).exp();
            let z = depolarize(&x, t)?;
            let spec = eig_hermitian(&z)?;
            let ev = spec.psd_eigenvalues()?;
            let gamma = schatten_from_singular(&ev, p)?.powf(p - 1.0);
            // Y = Z^{p/2}, so Ent(Y^2) = Ent(Z^p), Y^{2/p} = Z, Y^{2-2/p} = Z^{p-1}
            let ent = spec.entropy_of_power(p)?;
            let energy = dirichlet_pairing(&z, &spec.map(|l| l.max(0.0).powf(p - 1.0)))?.re;
            let analytic = (dp / (p * p) * ent - energy) / gamma;
            Ok((
                CheckReport::equality(name, fd, analytic, tol),
                format!("p0={p0};rate={rate};t={t}"),
            ))
        }
        LemmaCheck::RenyiBound => {
            let s = 1.0 + 3.0 * (1.0 - params.gen::<f64>());
            let x = gen_random_psd(n, seed)?;
            let spec = eig_hermitian(&x)?;
            let ev = spec.psd_eigenvalues()?;
            let lhs = (schatten_from_singular(&ev, s)?.ln()
                - schatten_from_singular(&ev, 1.0)?.ln())
                / (1.0 - 1.0 / s);
            let rhs = spec.entropy_of_power(s)? / spec.trace_power(s)?;
            Ok((
                CheckReport::inequality(name, lhs, rhs, tol),
                format!("s={s}"),
            ))
        }
        LemmaCheck::XiRange => {
            let x = gen_random_psd(n, seed)?;
            let spec = eig_hermitian(&x)?;
            let raw = spec.entropy_of_power(2.0)? / (n as f64 * spec.trace_power(2.0)?);
            Ok((CheckReport::inequality(name, raw, LN_2, tol), String::new()))
        }
    }
}

/// Runs one theorem check on the instance determined by `(n, seed)`.
pub fn theorem_check(
    check: TheoremCheck,
    n: usize,
    seed: u64,
    opts: &SuiteOptions,
) -> Vec<CheckReport> {
    let name = check.name();
    match theorem_instance(check, n, seed, opts.tol) {
        Ok((reports, extra)) => reports
            .into_iter()
            .map(|r| {
                let extra = if r.instance_descriptor.is_empty() {
                    extra.clone()
                } else if extra.is_empty() {
                    r.instance_descriptor.clone()
                } else {
                    format!("{extra};{}", r.instance_descriptor)
                };
                finish(r, name, n, seed, &extra)
            })
            .collect(),
        Err(e) => vec![error_report(name, n, seed, opts.tol, &e)],
    }
}

/// Time grid used by the hypercontractivity fuzz check.
pub const HC_FUZZ_GRID: [f64; 5] = [0.0, 0.1, 0.25, 0.5, 1.0];

fn theorem_instance(
    check: TheoremCheck,
    n: usize,
    seed: u64,
    tol: f64,
) -> Result<(Vec<CheckReport>, String)> {
    let name = check.name();
    let mut params = rng(seed ^ 0xa5a5_a5a5_a5a5_a5a5);
    match check {
        TheoremCheck::Lsi => {
            let x = gen_random_psd(n, seed)?;
            Ok((vec![lsi_check(&x, tol)?.to_check(name)], String::new()))
        }
        TheoremCheck::LsiProduct => {
            let rho = gen_random_psd(1, seed)?;
            let rep = lsi_check(&gen_product(&rho, n)?, tol)?;
            Ok((
                vec![CheckReport::equality(name, rep.lhs, rep.rhs, tol)],
                String::new(),
            ))
        }
        TheoremCheck::FaberKrahn => {
            let rank = params.gen_range(1..=1usize << n);
            let x = gen_random_psd_rank(n, rank, seed)?;
            let mut rep = faber_krahn_check(&x, tol)?;
            rep.name = name.to_string();
            Ok((vec![rep], format!("rank={rank}")))
        }
        TheoremCheck::SchwartzZippel => {
            let rank = params.gen_range(1..=1usize << n);
            let x = gen_random_psd_rank(n, rank, seed)?;
            let rep = sz_check(&x, tol)?;
            let mut check = rep.to_check();
            check.name = name.to_string();
            Ok((vec![check], format!("rank={rank}")))
        }
        TheoremCheck::Hypercontractivity => {
            let p0 = [1.5, 2.0, 3.0][params.gen_range(0..3usize)];
            let hermitian = params.gen_bool(0.5);
            let x = if hermitian {
                gen_random_psd(n, seed)?
            } else {
                gen_random_operator(n, seed)?
            };
            let reports = hc_check(&x, p0, &HC_FUZZ_GRID, tol)?
                .into_iter()
                .map(|mut r| {
                    r.instance_descriptor = format!("{};psd={hermitian}", r.instance_descriptor);
                    r
                })
                .collect();
            Ok((reports, String::new()))
        }
    }
}

fn sort_reports(mut keyed: Vec<(usize, CheckReport)>) -> Vec<CheckReport> {
    keyed.sort_by(|(ta, a), (tb, b)| a.name.cmp(&b.name).then(ta.cmp(tb)));
    keyed.into_iter().map(|(_, r)| r).collect()
}

/// Fuzzes every lemma check with the default options.
pub fn run_lemma_suite(seed: u64, trials: usize) -> Vec<CheckReport> {
    run_lemma_suite_with(seed, trials, &SuiteOptions::default()).expect("default options are valid")
}

/// One report per lemma check per trial, ordered by (check name, trial).
pub fn run_lemma_suite_with(
    seed: u64,
    trials: usize,
    opts: &SuiteOptions,
) -> Result<Vec<CheckReport>> {
    opts.validate()?;
    let keyed: Vec<(usize, CheckReport)> = (0..trials)
        .into_par_iter()
        .flat_map_iter(|trial| {
            LemmaCheck::ALL.into_iter().map(move |check| {
                let n = opts.qubits(trial, check.min_qubits());
                let s = instance_seed(seed, check.name(), trial);
                (trial, lemma_check(check, n, s, opts))
            })
        })
        .collect();
    Ok(sort_reports(keyed))
}

/// Theorem checks on generated instances, ordered by (check name, trial).
pub fn run_theorem_suite(
    seed: u64,
    trials: usize,
    opts: &SuiteOptions,
) -> Result<Vec<CheckReport>> {
    opts.validate()?;
    let keyed: Vec<(usize, CheckReport)> = (0..trials)
        .into_par_iter()
        .flat_map_iter(|trial| {
            TheoremCheck::ALL.into_iter().flat_map(move |check| {
                let n = opts.qubits(trial, 1);
                let s = instance_seed(seed, check.name(), trial);
                theorem_check(check, n, s, opts)
                    .into_iter()
                    .map(move |r| (trial, r))
            })
        })
        .collect();
    Ok(sort_reports(keyed))
}

fn descriptor_field<'a>(descriptor: &'a str, key: &str) -> Result<&'a str> {
    descriptor
        .split(';')
        .filter_map(|kv| kv.split_once('='))
        .find(|(k, _)| k.trim() == key)
        .map(|(_, v)| v.trim())
        .ok_or_else(|| Error::Descriptor(format!("missing `{key}` in `{descriptor}`")))
}

/// Re-runs the instance named by a report descriptor.
///
/// Returns every report the instance produces; for time-grid checks the
/// caller may match on the full descriptor.
pub fn replay(descriptor: &str, opts: &SuiteOptions) -> Result<Vec<CheckReport>> {
    let check = descriptor_field(descriptor, "check")?;
    let n: usize = descriptor_field(descriptor, "n")?
        .parse()
        .map_err(|_| Error::Descriptor(format!("bad qubit count in `{descriptor}`")))?;
    let seed: u64 = descriptor_field(descriptor, "seed")?
        .parse()
        .map_err(|_| Error::Descriptor(format!("bad seed in `{descriptor}`")))?;
    check_qubits(n)?;
    if let Some(c) = LemmaCheck::from_name(check) {
        if n < c.min_qubits() {
            return Err(Error::QubitCount(n));
        }
        Ok(vec![lemma_check(c, n, seed, opts)])
    } else if let Some(c) = TheoremCheck::from_name(check) {
        Ok(theorem_check(c, n, seed, opts))
    } else {
        Err(Error::Descriptor(format!("unknown check `{check}`")))
    }
}

/// Data for the `alpha` curve (a) and the mixture comparison (b).
///
/// Table (a) has columns `xi, alpha` on `[0, ln 2]`. Table (b) has columns
/// `s, dirichlet, improved_lsi, classical_lsi`, each divided by `tau(X_s^2)`.
pub fn figure1_data(grid: usize) -> Result<(Table, Table)> {
    if grid < 2 {
        return Err(Error::Grid(format!("need at least 2 points, got {grid}")));
    }
    let last = (grid - 1) as f64;
    let mut a = Table::new(["xi", "alpha"]);
    for i in 0..grid {
        let xi = if i == grid - 1 {
            LN_2
        } else {
            LN_2 * i as f64 / last
        };
        a.push(vec![xi, alpha(xi)?]);
    }
    let mut b = Table::new(["s", "dirichlet", "improved_lsi", "classical_lsi"]);
    for i in 0..grid {
        let s = i as f64 / last;
        let x = gen_fig1b(s)?;
        let spec = eig_hermitian(&x)?;
        let tau2 = spec.trace_power(2.0)?;
        let ent = spec.entropy_of_power(2.0)?;
        let xi = crate::spectral::xi_from_spectrum(&spec)?;
        b.push(vec![
            s,
            dirichlet_form(&x) / tau2,
            alpha(xi)? * ent / tau2,
            0.5 * ent / tau2,
        ]);
    }
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::normalized_trace;

    #[test]
    fn generators_are_deterministic() {
        let a = gen_random_psd(1, 42).unwrap();
        let b = gen_random_psd(1, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, gen_random_psd(1, 43).unwrap());
        let spec = eig_hermitian(&gen_random_psd(3, 9).unwrap()).unwrap();
        assert!(spec.psd_eigenvalues().is_ok());
        assert!(gen_random_psd(0, 1).is_err());
        assert!(gen_random_psd(13, 1).is_err());
    }

    #[test]
    fn rank_generator_has_requested_rank() {
        for rank in 1..=8 {
            let x = gen_random_psd_rank(3, rank, rank as u64).unwrap();
            assert_eq!(crate::operator::numerical_rank(&x, None).unwrap(), rank);
        }
        assert!(gen_random_psd_rank(2, 5, 0).is_err());
    }

    #[test]
    fn unitary_generator() {
        let u = gen_random_unitary(2, 3).unwrap();
        let id = nalgebra::DMatrix::<C64>::identity(4, 4);
        assert!((u.matrix().adjoint() * u.matrix() - id).norm() < 1e-13);
    }

    #[test]
    fn product_generator_cases() {
        let id = DenseOperator::identity(1).unwrap();
        assert_eq!(
            gen_product(&id, 3).unwrap(),
            DenseOperator::identity(3).unwrap()
        );
        let p = DenseOperator::from_diagonal(1, &[1.0, 0.0]).unwrap();
        let expected = DenseOperator::from_diagonal(2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(gen_product(&p, 2).unwrap().matrix(), expected.matrix());
        let rho = DenseOperator::from_diagonal(1, &[0.7, 0.3]).unwrap();
        let expected = DenseOperator::from_diagonal(2, &[0.49, 0.21, 0.21, 0.09]).unwrap();
        assert!((gen_product(&rho, 2).unwrap().matrix() - expected.matrix()).norm() < 1e-15);
        let bad = DenseOperator::from_diagonal(1, &[1.0, -0.5]).unwrap();
        assert!(gen_product(&bad, 2).is_err());
    }

    #[test]
    fn psi_s_cases() {
        let x = gen_psi_s(0.0).unwrap();
        assert_eq!(x.matrix()[(3, 3)], C64::new(1.0, 0.0));
        assert_eq!(x.matrix().norm(), 1.0);
        for s in [0.0, 0.2, 0.5, 0.9, 1.0] {
            let spec = eig_hermitian(&gen_psi_s(s).unwrap()).unwrap();
            assert!((spec.trace_power(2.0).unwrap() - 0.25).abs() < 1e-15);
            assert!((spec.entropy_of_power(2.0).unwrap() - 0.5 * LN_2).abs() < 1e-14);
        }
        assert!(gen_psi_s(1.5).is_err());
    }

    #[test]
    fn fig1b_cases() {
        let x0 = gen_fig1b(0.0).unwrap();
        assert_eq!(x0, DenseOperator::identity(2).unwrap().scale(0.25));
        let x1 = gen_fig1b(1.0).unwrap();
        assert!((x1.matrix() - gen_psi_s(0.5).unwrap().matrix()).norm() < 1e-15);
        let mid = gen_fig1b(0.5).unwrap();
        let mut expected = nalgebra::DMatrix::from_diagonal_element(4, 4, C64::new(0.125, 0.0));
        for (r, c) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            expected[(r, c)] += C64::new(0.25, 0.0);
        }
        assert!((mid.matrix() - expected).norm() < 1e-15);
        assert!((normalized_trace(&mid).re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn blocks_reassemble() {
        let x = gen_random_psd(3, 4).unwrap();
        let blocks = BlockDecomposition::split(&x).unwrap();
        assert_eq!(blocks.reassemble().matrix(), x.matrix());
        let m = blocks.norm_matrix();
        assert!(m.matrix().iter().all(|z| z.re >= 0.0 && z.im == 0.0));
        assert!(eig_hermitian(&blocks.a).unwrap().psd_eigenvalues().is_ok());
        assert!(BlockDecomposition::split(&DenseOperator::identity(1).unwrap()).is_err());
    }

    #[test]
    fn block_diagonal_equal_blocks() {
        // C = 0, A = B: Ent(X^2) = Ent(A^2) and M = ||A||_2 I, so the gap is zero
        let a = gen_random_psd(1, 8).unwrap();
        let x = DenseOperator::identity(1).unwrap().kron(&a).unwrap();
        let blocks = BlockDecomposition::split(&x).unwrap();
        let lhs = eig_hermitian(&x).unwrap().entropy_of_power(2.0).unwrap();
        let m = eig_hermitian(&blocks.norm_matrix())
            .unwrap()
            .entropy_of_power(2.0)
            .unwrap();
        let ea = eig_hermitian(&a).unwrap().entropy_of_power(2.0).unwrap();
        assert!(m.abs() < 1e-15);
        assert!((lhs - ea).abs() < 1e-13);
        assert_eq!(entropy_abs_square(&blocks.c).unwrap(), 0.0);
    }

    #[test]
    fn dirichlet_abs_hermitian_case() {
        // |C| = |C^dagger| for Hermitian C, and both sides are two copies of one term
        let c = gen_random_hermitian(2, 5).unwrap();
        let abs_c = crate::spectral::abs_operator(&c);
        let lhs = 2.0 * dirichlet_form(&abs_c);
        let rhs = 2.0 * dirichlet_form(&c);
        assert!(lhs <= rhs + 1e-12);
    }

    #[test]
    fn lemma_suite_small_run() {
        let reports = run_lemma_suite(7, 21);
        assert_eq!(reports.len(), 21 * LemmaCheck::ALL.len());
        for r in &reports {
            assert!(r.passed(), "{r:?}");
            assert_eq!(r.generator, GENERATOR_NAME);
        }
        let names: Vec<&str> = reports.iter().map(|r| r.name.as_str()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
    }

    #[test]
    fn lemma_suite_fixed_n() {
        let opts = SuiteOptions {
            min_n: 2,
            max_n: 2,
            ..SuiteOptions::default()
        };
        let reports = run_lemma_suite_with(7, 10, &opts).unwrap();
        assert!(reports
            .iter()
            .all(|r| r.instance_descriptor.contains(";n=2;")));
        assert!(reports.iter().all(CheckReport::passed));
    }

    #[test]
    fn replay_reproduces_report() {
        let opts = SuiteOptions::default();
        let reports = run_lemma_suite_with(11, 4, &opts).unwrap();
        for r in reports.iter().step_by(3) {
            let again = replay(&r.instance_descriptor, &opts).unwrap();
            assert_eq!(again, vec![r.clone()]);
        }
        assert!(replay("check=nope;n=1;seed=1", &opts).is_err());
        assert!(replay("n=1;seed=1", &opts).is_err());
    }

    #[test]
    fn theorem_suite_small_run() {
        let opts = SuiteOptions {
            max_n: 2,
            ..SuiteOptions::default()
        };
        let reports = run_theorem_suite(3, 4, &opts).unwrap();
        assert!(reports.iter().all(CheckReport::passed), "{reports:#?}");
        let hc: Vec<_> = reports.iter().filter(|r| r.name == "hc").collect();
        let again = replay(&hc[0].instance_descriptor, &opts).unwrap();
        assert!(again.contains(hc[0]));
    }

    #[test]
    fn figure1_endpoints() {
        let (a, b) = figure1_data(2).unwrap();
        assert_eq!(a.rows[0], vec![0.0, 0.5]);
        assert_eq!(a.rows[1][0], LN_2);
        assert!((a.rows[1][1] - 0.5 / LN_2).abs() < 1e-12);
        assert!(b.rows[0][1..].iter().all(|v| v.abs() < 1e-12));
        // s = 1: the Bell projector, evaluated densely
        let x = gen_fig1b(1.0).unwrap();
        let d = crate::semigroup::dirichlet_form_dense(&x) / 0.25;
        assert!((b.rows[1][1] - d).abs() < 1e-12);
        assert!(figure1_data(1).is_err());
    }
}
