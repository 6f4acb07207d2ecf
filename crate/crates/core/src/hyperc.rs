//! Improved hypercontractivity for the depolarizing semigroup.
//!
//! If `||X||_{p0} >= e^{n r0} ||X||_1`, then `||Psi_t X||_{p(t)} <= ||X||_{p0}`
//! with `p(t) = 1 + e^{u(4t)}`, where `u' = alpha(r0 (1 + e^{-u}))` and
//! `u(0) = ln(p0 - 1)`. The exponent ODE is integrated with fixed-step RK4
//! in `u`-time `s = 4t`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain_error, Error, Result};
use crate::operator::DenseOperator;
use crate::report::{CheckReport, Table};
use crate::semigroup::depolarize;
use crate::sobolev::{alpha, alpha_unchecked};
use crate::spectral::{abs_operator, eig_hermitian, schatten_from_singular, singular_values};

pub const DEFAULT_STEP: f64 = 1e-3;
/// Slack allowed above `(1 - 1/p0) ln 2` before `r0` is rejected.
pub const R0_SLACK: f64 = 1e-12;
/// Clamping of the `alpha` argument beyond this distance is reported.
pub const CLAMP_WARN: f64 = 1e-9;

/// Largest admissible `r0` for a given `p0`: `(1 - 1/p0) ln 2`.
pub fn r0_bound(p0: f64) -> f64 {
    (1.0 - 1.0 / p0) * LN_2
}

fn check_p0(p0: f64) -> Result<()> {
    if !(p0.is_finite() && p0 > 1.0) {
        return Err(domain_error("p0", p0, "(1, inf)"));
    }
    Ok(())
}

fn check_r0(p0: f64, r0: f64) -> Result<f64> {
    let bound = r0_bound(p0);
    if !(r0 >= 0.0 && r0 <= bound + R0_SLACK) {
        return Err(domain_error(
            "r0",
            r0,
            format!("[0, (1 - 1/p0) ln 2 = {bound}]"),
        ));
    }
    Ok(r0.min(bound))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HcParams {
    pub p0: f64,
    pub r0: f64,
    /// RK4 step in `u`-time.
    pub step: f64,
    /// Largest `t` covered by the path.
    pub horizon: f64,
}

impl HcParams {
    pub fn new(p0: f64, r0: f64, step: f64, horizon: f64) -> Result<Self> {
        check_p0(p0)?;
        let r0 = check_r0(p0, r0)?;
        if !(step.is_finite() && step > 0.0) {
            return Err(domain_error("step", step, "(0, inf)"));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(domain_error("horizon", horizon, "(0, inf)"));
        }
        Ok(Self {
            p0,
            r0,
            step,
            horizon,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentSample {
    pub t: f64,
    /// `u(4t)`
    pub u: f64,
    pub p: f64,
}

/// Sampled solution of the exponent ODE.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentPath {
    params: HcParams,
    samples: Vec<ExponentSample>,
    /// `du/ds` at each sample.
    slopes: Vec<f64>,
    max_clamp_excess: f64,
}

struct Rhs {
    r0: f64,
    max_excess: f64,
}

impl Rhs {
    fn eval(&mut self, u: f64) -> f64 {
        let arg = self.r0 * (1.0 + (-u).exp());
        if arg > LN_2 {
            self.max_excess = self.max_excess.max(arg - LN_2);
        }
        alpha_unchecked(arg.clamp(0.0, LN_2))
    }
}

/// Integrates the exponent ODE on `s in [0, 4 horizon]`.
pub fn solve_exponent(params: &HcParams) -> Result<ExponentPath> {
    let HcParams {
        p0,
        r0,
        step,
        horizon,
    } = *params;
    if !(step > 0.0) {
        return Err(domain_error("step", step, "(0, inf)"));
    }
    let s_end = 4.0 * horizon;
    let count = ((s_end / step) - 1e-9).ceil().max(1.0) as usize;
    let mut rhs = Rhs {
        r0,
        max_excess: 0.0,
    };

    let mut samples = Vec::with_capacity(count + 1);
    let mut slopes = Vec::with_capacity(count + 1);
    let mut u = (p0 - 1.0).ln();
    let mut s = 0.0;
    let mut k1 = rhs.eval(u);
    samples.push(ExponentSample { t: 0.0, u, p: p0 });
    slopes.push(k1);
    for i in 1..=count {
        let s_next = if i == count { s_end } else { i as f64 * step };
        let h = s_next - s;
        let k2 = rhs.eval(u + 0.5 * h * k1);
        let k3 = rhs.eval(u + 0.5 * h * k2);
        let k4 = rhs.eval(u + h * k3);
        u += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s = s_next;
        k1 = rhs.eval(u);
        samples.push(ExponentSample {
            t: s / 4.0,
            u,
            p: 1.0 + u.exp(),
        });
        slopes.push(k1);
    }
    if rhs.max_excess > CLAMP_WARN {
        log::warn!(
            "alpha argument exceeded ln 2 by {:.3e} (r0 = {r0}, p0 = {p0})",
            rhs.max_excess
        );
    }
    Ok(ExponentPath {
        params: *params,
        samples,
        slopes,
        max_clamp_excess: rhs.max_excess,
    })
}

impl ExponentPath {
    pub fn params(&self) -> &HcParams {
        &self.params
    }

    pub fn samples(&self) -> &[ExponentSample] {
        &self.samples
    }

    /// Largest amount by which `r0 (1 + e^{-u})` exceeded `ln 2` before clamping.
    pub fn max_clamp_excess(&self) -> f64 {
        self.max_clamp_excess
    }

    /// `u(s)` by cubic Hermite interpolation between samples.
    pub fn u_at(&self, s: f64) -> Result<f64> {
        let s_end = 4.0 * self.params.horizon;
        if !(0.0..=s_end * (1.0 + 1e-12)).contains(&s) {
            return Err(domain_error("s", s, format!("[0, {s_end}]")));
        }
        let step = self.params.step;
        let last = self.samples.len() - 1;
        let k = ((s / step).floor() as usize).min(last - 1);
        let (s0, s1) = (4.0 * self.samples[k].t, 4.0 * self.samples[k + 1].t);
        let h = s1 - s0;
        let x = ((s - s0) / h).clamp(0.0, 1.0);
        let (u0, u1) = (self.samples[k].u, self.samples[k + 1].u);
        let (d0, d1) = (self.slopes[k], self.slopes[k + 1]);
        let x2 = x * x;
        let x3 = x2 * x;
        Ok((2.0 * x3 - 3.0 * x2 + 1.0) * u0
            + (x3 - 2.0 * x2 + x) * h * d0
            + (-2.0 * x3 + 3.0 * x2) * u1
            + (x3 - x2) * h * d1)
    }

    /// `p(t) = 1 + e^{u(4t)}`.
    pub fn p_at(&self, t: f64) -> Result<f64> {
        Ok(1.0 + self.u_at(4.0 * t)?.exp())
    }

    /// Columns `t, u, p`.
    pub fn to_table(&self) -> Table {
        let mut table = Table::new(["t", "u", "p"]);
        for s in &self.samples {
            table.push(vec![s.t, s.u, s.p]);
        }
        table
    }
}

/// `max(0, ln(||X||_{p0} / ||X||_1) / n)`.
pub fn max_r0(x: &DenseOperator, p0: f64) -> Result<f64> {
    check_p0(p0)?;
    let sv = singular_values(x);
    let one = schatten_from_singular(&sv, 1.0)?;
    if one == 0.0 {
        return Err(Error::ZeroOperator);
    }
    let norm_p0 = schatten_from_singular(&sv, p0)?;
    let r = (norm_p0 / one).ln() / x.n() as f64;
    Ok(r.max(0.0).min(r0_bound(p0)))
}

/// `1 + (p0 - 1) e^{4 alpha(r0) t}`.
pub fn weak_exponent(p0: f64, r0: f64, t: f64) -> Result<f64> {
    check_p0(p0)?;
    let r0 = check_r0(p0, r0)?;
    if !(t >= 0.0) {
        return Err(domain_error("t", t, "[0, inf)"));
    }
    Ok(1.0 + (p0 - 1.0) * (4.0 * alpha(r0)? * t).exp())
}

/// The classical schedule `1 + (p0 - 1) e^{2t}`.
pub fn standard_exponent(p0: f64, t: f64) -> f64 {
    1.0 + (p0 - 1.0) * (2.0 * t).exp()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Grid("empty".into()));
    }
    if let Some(bad) = grid.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::Grid(format!(
            "time {bad} is not a finite nonnegative number"
        )));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Grid("times are not sorted".into()));
    }
    Ok(())
}

fn psd_spectrum_ok(x: &DenseOperator) -> bool {
    x.hermitian_hint() != Some(false) && eig_hermitian(x).and_then(|s| s.psd_eigenvalues()).is_ok()
}

/// Checks `||Psi_t X||_{p(t)} <= ||X||_{p0}` on every time in `t_grid`.
pub fn hc_check(x: &DenseOperator, p0: f64, t_grid: &[f64], tol: f64) -> Result<Vec<CheckReport>> {
    hc_check_with_step(x, p0, t_grid, tol, DEFAULT_STEP)
}

/// [`hc_check`] with an explicit ODE step.
///
/// For PSD input one report per time is produced (`hc`). Otherwise the
/// check also runs on `Z = |X|` and `Z' = |X^dagger|`, and the bound
/// `||Psi_t X||_q <= ||Psi_t Z'||_q^{1/2} ||Psi_t Z||_q^{1/2}` is verified
/// separately.
pub fn hc_check_with_step(
    x: &DenseOperator,
    p0: f64,
    t_grid: &[f64],
    tol: f64,
    step: f64,
) -> Result<Vec<CheckReport>> {
    check_grid(t_grid)?;
    let r0 = max_r0(x, p0)?;
    let horizon = t_grid.last().copied().unwrap_or(0.0).max(step);
    let path = solve_exponent(&HcParams::new(p0, r0, step, horizon)?)?;
    let target = schatten_from_singular(&singular_values(x), p0)?;

    let general = if psd_spectrum_ok(x) {
        None
    } else {
        Some((abs_operator(x), abs_operator(&x.adjoint())))
    };

    let mut reports = Vec::new();
    for &t in t_grid {
        let p = path.p_at(t)?;
        let descriptor = format!("t={t};p={p};p0={p0};r0={r0}");
        let lhs = schatten_from_singular(&singular_values(&depolarize(x, t)?), p)?;
        reports
            .push(CheckReport::inequality("hc", lhs, target, tol).with_instance(None, &descriptor));
        if let Some((z, z_adj)) = &general {
            let nz = schatten_from_singular(&singular_values(&depolarize(z, t)?), p)?;
            let nz_adj = schatten_from_singular(&singular_values(&depolarize(z_adj, t)?), p)?;
            let z_target = schatten_from_singular(&singular_values(z), p0)?;
            let z_adj_target = schatten_from_singular(&singular_values(z_adj), p0)?;
            reports.push(
                CheckReport::inequality("hc_abs", nz, z_target, tol)
                    .with_instance(None, &descriptor),
            );
            reports.push(
                CheckReport::inequality("hc_abs_adjoint", nz_adj, z_adj_target, tol)
                    .with_instance(None, &descriptor),
            );
            reports.push(
                CheckReport::inequality("hc_factorization", lhs, (nz * nz_adj).sqrt(), tol)
                    .with_instance(None, &descriptor),
            );
        }
    }
    Ok(reports)
}
