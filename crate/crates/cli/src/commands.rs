use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use qhyper_core::applications::{faber_krahn_check, sz_check};
use qhyper_core::harness::{
    figure1_data, replay, run_lemma_suite_with, run_theorem_suite, SuiteOptions, FD_TOL,
};
use qhyper_core::hyperc::{
    hc_check_with_step, max_r0, r0_bound, solve_exponent, standard_exponent, weak_exponent,
    HcParams, R0_SLACK,
};
use qhyper_core::io::read_operator;
use qhyper_core::report::reports_to_csv;
use qhyper_core::sobolev::lsi_check;
use qhyper_core::spectral::eig_hermitian;
use qhyper_core::{CheckReport, ReportBundle, Table};
use serde_json::{json, Value};

use crate::exit::{CliError, CHECK_FAILED};
use crate::settings::{CliConfig, Format};
use crate::svg::{line_plot, Series};

pub const VERIFY_CHECKS: [&str; 4] = ["lsi", "faber_krahn", "schwartz_zippel", "hc"];
const DEFAULT_VERIFY_GRID: usize = 11;
const DEFAULT_FIGURE_GRID: usize = 200;

fn write_atomic(path: &Path, content: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(content).map_err(|e| CliError::io(path, e))?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        std::fs::set_permissions(tmp.path(), std::fs::Permissions::from_mode(0o644))
            .map_err(|e| CliError::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Writes to `out`, or to stdout when no path is given.
fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, content.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::usage(format!("stdout: {e}")))
        }
    }
}

/// Summary lines go to stdout unless stdout carries the report itself.
fn summary_line(cfg: &CliConfig, line: &str) {
    if cfg.out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn linspace(end: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| {
            if i + 1 == count {
                end
            } else {
                end * i as f64 / (count - 1) as f64
            }
        })
        .collect()
}

fn render_reports(cfg: &CliConfig, bundle: &ReportBundle) -> Result<String, CliError> {
    match cfg.format.unwrap_or(Format::Json) {
        Format::Json => Ok(bundle.to_json()? + "\n"),
        Format::Csv => Ok(reports_to_csv(&bundle.reports)?),
        Format::Svg => Err(CliError::usage("reports support --format json or csv")),
    }
}

fn finish_reports(cfg: &CliConfig, bundle: &ReportBundle) -> Result<u8, CliError> {
    let text = render_reports(cfg, bundle)?;
    emit(cfg.out.as_deref(), &text)?;
    for s in &bundle.summary {
        summary_line(
            cfg,
            &format!("{}: {} passed, {} failed", s.name, s.passed, s.failed),
        );
    }
    let failures: Vec<&CheckReport> = bundle.failures().collect();
    for r in &failures {
        let seed = r
            .instance_seed
            .map(|s| s.to_string())
            .unwrap_or_else(|| "-".into());
        eprintln!(
            "FAIL {} seed={seed} descriptor={} lhs={:e} rhs={:e} gap={:e}",
            r.name, r.instance_descriptor, r.lhs, r.rhs, r.gap
        );
    }
    Ok(if failures.is_empty() { 0 } else { CHECK_FAILED })
}

pub fn verify(cfg: &CliConfig) -> Result<u8, CliError> {
    let input = cfg
        .input
        .as_deref()
        .ok_or_else(|| CliError::usage("verify requires --input"))?;
    let x = read_operator(input)?;
    let psd = eig_hermitian(&x).and_then(|s| s.psd_eigenvalues()).is_ok();
    let checks: Vec<String> = match &cfg.checks {
        Some(list) => {
            for c in list {
                if !VERIFY_CHECKS.contains(&c.as_str()) {
                    return Err(CliError::usage(format!(
                        "unknown check `{c}`; expected one of {}",
                        VERIFY_CHECKS.join(", ")
                    )));
                }
            }
            list.clone()
        }
        None => VERIFY_CHECKS
            .iter()
            .filter(|c| psd || !matches!(**c, "lsi" | "faber_krahn"))
            .map(|c| c.to_string())
            .collect(),
    };
    if cfg.r0.is_some() {
        log::warn!("--r0 is ignored by verify; r0 is computed from the input");
    }

    let mut reports = Vec::new();
    let mut extra = BTreeMap::new();
    for check in &checks {
        match check.as_str() {
            "lsi" => {
                let rep = lsi_check(&x, cfg.tol)?;
                reports.push(rep.to_check("lsi"));
                extra.insert("lsi".to_string(), serde_json::to_value(&rep)?);
            }
            "faber_krahn" => reports.push(faber_krahn_check(&x, cfg.tol)?),
            "schwartz_zippel" => {
                let rep = sz_check(&x, cfg.tol)?;
                reports.push(rep.to_check());
                extra.insert("degree_rank".to_string(), serde_json::to_value(&rep)?);
            }
            _ => {
                let grid = linspace(cfg.horizon, cfg.grid.unwrap_or(DEFAULT_VERIFY_GRID));
                reports.extend(hc_check_with_step(&x, cfg.p0, &grid, cfg.tol, cfg.step)?);
                extra.insert(
                    "hc".to_string(),
                    json!({ "p0": cfg.p0, "step": cfg.step, "grid": grid }),
                );
            }
        }
    }
    extra.insert("checks".to_string(), json!(checks));
    extra.insert("n".to_string(), json!(x.n()));
    let mut bundle = ReportBundle::new(reports);
    bundle.tolerances.insert("tol".into(), cfg.tol);
    bundle.extra = extra;
    finish_reports(cfg, &bundle)
}

pub fn fuzz(cfg: &CliConfig) -> Result<u8, CliError> {
    let opts = SuiteOptions {
        min_n: 1,
        max_n: cfg.max_n,
        tol: cfg.tol,
        fd_tol: FD_TOL,
    };
    let reports = match &cfg.replay {
        Some(descriptor) => replay(descriptor, &opts)?,
        None => {
            let mut all = run_lemma_suite_with(cfg.seed, cfg.trials, &opts)?;
            all.extend(run_theorem_suite(cfg.seed, cfg.trials, &opts)?);
            all.sort_by(|a, b| a.name.cmp(&b.name));
            all
        }
    };
    let mut bundle = ReportBundle::new(reports);
    if cfg.replay.is_none() {
        bundle.seed = Some(cfg.seed);
        bundle.trials = Some(cfg.trials);
    }
    bundle.tolerances.insert("tol".into(), opts.tol);
    bundle.tolerances.insert("fd_tol".into(), opts.fd_tol);
    bundle.extra.insert("max_n".into(), json!(opts.max_n));
    finish_reports(cfg, &bundle)
}

fn table_json(table: &Table) -> Value {
    json!({ "columns": table.columns, "rows": table.rows })
}

fn series<'a>(table: &Table, x: &str, ys: &[(&str, &'a str)]) -> Vec<Series<'a>> {
    let xs = table.column(x).expect("known column");
    ys.iter()
        .map(|(col, label)| Series {
            label,
            points: xs
                .iter()
                .copied()
                .zip(table.column(col).expect("known column"))
                .collect(),
        })
        .collect()
}

pub fn figure1(cfg: &CliConfig) -> Result<u8, CliError> {
    let dir = cfg
        .out
        .as_deref()
        .ok_or_else(|| CliError::usage("figure1 requires --out <directory>"))?;
    let (a, b) = figure1_data(cfg.grid.unwrap_or(DEFAULT_FIGURE_GRID))?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let format = cfg.format.unwrap_or(Format::Csv);
    if format == Format::Json {
        let doc = json!({ "alpha": table_json(&a), "mixture": table_json(&b) });
        let text = serde_json::to_string_pretty(&doc)? + "\n";
        write_atomic(&dir.join("figure1.json"), text.as_bytes())?;
    } else {
        write_atomic(&dir.join("figure1a.csv"), a.to_csv()?.as_bytes())?;
        write_atomic(&dir.join("figure1b.csv"), b.to_csv()?.as_bytes())?;
    }
    if format == Format::Svg {
        let svg_a = line_plot(
            "alpha(xi)",
            "xi",
            "alpha",
            &series(&a, "xi", &[("alpha", "alpha")]),
        );
        let svg_b = line_plot(
            "pure state mixed with I/4, divided by tau(X_s^2)",
            "s",
            "value",
            &series(
                &b,
                "s",
                &[
                    ("dirichlet", "<X, K X>"),
                    ("improved_lsi", "alpha(xi) Ent(X^2)"),
                    ("classical_lsi", "Ent(X^2)/2"),
                ],
            ),
        );
        write_atomic(&dir.join("figure1a.svg"), svg_a.as_bytes())?;
        write_atomic(&dir.join("figure1b.svg"), svg_b.as_bytes())?;
    }
    summary_line(
        cfg,
        &format!("wrote {} rows per table to {}", a.rows.len(), dir.display()),
    );
    Ok(0)
}

pub fn exponent(cfg: &CliConfig) -> Result<u8, CliError> {
    let p0 = cfg.p0;
    let r0 = match (cfg.r0, cfg.input.as_deref()) {
        (Some(r0), _) => r0,
        (None, Some(path)) => max_r0(&read_operator(path)?, p0)?,
        (None, None) => 0.0,
    };
    let bound = r0_bound(p0);
    if r0 > bound + R0_SLACK {
        return Err(CliError::usage(format!(
            "r0 = {r0} exceeds (1 - 1/p0) ln 2 = {bound} for p0 = {p0}; ||X||_p0 <= 2^(n(1-1/p0)) ||X||_1 bounds r0"
        )));
    }
    let params = HcParams::new(p0, r0, cfg.step, cfg.horizon)?;
    let path = solve_exponent(&params)?;
    let mut table = Table::new(["t", "u", "p", "weak", "standard"]);
    let rows: Vec<(f64, f64)> = match cfg.grid {
        Some(g) => linspace(cfg.horizon, g)
            .into_iter()
            .map(|t| Ok((t, path.u_at(4.0 * t)?)))
            .collect::<Result<_, CliError>>()?,
        None => path.samples().iter().map(|s| (s.t, s.u)).collect(),
    };
    for (t, u) in rows {
        table.push(vec![
            t,
            u,
            1.0 + u.exp(),
            weak_exponent(p0, params.r0, t)?,
            standard_exponent(p0, t),
        ]);
    }
    let text = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => table.to_csv()?,
        Format::Json => {
            let doc = json!({
                "p0": p0,
                "r0": params.r0,
                "step": params.step,
                "horizon": params.horizon,
                "table": table_json(&table),
            });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
        Format::Svg => line_plot(
            &format!("exponent schedules, p0 = {p0}, r0 = {:.6}", params.r0),
            "t",
            "p(t)",
            &series(
                &table,
                "t",
                &[("p", "ODE"), ("weak", "weak"), ("standard", "standard")],
            ),
        ),
    };
    emit(cfg.out.as_deref(), &text)?;
    Ok(0)
}
