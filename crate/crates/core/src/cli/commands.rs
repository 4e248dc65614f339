//! The `verify`, `simulate` and `sweep` subcommands.

use std::fmt::Write as _;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::mixture::MomentSet;
use crate::solver::{default_window, estimate_decay, non_increasing, run, sweep_rates, SweepRow, TimeSeries};

use super::config::{parse_config, parse_config_in, ConfigError, RunConfig};
use super::io::{provenance_block, write_rates_csv, write_series_csv, write_text};
use super::verify::{run_suite, VerifyReport};
use crate::mixture::Regime;

/// Process exit statuses of the command-line tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    CheckFailure = 1,
    InvalidConfig = 2,
    SolverAbort = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// What a subcommand did.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutcome {
    pub status: ExitStatus,
    pub files: Vec<PathBuf>,
    /// One-line summary for the terminal.
    pub message: String,
}

/// Parses a config for the given command. With `kernel_only` the degenerate
/// exchange corners `delta = 1`, `omega = 1` are accepted.
pub fn load_config(text: &str, kernel_only: bool) -> std::result::Result<RunConfig, ConfigError> {
    match parse_config_in(text, Regime::KernelStudy) {
        Ok(mut cfg) if kernel_only || cfg.verify.kernel_only => {
            cfg.verify.kernel_only = true;
            Ok(cfg)
        }
        Ok(_) => parse_config(text),
        Err(e) => Err(e),
    }
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<(CommandOutcome, VerifyReport)> {
    let report = run_suite(&cfg.mixture, &cfg.verify);
    let mut text = provenance_block(cfg, "verify");
    if cfg.verify.fault != crate::mixture::Fault::None {
        let _ = writeln!(text, "# injected fault: {}", cfg.verify.fault.name());
    }
    text.push('\n');
    text.push_str(&report.table());
    write_text(&cfg.output, "verify_report.txt", &text)?;
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let (status, message) = if failed.is_empty() {
        (ExitStatus::Success, format!("all {} checks passed", report.checks.len()))
    } else {
        (ExitStatus::CheckFailure, format!("{} check(s) failed: {}", failed.len(), failed.join(", ")))
    };
    Ok((
        CommandOutcome {
            status,
            files: vec![cfg.output.join("verify_report.txt")],
            message,
        },
        report,
    ))
}

fn moments_block(m: &MomentSet) -> String {
    format!(
        "n1 = {:?}\nn2 = {:?}\nU1 = {:?}\nU2 = {:?}\nT1 = {:?}\nT2 = {:?}\nT12 = {:?}\nT21 = {:?}\n",
        m.s1.n, m.s2.n, m.s1.u, m.s2.u, m.s1.t, m.s2.t, m.t12, m.t21
    )
}

fn series_summary(cfg: &RunConfig, ts: &TimeSeries) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "records = {}", ts.len());
    if let Some(t) = ts.times.last() {
        let _ = writeln!(s, "t_final = {t:?}");
    }
    if let (Some(first), Some(last)) = (ts.totals.first(), ts.totals.last()) {
        let d = last.drift_from(first, &cfg.mixture);
        let _ = writeln!(s, "drift mass1 = {:e}", d.mass1);
        let _ = writeln!(s, "drift mass2 = {:e}", d.mass2);
        let _ = writeln!(s, "drift momentum = {:e}", d.momentum);
        let _ = writeln!(s, "drift energy = {:e}", d.energy);
        let _ = writeln!(s, "max drift over run = {:e}", ts.max_drift());
    }
    if let (Some(e0), Some(e1)) = (ts.energy.first(), ts.energy.last()) {
        let _ = writeln!(s, "energy initial = {e0:e}, final = {e1:e}");
    }
    let min_ratio = ts.min_ratio.iter().copied().fold(f64::INFINITY, f64::min);
    let _ = writeln!(s, "min F/max F over run = {min_ratio:e}");
    if let Some(m) = ts.last_moments() {
        s.push_str("terminal moments:\n");
        s.push_str(&moments_block(m));
    }
    s
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<(CommandOutcome, TimeSeries)> {
    let grid = cfg.grid.phase_grid()?;
    let f0 = cfg.scenario.initial_state(&cfg.mixture, &grid, cfg.solver.equilibrium_mode)?;
    std::fs::create_dir_all(&cfg.output)?;
    let (ts, abort) = match run(&f0, &cfg.mixture, &grid, &cfg.solver) {
        Ok(ts) => (ts, None),
        Err(a) => {
            let a = *a;
            let msg = format!("run aborted at t = {}: {}", a.time, a.error);
            (a.series, Some(msg))
        }
    };
    let csv_path = cfg.output.join("series.csv");
    write_series_csv(&ts, BufWriter::new(File::create(&csv_path)?))?;
    let mut text = provenance_block(cfg, "simulate");
    text.push('\n');
    if let Some(msg) = &abort {
        let _ = writeln!(text, "status = aborted\nreason = {msg}");
    } else {
        text.push_str("status = completed\n");
    }
    text.push_str(&series_summary(cfg, &ts));
    write_text(&cfg.output, "summary.txt", &text)?;
    let files = vec![csv_path, cfg.output.join("summary.txt")];
    let outcome = match abort {
        Some(msg) => CommandOutcome {
            status: ExitStatus::SolverAbort,
            files,
            message: msg,
        },
        None => CommandOutcome {
            status: ExitStatus::Success,
            files,
            message: format!("{} records, max conservation drift {:e}", ts.len(), ts.max_drift()),
        },
    };
    Ok((outcome, ts))
}

/// `(ok, description)` of the monotonicity verdict: rates non-increasing in
/// `delta` at each fixed `omega` and in `omega` at each fixed `delta`.
pub fn monotonicity_verdict(rows: &[SweepRow], rel_tol: f64) -> (bool, String) {
    let mut ok = true;
    let mut s = String::new();
    let series = |fixed_delta: bool, key: f64| -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| if fixed_delta { r.delta == key } else { r.omega == key })
            .filter_map(|r| r.report.as_ref().map(|d| (if fixed_delta { r.omega } else { r.delta }, d.rate)))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    };
    let keys = |f: fn(&SweepRow) -> f64| {
        let mut k: Vec<f64> = rows.iter().map(f).collect();
        k.sort_by(f64::total_cmp);
        k.dedup();
        k
    };
    let omegas = keys(|r| r.omega);
    let deltas = keys(|r| r.delta);
    for (fixed_delta, keys, var) in [(false, &omegas, "delta"), (true, &deltas, "omega")] {
        for &k in keys {
            let v = series(fixed_delta, k);
            if v.len() < 2 {
                continue;
            }
            let rates: Vec<f64> = v.iter().map(|x| x.1).collect();
            let good = non_increasing(&rates, rel_tol);
            ok &= good;
            let fixed = if fixed_delta { "delta" } else { "omega" };
            let _ = writeln!(
                s,
                "rate vs {var} at {fixed} = {k}: {} ({})",
                if good { "non-increasing" } else { "INCREASING" },
                v.iter().map(|(x, r)| format!("{x}:{r:.6}")).collect::<Vec<_>>().join(" ")
            );
        }
    }
    if s.is_empty() {
        s.push_str("no parameter line with two or more admissible points\n");
    }
    (ok, s)
}

pub fn cmd_sweep(cfg: &RunConfig, delta_list: &[f64], omega_list: &[f64]) -> Result<(CommandOutcome, Vec<SweepRow>)> {
    if delta_list.is_empty() || omega_list.is_empty() {
        return Err(Error::InvalidInput("delta and omega lists must be nonempty".into()));
    }
    let grid = cfg.grid.phase_grid()?;
    let rows = sweep_rates(
        &cfg.mixture,
        &grid,
        &cfg.solver,
        delta_list,
        omega_list,
        cfg.scenario.amplitude,
        &cfg.scenario,
    )?;
    std::fs::create_dir_all(&cfg.output)?;
    let csv_path = cfg.output.join("rates.csv");
    write_rates_csv(&rows, BufWriter::new(File::create(&csv_path)?))?;

    let (ok, verdict) = monotonicity_verdict(&rows, 0.02);
    let mut text = provenance_block(cfg, "sweep");
    text.push('\n');
    let (lo, hi) = default_window(cfg.solver.t_max);
    let _ = writeln!(text, "fit window = [{lo}, {hi}]");
    text.push_str("rates are fitted to the zeroth-order perturbation energy |(F - G)/sqrt(G)|^2;\n");
    text.push_str("the monotonicity statement concerns the full decay estimate, so this verdict is an empirical proxy\n");
    for r in &rows {
        match (&r.report, &r.reason) {
            (Some(d), _) => {
                let _ = writeln!(text, "delta = {}, omega = {}: rate = {:.6}, r2 = {:.6}", r.delta, r.omega, d.rate, d.r_squared);
            }
            (None, reason) => {
                let _ = writeln!(
                    text,
                    "delta = {}, omega = {}: inadmissible ({})",
                    r.delta,
                    r.omega,
                    reason.as_deref().unwrap_or("")
                );
            }
        }
    }
    let _ = writeln!(text, "monotonicity (2% tolerance): {}", if ok { "PASS" } else { "FAIL" });
    text.push_str(&verdict);
    write_text(&cfg.output, "summary.txt", &text)?;
    Ok((
        CommandOutcome {
            status: if ok { ExitStatus::Success } else { ExitStatus::CheckFailure },
            files: vec![csv_path, cfg.output.join("summary.txt")],
            message: format!(
                "{} pairs ({} admissible), monotonicity {}",
                rows.len(),
                rows.iter().filter(|r| r.admissible).count(),
                if ok { "holds" } else { "violated" }
            ),
        },
        rows,
    ))
}

/// Decay fit of a single simulated series on the default window.
pub fn fit_series(cfg: &RunConfig, ts: &TimeSeries) -> Result<crate::solver::DecayReport> {
    estimate_decay(ts, default_window(cfg.solver.t_max))
}
