//! Acceptance criteria 1-9, one PASS/FAIL line each.

use std::time::Instant;

use mixbgk::cli::verify::{
    asymmetric_reference, check_dissipation, check_gamma_scaling, check_jacobian, check_kernel_at, check_mixing,
    check_taylor,
};
use mixbgk::cli::VerifyConfig;
use mixbgk::grid::{PhaseGrid, SpatialGrid, VelocityGrid};
use mixbgk::linear::verify_mix_derivatives;
use mixbgk::mixture::{EquilibriumMode, Fault, MixtureParams};
use mixbgk::solver::{
    default_window, equilibrium_from_totals, estimate_decay, non_increasing, run, sweep_rates, Scenario, ScenarioKind,
    SolverConfig, TimeSeries, NEGATIVITY_TOL,
};

struct Outcome {
    id: u32,
    title: &'static str,
    passed: bool,
    detail: String,
    seconds: f64,
    budget: f64,
}

fn criterion(id: u32, title: &'static str, budget: f64, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let t0 = Instant::now();
    let (passed, detail) = f();
    let seconds = t0.elapsed().as_secs_f64();
    Outcome {
        id,
        title,
        passed: passed && seconds < budget,
        detail,
        seconds,
        budget,
    }
}

fn unequal() -> MixtureParams {
    MixtureParams {
        m1: 2.0,
        m2: 1.0,
        n10: 1.0,
        n20: 1.5,
        delta: 0.6,
        omega: 0.4,
        gamma: 0.05,
    }
}

fn homogeneous(n: usize) -> PhaseGrid {
    PhaseGrid::homogeneous(VelocityGrid::new(6.0, n).unwrap())
}

fn min_ratio(ts: &TimeSeries) -> f64 {
    ts.min_ratio.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Rate of `|U1 - U2|` from the closed moment system, integrated with RK4.
fn momentum_gap_oracle(p: &MixtureParams, t_end: f64) -> f64 {
    let r = p.m1 / p.m2;
    let rhs = |u: [f64; 2]| {
        let u12 = u[1] + p.delta * (u[0] - u[1]);
        let u21 = u[1] + r * (1.0 - p.delta) * (u[0] - u[1]);
        [p.n20 * (u12 - u[0]), p.n10 * (u21 - u[1])]
    };
    let h = 1e-3;
    let steps = (t_end / h).round() as usize;
    let mut u = [1.0, -1.0];
    for _ in 0..steps {
        let add = |a: [f64; 2], b: [f64; 2], s: f64| [a[0] + s * b[0], a[1] + s * b[1]];
        let k1 = rhs(u);
        let k2 = rhs(add(u, k1, h / 2.0));
        let k3 = rhs(add(u, k2, h / 2.0));
        let k4 = rhs(add(u, k3, h));
        u = [
            u[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            u[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
    }
    -((u[0] - u[1]) / 2.0).ln() / t_end
}

fn main() {
    let vcfg = VerifyConfig::default();
    let mut positivity: Vec<(String, f64)> = Vec::new();
    let mut out = Vec::new();

    out.push(criterion(1, "mixing-rule antisymmetries", 1.0, || {
        let (m, e, t) = check_mixing(10_000, 1, Fault::None);
        (
            m.passed && e.passed && t.passed,
            format!("momentum {:.2e}, energy {:.2e} (tol 1e-12, 10^4 draws), min T12/T21 {:.3}", m.measured, e.measured, t.measured),
        )
    }));

    out.push(criterion(2, "derivative and jacobian lemmas", 10.0, || {
        let mut worst = 0.0_f64;
        for p in [MixtureParams::default(), asymmetric_reference(), unequal()] {
            let g = VelocityGrid::new(8.0 / p.m2.sqrt(), 24).unwrap();
            for r in verify_mix_derivatives(&p, &g, 1e-5).unwrap() {
                worst = worst.max(r.rel_error);
            }
        }
        let j = check_jacobian(&vcfg).unwrap();
        (
            worst <= 1e-6 && j.passed,
            format!("derivative rel err {worst:.2e} (tol 1e-6, 24^3, step 1e-5); {}", j.detail),
        )
    }));

    out.push(criterion(3, "linearization order", 30.0, || {
        let mut slope = f64::INFINITY;
        let mut ratio = 0.0_f64;
        for p in [asymmetric_reference(), unequal()] {
            slope = slope.min(check_taylor(&p, 3).unwrap().measured);
            ratio = ratio.max(check_gamma_scaling(&p, 32, 5).unwrap().measured);
        }
        (slope >= 1.9 && ratio <= 1.2, format!("min fitted order {slope:.4} (>= 1.9), Gamma ratio {ratio:.4} (<= 1.2)"))
    }));

    out.push(criterion(4, "dissipation inequality", 60.0, || {
        let cfg = VerifyConfig {
            draws: 1000,
            dissipation_n_per_axis: 16,
            ..vcfg
        };
        let (total, species, exchange) = check_dissipation(&cfg).unwrap();
        (
            total.passed && species.passed && exchange.passed,
            format!(
                "min margin/|f|^2 {:.3e}, species-part residual {:.2e}, exchange-part min slack {:.3e} (1000 draws, 16^3)",
                total.measured, species.measured, exchange.measured
            ),
        )
    }));

    out.push(criterion(5, "kernel dimensions", 30.0, || {
        let p = MixtureParams {
            gamma: 0.0,
            ..unequal()
        };
        let mut dims = Vec::new();
        let mut ok = true;
        for (d, o) in [(0.5, 0.5), (1.0, 0.5), (0.5, 1.0), (1.0, 1.0)] {
            let r = check_kernel_at(&p, d, o).unwrap();
            ok &= r.passed;
            dims.push(r.measured as usize);
        }
        (ok, format!("dimensions {dims:?}, expected [6, 9, 7, 10]"))
    }));

    out.push(criterion(6, "conservation", 300.0, || {
        let p = unequal();
        let grid = homogeneous(16);
        let f0 = Scenario::new(ScenarioKind::TemperatureGap, 0.2, 0)
            .initial_state(&p, &grid, EquilibriumMode::MomentMatched)
            .unwrap();
        let cfg = SolverConfig {
            dt: 0.01,
            t_max: 10.0,
            record_every: 10,
            ..Default::default()
        };
        let ts = run(&f0, &p, &grid, &cfg).unwrap();
        let hom = ts.max_drift();
        positivity.push(("homogeneous 1000 steps".into(), min_ratio(&ts)));

        let grid = PhaseGrid::new(SpatialGrid::periodic(32, 1.0).unwrap(), VelocityGrid::new(6.0, 16).unwrap());
        let f0 = Scenario::new(ScenarioKind::RandomSmooth, 0.05, 4)
            .initial_state(&p, &grid, EquilibriumMode::MomentMatched)
            .unwrap();
        let cfg = SolverConfig {
            dt: 0.02,
            t_max: 2.0,
            record_every: 10,
            ..Default::default()
        };
        let ts = run(&f0, &p, &grid, &cfg).unwrap();
        let tr = ts.max_drift();
        positivity.push(("transport Nx=32".into(), min_ratio(&ts)));
        (
            hom <= 1e-10 && tr <= 1e-6,
            format!("homogeneous drift {hom:.2e} (<= 1e-10, 1000 steps), transport drift {tr:.2e} (<= 1e-6, Nx=32, 16^3)"),
        )
    }));

    out.push(criterion(7, "relaxation fixed point", 240.0, || {
        let p = unequal();
        let grid = homogeneous(16);
        let cfg = SolverConfig {
            t_max: 20.0,
            record_every: 20,
            ..Default::default()
        };
        let mut worst = 0.0_f64;
        for (kind, eps) in [(ScenarioKind::TemperatureGap, 0.2), (ScenarioKind::CounterFlow, 0.3)] {
            let f0 = Scenario::new(kind, eps, 0).initial_state(&p, &grid, EquilibriumMode::MomentMatched).unwrap();
            let ts = run(&f0, &p, &grid, &cfg).unwrap();
            let want = equilibrium_from_totals(&ts.totals[0], &p, &grid).unwrap();
            let m = ts.last_moments().unwrap();
            for s in [&m.s1, &m.s2] {
                worst = worst.max((s.t - want.t).abs());
                for i in 0..3 {
                    worst = worst.max((s.u[i] - want.u[i]).abs());
                }
            }
            positivity.push((format!("{} to equilibrium", kind.name()), min_ratio(&ts)));
        }
        (worst <= 1e-6, format!("max |(U, T) - (U_inf, T_inf)| = {worst:.2e} (<= 1e-6)"))
    }));

    out.push(criterion(8, "decay-rate monotonicity", 600.0, || {
        let p = MixtureParams::default();
        let grid = homogeneous(12);
        let cfg = SolverConfig {
            t_max: 20.0,
            ..Default::default()
        };
        let sc = Scenario::new(ScenarioKind::RandomSmooth, 1e-3, 1);
        let list = [0.1, 0.5, 0.9];
        let by_delta = sweep_rates(&p, &grid, &cfg, &list, &[0.5], 1e-3, &sc).unwrap();
        let by_omega = sweep_rates(&p, &grid, &cfg, &[0.5], &list, 1e-3, &sc).unwrap();
        let rates = |rows: &[mixbgk::solver::SweepRow]| -> Vec<f64> {
            rows.iter().map(|r| r.report.as_ref().map_or(f64::NAN, |d| d.rate)).collect()
        };
        let r2 = by_delta
            .iter()
            .chain(&by_omega)
            .map(|r| r.report.as_ref().map_or(0.0, |d| d.r_squared))
            .fold(1.0_f64, f64::min);
        let (rd, ro) = (rates(&by_delta), rates(&by_omega));
        let mono = non_increasing(&rd, 0.02) && non_increasing(&ro, 0.02);

        let q = unequal();
        let g16 = homogeneous(16);
        let mcfg = SolverConfig {
            t_max: 8.0,
            ..Default::default()
        };
        let f0 = Scenario::new(ScenarioKind::CounterFlow, 1e-3, 0)
            .initial_state(&q, &g16, EquilibriumMode::MomentMatched)
            .unwrap();
        let ts = run(&f0, &q, &g16, &mcfg).unwrap();
        positivity.push(("momentum gap".into(), min_ratio(&ts)));
        let fit = estimate_decay(&ts, default_window(mcfg.t_max)).unwrap();
        let oracle = momentum_gap_oracle(&q, 6.4);
        let rel = (fit.rate - oracle).abs() / oracle;
        (
            mono && r2 >= 0.999 && rel <= 0.01,
            format!(
                "rates vs delta {rd:.4?}, vs omega {ro:.4?} (2%), min r2 {r2:.6}; momentum gap {:.5} vs ODE {oracle:.5} (rel {rel:.1e})",
                fit.rate
            ),
        )
    }));

    out.push(criterion(9, "positivity", 1.0, || {
        let worst = positivity.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
        (
            !positivity.is_empty() && worst >= -NEGATIVITY_TOL,
            format!("min F/max F over {} acceptance runs = {worst:.3e} (>= -1e-12)", positivity.len()),
        )
    }));

    let mut failures = 0;
    for o in &out {
        if !o.passed {
            failures += 1;
        }
        println!(
            "{} criterion {}: {} [{:.2} s / {} s] {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.id,
            o.title,
            o.seconds,
            o.budget,
            o.detail
        );
    }
    println!("acceptance: {}/{} criteria passed", out.len() - failures, out.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
