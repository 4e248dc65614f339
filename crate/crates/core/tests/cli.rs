use mixbgk::cli::*;
use mixbgk::mixture::{EquilibriumMode, Fault, MixtureParams, Regime};
use mixbgk::solver::{estimate_decay, run, ScenarioKind, Splitting};
use proptest::prelude::*;

#[test]
fn minimal_document_gives_defaults() {
    let cfg = parse_config("[mixture]\nm1 = 1\n").unwrap();
    assert_eq!(cfg, RunConfig::default());
    assert_eq!(parse_config("").unwrap(), RunConfig::default());
    let p = cfg.mixture;
    assert_eq!((p.m1, p.m2, p.n10, p.n20, p.delta, p.omega, p.gamma), (1.0, 1.0, 1.0, 1.0, 0.5, 0.5, 0.0));
    assert_eq!(cfg.grid.v_max, 6.0);
}

#[test]
fn full_document_is_read() {
    let text = "# comment line\n\
        [mixture]\nm1 = 2  # heavy\nm2 = 1\nn10 = 1.5\nn20 = 0.5\ndelta = 0.6\nomega = 0.2\ngamma = 0.01\n\
        [grid]\ndim = 1\nn_cells = 16\nlength = 6.25\nv_max = auto\nn_per_axis = 12\n\
        [solver]\ndt = 0.02\nt_max = 3\nsplitting = lie\nequilibrium_mode = sampled\nrecord_every = 5\nrate_multiplier = 2\n\
        [scenario]\nname = counter-flow\namplitude = 0.01\nseed = 9\n\
        [output]\ndir = \"runs/a b\"\n\
        [verify]\ndraws = 10\nfault = flip-gamma-t21\nkernel_only = true\n";
    let cfg = parse_config(text).unwrap();
    assert_eq!(cfg.mixture.m1, 2.0);
    assert_eq!(cfg.grid.n_cells, 16);
    assert_eq!(cfg.grid.v_max, 6.0);
    assert_eq!(cfg.solver.splitting, Splitting::Lie);
    assert_eq!(cfg.solver.equilibrium_mode, EquilibriumMode::Sampled);
    assert_eq!(cfg.solver.rate_multiplier, 2.0);
    assert_eq!(cfg.scenario.kind, ScenarioKind::CounterFlow);
    assert_eq!(cfg.output, std::path::PathBuf::from("runs/a b"));
    assert_eq!(cfg.verify.draws, 10);
    assert_eq!(cfg.verify.fault, Fault::FlipGammaT21);
    assert!(cfg.verify.kernel_only);
}

#[test]
fn delta_below_bound_cites_one_third() {
    let e = parse_config("[mixture]\nm1 = 2\nm2 = 1\ndelta = 0.2\n").unwrap_err();
    assert_eq!(e.line, Some(4));
    assert_eq!(e.key.as_deref(), Some("mixture.delta"));
    assert!(e.message.contains("lower bound 0.333333"), "{e}");
    assert!(e.message.contains("(m1/m2 - 1)/(1 + m1/m2) <= delta < 1"), "{e}");
}

#[test]
fn gamma_above_bound_cites_gamma_constraint() {
    let e = parse_config("[mixture]\ngamma = 0.5\n").unwrap_err();
    assert_eq!(e.key.as_deref(), Some("mixture.gamma"));
    assert!(e.message.contains("upper bound 0.1666"), "{e}");
    assert!(e.message.contains("0 <= gamma <="), "{e}");
    // The closed upper bound itself is admissible.
    let b = MixtureParams::default().gamma_upper_bound();
    assert!(parse_config(&format!("[mixture]\ngamma = {b:?}\n")).is_ok());
}

#[test]
fn unknown_names_get_suggestions() {
    let e = parse_config("[mixture]\ngama = 0.1\n").unwrap_err();
    assert_eq!(e.line, Some(2));
    assert_eq!(e.suggestion.as_deref(), Some("gamma"));
    let e = parse_config("[mixtrue]\n").unwrap_err();
    assert_eq!(e.suggestion.as_deref(), Some("[mixture]"));
    let e = parse_config("[scenario]\nname = temperature_gap\n").unwrap_err();
    assert_eq!(e.suggestion.as_deref(), Some("temperature-gap"));
    assert!(e.to_string().contains("did you mean"));
}

#[test]
fn malformed_documents_are_rejected() {
    for (doc, needle) in [
        ("m1 = 1\n", "before any [section]"),
        ("[mixture]\nm1\n", "expected `key = value`"),
        ("[mixture]\nm1 = 1\nm1 = 2\n", "duplicate key"),
        ("[mixture]\nm1 = abc\n", "finite number"),
        ("[mixture]\nm1 = inf\n", "finite number"),
        ("[mixture\n", "malformed section"),
        ("[mixture]\nm1 = 0.5\n", "m1 >= m2 > 0"),
        ("[mixture]\nomega = 1\n", "0 <= omega < 1"),
        ("[grid]\nn_per_axis = 7\n", "even"),
        ("[grid]\ndim = 0\nn_cells = 4\n", "one cell"),
        ("[grid]\ndim = 2\n", "dim must be"),
        ("[solver]\ndt = 0\n", "solver.dt"),
        ("[scenario]\namplitude = 0\n", "positive"),
        ("[scenario]\nname = temperature-gap\namplitude = 1.5\n", "amplitude < 1"),
        ("[verify]\nfd_step = 0.1\n", "fd_step"),
        ("[verify]\nkernel_only = yes\n", "true or false"),
    ] {
        let e = parse_config(doc).expect_err(doc);
        assert!(e.to_string().contains(needle), "{doc:?}: {e}");
    }
}

#[test]
fn kernel_study_regime_admits_the_corners() {
    let doc = "[mixture]\ndelta = 1\nomega = 1\n";
    assert!(parse_config(doc).is_err());
    let cfg = parse_config_in(doc, Regime::KernelStudy).unwrap();
    assert_eq!(cfg.regime, Regime::KernelStudy);
    assert!(load_config(doc, false).is_err());
    assert!(load_config(doc, true).unwrap().verify.kernel_only);
}

#[test]
fn lists_parse() {
    assert_eq!(parse_list("0.1,0.5, 0.9").unwrap(), vec![0.1, 0.5, 0.9]);
    assert_eq!(parse_list(" 1e-3 ").unwrap(), vec![1e-3]);
    assert!(parse_list("").is_err());
    assert!(parse_list("0.1,,0.2").is_err());
    assert!(parse_list("0.1,x").is_err());
    assert!(parse_list("nan").is_err());
}

fn arb_config() -> impl Strategy<Value = RunConfig> {
    (
        (0.5f64..4.0, 1.0f64..3.0, 0.1f64..3.0, 0.1f64..3.0, 0.0f64..1.0, 0.0f64..0.999, 0.0f64..=1.0),
        (any::<bool>(), 1usize..64, 0.1f64..100.0, 0.1f64..20.0, 1usize..20),
        (1e-4f64..0.5, 1.0f64..50.0, any::<bool>(), any::<bool>(), 1usize..10, 0.1f64..10.0),
        (0usize..5, 1e-6f64..0.99, any::<u64>()),
        (any::<u64>(), 1usize..5000, 2usize..20, any::<bool>(), any::<bool>()),
    )
        .prop_map(|(m, g, s, sc, v)| {
            let mut cfg = RunConfig::default();
            let (m2, ratio, n10, n20, dfrac, omega, gfrac) = m;
            let mut p = MixtureParams {
                m1: m2 * ratio,
                m2,
                n10,
                n20,
                delta: 0.0,
                omega,
                gamma: 0.0,
            };
            let lo = p.delta_lower_bound();
            p.delta = lo + dfrac * (0.999 - lo);
            p.gamma = gfrac * p.gamma_upper_bound().max(0.0);
            cfg.mixture = p;
            let (one_d, cells, length, vmax, half_n) = g;
            cfg.grid.dim = one_d as usize;
            cfg.grid.n_cells = if one_d { cells } else { 1 };
            cfg.grid.length = length;
            cfg.grid.v_max = vmax;
            cfg.grid.n_per_axis = 2 * half_n;
            let (dt, t_max, lie, sampled, rec, mult) = s;
            cfg.solver.dt = dt;
            cfg.solver.t_max = t_max;
            cfg.solver.splitting = if lie { Splitting::Lie } else { Splitting::Strang };
            cfg.solver.equilibrium_mode = if sampled { EquilibriumMode::Sampled } else { EquilibriumMode::MomentMatched };
            cfg.solver.record_every = rec;
            cfg.solver.rate_multiplier = mult;
            let (kind, amp, seed) = sc;
            cfg.scenario.kind = ScenarioKind::ALL[kind];
            cfg.scenario.amplitude = amp;
            cfg.scenario.seed = seed;
            let (vseed, draws, half, kernel_only, fault) = v;
            cfg.verify.seed = vseed;
            cfg.verify.draws = draws;
            cfg.verify.n_per_axis = 2 * half;
            cfg.verify.kernel_only = kernel_only;
            cfg.verify.fault = if fault { Fault::FlipGammaT21 } else { Fault::None };
            cfg.output = format!("out/run-{seed}").into();
            cfg
        })
}

proptest! {
    #[test]
    fn emit_then_parse_is_identity(cfg in arb_config()) {
        let text = emit_config(&cfg);
        let back = parse_config(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &cfg);
        // Also through the provenance block.
        let block = provenance_block(&cfg, "test");
        prop_assert_eq!(parse_config(&config_from_provenance(&block)).unwrap(), cfg);
    }

    #[test]
    fn parser_never_panics(text in "(\\[[a-z]{0,8}\\]\n|[a-z_]{0,10} ?= ?[-0-9.e a-z\"]{0,12}\n|#[^\n]{0,10}\n){0,12}") {
        let _ = parse_config(&text);
    }
}

#[test]
fn series_csv_round_trips() {
    let cfg = parse_config("[grid]\nn_per_axis = 8\n[solver]\nt_max = 1\n[scenario]\nname = temperature-gap\namplitude = 0.1\n").unwrap();
    let grid = cfg.grid.phase_grid().unwrap();
    let f0 = cfg.scenario.initial_state(&cfg.mixture, &grid, cfg.solver.equilibrium_mode).unwrap();
    let ts = run(&f0, &cfg.mixture, &grid, &cfg.solver).unwrap();
    let mut buf = Vec::new();
    write_series_csv(&ts, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with(&SERIES_HEADER.join(",")));
    assert!(!text.contains('\r'));
    let table = read_series_csv(&buf[..]).unwrap();
    assert_eq!(table.rows.len(), ts.len());
    assert_eq!(table.column("t").unwrap(), ts.times);
    assert_eq!(table.column("energy").unwrap(), ts.energy);
    assert!(table.column("nope").is_none());

    assert!(read_series_csv("a,b\n1,2\n".as_bytes()).is_err());
    let mut bad = SERIES_HEADER.join(",");
    bad.push_str("\n1,2\n");
    assert!(read_series_csv(bad.as_bytes()).is_err());
}

#[test]
fn simulate_equilibrium_writes_flat_series() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_config("[grid]\nn_per_axis = 8\n[solver]\nt_max = 2\n[scenario]\nname = equilibrium\n").unwrap();
    cfg.output = dir.path().to_path_buf();
    let (out, _) = cmd_simulate(&cfg).unwrap();
    assert_eq!(out.status, ExitStatus::Success);
    let table = read_series_csv(std::fs::File::open(dir.path().join("series.csv")).unwrap()).unwrap();
    assert!(table.column("energy").unwrap().iter().all(|&e| e <= 1e-20));
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("status = completed"));
    assert_eq!(parse_config(&config_from_provenance(&summary)).unwrap(), cfg);
}

#[test]
fn simulate_temperature_gap_reaches_common_temperature() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_config(
        "[mixture]\nm1 = 2\nn10 = 1.2\nn20 = 0.8\n[grid]\nn_per_axis = 16\n[solver]\nt_max = 20\nrecord_every = 10\n\
         [scenario]\nname = temperature-gap\namplitude = 0.1\n",
    )
    .unwrap();
    cfg.output = dir.path().to_path_buf();
    cmd_simulate(&cfg).unwrap();
    let table = read_series_csv(std::fs::File::open(dir.path().join("series.csv")).unwrap()).unwrap();
    // Equal velocities at rest: the common temperature is the density-weighted mean.
    let t_inf = (1.2 * 1.1 + 0.8 * 0.9) / 2.0;
    let last = table.rows.last().unwrap();
    let (t1, t2) = (last[SeriesTable::column_index("T1").unwrap()], last[SeriesTable::column_index("T2").unwrap()]);
    assert!((t1 - t_inf).abs() < 1e-6 && (t2 - t_inf).abs() < 1e-6, "{t1} {t2} {t_inf}");
    for col in ["mass1", "mass2"] {
        let m = table.column(col).unwrap();
        assert!(m.iter().all(|x| (x - m[0]).abs() <= 1e-10 * m[0].abs()), "{col}");
    }
}

#[test]
fn simulate_abort_keeps_partial_series() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_config(
        "[mixture]\nm1 = 2\nn10 = 1.2\nn20 = 0.8\n[grid]\nn_per_axis = 12\n[solver]\ndt = 4\nt_max = 40\n\
         equilibrium_mode = sampled\n[scenario]\nname = temperature-gap\namplitude = 0.5\n",
    )
    .unwrap();
    cfg.output = dir.path().to_path_buf();
    let (out, ts) = cmd_simulate(&cfg).unwrap();
    assert_eq!(out.status, ExitStatus::SolverAbort, "{}", out.message);
    let table = read_series_csv(std::fs::File::open(dir.path().join("series.csv")).unwrap()).unwrap();
    assert_eq!(table.rows.len(), ts.len());
    assert!(!table.rows.is_empty());
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.contains("status = aborted"));
}

#[test]
fn sweep_single_pair_matches_manual_fit() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_config("[grid]\nn_per_axis = 12\n[solver]\nt_max = 10\n").unwrap();
    cfg.output = dir.path().to_path_buf();
    let (out, rows) = cmd_sweep(&cfg, &[0.3], &[0.6]).unwrap();
    assert_eq!(out.status, ExitStatus::Success);
    assert_eq!(rows.len(), 1);

    let p = cfg.mixture.with_exchange(0.3, 0.6);
    let grid = cfg.grid.phase_grid().unwrap();
    let f0 = cfg.scenario.initial_state(&p, &grid, cfg.solver.equilibrium_mode).unwrap();
    let ts = run(&f0, &p, &grid, &cfg.solver).unwrap();
    let manual = estimate_decay(&ts, mixbgk::solver::default_window(cfg.solver.t_max)).unwrap();
    assert_eq!(rows[0].report.as_ref().unwrap().rate, manual.rate);

    let text = std::fs::read_to_string(dir.path().join("rates.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), RATES_HEADER.join(","));
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(fields[2].parse::<f64>().unwrap(), manual.rate);
    assert_eq!(fields[5], "true");
}

#[test]
fn sweep_flags_inadmissible_pairs_and_orders_rates() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_config("[grid]\nn_per_axis = 12\n[solver]\nt_max = 20\n").unwrap();
    cfg.output = dir.path().to_path_buf();
    let (out, rows) = cmd_sweep(&cfg, &[0.1, 0.5, 0.9, 1.2], &[0.5]).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(!rows[3].admissible && rows[3].report.is_none());
    assert_eq!(out.status, ExitStatus::Success, "{}", out.message);
    let (ok, verdict) = monotonicity_verdict(&rows, 0.02);
    assert!(ok, "{verdict}");
    let text = std::fs::read_to_string(dir.path().join("rates.csv")).unwrap();
    assert!(text.lines().last().unwrap().ends_with(",,,,false"));
    assert!(cmd_sweep(&cfg, &[1.5], &[0.5]).is_err());
    assert!(cmd_sweep(&cfg, &[], &[0.5]).is_err());
}

#[test]
fn verify_default_passes_and_fault_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = parse_config("[verify]\ndraws = 100\n").unwrap();
    cfg.output = dir.path().to_path_buf();
    let (out, report) = cmd_verify(&cfg).unwrap();
    assert_eq!(out.status, ExitStatus::Success, "{}", report.table());
    let text = std::fs::read_to_string(dir.path().join("verify_report.txt")).unwrap();
    assert!(text.contains("overall: PASS"));

    cfg.verify.fault = Fault::FlipGammaT21;
    cfg.mixture.gamma = 0.1;
    let (out, report) = cmd_verify(&cfg).unwrap();
    assert_eq!(out.status, ExitStatus::CheckFailure);
    assert!(!report.get("mixing energy exchange").unwrap().passed);
    assert!(report.get("mixing momentum exchange").unwrap().passed);
    assert!(std::fs::read_to_string(dir.path().join("verify_report.txt")).unwrap().contains("overall: FAIL"));
}

#[test]
fn verify_kernel_only_reports_nine_at_delta_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = load_config("[mixture]\ndelta = 1\n", true).unwrap();
    cfg.output = dir.path().to_path_buf();
    let (out, report) = cmd_verify(&cfg).unwrap();
    assert_eq!(out.status, ExitStatus::Success);
    assert_eq!(report.checks.len(), 1);
    assert_eq!(report.checks[0].measured, 9.0);
}
