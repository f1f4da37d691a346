use d2d_noma::adapter::{Mode, solve_scalarized};
use d2d_noma::channel::Dims;
use d2d_noma::experiment::{
    ExperimentConfig, FigureKind, MonteCarlo, RESULTS_HEADER, SUMMARY_HEADER, Scheme, Schemes, Sweep, Table,
    alpha_grid, emit_plot_data, run, write_outputs, write_results_csv, write_trace_jsonl,
};
use d2d_noma::par::Execution;
use d2d_noma::scalarize::with_utopia;

fn tiny(sweep: Sweep, realizations: usize) -> ExperimentConfig {
    ExperimentConfig {
        dims: Dims::new(2, 1, 2),
        r_min: 0.0,
        l_max: 2,
        mode: Mode::Exact,
        sweep,
        monte_carlo: MonteCarlo {
            realizations,
            base_seed: 40,
        },
        ..ExperimentConfig::default()
    }
}

fn csv_bytes(cfg: &ExperimentConfig, exec: Execution) -> Vec<u8> {
    let res = run(cfg, exec).unwrap();
    let mut out = Vec::new();
    write_results_csv(&res.rows, &mut out).unwrap();
    out
}

#[test]
fn single_point_row_equals_direct_solve() {
    let cfg = ExperimentConfig {
        schemes: Schemes {
            optimal: true,
            random: false,
            oma: false,
        },
        ..tiny(Sweep::CuPowerDbm(vec![20.0]), 1)
    };
    let res = run(&cfg, Execution::Sequential).unwrap();
    assert_eq!(res.rows.len(), 1);
    let row = &res.rows[0];
    let inst = cfg.instance(1, 0).unwrap();
    let moop = with_utopia(&inst, &cfg.moop(inst.dims(), cfg.alpha, 20.0), Execution::Sequential).unwrap();
    let sol = solve_scalarized(&inst, &moop, Execution::Sequential).unwrap();
    assert_eq!(row.r_du, Some(sol.r_du));
    assert_eq!(row.r_cu, Some(sol.r_cu));
    assert_eq!(row.chi, sol.chi);
    assert_eq!(row.sum_rate_bps, Some(sol.sum_rate() * 180e3));
    assert_eq!(row.seed, 40);
}

#[test]
fn alpha_sweep_gives_eleven_rows_per_realization_and_scheme() {
    let cfg = tiny(Sweep::Alpha(alpha_grid(10)), 2);
    let res = run(&cfg, Execution::Sequential).unwrap();
    assert_eq!(res.rows.len(), 11 * 2 * 3);
    for r in 0..2 {
        for s in [Scheme::Optimal, Scheme::Random, Scheme::Oma] {
            let n = res.rows.iter().filter(|row| row.realization == r && row.scheme == s).count();
            assert_eq!(n, 11);
        }
    }
    assert!(res.rows.iter().all(|r| r.sum_rate.is_some()));
    assert_eq!(res.summary.len(), 11 * 3);
    assert!(res.summary.iter().all(|s| s.realizations == 2 && s.succeeded == 2));
    // Rows sorted by sweep index, realization, scheme.
    let keys: Vec<_> = res.rows.iter().map(|r| (r.sweep_index, r.realization, r.scheme)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn reruns_and_execution_modes_give_identical_csv() {
    let cfg = tiny(Sweep::CuPowerDbm(vec![10.0, 20.0]), 2);
    let a = csv_bytes(&cfg, Execution::Sequential);
    assert_eq!(a, csv_bytes(&cfg, Execution::Sequential));
    assert_eq!(a, csv_bytes(&cfg, Execution::Parallel));
}

#[test]
fn outputs_have_fixed_headers_and_feed_the_plots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny(Sweep::KDus(vec![1, 2]), 1);
    let res = run(&cfg, Execution::Parallel).unwrap();
    write_outputs(&res, dir.path()).unwrap();
    let results = Table::from_path(dir.path().join("results.csv")).unwrap();
    assert_eq!(results.header, RESULTS_HEADER);
    let summary = Table::from_path(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.header, SUMMARY_HEADER);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("results.json")).unwrap()).unwrap();
    assert_eq!(json["schema_version"], 1);
    assert!(json["rows"][0]["wall_time_s"].is_number());

    let fig2 = emit_plot_data(&summary, FigureKind::Fig2).unwrap();
    assert_eq!(fig2.header, vec!["k_dus", "series", "mean_sum_rate"]);
    assert_eq!(fig2.rows.len(), 2 * 3);
    assert!(matches!(
        emit_plot_data(&summary, FigureKind::Fig1),
        Err(d2d_noma::Error::MissingColumn(c)) if c == "cu_power_dbm"
    ));
}

#[test]
fn fig3_projects_rate_pairs() {
    let cfg = ExperimentConfig {
        schemes: Schemes {
            optimal: true,
            random: false,
            oma: true,
        },
        ..tiny(Sweep::Alpha(vec![0.0, 0.5, 1.0]), 1)
    };
    let res = run(&cfg, Execution::Sequential).unwrap();
    let mut buf = Vec::new();
    d2d_noma::experiment::write_summary_csv(&res.summary, &mut buf).unwrap();
    let fig3 = emit_plot_data(&Table::read(buf.as_slice()).unwrap(), FigureKind::Fig3).unwrap();
    assert_eq!(fig3.header, vec!["mean_r_cu", "series", "mean_r_du"]);
    assert_eq!(fig3.rows.len(), 6);
    let first = &res.summary[0];
    assert_eq!(fig3.rows[0], vec![first.mean_r_cu.unwrap().to_string(), "optimal".into(), first.mean_r_du.unwrap().to_string()]);
}

#[test]
fn failed_solves_are_recorded_not_fatal() {
    let cfg = ExperimentConfig {
        r_min: 500.0,
        ..tiny(Sweep::CuPowerDbm(vec![20.0]), 2)
    };
    let res = run(&cfg, Execution::Sequential).unwrap();
    assert!(res.rows.iter().all(|r| r.status == "infeasible" && r.sum_rate.is_none() && r.message.is_some()));
    assert!(res.summary.iter().all(|s| s.status == "failed" && s.mean_sum_rate.is_none()));
}

#[test]
fn trace_lines_follow_rows() {
    let mut cfg = tiny(Sweep::CuPowerDbm(vec![20.0]), 1);
    cfg.solver.record_trace = true;
    let res = run(&cfg, Execution::Sequential).unwrap();
    let mut out = Vec::new();
    write_trace_jsonl(&res.rows, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let total: usize = res.rows.iter().map(|r| r.trace.len()).sum();
    assert!(total > 0);
    assert_eq!(text.lines().count(), total);
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["scheme"], "optimal");
    assert!(first["iter"].is_number() && first["V"].is_number());
}

#[test]
fn config_files_load_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.toml");
    std::fs::write(&path, "mode = \"exact\"\n[sweep]\naxis = \"alpha\"\nvalues = [0.0, 1.0]\n").unwrap();
    let cfg = ExperimentConfig::from_path(&path).unwrap();
    assert_eq!(cfg.mode, Mode::Exact);
    assert_eq!(cfg.dims, Dims::new(6, 3, 4));
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[sweep]\naxis = \"alpha\"\nvalues = []\n").unwrap();
    assert!(ExperimentConfig::from_path(&bad).is_err());
    let json = dir.path().join("exp.json");
    std::fs::write(&json, "{\"r_min\": 0.5}").unwrap();
    assert_eq!(ExperimentConfig::from_path(&json).unwrap().r_min, 0.5);
}
