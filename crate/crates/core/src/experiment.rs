//! Monte Carlo experiments over channel realizations: sweeps of the CU power
//! budget, the number of D2D pairs or the Tchebycheff weight, written as
//! per-realization and averaged tables.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use polyblock::{Status, TraceRecord};
use serde::{Deserialize, Serialize};

use crate::adapter::{Mode, Solution, solve_mode};
use crate::baselines::{baseline_mc_oma, baseline_random_assignment};
use crate::channel::{Dims, GeometryConfig, NetworkInstance, generate_instance};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::scalarize::{MoopConfig, SolverSettings, Tolerances, compute_utopia_mode};
use crate::units::dbm_to_watts;

/// Version of the CSV and JSON layouts; bumped whenever a column changes.
pub const SCHEMA_VERSION: u32 = 1;

/// Offset mixed into the instance seed for the random-assignment baseline.
const RANDOM_SEED_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", content = "values", rename_all = "snake_case")]
pub enum Sweep {
    CuPowerDbm(Vec<f64>),
    KDus(Vec<usize>),
    Alpha(Vec<f64>),
}

impl Sweep {
    pub fn axis(&self) -> &'static str {
        match self {
            Sweep::CuPowerDbm(_) => "cu_power_dbm",
            Sweep::KDus(_) => "k_dus",
            Sweep::Alpha(_) => "alpha",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Sweep::CuPowerDbm(v) | Sweep::Alpha(v) => v.len(),
            Sweep::KDus(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `0, 1/steps, …, 1`.
pub fn alpha_grid(steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| i as f64 / steps as f64).collect()
}

/// Parses `start:step:end` or a comma-separated list.
pub fn parse_alpha_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidConfig(format!("cannot parse alpha grid `{s}`"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts[..] {
        [a, step, b] => {
            let (a, step, b): (f64, f64, f64) = (
                a.trim().parse().map_err(|_| bad())?,
                step.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            );
            if !(step > 0.0) || b < a {
                return Err(bad());
            }
            let ratio = (b - a) / step;
            let n = (ratio + 1e-9).floor() as usize;
            // An exact number of steps ends on `b` without accumulated error.
            let exact = n > 0 && (ratio - n as f64).abs() < 1e-9;
            Ok((0..=n)
                .map(|i| if exact { a + (b - a) * i as f64 / n as f64 } else { a + step * i as f64 })
                .collect())
        }
        [_] => parse_list(s).ok_or_else(bad),
        _ => Err(bad()),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Option<Vec<T>> {
    s.split(',').map(|v| v.trim().parse().ok()).collect()
}

/// Parses `AXIS=v1,v2,…` with AXIS one of `cu_power_dbm`, `k_dus`, `alpha`.
/// For `alpha` the values may also be given as `start:step:end`.
pub fn parse_sweep(s: &str) -> Result<Sweep> {
    let bad = || Error::InvalidConfig(format!("cannot parse sweep `{s}` (expected AXIS=v1,v2,...)"));
    let (axis, values) = s.split_once('=').ok_or_else(bad)?;
    match axis.trim() {
        "cu_power_dbm" => parse_list(values).map(Sweep::CuPowerDbm).ok_or_else(bad),
        "k_dus" => parse_list(values).map(Sweep::KDus).ok_or_else(bad),
        "alpha" => parse_alpha_grid(values).map(Sweep::Alpha),
        other => Err(Error::InvalidConfig(format!("unknown sweep axis `{other}`"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Optimal,
    Random,
    Oma,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Optimal => "optimal",
            Scheme::Random => "random",
            Scheme::Oma => "oma",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Schemes {
    pub optimal: bool,
    pub random: bool,
    pub oma: bool,
}

impl Default for Schemes {
    fn default() -> Self {
        Self {
            optimal: true,
            random: true,
            oma: true,
        }
    }
}

impl Schemes {
    fn enabled(&self) -> Vec<Scheme> {
        [(self.optimal, Scheme::Optimal), (self.random, Scheme::Random), (self.oma, Scheme::Oma)]
            .into_iter()
            .filter_map(|(on, s)| on.then_some(s))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MonteCarlo {
    pub realizations: usize,
    /// Realization `r` uses instance seed `base_seed + r`.
    pub base_seed: u64,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        Self {
            realizations: 20,
            base_seed: 1,
        }
    }
}

/// Everything one experiment needs. Missing keys take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub geometry: GeometryConfig,
    pub dims: Dims,
    pub bandwidth_hz: f64,
    pub du_power_dbm: f64,
    /// CU budget when the sweep does not vary it.
    pub cu_power_dbm: f64,
    /// Rate floor of every CU and DU, bps/Hz.
    pub r_min: f64,
    pub l_max: usize,
    /// Weight used when the sweep does not vary it.
    pub alpha: f64,
    pub sweep: Sweep,
    pub monte_carlo: MonteCarlo,
    pub mode: Mode,
    pub schemes: Schemes,
    pub tolerances: Tolerances,
    pub solver: SolverSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            geometry: GeometryConfig::default(),
            dims: Dims::new(6, 3, 4),
            bandwidth_hz: 180e3,
            du_power_dbm: 25.0,
            cu_power_dbm: 24.0,
            r_min: 1.0,
            // Nine users with rate floors on four subchannels need three slots each.
            l_max: 3,
            alpha: 0.5,
            sweep: Sweep::CuPowerDbm(vec![5.0, 10.0, 15.0, 20.0, 25.0]),
            monte_carlo: MonteCarlo::default(),
            mode: Mode::Relaxed,
            schemes: Schemes::default(),
            tolerances: Tolerances::default(),
            solver: SolverSettings::default(),
        }
    }
}

impl ExperimentConfig {
    /// Reads TOML, or JSON when the file name ends in `.json`.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Schema(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Schema(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        self.geometry.validate()?;
        if self.sweep.is_empty() {
            return bad(format!("sweep over {} has no values", self.sweep.axis()));
        }
        if self.monte_carlo.realizations == 0 {
            return bad("at least one realization is required".into());
        }
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return bad(format!("bandwidth must be positive, got {}", self.bandwidth_hz));
        }
        if !(self.r_min >= 0.0 && self.r_min.is_finite()) {
            return bad(format!("rate floor must be non-negative, got {}", self.r_min));
        }
        let check_alpha = |a: f64| (0.0..=1.0).contains(&a);
        match &self.sweep {
            Sweep::Alpha(v) if !v.iter().copied().all(check_alpha) => return bad("alpha values must lie in [0, 1]".into()),
            Sweep::KDus(v) if v.contains(&0) => return bad("k_dus values must be at least 1".into()),
            Sweep::CuPowerDbm(v) if !v.iter().all(|p| p.is_finite()) => return bad("CU powers must be finite".into()),
            _ => {}
        }
        if !check_alpha(self.alpha) {
            return bad(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        for i in 0..self.sweep.len() {
            self.moop(self.point(i).dims, self.point(i).alpha, self.point(i).cu_power_dbm)
                .validate(self.point(i).dims)?;
        }
        Ok(())
    }

    fn point(&self, i: usize) -> SweepPoint {
        let mut p = SweepPoint {
            dims: self.dims,
            cu_power_dbm: self.cu_power_dbm,
            alpha: self.alpha,
            value: 0.0,
        };
        match &self.sweep {
            Sweep::CuPowerDbm(v) => {
                p.cu_power_dbm = v[i];
                p.value = v[i];
            }
            Sweep::KDus(v) => {
                p.dims.k_dus = v[i];
                p.value = v[i] as f64;
            }
            Sweep::Alpha(v) => {
                p.alpha = v[i];
                p.value = v[i];
            }
        }
        p
    }

    /// Problem configuration of one sweep point, without a utopia.
    pub fn moop(&self, dims: Dims, alpha: f64, cu_power_dbm: f64) -> MoopConfig {
        MoopConfig {
            l_max: self.l_max,
            tolerances: self.tolerances,
            solver: self.solver,
            ..MoopConfig::uniform(dims, alpha, dbm_to_watts(self.du_power_dbm), dbm_to_watts(cu_power_dbm), self.r_min)
        }
    }

    /// Instance of realization `r` with `k` D2D pairs. Every `k` keeps the
    /// first pairs of the same drop, so sweep points are paired.
    pub fn instance(&self, k: usize, r: usize) -> Result<NetworkInstance> {
        let k_max = match &self.sweep {
            Sweep::KDus(v) => v.iter().copied().max().unwrap_or(k).max(k),
            _ => k,
        };
        let dims = Dims { k_dus: k_max, ..self.dims };
        generate_instance(&self.geometry, dims, self.seed(r))?.subset(dims.m_cus, k)
    }

    pub fn seed(&self, r: usize) -> u64 {
        self.monte_carlo.base_seed.wrapping_add(r as u64)
    }
}

#[derive(Debug, Clone, Copy)]
struct SweepPoint {
    dims: Dims,
    cu_power_dbm: f64,
    alpha: f64,
    value: f64,
}

/// Outcome of one scheme on one realization at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep_axis: String,
    pub sweep_index: usize,
    pub sweep_value: f64,
    pub cu_power_dbm: f64,
    pub k_dus: usize,
    pub alpha: f64,
    pub realization: usize,
    pub seed: u64,
    pub scheme: Scheme,
    /// `ok`, `capped` (iteration cap hit), `infeasible` or `error`.
    pub status: String,
    pub r_du: Option<f64>,
    pub r_cu: Option<f64>,
    pub sum_rate: Option<f64>,
    /// `sum_rate` times the subcarrier bandwidth, bit/s.
    pub sum_rate_bps: Option<f64>,
    pub chi: Option<f64>,
    pub iterations_total: usize,
    pub iterations_max: usize,
    pub assignments: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub message: Option<String>,
    pub wall_time_s: f64,
    #[serde(skip)]
    pub trace: Vec<TraceRecord>,
}

/// Columns of `results.csv`; wall time and messages stay in the JSON.
pub const RESULTS_HEADER: [&str; 18] = [
    "schema_version",
    "sweep_axis",
    "sweep_index",
    "sweep_value",
    "cu_power_dbm",
    "k_dus",
    "alpha",
    "realization",
    "seed",
    "scheme",
    "status",
    "r_du",
    "r_cu",
    "sum_rate",
    "sum_rate_bps",
    "chi",
    "iterations_total",
    "iterations_max",
];

/// Means over realizations for one scheme at one sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub sweep_axis: String,
    pub sweep_index: usize,
    pub sweep_value: f64,
    pub cu_power_dbm: f64,
    pub k_dus: usize,
    pub alpha: f64,
    pub scheme: Scheme,
    pub realizations: usize,
    /// Realizations that produced rates; the means run over these.
    pub succeeded: usize,
    pub mean_r_du: Option<f64>,
    pub mean_r_cu: Option<f64>,
    pub mean_sum_rate: Option<f64>,
    pub mean_sum_rate_bps: Option<f64>,
    pub mean_iterations: Option<f64>,
    /// `ok` when every realization succeeded, else `partial` or `failed`.
    pub status: String,
}

pub const SUMMARY_HEADER: [&str; 16] = [
    "schema_version",
    "sweep_axis",
    "sweep_index",
    "sweep_value",
    "cu_power_dbm",
    "k_dus",
    "alpha",
    "scheme",
    "realizations",
    "succeeded",
    "mean_r_du",
    "mean_r_cu",
    "mean_sum_rate",
    "mean_sum_rate_bps",
    "mean_iterations",
    "status",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResults {
    pub schema_version: u32,
    pub config: ExperimentConfig,
    /// Ordered by sweep index, realization, scheme.
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
    pub wall_time_s: f64,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::EpsOptimal => "ok",
        Status::IterationCap => "capped",
        Status::Infeasible => "infeasible",
    }
}

/// Work shared by the sweep points that see the same instance and utopia.
struct Unit {
    realization: usize,
    indices: Vec<usize>,
}

fn units(cfg: &ExperimentConfig) -> Vec<Unit> {
    let r_count = cfg.monte_carlo.realizations;
    match cfg.sweep {
        Sweep::Alpha(_) => (0..r_count)
            .map(|r| Unit {
                realization: r,
                indices: (0..cfg.sweep.len()).collect(),
            })
            .collect(),
        _ => (0..cfg.sweep.len())
            .flat_map(|i| (0..r_count).map(move |r| Unit { realization: r, indices: vec![i] }))
            .collect(),
    }
}

fn run_scheme(inst: &NetworkInstance, moop: &MoopConfig, scheme: Scheme, mode: Mode, exec: Execution) -> Result<Solution> {
    match scheme {
        Scheme::Optimal => solve_mode(inst, moop, mode, exec),
        Scheme::Random => baseline_random_assignment(inst, moop, inst.seed ^ RANDOM_SEED_SALT, exec),
        Scheme::Oma => baseline_mc_oma(inst, moop, exec),
    }
}

fn fail(row: &mut ResultRow, e: &Error) -> String {
    row.status = if matches!(e, Error::Infeasible(_)) { "infeasible" } else { "error" }.into();
    e.to_string()
}

fn run_unit(cfg: &ExperimentConfig, unit: &Unit, exec: Execution) -> Vec<ResultRow> {
    let schemes = cfg.schemes.enabled();
    let first = cfg.point(unit.indices[0]);
    let prepared = cfg.instance(first.dims.k_dus, unit.realization).and_then(|inst| {
        let base = cfg.moop(first.dims, first.alpha, first.cu_power_dbm);
        let utopia = compute_utopia_mode(&inst, &base, cfg.mode, exec)?;
        Ok((inst, utopia))
    });
    let mut rows = Vec::new();
    for &i in &unit.indices {
        let pt = cfg.point(i);
        for &scheme in &schemes {
            let mut row = ResultRow {
                sweep_axis: cfg.sweep.axis().to_string(),
                sweep_index: i,
                sweep_value: pt.value,
                cu_power_dbm: pt.cu_power_dbm,
                k_dus: pt.dims.k_dus,
                alpha: pt.alpha,
                realization: unit.realization,
                seed: cfg.seed(unit.realization),
                scheme,
                status: String::new(),
                r_du: None,
                r_cu: None,
                sum_rate: None,
                sum_rate_bps: None,
                chi: None,
                iterations_total: 0,
                iterations_max: 0,
                assignments: 0,
                message: None,
                wall_time_s: 0.0,
                trace: Vec::new(),
            };
            let start = Instant::now();
            let outcome = prepared.as_ref().map_err(|e| fail(&mut row, e)).and_then(|(inst, utopia)| {
                let moop = MoopConfig {
                    utopia: Some(*utopia),
                    ..cfg.moop(pt.dims, pt.alpha, pt.cu_power_dbm)
                };
                run_scheme(inst, &moop, scheme, cfg.mode, exec).map_err(|e| fail(&mut row, &e))
            });
            row.wall_time_s = start.elapsed().as_secs_f64();
            match outcome {
                Ok(sol) => {
                    row.status = status_name(sol.status).into();
                    row.r_du = Some(sol.r_du);
                    row.r_cu = Some(sol.r_cu);
                    row.sum_rate = Some(sol.sum_rate());
                    row.sum_rate_bps = Some(sol.sum_rate() * cfg.bandwidth_hz);
                    row.chi = sol.chi;
                    row.iterations_total = sol.stats.iterations_total;
                    row.iterations_max = sol.stats.iterations_max;
                    row.assignments = sol.stats.assignments;
                    row.trace = sol.trace;
                }
                Err(msg) => row.message = Some(msg),
            }
            rows.push(row);
        }
    }
    rows
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

fn summarize(cfg: &ExperimentConfig, rows: &[ResultRow]) -> Vec<SummaryRow> {
    let mut out = Vec::new();
    for i in 0..cfg.sweep.len() {
        let pt = cfg.point(i);
        for scheme in cfg.schemes.enabled() {
            let group: Vec<&ResultRow> = rows.iter().filter(|r| r.sweep_index == i && r.scheme == scheme).collect();
            let ok: Vec<&ResultRow> = group.iter().copied().filter(|r| r.sum_rate.is_some()).collect();
            let status = match ok.len() {
                n if n == group.len() => "ok",
                0 => "failed",
                _ => "partial",
            };
            out.push(SummaryRow {
                sweep_axis: cfg.sweep.axis().to_string(),
                sweep_index: i,
                sweep_value: pt.value,
                cu_power_dbm: pt.cu_power_dbm,
                k_dus: pt.dims.k_dus,
                alpha: pt.alpha,
                scheme,
                realizations: group.len(),
                succeeded: ok.len(),
                mean_r_du: mean(ok.iter().filter_map(|r| r.r_du)),
                mean_r_cu: mean(ok.iter().filter_map(|r| r.r_cu)),
                mean_sum_rate: mean(ok.iter().filter_map(|r| r.sum_rate)),
                mean_sum_rate_bps: mean(ok.iter().filter_map(|r| r.sum_rate_bps)),
                mean_iterations: mean(ok.iter().map(|r| r.iterations_total as f64)),
                status: status.into(),
            });
        }
    }
    out
}

/// Runs every sweep point and realization. Failures of single solves are
/// recorded in the rows; only an invalid configuration is an error.
pub fn run(cfg: &ExperimentConfig, exec: Execution) -> Result<ExperimentResults> {
    cfg.validate()?;
    let start = Instant::now();
    let work = units(cfg);
    let mut rows: Vec<ResultRow> = exec.map(&work, |u| run_unit(cfg, u, exec)).into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.sweep_index, r.realization, r.scheme));
    let summary = summarize(cfg, &rows);
    Ok(ExperimentResults {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        rows,
        summary,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

pub fn write_results_csv<W: Write>(rows: &[ResultRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RESULTS_HEADER)?;
    for r in rows {
        out.write_record([
            SCHEMA_VERSION.to_string(),
            r.sweep_axis.clone(),
            r.sweep_index.to_string(),
            r.sweep_value.to_string(),
            r.cu_power_dbm.to_string(),
            r.k_dus.to_string(),
            r.alpha.to_string(),
            r.realization.to_string(),
            r.seed.to_string(),
            r.scheme.name().to_string(),
            r.status.clone(),
            fmt_opt(r.r_du),
            fmt_opt(r.r_cu),
            fmt_opt(r.sum_rate),
            fmt_opt(r.sum_rate_bps),
            fmt_opt(r.chi),
            r.iterations_total.to_string(),
            r.iterations_max.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SUMMARY_HEADER)?;
    for r in rows {
        out.write_record([
            SCHEMA_VERSION.to_string(),
            r.sweep_axis.clone(),
            r.sweep_index.to_string(),
            r.sweep_value.to_string(),
            r.cu_power_dbm.to_string(),
            r.k_dus.to_string(),
            r.alpha.to_string(),
            r.scheme.name().to_string(),
            r.realizations.to_string(),
            r.succeeded.to_string(),
            fmt_opt(r.mean_r_du),
            fmt_opt(r.mean_r_cu),
            fmt_opt(r.mean_sum_rate),
            fmt_opt(r.mean_sum_rate_bps),
            fmt_opt(r.mean_iterations),
            r.status.clone(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct TraceLine<'a> {
    sweep_index: usize,
    realization: usize,
    scheme: Scheme,
    #[serde(flatten)]
    record: &'a TraceRecord,
}

/// One JSON object per polyblock iteration of each row's winning sub-problem.
pub fn write_trace_jsonl<W: Write>(rows: &[ResultRow], mut w: W) -> Result<()> {
    for r in rows {
        for record in &r.trace {
            let line = TraceLine {
                sweep_index: r.sweep_index,
                realization: r.realization,
                scheme: r.scheme,
                record,
            };
            serde_json::to_writer(&mut w, &line).map_err(|e| Error::Schema(e.to_string()))?;
            w.write_all(b"\n")?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `results.csv`, `summary.csv` and `results.json` into `dir`.
pub fn write_outputs(results: &ExperimentResults, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    write_results_csv(&results.rows, BufWriter::new(File::create(dir.join("results.csv"))?))?;
    write_summary_csv(&results.summary, BufWriter::new(File::create(dir.join("summary.csv"))?))?;
    let mut json = BufWriter::new(File::create(dir.join("results.json"))?);
    serde_json::to_writer_pretty(&mut json, results).map_err(|e| Error::Schema(e.to_string()))?;
    json.flush()?;
    Ok(())
}

/// A CSV file held as strings.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read<R: std::io::Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header = rd.headers()?.iter().map(str::to_string).collect();
        let rows = rd
            .records()
            .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<_, _>>()?;
        Ok(Self { header, rows })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::read(File::open(path)?)
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    /// Index of the first of `names` present.
    fn any_column(&self, names: &[&str]) -> Result<usize> {
        names
            .iter()
            .find_map(|n| self.column(n).ok())
            .ok_or_else(|| Error::MissingColumn(names[0].to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureKind {
    /// Sum rate against the CU power budget.
    Fig1,
    /// Sum rate against the number of D2D pairs.
    Fig2,
    /// DU sum rate against CU sum rate along the weight sweep.
    Fig3,
}

impl std::str::FromStr for FigureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Self::Fig1),
            "fig2" => Ok(Self::Fig2),
            "fig3" => Ok(Self::Fig3),
            _ => Err(Error::InvalidConfig(format!("unknown figure `{s}` (fig1, fig2 or fig3)"))),
        }
    }
}

/// `(x, series, y)` rows for one figure from a summary or results table.
///
/// Rows of other sweeps are skipped when the table has a `sweep_axis`
/// column; a table lacking the figure's axis or value columns is an error.
pub fn emit_plot_data(table: &Table, kind: FigureKind) -> Result<Table> {
    let (axis, x_names, y_names): (&str, &[&str], &[&str]) = match kind {
        FigureKind::Fig1 => ("cu_power_dbm", &["cu_power_dbm"], &["mean_sum_rate", "sum_rate"]),
        FigureKind::Fig2 => ("k_dus", &["k_dus"], &["mean_sum_rate", "sum_rate"]),
        FigureKind::Fig3 => ("alpha", &["mean_r_cu", "r_cu"], &["mean_r_du", "r_du"]),
    };
    let x = table.any_column(x_names)?;
    let y = table.any_column(y_names)?;
    let series = table.column("scheme")?;
    let axis_col = table.column("sweep_axis").ok();
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .filter(|r| axis_col.is_none_or(|c| r[c] == axis))
        .filter(|r| !r[x].is_empty() && !r[y].is_empty())
        .map(|r| vec![r[x].clone(), r[series].clone(), r[y].clone()])
        .collect();
    if axis_col.is_some() && !table.rows.iter().any(|r| axis_col.is_some_and(|c| r[c] == axis)) {
        return Err(Error::MissingColumn(axis.to_string()));
    }
    Ok(Table {
        header: vec![table.header[x].clone(), "series".into(), table.header[y].clone()],
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_grid_parsing() {
        let g = parse_alpha_grid("0:0.1:1").unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g, alpha_grid(10));
        assert_eq!(parse_alpha_grid("0.2, 0.8").unwrap(), vec![0.2, 0.8]);
        assert!(parse_alpha_grid("1:0.1:0").is_err());
        assert!(parse_alpha_grid("x").is_err());
    }

    #[test]
    fn sweep_parsing() {
        assert_eq!(parse_sweep("k_dus=1,2,3").unwrap(), Sweep::KDus(vec![1, 2, 3]));
        assert_eq!(parse_sweep("cu_power_dbm=5,10").unwrap(), Sweep::CuPowerDbm(vec![5.0, 10.0]));
        assert_eq!(parse_sweep("alpha=0:0.5:1").unwrap(), Sweep::Alpha(vec![0.0, 0.5, 1.0]));
        assert!(parse_sweep("power=1").is_err());
        assert!(parse_sweep("k_dus").is_err());
    }

    #[test]
    fn default_config_round_trips_through_toml() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let back: ExperimentConfig = toml::from_str(&cfg.to_toml().unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_toml_takes_defaults() {
        let cfg: ExperimentConfig = toml::from_str("r_min = 0.0\n[sweep]\naxis = \"k_dus\"\nvalues = [1, 2]\n").unwrap();
        assert_eq!(cfg.sweep, Sweep::KDus(vec![1, 2]));
        assert_eq!(cfg.du_power_dbm, 25.0);
        assert_eq!(cfg.monte_carlo.realizations, 20);
        assert!(toml::from_str::<ExperimentConfig>("unknown_key = 1").is_err());
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = ExperimentConfig {
            sweep: Sweep::Alpha(vec![]),
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        cfg.sweep = Sweep::Alpha(vec![1.5]);
        assert!(cfg.validate().is_err());
        cfg.sweep = Sweep::KDus(vec![0]);
        assert!(cfg.validate().is_err());
        cfg.sweep = Sweep::KDus(vec![1]);
        cfg.monte_carlo.realizations = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn k_sweep_instances_are_nested() {
        let cfg = ExperimentConfig {
            sweep: Sweep::KDus(vec![1, 3]),
            ..Default::default()
        };
        let small = cfg.instance(1, 0).unwrap();
        let large = cfg.instance(3, 0).unwrap();
        assert_eq!(small, large.subset(6, 1).unwrap());
    }

    fn table(csv: &str) -> Table {
        Table::read(csv.as_bytes()).unwrap()
    }

    #[test]
    fn plot_projection_and_missing_columns() {
        let t = table("sweep_axis,cu_power_dbm,scheme,mean_sum_rate\ncu_power_dbm,5,optimal,3.5\ncu_power_dbm,10,oma,2\n");
        let p = emit_plot_data(&t, FigureKind::Fig1).unwrap();
        assert_eq!(p.header, vec!["cu_power_dbm", "series", "mean_sum_rate"]);
        assert_eq!(p.rows[1], vec!["10", "oma", "2"]);
        match emit_plot_data(&t, FigureKind::Fig2) {
            Err(Error::MissingColumn(c)) => assert_eq!(c, "k_dus"),
            other => panic!("{other:?}"),
        }
        match emit_plot_data(&t, FigureKind::Fig3) {
            Err(Error::MissingColumn(c)) => assert_eq!(c, "mean_r_cu"),
            other => panic!("{other:?}"),
        }
        let wrong_axis = table("sweep_axis,k_dus,scheme,mean_sum_rate\nalpha,3,optimal,1\n");
        assert!(matches!(emit_plot_data(&wrong_axis, FigureKind::Fig2), Err(Error::MissingColumn(_))));
    }
}
