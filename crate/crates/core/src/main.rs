use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use d2d_noma::adapter::{Mode, solve_mode};
use d2d_noma::channel::{load_instance, save_instance, to_json_full_precision};
use d2d_noma::experiment::{
    ExperimentConfig, FigureKind, Table, emit_plot_data, parse_alpha_grid, parse_sweep, run, write_outputs,
    write_trace_jsonl, Sweep,
};
use d2d_noma::par::Execution;
use d2d_noma::scalarize::compute_utopia_mode;
use d2d_noma::{Error, Result};

#[derive(Parser)]
#[command(version, about = "Power and subchannel allocation for D2D-underlay uplink MC-NOMA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Relaxed,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Relaxed => Mode::Relaxed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FigArg {
    Fig1,
    Fig2,
    Fig3,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML, or JSON by extension).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Base seed of the Monte Carlo realizations.
    #[arg(long)]
    seed: Option<u64>,
    /// Run everything on the calling thread.
    #[arg(long)]
    sequential: bool,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_path(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(m) = self.mode {
            cfg.mode = m.into();
        }
        if let Some(s) = self.seed {
            cfg.monte_carlo.base_seed = s;
        }
        Ok(cfg)
    }

    fn exec(&self) -> Execution {
        if self.sequential { Execution::Sequential } else { Execution::Parallel }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the default configuration as TOML.
    DefaultConfig,
    /// Draw one channel realization and save it as JSON.
    Generate {
        #[command(flatten)]
        common: Common,
        /// Realization index; the seed is the base seed plus this.
        #[arg(long, default_value_t = 0)]
        realization: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one saved instance at one weight and print the solution JSON.
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the configured sweep and write results.csv, summary.csv and results.json.
    Run {
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Sweep over the weight instead: `start:step:end` or a list.
        #[arg(long, conflicts_with = "sweep")]
        alpha_grid: Option<String>,
        /// `cu_power_dbm=..`, `k_dus=..` or `alpha=..` with comma-separated values.
        #[arg(long)]
        sweep: Option<String>,
        /// Write per-iteration solver records as JSON lines to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Project a summary (or results) table onto one figure's axes.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: FigArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::DefaultConfig => {
            print!("{}", ExperimentConfig::default().to_toml()?);
        }
        Command::Generate { common, realization, out } => {
            let cfg = common.load()?;
            save_instance(&cfg.instance(cfg.dims.k_dus, realization)?, out)?;
        }
        Command::Solve {
            common,
            instance,
            alpha,
            out,
        } => {
            let cfg = common.load()?;
            let inst = load_instance(instance)?;
            let base = cfg.moop(inst.dims(), alpha.unwrap_or(cfg.alpha), cfg.cu_power_dbm);
            base.validate(inst.dims())?;
            let exec = common.exec();
            let utopia = compute_utopia_mode(&inst, &base, cfg.mode, exec)?;
            let moop = d2d_noma::scalarize::MoopConfig {
                utopia: Some(utopia),
                ..base
            };
            let sol = solve_mode(&inst, &moop, cfg.mode, exec)?;
            let mut w = output(out.as_ref())?;
            to_json_full_precision(&mut w, &sol)?;
            writeln!(w)?;
        }
        Command::Run {
            common,
            out,
            alpha_grid,
            sweep,
            trace,
        } => {
            let mut cfg = common.load()?;
            if let Some(g) = alpha_grid {
                cfg.sweep = Sweep::Alpha(parse_alpha_grid(&g)?);
            }
            if let Some(s) = sweep {
                cfg.sweep = parse_sweep(&s)?;
            }
            cfg.solver.record_trace = trace.is_some();
            let results = run(&cfg, common.exec())?;
            write_outputs(&results, &out)?;
            if let Some(t) = trace {
                write_trace_jsonl(&results.rows, BufWriter::new(File::create(t)?))?;
            }
            let failed = results.rows.iter().filter(|r| r.sum_rate.is_none()).count();
            eprintln!(
                "{} rows written to {} ({failed} without a solution) in {:.1} s",
                results.rows.len(),
                out.display(),
                results.wall_time_s
            );
        }
        Command::Plot { input, kind, out } => {
            let kind = match kind {
                FigArg::Fig1 => FigureKind::Fig1,
                FigArg::Fig2 => FigureKind::Fig2,
                FigArg::Fig3 => FigureKind::Fig3,
            };
            let table = emit_plot_data(&Table::from_path(input)?, kind)?;
            table.write(output(out.as_ref())?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) | Error::Csv(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
