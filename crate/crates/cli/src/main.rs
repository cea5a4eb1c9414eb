mod config;
mod error;
mod sweep;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use atfe::adaptive::{schedule_nu_min, schedule_s1, AtfeConfig};
use atfe::bounds::BoundKind;
use atfe::harness::{artifact_path, reproduce_figure, run_ensemble_with, write_json, FigureId, FigureOptions, Table};
use atfe::probe::{ProbeConfig, ProbeMode};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::RawConfig;
use error::CliError;

const OUTPUT_ENV: &str = "ATFE_OUTPUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "atfe", version, about = "Adaptive-time frequency estimation: simulation, bounds and figure tables")]
struct Cli {
    /// Progress messages on stderr; repeat for more.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    /// Directory for CSV and JSON files.
    #[arg(long, env = OUTPUT_ENV)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a Monte Carlo ensemble and write its checkpoint summary.
    Simulate {
        /// TOML (or .json) file with flat config keys.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Inline override, applied after the file.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        confidence: Option<f64>,
        #[arg(long)]
        nu_total: Option<u32>,
        /// Master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for the trial pool.
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Evaluate a closed-form bound over lists or ranges of parameters.
    Bounds {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        nu: Option<String>,
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        t: Option<String>,
        #[arg(long)]
        total_time: Option<String>,
        #[arg(long)]
        delta_omega: Option<String>,
        #[arg(long)]
        confidence: Option<String>,
        #[arg(long)]
        s: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Regenerate the tables behind one figure.
    Reproduce {
        /// fig2_likelihood, fig3, fig5 or fig6.
        figure: String,
        #[arg(long, default_value_t = FigureOptions::DEFAULT_MASTER_SEED)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
        /// Trials per batch.
        #[arg(long)]
        trials: Option<u32>,
        #[arg(long)]
        batches: Option<u32>,
        /// Ten times the trials at the last fig3 no-update checkpoints.
        #[arg(long)]
        dense: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print minimal measurement counts and sensing times per strategy.
    Schedule {
        #[arg(long, default_value_t = AtfeConfig::DEFAULT_CONFIDENCE)]
        confidence: f64,
        /// single, product or ghz.
        #[arg(long, default_value = "single")]
        mode: String,
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// Number of strategies to list; defaults to the exact S1.
        #[arg(long)]
        strategies: Option<u32>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let verbose = cli.verbose;
    match cli.command {
        Command::Simulate { config, set, confidence, nu_total, seed, workers, output } => {
            let file = match &config {
                Some(path) => RawConfig::from_file(path)?,
                None => RawConfig::default(),
            };
            let flags = RawConfig { confidence_level: confidence, nu_total, seed, ..RawConfig::default() };
            let effective = file.merge(RawConfig::from_assignments(&set)?).merge(flags).resolve()?;
            let plan = effective.plan()?;
            let workers = check_workers(workers)?;
            if verbose > 0 {
                eprintln!("running {} trials of {} measurements", plan.total_trials(), plan.base.nu_total);
            }
            let summary = run_ensemble_with(&plan, workers)?;
            let dir = output_dir(output, true)?.expect("simulate always writes");
            let csv = artifact_path(&dir, "simulate", &effective.tag, "csv");
            Table::from(&summary).write_csv(&csv)?;
            let infinite: Vec<_> = summary.rows.iter().map(|r| r.infinite_batches).collect();
            let sidecar = json!({
                "artifact_version": atfe::ARTIFACT_VERSION,
                "master_seed": effective.seed,
                "config": effective,
                "plan": plan,
                "infinite_batches": infinite,
            });
            let side = artifact_path(&dir, "simulate", &effective.tag, "json");
            write_json(&side, &sidecar)?;
            println!("{}\n{}", csv.display(), side.display());
        }
        Command::Bounds { kind, nu, n, t, total_time, delta_omega, confidence, s, output } => {
            let kind: BoundKind = kind.parse()?;
            let mut supplied = Vec::new();
            for (name, list) in [
                ("nu", nu),
                ("n", n),
                ("t", t),
                ("total_time", total_time),
                ("delta_omega", delta_omega),
                ("confidence", confidence),
                ("s", s),
            ] {
                if let Some(list) = list {
                    supplied.push((name, sweep::parse_values(name, &list)?));
                }
            }
            let table = sweep::sweep(kind, &supplied)?;
            emit(&table, output, "bounds", kind.as_str())?;
        }
        Command::Reproduce { figure, seed, workers, trials, batches, dense, output } => {
            let figure: FigureId = figure.parse()?;
            let defaults = FigureOptions::default();
            let options = FigureOptions {
                master_seed: seed,
                trials_per_batch: trials.unwrap_or(defaults.trials_per_batch),
                batches: batches.unwrap_or(defaults.batches),
                workers: check_workers(workers)?,
                dense,
                ..defaults
            };
            if verbose > 0 {
                eprintln!("reproducing {figure} with seed {seed}");
            }
            let artifacts = reproduce_figure(figure, &options)?;
            let dir = output_dir(output, true)?.expect("reproduce always writes");
            for path in artifacts.write(&dir)? {
                println!("{}", path.display());
            }
        }
        Command::Schedule { confidence, mode, n, strategies, output } => {
            let mode: ProbeMode = mode.parse()?;
            let probe = ProbeConfig::new(mode, n)?;
            let divisor = if mode == ProbeMode::ProductParallel { n } else { 1 };
            let s1 = schedule_s1(confidence, divisor)?;
            let t1 = probe.first_sensing_time(1.0);
            let count = strategies.unwrap_or(s1.exact);
            if count == 0 {
                return Err(CliError::Usage("strategies must be at least 1".into()));
            }
            let mut table = Table::new(["i", "nu_min", "t_tilde"]);
            for i in 1..=count {
                table.push(vec![f64::from(i), schedule_nu_min(i, confidence, divisor)? as f64, f64::from(i) * t1]);
            }
            let tag = format!("{}_n{n}_c{confidence}", mode.as_str());
            emit(&table, output, "schedule", &tag)?;
            println!("S1,{}", s1.analytic);
            println!("S1_rounded,{}", s1.analytic.round());
            println!("S1_exact,{}", s1.exact);
        }
    }
    Ok(())
}

fn check_workers(workers: Option<usize>) -> Result<Option<usize>, CliError> {
    match workers {
        Some(0) => Err(CliError::Usage("workers must be at least 1".into())),
        w => Ok(w),
    }
}

/// Output directory; `always` falls back to the current directory.
fn output_dir(output: OutputArgs, always: bool) -> Result<Option<PathBuf>, CliError> {
    let dir = match output.output_dir {
        Some(d) => Some(d),
        None if always => Some(PathBuf::from(".")),
        None => None,
    };
    if let Some(d) = &dir {
        std::fs::create_dir_all(d)
            .map_err(|e| CliError::Runtime(format!("cannot create output directory {}: {e}", d.display())))?;
    }
    Ok(dir)
}

/// Table to stdout, and to `<stem>_<tag>.csv` when an output directory is set.
fn emit(table: &Table, output: OutputArgs, stem: &str, tag: &str) -> Result<(), CliError> {
    let text = table.to_csv_string()?;
    std::io::stdout().write_all(text.as_bytes())?;
    if let Some(dir) = output_dir(output, false)? {
        let path: PathBuf = artifact_path(Path::new(&dir), stem, tag, "csv");
        std::fs::write(&path, text)?;
    }
    Ok(())
}
