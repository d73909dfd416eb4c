use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use floquet_cli::config::{InitialState, ModelKind, Number, ScenarioConfig};
use floquet_cli::error::{CliError, Result};
use floquet_cli::model::ResolvedModel;
use floquet_cli::output::{output_path, write_json, write_report, write_table};
use floquet_cli::scenario::initial_state;
use floquet_cli::studies::{
    convergence_json, convergence_rows, run_convergence, run_scaling, scaling_json, scaling_rows, ConvergenceKind,
    ScalingRequest, CONVERGENCE_HEADER, SCALING_HEADER,
};
use floquet_cli::{run_scenario, Format, Preset, RunOptions};
use rayon::prelude::*;

#[derive(Debug, Parser)]
#[command(name = "floquet-lindblad", version, about = "Floquet analysis of periodically driven Lindblad equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output file (sweeps append `_<param>-<value>` to the stem) or directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; overrides the config file.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads for sweep points and methods.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for `initial_state = "random"`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Step-doubling tolerance of the exact propagator (run and preset).
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BuiltinModel {
    Model1,
    Model2,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario file.
    Run { config: PathBuf },
    /// Run a shipped preset.
    Preset {
        #[arg(value_enum)]
        name: Preset,
    },
    /// Micromotion amplitude against drive frequency, with a log-log fit.
    Scaling {
        #[arg(long, value_enum)]
        model: BuiltinModel,
        /// Comma-separated drive frequencies.
        #[arg(long, value_delimiter = ',', required = true, value_parser = parse_number)]
        omegas: Vec<f64>,
        /// Model parameter as key=value; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Periods discarded before sampling [default: 60/γ worth].
        #[arg(long)]
        burn_in: Option<usize>,
        /// Samples in the measured period.
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Truncation and quadrature convergence tables for a scenario's model.
    Converge {
        config: PathBuf,
        #[arg(long, value_enum)]
        kind: ConvergenceKind,
        /// Comma-separated, strictly ascending levels (M or node counts).
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<usize>,
        /// Magnus order for `--kind magnus`.
        #[arg(long, default_value_t = 1)]
        order: u8,
        /// Sample times per period for `--kind micromotion`.
        #[arg(long, default_value_t = 32)]
        samples: usize,
    },
}

fn parse_number(text: &str) -> std::result::Result<f64, String> {
    Number::parse(text)
}

fn parse_assignments(pairs: &[String]) -> Result<toml::Table> {
    let mut table = toml::Table::new();
    for pair in pairs {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got {pair:?}")))?;
        let value = match value.trim() {
            "true" => toml::Value::Boolean(true),
            "false" => toml::Value::Boolean(false),
            v => toml::Value::Float(Number::parse(v).map_err(CliError::Config)?),
        };
        table.insert(key.trim().to_string(), value);
    }
    Ok(table)
}

/// Outcome of a command: `Ok(true)` when some part failed numerically.
type Outcome = Result<bool>;

fn run_config(config: &ScenarioConfig, cli: &Cli) -> Outcome {
    let format = cli.format.unwrap_or(config.output.format);
    let base = match &cli.out {
        Some(p) if p.is_dir() => p.join(&config.name),
        Some(p) => p.clone(),
        None => match &config.output.path {
            Some(p) => config.resolve(p),
            None => PathBuf::from(&config.name),
        },
    };
    let points = config.expand();
    for (_, point) in &points {
        ResolvedModel::from_config(point)?;
    }
    let options = RunOptions {
        tol: cli.tol.unwrap_or(RunOptions::default().tol),
        seed: cli.seed,
    };
    let results: Vec<_> = points
        .par_iter()
        .map(|(suffix, point)| (suffix, point, run_scenario(point, &options)))
        .collect();

    let mut failed = false;
    for (suffix, point, result) in results {
        let label = suffix.as_deref().unwrap_or(&config.name);
        match result {
            Ok(report) => {
                let path = output_path(&base, suffix.as_deref(), format);
                write_report(&report, point, format, &path)?;
                println!("{}", path.display());
                for series in &report.methods {
                    println!(
                        "  {:<10} max stroboscopic trace distance {:.3e}  ({:.2} s)",
                        series.method.label(),
                        series.max_stroboscopic_deviation(),
                        series.wall_time_s
                    );
                    for w in &series.warnings {
                        println!("  {:<10} warning: {w}", series.method.label());
                    }
                }
                for f in &report.failures {
                    eprintln!("  {:<10} failed: {}", f.method.label(), f.error);
                    failed = true;
                }
            }
            Err(e @ CliError::Numerical { .. }) => {
                eprintln!("{label}: {e}");
                failed = true;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(failed)
}

fn write_study(
    cli: &Cli,
    header: &[&str],
    rows: &[Vec<String>],
    json: serde_json::Value,
    default_name: &str,
) -> Result<()> {
    let Some(out) = &cli.out else { return Ok(()) };
    let format = cli.format.unwrap_or_default();
    let path = if out.is_dir() {
        output_path(&out.join(default_name), None, format)
    } else {
        out.clone()
    };
    match format {
        Format::Csv => write_table(header, rows, &path)?,
        Format::Json => write_json(&json, &path)?,
    }
    println!("{}", path.display());
    Ok(())
}

fn print_table(header: &[&str], rows: &[Vec<String>]) {
    println!("{}", header.join("\t"));
    for row in rows {
        println!("{}", row.join("\t"));
    }
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Run { config } => run_config(&ScenarioConfig::from_file(config)?, cli),
        Command::Preset { name } => run_config(&name.config()?, cli),
        Command::Scaling {
            model,
            omegas,
            set,
            burn_in,
            samples,
        } => {
            let request = ScalingRequest {
                model: match model {
                    BuiltinModel::Model1 => ModelKind::Model1,
                    BuiltinModel::Model2 => ModelKind::Model2,
                },
                params: parse_assignments(set)?,
                omegas: omegas.clone(),
                burn_in: *burn_in,
                samples: *samples,
            };
            let rho0 = initial_state(&InitialState::Excited, cli.seed)?;
            let table = run_scaling(&request, &rho0)?;
            let rows = scaling_rows(&table);
            print_table(&SCALING_HEADER, &rows);
            match table.fit {
                Some(f) => println!("slope {:.4} ± {:.4}", f.slope, f.slope_stderr),
                None => println!("no micromotion to fit"),
            }
            write_study(cli, &SCALING_HEADER, &rows, scaling_json(&table), "scaling")?;
            Ok(table.points.iter().any(|p| p.amplitude.is_err()))
        }
        Command::Converge {
            config,
            kind,
            levels,
            order,
            samples,
        } => {
            let config = ScenarioConfig::from_file(config)?;
            let model = ResolvedModel::from_config(&config)?;
            let rows = run_convergence(&model, *kind, levels, *order, *samples)?;
            let table = convergence_rows(&rows);
            print_table(&CONVERGENCE_HEADER, &table);
            write_study(cli, &CONVERGENCE_HEADER, &table, convergence_json(&rows), "convergence")?;
            Ok(false)
        }
    }
}

fn init_logging() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FLOQUET_LINDBLAD_LOG", "warn"))
        .format_timestamp(None)
        .init();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    init_logging();

    let outcome = match cli.jobs {
        Some(0) => Err(CliError::Config("--jobs must be ≥ 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))
            .and_then(|pool| pool.install(|| dispatch(&cli))),
        None => dispatch(&cli),
    };
    match outcome {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
