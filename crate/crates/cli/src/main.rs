//! `lightquanta`: run experiment files, sweeps and the model comparison table.
//!
//! Exit status is 0 when every run conforms to its model's expected row,
//! 2 when the runs finished but something did not conform, and 1 on error.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lightquanta::apparatus::ApparatusConfig;
use lightquanta::engine::{
    derive_seed, run, run_delayed_choice, sweep, sweep_flux, table_one_spec, RunResult,
    SweepVariable,
};
use lightquanta::io::{
    experiment_from_report, histogram_csv, parse_experiment, sweep_column, sweep_csv,
    table_one_csv, ExperimentFile, ModeName, ReportDocument,
};
use lightquanta::models::ModelKind;
use lightquanta::optics::fresnel;
use lightquanta::{Error, Result};

#[derive(Parser)]
#[command(
    name = "lightquanta",
    version,
    about = "Two-arm interferometer Monte Carlo"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment file (or rerun the experiment echoed in a report).
    Run {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Override `run.mode`.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Sweep one variable; values are in file units (nm, mean quanta, mrad, deg).
    Sweep {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long = "sweep", value_name = "VAR")]
        variable: String,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        /// Number of intervals; the sweep has `steps + 1` points.
        #[arg(long)]
        steps: usize,
    },
    /// Run every model at its defaults and compare with the expected table.
    Table1 {
        #[command(flatten)]
        common: Common,
    },
    /// Print the incidence angle that balances both arms.
    Calibrate { file: PathBuf },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    windows: Option<u64>,
    /// Output path; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn workers(common: &Common) -> usize {
    common
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Config(format!("{}: {e}", path.display()))
}

fn load(file: &Path) -> Result<ExperimentFile> {
    let text = fs::read_to_string(file).map_err(|e| io_error(file, e))?;
    if text.trim_start().starts_with('{') {
        experiment_from_report(&text)
    } else {
        parse_experiment(&text)
    }
}

/// Write through a temporary file in the target directory, then rename.
fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    let Some(path) = out else {
        let mut stdout = std::io::stdout().lock();
        return stdout
            .write_all(contents.as_bytes())
            .map_err(|e| Error::Config(format!("stdout: {e}")));
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_error(path, e))?;
    tmp.write_all(contents.as_bytes())
        .map_err(|e| io_error(path, e))?;
    tmp.persist(path).map_err(|e| io_error(path, e.error))?;
    Ok(())
}

fn apply_common(exp: &mut ExperimentFile, common: &Common) {
    if let Some(seed) = common.seed {
        exp.run.seed = seed;
    }
    if let Some(n) = common.windows {
        exp.run.windows = n;
    }
}

fn cmd_run(file: &Path, common: &Common, mode: Option<&str>) -> Result<bool> {
    let mut exp = load(file)?;
    apply_common(&mut exp, common);
    if let Some(m) = mode {
        exp.run.mode = ModeName::parse(m).ok_or_else(|| Error::Validation {
            key: "run.mode".into(),
            message: format!("unknown mode `{m}` (standard, chopper_coincidence, delayed_choice)"),
        })?;
    }
    let spec = exp.to_run_spec()?;
    let format = common.format.unwrap_or(Format::Json);
    let (result, comparison) = in_pool(workers(common), || -> Result<_> {
        if exp.run.mode == ModeName::DelayedChoice {
            let c = run_delayed_choice(&spec)?;
            Ok((c.after, Some(c.differences)))
        } else {
            Ok((run(&spec)?, None))
        }
    })??;
    let conformant = result.conformance.overall;
    match format {
        Format::Json => {
            let mut doc = ReportDocument::new(&exp, &result)?;
            doc.delayed_comparison = comparison;
            let out = common
                .out
                .clone()
                .or(exp.output.report.clone().map(PathBuf::from));
            emit(out.as_deref(), &doc.to_json())?;
        }
        Format::Csv => {
            let out = common
                .out
                .clone()
                .or(exp.output.histogram.clone().map(PathBuf::from));
            emit(out.as_deref(), &histogram_csv(&result))?;
        }
    }
    Ok(conformant)
}

fn cmd_sweep(
    file: &Path,
    common: &Common,
    variable: &str,
    from: f64,
    to: f64,
    steps: usize,
) -> Result<bool> {
    let var = SweepVariable::parse(variable)?;
    if common.format == Some(Format::Json) {
        return Err(Error::Validation {
            key: "format".into(),
            message: "sweeps are written as CSV".into(),
        });
    }
    let mut exp = load(file)?;
    apply_common(&mut exp, common);
    let spec = exp.to_run_spec()?;
    if steps == 0 {
        return Err(Error::Validation {
            key: "steps".into(),
            message: "a sweep needs at least one step".into(),
        });
    }
    let (_, factor) = sweep_column(var);
    let values: Vec<f64> = (0..=steps)
        .map(|i| (from + (to - from) * i as f64 / steps as f64) / factor)
        .collect();
    let points = in_pool(workers(common), || match var {
        SweepVariable::Flux => sweep_flux(&spec, &values),
        _ => sweep(&spec, var, &values),
    })??;
    let out = common
        .out
        .clone()
        .or(exp.output.series.clone().map(PathBuf::from));
    emit(out.as_deref(), &sweep_csv(var, &points))?;
    Ok(true)
}

fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(serde::Serialize)]
struct TableRow<'a> {
    model: ModelKind,
    seed: u64,
    expected: &'a lightquanta::models::TableOnePrediction,
    metrics: &'a lightquanta::detection::Metrics,
    conformance: &'a lightquanta::engine::Conformance,
}

fn cmd_table1(common: &Common) -> Result<bool> {
    let seed = common.seed.unwrap_or(42);
    let windows = common.windows.unwrap_or(100_000);
    let results: Vec<RunResult> = in_pool(workers(common), || {
        ModelKind::ALL
            .iter()
            .enumerate()
            .map(|(i, &m)| run(&table_one_spec(m, derive_seed(seed, i as u64), windows)))
            .collect::<Result<Vec<_>>>()
    })??;
    let text = match common.format.unwrap_or(Format::Csv) {
        Format::Csv => table_one_csv(&results),
        Format::Json => {
            let rows: Vec<TableRow> = results
                .iter()
                .map(|r| TableRow {
                    model: r.spec.model,
                    seed: r.spec.seed,
                    expected: &r.table_row,
                    metrics: &r.metrics,
                    conformance: &r.conformance,
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&rows).expect("rows serialize");
            s.push('\n');
            s
        }
    };
    emit(common.out.as_deref(), &text)?;
    Ok(results.iter().all(|r| r.conformance.overall))
}

fn cmd_calibrate(file: &Path) -> Result<bool> {
    let exp = load(file)?;
    let a = &exp.apparatus;
    let cfg = ApparatusConfig {
        glass_index: a.glass_index,
        polarization: a.polarization,
        ..Default::default()
    };
    let i = lightquanta::apparatus::calibrate_incidence(&cfg)?;
    let r = fresnel(1.0, a.glass_index, i, a.polarization)?.reflectance;
    println!("incidence_deg = {:.4}", i.to_degrees());
    println!("reflectance = {r}");
    println!("residual = {:e}", (r - 0.5).abs());
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { file, common, mode } => cmd_run(file, common, mode.as_deref()),
        Command::Sweep {
            file,
            common,
            variable,
            from,
            to,
            steps,
        } => cmd_sweep(file, common, variable, *from, *to, *steps),
        Command::Table1 { common } => cmd_table1(common),
        Command::Calibrate { file } => cmd_calibrate(file),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
