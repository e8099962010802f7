//! Command-line front end.
//!
//! Every [`RunConfig`] key is a global `--key-name` flag; a `--config` file is
//! applied first and explicit flags override it. The resolved configuration
//! goes to standard error before the command runs. Results go to `--out` or
//! standard output; figure data goes to `--out-dir`.
//!
//! Exit codes: 0 on success, 1 on usage or configuration errors, 2 on data
//! errors. `UFOREST_THREADS` sets the worker count.

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use clap::parser::ValueSource;
use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::error::{Error, Result};
use crate::experiments::{reproduce, run_estimator, sweep, write_decomposition, Estimator, Figure};
use crate::inference::{mi_decomposition_with, permutation_test_with};
use crate::io::{load_csv, write_csv, write_results, LabeledDataset, ResultRow, RunConfig};
use crate::sim::{sample, SimSetting};

pub const THREADS_ENV: &str = "UFOREST_THREADS";

fn flag_name(key: &str) -> String {
    key.replace('_', "-")
}

fn command() -> Command {
    let defaults = RunConfig::default();
    let mut cmd = Command::new("uforest")
        .about("Conditional entropy and mutual information with honest decision forests")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("FILE")
                .help("key = value config file applied before the flags"),
        )
        .arg(
            Arg::new("no_timing")
                .long("no-timing")
                .global(true)
                .action(ArgAction::SetTrue)
                .help("leave wall_time_ms empty so outputs are reproducible byte for byte"),
        );
    for (key, help) in RunConfig::KEYS {
        let mut arg = Arg::new(key)
            .long(flag_name(key))
            .global(true)
            .value_name("VALUE")
            .help(help)
            .default_value(defaults.get(key).unwrap_or_default());
        if key.contains('_') {
            arg = arg.alias(key);
        }
        arg = match key {
            "input" => arg.alias("in"),
            "label_column" => arg.alias("label"),
            "estimator" => arg.alias("estimators"),
            _ => arg,
        };
        cmd = cmd.arg(arg);
    }
    cmd.subcommand(
        Command::new("simulate").about("Sample a simulation setting and write it as CSV"),
    )
    .subcommand(
        Command::new("estimate").about("Estimate H(Y|X) and I(X;Y) on a CSV or simulated data"),
    )
    .subcommand(Command::new("sweep").about("Run estimators over grids of n, d, mu and pi"))
    .subcommand(Command::new("perm-test").about("Permutation test of I(X;Y) > 0"))
    .subcommand(
        Command::new("decompose").about("Chain-rule decomposition of I(Y;X) over feature subsets"),
    )
    .subcommand(
        Command::new("reproduce")
            .about("Write the data of a figure preset (fig1 to fig4) to --out-dir")
            .arg(Arg::new("figure").required(true).value_name("FIGURE")),
    )
}

fn resolve(matches: &ArgMatches) -> Result<RunConfig> {
    let mut config = match matches.get_one::<String>("config") {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    for (key, _) in RunConfig::KEYS {
        if matches.value_source(key) == Some(ValueSource::CommandLine) {
            if let Some(v) = matches.get_one::<String>(key) {
                config.set(key, v)?;
            }
        }
    }
    if matches.get_flag("no_timing") {
        config.timing = false;
    }
    config.validate()?;
    Ok(config)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 1,
        _ => 2,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let (name, sub) = matches.subcommand().expect("a subcommand is required");
    let config = match resolve(sub) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("uforest: {e}");
            return 1;
        }
    };
    eprint!("# uforest {name}\n{}", config.to_text());
    let outcome = match thread_pool() {
        Ok(Some(pool)) => pool.install(|| dispatch(name, sub, &config)),
        Ok(None) => dispatch(name, sub, &config),
        Err(e) => Err(e),
    };
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("uforest: {e}");
            exit_code(&e)
        }
    }
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            Error::Config(format!(
                "{THREADS_ENV} must be a positive integer, got '{value}'"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| Error::Config(format!("cannot start {n} threads: {e}")))
}

fn dispatch(name: &str, sub: &ArgMatches, config: &RunConfig) -> Result<()> {
    match name {
        "simulate" => simulate(config),
        "estimate" => estimate(config),
        "sweep" => {
            let rows = sweep(config)?;
            emit(config, |out| write_results(&rows, out))
        }
        "perm-test" => perm_test(config),
        "decompose" => decompose(config),
        "reproduce" => {
            let figure: Figure = sub.get_one::<String>("figure").expect("required").parse()?;
            write_figure(figure, config)
        }
        other => Err(Error::Config(format!("unknown command '{other}'"))),
    }
}

/// Writes to `config.out`, or to standard output when it is unset.
fn emit(config: &RunConfig, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match &config.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
            let mut out = std::io::BufWriter::new(file);
            write(&mut out)?;
            out.flush().map_err(|e| Error::io(path, e))
        }
        None => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            write(&mut out)?;
            out.flush().map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::io("<output>", e)
}

fn simulated(config: &RunConfig) -> Result<SimSetting> {
    SimSetting::new(config.setting, config.mu, config.pi, config.d)
}

/// The input CSV, or a simulated sample when no input is set. The second
/// value carries `(mu, pi)` for simulated data.
fn dataset(config: &RunConfig) -> Result<(LabeledDataset, Option<(f64, f64)>)> {
    match &config.input {
        Some(path) => {
            let data = load_csv(path, Some(&config.label_column))?;
            if !data.is_labeled() {
                return Err(Error::Data(format!(
                    "{} has no label column '{}' (set --label-column)",
                    path.display(),
                    config.label_column
                )));
            }
            Ok((data, None))
        }
        None => Ok((
            sample(&simulated(config)?, config.n, config.seed)?,
            Some((config.mu, config.pi)),
        )),
    }
}

fn single_estimator(config: &RunConfig) -> Result<Estimator> {
    match config.estimators.as_slice() {
        [e] => Ok(*e),
        _ => Err(Error::Config(
            "this command takes exactly one estimator".into(),
        )),
    }
}

fn simulate(config: &RunConfig) -> Result<()> {
    let data = sample(&simulated(config)?, config.n, config.seed)?;
    emit(config, |out| write_csv(&data, out).map_err(io_err))
}

fn estimate(config: &RunConfig) -> Result<()> {
    let (data, params) = dataset(config)?;
    let rows = config
        .estimators
        .iter()
        .map(|&e| {
            let start = Instant::now();
            let report = run_estimator(e, &data, &config.forest, config.knn_k, config.seed)?;
            let ms = config.timing.then(|| start.elapsed().as_secs_f64() * 1e3);
            Ok(ResultRow::from_report(
                &report,
                params.map(|p| p.0),
                params.map(|p| p.1),
                ms,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    emit(config, |out| write_results(&rows, out))
}

fn perm_test(config: &RunConfig) -> Result<()> {
    let estimator = single_estimator(config)?;
    let (data, _) = dataset(config)?;
    let estimate =
        |d: &LabeledDataset, s: u64| run_estimator(estimator, d, &config.forest, config.knn_k, s);
    let h_y = estimate(&data, config.seed)?.h_y;
    let result = permutation_test_with(&data, config.reps, config.seed, |d, s| {
        Ok(estimate(d, s)?.mi)
    })?;
    let normalized = if h_y > 0.0 {
        result.observed / h_y
    } else {
        0.0
    };
    emit(config, |out| {
        writeln!(out, "estimator,observed,observed_normalized,p_value,reps")
            .and_then(|_| {
                writeln!(
                    out,
                    "{estimator},{},{},{},{}",
                    crate::forest::fmt_num(result.observed),
                    crate::forest::fmt_num(normalized),
                    crate::forest::fmt_num(result.p_value),
                    config.reps
                )
            })
            .map_err(io_err)
    })
}

fn decompose(config: &RunConfig) -> Result<()> {
    let estimator = single_estimator(config)?;
    if config.subsets.is_empty() {
        return Err(Error::Config(
            "decompose needs --subsets, e.g. 'cluster|cluster,claw'".into(),
        ));
    }
    let (data, _) = dataset(config)?;
    let rows = mi_decomposition_with(&data, &config.subsets, config.seed, |d, s| {
        run_estimator(estimator, d, &config.forest, config.knn_k, s)
    })?;
    emit(config, |out| {
        write_decomposition(&rows, out).map_err(io_err)
    })
}

fn write_figure(figure: Figure, config: &RunConfig) -> Result<()> {
    let files = reproduce(figure, config)?;
    let dir: &Path = &config.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for f in files {
        let path = dir.join(&f.name);
        std::fs::write(&path, f.contents).map_err(|e| Error::io(&path, e))?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}
