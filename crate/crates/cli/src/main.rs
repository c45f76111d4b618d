use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lipfree_cli::{load_report, render, report_diff, run_suite, write_report, CliError, GenSpec, SpaceSource, Suite, SuiteConfig};

#[derive(Parser)]
#[command(name = "lipfree", version, about = "Free p-space norms and operator checks on finite metric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated space file.
    Generate {
        /// Generator spec, e.g. `grid-zd,dim=2,lo=0,hi=3` or `annulus-rays,rays=8,radii=1:2:4`.
        spec: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite and write its report.
    Run {
        /// Space file (JSON or CSV) or `gen:<generator spec>`.
        #[arg(long)]
        space: String,
        #[arg(long)]
        suite: String,
        /// Comma separated exponents in (0, 1].
        #[arg(long, default_value = "1")]
        p: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Tolerance override `KEY=VAL`, repeatable.
        #[arg(long = "tol-override")]
        tol_override: Vec<String>,
        /// Suite parameter `KEY=VAL`, repeatable.
        #[arg(long)]
        param: Vec<String>,
        /// Largest space solved by tree enumeration.
        #[arg(long, default_value_t = lipfree::free_norm::FOREST_LIMIT)]
        exact_limit: usize,
        /// Record wall time in the report (breaks byte-identical reruns).
        #[arg(long)]
        timing: bool,
    },
    /// Compare measured constants of two reports.
    Diff { old: PathBuf, new: PathBuf },
}

fn key_values(items: &[String]) -> Result<BTreeMap<String, String>, CliError> {
    items
        .iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| CliError::Usage(format!("expected KEY=VAL, got {kv:?}")))
        })
        .collect()
}

fn parse_p(list: &str) -> Result<Vec<f64>, CliError> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| CliError::Usage(format!("bad exponent {s:?}"))))
        .collect()
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Generate { spec, out } => {
            let file = GenSpec::parse(&spec)?.generate()?;
            let text = serde_json::to_string_pretty(&file).expect("space file serializes") + "\n";
            match out {
                Some(path) => std::fs::write(&path, text)
                    .map_err(|source| CliError::Io { path: path.display().to_string(), source })?,
                None => print!("{text}"),
            }
            Ok(true)
        }
        Command::Run { space, suite, p, seed, out, tol_override, param, exact_limit, timing } => {
            let mut cfg = SuiteConfig::new(Suite::parse(&suite)?, SpaceSource::parse(&space)?, parse_p(&p)?);
            cfg.seed = seed;
            cfg.exact_limit = exact_limit;
            cfg.timing = timing;
            cfg.params = key_values(&param)?;
            cfg.tol_overrides = key_values(&tol_override)?
                .into_iter()
                .map(|(k, v)| v.parse::<f64>().map(|x| (k.clone(), x)).map_err(|_| CliError::Usage(format!("bad tolerance {k}={v}"))))
                .collect::<Result<_, _>>()?;
            cfg.out = out;
            let report = run_suite(&cfg)?;
            match &cfg.out {
                Some(path) => write_report(&report, path)?,
                None => print!("{}", report.to_json()),
            }
            for c in report.failures() {
                eprintln!("FAIL {}: measured {:e}, bound {:?}", c.id, c.measured, c.bound);
            }
            eprintln!("{}: {} checks, {} failed", report.suite, report.checks.len(), report.failures().count());
            Ok(report.pass)
        }
        Command::Diff { old, new } => {
            let rows = report_diff(&load_report(&old)?, &load_report(&new)?)?;
            print!("{}", render(&rows));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
