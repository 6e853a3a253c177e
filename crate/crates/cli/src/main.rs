//! `coalkin` command-line front end.
//!
//! Exit codes: 0 success, 1 invalid input (bad config, unknown scenario,
//! failed acceptance criterion), 2 numerical instability, 3 output I/O
//! failure.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use coalkin_core::acceptance::{run_criterion, CheckOptions, Suite};
use coalkin_core::{registry, Error, Placement, Scenario};

use crate::output::{reproduce_scenario, run_scenario};

#[derive(Parser, Debug)]
#[command(name = "coalkin", version, about = "Kinetic solver for jumping and coalescing particles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario file.
    Run {
        path: PathBuf,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        dx: Option<f64>,
        #[arg(long = "t-end")]
        t_end: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a registry scenario with its variants and write gnuplot profiles.
    Reproduce {
        id: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        dx: Option<f64>,
    },
    /// Run the acceptance criteria.
    Check {
        #[arg(long, value_enum, default_value_t = SuiteArg::Fast)]
        suite: SuiteArg,
        /// Force a jump placement in every model of the suite.
        #[arg(long, value_enum)]
        placement: Option<PlacementArg>,
        /// Run only these criterion numbers, e.g. `--criteria 3,4`.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
    },
    /// List registry scenarios.
    List,
    /// Print a registry scenario as a scenario file.
    Show { id: String },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SuiteArg {
    Fast,
    Full,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PlacementArg {
    Target,
    #[value(name = "paper_literal", alias = "paper-literal")]
    PaperLiteral,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Unstable { .. }) => 2,
        Some(Error::Io(_)) => 3,
        _ if err.downcast_ref::<std::io::Error>().is_some() => 3,
        _ => 1,
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("COALKIN_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn load(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(Error::from)
        .with_context(|| format!("reading {}", path.display()))?;
    Scenario::from_json(&text)
        .map_err(anyhow::Error::from)
        .with_context(|| format!("loading {}", path.display()))
}

fn cmd_run(path: &Path, dt: Option<f64>, dx: Option<f64>, t_end: Option<f64>, out: Option<PathBuf>) -> Result<()> {
    let mut s = load(path)?.with_resolution(dx, dt);
    if let Some(t) = t_end {
        s.time.t_end = t;
        s.time.snapshot_times.retain(|x| *x < t);
        s.time.snapshot_times.push(t);
    }
    if s.time.snapshot_times.is_empty() {
        s.time.snapshot_times.push(s.time.t_end);
    }
    s.validate()?;
    let dir = out.unwrap_or_else(|| default_dir(&s));
    let manifest = run_scenario(&s, &dir).with_context(|| format!("writing {}", dir.display()))?;
    println!("wrote {} files to {}", manifest.files.len(), dir.display());
    Ok(())
}

fn default_dir(s: &Scenario) -> PathBuf {
    PathBuf::from(s.output_dir.clone().unwrap_or_else(|| format!("out/{}", s.id)))
}

fn lookup(id: &str) -> Result<Scenario> {
    registry().into_iter().find(|s| s.id == id).ok_or_else(|| {
        let ids: Vec<String> = registry().into_iter().map(|s| s.id).collect();
        anyhow::anyhow!("unknown scenario id {id:?}; known scenarios: {}", ids.join(", "))
    })
}

fn cmd_reproduce(id: &str, out: Option<PathBuf>, dt: Option<f64>, dx: Option<f64>) -> Result<()> {
    let s = lookup(id)?.with_resolution(dx, dt);
    s.validate()?;
    let dir = out.unwrap_or_else(|| default_dir(&s));
    let files = reproduce_scenario(&s, &dir).with_context(|| format!("writing {}", dir.display()))?;
    println!("wrote {files} files to {}", dir.display());
    Ok(())
}

fn cmd_check(suite: SuiteArg, placement: Option<PlacementArg>, criteria: Vec<u8>) -> Result<bool> {
    let opts = CheckOptions {
        suite: match suite {
            SuiteArg::Fast => Suite::Fast,
            SuiteArg::Full => Suite::Full,
        },
        placement: placement.map(|p| match p {
            PlacementArg::Target => Placement::Target,
            PlacementArg::PaperLiteral => Placement::PaperLiteral,
        }),
    };
    let ids = if criteria.is_empty() { opts.suite.criteria() } else { criteria };
    if let Some(bad) = ids.iter().find(|id| !(1..=11).contains(*id)) {
        anyhow::bail!("no criterion numbered {bad}; valid numbers are 1 to 11");
    }
    let results: Vec<_> = ids
        .into_iter()
        .map(|id| {
            let r = run_criterion(id, &opts);
            println!("{r}");
            r
        })
        .collect();
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    Ok(failed == 0)
}

fn cmd_list() {
    for s in registry() {
        let times: Vec<String> = s.time.snapshot_times.iter().map(|t| t.to_string()).collect();
        println!("{:<30} T = {{{}}}", s.id, times.join(", "));
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let result = match cli.command {
        Command::Run { path, dt, dx, t_end, out } => cmd_run(&path, dt, dx, t_end, out),
        Command::Reproduce { id, out, dt, dx } => cmd_reproduce(&id, out, dt, dx),
        Command::Check { suite, placement, criteria } => match cmd_check(suite, placement, criteria) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(1),
            Err(e) => Err(e),
        },
        Command::List => {
            cmd_list();
            Ok(())
        }
        Command::Show { id } => lookup(&id).map(|s| println!("{}", s.to_json())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
