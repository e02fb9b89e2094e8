use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use peterlin::study::run_level;
use peterlin::verify;
use peterlin_cli::config::{check_config, Overrides, RunConfig};
use peterlin_cli::report::{read_rows, table, CsvSink, Row};
use peterlin_cli::{bands, plot};

#[derive(Parser)]
#[command(name = "peterlin", version, about = "Lagrange-Galerkin convergence studies for the Peterlin model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the manufactured problem on each level and report Er1..Er6.
    Run(Flags),
    /// Draw a log-log SVG from a CSV written by `run`.
    Plot {
        /// CSV produced by `run --out`.
        csv: PathBuf,
        /// Output SVG; defaults to the CSV path with an `.svg` extension.
        #[arg(long)]
        plot_out: Option<PathBuf>,
    },
    /// Run the property suites and report pass/fail per suite.
    Check(Flags),
}

#[derive(Args)]
struct Flags {
    /// JSON file with the same keys as the flags (dashes as underscores).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta0: Option<f64>,
    /// Division numbers N, comma separated and ascending.
    #[arg(long, value_delimiter = ',')]
    levels: Option<Vec<usize>>,
    /// Δt = dt_ratio / N.
    #[arg(long)]
    dt_ratio: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    newton_tol: Option<f64>,
    #[arg(long)]
    newton_max_iter: Option<usize>,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG output path.
    #[arg(long)]
    plot_out: Option<PathBuf>,
    /// Exit nonzero unless the reference-case bands hold.
    #[arg(long)]
    assert: bool,
    /// Seed for the random property suites.
    #[arg(long)]
    seed: Option<u64>,
    /// Random samples for the cancellation-identity and adjugate suites.
    #[arg(long)]
    samples: Option<usize>,
}

impl Flags {
    fn overrides(self) -> Result<Overrides> {
        let file = match &self.config {
            Some(path) => Overrides::from_file(path)?,
            None => Overrides::default(),
        };
        Ok(file.layered(Overrides {
            nu: self.nu,
            eps: self.eps,
            delta0: self.delta0,
            levels: self.levels,
            dt_ratio: self.dt_ratio,
            t_end: self.t_end,
            newton_tol: self.newton_tol,
            newton_max_iter: self.newton_max_iter,
            out: self.out,
            plot_out: self.plot_out,
            assert: self.assert.then_some(true),
            seed: self.seed,
            samples: self.samples,
        }))
    }
}

fn cmd_run(cfg: RunConfig) -> Result<bool> {
    let mut sink = cfg.out.as_deref().map(CsvSink::create).transpose()?;
    let mut rows = Vec::new();
    for &n in &cfg.levels {
        match run_level(&cfg.study, n) {
            Ok(level) => {
                let row = Row::new(&level, cfg.study.nu, cfg.study.eps);
                if let Some(s) = sink.as_mut() {
                    s.push(&row)?;
                }
                rows.push(row);
            }
            Err(e) => {
                if let Some(s) = sink.as_mut() {
                    s.fail(n, &e.to_string())?;
                }
                print!("{}", table(&rows));
                return Err(e).with_context(|| format!("level N={n} failed"));
            }
        }
    }
    print!("{}", table(&rows));
    if let Some(path) = &cfg.plot_out {
        fs::write(path, plot::render(&rows)?).with_context(|| format!("writing {}", path.display()))?;
    }
    if !cfg.assert {
        return Ok(true);
    }
    match bands::evaluate(&rows) {
        Some(checks) => {
            for c in &checks {
                println!("{c}");
            }
            Ok(checks.iter().all(|c| c.passed))
        }
        None => {
            println!("no reference bands for nu={}, eps={}", cfg.study.nu, cfg.study.eps);
            Ok(true)
        }
    }
}

fn cmd_plot(csv: PathBuf, out: Option<PathBuf>) -> Result<bool> {
    let rows = read_rows(&csv)?;
    let out = out.unwrap_or_else(|| csv.with_extension("svg"));
    fs::write(&out, plot::render(&rows)?).with_context(|| format!("writing {}", out.display()))?;
    Ok(true)
}

fn cmd_check(o: &Overrides) -> bool {
    let reports = verify::run_all(&check_config(o));
    for r in &reports {
        println!("{r}");
    }
    reports.iter().all(|r| r.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let result = match Cli::parse().command {
        Command::Run(flags) => flags.overrides().and_then(RunConfig::resolve).and_then(cmd_run),
        Command::Plot { csv, plot_out } => cmd_plot(csv, plot_out),
        Command::Check(flags) => flags.overrides().map(|o| cmd_check(&o)),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
