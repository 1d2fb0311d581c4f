//! Command-line experiment runner.
//!
//! Exit codes: 0 pass, 1 verdict fail, 2 divergent, 3 configuration error.

pub mod config;
pub mod experiment;
pub mod report;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::estimator::Outcome;
use crate::rates::rate_row;
use config::{parse_config, ExperimentConfig, MethodKind};
use experiment::RunReport;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_DIVERGENT: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hblab", version, about = "Heavy ball momentum experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Experiment configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `[output] dir`. Nothing is written when unset.
    #[arg(long, global = true, env = "HBLAB_OUT")]
    pub out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the sweep worker count.
    #[arg(long, global = true)]
    pub parallelism: Option<usize>,
    /// What to print on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Txt)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Txt,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form optimal hyperparameters and rates for (mu, L) pairs.
    Rates {
        /// Comma-separated mu values.
        #[arg(long, value_delimiter = ',', required = true)]
        mu: Vec<f64>,
        /// Comma-separated L values (a single value is broadcast).
        #[arg(
            long = "l",
            visible_alias = "L",
            value_delimiter = ',',
            required = true
        )]
        l: Vec<f64>,
    },
    /// Run the configured discrete method (or ODE) and fit its rate.
    Run,
    /// Integrate the heavy ball ODE; the config must use `hb_ode`.
    Ode,
    /// Run every point of the `[sweep]` grid.
    Sweep,
    /// Spectrum of the linearized method at the probe anchor.
    Spectral,
    /// Sample the geometry constants on the `[probe]` regions.
    Probe,
    /// Optimal heavy ball against optimal gradient descent.
    Compare,
}

/// Exit code for an error: configuration problems are 3, anything else 1.
pub fn error_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::InvalidSpec(_) | Error::InvalidParameter(_) => EXIT_CONFIG,
        _ => EXIT_FAIL,
    }
}

fn outcome_code(o: Outcome) -> i32 {
    match o {
        Outcome::Pass => EXIT_PASS,
        Outcome::Fail => EXIT_FAIL,
        Outcome::Divergent => EXIT_DIVERGENT,
    }
}

struct Output {
    dir: Option<PathBuf>,
    prefix: String,
    format: Format,
}

impl Output {
    fn write(&self, suffix: &str, contents: &str) -> Result<()> {
        if let Some(dir) = &self.dir {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(format!("{}_{suffix}", self.prefix)), contents)?;
        }
        Ok(())
    }

    fn print(&self, csv: &str, txt: &str) {
        match self.format {
            Format::Csv => print!("{csv}"),
            Format::Txt => print!("{txt}"),
        }
    }
}

fn load_config(global: &GlobalArgs) -> Result<ExperimentConfig> {
    let path = global.config.as_deref().ok_or_else(|| Error::Config {
        line: 0,
        message: "this subcommand needs --config PATH".into(),
    })?;
    let text = fs::read_to_string(path).map_err(|e| Error::Config {
        line: 0,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    let mut cfg = parse_config(&text)?;
    if let Some(seed) = global.seed {
        cfg.seed = seed;
    }
    if let (Some(p), Some(sweep)) = (global.parallelism, cfg.sweep.as_mut()) {
        sweep.parallelism = p.max(1);
    }
    Ok(cfg)
}

fn output_for(global: &GlobalArgs, cfg: Option<&ExperimentConfig>) -> Output {
    Output {
        dir: global
            .out
            .clone()
            .or_else(|| cfg.and_then(|c| c.output.dir.clone())),
        prefix: cfg.map_or_else(|| "rates".into(), |c| c.output.prefix.clone()),
        format: global.format,
    }
}

fn single_run(cfg: &ExperimentConfig, out: &Output) -> Result<i32> {
    let r = experiment::run_experiment(cfg)?;
    let csv = report::summary_csv(std::slice::from_ref(&r));
    let txt = report::summary_text(&r);
    out.write("summary.csv", &csv)?;
    out.write("summary.txt", &txt)?;
    if let Some(traj) = report::trajectory_csv(&r) {
        out.write("trajectory.csv", &traj)?;
    }
    out.print(&csv, &txt);
    Ok(outcome_code(r.verdict.outcome))
}

fn sweep_code(rows: &[RunReport]) -> i32 {
    if rows.iter().all(RunReport::as_expected) {
        EXIT_PASS
    } else if rows
        .iter()
        .any(|r| r.verdict.outcome == Outcome::Divergent && !r.expected_divergent)
    {
        EXIT_DIVERGENT
    } else {
        EXIT_FAIL
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let g = &cli.global;
    match &cli.command {
        Command::Rates { mu, l } => {
            let n = mu.len().max(l.len());
            let pick = |v: &[f64], i: usize| {
                if v.len() == 1 {
                    Some(v[0])
                } else {
                    v.get(i).copied()
                }
            };
            if !(mu.len() == l.len() || mu.len() == 1 || l.len() == 1) {
                return Err(Error::InvalidParameter(format!(
                    "--mu has {} values and --l has {}; give equal lengths or a single value",
                    mu.len(),
                    l.len()
                )));
            }
            let rows = (0..n)
                .map(|i| rate_row(pick(mu, i).unwrap(), pick(l, i).unwrap()))
                .collect::<Result<Vec<_>>>()?;
            let out = output_for(g, None);
            let csv = report::rates_csv(&rows);
            out.write("table.csv", &csv)?;
            out.print(&csv, &report::rates_text(&rows));
            Ok(EXIT_PASS)
        }
        Command::Run => {
            let cfg = load_config(g)?;
            single_run(&cfg, &output_for(g, Some(&cfg)))
        }
        Command::Ode => {
            let cfg = load_config(g)?;
            if cfg.method.kind() != MethodKind::HbOde {
                return Err(Error::Config {
                    line: 0,
                    message: format!(
                        "`ode` needs method hb_ode, config has {}",
                        cfg.method.kind().as_str()
                    ),
                });
            }
            single_run(&cfg, &output_for(g, Some(&cfg)))
        }
        Command::Sweep => {
            let cfg = load_config(g)?;
            let grid = cfg.sweep.clone().ok_or_else(|| Error::Config {
                line: 0,
                message: "`sweep` needs a [sweep] section".into(),
            })?;
            let out = output_for(g, Some(&cfg));
            let rows = experiment::run_sweep(&cfg, &grid, |i, r| {
                if cfg.output.trajectories {
                    if let Some(traj) = report::trajectory_csv(r) {
                        out.write(&format!("point{i:04}_trajectory.csv"), &traj)?;
                    }
                }
                Ok(())
            })?;
            let csv = report::summary_csv(&rows);
            let txt: String = rows
                .iter()
                .enumerate()
                .map(|(i, r)| format!("[point {i}]\n{}\n", report::summary_text(r)))
                .collect();
            out.write("sweep.csv", &csv)?;
            out.write("sweep.txt", &txt)?;
            out.print(&csv, &txt);
            Ok(sweep_code(&rows))
        }
        Command::Spectral => {
            let cfg = load_config(g)?;
            let s = experiment::spectral(&cfg)?;
            let out = output_for(g, Some(&cfg));
            let csv = report::spectral_csv(&s);
            out.write("spectral.csv", &csv)?;
            out.print(&csv, &report::spectral_text(&s));
            Ok(EXIT_PASS)
        }
        Command::Probe => {
            let cfg = load_config(g)?;
            let reports = experiment::probe(&cfg)?;
            let out = output_for(g, Some(&cfg));
            let label = cfg.objective.label();
            let csv = report::probe_csv(&label, &reports);
            out.write("probe.csv", &csv)?;
            out.print(&csv, &report::probe_text(&label, &reports));
            Ok(EXIT_PASS)
        }
        Command::Compare => {
            let cfg = load_config(g)?;
            let (hb, gd) = experiment::compare(&cfg)?;
            let out = output_for(g, Some(&cfg));
            let rows = [hb, gd];
            let csv = report::summary_csv(&rows);
            let mut txt = format!(
                "heavy ball\n{}\ngradient descent\n{}",
                report::summary_text(&rows[0]),
                report::summary_text(&rows[1])
            );
            if let (Some(a), Some(b)) = (rows[0].estimate, rows[1].estimate) {
                txt.push_str(&format!(
                    "\nfitted rates: heavy ball {:.6}, gradient descent {:.6}\n",
                    a.rate, b.rate
                ));
            }
            out.write("compare.csv", &csv)?;
            out.write("compare.txt", &txt)?;
            out.print(&csv, &txt);
            Ok(rows
                .iter()
                .map(|r| outcome_code(r.verdict.outcome))
                .max()
                .unwrap_or(EXIT_PASS))
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            error_code(&e)
        }
    }
}

/// Path of an output file for callers that want to read it back.
pub fn output_path(dir: &Path, prefix: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{prefix}_{suffix}"))
}
