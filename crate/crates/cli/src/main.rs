use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use lmmse_lab::experiment::{emit_report, run_scenario, sig9, trace_transmissions, write_trace, ScenarioConfig};
use lmmse_lab::theory::{average_gain_bound, fuzzy_bound_dof, ChiSquareDims, ComparisonTheoryQuery};
use lmmse_lab::IndexMethod;

#[derive(Parser)]
#[command(name = "lmmse-lab", version, about = "Enhanced LMMSE channel estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Full,
    Split,
}

impl From<Method> for IndexMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::Full => IndexMethod::Full,
            Method::Split => IndexMethod::Split,
        }
    }
}

/// Chi-square dimension used for the false-comparison probability.
#[derive(Clone, Copy, ValueEnum)]
enum Dims {
    /// K degrees of freedom.
    K,
    /// 2K degrees of freedom.
    #[value(name = "2k")]
    TwoK,
}

impl From<Dims> for ChiSquareDims {
    fn from(d: Dims) -> Self {
        match d {
            Dims::K => ChiSquareDims::SequenceLength,
            Dims::TwoK => ChiSquareDims::TwiceSequenceLength,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo campaign and write summary.csv, trials.csv and manifest.txt.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// False-comparison probability for relative gaps `alpha` and sequence lengths `k`.
    Theory {
        #[arg(long, value_delimiter = ',', required = true)]
        alpha: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        #[arg(long, value_enum, default_value = "k")]
        dims: Dims,
    },
    /// Fuzzy bound for a false-comparison ceiling `eps0` and sequence lengths `k`.
    Bound {
        #[arg(long)]
        eps0: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        #[arg(long, value_enum, default_value = "k")]
        dims: Dims,
    },
    /// Per-transmission MSE trace of an estimated_corr configuration.
    Trace {
        #[arg(long)]
        config: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(path: &Path, trials: Option<usize>, seed: Option<u64>) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(t) = trials {
        cfg.trials = t;
    }
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    Ok(cfg)
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, out, trials, seed, method } => {
            let mut cfg = load(&config, trials, seed)?;
            if let Some(m) = method {
                cfg.method = Some(m.into());
            }
            let report = run_scenario(&cfg)?;
            emit_report(&report, &out).with_context(|| format!("writing to {}", out.display()))?;
            eprintln!(
                "{}: {} rows, {} trials per point, {:.1}s -> {}",
                report.scenario,
                report.rows.len(),
                cfg.trials,
                report.wall_time_s,
                out.display()
            );
        }
        Command::Theory { alpha, k, dims } => {
            let mut w = io::stdout().lock();
            writeln!(w, "alpha,k,epsilon")?;
            for &a in &alpha {
                for &kk in &k {
                    let eps = ComparisonTheoryQuery::new(a, kk)?.with_dims(dims.into()).epsilon()?;
                    writeln!(w, "{},{},{}", sig9(a), kk, sig9(eps))?;
                }
            }
        }
        Command::Bound { eps0, k, dims } => {
            let mut w = io::stdout().lock();
            writeln!(w, "eps0,k,fuzzy_bound,average_gain_bound")?;
            let dims: ChiSquareDims = dims.into();
            for &kk in &k {
                if kk == 0 {
                    bail!("k must be positive");
                }
                let b = fuzzy_bound_dof(eps0, dims.dof(kk))?;
                writeln!(w, "{},{},{},{}", sig9(eps0), kk, sig9(b), sig9(average_gain_bound(b, eps0)))?;
            }
        }
        Command::Trace { config, out, trials, seed } => {
            let cfg = load(&config, trials, seed)?;
            let trace = trace_transmissions(&cfg)?;
            match out {
                Some(p) => write_trace(&trace, fs::File::create(&p).with_context(|| format!("creating {}", p.display()))?)?,
                None => write_trace(&trace, io::stdout().lock())?,
            }
        }
    }
    Ok(())
}
