mod commands;
mod config;
mod table;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Settings;
use crate::table::Format;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Model(mattis::Error),
    Io(io::Error),
    /// The verification suite ran and at least one criterion failed.
    VerifyFailed(Vec<usize>),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::VerifyFailed(_) => 1,
            CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Model(mattis::Error::NoConvergence { .. } | mattis::Error::LinAlg(_)) => 3,
            CliError::Model(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(s) => write!(f, "invalid input: {s}"),
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::VerifyFailed(ids) => write!(f, "verification failed for criteria {ids:?}"),
        }
    }
}

impl From<mattis::Error> for CliError {
    fn from(e: mattis::Error) -> Self {
        CliError::Model(e)
    }
}

impl From<mattis::ParamViolation> for CliError {
    fn from(e: mattis::ParamViolation) -> Self {
        CliError::Model(e.into())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(io::Error::other(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

/// Spectrum, free energy and correlation functions of the 2+1D Mattis model.
#[derive(Debug, Parser)]
#[command(name = "mattis", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, global = true, allow_hyphen_values = true)]
    gamma1: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    gamma2: Option<String>,
    /// Fermi velocity v_F.
    #[arg(long, global = true)]
    vf: Option<String>,
    /// UV cutoff ã.
    #[arg(long, global = true)]
    a_tilde: Option<String>,
    /// Odd number of chains per direction, L/ã.
    #[arg(long, global = true)]
    l_over_a: Option<String>,
    /// Inverse temperature, a number or "inf".
    #[arg(long, global = true)]
    beta: Option<String>,
    /// Regulator ε.
    #[arg(long, global = true)]
    epsilon: Option<String>,
    /// Quadrature tolerance.
    #[arg(long, global = true)]
    tol: Option<String>,
    /// csv or json.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Output file; standard output if absent.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Flat key = value file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Angular dependence of ω± and of the effective dispersion.
    Dispersion {
        #[arg(long)]
        pmag: Option<String>,
        #[arg(long)]
        ntheta: Option<String>,
    },
    /// Free energy from the lattice sum, the split integral or the QFT limit.
    FreeEnergy {
        /// lattice-sum, split-integral or qft.
        #[arg(long)]
        mode: Option<String>,
        /// theta, gaussian or closed.
        #[arg(long)]
        zero_mode: Option<String>,
    },
    /// Density and fermion correlation functions.
    Correlator {
        /// density, fermion2, fermionN or qft2.
        #[arg(long)]
        kind: Option<String>,
        /// finite or ir.
        #[arg(long)]
        sum: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        r1: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        s1: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        r2: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        s2: Option<String>,
        /// Comma-separated separations along the first insertion's direction.
        #[arg(long, allow_hyphen_values = true)]
        xs: Option<String>,
        /// Chain offset in units of ã.
        #[arg(long, allow_hyphen_values = true)]
        chain: Option<String>,
        /// Real time of the first insertion.
        #[arg(long, allow_hyphen_values = true)]
        time: Option<String>,
        /// Euclidean time τ of the first insertion, t = time - iτ.
        #[arg(long)]
        tau: Option<String>,
        /// Insertions for fermionN: "q,r,s,x+,x-[,t[,tau]];...".
        #[arg(long, allow_hyphen_values = true)]
        ops: Option<String>,
        /// Length scale L0 of the renormalized two-point function.
        #[arg(long)]
        l0: Option<String>,
        /// Comma-separated ε values for extrapolation columns.
        #[arg(long)]
        eps_seq: Option<String>,
    },
    /// The constant C(γ1, γ2), or a sweep along γ1 = γ2.
    Cconst {
        #[arg(long)]
        sweep: bool,
        #[arg(long, allow_hyphen_values = true)]
        gamma_min: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        gamma_max: Option<String>,
        #[arg(long)]
        ngamma: Option<String>,
    },
    /// Run the acceptance suite.
    Verify {
        /// Comma-separated criterion ids; all if absent.
        #[arg(long)]
        criteria: Option<String>,
    },
}

pub const CONFIG_KEYS: &[&str] = &[
    "gamma1", "gamma2", "vf", "a-tilde", "l-over-a", "beta", "epsilon", "tol", "format", "out", "pmag", "ntheta",
    "mode", "zero-mode", "kind", "sum", "r1", "s1", "r2", "s2", "xs", "chain", "time", "tau", "ops", "l0",
    "eps-seq", "sweep", "gamma-min", "gamma-max", "ngamma", "criteria",
];

fn settings(cli: &Cli) -> Result<Settings, CliError> {
    let mut s = match &cli.common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("config {path}: {e}")))?;
            Settings::parse_file(&text, CONFIG_KEYS)?
        }
        None => Settings::default(),
    };
    let c = &cli.common;
    for (k, v) in [
        ("gamma1", &c.gamma1),
        ("gamma2", &c.gamma2),
        ("vf", &c.vf),
        ("a-tilde", &c.a_tilde),
        ("l-over-a", &c.l_over_a),
        ("beta", &c.beta),
        ("epsilon", &c.epsilon),
        ("tol", &c.tol),
        ("format", &c.format),
        ("out", &c.out),
    ] {
        s.set(k, v.as_ref());
    }
    let t = "true".to_string();
    match &cli.command {
        Command::Dispersion { pmag, ntheta } => {
            s.set("pmag", pmag.as_ref());
            s.set("ntheta", ntheta.as_ref());
        }
        Command::FreeEnergy { mode, zero_mode } => {
            s.set("mode", mode.as_ref());
            s.set("zero-mode", zero_mode.as_ref());
        }
        Command::Correlator { kind, sum, r1, s1, r2, s2, xs, chain, time, tau, ops, l0, eps_seq } => {
            for (k, v) in [
                ("kind", kind),
                ("sum", sum),
                ("r1", r1),
                ("s1", s1),
                ("r2", r2),
                ("s2", s2),
                ("xs", xs),
                ("chain", chain),
                ("time", time),
                ("tau", tau),
                ("ops", ops),
                ("l0", l0),
                ("eps-seq", eps_seq),
            ] {
                s.set(k, v.as_ref());
            }
        }
        Command::Cconst { sweep, gamma_min, gamma_max, ngamma } => {
            s.set("sweep", sweep.then_some(&t));
            s.set("gamma-min", gamma_min.as_ref());
            s.set("gamma-max", gamma_max.as_ref());
            s.set("ngamma", ngamma.as_ref());
        }
        Command::Verify { criteria } => s.set("criteria", criteria.as_ref()),
    }
    Ok(s)
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("MATTIS_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("MATTIS_THREADS={v:?} is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let mut s = settings(&cli)?;
    let format: Format = s.get("format", Format::Csv)?;
    let out: Option<String> = s.get_opt("out")?;
    let (name, outcome) = match &cli.command {
        Command::Dispersion { .. } => ("dispersion", commands::dispersion(&mut s).map(|t| (t, vec![]))),
        Command::FreeEnergy { .. } => ("free-energy", commands::free_energy(&mut s).map(|t| (t, vec![]))),
        Command::Correlator { .. } => ("correlator", commands::correlator(&mut s).map(|t| (t, vec![]))),
        Command::Cconst { .. } => ("cconst", commands::cconst(&mut s).map(|t| (t, vec![]))),
        Command::Verify { .. } => ("verify", commands::verify(&mut s)),
    };
    let (table, failed) = outcome?;
    let mut meta = vec![("command".to_string(), name.to_string())];
    meta.extend(s.resolved().iter().filter(|(k, _)| k != "out").cloned());
    let mut sink: Box<dyn Write> = match &out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    table.write(&mut sink, format, &meta)?;
    sink.flush()?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::VerifyFailed(failed))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mattis: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
