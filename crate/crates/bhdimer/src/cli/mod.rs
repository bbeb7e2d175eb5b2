//! Command-line front end: config resolution, subcommands and output.

mod commands;
mod config;
mod output;

pub use commands::{run_command, validate_suite, CheckResult, ValidateOptions};
pub use config::{
    ConvergeConfig, DecayConfig, DecayMethod, Format, OutputConfig, ResonanceConfig, RunConfig, ScatterConfig,
    SweepConfig, ValidateConfig,
};
pub use output::{fmt_f64, Report};

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "bhdimer", version, about = "Bose-Hubbard dimer scattering and trap decay")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Default)]
pub struct Shared {
    /// TOML or JSON config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long = "J", global = true)]
    pub j: Option<f64>,
    #[arg(long = "U", global = true, allow_hyphen_values = true)]
    pub u: Option<f64>,
    #[arg(long = "V", global = true, allow_hyphen_values = true)]
    pub v: Option<f64>,
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    #[arg(long = "N", global = true)]
    pub n: Option<i64>,
    #[arg(long = "K", global = true)]
    pub k: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// S-matrix and probabilities for a single (K, V).
    Scatter {
        #[command(flatten)]
        shared: Shared,
    },
    /// (K, V) map of probabilities, one CSV row per cell.
    Sweep {
        #[command(flatten)]
        shared: Shared,
        #[arg(long)]
        k_points: Option<usize>,
        #[arg(long)]
        v_points: Option<usize>,
    },
    /// |R(N) - R(N_ref)| against the box radius.
    Converge {
        #[command(flatten)]
        shared: Shared,
        #[arg(long)]
        n_ref: Option<i64>,
    },
    /// Gamov resonances of the trap.
    Resonances {
        #[command(flatten)]
        shared: Shared,
        /// Recover a synthetic single pole instead of analysing the trap.
        #[arg(long)]
        selftest: bool,
    },
    /// Non-escape probability from the Gamov expansion and/or Crank-Nicolson.
    Decay {
        #[command(flatten)]
        shared: Shared,
        #[arg(long, value_enum)]
        method: Option<DecayMethod>,
        /// Packet centre; repeat to compare packets.
        #[arg(long = "M")]
        m: Vec<f64>,
        #[arg(long)]
        t_max_over_t: Option<f64>,
    },
    /// Property suite: unitarity, elimination equivalence, CN norm, inversion.
    Validate {
        #[command(flatten)]
        shared: Shared,
        /// Flip the dimer phase inside H_eff only (mutation test).
        #[arg(long, hide = true)]
        tamper: bool,
    },
}

impl Command {
    pub fn shared(&self) -> &Shared {
        match self {
            Command::Scatter { shared }
            | Command::Sweep { shared, .. }
            | Command::Converge { shared, .. }
            | Command::Resonances { shared, .. }
            | Command::Decay { shared, .. }
            | Command::Validate { shared, .. } => shared,
        }
    }
}

/// Config file (if any) with flag overrides applied.
pub fn resolve_config(cmd: &Command) -> Result<RunConfig> {
    let sh = cmd.shared();
    let mut c = match &sh.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(j) = sh.j {
        c.model.j = j;
    }
    if let Some(u) = sh.u {
        c.model.u = u;
    }
    if let Some(v) = sh.v {
        config::set_v(&mut c.potential, v)?;
    }
    if let Some(s) = sh.sigma {
        config::set_sigma(&mut c.potential, s)?;
    }
    if let Some(n) = sh.n {
        c.scatter.n = n;
        c.trap.n = n;
    }
    if let Some(k) = sh.k {
        c.scatter.k = k;
        c.decay.k = k;
    }
    if let Some(o) = &sh.out {
        c.output.out = Some(o.clone());
    }
    if let Some(f) = sh.format {
        c.output.format = f;
    }
    if let Some(j) = sh.jobs {
        c.jobs = j;
    }
    if let Some(s) = sh.seed {
        c.seed = s;
    }
    match cmd {
        Command::Sweep { k_points, v_points, .. } => {
            if let Some(k) = k_points {
                c.sweep.k_points = *k;
            }
            if let Some(v) = v_points {
                c.sweep.v_points = *v;
            }
        }
        Command::Converge { n_ref, .. } => {
            if let Some(n) = n_ref {
                c.converge.n_ref = *n;
            }
        }
        Command::Decay { method, m, t_max_over_t, .. } => {
            if let Some(x) = method {
                c.decay.method = *x;
            }
            if !m.is_empty() {
                c.decay.m = m.clone();
            }
            if let Some(t) = t_max_over_t {
                c.decay.t_max_over_t = *t;
            }
        }
        _ => {}
    }
    if c.jobs == 0 {
        return Err(Error::Config("jobs must be at least 1".into()));
    }
    c.params()?;
    c.potential()?;
    Ok(c)
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = resolve_config(&cli.command).and_then(|cfg| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        let report = pool.install(|| run_command(&cli.command, &cfg))?;
        report.emit(&cfg)?;
        Ok(report.exit_code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
