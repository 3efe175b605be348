use std::path::PathBuf;
use std::process::ExitCode;

use choquard_cli::commands::{self, Check};
use choquard_cli::config::RunConfig;
use choquard_core::{Error, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "choquard", version, about = "Radial solver and verification suite for the fractional Choquard equation")]
struct Cli {
    /// Flat key=value configuration file; command-line flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct Common {
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    #[arg(long = "k-max")]
    k_max: Option<usize>,
    #[arg(long = "n-eigs")]
    n_eigs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (default: $OUTPUT_DIR, else ./output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for one ground state and cache its profile.
    Solve {
        #[arg(long)]
        s: f64,
        /// Warm start from a cached profile on the same grid.
        #[arg(long)]
        init: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep s downward from s-from, with spectra and optional continuation.
    Sweep {
        #[arg(long = "s-from", default_value_t = 1.0)]
        s_from: f64,
        #[arg(long = "s-to", default_value_t = 0.9)]
        s_to: f64,
        #[arg(long, default_value_t = 6)]
        steps: usize,
        #[arg(long = "no-continuation")]
        no_continuation: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Nondegeneracy reports for a list of s values.
    Spectrum {
        #[arg(long, value_delimiter = ',')]
        s: Vec<f64>,
        #[arg(long)]
        init: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Continue the s = 1 ground state to a list of targets.
    Continuation {
        #[arg(long, value_delimiter = ',', default_values_t = [0.99, 0.98, 0.95, 0.9])]
        s: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the extension Dirichlet-to-Neumann flux with the spectral operator.
    ExtensionCheck {
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.75, 0.9])]
        s: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Cross-validate the s = 1 solver against the finite-difference oracle.
    OracleCompare {
        #[command(flatten)]
        common: Common,
    },
    /// Run the verification checks on cached ground states.
    Verify {
        #[arg(long, value_delimiter = ',', value_enum)]
        skip: Vec<Check>,
        #[arg(long = "solve-first")]
        solve_first: bool,
        #[arg(long, value_delimiter = ',')]
        s: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Summarize the profiles and manifest in the output directory.
    Report {
        #[command(flatten)]
        common: Common,
    },
}

fn build_config(file: Option<&PathBuf>, common: &Common, s: &[f64]) -> Result<RunConfig> {
    let mut c = match file {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Parse {
                path: p.display().to_string(),
                message: e.to_string(),
            })?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Ok(dir) = std::env::var("OUTPUT_DIR") {
        if !dir.is_empty() {
            c.out_dir = PathBuf::from(dir);
        }
    }
    if let Some(v) = common.m {
        c.m = v;
    }
    if let Some(v) = common.rmax {
        c.r_max = v;
    }
    if let Some(v) = common.tol {
        c.tol = v;
    }
    if let Some(v) = common.max_iter {
        c.max_iter = v;
    }
    if let Some(v) = common.k_max {
        c.k_max = v;
    }
    if let Some(v) = common.n_eigs {
        c.n_eigs = v;
    }
    if let Some(v) = common.seed {
        c.seed = v;
    }
    if let Some(v) = &common.out {
        c.out_dir = v.clone();
    }
    if !s.is_empty() {
        c.s_values = s.to_vec();
    }
    Ok(c)
}

fn run(cli: Cli) -> Result<u8> {
    let f = cli.config.as_ref();
    match cli.command {
        Command::Solve { s, init, common } => {
            let c = build_config(f, &common, &[s])?;
            commands::solve(&c, s, init.as_deref())
        }
        Command::Sweep {
            s_from,
            s_to,
            steps,
            no_continuation,
            common,
        } => {
            let mut c = build_config(f, &common, &[])?;
            if no_continuation {
                c.continuation = false;
            }
            commands::sweep(&c, s_from, s_to, steps)
        }
        Command::Spectrum { s, init, common } => commands::spectrum(&build_config(f, &common, &s)?, init.as_deref()),
        Command::Continuation { s, common } => commands::continuation(&build_config(f, &common, &s)?),
        Command::ExtensionCheck { s, common } => commands::extension_check(&build_config(f, &common, &s)?),
        Command::OracleCompare { common } => commands::oracle(&build_config(f, &common, &[])?),
        Command::Verify {
            skip,
            solve_first,
            s,
            common,
        } => commands::verify(&build_config(f, &common, &s)?, &skip, solve_first),
        Command::Report { common } => commands::report(&build_config(f, &common, &[])?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_user_error() { 1 } else { commands::EXIT_NUMERIC })
        }
    }
}
