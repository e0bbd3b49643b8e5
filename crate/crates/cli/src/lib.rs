//! Command-line front end over the `fbdomain` library.
//!
//! Exit codes: 0 on success, 1 when a verification or certification fails,
//! 2 on usage or parse errors (with usage text on stderr).

mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand};

pub use config::Config;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fbd", about = "Jets, parabolic curve, Fatou coordinates and basin rasters")]
struct Cli {
    /// Sector radius of the invariant domain.
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Inner radius of the shrunken domain.
    #[arg(long = "R", global = true)]
    r: Option<f64>,
    /// Jet order (curve order for the analytic commands).
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Iteration budget for classification.
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Stopping tolerance of the Fatou limits.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output file (stdout when omitted; required by `basin`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Plain-text `key=value` configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Embed a Unix timestamp in JSON reports.
    #[arg(long, global = true)]
    stamp: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full invariant suite and write a JSON report.
    Verify {
        /// Seed of the random samples.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the germ coefficients of the map chain.
    Jet,
    /// Iterate the map from a seed and write a CSV trace.
    Orbit {
        /// Initial z as `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        /// Initial w as `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        w: String,
        /// Number of steps.
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Iterate in double-double arithmetic.
        #[arg(long)]
        extended: bool,
    },
    /// Solve the parabolic curve and write it as JSON.
    Curve,
    /// Evaluate ψ and Υ at the points of a CSV file `re_z,im_z,re_w,im_w`.
    Fatou {
        /// Input CSV (a header line is optional).
        #[arg(long)]
        input: PathBuf,
    },
    /// Classify a slice and write a PGM raster plus a JSON sidecar.
    Basin {
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        height: Option<usize>,
        /// Fixed w of the z-plane slice as `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        slice_w: Option<String>,
        /// Real range of z as `lo,hi`.
        #[arg(long, allow_hyphen_values = true)]
        slice_re: Option<String>,
        /// Imaginary range of z as `lo,hi`.
        #[arg(long, allow_hyphen_values = true)]
        slice_im: Option<String>,
    },
    /// Report the parameter certification inequalities.
    Certify,
}

fn build_config(cli: &Cli) -> Result<Config, CliError> {
    let mut cfg = Config::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        cfg.apply_file(&text)?;
    }
    let flags = [
        ("eps", cli.eps.map(|v| v.to_string())),
        ("R", cli.r.map(|v| v.to_string())),
        ("order", cli.order.map(|v| v.to_string())),
        ("budget", cli.budget.map(|v| v.to_string())),
        ("tol", cli.tol.map(|v| v.to_string())),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            cfg.set(k, &v)?;
        }
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    match &cli.command {
        Command::Verify { seed: Some(s) } => cfg.seed = *s,
        Command::Basin { width, height, slice_w, slice_re, slice_im } => {
            let opt = [("width", width.map(|v| v.to_string())), ("height", height.map(|v| v.to_string())), ("slice_w", slice_w.clone()), ("slice_re", slice_re.clone()), ("slice_im", slice_im.clone())];
            for (k, v) in opt {
                if let Some(v) = v {
                    cfg.set(k, &v)?;
                }
            }
        }
        _ => {}
    }
    if cfg.tol.is_nan() || cfg.tol <= 0.0 {
        return Err(CliError::Usage(format!("tol must be positive, got {}", cfg.tol)));
    }
    Ok(cfg)
}

fn usage() -> String {
    Cli::command().render_usage().to_string()
}

/// Run with `argv[0]` as the program name; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return 0;
        }
        Err(e) => {
            eprint!("{e}");
            return 2;
        }
    };
    let result = build_config(&cli).and_then(|cfg| {
        if !matches!(cli.command, Command::Certify) {
            cfg.params()?;
        }
        commands::dispatch(&cli.command, &cfg, cli.stamp)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::Usage(_) = e {
                eprintln!("{}", usage());
            }
            e.exit_code()
        }
    }
}
