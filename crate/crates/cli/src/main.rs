//! `ddehopf`: Hopf points, series expansions, periodic orbits and their
//! validation for the built-in delay models.

mod commands;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ddehopf::{ErrorKind, Z0Scale};

#[derive(Parser)]
#[command(name = "ddehopf", version, about = "Poincaré–Lindstedt series for Hopf periodic orbits of delay equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Locate the Hopf point (critical frequency and delay).
    Hopf {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Series coefficients λ̂ⱼ, T̂ⱼ and the Fourier coefficients of Zⱼ.
    Expand {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        series: SeriesArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Amplitude and one period of the orbit at a given delay.
    Solve {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long)]
        lambda: f64,
        /// Samples over one period.
        #[arg(long, default_value_t = 512, value_parser = parse_count)]
        samples: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Per-component min/max over a delay grid.
    Diagram {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long, value_name = "START:STOP:COUNT", value_parser = parse_grid)]
        lambda_grid: Grid,
        /// Residual above which a point is flagged as extrapolated.
        #[arg(long, default_value_t = ddehopf::reconstruct::DEFAULT_EXTRAPOLATION_THRESHOLD)]
        threshold: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Relative DDE residual of the truncated orbit.
    Residual {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        series: SeriesArgs,
        #[command(flatten)]
        delays: DelayArgs,
        /// One row per order 2..=N instead of N only.
        #[arg(long)]
        each_order: bool,
        #[arg(long, default_value_t = ddehopf::reconstruct::DEFAULT_RESIDUAL_SAMPLES, value_parser = parse_samples)]
        samples: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Compare the truncated orbit with numerical integration.
    Validate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        series: SeriesArgs,
        #[command(flatten)]
        delays: DelayArgs,
        /// One row per order 2..=N instead of N only.
        #[arg(long)]
        each_order: bool,
        #[arg(long, default_value_t = 1e-9)]
        rtol: f64,
        #[arg(long, default_value_t = 1e-9)]
        atol: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Built-in model: ndde or sir. Defaults to the model named in --params.
    #[arg(long)]
    model: Option<String>,
    /// JSON file `{model, params, hopf_hint}`; only changed keys are needed.
    #[arg(long, value_name = "FILE")]
    params: Option<PathBuf>,
    /// Parameter override, applied after --params.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    param: Vec<String>,
    /// Start frequency for the Hopf search.
    #[arg(long)]
    hint_omega: Option<f64>,
    /// Start delay for the Hopf search.
    #[arg(long)]
    hint_lambda: Option<f64>,
}

#[derive(Args)]
struct SeriesArgs {
    /// Expansion order N.
    #[arg(long, default_value_t = 8, value_parser = parse_order)]
    order: usize,
    /// Leading-term scale: two-pi (2π·v₂), root-two-pi (√(2π)·v₂) or orthonormal (v₂).
    #[arg(long, value_enum, default_value_t = Z0ScaleArg::TwoPi)]
    z0_scale: Z0ScaleArg,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct DelayArgs {
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_name = "START:STOP:COUNT", value_parser = parse_grid)]
    lambda_grid: Option<Grid>,
}

impl DelayArgs {
    fn values(&self) -> Vec<f64> {
        match (&self.lambda, &self.lambda_grid) {
            (Some(l), _) => vec![*l],
            (None, Some(g)) => g.values(),
            (None, None) => unreachable!("clap requires one of the delay flags"),
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum Z0ScaleArg {
    #[value(alias = "paper")]
    TwoPi,
    RootTwoPi,
    #[value(alias = "unit")]
    Orthonormal,
}

impl From<Z0ScaleArg> for Z0Scale {
    fn from(a: Z0ScaleArg) -> Self {
        match a {
            Z0ScaleArg::TwoPi => Z0Scale::TwoPi,
            Z0ScaleArg::RootTwoPi => Z0Scale::RootTwoPi,
            Z0ScaleArg::Orthonormal => Z0Scale::Unit,
        }
    }
}

/// `count` evenly spaced delays from `start` to `stop`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Grid {
    start: f64,
    stop: f64,
    count: usize,
}

impl Grid {
    fn values(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.stop } else { self.start + i as f64 * step }).collect()
    }
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err("expected START:STOP:COUNT".into());
    };
    let start: f64 = a.parse().map_err(|e| format!("START: {e}"))?;
    let stop: f64 = b.parse().map_err(|e| format!("STOP: {e}"))?;
    let count: usize = n.parse().map_err(|e| format!("COUNT: {e}"))?;
    if !(start.is_finite() && stop.is_finite()) || start >= stop {
        return Err("START and STOP must be finite with START < STOP".into());
    }
    if count < 2 {
        return Err("COUNT must be at least 2".into());
    }
    Ok(Grid { start, stop, count })
}

fn parse_order(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        Ok(_) => Err("order must be at least 1".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_count(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 2 => Ok(n),
        Ok(_) => Err("need at least 2 samples".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_samples(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 256 => Ok(n),
        Ok(_) => Err("need at least 256 samples".into()),
        Err(e) => Err(e.to_string()),
    }
}

/// Exit status for a failed run.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|e| e.downcast_ref::<commands::ModelSetupError>().is_some()) {
        return 10;
    }
    match err.chain().find_map(|e| e.downcast_ref::<ddehopf::Error>()).map(ddehopf::Error::kind) {
        Some(ErrorKind::Model) => 10,
        Some(ErrorKind::Hopf) => 11,
        Some(ErrorKind::Solvability) => 12,
        Some(ErrorKind::EpsilonRoot) => 13,
        Some(ErrorKind::Validation) => 14,
        Some(ErrorKind::Input) | None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
