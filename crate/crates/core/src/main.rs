use std::fs;
use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use optocorr::cli::{error_line, parse_config, run, Overrides};
use optocorr::Result;

/// Steady-state entanglement and Gaussian discord of a squeezed-light-driven
/// two-cavity optomechanical system.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Args {
    /// point, sweep, preset or physical-convert.
    #[arg(long)]
    mode: Option<String>,
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV (sweep) or directory (preset).
    #[arg(long)]
    out: Option<PathBuf>,
    /// fig2 … fig7.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long = "C1", value_name = "C1")]
    c1: Option<String>,
    #[arg(long)]
    r: Option<String>,
    /// Mirror bath occupancy; replaces T.
    #[arg(long)]
    nth: Option<String>,
    /// Mirror bath temperature in K; replaces nth.
    #[arg(long = "T", value_name = "KELVIN")]
    temperature: Option<String>,
    /// rad/s, or 2pi*<Hz>.
    #[arg(long)]
    kappa1: Option<String>,
    /// rad/s, or 2pi*<Hz>.
    #[arg(long)]
    kappa2: Option<String>,
    /// Mechanical damping, rad/s or 2pi*<Hz>.
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    points: Option<usize>,
    /// linear or log.
    #[arg(long)]
    scale: Option<String>,
    /// More diagnostics on stderr (-v, -vv).
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn execute(args: Args) -> Result<()> {
    let text = args.config.as_ref().map(fs::read_to_string).transpose()?;
    let overrides = Overrides {
        mode: args.mode,
        out: args.out,
        preset: args.preset,
        c1: args.c1,
        r: args.r,
        nth: args.nth,
        temperature: args.temperature,
        kappa1: args.kappa1,
        kappa2: args.kappa2,
        gamma: args.gamma,
        points: args.points,
        scale: args.scale,
    };
    let cfg = parse_config(text.as_deref(), &overrides)?;
    run(&cfg, &mut io::stdout().lock())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = match args.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_line(&e));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
