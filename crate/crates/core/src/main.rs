use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use otfs_rake::sim::{
    complexity_report, emit_csv, run_campaign, summary_table, write_complexity_csv, write_csv,
    DetectorSpec, SimSpec, StopRule,
};

#[derive(Parser)]
#[command(
    name = "otfs-sim",
    version,
    about = "OTFS delay-Doppler link simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// BER sweep over SNR for each detector
    Ber(RunArgs),
    /// FER sweep over SNR for each detector
    Fer(RunArgs),
    /// Formula and instrumented multiplication counts for one frame
    Complexity(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON campaign file; fields not given take their defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated SNR points in dB ("inf" for noiseless)
    #[arg(long, value_delimiter = ',')]
    snr: Vec<String>,
    /// Detectors as name[:iters], comma-separated or repeated
    #[arg(long, value_delimiter = ',')]
    detector: Vec<String>,
    /// Run exactly this many frames per point
    #[arg(long)]
    frames: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_snr(s: &str) -> Result<f64> {
    let s = s.trim();
    if s == "inf" {
        return Ok(f64::INFINITY);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => bail!("bad --snr value {s:?}"),
    }
}

fn load_spec(args: &RunArgs) -> Result<SimSpec> {
    let mut spec = match &args.config {
        Some(p) => SimSpec::from_json_file(p)?,
        None => SimSpec::default(),
    };
    if !args.snr.is_empty() {
        spec.snr_db = args
            .snr
            .iter()
            .map(|s| parse_snr(s))
            .collect::<Result<_>>()?;
    }
    if !args.detector.is_empty() {
        spec.detectors = args
            .detector
            .iter()
            .map(|d| d.parse::<DetectorSpec>())
            .collect::<Result<_, _>>()?;
    }
    if let Some(f) = args.frames {
        spec.stop = StopRule::fixed(f);
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Some(t) = args.threads {
        spec.threads = Some(t);
    }
    Ok(spec)
}

fn write_output(
    args: &RunArgs,
    write: impl FnOnce(&mut dyn Write) -> otfs_rake::Result<()>,
) -> Result<()> {
    match &args.out {
        Some(p) => {
            let mut f = std::fs::File::create(p)
                .with_context(|| format!("cannot write {}", p.display()))?;
            write(&mut f)?;
        }
        None => write(&mut std::io::stdout().lock())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ber(args) | Command::Fer(args) => {
            let spec = load_spec(&args)?;
            let records = run_campaign(&spec)?;
            match &args.out {
                Some(p) => {
                    emit_csv(&records, p)
                        .with_context(|| format!("cannot write {}", p.display()))?;
                    print!("{}", summary_table(&records));
                }
                None => write_csv(&records, std::io::stdout().lock())?,
            }
        }
        Command::Complexity(args) => {
            let mut spec = load_spec(&args)?;
            if spec.snr_db.is_empty() {
                spec.snr_db = vec![f64::INFINITY];
            }
            let records = complexity_report(&spec)?;
            write_output(&args, |w| write_complexity_csv(&records, w))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("otfs-sim: error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
