//! `vibrophone`: recover sound from high-speed video on the command line.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use vibrophone::pipeline::SelectionRule;
use vibrophone::{Error, Result};

use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "vibrophone", version, about = "Recover sound from high-speed video")]
struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

/// Pipeline overrides shared by the video subcommands.
#[derive(Debug, Default, Args)]
struct Tuning {
    #[arg(long)]
    block_size: Option<usize>,
    #[arg(long)]
    margin: Option<usize>,
    /// quadratic or quartic
    #[arg(long)]
    interpolation: Option<String>,
    /// 1d or 2d
    #[arg(long)]
    dimensionality: Option<String>,
    /// float or fixed16
    #[arg(long)]
    arithmetic: Option<String>,
    /// normalized or plain
    #[arg(long)]
    similarity: Option<String>,
    #[arg(long, conflicts_with_all = ["top_n", "threshold"])]
    top_fraction: Option<f64>,
    #[arg(long, conflicts_with = "threshold")]
    top_n: Option<usize>,
    /// Minimum block score in dB.
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    stft_window: Option<usize>,
    #[arg(long)]
    stft_hop: Option<usize>,
    /// reference_phase or bin_phase_align
    #[arg(long)]
    combination: Option<String>,
    #[arg(long)]
    denoise: bool,
    /// Scoring band as LOW:HIGH in Hz.
    #[arg(long)]
    band: Option<String>,
    /// Frame rate of an image-sequence input, in Hz.
    #[arg(long)]
    frame_rate: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Recover audio: WAV, score map and spectrogram.
    Extract {
        /// RVID file or directory of PGM frames.
        video: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Per-block score map only.
    Scoremap {
        video: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Audio from a small set of high-scoring pixels.
    Mask {
        video: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
        /// Pixels kept in the mask.
        #[arg(long, default_value_t = 50)]
        pixels: usize,
        /// Frames used to rank pixels; all frames by default.
        #[arg(long)]
        calibration_frames: Option<usize>,
    },
    /// Per-block delays and the fitted in-image sound direction.
    Direction {
        video: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
        /// Largest delay searched, in frames.
        #[arg(long)]
        max_lag: Option<usize>,
        /// Split into this many segments and compare their directions.
        #[arg(long)]
        segments: Option<usize>,
        /// Extra bands for the stability check, as LOW:HIGH,LOW:HIGH.
        #[arg(long)]
        bands: Option<String>,
    },
    /// Resonance peaks and, given a rod, Young's modulus.
    Vibrometry {
        /// Video, or a WAV file of an already recovered signal.
        input: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
        /// JSON file with length, density and diameter (SI units).
        #[arg(long)]
        rod: Option<PathBuf>,
        #[arg(long, requires_all = ["rod_density", "rod_diameter"], conflicts_with = "rod")]
        rod_length: Option<f64>,
        #[arg(long, requires = "rod_length")]
        rod_density: Option<f64>,
        #[arg(long, requires = "rod_length")]
        rod_diameter: Option<f64>,
        #[arg(long)]
        prominence_db: Option<f64>,
        #[arg(long)]
        min_hz: Option<f64>,
        /// Welch segment length in samples.
        #[arg(long)]
        segment: Option<usize>,
        /// Also write the first mode and the residual as WAV files.
        #[arg(long)]
        decompose: bool,
    },
    /// Render a synthetic scene description to RVID.
    Synth {
        /// Scene JSON.
        scene: PathBuf,
    },
    /// Compare a test recording against a reference.
    Metrics {
        reference: PathBuf,
        test: PathBuf,
        /// Largest alignment shift, in samples.
        #[arg(long)]
        max_lag: Option<usize>,
        #[arg(long)]
        no_gain_match: bool,
    },
    /// Extraction throughput and workload scaling.
    Bench {
        /// Video to time; a synthetic one is rendered otherwise.
        video: Option<PathBuf>,
        #[command(flatten)]
        tuning: Tuning,
        /// Synthetic video size as WIDTHxHEIGHTxFRAMES.
        #[arg(long, default_value = "128x128x512")]
        synthetic: String,
        #[arg(long)]
        repeats: Option<usize>,
        /// Also check real-time processing at this frame rate.
        #[arg(long)]
        realtime_rate: Option<f64>,
        /// Resolution for the real-time check, as WIDTHxHEIGHT.
        #[arg(long, default_value = "640x480")]
        resolution: String,
    },
}

fn enum_value<T: DeserializeOwned>(flag: &str, value: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(value.to_string()))
        .map_err(|_| Error::InvalidArgument(format!("--{flag}: unknown value '{value}'")))
}

pub(crate) fn parse_band(text: &str) -> Result<(f64, f64)> {
    let bad = || Error::InvalidArgument(format!("band '{text}' is not LOW:HIGH"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    Ok((lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?))
}

impl Tuning {
    fn apply(&self, c: &mut RunConfig) -> Result<()> {
        if let Some(v) = self.block_size {
            c.block_size = v;
        }
        if let Some(v) = self.margin {
            c.margin = v;
        }
        if let Some(v) = &self.interpolation {
            c.interpolation = enum_value("interpolation", v)?;
        }
        if let Some(v) = &self.dimensionality {
            c.dimensionality = enum_value("dimensionality", v)?;
        }
        if let Some(v) = &self.arithmetic {
            c.arithmetic = enum_value("arithmetic", v)?;
        }
        if let Some(v) = &self.similarity {
            c.similarity = enum_value("similarity", v)?;
        }
        if let Some(v) = &self.combination {
            c.combination = enum_value("combination", v)?;
        }
        if let Some(f) = self.top_fraction {
            c.selection = SelectionRule::TopFraction(f);
        }
        if let Some(n) = self.top_n {
            c.selection = SelectionRule::TopN(n);
        }
        if let Some(t) = self.threshold {
            c.selection = SelectionRule::Threshold(t);
        }
        if self.stft_window.is_some() {
            c.stft_window = self.stft_window;
        }
        if self.stft_hop.is_some() {
            c.stft_hop = self.stft_hop;
        }
        if self.denoise {
            c.denoise = true;
        }
        if let Some(b) = &self.band {
            c.band = parse_band(b)?;
        }
        if self.frame_rate.is_some() {
            c.frame_rate = self.frame_rate;
        }
        Ok(())
    }
}

fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut c = RunConfig::load(cli.config.as_deref())?;
    if let Some(s) = cli.seed {
        c.seed = s;
    }
    if let Some(w) = cli.workers {
        c.workers = w;
    }
    let tuning = match &cli.command {
        Command::Extract { tuning, .. }
        | Command::Scoremap { tuning, .. }
        | Command::Mask { tuning, .. }
        | Command::Direction { tuning, .. }
        | Command::Vibrometry { tuning, .. }
        | Command::Bench { tuning, .. } => Some(tuning),
        Command::Synth { .. } | Command::Metrics { .. } => None,
    };
    if let Some(t) = tuning {
        t.apply(&mut c)?;
    }
    c.validate()?;
    Ok(c)
}

fn run(cli: Cli) -> Result<()> {
    let config = effective_config(&cli)?;
    commands::dispatch(cli.command, &config, &cli.output_dir)
}

fn fail(code: u8, kind: &str, message: &str) -> ExitCode {
    let body = serde_json::json!({"error": {"kind": kind, "message": message, "exit_code": code}});
    eprintln!("{body}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return fail(2, "usage", e.to_string().trim());
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = if e.is_validation() { 2 } else { 3 };
            fail(code, e.kind(), &e.to_string())
        }
    }
}
