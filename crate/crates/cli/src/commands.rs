use std::path::Path;

use serde_json::json;
use vibrophone::aggregate::Spectrogram;
use vibrophone::bench::{realtime_check, run_throughput, BenchConfig, RealtimeConfig};
use vibrophone::direction::{delay_field, direction_stability, DirectionConfig, DEFAULT_MAX_LAG};
use vibrophone::dsp::StftParams;
use vibrophone::metrics::{evaluate, MetricsConfig};
use vibrophone::pipeline::{block_audio, build_pixel_mask, extract_all_blocks, mask_signal, recover, score_tracked, score_map_csv, select_blocks, BlockGrid, BlockScoreMap};
use vibrophone::synth::{render, MotionSeries, MotionTrack, SceneSpec};
use vibrophone::vibrometry::{first_mode_decompose, mode_spectrum, youngs_modulus, ModeParams, RodSpec};
use vibrophone::video::{read_image_sequence, read_rvid, read_wav, write_rvid, write_wav, FrameRate, FrameSequence, Rect};
use vibrophone::{AudioSignal, Error, Result};

use crate::config::RunConfig;
use crate::output::Outputs;
use crate::{parse_band, Command};

fn load_video(path: &Path, config: &RunConfig) -> Result<FrameSequence> {
    if path.is_dir() {
        let rate = config
            .frame_rate
            .ok_or_else(|| Error::InvalidArgument("image-sequence input needs --frame-rate".into()))?;
        read_image_sequence(path, FrameRate::from_f64(rate)?)
    } else {
        read_rvid(path)
    }
}

fn parse_dims<const N: usize>(text: &str) -> Result<[usize; N]> {
    let parts: Vec<usize> = text
        .split('x')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::InvalidArgument(format!("'{text}' is not a size like 64x64")))?;
    parts
        .try_into()
        .map_err(|_| Error::InvalidArgument(format!("'{text}' needs {N} dimensions")))
}

/// Spectrogram window: the configured one, else about 50 ms shrunk to fit.
fn spectrogram_params(config: &RunConfig, len: usize, sample_rate: f64) -> Result<StftParams> {
    if let Some(p) = config.stft()? {
        return Ok(p);
    }
    let mut w = StftParams::for_sample_rate(sample_rate).window;
    while w > 16 && len < w {
        w /= 2;
    }
    StftParams::new(w)
}

/// Block audio and scores for every block of the grid.
fn score_all(video: &FrameSequence, config: &RunConfig) -> Result<(BlockGrid, Vec<AudioSignal<f64>>, BlockScoreMap)> {
    let extract = config.extract();
    let grid = extract.grid(video)?;
    let fs = video.frame_rate().hz();
    let signals = extract_all_blocks::<f64>(video, &grid, &extract, config.workers)?;
    let scorer = config.scorer();
    let mut audio = Vec::with_capacity(signals.len());
    let mut scores = Vec::with_capacity(signals.len());
    for s in &signals {
        let a = block_audio(s, fs, extract.mode)?;
        scores.push(score_tracked(s, &a, &scorer)?);
        audio.push(a);
    }
    let map = select_blocks(&scores, config.selection)?;
    Ok((grid, audio, map))
}

pub fn dispatch(command: Command, config: &RunConfig, out_dir: &Path) -> Result<()> {
    match command {
        Command::Extract { video, .. } => extract(&video, config, out_dir),
        Command::Scoremap { video, .. } => scoremap(&video, config, out_dir),
        Command::Mask {
            video,
            pixels,
            calibration_frames,
            ..
        } => mask(&video, config, out_dir, pixels, calibration_frames),
        Command::Direction {
            video,
            max_lag,
            segments,
            bands,
            ..
        } => direction(&video, config, out_dir, max_lag, segments, bands.as_deref()),
        Command::Vibrometry {
            input,
            rod,
            rod_length,
            rod_density,
            rod_diameter,
            prominence_db,
            min_hz,
            segment,
            decompose,
            ..
        } => {
            let rod = match (rod, rod_length, rod_density, rod_diameter) {
                (Some(path), ..) => {
                    let text = std::fs::read_to_string(&path).map_err(|source| Error::Io { path: path.clone(), source })?;
                    Some(serde_json::from_str::<RodSpec>(&text).map_err(|e| Error::InvalidArgument(format!("rod {}: {e}", path.display())))?)
                }
                (None, Some(length), Some(density), Some(diameter)) => Some(RodSpec { length, density, diameter }),
                _ => None,
            };
            let mut params = ModeParams::default();
            if let Some(p) = prominence_db {
                params.prominence_db = p;
            }
            if let Some(m) = min_hz {
                params.min_hz = m;
            }
            params.segment = segment;
            vibrometry(&input, config, out_dir, rod, &params, decompose)
        }
        Command::Synth { scene } => synth(&scene, config, out_dir),
        Command::Metrics {
            reference,
            test,
            max_lag,
            no_gain_match,
        } => {
            let mut m = MetricsConfig::default();
            if let Some(l) = max_lag {
                m.max_lag = l;
            }
            m.match_gain = !no_gain_match;
            metrics(&reference, &test, config, out_dir, &m)
        }
        Command::Bench {
            video,
            synthetic,
            repeats,
            realtime_rate,
            resolution,
            ..
        } => bench(video.as_deref(), config, out_dir, &synthetic, repeats, realtime_rate, &resolution),
    }
}

fn extract(path: &Path, config: &RunConfig, out_dir: &Path) -> Result<()> {
    let video = load_video(path, config)?;
    let r = recover::<f64>(&video, &config.recover()?, config.workers)?;
    let mut out = Outputs::new(out_dir, "extract", config)?;
    write_wav(&r.audio, out.path("audio.wav"))?;
    out.csv("scores.csv", &score_map_csv(&r.grid, &r.scores))?;
    let spec = Spectrogram::new(&r.audio, spectrogram_params(config, r.audio.len(), r.audio.sample_rate())?);
    out.csv("spectrogram.csv", &spec.to_csv())?;
    spec.write_png(out.path("spectrogram.png"), 80.0)?;
    let rms = vibrophone::audio::rms(r.audio.samples());
    out.finish(json!({
        "input": path,
        "frames": video.frame_count(),
        "sample_rate": r.audio.sample_rate(),
        "blocks": r.grid.len(),
        "selected": r.scores.selected,
        "silent": r.silent,
        "rms_px": rms,
    }))?;
    if r.silent {
        eprintln!("warning: no motion above {} px RMS; wrote silence", vibrophone::pipeline::SILENCE_RMS_PX);
    }
    println!("{}", out_dir.join("audio.wav").display());
    Ok(())
}

fn scoremap(path: &Path, config: &RunConfig, out_dir: &Path) -> Result<()> {
    let video = load_video(path, config)?;
    let (grid, _, map) = score_all(&video, config)?;
    let mut out = Outputs::new(out_dir, "scoremap", config)?;
    out.csv("scores.csv", &score_map_csv(&grid, &map))?;
    out.finish(json!({"input": path, "blocks": grid.len(), "selected": map.selected}))?;
    println!("{}", out_dir.join("scores.csv").display());
    Ok(())
}

fn mask(path: &Path, config: &RunConfig, out_dir: &Path, pixels: usize, calibration: Option<usize>) -> Result<()> {
    let video = load_video(path, config)?;
    let calibration = calibration.unwrap_or(video.frame_count());
    let m = build_pixel_mask(&video, calibration, pixels, &config.scorer(), config.workers)?;
    let audio = mask_signal(&video, &m)?;
    let mut out = Outputs::new(out_dir, "mask", config)?;
    out.csv("mask.csv", &m.to_csv())?;
    write_wav(&audio, out.path("mask.wav"))?;
    out.finish(json!({"input": path, "pixels": m.pixels.len(), "calibration_frames": calibration}))?;
    println!("{}", out_dir.join("mask.wav").display());
    Ok(())
}

fn direction(
    path: &Path,
    config: &RunConfig,
    out_dir: &Path,
    max_lag: Option<usize>,
    segments: Option<usize>,
    bands: Option<&str>,
) -> Result<()> {
    let video = load_video(path, config)?;
    let (grid, audio, map) = score_all(&video, config)?;
    let ids = map.selected.clone();
    if ids.len() < 3 {
        return Err(Error::InsufficientGeometry(format!(
            "{} blocks selected; widen the selection rule",
            ids.len()
        )));
    }
    let signals: Vec<AudioSignal<f64>> = ids.iter().map(|i| audio[*i].clone()).collect();
    let centers: Vec<(f64, f64)> = ids.iter().map(|i| grid.blocks[*i].center).collect();
    let scores: Vec<f64> = ids.iter().map(|i| map.scores[*i]).collect();
    let dconf = DirectionConfig {
        max_lag: max_lag.unwrap_or(DEFAULT_MAX_LAG),
        band: config.band,
    };
    let field = delay_field(&signals, &ids, &centers, &scores, &dconf, config.workers)?;
    let mut out = Outputs::new(out_dir, "direction", config)?;
    out.csv("delays.csv", &field.to_csv())?;
    let mut body = json!({
        "reference_block": field.reference_block,
        "fit": field.fit.to_json(),
        "angle_deg": field.fit.angle_deg(),
    });
    if let Some(n) = segments {
        let bands: Vec<(f64, f64)> = match bands {
            Some(text) => text.split(',').map(parse_band).collect::<Result<_>>()?,
            None => Vec::new(),
        };
        let report = direction_stability(&signals, &ids, &centers, &scores, n, &bands, &dconf, config.workers)?;
        body["stability"] = serde_json::to_value(&report)?;
    }
    out.json("direction.json", body)?;
    out.finish(json!({"input": path, "blocks": ids.len()}))?;
    match field.fit.angle_deg() {
        Some(a) => println!("direction {a:.2} deg"),
        None => println!("no direction: delays are flat"),
    }
    Ok(())
}

fn vibrometry(
    path: &Path,
    config: &RunConfig,
    out_dir: &Path,
    rod: Option<RodSpec>,
    params: &ModeParams,
    decompose: bool,
) -> Result<()> {
    let is_wav = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav"));
    let signal = if is_wav {
        read_wav(path)?
    } else {
        let video = load_video(path, config)?;
        let fs = video.frame_rate().hz();
        let mut rc = config.recover()?;
        // resonances often sit below the speech band
        rc.scorer.low_hz = params.min_hz;
        rc.scorer.high_hz = 0.45 * fs;
        recover::<f64>(&video, &rc, config.workers)?.audio
    };
    let spectrum = mode_spectrum(&signal, params)?;
    let modulus = rod.map(|r| youngs_modulus(spectrum.fundamental, &r)).transpose()?;
    let mut out = Outputs::new(out_dir, "vibrometry", config)?;
    let mut body = spectrum.report(modulus);
    if let Some(r) = rod {
        body["rod"] = serde_json::to_value(r)?;
    }
    out.json("modes.json", body)?;
    if decompose {
        let (mode1, residual) = first_mode_decompose(&signal, spectrum.fundamental)?;
        write_wav(&mode1, out.path("mode1.wav"))?;
        write_wav(&residual, out.path("residual.wav"))?;
    }
    out.finish(json!({"input": path}))?;
    match modulus {
        Some(e) => println!("fundamental {:.3} Hz, E = {:.4e} Pa", spectrum.fundamental, e),
        None => println!("fundamental {:.3} Hz", spectrum.fundamental),
    }
    Ok(())
}

fn synth(path: &Path, config: &RunConfig, out_dir: &Path) -> Result<()> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    let spec = SceneSpec::from_json(&text)?;
    let video = render(&spec, config.seed)?;
    let mut out = Outputs::new(out_dir, "synth", config)?;
    write_rvid(&video, out.path("video.rvid"))?;
    let frames = video.frame_count();
    let fs = spec.frame_rate;
    let truths: Vec<(Vec<f64>, Vec<f64>)> = spec.motion.iter().map(|m| m.ground_truth(frames, fs)).collect();
    let mut csv = String::from("frame");
    for i in 0..truths.len() {
        csv.push_str(&format!(",dx_{i},dy_{i}"));
    }
    csv.push('\n');
    for t in 0..frames {
        csv.push_str(&t.to_string());
        for (dx, dy) in &truths {
            csv.push_str(&format!(",{:.9},{:.9}", dx[t], dy[t]));
        }
        csv.push('\n');
    }
    out.csv("truth.csv", &csv)?;
    out.finish(json!({"scene": spec, "frames": frames}))?;
    println!("{}", out_dir.join("video.rvid").display());
    Ok(())
}

fn metrics(reference: &Path, test: &Path, config: &RunConfig, out_dir: &Path, m: &MetricsConfig) -> Result<()> {
    let r = read_wav(reference)?;
    let t = read_wav(test)?;
    let report = evaluate(&r, &t, m)?;
    let mut out = Outputs::new(out_dir, "metrics", config)?;
    let mut body = serde_json::to_value(&report)?;
    body["reference"] = json!(reference);
    body["test"] = json!(test);
    out.json("metrics.json", body)?;
    out.finish(json!({}))?;
    println!("{}", serde_json::to_string(&report)?);
    Ok(())
}

fn synthetic_video(width: usize, height: usize, frames: usize, seed: u64) -> Result<FrameSequence> {
    let mut spec = SceneSpec::still(width, height, 2200.0, frames);
    spec.motion.push(MotionTrack {
        region: Rect::new(0, 0, width, height),
        displacement: MotionSeries::tone(440.0, 0.2),
        delay: 0.0,
    });
    spec.noise_sigma = 1.0;
    render(&spec, seed)
}

fn bench(
    path: Option<&Path>,
    config: &RunConfig,
    out_dir: &Path,
    synthetic: &str,
    repeats: Option<usize>,
    realtime_rate: Option<f64>,
    resolution: &str,
) -> Result<()> {
    let video = match path {
        Some(p) => load_video(p, config)?,
        None => {
            let [w, h, l] = parse_dims::<3>(synthetic)?;
            synthetic_video(w, h, l, config.seed)?
        }
    };
    let mut bc = BenchConfig {
        extract: config.extract(),
        ..Default::default()
    };
    if let Some(r) = repeats {
        bc.repeats = r;
    }
    if let vibrophone::pipeline::SelectionRule::TopFraction(f) = config.selection {
        bc.top_fraction = f;
    }
    let report = run_throughput(&video, &bc, config.workers)?;
    print!("{}", report.table());
    let mut body = serde_json::to_value(&report)?;
    if let Some(rate) = realtime_rate {
        let [w, h] = parse_dims::<2>(resolution)?;
        let rc = RealtimeConfig {
            extract: config.extract(),
            top_fraction: bc.top_fraction,
            seed: config.seed,
            ..Default::default()
        };
        let rt = realtime_check(rate, w, h, &rc, config.workers)?;
        println!(
            "real time at {rate} fps, {w}x{h}: {} (margin {})",
            if rt.pass { "pass" } else { "fail" },
            rt.margin.map_or("n/a".to_string(), |m| format!("{m:.2}x"))
        );
        body["realtime"] = serde_json::to_value(rt)?;
    }
    let mut out = Outputs::new(out_dir, "bench", config)?;
    out.json("bench.json", body)?;
    out.finish(json!({"frames": video.frame_count(), "width": video.width(), "height": video.height()}))?;
    Ok(())
}
