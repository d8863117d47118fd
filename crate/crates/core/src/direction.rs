//! Sound arrival direction from per-block time shifts.
//!
//! Each block's delay relative to a reference block is found by
//! cross-correlation. A weighted plane `tau = a x + b y + c` through the
//! block centers gives the propagation direction `(a, b) / |(a, b)|` in the
//! image plane and the slowness `|(a, b)|` in frames per pixel.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::aggregate::score_weights;
use crate::audio::{remove_mean, AudioSignal};
use crate::dsp::filter::ZeroPhaseFilter;
use crate::error::{Error, Result};
use crate::linalg::solve3;
use crate::motion::quadratic_vertex;
use crate::parallel::par_map;
use crate::Real;

/// Delay cap when no scene scale is known.
pub const DEFAULT_MAX_LAG: usize = 50;

/// Delay of `other` relative to `reference`, in frames: positive when
/// `other` lags behind. `None` when either signal carries no energy.
///
/// The integer lag maximizes the cross-correlation over `-max_lag..=max_lag`
/// (ties go to the smaller |lag|) and is refined with a parabola through the
/// neighbouring lags.
pub fn block_delay<T: Real>(reference: &[T], other: &[T], max_lag: usize) -> Result<Option<f64>> {
    if reference.len() != other.len() {
        return Err(Error::LengthMismatch {
            expected: reference.len(),
            actual: other.len(),
        });
    }
    let n = reference.len();
    if max_lag >= n {
        return Err(Error::InvalidArgument(format!("max lag {max_lag} must be below the signal length {n}")));
    }
    let r: Vec<f64> = remove_mean(reference).iter().map(|v| v.as_f64()).collect();
    let o: Vec<f64> = remove_mean(other).iter().map(|v| v.as_f64()).collect();
    if r.iter().all(|v| *v == 0.0) || o.iter().all(|v| *v == 0.0) {
        return Ok(None);
    }
    let xcorr = |lag: i64| -> f64 {
        let (ra, oa) = if lag >= 0 { (0, lag as usize) } else { ((-lag) as usize, 0) };
        let len = n - lag.unsigned_abs() as usize;
        r[ra..ra + len].iter().zip(&o[oa..oa + len]).map(|(a, b)| a * b).sum()
    };
    let m = max_lag as i64;
    let values: Vec<f64> = (-m..=m).map(xcorr).collect();
    let mut best = max_lag; // index of lag 0
    for i in 0..values.len() {
        let (lag, cur) = (i as i64 - m, best as i64 - m);
        if values[i] > values[best] || (values[i] == values[best] && lag.abs() < cur.abs()) {
            best = i;
        }
    }
    let lag = best as f64 - m as f64;
    if best == 0 || best + 1 == values.len() {
        return Ok(Some(lag));
    }
    Ok(Some(lag + quadratic_vertex(values[best - 1], values[best], values[best + 1])))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionFit {
    /// Unit propagation direction; `None` when the delays show no gradient.
    pub direction: Option<(f64, f64)>,
    pub gradient: (f64, f64),
    pub slowness: f64,
    pub intercept: f64,
    pub residual_rms: f64,
}

impl DirectionFit {
    pub fn angle_deg(&self) -> Option<f64> {
        self.direction.map(|(x, y)| y.atan2(x).to_degrees())
    }

    /// `{dx, dy, slowness_frames_per_px, residual_rms, intercept}`; the
    /// direction fields are null when undefined.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "dx": self.direction.map(|d| d.0),
            "dy": self.direction.map(|d| d.1),
            "slowness_frames_per_px": self.slowness,
            "residual_rms": self.residual_rms,
            "intercept": self.intercept,
        })
    }
}

/// Weighted least-squares plane through `(center, tau)`. Blocks without a
/// delay or with zero weight are skipped.
pub fn fit_direction(delays: &[Option<f64>], centers: &[(f64, f64)], weights: &[f64]) -> Result<DirectionFit> {
    if delays.len() != centers.len() || delays.len() != weights.len() {
        return Err(Error::LengthMismatch {
            expected: delays.len(),
            actual: centers.len().min(weights.len()),
        });
    }
    let pts: Vec<(f64, f64, f64, f64)> = delays
        .iter()
        .zip(centers)
        .zip(weights)
        .filter_map(|((d, c), w)| match d {
            Some(t) if *w > 0.0 && w.is_finite() && t.is_finite() => Some((c.0, c.1, *t, *w)),
            _ => None,
        })
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientGeometry(format!("{} usable blocks, need 3", pts.len())));
    }
    let sw: f64 = pts.iter().map(|p| p.3).sum();
    let mx = pts.iter().map(|p| p.3 * p.0).sum::<f64>() / sw;
    let my = pts.iter().map(|p| p.3 * p.1).sum::<f64>() / sw;
    // centered coordinates keep the normal equations well conditioned
    let (mut sxx, mut syy, mut sxy, mut sxt, mut syt, mut st) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y, t, w) in &pts {
        let (x, y) = (x - mx, y - my);
        sxx += w * x * x;
        syy += w * y * y;
        sxy += w * x * y;
        sxt += w * x * t;
        syt += w * y * t;
        st += w * t;
    }
    let det = sxx * syy - sxy * sxy;
    if det <= 1e-9 * (sxx + syy).powi(2) {
        return Err(Error::InsufficientGeometry("block centers are collinear".into()));
    }
    let [a, b, c0] = solve3([[sxx, sxy, 0.0], [sxy, syy, 0.0], [0.0, 0.0, sw]], [sxt, syt, st])
        .ok_or_else(|| Error::InsufficientGeometry("singular plane fit".into()))?;
    let intercept = c0 - a * mx - b * my;
    let resid = pts
        .iter()
        .map(|&(x, y, t, w)| w * (t - (a * x + b * y + intercept)).powi(2))
        .sum::<f64>()
        / sw;
    let slowness = a.hypot(b);
    let scale = pts.iter().map(|p| p.2.abs()).fold(0.0, f64::max).max(1.0);
    let direction = (slowness > 1e-9 * scale).then(|| (a / slowness, b / slowness));
    Ok(DirectionFit {
        direction,
        gradient: (a, b),
        slowness,
        intercept,
        residual_rms: resid.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayEntry {
    pub block_id: usize,
    pub center: (f64, f64),
    pub tau: Option<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayField {
    pub delays: Vec<DelayEntry>,
    pub reference_block: usize,
    pub fit: DirectionFit,
}

impl DelayField {
    /// `block_id,x,y,tau_frames,weight`; an undefined delay is left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("block_id,x,y,tau_frames,weight\n");
        for d in &self.delays {
            let tau = d.tau.map(|t| format!("{t:.6}")).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{:.9}", d.block_id, d.center.0, d.center.1, tau, d.weight);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionConfig {
    pub max_lag: usize,
    /// Band applied before correlating, in Hz; narrowed to 0.45 fs.
    pub band: (f64, f64),
}

impl Default for DirectionConfig {
    fn default() -> Self {
        DirectionConfig {
            max_lag: DEFAULT_MAX_LAG,
            band: (85.0, 4000.0),
        }
    }
}

/// Lag cap from the time sound needs to cross the scene, doubled:
/// `fs * extent / 340 m/s * 2`, at least one frame.
pub fn physical_max_lag(frame_rate: f64, extent_px: f64, pixel_pitch_m: f64) -> usize {
    ((frame_rate * extent_px * pixel_pitch_m / 340.0 * 2.0).ceil() as usize).max(1)
}

fn band_limit<T: Real>(signals: &[AudioSignal<T>], band: (f64, f64)) -> Vec<Vec<f64>> {
    signals
        .iter()
        .map(|s| {
            let fs = s.sample_rate();
            let x: Vec<f64> = s.samples().iter().map(|v| v.as_f64()).collect();
            ZeroPhaseFilter::band(band.0, band.1.min(0.45 * fs), 2, fs).apply(&x)
        })
        .collect()
}

fn field_from(filtered: &[Vec<f64>], ids: &[usize], centers: &[(f64, f64)], scores: &[f64], max_lag: usize, workers: usize) -> Result<DelayField> {
    let weights = score_weights(scores);
    let mut reference = 0;
    for (i, s) in scores.iter().enumerate() {
        if s.total_cmp(&scores[reference]).is_gt() {
            reference = i;
        }
    }
    let refsig = &filtered[reference];
    let taus = par_map(workers, (0..filtered.len()).collect(), |i| {
        if i == reference {
            Ok(Some(0.0))
        } else {
            block_delay(refsig, &filtered[i], max_lag)
        }
    })?
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let fit = fit_direction(&taus, centers, &weights)?;
    Ok(DelayField {
        delays: (0..taus.len())
            .map(|i| DelayEntry {
                block_id: ids[i],
                center: centers[i],
                tau: taus[i],
                weight: weights[i],
            })
            .collect(),
        reference_block: ids[reference],
        fit,
    })
}

/// Delay field and direction fit for block signals. The highest-scoring
/// block is the reference (delay 0).
pub fn delay_field<T: Real>(
    signals: &[AudioSignal<T>],
    ids: &[usize],
    centers: &[(f64, f64)],
    scores: &[f64],
    config: &DirectionConfig,
    workers: usize,
) -> Result<DelayField> {
    check_lengths(signals, ids, centers, scores)?;
    field_from(&band_limit(signals, config.band), ids, centers, scores, config.max_lag, workers)
}

fn check_lengths<T: Real>(signals: &[AudioSignal<T>], ids: &[usize], centers: &[(f64, f64)], scores: &[f64]) -> Result<()> {
    let n = signals.len();
    for len in [ids.len(), centers.len(), scores.len()] {
        if len != n {
            return Err(Error::LengthMismatch { expected: n, actual: len });
        }
    }
    if let Some(first) = signals.first() {
        if let Some(bad) = signals.iter().find(|s| s.len() != first.len()) {
            return Err(Error::LengthMismatch {
                expected: first.len(),
                actual: bad.len(),
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityEntry {
    pub label: String,
    pub fit: DirectionFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub entries: Vec<StabilityEntry>,
    /// `(i, j, degrees)` for every pair of entries with a defined direction.
    pub pairwise_deg: Vec<(usize, usize, f64)>,
    pub max_deviation_deg: f64,
}

/// Angle between two unit vectors in degrees.
pub fn angle_between_deg(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 * b.0 + a.1 * b.1).clamp(-1.0, 1.0).acos().to_degrees()
}

/// Fits the direction separately on `segments` equal time slices (using
/// `config.band`) and on each extra band over the whole signal, then
/// compares the results pairwise.
pub fn direction_stability<T: Real>(
    signals: &[AudioSignal<T>],
    ids: &[usize],
    centers: &[(f64, f64)],
    scores: &[f64],
    segments: usize,
    bands: &[(f64, f64)],
    config: &DirectionConfig,
    workers: usize,
) -> Result<StabilityReport> {
    if segments < 2 {
        return Err(Error::InvalidArgument(format!("direction stability needs at least 2 segments, got {segments}")));
    }
    check_lengths(signals, ids, centers, scores)?;
    let len = signals.first().map_or(0, |s| s.len());
    let seg_len = len / segments;
    if seg_len <= 2 * config.max_lag {
        return Err(Error::InvalidArgument(format!(
            "segments of {seg_len} samples are too short for max lag {}",
            config.max_lag
        )));
    }
    let filtered = band_limit(signals, config.band);
    let mut entries = Vec::new();
    for s in 0..segments {
        let slice: Vec<Vec<f64>> = filtered.iter().map(|x| x[s * seg_len..(s + 1) * seg_len].to_vec()).collect();
        let field = field_from(&slice, ids, centers, scores, config.max_lag, workers)?;
        entries.push(StabilityEntry {
            label: format!("segment {}", s + 1),
            fit: field.fit,
        });
    }
    for band in bands {
        let field = field_from(&band_limit(signals, *band), ids, centers, scores, config.max_lag, workers)?;
        entries.push(StabilityEntry {
            label: format!("band {}-{} Hz", band.0, band.1),
            fit: field.fit,
        });
    }
    let mut pairwise_deg = Vec::new();
    for i in 0..entries.len() {
        for j in i + 1..entries.len() {
            if let (Some(a), Some(b)) = (entries[i].fit.direction, entries[j].fit.direction) {
                pairwise_deg.push((i, j, angle_between_deg(a, b)));
            }
        }
    }
    let max_deviation_deg = pairwise_deg.iter().map(|p| p.2).fold(0.0, f64::max);
    Ok(StabilityReport {
        entries,
        pairwise_deg,
        max_deviation_deg,
    })
}
