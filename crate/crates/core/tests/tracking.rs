use vibrophone::audio::correlation;
use vibrophone::motion::{
    correlate, correlate_fixed_point, ops, track_block, track_block_fixed, Arithmetic, LagSet, MotionMode, Similarity,
    TrackerConfig,
};
use vibrophone::pipeline::{extract_all_blocks, ExtractConfig};
use vibrophone::synth::{render, MotionSeries, MotionTrack, SceneSpec};
use vibrophone::video::{FrameSequence, Patch, Rect};

const FS: f64 = 2200.0;

fn scene(size: usize, frames: usize, motion: MotionSeries, noise: f64) -> SceneSpec {
    let mut spec = SceneSpec::still(size, size, FS, frames);
    spec.noise_sigma = noise;
    spec.motion.push(MotionTrack {
        region: Rect::new(0, 0, size, size),
        displacement: motion,
        delay: 0.0,
    });
    spec
}

/// Tracks the 8x8 block at the frame center with a 4-pixel margin.
fn track_center(video: &FrameSequence, mode: MotionMode) -> vibrophone::motion::DisplacementSignal<f64> {
    let c = video.width() / 2;
    let rect = Rect::new(c - 8, c - 8, 16, 16);
    let frames = (0..video.frame_count()).map(|t| video.frame::<u8>(t).unwrap().sub(rect));
    let reference = video.frame::<u8>(0).unwrap().sub(rect);
    track_block(&reference, frames, &TrackerConfig::new(mode, Similarity::Normalized, 4)).unwrap()
}

fn centered(x: &[f64]) -> Vec<f64> {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - m).collect()
}

#[test]
fn static_block_is_all_zero() {
    let video = render(&SceneSpec::still(32, 32, FS, 200), 1).unwrap();
    for mode in [MotionMode::QUADRATIC_1D, MotionMode::QUARTIC_1D, MotionMode::QUADRATIC_2D] {
        let s = track_center(&video, mode);
        assert!(!s.is_lost());
        assert!(s.samples.iter().all(|v| v.dx == 0.0 && v.dy == 0.0), "{mode:?}");
    }
}

#[test]
fn sinusoid_is_recovered() {
    let spec = scene(32, 2200, MotionSeries::tone(100.0, 0.3), 0.0);
    let video = render(&spec, 2).unwrap();
    let truth = spec.motion[0].ground_truth(2200, FS).0;
    let s = track_center(&video, MotionMode::QUADRATIC_1D);
    assert_eq!(s.len(), 2200);
    assert_eq!(s.samples[0].dx, 0.0);
    let r = correlation(&centered(&s.dx()), &centered(&truth));
    assert!(r >= 0.99, "correlation {r}");
}

/// Tracks the centered 8x8 block with a wider margin than the pipeline default.
fn track_wide(video: &FrameSequence, margin: usize) -> vibrophone::motion::DisplacementSignal<f64> {
    let c = video.width() / 2;
    let side = 8 + 2 * margin;
    let rect = Rect::new(c - side / 2, c - side / 2, side, side);
    let frames = (0..video.frame_count()).map(|t| video.frame::<u8>(t).unwrap().sub(rect));
    let reference = video.frame::<u8>(0).unwrap().sub(rect);
    let cfg = TrackerConfig::new(MotionMode::QUADRATIC_1D, Similarity::Normalized, margin);
    track_block(&reference, frames, &cfg).unwrap()
}

#[test]
fn drift_moves_integer_part() {
    let ramp: Vec<f64> = (0..1000).map(|t| 0.004 * t as f64).collect();
    let mut spec = scene(32, 1000, MotionSeries::horizontal(ramp), 0.0);
    spec.max_displacement_px = 5.0;
    let video = render(&spec, 3).unwrap();
    let s = track_wide(&video, 6);
    assert!(!s.is_lost());
    let last = s.samples.last().unwrap();
    assert!((last.dx - 3.996).abs() < 0.05, "final {}", last.dx);
    assert_eq!(last.integer_part.0, 4);
    // the first step happens near the half-pixel crossing (frame 125)
    let first = s.samples.iter().position(|v| v.integer_part.0 == 1).unwrap();
    assert!((100..=150).contains(&first), "first step at {first}");
}

#[test]
fn motion_beyond_margin_marks_block_lost() {
    let ramp: Vec<f64> = (0..600).map(|t| 0.02 * t as f64).collect();
    let mut spec = scene(32, 600, MotionSeries::horizontal(ramp), 0.0);
    spec.max_displacement_px = 13.0;
    let video = render(&spec, 4).unwrap();
    let s = track_center(&video, MotionMode::QUADRATIC_1D);
    let lost = s.lost_from.expect("lost");
    assert!(lost > 100 && lost < 400);
    let held = s.samples[lost - 1].dx;
    assert!(s.samples[lost..].iter().all(|v| v.dx == held));
}

#[test]
fn interpolation_bias_bound() {
    let spec = scene(32, 2200, MotionSeries::tone(220.0, 0.25), 0.0);
    let video = render(&spec, 5).unwrap();
    let truth = spec.motion[0].ground_truth(2200, FS).0;
    let rms = |x: &[f64]| (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt();
    let true_rms = rms(&centered(&truth));
    for (mode, bound) in [(MotionMode::QUADRATIC_1D, 0.10), (MotionMode::QUARTIC_1D, 0.05)] {
        let got = rms(&centered(&track_center(&video, mode).dx()));
        let err = (got / true_rms - 1.0).abs();
        assert!(err < bound, "{mode:?}: relative amplitude error {err:.3}");
    }
}

#[test]
fn shift_equivariance_on_integer_offsets() {
    let spec = scene(48, 400, MotionSeries::tone(150.0, 0.3), 0.0);
    let video = render(&spec, 6).unwrap();
    let base = Rect::new(16, 16, 16, 16);
    let cfg = TrackerConfig::new(MotionMode::QUADRATIC_1D, Similarity::Normalized, 4);
    let reference = video.frame::<u8>(0).unwrap().sub(base);
    let run = |window: Rect| {
        let frames = (0..video.frame_count()).map(|t| video.frame::<u8>(t).unwrap().sub(window));
        track_block::<f64, u8, _>(&reference, frames, &cfg).unwrap()
    };
    let a = run(base);
    for k in [-1i32, 1] {
        // reading each frame k pixels further left makes the content appear k pixels to the right
        let b = run(Rect::new((16 - k) as usize, 16, 16, 16));
        assert!(!b.is_lost());
        for (p, q) in a.samples.iter().zip(&b.samples) {
            assert!((q.dx - (p.dx + k as f64)).abs() < 1e-12);
            assert_eq!(q.integer_part.0, p.integer_part.0 + k);
        }
    }
}

#[test]
fn gain_does_not_change_normalized_tracking() {
    let spec = scene(32, 300, MotionSeries::tone(200.0, 0.3), 0.0);
    let video = render(&spec, 7).unwrap();
    let rect = Rect::new(8, 8, 16, 16);
    let frames: Vec<Vec<u16>> = (0..video.frame_count())
        .map(|t| video.frame::<u8>(t).unwrap().sub(rect).to_vec().iter().map(|&p| p as u16).collect())
        .collect();
    let scaled: Vec<Vec<u16>> = frames.iter().map(|f| f.iter().map(|&p| 3 * p).collect()).collect();
    let cfg = TrackerConfig::new(MotionMode::QUADRATIC_1D, Similarity::Normalized, 4);
    let track = |fs: &[Vec<u16>]| {
        let reference = Patch::new(&fs[0], 16, 16).unwrap();
        track_block::<f64, u16, _>(&reference, fs.iter().map(|f| Patch::new(f, 16, 16).unwrap()), &cfg).unwrap()
    };
    let plain = track(&frames);
    // scale current frames only; the reference stays at unit gain
    let mixed: Vec<Vec<u16>> = std::iter::once(frames[0].clone()).chain(scaled[1..].iter().cloned()).collect();
    let gained = track(&mixed);
    for (a, b) in plain.samples.iter().zip(&gained.samples) {
        assert!((a.dx - b.dx).abs() < 1e-9);
    }
}

#[test]
fn fixed_point_matches_float_plain() {
    let spec = scene(40, 600, MotionSeries::tone(300.0, 0.3), 1.0);
    let video = render(&spec, 8).unwrap();
    for mode in [MotionMode::QUADRATIC_1D, MotionMode::QUADRATIC_2D] {
        let fixed = ExtractConfig {
            mode,
            similarity: Similarity::Plain,
            arithmetic: Arithmetic::Fixed16,
            ..Default::default()
        };
        let float = ExtractConfig {
            arithmetic: Arithmetic::Float,
            ..fixed
        };
        let grid = fixed.grid(&video).unwrap();
        let a = extract_all_blocks::<f64>(&video, &grid, &fixed, 1).unwrap();
        let b = extract_all_blocks::<f64>(&video, &grid, &float, 1).unwrap();
        let (mut sq, mut n) = (0.0, 0);
        for (x, y) in a.iter().zip(&b) {
            for (p, q) in x.samples.iter().zip(&y.samples) {
                sq += (p.dx - q.dx).powi(2) + (p.dy - q.dy).powi(2);
                n += 1;
            }
        }
        assert!((sq / n as f64).sqrt() < 1e-3);
    }
}

#[test]
fn fixed_point_profile_is_plain_profile() {
    let video = render(&SceneSpec::still(16, 16, FS, 2), 9).unwrap();
    let r = video.frame::<u8>(0).unwrap();
    let c = video.frame::<u8>(1).unwrap();
    let fixed = correlate_fixed_point::<f64>(&r, &c, LagSet::Square3).unwrap();
    let float = correlate::<f64, u8>(&r, &c, LagSet::Square3, Similarity::Plain).unwrap();
    assert_eq!(fixed, float);
}

#[test]
fn kernel_op_counts() {
    let video = render(&SceneSpec::still(16, 16, FS, 2), 10).unwrap();
    let r = video.frame::<u8>(0).unwrap();
    let c = video.frame::<u8>(1).unwrap();
    let (_, line) = ops::measure(|| correlate_fixed_point::<f64>(&r, &c, LagSet::Line3).unwrap());
    assert_eq!(line.per_pixel(), 6.0);
    let (_, square) = ops::measure(|| correlate_fixed_point::<f64>(&r, &c, LagSet::Square3).unwrap());
    assert_eq!(square.per_pixel(), 18.0);

    // a still clip never re-centers, so tracking costs exactly one kernel pass per frame
    let still = render(&SceneSpec::still(24, 24, FS, 50), 11).unwrap();
    let rect = Rect::new(4, 4, 16, 16);
    let cfg = TrackerConfig::new(MotionMode::QUADRATIC_2D, Similarity::Plain, 4);
    let reference = still.frame::<u8>(0).unwrap().sub(rect);
    let frames = (0..still.frame_count()).map(|t| still.frame::<u8>(t).unwrap().sub(rect));
    let (s, counts) = ops::measure(|| track_block_fixed::<f64, _>(&reference, frames, &cfg).unwrap());
    assert!(!s.is_lost());
    assert_eq!(counts.per_pixel(), 18.0);
}

#[test]
fn correlate_cost_is_linear_in_pixels() {
    let small = render(&SceneSpec::still(16, 16, FS, 2), 12).unwrap();
    let large = render(&SceneSpec::still(32, 32, FS, 2), 12).unwrap();
    let count = |v: &FrameSequence| {
        let (_, c) = ops::measure(|| correlate_fixed_point::<f64>(&v.frame::<u8>(0).unwrap(), &v.frame::<u8>(1).unwrap(), LagSet::Line3).unwrap());
        c
    };
    let (a, b) = (count(&small), count(&large));
    // the three-lag line crops one pixel off the left and right edges
    assert_eq!(a.pixels, 14 * 16);
    assert_eq!(b.ops as f64 / a.ops as f64, b.pixels as f64 / a.pixels as f64);
}
