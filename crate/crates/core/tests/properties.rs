use proptest::prelude::*;
use vibrophone::dsp::{istft, stft, StftParams};
use vibrophone::motion::{quadratic_vertex, quartic_peak, subpixel_quadratic, CorrelationProfile};
use vibrophone::pipeline::{select_blocks, SelectionRule};
use vibrophone::video::{read_rvid, write_rvid, FrameRate, FrameSequence, PixelBuffer};

/// Vertex of the least-squares parabola through (-1, a), (0, b), (1, c),
/// solved as a 3x3 normal system by Cramer's rule.
fn parabola_oracle(a: f64, b: f64, c: f64) -> f64 {
    let xs = [-1.0f64, 0.0, 1.0];
    let ys = [a, b, c];
    let s = |p: i32| xs.iter().map(|x| x.powi(p)).sum::<f64>();
    let t = |p: i32| xs.iter().zip(&ys).map(|(x, y)| x.powi(p) * y).sum::<f64>();
    let m = [[s(4), s(3), s(2)], [s(3), s(2), s(1)], [s(2), s(1), s(0)]];
    let r = [t(2), t(1), t(0)];
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let with = |col: usize| {
        let mut k = m;
        for row in 0..3 {
            k[row][col] = r[row];
        }
        det(k) / det(m)
    };
    -with(1) / (2.0 * with(0))
}

proptest! {
    #[test]
    fn quadratic_vertex_matches_least_squares_parabola(
        b in -10.0f64..10.0,
        da in 0.01f64..5.0,
        dc in 0.01f64..5.0,
    ) {
        // strictly concave with an interior maximum
        let (a, c) = (b - da, b - dc);
        let expected = parabola_oracle(a, b, c);
        let got = quadratic_vertex(a, b, c);
        prop_assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        let profile = CorrelationProfile::from_line(&[a, b, c]);
        prop_assert!((subpixel_quadratic(&profile).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn quartic_is_exact_on_parabolas(peak in -0.95f64..0.95, curvature in 0.05f64..3.0, offset in -5.0f64..5.0) {
        let f = |x: f64| offset - curvature * (x - peak).powi(2);
        let got = quartic_peak([f(-2.0), f(-1.0), f(0.0), f(1.0), f(2.0)]);
        prop_assert!((got - peak).abs() < 1e-6);
    }

    #[test]
    fn quadratic_stays_in_unit_interval(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0) {
        let d = quadratic_vertex(a, b, c);
        prop_assert!((-1.0..=1.0).contains(&d));
    }

    #[test]
    fn stft_round_trip(x in prop::collection::vec(-1.0f64..1.0, 1..700), log_w in 3u32..8) {
        let params = StftParams::new(1 << log_w).unwrap();
        let y = istft(&stft(&x, params));
        prop_assert_eq!(y.len(), x.len());
        for (p, q) in x.iter().zip(&y) {
            prop_assert!((p - q).abs() < 1e-9);
        }
    }

    #[test]
    fn selection_is_ordered_and_deterministic(scores in prop::collection::vec(-100.0f64..100.0, 1..80), fraction in 0.01f64..1.0) {
        let rule = SelectionRule::TopFraction(fraction);
        let a = select_blocks(&scores, rule).unwrap();
        let b = select_blocks(&scores, rule).unwrap();
        prop_assert_eq!(&a.selected, &b.selected);
        prop_assert!(!a.selected.is_empty());
        for w in a.selected.windows(2) {
            let (i, j) = (w[0], w[1]);
            prop_assert!(scores[i] > scores[j] || (scores[i] == scores[j] && i < j));
        }
        // nothing left out scores above anything kept
        let worst_kept = a.selected.iter().map(|&i| scores[i]).fold(f64::INFINITY, f64::min);
        for (i, s) in scores.iter().enumerate() {
            if !a.selected.contains(&i) {
                prop_assert!(*s <= worst_kept);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rvid_round_trip(
        w in 1usize..12,
        h in 1usize..12,
        frames in 2usize..5,
        sixteen in any::<bool>(),
        rate in 1u32..100_000,
        seed in any::<u64>(),
    ) {
        let n = w * h * frames;
        let mut state = seed | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        let pixels = if sixteen {
            PixelBuffer::U16((0..n).map(|_| next() as u16).collect())
        } else {
            PixelBuffer::U8((0..n).map(|_| next() as u8).collect())
        };
        let video = FrameSequence::new(w, h, FrameRate::from_hz(rate).unwrap(), pixels).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clip.rvid");
        write_rvid(&video, &path).unwrap();
        let back = read_rvid(&path).unwrap();
        prop_assert_eq!(back.width(), w);
        prop_assert_eq!(back.height(), h);
        prop_assert_eq!(back.frame_count(), frames);
        prop_assert_eq!(back.frame_rate(), video.frame_rate());
        prop_assert_eq!(back.pixels(), video.pixels());
    }
}
