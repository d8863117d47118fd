//! Sub-pixel refinement of a correlation profile.

use super::CorrelationProfile;
use crate::error::{Error, Result};
use crate::linalg::solve3;
use crate::Real;

/// Vertex of the parabola through (-1, fm1), (0, f0), (1, fp1), clamped to
/// [-1, 1]. A flat profile gives 0; a profile without an interior maximum
/// snaps to the larger end.
pub fn quadratic_vertex(fm1: f64, f0: f64, fp1: f64) -> f64 {
    let denom = 2.0 * fp1 + 2.0 * fm1 - 4.0 * f0;
    if !denom.is_finite() || (denom == 0.0 && fm1 == fp1) {
        return 0.0;
    }
    if denom >= 0.0 {
        return if fp1 > fm1 { 1.0 } else if fm1 > fp1 { -1.0 } else { 0.0 };
    }
    ((fm1 - fp1) / denom).clamp(-1.0, 1.0)
}

fn line<T: Real, const N: usize>(profile: &CorrelationProfile<T>, horizontal: bool) -> Result<[f64; N]> {
    let r = (N / 2) as i32;
    let mut out = [0.0; N];
    for (i, slot) in out.iter_mut().enumerate() {
        let k = i as i32 - r;
        let lag = if horizontal { (k, 0) } else { (0, k) };
        *slot = profile
            .get(lag)
            .ok_or_else(|| Error::InvalidArgument(format!("profile lacks relative lag {lag:?}")))?
            .as_f64();
    }
    Ok(out)
}

/// Fractional horizontal displacement from lags {-1, 0, 1}.
pub fn subpixel_quadratic<T: Real>(profile: &CorrelationProfile<T>) -> Result<T> {
    let [a, b, c] = line::<T, 3>(profile, true)?;
    Ok(T::of(quadratic_vertex(a, b, c)))
}

/// Coefficients `c[0..5]` of the quartic through x = -2..=2.
fn quartic_coefficients(f: [f64; 5]) -> [f64; 5] {
    let [fm2, fm1, f0, fp1, fp2] = f;
    let even1 = (fp1 + fm1) / 2.0 - f0;
    let even2 = (fp2 + fm2) / 2.0 - f0;
    let odd1 = (fp1 - fm1) / 2.0;
    let odd2 = (fp2 - fm2) / 2.0;
    let c4 = (even2 - 4.0 * even1) / 12.0;
    let c2 = even1 - c4;
    let c3 = (odd2 - 2.0 * odd1) / 6.0;
    let c1 = odd1 - c3;
    [f0, c1, c2, c3, c4]
}

fn poly(c: &[f64; 5], x: f64) -> f64 {
    (((c[4] * x + c[3]) * x + c[2]) * x + c[1]) * x + c[0]
}

/// Location of the maximum on [-1, 1] of the quartic through five
/// equally spaced samples at -2..=2.
///
/// Newton iterations on the cubic derivative start from the three-point
/// estimate (tolerance 1e-9, at most 50 steps). When the quartic has no
/// interior maximum at least as high as both endpoints, the three-point
/// estimate is returned instead.
pub fn quartic_peak(f: [f64; 5]) -> f64 {
    let fallback = quadratic_vertex(f[1], f[2], f[3]);
    let c = quartic_coefficients(f);
    let d1 = |x: f64| c[1] + x * (2.0 * c[2] + x * (3.0 * c[3] + x * 4.0 * c[4]));
    let d2 = |x: f64| 2.0 * c[2] + x * (6.0 * c[3] + x * 12.0 * c[4]);

    let mut x = fallback;
    let mut converged = false;
    for _ in 0..50 {
        let h = d2(x);
        if h == 0.0 || !h.is_finite() {
            break;
        }
        let step = d1(x) / h;
        x -= step;
        if !x.is_finite() || x.abs() > 4.0 {
            break;
        }
        if step.abs() < 1e-9 {
            converged = true;
            break;
        }
    }
    if converged && x.abs() <= 1.0 && d2(x) < 0.0 {
        let peak = poly(&c, x);
        if peak >= poly(&c, -1.0) && peak >= poly(&c, 1.0) {
            return x;
        }
    }
    fallback
}

/// Fractional horizontal displacement from lags {-2..=2}.
pub fn subpixel_quartic<T: Real>(profile: &CorrelationProfile<T>) -> Result<T> {
    Ok(T::of(quartic_peak(line::<T, 5>(profile, true)?)))
}

/// Joint (dx, dy) from a full 3x3 profile.
///
/// Fits `a x^2 + b y^2 + c xy + d x + e y + g` to the nine samples by least
/// squares and returns its stationary point when that point is a maximum
/// inside [-1, 1]^2; otherwise each axis is refined independently from the
/// center row and column.
pub fn subpixel_2d<T: Real>(profile: &CorrelationProfile<T>) -> Result<(T, T)> {
    let mut f = [[0.0; 3]; 3];
    for (j, row) in f.iter_mut().enumerate() {
        for (i, v) in row.iter_mut().enumerate() {
            let lag = (i as i32 - 1, j as i32 - 1);
            *v = profile
                .get(lag)
                .ok_or_else(|| Error::InvalidArgument(format!("profile lacks relative lag {lag:?}")))?
                .as_f64();
        }
    }
    let per_axis = (
        quadratic_vertex(f[1][0], f[1][1], f[1][2]),
        quadratic_vertex(f[0][1], f[1][1], f[2][1]),
    );

    let (mut sx, mut sy, mut sxy, mut sx2, mut sy2, mut s) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (j, row) in f.iter().enumerate() {
        for (i, &v) in row.iter().enumerate() {
            let (x, y) = (i as f64 - 1.0, j as f64 - 1.0);
            sx += x * v;
            sy += y * v;
            sxy += x * y * v;
            sx2 += x * x * v;
            sy2 += y * y * v;
            s += v;
        }
    }
    // Over the 3x3 grid: sum x^2 = 6, sum x^4 = 6, sum x^2 y^2 = 4, sum xy^2 = 4.
    let d = sx / 6.0;
    let e = sy / 6.0;
    let c = sxy / 4.0;
    let even = solve3([[6.0, 4.0, 6.0], [4.0, 6.0, 6.0], [6.0, 6.0, 9.0]], [sx2, sy2, s]);
    let Some([a, b, _g]) = even else {
        return Ok((T::of(per_axis.0), T::of(per_axis.1)));
    };
    let det = 4.0 * a * b - c * c;
    if a < 0.0 && det > 0.0 {
        let x = (c * e - 2.0 * b * d) / det;
        let y = (c * d - 2.0 * a * e) / det;
        if x.abs() <= 1.0 && y.abs() <= 1.0 {
            return Ok((T::of(x), T::of(y)));
        }
    }
    Ok((T::of(per_axis.0), T::of(per_axis.1)))
}

/// Per-axis quartic refinement on a plus-shaped stencil.
pub(crate) fn subpixel_cross_quartic<T: Real>(profile: &CorrelationProfile<T>) -> Result<(T, T)> {
    let h = line::<T, 5>(profile, true)?;
    let v = line::<T, 5>(profile, false)?;
    Ok((T::of(quartic_peak(h)), T::of(quartic_peak(v))))
}
