use super::ops::{record_ops, record_pixels};
use super::{CorrelationProfile, Lag, LagSet, Similarity};
use crate::error::{Error, Result};
use crate::video::{Patch, Pixel};
use crate::Real;

/// Largest patch area accepted by the fixed-point path. With mean-removed
/// 8-bit references in [-255, 255] and 8-bit current pixels, `2^15` products
/// of at most `255 * 255` still fit a signed 32-bit accumulator.
pub const FIXED_POINT_MAX_PIXELS: usize = 1 << 15;

fn check_geometry(width: usize, height: usize, margin: (usize, usize)) -> Result<()> {
    let need = |m: usize| if m == 0 { 1 } else { 2 * m + 2 };
    if width < need(margin.0) || height < need(margin.1) {
        return Err(Error::PatchTooSmall {
            width,
            height,
            max_lag: margin.0.max(margin.1),
            min: need(margin.0.max(margin.1)),
        });
    }
    Ok(())
}

fn check_same_shape<P: Copy, Q: Copy>(a: &Patch<'_, P>, b: &Patch<'_, Q>) -> Result<()> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(Error::SizeMismatch {
            expected: (a.width(), a.height()),
            found: (b.width(), b.height()),
            context: "current patch".into(),
        });
    }
    Ok(())
}

/// Integer mean rounded half up.
fn rounded_mean<P: Pixel>(crop: &Patch<'_, P>) -> i32 {
    let n = (crop.width() * crop.height()) as i64;
    let sum: i64 = (0..crop.height())
        .flat_map(|y| crop.row(y).iter())
        .map(|p| p.to_i32() as i64)
        .sum();
    (2 * sum + n).div_euclid(2 * n) as i32
}

fn crop_rect(width: usize, height: usize, margin: (usize, usize)) -> crate::video::Rect {
    crate::video::Rect::new(margin.0, margin.1, width - 2 * margin.0, height - 2 * margin.1)
}

#[inline(always)]
fn lag_origin(margin: (usize, usize), lag: Lag) -> (usize, usize) {
    debug_assert!(lag.0.unsigned_abs() as usize <= margin.0 && lag.1.unsigned_abs() as usize <= margin.1);
    (
        (margin.0 as i32 + lag.0) as usize,
        (margin.1 as i32 + lag.1) as usize,
    )
}

/// Zero-mean reference crop prepared for repeated correlation.
///
/// The reference patch is cropped by `margin` on each side; the current
/// patch (same size as the reference patch) supplies pixels at every lag
/// within the margin, so the overlap region never changes with the lag.
#[derive(Debug, Clone)]
pub struct Template<T> {
    patch: (usize, usize),
    margin: (usize, usize),
    crop: (usize, usize),
    values: Vec<T>,
    sigma: T,
    similarity: Similarity,
}

impl<T: Real> Template<T> {
    pub fn new<P: Pixel>(reference: &Patch<'_, P>, margin: (usize, usize), similarity: Similarity) -> Result<Self> {
        check_geometry(reference.width(), reference.height(), margin)?;
        let crop = reference.sub(crop_rect(reference.width(), reference.height(), margin));
        let n = crop.width() * crop.height();
        let pixels: Vec<T> = crop.to_vec().into_iter().map(|p| p.to_real()).collect();
        let (values, sigma) = match similarity {
            Similarity::Plain => {
                let m = T::of(rounded_mean(&crop) as f64);
                (pixels.iter().map(|&p| p - m).collect(), T::one())
            }
            Similarity::Normalized => {
                let m = pixels.iter().copied().sum::<T>() / T::from_usize_lossy(n);
                let centered: Vec<T> = pixels.iter().map(|&p| p - m).collect();
                let var = centered.iter().map(|&v| v * v).sum::<T>() / T::from_usize_lossy(n);
                (centered, var.sqrt())
            }
        };
        Ok(Template {
            patch: (reference.width(), reference.height()),
            margin,
            crop: (crop.width(), crop.height()),
            values,
            sigma,
            similarity,
        })
    }

    pub fn margin(&self) -> (usize, usize) {
        self.margin
    }

    pub fn crop_pixels(&self) -> usize {
        self.crop.0 * self.crop.1
    }

    pub fn similarity(&self) -> Similarity {
        self.similarity
    }

    pub fn check_current<P: Pixel>(&self, current: &Patch<'_, P>) -> Result<()> {
        if (current.width(), current.height()) != self.patch {
            return Err(Error::SizeMismatch {
                expected: self.patch,
                found: (current.width(), current.height()),
                context: "current patch".into(),
            });
        }
        Ok(())
    }

    /// Similarity at an absolute lag. The normalized operator divides by
    /// `N sigma_ref sigma_cur`, with `sigma_cur` taken over the window the
    /// lag selects.
    #[inline]
    pub fn eval<P: Pixel>(&self, current: &Patch<'_, P>, lag: Lag) -> T {
        match self.similarity {
            Similarity::Plain => self.sum_products(current, lag),
            Similarity::Normalized => self.normalized(current, lag),
        }
    }

    fn sum_products<P: Pixel>(&self, current: &Patch<'_, P>, lag: Lag) -> T {
        let (cw, ch) = self.crop;
        let (ox, oy) = lag_origin(self.margin, lag);
        let mut acc = T::zero();
        for y in 0..ch {
            let r = &self.values[y * cw..(y + 1) * cw];
            let c = &current.row(oy + y)[ox..ox + cw];
            for (&a, &b) in r.iter().zip(c) {
                acc = acc + a * b.to_real::<T>();
            }
        }
        record_ops(2 * (cw * ch) as u64);
        acc
    }

    fn normalized<P: Pixel>(&self, current: &Patch<'_, P>, lag: Lag) -> T {
        let (cw, ch) = self.crop;
        let (ox, oy) = lag_origin(self.margin, lag);
        let (mut acc, mut s, mut ss) = (T::zero(), T::zero(), T::zero());
        for y in 0..ch {
            let r = &self.values[y * cw..(y + 1) * cw];
            let c = &current.row(oy + y)[ox..ox + cw];
            for (&a, &b) in r.iter().zip(c) {
                let v = b.to_real::<T>();
                acc = acc + a * v;
                s = s + v;
                ss = ss + v * v;
            }
        }
        record_ops(5 * (cw * ch) as u64);
        let n = T::from_usize_lossy(cw * ch);
        let mean = s / n;
        let var = (ss / n - mean * mean).max(T::zero());
        let denom = n * self.sigma * var.sqrt();
        if denom > T::zero() {
            acc / denom
        } else {
            T::zero()
        }
    }
}

/// Evaluates the similarity operator at every lag of `lags` around zero.
pub fn correlate<T: Real, P: Pixel>(
    reference: &Patch<'_, P>,
    current: &Patch<'_, P>,
    lags: LagSet,
    similarity: Similarity,
) -> Result<CorrelationProfile<T>> {
    let template = Template::<T>::new(reference, lags.radius(), similarity)?;
    check_same_shape(reference, current)?;
    record_pixels(template.crop_pixels() as u64);
    let mut profile = CorrelationProfile::new((0, 0));
    for &lag in lags.offsets() {
        profile.insert(lag, template.eval(current, lag));
    }
    Ok(profile)
}

/// Fixed-point reference: 8-bit pixels minus their rounded mean, as `i16`.
#[derive(Debug, Clone)]
pub struct FixedTemplate {
    patch: (usize, usize),
    margin: (usize, usize),
    crop: (usize, usize),
    values: Vec<i16>,
}

impl FixedTemplate {
    pub fn new(reference: &Patch<'_, u8>, margin: (usize, usize)) -> Result<Self> {
        let pixels = reference.width() * reference.height();
        if pixels > FIXED_POINT_MAX_PIXELS {
            return Err(Error::AccumulatorContract {
                pixels,
                max: FIXED_POINT_MAX_PIXELS,
            });
        }
        check_geometry(reference.width(), reference.height(), margin)?;
        let crop = reference.sub(crop_rect(reference.width(), reference.height(), margin));
        let m = rounded_mean(&crop);
        let values = crop.to_vec().into_iter().map(|p| (p as i32 - m) as i16).collect();
        Ok(FixedTemplate {
            patch: (reference.width(), reference.height()),
            margin,
            crop: (crop.width(), crop.height()),
            values,
        })
    }

    pub fn margin(&self) -> (usize, usize) {
        self.margin
    }

    pub fn crop_pixels(&self) -> usize {
        self.crop.0 * self.crop.1
    }

    pub fn check_current(&self, current: &Patch<'_, u8>) -> Result<()> {
        if (current.width(), current.height()) != self.patch {
            return Err(Error::SizeMismatch {
                expected: self.patch,
                found: (current.width(), current.height()),
                context: "current patch".into(),
            });
        }
        Ok(())
    }

    /// i16 x u8 products accumulated in i32 at an absolute lag.
    #[inline]
    pub fn eval(&self, current: &Patch<'_, u8>, lag: Lag) -> i32 {
        let (cw, ch) = self.crop;
        let (ox, oy) = lag_origin(self.margin, lag);
        let mut acc = 0i32;
        for y in 0..ch {
            let r = &self.values[y * cw..(y + 1) * cw];
            let c = &current.row(oy + y)[ox..ox + cw];
            acc = r
                .iter()
                .zip(c)
                .fold(acc, |a, (&rv, &cv)| a.wrapping_add((rv as i32).wrapping_mul(cv as i32)));
        }
        record_ops(2 * (cw * ch) as u64);
        acc
    }
}

/// Fixed-point evaluation of the plain operator; exact integer profile
/// converted to `T`.
pub fn correlate_fixed_point<T: Real>(
    reference: &Patch<'_, u8>,
    current: &Patch<'_, u8>,
    lags: LagSet,
) -> Result<CorrelationProfile<T>> {
    let template = FixedTemplate::new(reference, lags.radius())?;
    check_same_shape(reference, current)?;
    record_pixels(template.crop_pixels() as u64);
    let mut profile = CorrelationProfile::new((0, 0));
    for &lag in lags.offsets() {
        profile.insert(lag, T::of(template.eval(current, lag) as f64));
    }
    Ok(profile)
}
