use super::correlate::{FixedTemplate, Template};
use super::interp::{subpixel_2d, subpixel_cross_quartic, subpixel_quadratic, subpixel_quartic};
use super::ops::{record_pixels, uncounted};
use super::{CorrelationProfile, DisplacementSample, DisplacementSignal, Lag, LagSet, MotionMode, Similarity};
use crate::error::Result;
use crate::video::{Patch, Pixel};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrackerConfig {
    pub mode: MotionMode,
    pub similarity: Similarity,
    /// Pixels between the reference crop and the patch edge, per axis. The
    /// tracked integer displacement plus the stencil reach must stay within
    /// this margin.
    pub margin: (usize, usize),
}

impl TrackerConfig {
    pub fn new(mode: MotionMode, similarity: Similarity, margin: usize) -> Self {
        TrackerConfig {
            mode,
            similarity,
            margin: (margin, margin),
        }
    }
}

trait Kernel<T, P: Pixel> {
    fn check(&self, current: &Patch<'_, P>) -> Result<()>;
    fn crop_pixels(&self) -> usize;
    fn eval(&self, current: &Patch<'_, P>, lag: Lag) -> T;
}

impl<T: Real, P: Pixel> Kernel<T, P> for Template<T> {
    fn check(&self, current: &Patch<'_, P>) -> Result<()> {
        self.check_current(current)
    }
    fn crop_pixels(&self) -> usize {
        Template::crop_pixels(self)
    }
    #[inline]
    fn eval(&self, current: &Patch<'_, P>, lag: Lag) -> T {
        Template::eval(self, current, lag)
    }
}

impl<T: Real> Kernel<T, u8> for FixedTemplate {
    fn check(&self, current: &Patch<'_, u8>) -> Result<()> {
        self.check_current(current)
    }
    fn crop_pixels(&self) -> usize {
        FixedTemplate::crop_pixels(self)
    }
    #[inline]
    fn eval(&self, current: &Patch<'_, u8>, lag: Lag) -> T {
        T::of(FixedTemplate::eval(self, current, lag) as f64)
    }
}

/// Similarity values already computed for the current frame, keyed by absolute lag.
struct LagCache<T> {
    entries: [(Lag, T); 32],
    len: usize,
}

impl<T: Real> LagCache<T> {
    fn new() -> Self {
        LagCache {
            entries: [((0, 0), T::zero()); 32],
            len: 0,
        }
    }

    fn get_or_eval(&mut self, lag: Lag, eval: impl FnOnce() -> T) -> T {
        if let Some((_, v)) = self.entries[..self.len].iter().find(|(l, _)| *l == lag) {
            return *v;
        }
        let v = eval();
        if self.len < self.entries.len() {
            self.entries[self.len] = (lag, v);
            self.len += 1;
        }
        v
    }
}

struct Tracker<'k, K> {
    kernel: &'k K,
    lags: LagSet,
    margin: (usize, usize),
}

enum FrameResult<T> {
    Tracked { center: Lag, frac: (T, T) },
    Lost,
}

impl<K> Tracker<'_, K> {
    fn in_bounds(&self, c: Lag) -> bool {
        let (rx, ry) = self.lags.radius();
        c.0.unsigned_abs() as usize + rx <= self.margin.0 && c.1.unsigned_abs() as usize + ry <= self.margin.1
    }

    fn profile<T: Real, P: Pixel>(&self, current: &Patch<'_, P>, center: Lag, cache: &mut LagCache<T>) -> CorrelationProfile<T>
    where
        K: Kernel<T, P>,
    {
        let mut p = CorrelationProfile::new(center);
        for &off in self.lags.offsets() {
            let lag = (center.0 + off.0, center.1 + off.1);
            let raw = cache.get_or_eval(lag, || self.kernel.eval(current, lag));
            p.insert(off, raw);
        }
        p
    }

    fn refine<T: Real>(&self, p: &CorrelationProfile<T>) -> Result<(T, T)> {
        match self.lags {
            LagSet::Line3 => Ok((subpixel_quadratic(p)?, T::zero())),
            LagSet::Line5 => Ok((subpixel_quartic(p)?, T::zero())),
            LagSet::Square3 => subpixel_2d(p),
            LagSet::Cross5 => subpixel_cross_quartic(p),
        }
    }

    /// Climbs from lag zero to the reference's own correlation peak and
    /// returns that center with the fractional estimate there, or `None`
    /// when no peak lies within the margin. A zero-mean
    /// template need not peak at lag zero on its own frame; at a boundary
    /// peak the estimate would be clamped and blind to small motion.
    fn home<T: Real, P: Pixel>(&self, reference: &Patch<'_, P>) -> Result<Option<(Lag, (T, T))>>
    where
        K: Kernel<T, P>,
    {
        self.kernel.check(reference)?;
        let mut cache = LagCache::new();
        let mut center = (0, 0);
        loop {
            let p = self.profile(reference, center, &mut cache);
            let step = p.argmax_among(self.lags.step_offsets()).unwrap_or((0, 0));
            let next = (center.0 + step.0, center.1 + step.1);
            if step == (0, 0) {
                return Ok(Some((center, self.refine(&p)?)));
            }
            if !self.in_bounds(next) || cache.len + self.lags.offsets().len() > cache.entries.len() {
                return Ok(None);
            }
            center = next;
        }
    }

    /// `bias` is the fractional estimate of the reference against itself.
    /// The integer part steps when the bias-corrected estimate leaves
    /// (-0.5, 0.5) around the current center; the plain argmax is not used
    /// because a zero-mean template can score a neighbouring lag higher even
    /// on an unchanged frame.
    fn frame<T: Real, P: Pixel>(&self, current: &Patch<'_, P>, prev: Lag, bias: (T, T)) -> Result<FrameResult<T>>
    where
        K: Kernel<T, P>,
    {
        self.kernel.check(current)?;
        record_pixels(self.kernel.crop_pixels() as u64);
        let mut cache = LagCache::new();
        let mut center = prev;
        let mut frac = self.refine(&self.profile(current, center, &mut cache))?;
        let half = T::of(0.5);
        let step_of = |d: T| if d > half { 1 } else if d < -half { -1 } else { 0 };
        let step = (step_of(frac.0 - bias.0), step_of(frac.1 - bias.1));
        if step != (0, 0) {
            let next = (center.0 + step.0, center.1 + step.1);
            if !self.in_bounds(next) {
                return Ok(FrameResult::Lost);
            }
            center = next;
            frac = self.refine(&self.profile(current, center, &mut cache))?;
        }
        Ok(FrameResult::Tracked { center, frac })
    }
}

fn run<'a, T, P, K, I>(kernel: &K, reference: &Patch<'a, P>, frames: I, config: &TrackerConfig) -> Result<DisplacementSignal<T>>
where
    T: Real,
    P: Pixel,
    K: Kernel<T, P>,
    I: IntoIterator<Item = Patch<'a, P>>,
{
    let lags = config.mode.lag_set();
    let tracker = Tracker {
        kernel,
        lags,
        margin: config.margin,
    };
    if !tracker.in_bounds((0, 0)) {
        return Err(crate::Error::PatchTooSmall {
            width: reference.width(),
            height: reference.height(),
            max_lag: lags.radius().0.max(lags.radius().1),
            min: 2 * lags.radius().0.max(lags.radius().1) + 2,
        });
    }

    // Setup, like building the template, is not counted as kernel work.
    let Some((home, bias)) = uncounted(|| tracker.home::<T, P>(reference))? else {
        // untrackable: the correlation keeps rising past the margin
        let samples = (0..frames.into_iter().count())
            .map(|t| DisplacementSample {
                dx: T::zero(),
                dy: T::zero(),
                integer_part: (0, 0),
                t,
            })
            .collect();
        return Ok(DisplacementSignal {
            samples,
            block_id: 0,
            reference_frame_index: 0,
            lost_from: Some(0),
        });
    };
    let zero = (
        T::of(home.0 as f64) + bias.0,
        T::of(home.1 as f64) + bias.1,
    );

    let mut samples = Vec::new();
    let mut lost_from = None;
    let mut prev = home;
    let mut last = (T::zero(), T::zero());
    for (t, current) in frames.into_iter().enumerate() {
        if lost_from.is_none() {
            match tracker.frame::<T, P>(&current, prev, bias)? {
                FrameResult::Tracked { center, frac } => {
                    prev = center;
                    last = (
                        T::of(center.0 as f64) + frac.0 - zero.0,
                        T::of(center.1 as f64) + frac.1 - zero.1,
                    );
                }
                FrameResult::Lost => lost_from = Some(t),
            }
        }
        samples.push(DisplacementSample {
            dx: last.0,
            dy: last.1,
            integer_part: (prev.0 - home.0, prev.1 - home.1),
            t,
        });
    }
    Ok(DisplacementSignal {
        samples,
        block_id: 0,
        reference_frame_index: 0,
        lost_from,
    })
}

/// Tracks one block through `frames` with the float kernel.
///
/// `frames` should start with the reference frame itself; every patch must
/// match the reference patch size. Per frame, the profile is evaluated around
/// the previous integer displacement; if the sub-pixel estimate falls more
/// than half a pixel away, the integer part moves by one step and the profile
/// is re-centered once.
pub fn track_block<'a, T, P, I>(reference: &Patch<'a, P>, frames: I, config: &TrackerConfig) -> Result<DisplacementSignal<T>>
where
    T: Real,
    P: Pixel,
    I: IntoIterator<Item = Patch<'a, P>>,
{
    let template = Template::<T>::new(reference, config.margin, config.similarity)?;
    run(&template, reference, frames, config)
}

/// Same as [`track_block`] on the 16-bit fixed-point kernel (plain
/// operator; `config.similarity` is ignored).
pub fn track_block_fixed<'a, T, I>(reference: &Patch<'a, u8>, frames: I, config: &TrackerConfig) -> Result<DisplacementSignal<T>>
where
    T: Real,
    I: IntoIterator<Item = Patch<'a, u8>>,
{
    let template = FixedTemplate::new(reference, config.margin)?;
    run(&template, reference, frames, config)
}
