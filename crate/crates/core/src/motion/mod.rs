//! Sub-pixel motion measurement.
//!
//! The similarity operator correlates a zero-mean reference crop with the
//! current patch displaced by an integer lag:
//!
//! ```text
//! K(lag) = sum_x r'(x) * c(x + lag)
//! ```
//!
//! so a positive lag means content moved toward +x (or +y). Only a handful
//! of lags around the tracked integer displacement are evaluated per frame;
//! a polynomial through those samples gives the fractional part.

mod correlate;
mod interp;
pub mod ops;
mod track;

use serde::{Deserialize, Serialize};

pub use correlate::{correlate, correlate_fixed_point, FixedTemplate, Template, FIXED_POINT_MAX_PIXELS};
pub use interp::{quadratic_vertex, quartic_peak, subpixel_2d, subpixel_quadratic, subpixel_quartic};
pub use track::{track_block, track_block_fixed, TrackerConfig};

/// Integer displacement (x, y) in pixels.
pub type Lag = (i32, i32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    Quadratic,
    Quartic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dimensionality {
    #[serde(rename = "1d")]
    OneD,
    #[serde(rename = "2d")]
    TwoD,
}

/// Which correlation operator is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Similarity {
    /// Zero-mean correlation divided by `N * sigma_ref * sigma_cur`.
    Normalized,
    /// Raw sum of products against a reference with its rounded mean removed.
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arithmetic {
    Float,
    Fixed16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotionMode {
    pub interpolation: Interpolation,
    pub dimensionality: Dimensionality,
}

impl MotionMode {
    pub const QUADRATIC_1D: MotionMode = MotionMode {
        interpolation: Interpolation::Quadratic,
        dimensionality: Dimensionality::OneD,
    };
    pub const QUARTIC_1D: MotionMode = MotionMode {
        interpolation: Interpolation::Quartic,
        dimensionality: Dimensionality::OneD,
    };
    pub const QUADRATIC_2D: MotionMode = MotionMode {
        interpolation: Interpolation::Quadratic,
        dimensionality: Dimensionality::TwoD,
    };
    pub const QUARTIC_2D: MotionMode = MotionMode {
        interpolation: Interpolation::Quartic,
        dimensionality: Dimensionality::TwoD,
    };

    pub fn lag_set(&self) -> LagSet {
        match (self.interpolation, self.dimensionality) {
            (Interpolation::Quadratic, Dimensionality::OneD) => LagSet::Line3,
            (Interpolation::Quartic, Dimensionality::OneD) => LagSet::Line5,
            (Interpolation::Quadratic, Dimensionality::TwoD) => LagSet::Square3,
            (Interpolation::Quartic, Dimensionality::TwoD) => LagSet::Cross5,
        }
    }
}

/// Lag stencils, relative to the tracked integer displacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LagSet {
    /// Horizontal lags -1..=1.
    Line3,
    /// Horizontal lags -2..=2.
    Line5,
    /// Full 3x3 neighborhood.
    Square3,
    /// Plus-shaped stencil reaching +-2 along each axis.
    Cross5,
}

const LINE3: [Lag; 3] = [(-1, 0), (0, 0), (1, 0)];
const LINE5: [Lag; 5] = [(-2, 0), (-1, 0), (0, 0), (1, 0), (2, 0)];
const SQUARE3: [Lag; 9] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (0, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];
const CROSS3: [Lag; 5] = [(0, -1), (-1, 0), (0, 0), (1, 0), (0, 1)];
const CROSS5: [Lag; 9] = [
    (0, -2),
    (0, -1),
    (-2, 0),
    (-1, 0),
    (0, 0),
    (1, 0),
    (2, 0),
    (0, 1),
    (0, 2),
];

impl LagSet {
    pub fn offsets(&self) -> &'static [Lag] {
        match self {
            LagSet::Line3 => &LINE3,
            LagSet::Line5 => &LINE5,
            LagSet::Square3 => &SQUARE3,
            LagSet::Cross5 => &CROSS5,
        }
    }

    /// Offsets compared when searching for the reference peak.
    pub(crate) fn step_offsets(&self) -> &'static [Lag] {
        match self {
            LagSet::Line3 | LagSet::Line5 => &LINE3,
            LagSet::Square3 => &SQUARE3,
            LagSet::Cross5 => &CROSS3,
        }
    }

    /// Stencil reach along x and y.
    pub fn radius(&self) -> (usize, usize) {
        match self {
            LagSet::Line3 => (1, 0),
            LagSet::Line5 => (2, 0),
            LagSet::Square3 => (1, 1),
            LagSet::Cross5 => (2, 2),
        }
    }

    pub fn is_2d(&self) -> bool {
        matches!(self, LagSet::Square3 | LagSet::Cross5)
    }
}

/// Similarity scores at lags around `center`, for relative lags in
/// [-2, 2] along each axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationProfile<T> {
    center: Lag,
    values: [T; 25],
    present: u32,
}

impl<T: crate::Real> CorrelationProfile<T> {
    pub fn new(center: Lag) -> Self {
        CorrelationProfile {
            center,
            values: [T::zero(); 25],
            present: 0,
        }
    }

    /// Builds a 1D profile from values at relative lags `-r..=r`
    /// (`values.len() == 2r + 1`, r <= 2).
    pub fn from_line(values: &[T]) -> Self {
        assert!(values.len() % 2 == 1 && values.len() <= 5);
        let r = (values.len() / 2) as i32;
        let mut p = Self::new((0, 0));
        for (i, &v) in values.iter().enumerate() {
            p.insert((i as i32 - r, 0), v);
        }
        p
    }

    /// Builds a 3x3 profile from `rows[dy + 1][dx + 1]`.
    pub fn from_grid3(rows: [[T; 3]; 3]) -> Self {
        let mut p = Self::new((0, 0));
        for (j, row) in rows.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                p.insert((i as i32 - 1, j as i32 - 1), v);
            }
        }
        p
    }

    fn slot(rel: Lag) -> Option<usize> {
        ((-2..=2).contains(&rel.0) && (-2..=2).contains(&rel.1))
            .then(|| ((rel.1 + 2) * 5 + rel.0 + 2) as usize)
    }

    pub fn center(&self) -> Lag {
        self.center
    }

    pub fn insert(&mut self, rel: Lag, value: T) {
        let slot = Self::slot(rel).expect("relative lag outside [-2, 2]");
        self.values[slot] = value;
        self.present |= 1 << slot;
    }

    /// Score at a lag relative to the center.
    pub fn get(&self, rel: Lag) -> Option<T> {
        let slot = Self::slot(rel)?;
        (self.present & (1 << slot) != 0).then(|| self.values[slot])
    }

    /// Score at an absolute lag.
    pub fn at(&self, lag: Lag) -> Option<T> {
        self.get((lag.0 - self.center.0, lag.1 - self.center.1))
    }

    pub fn len(&self) -> usize {
        self.present.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.present == 0
    }

    /// (relative lag, score) pairs in row-major lag order.
    pub fn iter(&self) -> impl Iterator<Item = (Lag, T)> + '_ {
        (0..25usize)
            .filter(|s| self.present & (1 << s) != 0)
            .map(|s| ((s as i32 % 5 - 2, s as i32 / 5 - 2), self.values[s]))
    }

    /// Relative lag of the highest score among `candidates`; ties keep the
    /// candidate closest to the center, then the earliest.
    pub fn argmax_among(&self, candidates: &[Lag]) -> Option<Lag> {
        let mut best: Option<(Lag, T)> = None;
        for &c in candidates {
            let Some(v) = self.get(c) else { continue };
            let better = match best {
                None => true,
                Some((b, bv)) => {
                    v > bv || (v == bv && c.0.abs() + c.1.abs() < b.0.abs() + b.1.abs())
                }
            };
            if better {
                best = Some((c, v));
            }
        }
        best.map(|(l, _)| l)
    }

    /// Relative lag of the overall maximum.
    pub fn argmax(&self) -> Option<Lag> {
        let all: Vec<Lag> = self.iter().map(|(l, _)| l).collect();
        self.argmax_among(&all)
    }

    pub fn map_values<U: crate::Real>(&self, f: impl Fn(T) -> U) -> CorrelationProfile<U> {
        let mut out = CorrelationProfile::new(self.center);
        for (l, v) in self.iter() {
            out.insert(l, f(v));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementSample<T> {
    pub dx: T,
    pub dy: T,
    pub integer_part: Lag,
    pub t: usize,
}

/// Per-frame displacement of one block relative to its reference frame.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementSignal<T = f64> {
    pub samples: Vec<DisplacementSample<T>>,
    pub block_id: usize,
    pub reference_frame_index: usize,
    /// First frame at which tracking left the patch margin, if any.
    pub lost_from: Option<usize>,
}

impl<T: crate::Real> DisplacementSignal<T> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_lost(&self) -> bool {
        self.lost_from.is_some()
    }

    pub fn dx(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.dx).collect()
    }

    pub fn dy(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.dy).collect()
    }

    /// Builds a signal from raw (dx, dy) pairs, mainly for tests.
    pub fn from_xy(block_id: usize, dx: &[T], dy: &[T]) -> Self {
        let samples = dx
            .iter()
            .zip(dy)
            .enumerate()
            .map(|(t, (&dx, &dy))| DisplacementSample {
                dx,
                dy,
                integer_part: (
                    dx.round().to_i32().unwrap_or(0),
                    dy.round().to_i32().unwrap_or(0),
                ),
                t,
            })
            .collect();
        DisplacementSignal {
            samples,
            block_id,
            reference_frame_index: 0,
            lost_from: None,
        }
    }
}
