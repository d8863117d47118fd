//! Operation counters for the correlation kernels.
//!
//! Compiled in only with the `op-count` feature. Counters are thread-local,
//! so a measurement covers exactly the work done on the calling thread.

#[cfg(feature = "op-count")]
use std::cell::Cell;

#[cfg(feature = "op-count")]
thread_local! {
    static OPS: Cell<u64> = const { Cell::new(0) };
    static PIXELS: Cell<u64> = const { Cell::new(0) };
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct OpCounts {
    /// Arithmetic operations (a multiply-accumulate counts as two).
    pub ops: u64,
    /// Pixels run through the kernel, counted once per frame evaluation.
    pub pixels: u64,
}

impl OpCounts {
    pub fn per_pixel(&self) -> f64 {
        if self.pixels == 0 {
            0.0
        } else {
            self.ops as f64 / self.pixels as f64
        }
    }
}

pub const fn enabled() -> bool {
    cfg!(feature = "op-count")
}

#[inline(always)]
pub(crate) fn record_ops(_n: u64) {
    #[cfg(feature = "op-count")]
    OPS.with(|c| c.set(c.get() + _n));
}

#[inline(always)]
pub(crate) fn record_pixels(_n: u64) {
    #[cfg(feature = "op-count")]
    PIXELS.with(|c| c.set(c.get() + _n));
}

pub fn snapshot() -> OpCounts {
    #[cfg(feature = "op-count")]
    {
        OpCounts {
            ops: OPS.with(Cell::get),
            pixels: PIXELS.with(Cell::get),
        }
    }
    #[cfg(not(feature = "op-count"))]
    OpCounts::default()
}

pub fn reset() {
    #[cfg(feature = "op-count")]
    {
        OPS.with(|c| c.set(0));
        PIXELS.with(|c| c.set(0));
    }
}

/// Runs `f` without counting its work; used for one-time per-block setup.
pub(crate) fn uncounted<R>(f: impl FnOnce() -> R) -> R {
    #[cfg(feature = "op-count")]
    {
        let before = snapshot();
        let out = f();
        OPS.with(|c| c.set(before.ops));
        PIXELS.with(|c| c.set(before.pixels));
        out
    }
    #[cfg(not(feature = "op-count"))]
    f()
}

/// Runs `f` and returns the counts it accumulated on this thread.
pub fn measure<R>(f: impl FnOnce() -> R) -> (R, OpCounts) {
    let before = snapshot();
    let out = f();
    let after = snapshot();
    (
        out,
        OpCounts {
            ops: after.ops - before.ops,
            pixels: after.pixels - before.pixels,
        },
    )
}
