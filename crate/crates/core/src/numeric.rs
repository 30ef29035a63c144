//! Small numeric helpers: compensated summation and ordered parallel folds.

use num_complex::Complex64;
use rayon::prelude::*;

/// Neumaier-compensated accumulator for `f64`.
///
/// Weighted counts are compared across independent routes at 1e-6 relative
/// or better, so plain left-to-right accumulation over ~1e8 terms is not
/// good enough.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated accumulator for complex values (componentwise).
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanComplex {
    re: Kahan,
    im: Kahan,
}

impl KahanComplex {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Fixed block length for deterministic parallel reductions. Block
/// boundaries depend only on the input length, never on the worker count,
/// so every run reduces the same partial sums in the same order.
pub const PAR_BLOCK: usize = 1 << 16;

/// Sums `f(i)` for `i` in `lo..hi` with block-local compensated sums folded
/// in block order. The result is bit-identical for any rayon pool size.
pub fn par_sum_f64<F>(lo: u64, hi: u64, f: F) -> f64
where
    F: Fn(u64) -> f64 + Sync,
{
    if hi <= lo {
        return 0.0;
    }
    let blocks: Vec<(u64, u64)> = block_ranges(lo, hi);
    let partials: Vec<f64> = blocks
        .into_par_iter()
        .map(|(a, b)| {
            let mut acc = Kahan::new();
            for i in a..b {
                acc.add(f(i));
            }
            acc.value()
        })
        .collect();
    let mut total = Kahan::new();
    for p in partials {
        total.add(p);
    }
    total.value()
}

/// Complex analogue of [`par_sum_f64`].
pub fn par_sum_complex<F>(lo: u64, hi: u64, f: F) -> Complex64
where
    F: Fn(u64) -> Complex64 + Sync,
{
    if hi <= lo {
        return Complex64::new(0.0, 0.0);
    }
    let blocks: Vec<(u64, u64)> = block_ranges(lo, hi);
    let partials: Vec<Complex64> = blocks
        .into_par_iter()
        .map(|(a, b)| {
            let mut acc = KahanComplex::new();
            for i in a..b {
                acc.add(f(i));
            }
            acc.value()
        })
        .collect();
    let mut total = KahanComplex::new();
    for p in partials {
        total.add(p);
    }
    total.value()
}

fn block_ranges(lo: u64, hi: u64) -> Vec<(u64, u64)> {
    let step = PAR_BLOCK as u64;
    let mut out = Vec::with_capacity(((hi - lo) / step + 1) as usize);
    let mut a = lo;
    while a < hi {
        let b = (a + step).min(hi);
        out.push((a, b));
        a = b;
    }
    out
}
