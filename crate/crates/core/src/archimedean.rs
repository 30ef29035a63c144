//! The singular integral and the assembled main-term prediction.
//!
//! The integral of `w(beta) e(-beta n)` over a period is, by orthogonality,
//! an explicit composition sum: over integer 6-tuples
//! `m1 + m2 + m3 + m4 + m6 + m7 = n` with `m1, m2 > n/4`, `m3, m4 > n/8`,
//! `m6 > n/64`, `m7 > n/2^c` (all `<= n`), weight
//! `(m1 m2)^{-1/2} (m3 m4)^{-2/3} m6^{-5/6} m7^{(1-c)/c}`, normalized by
//! `1/(2^2 3^2 6 c)`.
//!
//! Two independent algorithms compute it: a literal nested enumeration
//! ([`singular_integral_direct`]) and a chain of five array convolutions
//! ([`singular_integral_conv`]). They must agree to 1e-9 relative wherever
//! both run; a third route, trapezoid quadrature of the defining integral
//! on a dense grid ([`wc_quadrature`]), ties the composition sum back to
//! the smooth sums of [`crate::expsum`].

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::expsum::ProblemInstance;
use crate::local::{LocalTables, SingularSeriesValue};
use crate::numeric::{Kahan, KahanComplex};

/// Budget for the literal nested enumeration.
pub const DIRECT_MAX_N: u64 = 3000;
/// Budget for the convolution route.
pub const CONV_MAX_N: u64 = 10_000_000;
/// Convolutions switch from direct summation to transforms at this n.
const CONV_FFT_THRESHOLD: u64 = 100_000;
/// Budget for the quadrature route (cost grows like n^2).
pub const QUAD_MAX_N: u64 = 20_000;

/// Per-slot data of the composition sum: exponent of the weight,
/// denominator `2^k` of the lower threshold, and the global normalizing
/// constant.
#[derive(Clone, Copy, Debug)]
pub struct CompositionWeights {
    /// Weight exponents for slots (m1, m2, m3, m4, m6, m7).
    pub exponents: [f64; 6],
    /// Threshold shifts: slot i requires `m > n / 2^{shift[i]}`.
    pub threshold_shifts: [u32; 6],
    /// `1 / (2^2 3^2 6 c)`.
    pub norm: f64,
}

impl CompositionWeights {
    pub fn for_c(c: u32) -> Self {
        let cf = c as f64;
        Self {
            exponents: [-0.5, -0.5, -2.0 / 3.0, -2.0 / 3.0, -5.0 / 6.0, (1.0 - cf) / cf],
            threshold_shifts: [2, 2, 3, 3, 6, c],
            norm: 1.0 / (4.0 * 9.0 * 6.0 * cf),
        }
    }

    /// Inclusive integer range `(n/2^shift, n]` of a slot.
    fn slot_range(&self, i: usize, n: u64) -> (u64, u64) {
        ((n >> self.threshold_shifts[i]) + 1, n)
    }

    /// Weight vector of a slot: index m holds m^exponent inside the range,
    /// zero outside.
    fn weight_vector(&self, i: usize, n: u64) -> Vec<f64> {
        let (lo, hi) = self.slot_range(i, n);
        let mut w = vec![0.0; (n + 1) as usize];
        for m in lo..=hi {
            w[m as usize] = (m as f64).powf(self.exponents[i]);
        }
        w
    }
}

/// Composition sum by literal nested enumeration over (m1..m4, m6), the
/// last slot determined by the sum constraint. The innermost level is a
/// dot product between the m6 weights and the reversed m7 weights.
///
/// Exchanging m1 with m2 (and m3 with m4) leaves the weight invariant, so
/// the loops run over ordered pairs and double the off-diagonal terms.
pub fn singular_integral_direct(n: u64, c: u32) -> Result<f64> {
    if n > DIRECT_MAX_N {
        return Err(Error::Budget(format!(
            "direct composition sum is budgeted to n <= {DIRECT_MAX_N}, got {n}; use the convolution route"
        )));
    }
    let cw = CompositionWeights::for_c(c);
    let w12 = cw.weight_vector(0, n);
    let w34 = cw.weight_vector(2, n);
    let w6 = cw.weight_vector(4, n);
    let w7 = cw.weight_vector(5, n);
    // reversed last slot: w7r[j] = w7[n - j], so the inner dot product
    // walks both arrays forward
    let w7r: Vec<f64> = (0..=n).map(|j| w7[(n - j) as usize]).collect();
    let (lo1, _) = cw.slot_range(0, n);
    let (lo3, _) = cw.slot_range(2, n);
    let (lo6, _) = cw.slot_range(4, n);
    let (lo7, _) = cw.slot_range(5, n);
    if 2 * lo1 + 2 * lo3 + lo6 + lo7 > n {
        return Ok(0.0);
    }

    let m1_values: Vec<u64> = (lo1..=(n - lo1 - 2 * lo3 - lo6 - lo7)).collect();
    let partials: Vec<f64> = m1_values
        .par_iter()
        .map(|&m1| {
            let mut acc = Kahan::new();
            let x1 = w12[m1 as usize];
            // m2 >= m1; off-diagonal pairs counted twice
            let m2_hi = n - m1 - 2 * lo3 - lo6 - lo7;
            for m2 in m1..=m2_hi {
                let pair12 = x1 * w12[m2 as usize] * if m2 > m1 { 2.0 } else { 1.0 };
                let rest12 = n - m1 - m2;
                let m3_hi = rest12 - lo3 - lo6 - lo7;
                for m3 in lo3..=m3_hi {
                    let x3 = w34[m3 as usize];
                    let m4_hi = rest12 - m3 - lo6 - lo7;
                    for m4 in m3..=m4_hi {
                        let pair34 = x3 * w34[m4 as usize] * if m4 > m3 { 2.0 } else { 1.0 };
                        let rest = (rest12 - m3 - m4) as usize;
                        // dot product over m6, with m7 = rest - m6:
                        // w7[rest - m6] = w7r[n - rest + m6]
                        let m6_hi = rest - lo7 as usize;
                        let off = n as usize - rest;
                        let a = &w6[lo6 as usize..=m6_hi];
                        let b = &w7r[off + lo6 as usize..=off + m6_hi];
                        let inner: f64 =
                            a.iter().zip(b).map(|(&x, &y)| x * y).sum();
                        acc.add(pair12 * pair34 * inner);
                    }
                }
            }
            acc.value()
        })
        .collect();

    let mut total = Kahan::new();
    for p in partials {
        total.add(p);
    }
    Ok(cw.norm * total.value())
}

/// Composition sum via five sequential convolutions of the slot weight
/// vectors, truncated to degree n, reading off coefficient n. Direct
/// summation below [`CONV_FFT_THRESHOLD`], transform-based above.
pub fn singular_integral_conv(n: u64, c: u32) -> Result<f64> {
    if n > CONV_MAX_N {
        return Err(Error::Budget(format!(
            "convolution route is budgeted to n <= {CONV_MAX_N}, got {n}"
        )));
    }
    let cw = CompositionWeights::for_c(c);
    let mut acc = cw.weight_vector(0, n);
    for slot in [1usize, 2, 3, 4] {
        let w = cw.weight_vector(slot, n);
        acc = convolve_truncated(&acc, &w, n);
    }
    // last slot: only coefficient n is needed
    let w7 = cw.weight_vector(5, n);
    let mut last = Kahan::new();
    for (m, &w) in w7.iter().enumerate() {
        if w != 0.0 {
            last.add(w * acc[n as usize - m]);
        }
    }
    Ok(cw.norm * last.value())
}

/// Linear convolution of two degree-<=n coefficient vectors, truncated to
/// degree n. Entries are nonnegative, so truncation is exact for the final
/// coefficient read-off: any partial sum past n can never come back down.
fn convolve_truncated(a: &[f64], b: &[f64], n: u64) -> Vec<f64> {
    if n >= CONV_FFT_THRESHOLD {
        return convolve_fft(a, b, n);
    }
    let len = (n + 1) as usize;
    let a_support: Vec<usize> = (0..a.len()).filter(|&i| a[i] != 0.0).collect();
    let mut out = vec![0.0; len];
    for &i in &a_support {
        let ai = a[i];
        for (j, &bj) in b.iter().enumerate().take(len - i) {
            if bj != 0.0 {
                out[i + j] += ai * bj;
            }
        }
    }
    out
}

fn convolve_fft(a: &[f64], b: &[f64], n: u64) -> Vec<f64> {
    let out_len = (n + 1) as usize;
    let size = (a.len() + b.len() - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut fa: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fa.resize(size, Complex64::new(0.0, 0.0));
    let mut fb: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fb.resize(size, Complex64::new(0.0, 0.0));
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / size as f64;
    fa.truncate(out_len);
    fa.iter().map(|z| z.re * scale).collect()
}

/// Trapezoid (= rectangle, by periodicity) quadrature of
/// `Int_{-1/2}^{1/2} w(beta) e(-beta n) d beta` on a grid of
/// `grid_mult * n` points, evaluating the smooth sums with exact rational
/// phases. Every frequency of `w` is at most `6n`, so any grid past that
/// reproduces the composition sum up to rounding; the stated tolerance of
/// the cross-check is 1%.
pub fn wc_quadrature(inst: &ProblemInstance, grid_mult: u64) -> Result<f64> {
    let n = inst.n();
    if grid_mult < 16 {
        return Err(Error::Config(format!(
            "quadrature grid multiplier must be >= 16, got {grid_mult}"
        )));
    }
    if n > QUAD_MAX_N {
        return Err(Error::Budget(format!(
            "quadrature is budgeted to n <= {QUAD_MAX_N}, got {n}"
        )));
    }
    let grid = grid_mult * n;
    let roots = crate::expsum::unit_roots(grid);
    let roots = &roots[..];
    let c = inst.c();

    // coefficient arrays of the smooth sums, indexed by frequency m
    let coeff = |k: u32| -> Vec<(u64, f64)> {
        let lo = (n >> k) + 1;
        (lo..=n)
            .map(|m| (m, (m as f64).powf(1.0 / k as f64 - 1.0) / k as f64))
            .collect()
    };
    let c2 = coeff(2);
    let c3 = coeff(3);
    let c6 = coeff(6);
    let cc = if c == 6 { Vec::new() } else { coeff(c) };

    let eval = |coeffs: &[(u64, f64)], j: u64| -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for &(m, w) in coeffs {
            s += w * roots[(j * m % grid) as usize];
        }
        s
    };

    let blocks: Vec<u64> = (0..grid).step_by(1 << 12).collect();
    let partials: Vec<Complex64> = blocks
        .par_iter()
        .map(|&start| {
            let end = (start + (1 << 12)).min(grid);
            let mut acc = KahanComplex::new();
            for j in start..end {
                let v2 = eval(&c2, j);
                let v3 = eval(&c3, j);
                let v6 = eval(&c6, j);
                let vc = if c == 6 { v6 } else { eval(&cc, j) };
                let w = v2 * v2 * v3 * v3 * v6 * vc;
                acc.add(w * roots[(j * (n % grid) % grid) as usize].conj());
            }
            acc.value()
        })
        .collect();
    let mut total = KahanComplex::new();
    for p in partials {
        total.add(p);
    }
    Ok(total.value().re / grid as f64)
}

/// Assembled prediction for the weighted representation count:
/// `P5^theta * SingularSeries(n) * SingularIntegral(n)`.
#[derive(Clone, Debug)]
pub struct MainTermReport {
    pub n: u64,
    pub c: u32,
    pub singular_series: SingularSeriesValue,
    pub singular_integral: f64,
    pub p5_theta: f64,
    pub predicted: f64,
    /// Exact weighted count, when the caller has one.
    pub observed: Option<f64>,
    /// observed / predicted.
    pub ratio: Option<f64>,
    /// Set for even n, where the series (and the prediction) vanish.
    pub parity_warning: bool,
}

impl MainTermReport {
    pub fn with_observed(mut self, observed: f64) -> Self {
        self.observed = Some(observed);
        self.ratio = if self.predicted != 0.0 {
            Some(observed / self.predicted)
        } else {
            None
        };
        self
    }
}

/// Main-term prediction using pre-built local tables (the cheap path for
/// campaigns over many n).
pub fn main_term_with(tables: &LocalTables, n: u64) -> Result<MainTermReport> {
    let c = tables.c();
    let inst = ProblemInstance::new(n, c)?;
    let series = tables.series_for(n);
    let integral = singular_integral_conv(n, c)?;
    let p5_theta = inst.f5_hi();
    Ok(MainTermReport {
        n,
        c,
        singular_series: series,
        singular_integral: integral,
        p5_theta,
        predicted: p5_theta * series.value * integral,
        observed: None,
        ratio: None,
        parity_warning: n % 2 == 0,
    })
}

/// Main-term prediction with a fresh singular-series truncation at
/// `cutoff`.
pub fn main_term(n: u64, c: u32, cutoff: u64) -> Result<MainTermReport> {
    let tables = LocalTables::build(c, cutoff)?;
    main_term_with(&tables, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sum_below_feasibility() {
        for n in 2..=5u64 {
            assert_eq!(singular_integral_direct(n, 6).unwrap(), 0.0);
            assert_eq!(singular_integral_conv(n, 6).unwrap(), 0.0);
        }
    }

    #[test]
    fn slot_weights_are_pairwise_symmetric() {
        for c in [6u32, 7] {
            let cw = CompositionWeights::for_c(c);
            assert_eq!(cw.exponents[0], cw.exponents[1]);
            assert_eq!(cw.exponents[2], cw.exponents[3]);
            assert_eq!(cw.threshold_shifts[0], cw.threshold_shifts[1]);
            assert_eq!(cw.threshold_shifts[2], cw.threshold_shifts[3]);
        }
    }

    #[test]
    fn direct_equals_conv_at_small_n() {
        for c in [6u32, 7] {
            for n in [50u64, 128, 500, 743] {
                let d = singular_integral_direct(n, c).unwrap();
                let v = singular_integral_conv(n, c).unwrap();
                let scale = d.abs().max(1e-300);
                assert!(
                    (d - v).abs() / scale < 1e-9,
                    "n={n}, c={c}: direct {d} vs conv {v}"
                );
            }
        }
    }

    #[test]
    fn direct_refuses_large_n() {
        assert!(matches!(
            singular_integral_direct(3001, 6),
            Err(Error::Budget(_))
        ));
    }

    #[test]
    fn conv_positive_for_both_c() {
        for c in [6u32, 7] {
            let v = singular_integral_conv(1000, c).unwrap();
            assert!(v > 0.0, "c={c}: {v}");
        }
    }

    #[test]
    fn conv_direct_and_fft_convolutions_agree() {
        // same vectors through both internal convolution methods
        let a: Vec<f64> = (0..1500u64)
            .map(|i| if i > 700 { (i as f64).powf(-0.5) } else { 0.0 })
            .collect();
        let b: Vec<f64> = (0..1500u64)
            .map(|i| if i > 300 { (i as f64).powf(-2.0 / 3.0) } else { 0.0 })
            .collect();
        let direct = {
            let mut out = vec![0.0; 1400];
            for i in 0..a.len() {
                if a[i] == 0.0 {
                    continue;
                }
                for j in 0..b.len() {
                    if i + j >= 1400 {
                        break;
                    }
                    out[i + j] += a[i] * b[j];
                }
            }
            out
        };
        let fft = convolve_fft(&a, &b, 1399);
        for i in 0..1400 {
            assert!(
                (direct[i] - fft[i]).abs() < 1e-10 * direct[i].abs().max(1.0),
                "coeff {i}: {} vs {}",
                direct[i],
                fft[i]
            );
        }
    }

    #[test]
    fn quadrature_matches_composition_sum() {
        for c in [6u32, 7] {
            let inst = ProblemInstance::new(729, c).unwrap();
            let q = wc_quadrature(&inst, 16).unwrap();
            let s = singular_integral_direct(729, c).unwrap();
            assert!((q - s).abs() < 0.01 * s.abs(), "c={c}: quad {q} vs sum {s}");
        }
    }

    #[test]
    fn main_term_shape() {
        let even = main_term(2000, 6, 100).unwrap();
        assert!(even.parity_warning);
        assert_eq!(even.predicted, 0.0);

        let odd = main_term(2001, 6, 100).unwrap();
        assert!(!odd.parity_warning);
        assert!(odd.predicted > 0.0);
        let with_obs = odd.clone().with_observed(2.0 * odd.predicted);
        assert!((with_obs.ratio.unwrap() - 2.0).abs() < 1e-12);
    }
}
