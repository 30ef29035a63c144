//! Exact Diophantine counting.
//!
//! [`nu_exact`] counts ordered prime solutions of
//! `n = x1^2 + x2^2 + x3^3 + x4^3 + x5^5 + x6^6 + x7^c` by a 3+4
//! meet-in-the-middle join: the sums `x1^2 + x2^2 + x3^3` land in a hash
//! map with accumulated log-weights, then the scan over
//! `x4^3 + x5^5 + x6^6 + x7^c` probes the complement. Both the weighted
//! and the plain count come out of one pass; a witness is recovered on
//! demand by a second early-exit scan.
//!
//! The remaining counters ([`count_tc`], [`count_nc`], [`count_j3eq`],
//! [`count_j2eq`]) are exact integer-variable counts for the mean-value
//! equations, built from value histograms and divisor-pair matching, with
//! [`fit_slope`] extracting empirical growth exponents from a series of
//! scales.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::arith::{power_table, sieve_primes, WeightedPowerTable};
use crate::error::{Error, Result};
use crate::expsum::{ProblemInstance, SumKind};
use crate::numeric::Kahan;

/// Enumeration budget for [`nu_exact`].
pub const NU_MAX_N: u64 = 1_000_000_000;
/// Cap on resident hash-map entries before the left enumeration is
/// sharded over ranges of the first variable.
const LEFT_MAP_CAP: usize = 1 << 26;

/// Variable ranges for the representation count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMode {
    /// The dyadic ranges of the generating product: `(P_k/2, P_k]` per
    /// slot, `(1, P5^theta]` for the fifth power.
    Restricted,
    /// All primes with `p^k <= n` in every slot.
    Unrestricted,
}

/// Exact representation count, log-weighted and plain.
#[derive(Clone, Debug)]
pub struct RepCount {
    pub n: u64,
    pub c: u32,
    pub mode: CountMode,
    /// Sum of `log x1 ... log x7` over ordered solutions.
    pub weighted: f64,
    /// Number of ordered solutions.
    pub unweighted: u64,
    /// One solution, when any exists and recovery was requested.
    pub witness: Option<[u64; 7]>,
    /// Slots whose prime range is empty (forces a zero count).
    pub empty_slots: Vec<&'static str>,
}

const SLOT_NAMES: [&str; 7] = ["x1", "x2", "x3", "x4", "x5", "x6", "x7"];

/// Per-slot (exponent, lo, hi) with bounds on the prime itself.
fn slot_ranges(inst: &ProblemInstance, mode: CountMode) -> [(u32, f64, f64); 7] {
    let kinds = [
        SumKind::F2,
        SumKind::F2,
        SumKind::F3,
        SumKind::F3,
        SumKind::F5,
        SumKind::F6,
        SumKind::Fc,
    ];
    kinds.map(|kind| {
        let k = kind.exponent(inst);
        match mode {
            CountMode::Restricted => {
                let (lo, hi) = kind.range(inst);
                (k, lo, hi)
            }
            CountMode::Unrestricted => (k, 1.0, inst.p_k(k)),
        }
    })
}

/// Exact ordered-solution count by meet-in-the-middle.
pub fn nu_exact(n: u64, c: u32, mode: CountMode) -> Result<RepCount> {
    nu_exact_opt(n, c, mode, true)
}

/// As [`nu_exact`], optionally skipping witness recovery.
pub fn nu_exact_opt(n: u64, c: u32, mode: CountMode, want_witness: bool) -> Result<RepCount> {
    if n > NU_MAX_N {
        return Err(Error::Budget(format!(
            "representation counting is budgeted to n <= {NU_MAX_N}, got {n}"
        )));
    }
    let inst = ProblemInstance::new(n.max(2), c)?;
    let ranges = slot_ranges(&inst, mode);
    let sieve_to = ranges
        .iter()
        .map(|&(_, _, hi)| hi)
        .fold(0.0f64, f64::max)
        .ceil() as u64
        + 1;
    let primes = sieve_primes(sieve_to);
    let mut tables = Vec::with_capacity(7);
    let mut empty_slots = Vec::new();
    for (i, &(k, lo, hi)) in ranges.iter().enumerate() {
        if lo >= hi {
            empty_slots.push(SLOT_NAMES[i]);
            continue;
        }
        let t = power_table(k, lo, hi, &primes)?;
        if t.is_empty() {
            empty_slots.push(SLOT_NAMES[i]);
        }
        tables.push(t);
    }
    if !empty_slots.is_empty() {
        return Ok(RepCount {
            n,
            c,
            mode,
            weighted: 0.0,
            unweighted: 0,
            witness: None,
            empty_slots,
        });
    }
    let (left, right) = tables.split_at(3);

    let min_right: u64 = right.iter().map(|t| t.entries()[0].0).sum();
    if min_right > n {
        return Ok(RepCount {
            n,
            c,
            mode,
            weighted: 0.0,
            unweighted: 0,
            witness: None,
            empty_slots,
        });
    }
    let left_budget = n - min_right;

    // shard the first variable so the resident map stays bounded
    let per_x1 = left[1].len() * left[2].len();
    let x1_per_shard = (LEFT_MAP_CAP / per_x1.max(1)).max(1);
    let mut weighted = Kahan::new();
    let mut unweighted = 0u64;
    let mut witness = None;

    let mut shard_start = 0usize;
    while shard_start < left[0].len() {
        let shard_end = (shard_start + x1_per_shard).min(left[0].len());
        let map = build_left_map(left, shard_start..shard_end, left_budget);
        let (w, u) = scan_right(right, &map, n, min_left(left, shard_start));
        weighted.add(w);
        unweighted += u;
        if want_witness && witness.is_none() && u > 0 {
            witness = recover_witness(left, right, &map, n, shard_start..shard_end);
        }
        shard_start = shard_end;
    }

    Ok(RepCount {
        n,
        c,
        mode,
        weighted: weighted.value(),
        unweighted,
        witness,
        empty_slots,
    })
}

fn min_left(left: &[WeightedPowerTable], shard_start: usize) -> u64 {
    left[0].entries()[shard_start].0 + left[1].entries()[0].0 + left[2].entries()[0].0
}

/// Map from `x1^2 + x2^2 + x3^3` to (accumulated weight, count) over a
/// shard of x1 indices.
fn build_left_map(
    left: &[WeightedPowerTable],
    x1_range: std::ops::Range<usize>,
    budget: u64,
) -> HashMap<u64, (f64, u64)> {
    let mut map: HashMap<u64, (f64, u64)> = HashMap::new();
    for &(v1, w1) in &left[0].entries()[x1_range] {
        if v1 > budget {
            break;
        }
        for &(v2, w2) in left[1].entries() {
            let v12 = v1 + v2;
            if v12 > budget {
                break;
            }
            for &(v3, w3) in left[2].entries() {
                let v = v12 + v3;
                if v > budget {
                    break;
                }
                let e = map.entry(v).or_insert((0.0, 0));
                e.0 += w1 * w2 * w3;
                e.1 += 1;
            }
        }
    }
    map
}

/// Scans `x4^3 + x5^5 + x6^6 + x7^c` and probes the complement in the
/// left map. Parallel over x4 with a fold in index order, so the weighted
/// sum is identical for any worker count.
fn scan_right(
    right: &[WeightedPowerTable],
    map: &HashMap<u64, (f64, u64)>,
    n: u64,
    min_left_sum: u64,
) -> (f64, u64) {
    let budget = n - min_left_sum.min(n);
    let partials: Vec<(f64, u64)> = right[0]
        .entries()
        .par_iter()
        .map(|&(v4, w4)| {
            let mut w_acc = Kahan::new();
            let mut u_acc = 0u64;
            if v4 > budget {
                return (0.0, 0);
            }
            for &(v5, w5) in right[1].entries() {
                let v45 = v4 + v5;
                if v45 > budget {
                    break;
                }
                for &(v6, w6) in right[2].entries() {
                    let v456 = v45 + v6;
                    if v456 > budget {
                        break;
                    }
                    for &(v7, w7) in right[3].entries() {
                        let v = v456 + v7;
                        if v > budget {
                            break;
                        }
                        if let Some(&(lw, lc)) = map.get(&(n - v)) {
                            w_acc.add(lw * w4 * w5 * w6 * w7);
                            u_acc += lc;
                        }
                    }
                }
            }
            (w_acc.value(), u_acc)
        })
        .collect();
    let mut w = Kahan::new();
    let mut u = 0u64;
    for (pw, pu) in partials {
        w.add(pw);
        u += pu;
    }
    (w.value(), u)
}

/// Finds one solution by re-scanning in deterministic ascending order.
fn recover_witness(
    left: &[WeightedPowerTable],
    right: &[WeightedPowerTable],
    map: &HashMap<u64, (f64, u64)>,
    n: u64,
    x1_range: std::ops::Range<usize>,
) -> Option<[u64; 7]> {
    let root = |t: &WeightedPowerTable, v: u64| -> u64 {
        t.entries()
            .iter()
            .position(|&(val, _)| val == v)
            .map(|i| t.primes().nth(i).unwrap())
            .unwrap()
    };
    for &(v4, _) in right[0].entries() {
        for &(v5, _) in right[1].entries() {
            for &(v6, _) in right[2].entries() {
                for &(v7, _) in right[3].entries() {
                    let v = v4 + v5 + v6 + v7;
                    if v > n {
                        break;
                    }
                    let target = n - v;
                    if !map.contains_key(&target) {
                        continue;
                    }
                    // expand the left triple
                    for &(v1, _) in &left[0].entries()[x1_range.clone()] {
                        if v1 > target {
                            break;
                        }
                        for &(v2, _) in left[1].entries() {
                            let v12 = v1 + v2;
                            if v12 > target {
                                break;
                            }
                            for &(v3, _) in left[2].entries() {
                                if v12 + v3 == target {
                                    return Some([
                                        root(&left[0], v1),
                                        root(&left[1], v2),
                                        root(&left[2], v3),
                                        root(&right[0], v4),
                                        root(&right[1], v5),
                                        root(&right[2], v6),
                                        root(&right[3], v7),
                                    ]);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Mean-value equation counters
// ---------------------------------------------------------------------------

/// Budget caps for the histogram counters.
const TC_MAX_Z: u64 = 1500;
const TC_MAX_Y: u64 = 5000;
const NC_MAX_X: u64 = 2000;
/// Budget for [`count_j2eq`].
pub const J2_MAX_N: u64 = 10_000_000;
const J3_MAX_P2: f64 = 2000.0;
const J3_MAX_P3: f64 = 100.0;

fn int_hi(x: f64) -> u64 {
    (x + 1e-9).floor() as u64
}

fn int_lo_exclusive(x: f64) -> u64 {
    int_hi(x) + 1
}

/// Histogram of `z1^5 + z2^5` over ordered pairs in `[1, z_hi]^2`.
fn fifth_power_pair_histogram(z_hi: u64) -> HashMap<u64, u64> {
    let mut r: HashMap<u64, u64> = HashMap::new();
    for z1 in 1..=z_hi {
        for z2 in 1..=z_hi {
            *r.entry(z1.pow(5) + z2.pow(5)).or_insert(0) += 1;
        }
    }
    r
}

/// Histogram of `y1^c - y2^c` over ordered pairs in the dyadic range.
fn power_difference_histogram(y_lo: u64, y_hi: u64, c: u32) -> HashMap<i64, u64> {
    let mut d: HashMap<i64, u64> = HashMap::new();
    for y1 in y_lo..=y_hi {
        for y2 in y_lo..=y_hi {
            *d.entry(y1.pow(c) as i64 - y2.pow(c) as i64).or_insert(0) += 1;
        }
    }
    d
}

fn tc_ranges(p_c: f64, theta: f64, c: u32) -> Result<(u64, u64, u64)> {
    let y_lo = int_lo_exclusive(p_c / 2.0);
    let y_hi = int_hi(p_c);
    // z <= P5^theta with P5 = (P_c^c)^{1/5}
    let z_hi = int_hi(p_c.powf(c as f64 * theta / 5.0));
    if z_hi > TC_MAX_Z || y_hi.saturating_sub(y_lo) > TC_MAX_Y {
        return Err(Error::Budget(format!(
            "histogram counter budget exceeded: y range ({y_lo}, {y_hi}], z <= {z_hi}"
        )));
    }
    Ok((y_lo, y_hi, z_hi))
}

/// Exact count of integer solutions of
/// `y1^c - y2^c = z1^5 + z2^5 - z3^5 - z4^5`
/// with `P_c/2 < y_i <= P_c` and `1 <= z_j <= P_c^{c theta / 5}`.
pub fn count_tc(p_c: f64, theta: f64, c: u32) -> Result<u64> {
    let (y_lo, y_hi, z_hi) = tc_ranges(p_c, theta, c)?;
    if y_lo > y_hi || z_hi == 0 {
        return Ok(0);
    }
    let r = fifth_power_pair_histogram(z_hi);
    let d = power_difference_histogram(y_lo, y_hi, c);
    // T = Sum_d D(d) * Sum_m R(m) R(m - d)
    let mut total = 0u64;
    for (&diff, &dcount) in &d {
        let mut auto = 0u64;
        for (&m, &cnt) in &r {
            let want = m as i64 - diff;
            if want < 0 {
                continue;
            }
            if let Some(&c2) = r.get(&(want as u64)) {
                auto += cnt * c2;
            }
        }
        total += dcount * auto;
    }
    Ok(total)
}

/// Ordered pairs `(x1, x2)` in `[x_lo, x_hi]` with `x1^2 - x2^2 = v`,
/// tabulated for all `0 <= v <= window` by divisor-pair matching:
/// `v = d1 d2` with `d1 = x1 - x2`, `d2 = x1 + x2` of equal parity.
/// Index 0 holds the diagonal count (x1 = x2 forced).
fn square_difference_table(x_lo: u64, x_hi: u64, window: u64) -> Vec<u64> {
    let mut table = vec![0u64; (window + 1) as usize];
    if x_lo > x_hi {
        return table;
    }
    table[0] = x_hi - x_lo + 1;
    let mut d1 = 1u64;
    while d1 * d1 <= window {
        // equal parity and d2 > d1 keep x2 a positive integer
        let mut d2 = d1 + 2;
        while d1 * d2 <= window {
            let x1 = (d1 + d2) / 2;
            let x2 = (d2 - d1) / 2;
            if x1 >= x_lo && x1 <= x_hi && x2 >= x_lo && x2 <= x_hi {
                table[(d1 * d2) as usize] += 1;
            }
            d2 += 2;
        }
        d1 += 1;
    }
    table
}

/// Exact count of integer solutions of
/// `x1^2 - x2^2 = y1^c - y2^c + z1^5 + z2^5 - z3^5 - z4^5`
/// with `P_2/2 < x_i <= P_2` and the [`count_tc`] ranges for y, z.
pub fn count_nc(p2: f64, p_c: f64, theta: f64, c: u32) -> Result<u64> {
    let (y_lo, y_hi, z_hi) = tc_ranges(p_c, theta, c)?;
    let x_lo = int_lo_exclusive(p2 / 2.0);
    let x_hi = int_hi(p2);
    if x_hi.saturating_sub(x_lo) > NC_MAX_X {
        return Err(Error::Budget(format!(
            "x range ({x_lo}, {x_hi}] exceeds budget {NC_MAX_X}"
        )));
    }
    if y_lo > y_hi || z_hi == 0 || x_lo > x_hi {
        return Ok(0);
    }
    let r = fifth_power_pair_histogram(z_hi);
    let mut d: Vec<(i64, u64)> = power_difference_histogram(y_lo, y_hi, c)
        .into_iter()
        .collect();
    d.sort_unstable();
    let window = x_hi * x_hi - x_lo * x_lo;
    let xtab = square_difference_table(x_lo, x_hi, window);

    // N = Sum over z-quadruples and y-pairs of X(v), v the right side;
    // iterate z-pair differences and pick the few y-differences that land
    // the total inside the achievable window of x1^2 - x2^2.
    let mut total = 0u64;
    let ds: &[(i64, u64)] = &d;
    for (&m, &cnt) in &r {
        for (&m2, &cnt2) in &r {
            let w = m as i64 - m2 as i64;
            // need |d + w| <= window
            let lo = -w - window as i64;
            let hi = -w + window as i64;
            let start = ds.partition_point(|&(dv, _)| dv < lo);
            for &(dv, dcnt) in &ds[start..] {
                if dv > hi {
                    break;
                }
                let v = (dv + w).unsigned_abs();
                total += cnt * cnt2 * dcnt * xtab[v as usize];
            }
        }
    }
    Ok(total)
}

/// Exact count of integer solutions of
/// `x1^2 - x2^2 = h1^3 + h2^3 - h3^3 - h4^3` with `1 <= x_i <= P_2`,
/// `1 <= h_j <= P_3`.
pub fn count_j3eq(p2: f64, p3: f64) -> Result<u64> {
    if p2 > J3_MAX_P2 || p3 > J3_MAX_P3 {
        return Err(Error::Budget(format!(
            "ranges P2={p2}, P3={p3} exceed budget ({J3_MAX_P2}, {J3_MAX_P3})"
        )));
    }
    let x_hi = int_hi(p2);
    let h_hi = int_hi(p3);
    if x_hi == 0 || h_hi == 0 {
        return Ok(0);
    }
    let mut cubes: HashMap<u64, u64> = HashMap::new();
    for h1 in 1..=h_hi {
        for h2 in 1..=h_hi {
            *cubes.entry(h1.pow(3) + h2.pow(3)).or_insert(0) += 1;
        }
    }
    let window = x_hi * x_hi - 1;
    let xtab = square_difference_table(1, x_hi, window);
    let support: Vec<(u64, u64)> = {
        let mut v: Vec<(u64, u64)> = cubes.into_iter().collect();
        v.sort_unstable();
        v
    };
    let mut total = 0u64;
    for (i, &(m, cnt)) in support.iter().enumerate() {
        // diagonal m' = m
        total += cnt * cnt * xtab[0];
        // m' > m within the window, doubled for the two orientations
        for &(m2, cnt2) in &support[i + 1..] {
            let w = m2 - m;
            if w > window {
                break;
            }
            total += 2 * cnt * cnt2 * xtab[w as usize];
        }
    }
    Ok(total)
}

/// Exact count of integer solutions of
/// `x1^2 + y1^3 + z1^6 = x2^2 + y2^3 + z2^6` over the dyadic ranges
/// `(P_k/2, P_k]` with `P_k = n^{1/k}`.
pub fn count_j2eq(n: u64) -> Result<u64> {
    if n > J2_MAX_N {
        return Err(Error::Budget(format!(
            "budgeted to n <= {J2_MAX_N}, got {n}"
        )));
    }
    let nf = n as f64;
    let x_lo = int_lo_exclusive(nf.sqrt() / 2.0);
    let x_hi = int_hi(nf.sqrt());
    let y_lo = int_lo_exclusive(nf.cbrt() / 2.0);
    let y_hi = int_hi(nf.cbrt());
    let z_lo = int_lo_exclusive(nf.powf(1.0 / 6.0) / 2.0);
    let z_hi = int_hi(nf.powf(1.0 / 6.0));
    if x_lo > x_hi || y_lo > y_hi || z_lo > z_hi {
        return Ok(0);
    }
    let max_sum = (x_hi * x_hi + y_hi.pow(3) + z_hi.pow(6)) as usize;
    let mut hist = vec![0u32; max_sum + 1];
    for x in x_lo..=x_hi {
        for y in y_lo..=y_hi {
            for z in z_lo..=z_hi {
                hist[(x * x + y.pow(3) + z.pow(6)) as usize] += 1;
            }
        }
    }
    Ok(hist.iter().map(|&h| (h as u64) * (h as u64)).sum())
}

// ---------------------------------------------------------------------------
// Growth-series slope fitting
// ---------------------------------------------------------------------------

/// A series of (scale, exact count) pairs for empirical growth reading.
#[derive(Clone, Debug, Default)]
pub struct GrowthSeries {
    pub points: Vec<(f64, u64)>,
}

impl GrowthSeries {
    pub fn push(&mut self, scale: f64, count: u64) {
        self.points.push((scale, count));
    }
}

/// Least-squares slope of log(count) against log(scale).
#[derive(Clone, Copy, Debug)]
pub struct SlopeFit {
    pub slope: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
}

/// Fits the log-log slope of a growth series.
pub fn fit_slope(series: &GrowthSeries) -> Result<SlopeFit> {
    if series.points.len() < 3 {
        return Err(Error::Degenerate(format!(
            "slope fit needs at least 3 points, got {}",
            series.points.len()
        )));
    }
    if series.points.iter().any(|&(s, c)| s <= 0.0 || c == 0) {
        return Err(Error::Degenerate(
            "slope fit needs positive scales and nonzero counts".into(),
        ));
    }
    let pts: Vec<(f64, f64)> = series
        .points
        .iter()
        .map(|&(s, c)| (s.ln(), (c as f64).ln()))
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return Err(Error::Degenerate("scales are collinear in log space".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let ss: f64 = pts
        .iter()
        .map(|&(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    Ok(SlopeFit {
        slope,
        residual: (ss / n).sqrt(),
    })
}
