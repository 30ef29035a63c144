//! Shared independent oracles for the integration suites.

use wglab::arith::sieve_primes;
use wglab::count::CountMode;
use wglab::expsum::{ProblemInstance, SumKind};

/// Plain 7-deep nested enumeration of ordered prime solutions, with the
/// same slot ranges the library uses. Returns (weighted, unweighted).
pub fn brute_force_nu(n: u64, c: u32, mode: CountMode) -> (f64, u64) {
    let inst = ProblemInstance::new(n.max(2), c).unwrap();
    let kinds = [
        SumKind::F2,
        SumKind::F2,
        SumKind::F3,
        SumKind::F3,
        SumKind::F5,
        SumKind::F6,
        SumKind::Fc,
    ];
    let ranges: Vec<(u32, f64, f64)> = kinds
        .iter()
        .map(|&kind| {
            let k = kind.exponent(&inst);
            match mode {
                CountMode::Restricted => {
                    let (lo, hi) = kind.range(&inst);
                    (k, lo, hi)
                }
                CountMode::Unrestricted => (k, 1.0, inst.p_k(k)),
            }
        })
        .collect();
    let hi_max = ranges.iter().map(|r| r.2).fold(0.0f64, f64::max);
    let primes = sieve_primes(hi_max.ceil() as u64 + 1);
    let slots: Vec<Vec<(u64, f64)>> = ranges
        .iter()
        .map(|&(k, lo, hi)| {
            primes
                .in_range(lo, hi)
                .iter()
                .map(|&p| (p.pow(k), (p as f64).ln()))
                .collect()
        })
        .collect();
    let mut unweighted = 0u64;
    let mut weighted = 0.0f64;
    for &(v1, w1) in &slots[0] {
        for &(v2, w2) in &slots[1] {
            for &(v3, w3) in &slots[2] {
                for &(v4, w4) in &slots[3] {
                    for &(v5, w5) in &slots[4] {
                        for &(v6, w6) in &slots[5] {
                            for &(v7, w7) in &slots[6] {
                                if v1 + v2 + v3 + v4 + v5 + v6 + v7 == n {
                                    unweighted += 1;
                                    weighted += w1 * w2 * w3 * w4 * w5 * w6 * w7;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    (weighted, unweighted)
}

/// Substitutes a witness tuple back into the form.
pub fn witness_value(w: &[u64; 7], c: u32) -> u64 {
    let exps = [2u32, 2, 3, 3, 5, 6, c];
    w.iter().zip(exps).map(|(&x, k)| x.pow(k)).sum()
}
