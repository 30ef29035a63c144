//! Prime generation, weighted power tables, and multiplicative-function
//! scaffolding.
//!
//! Every exponential sum in this crate is a finite sum over a
//! [`WeightedPowerTable`]: the values `p^k` for primes `p` in a half-open
//! range `(lo, hi]`, each carrying the Chebyshev weight `log p`.

use crate::error::{Error, Result};

/// Ascending table of all primes up to a limit.
#[derive(Clone, Debug)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Membership test by binary search; valid for `x <= limit`.
    pub fn is_prime(&self, x: u64) -> bool {
        self.primes.binary_search(&x).is_ok()
    }

    /// Primes in the half-open range `(lo, hi]`.
    pub fn in_range(&self, lo: f64, hi: f64) -> &[u64] {
        let start = self.primes.partition_point(|&p| p as f64 <= lo);
        let end = self.primes.partition_point(|&p| p as f64 <= hi);
        &self.primes[start..end]
    }
}

/// Sieve of Eratosthenes up to `limit` inclusive.
///
/// A limit below 2 yields an empty table rather than an error.
pub fn sieve_primes(limit: u64) -> PrimeTable {
    if limit < 2 {
        return PrimeTable {
            limit,
            primes: Vec::new(),
        };
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::with_capacity(est_prime_count(limit));
    let mut p = 2usize;
    while p * p <= n {
        if !composite[p] {
            let mut m = p * p;
            while m <= n {
                composite[m] = true;
                m += p;
            }
        }
        p += 1;
    }
    for q in 2..=n {
        if !composite[q] {
            primes.push(q as u64);
        }
    }
    PrimeTable {
        limit,
        primes,
    }
}

fn est_prime_count(limit: u64) -> usize {
    if limit < 10 {
        return 8;
    }
    let x = limit as f64;
    (1.2 * x / x.ln()).ceil() as usize
}

/// Sorted values `p^k` with weight `log p`, for primes `lo < p <= hi`.
///
/// The range bounds are on `p` itself, not on `p^k`.
#[derive(Clone, Debug)]
pub struct WeightedPowerTable {
    k: u32,
    lo: f64,
    hi: f64,
    entries: Vec<(u64, f64)>,
}

impl WeightedPowerTable {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    /// Pairs `(p^k, log p)` ascending in `p^k`.
    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Sum of the weights, i.e. the value of the attached exponential sum
    /// at frequency zero.
    pub fn weight_sum(&self) -> f64 {
        let mut acc = crate::numeric::Kahan::new();
        for &(_, w) in &self.entries {
            acc.add(w);
        }
        acc.value()
    }

    /// The underlying primes, recovered as integer k-th roots.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        let k = self.k;
        self.entries.iter().map(move |&(v, _)| int_kth_root(v, k))
    }

    /// Replaces every weight by 1, turning weighted sums into plain
    /// counts.
    pub fn set_unit_weights(&mut self) {
        for e in &mut self.entries {
            e.1 = 1.0;
        }
    }
}

/// Builds the table of `(p^k, log p)` over primes `lo < p <= hi`.
pub fn power_table(k: u32, lo: f64, hi: f64, primes: &PrimeTable) -> Result<WeightedPowerTable> {
    if !(0.0 <= lo && lo < hi) {
        return Err(Error::Config(format!(
            "power table needs 0 <= lo < hi, got lo={lo}, hi={hi}"
        )));
    }
    if hi > primes.limit() as f64 {
        return Err(Error::Config(format!(
            "power table upper bound {hi} exceeds sieve limit {}",
            primes.limit()
        )));
    }
    let entries: Vec<(u64, f64)> = primes
        .in_range(lo, hi)
        .iter()
        .map(|&p| (checked_pow(p, k), (p as f64).ln()))
        .collect();
    Ok(WeightedPowerTable {
        k,
        lo,
        hi,
        entries,
    })
}

fn checked_pow(p: u64, k: u32) -> u64 {
    p.checked_pow(k).expect("prime power overflows u64")
}

/// Largest integer r with r^k <= v, by float guess plus correction.
fn int_kth_root(v: u64, k: u32) -> u64 {
    let mut r = (v as f64).powf(1.0 / k as f64).round() as u64;
    while r.checked_pow(k).map_or(true, |rk| rk > v) {
        r -= 1;
    }
    while (r + 1).checked_pow(k).map_or(false, |rk| rk <= v) {
        r += 1;
    }
    r
}

/// Prime factorization of a positive integer with derived totient and
/// squarefree flag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    q: u64,
    factors: Vec<(u64, u32)>,
    phi: u64,
    squarefree: bool,
}

impl Factorization {
    pub fn q(&self) -> u64 {
        self.q
    }

    /// `(prime, exponent)` pairs, ascending in the prime.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn phi(&self) -> u64 {
        self.phi
    }

    pub fn squarefree(&self) -> bool {
        self.squarefree
    }
}

/// Trial-division factorization. Intended for moduli up to ~1e12;
/// the arc and singular-series machinery stays below 1e6.
pub fn factorize(q: u64) -> Factorization {
    assert!(q >= 1, "factorize requires q >= 1");
    let mut rest = q;
    let mut factors = Vec::new();
    let mut phi = 1u64;
    let mut squarefree = true;
    let mut d = 2u64;
    while d * d <= rest {
        if rest % d == 0 {
            let mut e = 0u32;
            while rest % d == 0 {
                rest /= d;
                e += 1;
            }
            if e > 1 {
                squarefree = false;
            }
            phi *= (d - 1) * d.pow(e - 1);
            factors.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        phi *= rest - 1;
        factors.push((rest, 1));
    }
    Factorization {
        q,
        factors,
        phi,
        squarefree,
    }
}

/// Euler totient via [`factorize`].
pub fn phi(q: u64) -> u64 {
    factorize(q).phi()
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `base^exp mod m` for `m` up to 2^63.
pub fn pow_mod(base: u64, exp: u32, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut result = 1u128;
    let mut b = (base % m) as u128;
    let mut e = exp;
    let m128 = m as u128;
    while e > 0 {
        if e & 1 == 1 {
            result = result * b % m128;
        }
        b = b * b % m128;
        e >>= 1;
    }
    result as u64
}
