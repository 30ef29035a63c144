//! Local (p-adic) densities: solution counts in prime fields, the
//! multiplicative coefficients `A(q)` built from complete Gauss-type sums,
//! and the truncated singular series.
//!
//! Two independent routes exist for the prime-level factor:
//!
//! * the residue-histogram route: count solutions of the congruence in
//!   `F_p` with all variables nonzero by convolving the seven power-residue
//!   histograms, then apply `factor = p (p-1)^{-7} M`;
//! * the definition route: `A(p) = Sum_a U(p,a) e(-an/p)` over reduced
//!   residues, with `U` the product of Gauss sums, then
//!   `factor = 1 + (p-1)^{-7} A(p)`.
//!
//! The histogram route is the fast path (exact integer convolution for
//! small p, DFT of the same histograms above [`EXACT_CONV_MAX_P`]); the
//! definition route is kept as the test oracle. [`LocalTables::build`]
//! cross-checks the two for every prime up to 100.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::arith::{gcd, pow_mod, sieve_primes};
use crate::error::{Error, Result};
use crate::expsum::{gauss_sum, unit_roots, FareyPoint};
use crate::numeric::KahanComplex;

/// Exponent multiset of the underlying form: two squares, two cubes, one
/// fifth, one sixth, one c-th power.
fn exponents(c: u32) -> [u32; 7] {
    [2, 2, 3, 3, 5, 6, c]
}

/// Largest p handled by exact 128-bit histogram convolution inside
/// [`LocalTables`]; larger primes go through the DFT of the same
/// histograms. Counts stay below (p-1)^7 < 2^128 up to the enumeration
/// budget [`MNC_MAX_P`].
pub const EXACT_CONV_MAX_P: u64 = 256;

/// Enumeration budget for exact solution counts mod p.
pub const MNC_MAX_P: u64 = 10_000;

fn check_prime(p: u64) -> Result<()> {
    if p < 2 {
        return Err(Error::Contract(format!("{p} is not prime")));
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return Err(Error::Contract(format!("{p} is not prime")));
        }
        d += 1;
    }
    Ok(())
}

/// Histogram of `x^k mod p` over nonzero `x`.
fn residue_histogram(p: u64, k: u32) -> Vec<u64> {
    let mut h = vec![0u64; p as usize];
    for x in 1..p {
        h[pow_mod(x, k, p) as usize] += 1;
    }
    h
}

/// Counts solutions of the form congruence mod `p` for every residue at
/// once: index `r` holds the number of 7-tuples over nonzero residues with
/// value `r`. Exact integer arithmetic; cost is six O(p^2) convolutions.
pub fn mnc_distribution(p: u64, c: u32) -> Result<Vec<u128>> {
    check_prime(p)?;
    if p > MNC_MAX_P {
        return Err(Error::Budget(format!(
            "exact solution counting is budgeted to p <= {MNC_MAX_P}, got {p}"
        )));
    }
    let exps = exponents(c);
    let mut acc: Vec<u128> = residue_histogram(p, exps[0])
        .into_iter()
        .map(u128::from)
        .collect();
    for &k in &exps[1..] {
        acc = cyclic_convolve(&acc, &residue_histogram(p, k));
    }
    Ok(acc)
}

fn cyclic_convolve(a: &[u128], b: &[u64]) -> Vec<u128> {
    let p = a.len();
    let mut out = vec![0u128; p];
    for (s, &av) in a.iter().enumerate() {
        if av == 0 {
            continue;
        }
        for (t, &bv) in b.iter().enumerate() {
            if bv == 0 {
                continue;
            }
            let mut idx = s + t;
            if idx >= p {
                idx -= p;
            }
            out[idx] += av * bv as u128;
        }
    }
    out
}

/// Number of solutions of the congruence in `F_p` with all variables
/// nonzero and value `n_mod_p`.
pub fn count_mnc(p: u64, n_mod_p: u64, c: u32) -> Result<u128> {
    let dist = mnc_distribution(p, c)?;
    Ok(dist[(n_mod_p % p) as usize])
}

/// Product of Gauss sums `S_2^2 S_3^2 S_5 S_6 S_c` at a reduced rational.
pub fn u_c(fp: &FareyPoint, c: u32) -> Complex64 {
    let s2 = gauss_sum(2, fp);
    let s3 = gauss_sum(3, fp);
    let s5 = gauss_sum(5, fp);
    let s6 = gauss_sum(6, fp);
    let sc = if c == 6 { s6 } else { gauss_sum(c, fp) };
    s2 * s2 * s3 * s3 * s5 * s6 * sc
}

/// The Gauss-sum products `U(q, a)` for every reduced residue `a`, cached
/// so that `A(q, n)` can be evaluated for many `n` without recomputing the
/// complete sums (they do not depend on n).
pub struct GaussProducts {
    q: u64,
    /// `(a, U(q, a))` over reduced residues a.
    products: Vec<(u64, Complex64)>,
}

impl GaussProducts {
    pub fn new(q: u64, c: u32) -> Self {
        if q == 1 {
            return Self {
                q,
                products: vec![(1, Complex64::new(1.0, 0.0))],
            };
        }
        let roots = unit_roots(q);
        // x^k mod q over reduced residues, one vector per distinct exponent
        let coprime: Vec<u64> = (1..=q).filter(|&x| gcd(x, q) == 1).collect();
        let mut ks: Vec<u32> = vec![2, 3, 5, 6, c];
        ks.dedup();
        let powers: Vec<(u32, Vec<u64>)> = ks
            .iter()
            .map(|&k| (k, coprime.iter().map(|&x| pow_mod(x, k, q)).collect()))
            .collect();
        let gauss = |k: u32, a: u64| -> Complex64 {
            let xs = &powers.iter().find(|&&(kk, _)| kk == k).unwrap().1;
            let mut acc = KahanComplex::new();
            for &xk in xs {
                acc.add(roots[(a as u128 * xk as u128 % q as u128) as usize]);
            }
            acc.value()
        };
        let products = coprime
            .iter()
            .map(|&a| {
                let s2 = gauss(2, a);
                let s3 = gauss(3, a);
                let s5 = gauss(5, a);
                let s6 = gauss(6, a);
                let sc = if c == 6 { s6 } else { gauss(c, a) };
                (a, s2 * s2 * s3 * s3 * s5 * s6 * sc)
            })
            .collect();
        Self { q, products }
    }

    /// `A(q, n) = Sum_a U(q, a) e(-a n / q)`, the definition route.
    ///
    /// The value is real (terms pair off conjugately); the imaginary part
    /// must be rounding noise relative to the total mass and is asserted
    /// to be so.
    pub fn a_for(&self, n: u64) -> f64 {
        if self.q == 1 {
            return 1.0;
        }
        let roots = unit_roots(self.q);
        let mut acc = KahanComplex::new();
        let mut total_abs = 0.0;
        for &(a, u) in &self.products {
            let r = (a as u128 * (n % self.q) as u128 % self.q as u128) as usize;
            acc.add(u * roots[r].conj());
            total_abs += u.norm();
        }
        let val = acc.value();
        assert!(
            val.im.abs() <= 1e-9 * (1.0 + total_abs),
            "A({}, {n}) has non-negligible imaginary part {} (mass {total_abs})",
            self.q,
            val.im
        );
        val.re
    }
}

/// One-off evaluation of `A(q, n)` by the definition route.
pub fn a_nc(q: u64, n: u64, c: u32) -> f64 {
    GaussProducts::new(q, c).a_for(n)
}

/// Local data at a prime: exact solution count, the coefficient `A(p)`,
/// and the Euler factor.
#[derive(Clone, Copy, Debug)]
pub struct LocalFactor {
    pub p: u64,
    /// Solutions of the congruence with nonzero variables.
    pub m_count: u128,
    /// `A(p) = p M - (p-1)^7`, exact in integers.
    pub a_value: f64,
    /// `1 + (p-1)^{-7} A(p) = p (p-1)^{-7} M`.
    pub factor: f64,
}

/// Exact local factor at `p` for the residue of `n`.
pub fn local_factor(p: u64, n: u64, c: u32) -> Result<LocalFactor> {
    let m = count_mnc(p, n % p, c)?;
    let pm1_pow7 = (p as i128 - 1).pow(7);
    let a = p as i128 * m as i128 - pm1_pow7;
    Ok(LocalFactor {
        p,
        m_count: m,
        a_value: a as f64,
        factor: 1.0 + a as f64 / pm1_pow7 as f64,
    })
}

/// Euler factors for every residue class at once, by DFT of the residue
/// histograms. Error relative to the factor is a few hundred epsilon,
/// independent of p, because the inverse transform error enters scaled by
/// `(p-1)^{-7}`.
fn factor_distribution_fft(p: u64, c: u32) -> Vec<f64> {
    let np = p as usize;
    let mut planner = FftPlanner::<f64>::new();
    let inv = planner.plan_fft_inverse(np);
    let fwd = planner.plan_fft_forward(np);

    let mut ks: Vec<u32> = vec![2, 3, 5, 6, c];
    ks.dedup();
    let mut transforms: Vec<(u32, Vec<Complex64>)> = Vec::with_capacity(ks.len());
    for &k in &ks {
        let mut buf: Vec<Complex64> = residue_histogram(p, k)
            .into_iter()
            .map(|h| Complex64::new(h as f64, 0.0))
            .collect();
        inv.process(&mut buf);
        transforms.push((k, buf));
    }
    let tk = |k: u32| -> &[Complex64] {
        &transforms.iter().find(|&&(kk, _)| kk == k).unwrap().1
    };
    let (t2, t3, t5, t6) = (tk(2), tk(3), tk(5), tk(6));
    let tc = tk(if c == 6 { 6 } else { c });
    let mut prod: Vec<Complex64> = (0..np)
        .map(|a| t2[a] * t2[a] * t3[a] * t3[a] * t5[a] * t6[a] * tc[a])
        .collect();
    // a = 0 contributes (p-1)^7, the main term already accounted for in
    // the "1 +" below; A(p) sums over a = 1..p-1 only.
    prod[0] = Complex64::new(0.0, 0.0);
    fwd.process(&mut prod);

    let pm1_pow7 = (p as f64 - 1.0).powi(7);
    prod.iter().map(|a| 1.0 + a.re / pm1_pow7).collect()
}

fn factor_distribution_exact(p: u64, c: u32) -> Result<Vec<f64>> {
    let dist = mnc_distribution(p, c)?;
    let pm1_pow7 = (p as i128 - 1).pow(7);
    Ok(dist
        .iter()
        .map(|&m| {
            let a = p as i128 * m as i128 - pm1_pow7;
            1.0 + a as f64 / pm1_pow7 as f64
        })
        .collect())
}

/// Truncated singular series value.
#[derive(Clone, Copy, Debug)]
pub struct SingularSeriesValue {
    /// Product of the Euler factors over p <= cutoff.
    pub value: f64,
    pub cutoff: u64,
    /// Heuristic tail estimate: the largest |factor - 1| seen in the last
    /// decade of primes, times a prime-count proxy `cutoff / log cutoff`
    /// for the next doubling. Not a proven bound.
    pub tail_bound: f64,
}

/// Euler factors of every prime up to a cutoff, tabulated per residue
/// class so that the series can be evaluated for many n cheaply.
pub struct LocalTables {
    c: u32,
    cutoff: u64,
    primes: Vec<u64>,
    factors: Vec<Vec<f64>>,
}

impl LocalTables {
    /// Tabulates all Euler factors for `p <= cutoff`.
    ///
    /// Primes up to [`EXACT_CONV_MAX_P`] use the exact integer
    /// convolution; the rest the DFT route. For every p <= 100 the result
    /// is cross-checked against the definition route through the Gauss
    /// products.
    pub fn build(c: u32, cutoff: u64) -> Result<Self> {
        if !(c == 6 || c == 7) {
            return Err(Error::Config(format!("c must be 6 or 7, got {c}")));
        }
        if cutoff < 2 {
            return Err(Error::Config(format!("cutoff must be >= 2, got {cutoff}")));
        }
        let primes = sieve_primes(cutoff).primes().to_vec();
        let factors: Vec<Vec<f64>> = primes
            .par_iter()
            .map(|&p| {
                if p <= EXACT_CONV_MAX_P {
                    factor_distribution_exact(p, c).expect("p below exact budget")
                } else {
                    factor_distribution_fft(p, c)
                }
            })
            .collect();
        for (&p, fs) in primes.iter().zip(&factors) {
            if p > 100 {
                break;
            }
            let gp = GaussProducts::new(p, c);
            for (r, &f) in fs.iter().enumerate() {
                let by_def = 1.0 + gp.a_for(r as u64) / (p as f64 - 1.0).powi(7);
                assert!(
                    (f - by_def).abs() <= 1e-10 * f.abs().max(1.0),
                    "local factor mismatch at p={p}, r={r}: {f} vs {by_def}"
                );
            }
        }
        Ok(Self {
            c,
            cutoff,
            primes,
            factors,
        })
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Euler factor of `p` at the residue class of `n`.
    pub fn factor(&self, p: u64, n: u64) -> Option<f64> {
        let idx = self.primes.binary_search(&p).ok()?;
        Some(self.factors[idx][(n % p) as usize])
    }

    /// Truncated singular series at `n`: the ordered product of all
    /// tabulated factors.
    pub fn series_for(&self, n: u64) -> SingularSeriesValue {
        let decade_lo = self.cutoff / 10;
        let mut value = 1.0f64;
        let mut max_tail_dev = 0.0f64;
        for (&p, fs) in self.primes.iter().zip(&self.factors) {
            let f = fs[(n % p) as usize];
            value *= f;
            if p > decade_lo {
                max_tail_dev = max_tail_dev.max((f - 1.0).abs());
            }
        }
        let proxy = self.cutoff as f64 / (self.cutoff as f64).ln();
        SingularSeriesValue {
            value,
            cutoff: self.cutoff,
            tail_bound: max_tail_dev * proxy,
        }
    }
}

/// One-off truncated singular series. Builds the full factor tables for
/// the cutoff; when many values of n are needed, build [`LocalTables`]
/// once and call [`LocalTables::series_for`].
pub fn singular_series(n: u64, c: u32, cutoff: u64) -> Result<SingularSeriesValue> {
    Ok(LocalTables::build(c, cutoff)?.series_for(n))
}
