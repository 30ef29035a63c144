//! Exponential sums and arc geometry.
//!
//! The generating product evaluated here is
//! `F(alpha) = f2^2 f3^2 f5 f6 fc`, where `f_k` sums `e(alpha p^k) log p`
//! over primes in a dyadic range `(P_k/2, P_k]`, and `f5` runs over the
//! truncated range `(1, P5^theta]`. The integral of `F(alpha) e(-alpha n)`
//! over the unit interval is the log-weighted representation count, and
//! [`dft_nu`] evaluates that integral exactly as a finite DFT once the grid
//! outruns every frequency in the product.
//!
//! Phases are reduced modulo 1 before any trig call. Rational phases
//! (Gauss sums, DFT grids) are reduced in exact integer arithmetic; real
//! phases go through [`unit_phase`], which multiplies the dyadic mantissa
//! of `alpha` by the integer frequency exactly.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::arith::{self, gcd, power_table, PrimeTable, WeightedPowerTable};
use crate::error::{Error, Result};
use crate::numeric::{par_sum_complex, KahanComplex};

/// Target integer, exponent choice, and the derived range parameters.
#[derive(Clone, Copy, Debug)]
pub struct ProblemInstance {
    n: u64,
    c: u32,
}

impl ProblemInstance {
    pub fn new(n: u64, c: u32) -> Result<Self> {
        if !(c == 6 || c == 7) {
            return Err(Error::Config(format!("c must be 6 or 7, got {c}")));
        }
        if n < 2 {
            return Err(Error::Config(format!("target n must be at least 2, got {n}")));
        }
        Ok(Self { n, c })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn c(&self) -> u32 {
        self.c
    }

    /// `P_k = n^{1/k}`, kept real-valued.
    pub fn p_k(&self, k: u32) -> f64 {
        (self.n as f64).powf(1.0 / k as f64)
    }

    /// Truncation exponent for the fifth-power sum: 5/6 or 87/98.
    pub fn theta(&self) -> f64 {
        match self.c {
            6 => 5.0 / 6.0,
            _ => 87.0 / 98.0,
        }
    }

    /// Growth exponent of the weighted count: `2/3 + theta/5 + 1/6 + 1/c`.
    pub fn big_theta(&self) -> f64 {
        2.0 / 3.0 + self.theta() / 5.0 + 1.0 / 6.0 + 1.0 / (self.c as f64)
    }

    /// `log n`.
    pub fn log_n(&self) -> f64 {
        (self.n as f64).ln()
    }

    /// Upper bound of the fifth-power range, `P5^theta = n^{theta/5}`.
    pub fn f5_hi(&self) -> f64 {
        (self.n as f64).powf(self.theta() / 5.0)
    }

    /// Wide-arc denominator bound `Q = n^{2/(3c^2(c-1))}`.
    pub fn q_c(&self) -> f64 {
        let c = self.c as f64;
        (self.n as f64).powf(2.0 / (3.0 * c * c * (c - 1.0)))
    }
}

/// Selector for the five factors of the generating product.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SumKind {
    F2,
    F3,
    /// The truncated fifth-power sum over `(1, P5^theta]`.
    F5,
    F6,
    /// The top factor of exponent `c`.
    Fc,
}

impl SumKind {
    pub fn exponent(self, inst: &ProblemInstance) -> u32 {
        match self {
            SumKind::F2 => 2,
            SumKind::F3 => 3,
            SumKind::F5 => 5,
            SumKind::F6 => 6,
            SumKind::Fc => inst.c(),
        }
    }

    /// Prime range `(lo, hi]` of this factor.
    pub fn range(self, inst: &ProblemInstance) -> (f64, f64) {
        match self {
            SumKind::F5 => (1.0, inst.f5_hi()),
            _ => {
                let p = inst.p_k(self.exponent(inst));
                (p / 2.0, p)
            }
        }
    }
}

/// The five weighted power tables of one problem instance.
#[derive(Clone, Debug)]
pub struct FTables {
    n: u64,
    c: u32,
    f2: WeightedPowerTable,
    f3: WeightedPowerTable,
    f5: WeightedPowerTable,
    f6: WeightedPowerTable,
    fc: WeightedPowerTable,
}

impl FTables {
    /// Builds all five tables; the sieve must reach `P_2 = sqrt(n)`.
    pub fn build(inst: &ProblemInstance, primes: &PrimeTable) -> Result<Self> {
        let mk = |kind: SumKind| -> Result<WeightedPowerTable> {
            let (lo, hi) = kind.range(inst);
            power_table(kind.exponent(inst), lo, hi, primes)
        };
        Ok(Self {
            n: inst.n(),
            c: inst.c(),
            f2: mk(SumKind::F2)?,
            f3: mk(SumKind::F3)?,
            f5: mk(SumKind::F5)?,
            f6: mk(SumKind::F6)?,
            fc: mk(SumKind::Fc)?,
        })
    }

    pub fn table(&self, kind: SumKind) -> &WeightedPowerTable {
        match kind {
            SumKind::F2 => &self.f2,
            SumKind::F3 => &self.f3,
            SumKind::F5 => &self.f5,
            SumKind::F6 => &self.f6,
            SumKind::Fc => &self.fc,
        }
    }

    /// True when some factor has an empty prime range (then `F` vanishes
    /// identically).
    pub fn any_empty(&self) -> bool {
        ALL_KINDS.iter().any(|&k| self.table(k).is_empty())
    }

    /// Copy with every weight replaced by 1, for unweighted counting.
    pub fn with_unit_weights(&self) -> Self {
        let strip = |t: &WeightedPowerTable| -> WeightedPowerTable {
            let mut out = t.clone();
            out.set_unit_weights();
            out
        };
        Self {
            n: self.n,
            c: self.c,
            f2: strip(&self.f2),
            f3: strip(&self.f3),
            f5: strip(&self.f5),
            f6: strip(&self.f6),
            fc: strip(&self.fc),
        }
    }
}

pub const ALL_KINDS: [SumKind; 5] = [SumKind::F2, SumKind::F3, SumKind::F5, SumKind::F6, SumKind::Fc];

/// Multiplicity of each factor in the generating product.
pub fn multiplicity(kind: SumKind) -> u32 {
    match kind {
        SumKind::F2 | SumKind::F3 => 2,
        _ => 1,
    }
}

/// `e(x) = exp(2 pi i x)`.
#[inline]
pub fn e_unit(x: f64) -> Complex64 {
    let (s, c) = (TAU * x).sin_cos();
    Complex64::new(c, s)
}

/// Exact fractional part of `alpha * m` for `alpha in [0, 1)`, computed by
/// multiplying the dyadic mantissa of `alpha` by `m` in integer arithmetic.
/// Forming `alpha * m` directly in f64 loses the low phase bits as soon as
/// the product passes 2^53.
pub fn unit_phase(alpha: f64, m: u64) -> f64 {
    debug_assert!((0.0..1.0).contains(&alpha));
    if alpha == 0.0 || m == 0 {
        return 0.0;
    }
    let bits = alpha.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, exp) = if biased == 0 {
        (frac, -1074i64)
    } else {
        (frac | (1u64 << 52), biased - 1075)
    };
    // alpha * m = mantissa * m * 2^exp with exp < 0
    let prod = mantissa as u128 * m as u128;
    let shift = (-exp) as u32;
    if shift >= 128 {
        // alpha so small that alpha * m < 1 for any u64 m here
        return prod as f64 * (exp as f64).exp2();
    }
    let frac_int = prod & ((1u128 << shift) - 1);
    frac_int as f64 * (exp as f64).exp2()
}

/// `Sum e(alpha p^k) log p` over the entries of `table`.
///
/// The table must be the one [`FTables::build`] produces for `kind`;
/// anything else is a configuration error.
pub fn prime_expsum(
    kind: SumKind,
    alpha: f64,
    inst: &ProblemInstance,
    table: &WeightedPowerTable,
) -> Result<Complex64> {
    let (lo, hi) = kind.range(inst);
    let k = kind.exponent(inst);
    let tol = 1e-9 * hi.max(1.0);
    if table.k() != k || (table.lo() - lo).abs() > tol || (table.hi() - hi).abs() > tol {
        return Err(Error::Config(format!(
            "table (k={}, range ({}, {}]) does not match kind {:?} (k={}, range ({}, {}])",
            table.k(),
            table.lo(),
            table.hi(),
            kind,
            k,
            lo,
            hi
        )));
    }
    Ok(expsum_over(table, alpha))
}

fn expsum_over(table: &WeightedPowerTable, alpha: f64) -> Complex64 {
    let a = alpha.rem_euclid(1.0);
    let mut acc = KahanComplex::new();
    for &(m, w) in table.entries() {
        acc.add(w * e_unit(unit_phase(a, m)));
    }
    acc.value()
}

/// The full generating product `f2^2 f3^2 f5 f6 fc` at `alpha`.
pub fn f_product(alpha: f64, tables: &FTables) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for kind in ALL_KINDS {
        let v = expsum_over(tables.table(kind), alpha);
        for _ in 0..multiplicity(kind) {
            acc *= v;
        }
    }
    acc
}

/// A reduced rational `a/q` with `0 <= a <= q`, `gcd(a, q) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FareyPoint {
    q: u64,
    a: u64,
    phi_q: u64,
}

impl FareyPoint {
    pub fn new(q: u64, a: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Contract("Farey denominator must be positive".into()));
        }
        if a > q {
            return Err(Error::Contract(format!("need 0 <= a <= q, got a={a}, q={q}")));
        }
        if gcd(a, q) != 1 {
            return Err(Error::Contract(format!("a={a} and q={q} are not coprime")));
        }
        Ok(Self {
            q,
            a,
            phi_q: arith::phi(q),
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn phi_q(&self) -> u64 {
        self.phi_q
    }

    pub fn value(&self) -> f64 {
        self.a as f64 / self.q as f64
    }
}

/// Complete Gauss-type sum `S_k(q, a) = Sum_{x=1, (x,q)=1}^{q} e(a x^k / q)`.
///
/// Phases are exact rationals `r/q`; the unit roots are precomputed once.
pub fn gauss_sum(k: u32, fp: &FareyPoint) -> Complex64 {
    let q = fp.q();
    if q == 1 {
        return Complex64::new(1.0, 0.0);
    }
    let roots = unit_roots(q);
    let mut acc = KahanComplex::new();
    for x in 1..=q {
        if gcd(x, q) != 1 {
            continue;
        }
        let r = (fp.a() as u128 * arith::pow_mod(x, k, q) as u128 % q as u128) as usize;
        acc.add(roots[r]);
    }
    acc.value()
}

/// `[e(t/q)]` for `t = 0..q`.
pub(crate) fn unit_roots(q: u64) -> Vec<Complex64> {
    (0..q).map(|t| e_unit(t as f64 / q as f64)).collect()
}

/// Smooth comparison sum
/// `v_k(beta) = (1/k) Sum_{n/2^k < m <= n} m^{1/k - 1} e(beta m)`.
pub fn v_k(k: u32, beta: f64, inst: &ProblemInstance) -> Complex64 {
    let n = inst.n();
    let lo = (n >> k) + 1;
    if lo > n {
        return Complex64::new(0.0, 0.0);
    }
    let ex = 1.0 / k as f64 - 1.0;
    let scale = 1.0 / k as f64;
    let sum = if beta == 0.0 {
        Complex64::new(
            crate::numeric::par_sum_f64(lo, n + 1, |m| (m as f64).powf(ex)),
            0.0,
        )
    } else {
        let neg = beta < 0.0;
        let b = beta.abs().rem_euclid(1.0);
        let s = par_sum_complex(lo, n + 1, move |m| {
            (m as f64).powf(ex) * e_unit(unit_phase(b, m))
        });
        if neg {
            s.conj()
        } else {
            s
        }
    };
    scale * sum
}

/// `w(beta) = v2^2 v3^2 v6 vc`, the smooth analogue of the generating
/// product near a rational point.
pub fn w_c(beta: f64, inst: &ProblemInstance) -> Complex64 {
    let v2 = v_k(2, beta, inst);
    let v3 = v_k(3, beta, inst);
    let v6 = v_k(6, beta, inst);
    let vc = if inst.c() == 6 { v6 } else { v_k(inst.c(), beta, inst) };
    v2 * v2 * v3 * v3 * v6 * vc
}

/// Arc-dissection parameters: narrow arcs of radius `L^B/n` around
/// denominators `q <= L^B`, wide arcs of radius `Q/(n q)` around `q <= Q`,
/// and the small-sum threshold parameter `tau`.
#[derive(Clone, Copy, Debug)]
pub struct ArcConfig {
    b: f64,
    tau: f64,
    q_c: f64,
}

impl ArcConfig {
    pub fn new(inst: &ProblemInstance, b: f64) -> Result<Self> {
        if b < 1.0 {
            return Err(Error::Config(format!("arc exponent B must be >= 1, got {b}")));
        }
        Ok(Self {
            b,
            tau: DEFAULT_TAU,
            q_c: inst.q_c(),
        })
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn q_c(&self) -> f64 {
        self.q_c
    }
}

pub const DEFAULT_TAU: f64 = 1.0 / (1 << 20) as f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcTag {
    Major,
    Kumchev,
    Minor,
}

/// Classification of a point of `[0, 1]` with the rational center and the
/// weight `1/(q + n |q alpha - a|)` when one applies.
#[derive(Clone, Copy, Debug)]
pub struct ArcClass {
    pub tag: ArcTag,
    pub farey: Option<FareyPoint>,
    pub upsilon: Option<f64>,
}

impl ArcClass {
    fn minor() -> Self {
        Self {
            tag: ArcTag::Minor,
            farey: None,
            upsilon: None,
        }
    }
}

/// Classifies `alpha` as narrow-arc (Major), wide-arc (Kumchev), or Minor,
/// with precedence Major > Kumchev > Minor.
///
/// Candidate rationals come from the continued-fraction convergents of
/// `alpha` (as the exact dyadic rational a f64 is); both arc radii are far
/// below `1/(2q^2)` at any sane configuration, so every admissible center
/// is a convergent. A brute scan over q takes over in the degenerate
/// regime where that argument fails.
pub fn classify_arc(alpha: f64, inst: &ProblemInstance, cfg: &ArcConfig) -> Result<ArcClass> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Contract(format!("alpha must lie in [0,1], got {alpha}")));
    }
    let n = inst.n() as f64;
    let lb = inst.log_n().powf(cfg.b());
    let major_q = lb;
    let major_radius = lb / n;
    let kum_q = cfg.q_c();
    let kum_dist = cfg.q_c() / n;
    let bound = major_q.max(kum_q).floor() as u64;
    if bound == 0 {
        return Ok(ArcClass::minor());
    }

    // Degenerate regime: radius too wide for the convergent argument.
    let convergent_arg_ok = 2.0 * (bound as f64).powi(2) * major_radius.max(kum_dist) < 1.0;
    let candidates = if convergent_arg_ok {
        convergents(alpha, bound)
    } else {
        scan_all(alpha, bound)
    };

    // Narrow arcs first, smallest denominator wins.
    for &(q, a, dist) in &candidates {
        if (q as f64) <= major_q && dist <= major_radius {
            let fp = FareyPoint::new(q, a)?;
            let upsilon = 1.0 / (q as f64 + n * (q as f64) * dist);
            return Ok(ArcClass {
                tag: ArcTag::Major,
                farey: Some(fp),
                upsilon: Some(upsilon),
            });
        }
    }
    for &(q, a, dist) in &candidates {
        if (q as f64) <= kum_q && (q as f64) * dist <= kum_dist {
            let fp = FareyPoint::new(q, a)?;
            let upsilon = 1.0 / (q as f64 + n * (q as f64) * dist);
            return Ok(ArcClass {
                tag: ArcTag::Kumchev,
                farey: Some(fp),
                upsilon: Some(upsilon),
            });
        }
    }
    Ok(ArcClass::minor())
}

/// Continued-fraction convergents `a/q` of `alpha` with `q <= bound`,
/// together with `|alpha - a/q|`. Exact integer arithmetic throughout.
fn convergents(alpha: f64, bound: u64) -> Vec<(u64, u64, f64)> {
    // alpha = num / den exactly, den a power of two
    let (num0, den0) = match dyadic_parts(alpha) {
        Some(pair) => pair,
        // alpha so close to 0 that it sits inside every arc at (1, 0)
        None => return vec![(1, 0, alpha)],
    };
    let denf = den0 as f64;
    let (mut num, mut den) = (num0, den0);
    let mut out = Vec::new();
    // standard recurrence seeds: h_{-1}/k_{-1} = 1/0, h_{-2}/k_{-2} = 0/1
    let (mut h0, mut h1) = (0u128, 1u128);
    let (mut k0, mut k1) = (1u128, 0u128);
    // Euclid on (num, den) generates the convergents of num/den.
    loop {
        if den == 0 {
            break;
        }
        let a = num / den;
        let h = a * h1 + h0;
        let k = a * k1 + k0;
        if k > bound as u128 {
            break;
        }
        let rem = num % den;
        // |alpha - h/k| = |num0*k - h*den0| / (den0*k)
        let diff = (num0 * k).abs_diff(h * den0);
        out.push((k as u64, h as u64, diff as f64 / (denf * k as f64)));
        h0 = h1;
        h1 = h;
        k0 = k1;
        k1 = k;
        num = den;
        den = rem;
    }
    out
}

/// `alpha = num/den` with `den = 2^s`; `None` when the exponent is too
/// small for 128-bit arithmetic (alpha below ~2^-74).
fn dyadic_parts(alpha: f64) -> Option<(u128, u128)> {
    if alpha == 0.0 {
        return Some((0, 1));
    }
    if alpha == 1.0 {
        return Some((1, 1));
    }
    let bits = alpha.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut mant, mut exp) = if biased == 0 {
        (frac, -1074i64)
    } else {
        (frac | (1u64 << 52), biased - 1075)
    };
    while mant & 1 == 0 && exp < 0 {
        mant >>= 1;
        exp += 1;
    }
    let shift = -exp;
    if shift > 74 {
        return None;
    }
    Some((mant as u128, 1u128 << shift))
}

/// Fallback for degenerate configurations: nearest reduced rational per
/// denominator.
fn scan_all(alpha: f64, bound: u64) -> Vec<(u64, u64, f64)> {
    let mut out = Vec::new();
    for q in 1..=bound {
        let a = (alpha * q as f64).round() as u64;
        let a = a.min(q);
        if gcd(a, q) != 1 {
            continue;
        }
        out.push((q, a, (alpha - a as f64 / q as f64).abs()));
    }
    out
}

/// True when the top-degree factor is small in the sense of the
/// exceptional sets: `|f6| <= P6^{1-24 tau}` for c = 6,
/// `|f7| <= P7^{139/140 - 24 tau}` for c = 7.
pub fn in_exceptional_set(alpha: f64, inst: &ProblemInstance, tables: &FTables, cfg: &ArcConfig) -> bool {
    let (kind, base_exp) = if inst.c() == 6 {
        (SumKind::F6, 1.0)
    } else {
        (SumKind::Fc, 139.0 / 140.0)
    };
    let threshold = inst
        .p_k(inst.c())
        .powf(base_exp - 24.0 * cfg.tau());
    expsum_over(tables.table(kind), alpha).norm() <= threshold
}

/// Main term of the narrow-arc approximation at `alpha` inside the arc of
/// `fp`: `S_k(q,a)/phi(q) * v_k(alpha - a/q)` for the dyadic factors, and
/// `S_5(q,a)/phi(q) * P5^theta` for the truncated fifth-power factor.
pub fn major_arc_main_term(
    kind: SumKind,
    alpha: f64,
    fp: &FareyPoint,
    inst: &ProblemInstance,
    cfg: &ArcConfig,
) -> Result<Complex64> {
    let radius = inst.log_n().powf(cfg.b()) / inst.n() as f64;
    let beta = alpha - fp.value();
    if beta.abs() > radius + 1e-15 {
        return Err(Error::Contract(format!(
            "alpha={alpha} is outside the arc of {}/{} (radius {radius:.3e})",
            fp.a(),
            fp.q()
        )));
    }
    let k = kind.exponent(inst);
    let s = gauss_sum(k, fp);
    let phi = fp.phi_q() as f64;
    match kind {
        SumKind::F5 => Ok(s / phi * inst.f5_hi()),
        _ => Ok(s / phi * v_k(k, beta, inst)),
    }
}

/// The truncated fifth-power sum evaluated exactly at the arc center
/// `a/q`, with phases reduced as rationals. The Taylor-refined alternative
/// to the flat main term of [`major_arc_main_term`]: on a narrow arc the
/// sum barely moves, so its center value approximates the whole arc.
pub fn f5_center_value(fp: &FareyPoint, tables: &FTables) -> Complex64 {
    let q = fp.q();
    let roots = unit_roots(q);
    let mut acc = KahanComplex::new();
    for &(m, w) in tables.table(SumKind::F5).entries() {
        let r = (fp.a() as u128 * (m % q) as u128 % q as u128) as usize;
        acc.add(w * roots[r]);
    }
    acc.value()
}

/// Exact DFT evaluation of the weighted representation count:
/// `(1/M) Sum_j F(j/M) e(-j n / M)`.
///
/// Every frequency of `F` lies in `[0, 7n]`, so any `M >= 7n + 1` isolates
/// the coefficient at `n` exactly; smaller grids alias.
pub fn dft_nu(inst: &ProblemInstance, tables: &FTables, m_grid: u64) -> Result<f64> {
    let n = inst.n();
    if m_grid < 7 * n + 1 {
        return Err(Error::Aliasing {
            m: m_grid,
            max_freq: 7 * n,
        });
    }
    if tables.any_empty() {
        return Ok(0.0);
    }
    // One root table serves every phase: all of them are j*m mod M.
    let roots = unit_roots(m_grid);
    let roots = &roots[..];
    let entries: Vec<(SumKind, &[(u64, f64)])> = ALL_KINDS
        .iter()
        .map(|&k| (k, tables.table(k).entries()))
        .collect();
    let entries = &entries[..];
    let sum = par_sum_complex(0, m_grid, move |j| {
        let mut prod = Complex64::new(1.0, 0.0);
        for &(kind, ents) in entries {
            let mut s = Complex64::new(0.0, 0.0);
            for &(m, w) in ents {
                let r = (j as u128 * m as u128 % m_grid as u128) as usize;
                s += w * roots[r];
            }
            for _ in 0..multiplicity(kind) {
                prod *= s;
            }
        }
        let r = (j as u128 * (n % m_grid) as u128 % m_grid as u128) as usize;
        prod * roots[r].conj()
    });
    Ok(sum.re / m_grid as f64)
}
