//! Cross-module invariants that do not belong to a single module's unit
//! tests: worker-count independence of floating results, arc-geometry set
//! relations, and consistency of the grid-specialized smooth-sum
//! evaluation with the pointwise one.

use wglab::archimedean::{main_term, singular_integral_direct, wc_quadrature};
use wglab::arith::sieve_primes;
use wglab::count::{nu_exact, CountMode};
use wglab::expsum::{
    classify_arc, dft_nu, w_c, ArcConfig, ArcTag, FTables, ProblemInstance,
};

/// Identical numeric results under different rayon pool sizes: all
/// parallel reductions fold fixed-size blocks in index order.
#[test]
fn results_independent_of_worker_count() {
    let run = |threads: usize| -> (f64, f64, f64) {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let n = 1501u64;
            let inst = ProblemInstance::new(n, 6).unwrap();
            let primes = sieve_primes(inst.p_k(2).ceil() as u64 + 1);
            let tables = FTables::build(&inst, &primes).unwrap();
            let a = dft_nu(&inst, &tables, 8 * n).unwrap();
            let b = nu_exact(n, 6, CountMode::Unrestricted).unwrap().weighted;
            let c = singular_integral_direct(n, 6).unwrap();
            (a, b, c)
        })
    };
    let lone = run(1);
    let many = run(7);
    assert_eq!(lone.0.to_bits(), many.0.to_bits(), "dft");
    assert_eq!(lone.1.to_bits(), many.1.to_bits(), "nu weighted");
    assert_eq!(lone.2.to_bits(), many.2.to_bits(), "singular integral");
}

/// The three classes partition [0,1] by precedence, the weight is 1/q at
/// arc centers, and whenever the narrow-arc bound is at most the wide-arc
/// bound, every narrow point sits inside the wide geometry as well.
#[test]
fn arc_geometry_relations() {
    let inst = ProblemInstance::new(100_000_000, 6).unwrap();
    let cfg = ArcConfig::new(&inst, 1.0).unwrap();
    let n = inst.n() as f64;
    let lb = inst.log_n();
    let narrow_within_wide = lb <= cfg.q_c();
    for j in 0..5000u64 {
        // low-discrepancy sample of [0,1]
        let alpha = (j as f64 * 0.754877666246693).fract();
        let cls = classify_arc(alpha, &inst, &cfg).unwrap();
        match cls.tag {
            ArcTag::Major => {
                let fp = cls.farey.unwrap();
                assert!(fp.q() as f64 <= lb);
                assert!((alpha - fp.value()).abs() <= lb / n * (1.0 + 1e-12));
                if narrow_within_wide {
                    let dist = (fp.q() as f64 * alpha - fp.a() as f64).abs();
                    assert!(dist <= cfg.q_c() / n);
                }
            }
            ArcTag::Kumchev => {
                let fp = cls.farey.unwrap();
                assert!(fp.q() as f64 <= cfg.q_c());
            }
            ArcTag::Minor => {
                assert!(cls.farey.is_none() && cls.upsilon.is_none());
            }
        }
    }
    // weight at centers is exactly 1/q
    for (q, a) in [(1u64, 0u64), (2, 1), (4, 1), (8, 3), (16, 5)] {
        let cls = classify_arc(a as f64 / q as f64, &inst, &cfg).unwrap();
        let fp = cls.farey.expect("center must not be minor");
        assert_eq!(fp.q(), q);
        assert_eq!(cls.upsilon.unwrap(), 1.0 / q as f64);
    }
}

/// The prediction is insensitive to the series truncation once past the
/// first thousand primes.
#[test]
fn main_term_cutoff_stability() {
    let coarse = main_term(2001, 6, 1000).unwrap();
    let fine = main_term(2001, 6, 10_000).unwrap();
    assert!(fine.predicted > 0.0);
    assert!(
        (coarse.predicted - fine.predicted).abs() / fine.predicted < 1e-3,
        "prediction moved from {} to {}",
        coarse.predicted,
        fine.predicted
    );
}

/// The quadrature's grid-specialized smooth-product evaluation agrees
/// with pointwise `w_c` at grid rationals.
#[test]
fn quadrature_grid_consistent_with_pointwise_w() {
    let inst = ProblemInstance::new(729, 7).unwrap();
    let q = wc_quadrature(&inst, 16).unwrap();
    // rectangle rule assembled from pointwise w_c at the same grid
    let grid = 16 * 729u64;
    let mut acc = 0.0;
    for j in 0..grid {
        let beta = j as f64 / grid as f64;
        let w = w_c(beta, &inst);
        let phase = -2.0 * std::f64::consts::PI * beta * 729.0;
        acc += w.re * phase.cos() - w.im * phase.sin();
    }
    acc /= grid as f64;
    assert!(
        (q - acc).abs() < 1e-6 * acc.abs().max(1.0),
        "grid route {q} vs pointwise {acc}"
    );
}
