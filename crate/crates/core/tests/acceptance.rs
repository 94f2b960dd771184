//! Acceptance suite: one verdict line per criterion.

use coneval::gaussbench::{
    default_facet_threshold, facet_lower_bound_estimate, lemma1_experiment, lemma2_experiment,
};
use coneval::kernel::isotropy_check;
use coneval::polyspace::{
    enumerate_exponents, evaluate, inner_product, monomial_count, norm1, norm2,
};
use coneval::polytope::{
    build_deterministic, build_random, build_tensorized, default_tensor_epsilon, sample_sphere,
    tensor_ratio_bound,
};
use coneval::sparsifier::{bss_sparsify, whiten};
use coneval::verifier::{certify_containment, ngon_check, Body, SupportOracle};
use coneval::{mc, Poly64, PolytopeV64, SphereMomentCache, Subspace64, VectorSystem64};
use nalgebra::DMatrix;
use rand::Rng;

fn criterion(idx: usize, desc: &str, pass: bool) {
    println!("criterion {idx}: {} - {desc}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {idx} failed: {desc}");
}

#[test]
fn criterion_01_kernel_identity() {
    let cache = SphereMomentCache::new();
    let mut ok = true;
    for n in [2usize, 3, 4] {
        for d in [1u32, 2] {
            let e = Subspace64::full(n, d, &cache).unwrap();
            let dim = monomial_count(n, 2 * d) as f64;
            let pts = sample_sphere::<f64>(n, 100, 42 + n as u64 + 10 * d as u64);
            let kernels: Vec<Poly64> =
                pts.iter().map(|v| e.reproducing_kernel(v).unwrap()).collect();
            for (kv, v) in kernels.iter().zip(&pts) {
                ok &= (evaluate(kv, v).unwrap() - dim).abs() < 1e-9;
            }
            for i in 0..20 {
                let (v, w) = (&pts[i], &pts[i + 20]);
                let vw = evaluate(&kernels[i], w).unwrap();
                let wv = evaluate(&kernels[i + 20], v).unwrap();
                ok &= (vw - wv).abs() < 1e-9;
            }
        }
    }
    criterion(1, "reproducing kernel: p_v(v) = dim and p_v(w) = p_w(v)", ok);
}

#[test]
fn criterion_02_isotropy() {
    let cache = SphereMomentCache::new();
    let mut ok = true;
    let spaces = [
        Subspace64::full(3, 1, &cache).unwrap(),
        Subspace64::even_symmetric_sextics(6, &cache).unwrap(),
    ];
    for e in &spaces {
        let report = isotropy_check(e, 100_000, 23).unwrap();
        let target = (e.m - 1) as f64;
        ok &= report.covariance_deviation < 0.05;
        ok &= report.mean_deviation < 0.05;
        ok &= (report.avg_squared_norm - target).abs() < 0.05 * target;
    }
    criterion(2, "pushforward of phi_E is isotropic with squared norm m-1", ok);
}

#[test]
fn criterion_03_sparsifier() {
    let mut rng = mc::stream(0xACC3, 0);
    let mut ok = true;
    for trial in 0..20 {
        let dim: usize = rng.gen_range(6..=12);
        let count: usize = rng.gen_range(300..=1000);
        let vectors: Vec<Vec<f64>> =
            (0..count).map(|_| mc::gaussian_vector(dim, &mut rng)).collect();
        let system = VectorSystem64::unit_weights(dim, vectors).unwrap();
        let (white, _) = whiten(&system).unwrap();
        let eps: f64 = if trial % 2 == 0 { 0.4 } else { 0.6 };
        let dec = bss_sparsify(&white, eps).unwrap();
        ok &= dec.indices.len() <= (dim as f64 / (eps * eps)).ceil() as usize;
        let mut sum = DMatrix::<f64>::zeros(dim, dim);
        for (&i, &w) in dec.indices.iter().zip(&dec.weights) {
            let v = DMatrix::from_column_slice(dim, 1, &white.vectors[i]);
            sum += w * &v * v.transpose();
        }
        let eigs = sum.symmetric_eigenvalues();
        let (lo, hi) = ((1.0 - eps).powi(2), (1.0 + eps).powi(2));
        ok &= eigs.iter().all(|&l| l >= lo - 1e-7 && l <= hi + 1e-7);
        let rerun = bss_sparsify(&white, eps).unwrap();
        ok &= serde_json::to_string(&dec).unwrap() == serde_json::to_string(&rerun).unwrap();
    }
    criterion(3, "barrier sparsifier: support, spectral sandwich, determinism", ok);
}

#[test]
fn criterion_04_deterministic_polytope() {
    let cache = SphereMomentCache::new();
    let e = Subspace64::full(2, 1, &cache).unwrap();
    let epsilon = 0.6;
    let (_p, q, ratio_bound) = build_deterministic(&e, epsilon, 4000, 7).unwrap();
    let report =
        certify_containment(&e, Body::H(&q), 1000, &SupportOracle::EigenExact, 3).unwrap();
    let formula = (1.0 + 2.0 * epsilon) * (e.m as f64).powf(1.5);
    let ok = (ratio_bound - formula).abs() < 1e-9
        && report.ratio_claimed <= formula
        && report.inner_inclusion_ok
        && report.oracle_certified;
    criterion(4, "deterministic pair certified within (1+2eps) m^{3/2}", ok);
}

#[test]
fn criterion_05_tensorization() {
    let cache = SphereMomentCache::new();
    let e = Subspace64::full(2, 1, &cache).unwrap();
    let epsilon = default_tensor_epsilon::<f64>();
    let mut ratios = Vec::new();
    let mut ok = true;
    for k in 1..=3u32 {
        let (q, _bound) = build_tensorized(&e, k, epsilon, 4000, 11).unwrap();
        let report =
            certify_containment(&e, Body::H(&q), 1000, &SupportOracle::EigenExact, 5).unwrap();
        ok &= report.inner_inclusion_ok;
        ok &= report.ratio_claimed <= tensor_ratio_bound(e.m, k, epsilon) + 0.1;
        ratios.push(report.ratio_claimed);
    }
    ok &= ratios[2] <= ratios[0];
    criterion(5, "tensor powers tighten the certified ratio within formula bounds", ok);
}

#[test]
fn criterion_06_random_polytope() {
    let cache = SphereMomentCache::new();
    let e = Subspace64::full(2, 1, &cache).unwrap();
    let mut hits = 0usize;
    let mut inner_all = true;
    for seed in 0..40u64 {
        let (k, _t) = build_random(&e, 0.5, Some(500), 4.0, seed).unwrap();
        let report =
            certify_containment(&e, Body::H(&k), 300, &SupportOracle::EigenExact, seed).unwrap();
        if report.alpha_achieved >= 0.5 {
            hits += 1;
        }
        inner_all &= report.inner_inclusion_ok;
    }
    let ok = hits * 100 >= 95 * 40 && inner_all;
    criterion(6, "random polytope reaches alpha = 0.5 in >= 95% of seeds", ok);
}

#[test]
fn criterion_07_ngon() {
    let mut ok = true;
    for n in [5usize, 6, 8, 12] {
        ok &= ngon_check::<f64>(n, 180, 1e-5).unwrap();
    }
    criterion(7, "even symmetric sextic cross-section is an n-gon", ok);
}

#[test]
fn criterion_08_norm_ratio_bound() {
    let cache = SphereMomentCache::new();
    let mut ok = true;
    for n in [2usize, 3, 4] {
        for d in [1u32, 2] {
            let exps = enumerate_exponents(n, 2 * d);
            let bound = 2f64.powi(2 * d as i32);
            let mut rng = mc::stream(0xBEEF + n as u64, d as u64);
            for trial in 0..1000 {
                let mut f = Poly64::zero(n, 2 * d);
                for alpha in &exps {
                    let c: f64 = rng.gen::<f64>() * 2.0 - 1.0;
                    f.add_term(alpha.clone(), c).unwrap();
                }
                let n2 = norm2(&f, &cache);
                if n2 == 0.0 {
                    continue;
                }
                let (n1, stderr) = norm1(&f, 2000, trial).unwrap();
                let ratio = n2 * n2 / (n1 * n1);
                let ratio_stderr = 2.0 * ratio * stderr / n1;
                ok &= ratio <= bound + 3.0 * ratio_stderr;
            }
        }
    }
    criterion(8, "norm ratio of every sample respects the 2^{2d} bound", ok);
}

#[test]
fn criterion_09_gaussian_tails() {
    let mut ok = true;
    let eps_grid = [0.1, 0.2, 0.3, 0.4, 0.5];
    for n in [50usize, 100] {
        let report = lemma2_experiment(n, &eps_grid, 100_000, 17).unwrap();
        for i in 0..eps_grid.len() {
            ok &= report.empirical_probs[i]
                <= report.theoretical_bounds[i].unwrap() + 3.0 * report.stderrs[i];
        }
    }
    let cache = SphereMomentCache::new();
    for (n, d) in [(2usize, 1u32), (3, 1), (4, 1), (2, 2), (3, 2)] {
        let mut exps = vec![0u32; n];
        exps[0] = 2 * d;
        let mono = Poly64::monomial(n, coneval::ExponentVector(exps), 1.0).unwrap();
        let r = Poly64::r(n, d);
        let mean = inner_product(&mono, &r, &cache).unwrap();
        let f = mono.sub(&r.scale(mean)).unwrap();
        let base = ((n + 2 * d as usize) as f64).sqrt();
        let grid: Vec<f64> = [1.0, 1.3, 1.6, 2.0].iter().map(|s| s * base).collect();
        let report = lemma1_experiment(&f, &grid, 50_000, 19).unwrap();
        ok &= report.fit_slope < 0.0;
    }
    criterion(9, "gaussian norm and polynomial tails decay as predicted", ok);
}

#[test]
fn criterion_10_facet_bound_sanity() {
    let cache = SphereMomentCache::new();
    let e = Subspace64::full(3, 1, &cache).unwrap();
    let base: Vec<Vec<f64>> = (0..3)
        .flat_map(|i| {
            let mut v = vec![0.0; 3];
            v[i] = 1.0;
            let phi = e.phi(&v).unwrap().coords;
            let neg: Vec<f64> = phi.iter().map(|c| -c).collect();
            [phi, neg]
        })
        .collect();
    let shrunk: Vec<Vec<f64>> =
        base.iter().map(|v| v.iter().map(|c| 0.5 * c).collect()).collect();
    let p_big = PolytopeV64::new(e.basis_ref(), base, true).unwrap();
    let p_small = PolytopeV64::new(e.basis_ref(), shrunk, true).unwrap();

    let default_t = default_facet_threshold(3, 1);
    let at_default = facet_lower_bound_estimate(&e, &p_big, default_t, 200_000, 29).unwrap();
    let mut ok = at_default.infinite || at_default.lower_bound >= 0.0;

    // moderate threshold keeps both denominators observable
    let t = 2.6;
    let big = facet_lower_bound_estimate(&e, &p_big, t, 200_000, 29).unwrap();
    let small = facet_lower_bound_estimate(&e, &p_small, t, 200_000, 29).unwrap();
    ok &= !big.infinite && big.lower_bound >= 0.0;
    let small_bound = if small.infinite { f64::INFINITY } else { small.lower_bound };
    ok &= small_bound >= big.lower_bound;
    criterion(10, "vertex-count estimator is nonnegative and monotone", ok);
}
