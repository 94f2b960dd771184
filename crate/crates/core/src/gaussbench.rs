//! Gaussian tail experiments: the norm concentration bound, the polynomial
//! tail decay it feeds into, and the Monte Carlo vertex-count lower-bound
//! estimator built on both. Concrete in `f64`: this module is an experiment
//! harness, not part of the generic numeric core.

use crate::kernel::Subspace;
use crate::polyspace::{inner_product, norm2, HomogeneousPolynomial, SphereMomentCache};
use crate::polytope::PolytopeV;
use crate::{mc, Error, Result};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Aligned series of thresholds, empirical tail probabilities and (where a
/// fully specified formula exists) theoretical bounds.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TailReport {
    pub thresholds: Vec<f64>,
    pub empirical_probs: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub theoretical_bounds: Vec<Option<f64>>,
    /// Slope of `log p` against the theory's exponent argument.
    pub fit_slope: f64,
    pub samples: usize,
    pub seed: u64,
}

impl TailReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("threshold,empirical,stderr,bound\n");
        for i in 0..self.thresholds.len() {
            let bound = self.theoretical_bounds[i]
                .map(|b| format!("{b}"))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.thresholds[i], self.empirical_probs[i], self.stderrs[i], bound
            ));
        }
        out
    }
}

fn binomial_stderr(p: f64, samples: usize) -> f64 {
    (p * (1.0 - p) / samples as f64).sqrt()
}

/// Least-squares slope of `log p` against `x`, over entries with `p > 0`.
fn log_slope(xs: &[f64], ps: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ps)
        .filter(|(_, &p)| p > 0.0)
        .map(|(&x, &p)| (x, p.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|(x, _)| x).sum::<f64>() / n;
    let my = pts.iter().map(|(_, y)| y).sum::<f64>() / n;
    let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    num / den
}

/// Lower Gaussian norm concentration: empirically checks
/// `P(‖v‖² ≤ (1−ε)n) ≤ e^{−ε²n/4}` on a grid of `ε` values.
pub fn lemma2_experiment(
    n: usize,
    eps_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<TailReport> {
    if samples < 10_000 {
        return Err(Error::InvalidInput("need at least 1e4 samples".into()));
    }
    if eps_grid.iter().any(|&e| !(0.0..1.0).contains(&e)) {
        return Err(Error::InvalidInput("epsilon grid must lie in [0, 1)".into()));
    }
    let norms: Vec<f64> = mc::chunked(seed, samples, |rng| {
        let v: Vec<f64> = mc::gaussian_vector(n, rng);
        v.iter().map(|x| x * x).sum::<f64>()
    });
    let mut empirical = Vec::new();
    let mut stderrs = Vec::new();
    let mut bounds = Vec::new();
    for &eps in eps_grid {
        let thr = (1.0 - eps) * n as f64;
        let p = norms.iter().filter(|&&s| s <= thr).count() as f64 / samples as f64;
        let se = binomial_stderr(p, samples);
        let bound = (-eps * eps * n as f64 / 4.0).exp();
        if p > bound + 3.0 * se {
            return Err(Error::Certification(format!(
                "empirical {p} exceeds bound {bound} at eps = {eps}"
            )));
        }
        empirical.push(p);
        stderrs.push(se);
        bounds.push(Some(bound));
    }
    let xs: Vec<f64> = eps_grid.iter().map(|&e| e * e * n as f64 / 4.0).collect();
    let slope = log_slope(&xs, &empirical);
    Ok(TailReport {
        thresholds: eps_grid.to_vec(),
        empirical_probs: empirical,
        stderrs,
        theoretical_bounds: bounds,
        fit_slope: slope,
        samples,
        seed,
    })
}

/// Tail decay of a mean-zero polynomial under the Gaussian measure:
/// empirical `P(|f(v)| ≥ t^{2d} ‖f‖₂)` per `t`, with the decay rate in
/// `t²/(n+2d)` fitted rather than asserted (its constants are absolute but
/// unspecified).
pub fn lemma1_experiment(
    f: &HomogeneousPolynomial<f64>,
    t_grid: &[f64],
    samples: usize,
    seed: u64,
) -> Result<TailReport> {
    if samples < 10_000 {
        return Err(Error::InvalidInput("need at least 1e4 samples".into()));
    }
    let n = f.n();
    let two_d = f.degree() as f64;
    let cache = SphereMomentCache::new();
    let r = HomogeneousPolynomial::<f64>::r(n, f.degree() / 2);
    let mean = inner_product(f, &r, &cache)?;
    if mean.abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "polynomial has sphere mean {mean:.3e}, expected 0"
        )));
    }
    let t_min = (n as f64 + two_d).sqrt();
    if t_grid.iter().any(|&t| t < t_min) {
        return Err(Error::InvalidInput(format!(
            "thresholds must satisfy t >= sqrt(n + 2d) = {t_min:.3}"
        )));
    }
    let f_norm = norm2(f, &cache);
    let values: Vec<f64> = mc::chunked(seed, samples, |rng| {
        let v: Vec<f64> = mc::gaussian_vector(n, rng);
        f.eval_raw(&v).unwrap().abs()
    });
    let mut empirical = Vec::new();
    let mut stderrs = Vec::new();
    for &t in t_grid {
        let thr = t.powf(two_d) * f_norm;
        let p = values.iter().filter(|&&x| x >= thr).count() as f64 / samples as f64;
        empirical.push(p);
        stderrs.push(binomial_stderr(p, samples));
    }
    // monotone decay within noise
    for i in 1..empirical.len() {
        if t_grid[i] > t_grid[i - 1]
            && empirical[i] > empirical[i - 1] + 3.0 * (stderrs[i] + stderrs[i - 1])
        {
            return Err(Error::Certification(format!(
                "tail increased from t = {} to t = {}",
                t_grid[i - 1],
                t_grid[i]
            )));
        }
    }
    let xs: Vec<f64> = t_grid.iter().map(|&t| t * t / (n as f64 + two_d)).collect();
    let slope = log_slope(&xs, &empirical);
    if empirical.iter().filter(|&&p| p > 0.0).count() >= 2 && slope >= 0.0 {
        return Err(Error::Certification(format!(
            "log-tail slope {slope} is not negative"
        )));
    }
    Ok(TailReport {
        thresholds: t_grid.to_vec(),
        empirical_probs: empirical,
        stderrs,
        theoretical_bounds: t_grid.iter().map(|_| None).collect(),
        fit_slope: slope,
        samples,
        seed,
    })
}

/// Vertex-count lower bound implied by the Gaussian quotient argument.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FacetBoundEstimate {
    pub lower_bound: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub denominator_stderr: f64,
    /// Zero empirical denominator: the true bound is only known to exceed
    /// what the sample can resolve.
    pub infinite: bool,
    /// The denominator is a rare-event estimate biased toward optimism.
    pub caveat: String,
}

/// Default threshold from the inapproximability argument,
/// `t² = n(n+2d)/(4ed)`.
pub fn default_facet_threshold(n: usize, d: u32) -> f64 {
    (n as f64 * (n as f64 + 2.0 * d as f64) / (4.0 * std::f64::consts::E * d as f64)).sqrt()
}

/// Estimates the quotient
/// `P(‖v‖² ≥ t²·C^{-1/(2d)}) / max_i P(|f_i(v)| ≥ t^{2d}·C^{1/2})`
/// with `C = dim P_{n,2d}`, the numerator from the exact chi-square tail and
/// the denominator by Monte Carlo over the vertices `f_i` of `P`.
pub fn facet_lower_bound_estimate(
    subspace: &Subspace<f64>,
    p: &PolytopeV<f64>,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<FacetBoundEstimate> {
    if samples < 100_000 {
        return Err(Error::InvalidInput("need at least 1e5 samples".into()));
    }
    if p.dim() != subspace.m - 1 {
        return Err(Error::DimensionMismatch(
            "polytope does not live in the subspace's mean-zero part".into(),
        ));
    }
    let n = subspace.n();
    let two_d = subspace.two_d() as f64;
    let c = crate::polytope::binomial(n + subspace.two_d() as usize - 1, subspace.two_d() as usize)
        as f64;

    let chi = ChiSquared::new(n as f64).expect("positive dof");
    let numerator = 1.0 - chi.cdf(t * t * c.powf(-1.0 / two_d));

    let polys: Vec<HomogeneousPolynomial<f64>> = p
        .vertices
        .iter()
        .map(|v| subspace.from_mean_zero_coords(v))
        .collect::<Result<_>>()?;
    let thr = t.powf(two_d) * c.sqrt();
    let counts: Vec<Vec<bool>> = mc::chunked(seed, samples, |rng| {
        let v: Vec<f64> = mc::gaussian_vector(n, rng);
        polys.iter().map(|f| f.eval_raw(&v).unwrap().abs() >= thr).collect()
    });
    let mut per_vertex = vec![0usize; polys.len()];
    for row in &counts {
        for (acc, &hit) in per_vertex.iter_mut().zip(row) {
            if hit {
                *acc += 1;
            }
        }
    }
    let denominator = per_vertex.iter().copied().max().unwrap_or(0) as f64 / samples as f64;
    let stderr = binomial_stderr(denominator, samples);
    let caveat = "denominator is a rare-event Monte Carlo estimate; a small sample \
                  underestimates it and inflates the bound"
        .to_string();
    if denominator == 0.0 {
        return Ok(FacetBoundEstimate {
            lower_bound: f64::INFINITY,
            numerator,
            denominator,
            denominator_stderr: stderr,
            infinite: true,
            caveat,
        });
    }
    Ok(FacetBoundEstimate {
        lower_bound: numerator / denominator,
        numerator,
        denominator,
        denominator_stderr: stderr,
        infinite: false,
        caveat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyspace::ExponentVector;
    use approx::assert_relative_eq;

    #[test]
    fn lemma2_values_against_chi_square() {
        let r = lemma2_experiment(100, &[0.0, 0.1, 0.2, 0.3, 0.4], 50_000, 3).unwrap();
        // exact oracle: P(χ²₁₀₀ ≤ 70)
        let chi = ChiSquared::new(100.0).unwrap();
        let exact = chi.cdf(70.0);
        let i = 3; // ε = 0.3
        assert_relative_eq!(r.theoretical_bounds[i].unwrap(), (-2.25f64).exp(), epsilon = 1e-12);
        assert!((r.empirical_probs[i] - exact).abs() < 5.0 * (r.stderrs[i] + 1e-4));
        assert!((exact - 0.009).abs() < 0.002, "oracle sanity: {exact}");
        // ε = 0: the bound degenerates to 1 and dominates trivially
        assert_relative_eq!(r.theoretical_bounds[0].unwrap(), 1.0);
        assert!(r.empirical_probs[0] <= 1.0);
        // bounds decrease along the grid
        for w in r.theoretical_bounds.windows(2) {
            assert!(w[1].unwrap() <= w[0].unwrap());
        }
    }

    #[test]
    fn lemma2_reproducible() {
        let a = lemma2_experiment(20, &[0.2, 0.4], 20_000, 9).unwrap();
        let b = lemma2_experiment(20, &[0.2, 0.4], 20_000, 9).unwrap();
        assert_eq!(a.empirical_probs, b.empirical_probs);
    }

    fn hyperbolic() -> HomogeneousPolynomial<f64> {
        let mut f = HomogeneousPolynomial::zero(2, 2);
        f.add_term(ExponentVector(vec![2, 0]), 1.0).unwrap();
        f.add_term(ExponentVector(vec![0, 2]), -1.0).unwrap();
        f
    }

    #[test]
    fn lemma1_hyperbolic_quadratic() {
        let f = hyperbolic();
        let t_min = 4.0f64.sqrt();
        let grid: Vec<f64> = vec![t_min, 1.2 * t_min, 1.5 * t_min, 2.0 * t_min];
        let r = lemma1_experiment(&f, &grid, 100_000, 5).unwrap();
        assert!(r.fit_slope < 0.0);
        // x₁² − x₂² = 2·x₁x₂' in rotated coordinates; P(|f| ≥ 4·‖f‖₂) with
        // ‖f‖₂ on the sphere — just check the tail is already small
        let last = *r.empirical_probs.last().unwrap();
        assert!(last < 0.05, "tail at t = 2√(n+2d): {last}");
        assert!(r.empirical_probs.iter().all(|&p| (0.0..=1.0).contains(&p)));
    }

    #[test]
    fn lemma1_rejects_nonzero_mean() {
        let f = HomogeneousPolynomial::monomial(2, ExponentVector(vec![2, 0]), 1.0).unwrap();
        assert!(matches!(
            lemma1_experiment(&f, &[2.0], 10_000, 1),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn lemma1_stderr_scales_with_samples() {
        let f = hyperbolic();
        let grid = vec![2.0];
        let small = lemma1_experiment(&f, &grid, 25_000, 7).unwrap();
        let large = lemma1_experiment(&f, &grid, 100_000, 7).unwrap();
        if small.stderrs[0] > 0.0 && large.stderrs[0] > 0.0 {
            let ratio = small.stderrs[0] / large.stderrs[0];
            assert!((ratio - 2.0).abs() < 0.6, "4x samples should halve stderr: {ratio}");
        }
    }

    #[test]
    fn numerator_bound_from_the_argument() {
        // with threshold n/2 the numerator is at least 1 − e^{−n/16}
        for n in [10usize, 50, 100] {
            let chi = ChiSquared::new(n as f64).unwrap();
            let p = 1.0 - chi.cdf(n as f64 / 2.0);
            assert!(p >= 1.0 - (-(n as f64) / 16.0).exp(), "n = {n}");
        }
    }

    #[test]
    fn facet_bound_on_coordinate_hull() {
        let cache = SphereMomentCache::new();
        let e = Subspace::full(3, 1, &cache).unwrap();
        let mut vertices = Vec::new();
        for i in 0..3 {
            let mut v = vec![0.0; 3];
            v[i] = 1.0;
            let phi = e.phi(&v).unwrap().coords;
            let neg: Vec<f64> = phi.iter().map(|c| -c).collect();
            vertices.push(phi);
            vertices.push(neg);
        }
        let p = PolytopeV::new(e.basis_ref(), vertices, true).unwrap();
        let t = default_facet_threshold(3, 1);
        let est = facet_lower_bound_estimate(&e, &p, t, 100_000, 11).unwrap();
        assert!(est.infinite || est.lower_bound >= 1.0, "{est:?}");
        assert!(est.numerator > 0.0 && est.numerator <= 1.0);
    }

    #[test]
    fn facet_bound_grows_when_vertices_shrink() {
        let cache = SphereMomentCache::new();
        let e = Subspace::full(3, 1, &cache).unwrap();
        let base: Vec<Vec<f64>> = (0..3)
            .flat_map(|i| {
                let mut v = vec![0.0; 3];
                v[i] = 1.0;
                let phi = e.phi(&v).unwrap().coords;
                let neg: Vec<f64> = phi.iter().map(|c| -c).collect();
                [phi, neg]
            })
            .collect();
        let shrunk: Vec<Vec<f64>> = base
            .iter()
            .map(|v| v.iter().map(|c| 0.5 * c).collect())
            .collect();
        let p_big = PolytopeV::new(e.basis_ref(), base, true).unwrap();
        let p_small = PolytopeV::new(e.basis_ref(), shrunk, true).unwrap();
        // moderate threshold so both denominators are observable
        let t = 2.6;
        let big = facet_lower_bound_estimate(&e, &p_big, t, 200_000, 13).unwrap();
        let small = facet_lower_bound_estimate(&e, &p_small, t, 200_000, 13).unwrap();
        assert!(!big.infinite);
        let small_bound = if small.infinite { f64::INFINITY } else { small.lower_bound };
        assert!(
            small_bound >= big.lower_bound,
            "shrunken vertices must not lower the bound: {small_bound} vs {}",
            big.lower_bound
        );
    }
}
