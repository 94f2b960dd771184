//! Polytope approximations to the convex body `B(E)` and, dually, to the
//! shifted base `P̃os_E − r` of the nonnegative cone: the deterministic
//! sparsified pair `(P, Q)`, the tensor-power refinement `Q_k`, and the
//! randomized construction `K_α`.
//!
//! All polytopes carry coordinates in the mean-zero basis of their subspace
//! and record the `basis_ref` hash of that basis.

mod mvee;
mod tensor;

pub use mvee::{loewner_position, LoewnerTransform};
pub use tensor::{binomial, sym_power_dim, tensor_lift};

use crate::kernel::{EvalVector, Subspace};
use crate::scalar::{from_usize, lit, Real};
use crate::sparsifier::{bss_sparsify, VectorSystem};
use crate::{mc, Error, Result};
use serde::{Deserialize, Serialize};

/// How a facet normal was obtained; used to certify the inner inclusion
/// `P̃os_E − r ⊆ K` without re-deriving the construction.
#[derive(Clone, Debug, PartialEq)]
pub enum FacetSource<T: Real> {
    /// `normal = scale · φ_E(point)`; exact whenever `scale ≤ 1`.
    Eval { point: Vec<T>, scale: T },
    /// `normal = −scale · φ_E(point)`; needs a membership check in `B(E)`.
    NegEval { point: Vec<T>, scale: T },
    /// Convex combination of `φ_E` points, hence in `B(E)` exactly.
    Mixture,
    /// No construction record (deserialized or derived polytope).
    Unknown,
}

/// Vertex-representation polytope in mean-zero coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct PolytopeV<T: Real> {
    pub basis_ref: String,
    pub vertices: Vec<Vec<T>>,
    pub symmetric: bool,
}

/// Facet-representation polytope: `{ y : ⟨y, x_i⟩ ≥ offset }` with
/// `offset = −1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct PolytopeH<T: Real> {
    pub basis_ref: String,
    pub normals: Vec<Vec<T>>,
    pub offset: T,
    #[serde(skip)]
    pub sources: Vec<FacetSource<T>>,
}

impl<T: Real> PolytopeV<T> {
    pub fn new(basis_ref: String, vertices: Vec<Vec<T>>, symmetric: bool) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidInput("polytope needs at least one vertex".into()));
        }
        let p = vertices[0].len();
        if vertices.iter().any(|v| v.len() != p) {
            return Err(Error::DimensionMismatch("vertices of mixed dimension".into()));
        }
        let poly = PolytopeV { basis_ref, vertices, symmetric };
        if symmetric && !poly.negation_closed(lit(1e-9)) {
            return Err(Error::Structural(
                "symmetric polytope is missing the negation of a vertex".into(),
            ));
        }
        Ok(poly)
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    fn negation_closed(&self, tol: T) -> bool {
        self.vertices.iter().all(|v| {
            self.vertices.iter().any(|w| {
                v.iter()
                    .zip(w)
                    .map(|(&a, &b)| (a + b) * (a + b))
                    .sum::<T>()
                    .sqrt()
                    <= tol
            })
        })
    }

    /// `max_i ⟨v_i, q⟩`
    pub fn support(&self, q: &[T]) -> T {
        self.vertices
            .iter()
            .map(|v| v.iter().zip(q).map(|(&a, &b)| a * b).sum::<T>())
            .fold(-T::max_value().unwrap(), |acc, s| acc.max(s))
    }

    /// Polar body `{ y : ⟨y, v_i⟩ ≥ −1 }` (equals the classical polar for
    /// symmetric polytopes).
    pub fn polar(&self) -> PolytopeH<T> {
        PolytopeH {
            basis_ref: self.basis_ref.clone(),
            normals: self.vertices.clone(),
            offset: -T::one(),
            sources: vec![FacetSource::Unknown; self.vertices.len()],
        }
    }
}

impl<T: Real> PolytopeH<T> {
    pub fn new(basis_ref: String, normals: Vec<Vec<T>>, sources: Vec<FacetSource<T>>) -> Result<Self> {
        if normals.is_empty() {
            return Err(Error::InvalidInput("polytope needs at least one facet".into()));
        }
        let p = normals[0].len();
        if normals.iter().any(|v| v.len() != p) {
            return Err(Error::DimensionMismatch("normals of mixed dimension".into()));
        }
        for x in &normals {
            if x.iter().map(|&c| c * c).sum::<T>() == T::zero() {
                return Err(Error::InvalidInput("zero facet normal".into()));
            }
        }
        let sources = if sources.is_empty() {
            vec![FacetSource::Unknown; normals.len()]
        } else if sources.len() == normals.len() {
            sources
        } else {
            return Err(Error::DimensionMismatch("one source per facet required".into()));
        };
        Ok(PolytopeH { basis_ref, normals, offset: -T::one(), sources })
    }

    pub fn dim(&self) -> usize {
        self.normals[0].len()
    }

    pub fn contains(&self, y: &[T], tol: T) -> bool {
        self.normals
            .iter()
            .all(|x| x.iter().zip(y).map(|(&a, &b)| a * b).sum::<T>() >= self.offset - tol)
    }

    /// Convex hull of the facet normals, as a V-polytope.
    pub fn normal_hull(&self) -> Result<PolytopeV<T>> {
        let symmetric = PolytopeV {
            basis_ref: self.basis_ref.clone(),
            vertices: self.normals.clone(),
            symmetric: false,
        }
        .negation_closed(lit(1e-9));
        PolytopeV::new(self.basis_ref.clone(), self.normals.clone(), symmetric)
    }
}

/// `count` i.i.d. uniform points on `S^{n-1}`, reproducible per seed.
pub fn sample_sphere<T: Real>(n: usize, count: usize, seed: u64) -> Vec<Vec<T>> {
    assert!(count >= 1, "count must be positive");
    mc::chunked(seed, count, |rng| mc::unit_vector(n, rng))
}

/// One draw from the mixture measure: `Σ a_i φ_E(v_i)` with `a` uniform on
/// the simplex `Δ^m` and `v_i` uniform on the sphere. The draw lies in
/// `B(E)` by convexity.
pub fn sample_mu<T: Real>(subspace: &Subspace<T>, seed: u64) -> Result<EvalVector<T>> {
    let mut rng = mc::stream(seed, 0);
    sample_mu_with(subspace, &mut rng)
}

pub fn sample_mu_with<T: Real>(
    subspace: &Subspace<T>,
    rng: &mut impl rand::Rng,
) -> Result<EvalVector<T>> {
    let m = subspace.m;
    if m < 2 {
        return Err(Error::Structural("mixture measure needs dim E ≥ 2".into()));
    }
    let a: Vec<T> = mc::simplex_point(m, rng);
    let mut coords = vec![T::zero(); m - 1];
    for &ai in &a {
        let v: Vec<T> = mc::unit_vector(subspace.n(), rng);
        let phi = subspace.phi(&v)?;
        for (c, &pc) in coords.iter_mut().zip(&phi.coords) {
            *c += ai * pc;
        }
    }
    Ok(EvalVector { coords, source_point: None })
}

/// Full output of the deterministic construction, including the internals
/// that the public triple omits.
#[derive(Clone, Debug)]
pub struct DeterministicBuild<T: Real> {
    pub p: PolytopeV<T>,
    pub q: PolytopeH<T>,
    pub ratio_bound: T,
    pub transform: LoewnerTransform<T>,
    /// Sphere points selected by the sparsifier.
    pub selected_points: Vec<Vec<T>>,
}

fn check_epsilon<T: Real>(epsilon: T, m: usize) -> Result<()> {
    if !(epsilon > T::zero()) || epsilon >= T::one() {
        return Err(Error::InvalidInput(format!("epsilon {:?} outside (0, 1)", epsilon)));
    }
    if epsilon * from_usize::<T>(m - 1).sqrt() < T::one() {
        log::warn!("epsilon below the 1/sqrt(m-1) guideline; facet count grows accordingly");
    }
    Ok(())
}

/// Deterministic polytope pair: `P` approximates `B(E)` from inside after
/// scaling, `Q` approximates `P̃os_E − r` from outside.
///
/// Pipeline: sample the sphere, push through `φ_E`, normalize with the MVEE
/// of the symmetrized sample, keep near-touching points, sparsify with the
/// barrier method at `ε/4`, then scale: `P` gets vertices `±√(m−1)·φ_E(v)`
/// and `Q` gets facet normals `±(√(m−1)/m^{3/2})·φ_E(v)`.
pub fn build_deterministic_full<T: Real>(
    subspace: &Subspace<T>,
    epsilon: T,
    grid_size: usize,
    seed: u64,
) -> Result<DeterministicBuild<T>>
where
    T: Serialize,
{
    let m = subspace.m;
    if m < 2 {
        return Err(Error::Structural("construction needs dim E ≥ 2".into()));
    }
    check_epsilon(epsilon, m)?;
    let p_dim = m - 1;
    let min_grid = (lit::<T>(10.0) * from_usize::<T>(p_dim) / (epsilon * epsilon))
        .ceil()
        .to_usize()
        .unwrap();
    if grid_size < min_grid {
        return Err(Error::InvalidInput(format!(
            "grid_size {grid_size} below the required 10(m-1)/eps^2 = {min_grid}"
        )));
    }

    let points = sample_sphere::<T>(subspace.n(), grid_size, mc::subseed(seed, "det-grid"));
    let phis: Vec<Vec<T>> = points
        .iter()
        .map(|v| subspace.phi(v).map(|e| e.coords))
        .collect::<Result<_>>()?;

    // MVEE of the symmetrized sample; symmetry pins the center at 0, so the
    // residual center is numerical noise and is dropped.
    let mut symmetrized = phis.clone();
    symmetrized.extend(phis.iter().map(|x| x.iter().map(|&c| -c).collect::<Vec<T>>()));
    let mut transform = loewner_position(&symmetrized)?;
    transform.center = vec![T::zero(); p_dim];
    let max_norm = phis
        .iter()
        .map(|x| transform.apply_norm(x))
        .fold(T::zero(), |a, b| a.max(b));
    if max_norm > T::one() {
        for row in &mut transform.matrix {
            for c in row {
                *c /= max_norm;
            }
        }
    }

    let threshold = T::one() - epsilon / lit(4.0);
    let near: Vec<usize> = (0..grid_size)
        .filter(|&i| transform.apply_norm(&phis[i]) >= threshold)
        .collect();
    if near.len() < p_dim {
        return Err(Error::GridTooCoarse(format!(
            "{} near-touching points for a {p_dim}-dimensional body; increase grid_size",
            near.len()
        )));
    }

    let candidates: Vec<Vec<T>> = near.iter().map(|&i| transform.apply(&phis[i])).collect();
    let system = VectorSystem::unit_weights(p_dim, candidates)?;
    let dec = bss_sparsify(&system, epsilon / lit(4.0))?;

    let scale_v = from_usize::<T>(p_dim).sqrt();
    let scale_q = scale_v / from_usize::<T>(m).sqrt().powi(3);
    let mut vertices = Vec::with_capacity(2 * dec.indices.len());
    let mut normals = Vec::with_capacity(2 * dec.indices.len());
    let mut sources = Vec::with_capacity(2 * dec.indices.len());
    let mut selected_points = Vec::with_capacity(dec.indices.len());
    for &j in &dec.indices {
        let idx = near[j];
        let phi = &phis[idx];
        selected_points.push(points[idx].clone());
        vertices.push(phi.iter().map(|&c| c * scale_v).collect::<Vec<T>>());
        vertices.push(phi.iter().map(|&c| -c * scale_v).collect::<Vec<T>>());
        normals.push(phi.iter().map(|&c| c * scale_q).collect::<Vec<T>>());
        sources.push(FacetSource::Eval { point: points[idx].clone(), scale: scale_q });
        normals.push(phi.iter().map(|&c| -c * scale_q).collect::<Vec<T>>());
        sources.push(FacetSource::NegEval { point: points[idx].clone(), scale: scale_q });
    }

    let basis_ref = subspace.basis_ref();
    let p = PolytopeV::new(basis_ref.clone(), vertices, true)?;
    let q = PolytopeH::new(basis_ref, normals, sources)?;
    let ratio_bound =
        (T::one() + lit::<T>(2.0) * epsilon) * from_usize::<T>(m).sqrt().powi(3);
    Ok(DeterministicBuild { p, q, ratio_bound, transform, selected_points })
}

pub fn build_deterministic<T: Real + Serialize>(
    subspace: &Subspace<T>,
    epsilon: T,
    grid_size: usize,
    seed: u64,
) -> Result<(PolytopeV<T>, PolytopeH<T>, T)> {
    let b = build_deterministic_full(subspace, epsilon, grid_size, seed)?;
    Ok((b.p, b.q, b.ratio_bound))
}

/// The tensorization accuracy the asymptotic analysis fixes.
pub fn default_tensor_epsilon<T: Real>() -> T {
    lit(1.0 / (2.0 * std::f64::consts::E))
}

/// Theoretical outer ratio for `Q_k`: the clean `(1+k/(m−2))^{3(m−2)/k}`
/// once `k ≥ e(m−2)`, otherwise the raw pre-Stirling bound
/// `C(m+k−2,k)^{3/(2k)} / (1−ε)^{1/k}`.
pub fn tensor_ratio_bound<T: Real>(m: usize, k: u32, epsilon: T) -> T {
    let s = (m - 2) as f64;
    if s > 0.0 && k as f64 >= std::f64::consts::E * s {
        lit((1.0 + k as f64 / s).powf(3.0 * s / k as f64))
    } else {
        let c_k = from_usize::<T>(binomial(m + k as usize - 2, k as usize))
            .powf(lit(3.0 / (2.0 * k as f64)));
        c_k / (T::one() - epsilon).powf(T::one() / lit(k as f64))
    }
}

/// Tensor-power polytope `Q_k`: runs the deterministic pipeline inside the
/// symmetric `k`-th power of the mean-zero space, then expresses the facets
/// back on `U(E)` as constraints `⟨y, s_k·φ_E(v)⟩ ≥ −1` with
/// `s_k = √(m−1)/C(m+k−2,k)^{3/(2k)}`.
pub fn build_tensorized<T: Real + Serialize>(
    subspace: &Subspace<T>,
    k: u32,
    epsilon: T,
    grid_size: usize,
    seed: u64,
) -> Result<(PolytopeH<T>, T)> {
    let m = subspace.m;
    if m < 3 {
        return Err(Error::InvalidInput("tensorization needs dim E ≥ 3".into()));
    }
    if k == 0 {
        return Err(Error::InvalidInput("tensor power must be at least 1".into()));
    }
    check_epsilon(epsilon, m)?;
    let p_dim = m - 1;
    let lift_dim = sym_power_dim(p_dim, k);
    if (k as f64) < std::f64::consts::E * (m - 2) as f64 {
        log::info!(
            "k = {k} below e(m-2); reporting the raw ratio bound instead of the asymptotic one"
        );
    }
    let min_grid = (lit::<T>(10.0) * from_usize::<T>(lift_dim) / (epsilon * epsilon))
        .ceil()
        .to_usize()
        .unwrap();
    if grid_size < min_grid {
        return Err(Error::InvalidInput(format!(
            "grid_size {grid_size} below the required 10*dim/eps^2 = {min_grid} for the lifted space"
        )));
    }

    let points = sample_sphere::<T>(subspace.n(), grid_size, mc::subseed(seed, "tensor-grid"));
    let lifted: Vec<Vec<T>> = points
        .iter()
        .map(|v| tensor_lift(&subspace.phi(v)?.coords, k))
        .collect::<Result<_>>()?;

    let mut symmetrized = lifted.clone();
    symmetrized.extend(lifted.iter().map(|x| x.iter().map(|&c| -c).collect::<Vec<T>>()));
    let mut transform = loewner_position(&symmetrized)?;
    transform.center = vec![T::zero(); lift_dim];
    let max_norm = lifted
        .iter()
        .map(|x| transform.apply_norm(x))
        .fold(T::zero(), |a, b| a.max(b));
    if max_norm > T::one() {
        for row in &mut transform.matrix {
            for c in row {
                *c /= max_norm;
            }
        }
    }

    let threshold = T::one() - epsilon / lit(4.0);
    let near: Vec<usize> = (0..grid_size)
        .filter(|&i| transform.apply_norm(&lifted[i]) >= threshold)
        .collect();
    if near.len() < lift_dim {
        return Err(Error::GridTooCoarse(format!(
            "{} near-touching lifted points for a {lift_dim}-dimensional body; increase grid_size",
            near.len()
        )));
    }
    let candidates: Vec<Vec<T>> = near.iter().map(|&i| transform.apply(&lifted[i])).collect();
    let system = VectorSystem::unit_weights(lift_dim, candidates)?;
    let dec = bss_sparsify(&system, epsilon / lit(4.0))?;

    let c_k = from_usize::<T>(binomial(m + k as usize - 2, k as usize))
        .powf(lit(3.0 / (2.0 * k as f64)));
    let s_k = from_usize::<T>(p_dim).sqrt() / c_k;
    let mut normals = Vec::with_capacity(2 * dec.indices.len());
    let mut sources = Vec::with_capacity(2 * dec.indices.len());
    for &j in &dec.indices {
        let idx = near[j];
        let phi = subspace.phi(&points[idx])?.coords;
        normals.push(phi.iter().map(|&c| c * s_k).collect::<Vec<T>>());
        sources.push(FacetSource::Eval { point: points[idx].clone(), scale: s_k });
        normals.push(phi.iter().map(|&c| -c * s_k).collect::<Vec<T>>());
        sources.push(FacetSource::NegEval { point: points[idx].clone(), scale: s_k });
    }
    let q = PolytopeH::new(subspace.basis_ref(), normals, sources)?;
    Ok((q, tensor_ratio_bound(m, k, epsilon)))
}

/// Sample count demanded by the probabilistic guarantee,
/// `⌈27 e² m² (M/(1−α))^m ln(M/(1−α))⌉`, as a float because it overflows
/// integer ranges already at desk scale.
pub fn theorem_sample_count(m: usize, m_bound: f64, alpha: f64) -> f64 {
    let ratio = m_bound / (1.0 - alpha);
    (27.0 * std::f64::consts::E.powi(2) * (m * m) as f64 * ratio.powi(m as i32) * ratio.ln())
        .ceil()
}

/// Randomized polytope `K_α`: `t` facet normals drawn i.i.d. from the
/// mixture measure. Every normal lies in `B(E)`, so the inner inclusion
/// `P̃os_E − r ⊆ K_α` holds for every draw, not just with high probability.
pub fn build_random<T: Real + Serialize>(
    subspace: &Subspace<T>,
    alpha: T,
    t_override: Option<usize>,
    m_bound: T,
    seed: u64,
) -> Result<(PolytopeH<T>, usize)> {
    if !(alpha > T::zero()) || alpha >= T::one() {
        return Err(Error::InvalidInput(format!("alpha {:?} outside (0, 1)", alpha)));
    }
    if m_bound < T::one() {
        return Err(Error::InvalidInput("M bound must be at least 1".into()));
    }
    let m = subspace.m;
    if m < 2 {
        return Err(Error::Structural("construction needs dim E ≥ 2".into()));
    }
    let formula = theorem_sample_count(
        m,
        m_bound.to_f64().unwrap(),
        alpha.to_f64().unwrap(),
    );
    let t = match t_override {
        Some(t) => {
            log::info!("using t = {t} (guarantee formula asks for {formula:.3e})");
            t
        }
        None => {
            if formula > 1e7 {
                return Err(Error::Config(format!(
                    "guarantee formula asks for {formula:.3e} samples; pass an explicit t"
                )));
            }
            formula as usize
        }
    };
    if t < m {
        log::warn!("t = {t} below dim E = {m}; the hull of the normals is degenerate");
    }
    if t == 0 {
        return Err(Error::InvalidInput("sample count must be positive".into()));
    }

    let draws: Vec<Vec<T>> = mc::chunked(mc::subseed(seed, "mu"), t, |rng| {
        sample_mu_with(subspace, rng).unwrap().coords
    });
    let sources = vec![FacetSource::Mixture; t];
    let k_alpha = PolytopeH::new(subspace.basis_ref(), draws, sources)?;
    Ok((k_alpha, t))
}

/// Indices of the convex hull of a 2-D point set, counterclockwise
/// (monotone chain). Collinear boundary points are dropped.
pub fn convex_hull_2d<T: Real>(points: &[Vec<T>]) -> Vec<usize> {
    assert!(points.iter().all(|p| p.len() == 2));
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| {
        points[a][0]
            .partial_cmp(&points[b][0])
            .unwrap()
            .then(points[a][1].partial_cmp(&points[b][1]).unwrap())
    });
    let cross = |o: usize, a: usize, b: usize| -> T {
        (points[a][0] - points[o][0]) * (points[b][1] - points[o][1])
            - (points[a][1] - points[o][1]) * (points[b][0] - points[o][0])
    };
    let build = |order: &[usize]| -> Vec<usize> {
        let mut h: Vec<usize> = Vec::new();
        for &i in order {
            while h.len() >= 2 && cross(h[h.len() - 2], h[h.len() - 1], i) <= T::zero() {
                h.pop();
            }
            h.push(i);
        }
        h.pop();
        h
    };
    let lower = build(&idx);
    let rev: Vec<usize> = idx.iter().rev().copied().collect();
    let upper = build(&rev);
    lower.into_iter().chain(upper).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::orthonormalize;
    use crate::polyspace::{HomogeneousPolynomial, SphereMomentCache};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn disc_subspace() -> Subspace<f64> {
        let cache = SphereMomentCache::new();
        Subspace::full(2, 1, &cache).unwrap()
    }

    #[test]
    fn sphere_sampler_statistics() {
        let pts = sample_sphere::<f64>(3, 100_000, 5);
        let mut mean = [0.0f64; 3];
        for p in &pts {
            for i in 0..3 {
                mean[i] += p[i];
            }
        }
        for m in &mut mean {
            *m /= pts.len() as f64;
            assert!(m.abs() < 0.02, "coordinate mean {m}");
        }
        assert!(pts.iter().all(|p| {
            let n: f64 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            (n - 1.0).abs() < 0.01
        }));
    }

    #[test]
    fn sphere_sampler_reproducible() {
        assert_eq!(sample_sphere::<f64>(4, 1, 9), sample_sphere::<f64>(4, 1, 9));
    }

    #[test]
    fn mu_samples_stay_inside_b() {
        let e = disc_subspace();
        // B(E) for the full quadratic space on the circle is the disc of
        // radius √2 centered at 0: h_B is the Euclidean norm times √2.
        for s in 0..1000u64 {
            let x = sample_mu(&e, s).unwrap();
            assert!(x.norm() <= 2.0f64.sqrt() + 1e-9, "‖x‖ = {}", x.norm());
        }
    }

    #[test]
    fn mu_needs_nontrivial_mean_zero_space() {
        let cache = SphereMomentCache::new();
        let e = orthonormalize(vec![HomogeneousPolynomial::<f64>::r(3, 1)], &cache).unwrap();
        assert!(matches!(sample_mu(&e, 1), Err(Error::Structural(_))));
    }

    #[test]
    fn deterministic_build_shapes() {
        let e = disc_subspace();
        let eps = 0.6;
        let b = build_deterministic_full(&e, eps, 200, 17).unwrap();
        let m = 3usize;
        let facet_cap = 2 * ((16.0 * (m - 1) as f64 / (eps * eps)).ceil() as usize);
        assert!(b.q.normals.len() <= facet_cap, "{} facets", b.q.normals.len());
        assert_eq!(b.p.vertices.len(), b.q.normals.len());
        assert!(b.p.symmetric);
        assert_relative_eq!(b.ratio_bound, 2.2 * 27.0f64.sqrt(), epsilon = 1e-9);
        // vertex norms in transformed coordinates stay below √(m−1)
        let cap = (m as f64 - 1.0).sqrt() + 1e-6;
        for v in &b.p.vertices {
            assert!(b.transform.apply_norm(v) <= cap);
        }
    }

    #[test]
    fn deterministic_build_lower_containment() {
        let e = disc_subspace();
        let eps = 0.6;
        let b = build_deterministic_full(&e, eps, 300, 18).unwrap();
        let mut rng = mc::stream(19, 0);
        for _ in 0..1000 {
            let q: Vec<f64> = mc::unit_vector(2, &mut rng);
            // support in transformed coordinates: q pulled back through Lᵀ
            let lt = b.transform.matrix_view().transpose();
            let pulled = lt * nalgebra::DVector::from_column_slice(&q);
            let h = b.p.support(pulled.as_slice());
            assert!(h >= 1.0 - eps - 0.05, "h_P = {h}");
        }
    }

    #[test]
    fn deterministic_build_grid_too_small_is_error() {
        let e = disc_subspace();
        assert!(matches!(
            build_deterministic(&e, 0.6, 20, 1),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn deterministic_facet_normals_scale_below_one() {
        // scale √(m−1)/m^{3/2} < 1 keeps every positive facet inside B(E)
        let e = disc_subspace();
        let b = build_deterministic_full(&e, 0.6, 200, 21).unwrap();
        for s in &b.q.sources {
            match s {
                FacetSource::Eval { scale, .. } | FacetSource::NegEval { scale, .. } => {
                    assert!(*scale < 1.0)
                }
                _ => panic!("unexpected source {s:?}"),
            }
        }
    }

    #[test]
    fn tensor_ratio_bound_values() {
        assert_relative_eq!(tensor_ratio_bound::<f64>(3, 3, 0.1), 4.0, epsilon = 1e-12);
        assert_relative_eq!(
            tensor_ratio_bound::<f64>(3, 9, 0.1),
            10.0f64.powf(1.0 / 3.0),
            epsilon = 1e-12
        );
        // asymptotic branch decreases in k
        let mut last = f64::INFINITY;
        for k in 3..20 {
            let b = tensor_ratio_bound::<f64>(3, k, 0.1);
            assert!(b < last);
            last = b;
        }
    }

    #[test]
    fn tensorized_build_facet_budget() {
        let e = disc_subspace();
        let eps = default_tensor_epsilon::<f64>();
        for k in 1..=3u32 {
            let lift_dim = sym_power_dim(2, k);
            let grid = ((10.0 * lift_dim as f64 / (eps * eps)).ceil() as usize).max(300);
            let (q, bound) = build_tensorized(&e, k, eps, grid, 23).unwrap();
            let c = 16.0;
            let cap = 2 * ((lift_dim as f64 * c / (eps * eps)).ceil() as usize);
            assert!(q.normals.len() <= cap, "k={k}: {} facets", q.normals.len());
            assert!(bound > 1.0);
        }
    }

    #[test]
    fn random_build_reproducible_and_sourced() {
        let e = disc_subspace();
        let (a, ta) = build_random(&e, 0.5, Some(100), 4.0, 7).unwrap();
        let (b, tb) = build_random(&e, 0.5, Some(100), 4.0, 7).unwrap();
        assert_eq!(ta, tb);
        assert_eq!(a.normals, b.normals);
        assert_eq!(ta, 100);
        assert!(a.sources.iter().all(|s| *s == FacetSource::Mixture));
    }

    #[test]
    fn theorem_sample_count_formula() {
        let t = theorem_sample_count(3, 16.0, 0.5);
        assert!((t / 2.04e8 - 1.0).abs() < 0.01, "t = {t:.4e}");
    }

    #[test]
    fn random_build_without_override_hits_guard() {
        let e = disc_subspace();
        assert!(matches!(
            build_random(&e, 0.5, None, 16.0, 1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn hull_square() {
        let pts = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
            vec![0.5, 0.5],
        ];
        let h = convex_hull_2d(&pts);
        assert_eq!(h.len(), 4);
        assert!(!h.contains(&4));
    }

    proptest! {
        #[test]
        fn polarity_round_trip(seed in 0u64..500) {
            // random symmetric 2-D polytope: hull vertices must lie on
            // facet hyperplanes of the double polar
            let mut rng = mc::stream(seed, 0);
            let mut pts: Vec<Vec<f64>> = (0..8)
                .map(|_| mc::gaussian_vector(2, &mut rng))
                .collect();
            let negs: Vec<Vec<f64>> = pts.iter().map(|p| vec![-p[0], -p[1]]).collect();
            pts.extend(negs);
            let hull = convex_hull_2d(&pts);
            let verts: Vec<Vec<f64>> = hull.iter().map(|&i| pts[i].clone()).collect();
            let p = PolytopeV::new("test".into(), verts.clone(), true).unwrap();
            let double = p.polar().normal_hull();
            let double = double.unwrap();
            // facets of (P°)° are the hull edges of the original vertex set;
            // each vertex must lie on at least one of them
            let hull2 = convex_hull_2d(&double.vertices);
            let k = hull2.len();
            for v in &verts {
                let mut on_facet = false;
                for e in 0..k {
                    let a = &double.vertices[hull2[e]];
                    let b = &double.vertices[hull2[(e + 1) % k]];
                    // hyperplane through a and b
                    let normal = [b[1] - a[1], a[0] - b[0]];
                    let off = normal[0] * a[0] + normal[1] * a[1];
                    let val = normal[0] * v[0] + normal[1] * v[1];
                    if (val - off).abs() <= 1e-8 * (1.0 + off.abs()) {
                        on_facet = true;
                        break;
                    }
                }
                prop_assert!(on_facet);
            }
        }
    }
}
