//! Subspaces `E ∋ r` of the polynomial space, reproducing kernels, the
//! evaluation map `φ_E`, and the mean-zero geometry behind the duality
//! between `B(E)` and the base of the nonnegative cone.

use crate::polyspace::{
    inner_product, monomial_count, norm1, norm2, HomogeneousPolynomial, SphereMomentCache,
};
use crate::scalar::{from_usize, lit, Real};
use crate::{mc, Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Residual threshold below which a Gram–Schmidt step is a breakdown.
const BREAKDOWN: f64 = 1e-12;

/// A subspace of `P_{n,2d}` containing `r`, with an orthonormal basis whose
/// first element is `r` itself. The remaining `m − 1` elements span the
/// mean-zero part `U(E)` and are the coordinate frame for [`EvalVector`]s.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct Subspace<T: Real> {
    pub generators: Vec<HomogeneousPolynomial<T>>,
    pub ortho_basis: Vec<HomogeneousPolynomial<T>>,
    pub m: usize,
    pub contains_r: bool,
}

/// Coordinates of a point of `U(E)` in the mean-zero basis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct EvalVector<T: Real> {
    pub coords: Vec<T>,
    pub source_point: Option<Vec<T>>,
}

impl<T: Real> EvalVector<T> {
    pub fn norm(&self) -> T {
        self.coords.iter().map(|&c| c * c).sum::<T>().sqrt()
    }
}

/// Modified Gram–Schmidt with one re-orthogonalization pass.
/// Returns the normalized residual, or `None` on breakdown.
fn orthogonalize_against<T: Real>(
    p: &HomogeneousPolynomial<T>,
    basis: &[HomogeneousPolynomial<T>],
    cache: &SphereMomentCache<T>,
) -> Result<Option<HomogeneousPolynomial<T>>> {
    let original_norm = norm2(p, cache);
    if original_norm == T::zero() {
        return Ok(None);
    }
    let mut res = p.clone();
    for _ in 0..2 {
        for b in basis {
            let c = inner_product(&res, b, cache)?;
            res = res.sub(&b.scale(c))?;
        }
    }
    let res_norm = norm2(&res, cache);
    if res_norm <= lit::<T>(BREAKDOWN).sqrt() * original_norm {
        return Ok(None);
    }
    Ok(Some(res.scale(T::one() / res_norm)))
}

/// Builds a [`Subspace`] from generators, pinning `r` as the first
/// orthonormal basis vector.
///
/// Fails if the generators are linearly dependent (Gram condition number
/// above 1e12 or a Gram–Schmidt breakdown) or if `r` is not in their span.
pub fn orthonormalize<T: Real>(
    generators: Vec<HomogeneousPolynomial<T>>,
    cache: &SphereMomentCache<T>,
) -> Result<Subspace<T>> {
    if generators.is_empty() {
        return Err(Error::InvalidInput("no generators".into()));
    }
    let n = generators[0].n();
    let two_d = generators[0].degree();
    if two_d == 0 || two_d % 2 != 0 {
        return Err(Error::InvalidInput(format!("degree {two_d} is not even positive")));
    }
    for g in &generators {
        if g.n() != n || g.degree() != two_d {
            return Err(Error::DimensionMismatch(
                "generators live in different polynomial spaces".into(),
            ));
        }
    }
    if generators.len() > monomial_count(n, two_d) {
        return Err(Error::DegenerateInput(format!(
            "{} generators exceed dim P_{{{n},{two_d}}}",
            generators.len()
        )));
    }

    // Independence: Gram–Schmidt over the raw generators.
    let mut raw_basis: Vec<HomogeneousPolynomial<T>> = Vec::new();
    for (i, g) in generators.iter().enumerate() {
        match orthogonalize_against(g, &raw_basis, cache)? {
            Some(q) => raw_basis.push(q),
            None => {
                return Err(Error::DegenerateInput(format!(
                    "generator {i} is linearly dependent on the earlier ones"
                )))
            }
        }
    }

    // Gram condition number of the normalized generators.
    let k = generators.len();
    let mut gram = DMatrix::<T>::zeros(k, k);
    let norms: Vec<T> = generators.iter().map(|g| norm2(g, cache)).collect();
    for i in 0..k {
        for j in i..k {
            let v = inner_product(&generators[i], &generators[j], cache)? / (norms[i] * norms[j]);
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    let eig = gram.symmetric_eigenvalues();
    let max_e = eig.iter().fold(T::zero(), |a, &b| a.max(b));
    let min_e = eig.iter().fold(max_e, |a, &b| a.min(b));
    if !(min_e > T::zero()) || max_e / min_e > lit(1e12) {
        return Err(Error::DegenerateInput(format!(
            "generator Gram matrix condition number exceeds 1e12 (eigenvalue range [{:?}, {:?}])",
            min_e, max_e
        )));
    }

    // r must lie in the span.
    let r = HomogeneousPolynomial::r(n, two_d / 2);
    let mut r_res = r.clone();
    for b in &raw_basis {
        let c = inner_product(&r_res, b, cache)?;
        r_res = r_res.sub(&b.scale(c))?;
    }
    if norm2(&r_res, cache) > lit(1e-9) {
        return Err(Error::Structural(
            "r = (x_1^2 + ... + x_n^2)^d is not in the span of the generators".into(),
        ));
    }

    // Final basis with r pinned first; exactly one generator is absorbed.
    let mut basis = vec![r];
    for g in &generators {
        if let Some(q) = orthogonalize_against(g, &basis, cache)? {
            basis.push(q);
        }
    }
    if basis.len() != generators.len() {
        return Err(Error::Internal(format!(
            "pinned basis has {} elements for {} independent generators",
            basis.len(),
            generators.len()
        )));
    }

    Ok(Subspace {
        m: basis.len(),
        generators,
        ortho_basis: basis,
        contains_r: true,
    })
}

impl<T: Real> Subspace<T> {
    /// Full orthonormalized space `P_{n,2d}` itself.
    pub fn full(n: usize, d: u32, cache: &SphereMomentCache<T>) -> Result<Subspace<T>> {
        let mut gens = vec![HomogeneousPolynomial::r(n, d)];
        for e in crate::polyspace::enumerate_exponents(n, 2 * d) {
            gens.push(HomogeneousPolynomial::monomial(n, e, T::one())?);
        }
        // r duplicates one dimension of the monomial span; drop the last
        // monomial to keep the generator list independent.
        gens.pop();
        orthonormalize(gens, cache)
    }

    /// Even symmetric sextics `span{M_2^3, M_6, M_2 M_4}` in `n ≥ 3` variables.
    pub fn even_symmetric_sextics(n: usize, cache: &SphereMomentCache<T>) -> Result<Subspace<T>> {
        let power_sum = |k: u32| -> HomogeneousPolynomial<T> {
            let mut p = HomogeneousPolynomial::zero(n, k);
            for i in 0..n {
                let mut e = vec![0u32; n];
                e[i] = k;
                p.add_term(crate::polyspace::ExponentVector(e), T::one()).unwrap();
            }
            p
        };
        let m2 = power_sum(2);
        let m4 = power_sum(4);
        let m6 = power_sum(6);
        let gens = vec![
            m2.mul(&m2).unwrap().mul(&m2).unwrap(),
            m6,
            m2.mul(&m4).unwrap(),
        ];
        orthonormalize(gens, cache)
    }

    pub fn n(&self) -> usize {
        self.ortho_basis[0].n()
    }

    pub fn two_d(&self) -> u32 {
        self.ortho_basis[0].degree()
    }

    /// First basis vector, `r` normalized (already unit norm).
    pub fn r(&self) -> &HomogeneousPolynomial<T> {
        &self.ortho_basis[0]
    }

    /// Orthonormal basis of the mean-zero subspace `U(E)`.
    pub fn mean_zero_basis(&self) -> &[HomogeneousPolynomial<T>] {
        &self.ortho_basis[1..]
    }

    /// Hash identifying the orthonormal basis, used to tie polytopes to
    /// their coordinate frame.
    pub fn basis_ref(&self) -> String
    where
        T: Serialize,
    {
        let bytes = serde_json::to_vec(&self.ortho_basis).expect("basis serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Projection of the reproducing kernel: `Π_E(p_v) = Σ u_i(v) u_i`.
    pub fn reproducing_kernel(&self, v: &[T]) -> Result<HomogeneousPolynomial<T>> {
        let mut out = HomogeneousPolynomial::zero(self.n(), self.two_d());
        for u in &self.ortho_basis {
            let uv = crate::polyspace::evaluate(u, v)?;
            out = out.add(&u.scale(uv))?;
        }
        Ok(out)
    }

    /// Evaluation vector `φ_E(v) = Π_E(p_v) − r` in mean-zero coordinates.
    ///
    /// With `r` pinned first, the coordinates are simply `u_i(v)` for the
    /// trailing basis polynomials.
    pub fn phi(&self, v: &[T]) -> Result<EvalVector<T>> {
        if self.m < 2 {
            return Err(Error::Structural(
                "U(E) is trivial for a one-dimensional subspace".into(),
            ));
        }
        let coords = self
            .mean_zero_basis()
            .iter()
            .map(|u| crate::polyspace::evaluate(u, v))
            .collect::<Result<Vec<T>>>()?;
        Ok(EvalVector { coords, source_point: Some(v.to_vec()) })
    }

    /// Reconstructs the mean-zero polynomial with the given coordinates.
    pub fn from_mean_zero_coords(&self, coords: &[T]) -> Result<HomogeneousPolynomial<T>> {
        if coords.len() != self.m - 1 {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates for a {}-dimensional mean-zero space",
                coords.len(),
                self.m - 1
            )));
        }
        let mut out = HomogeneousPolynomial::zero(self.n(), self.two_d());
        for (u, &c) in self.mean_zero_basis().iter().zip(coords) {
            out = out.add(&u.scale(c))?;
        }
        Ok(out)
    }

    /// Coordinates of `f ∈ E` in the full pinned basis (`r` first).
    pub fn project(
        &self,
        f: &HomogeneousPolynomial<T>,
        cache: &SphereMomentCache<T>,
    ) -> Result<Vec<T>> {
        self.ortho_basis
            .iter()
            .map(|u| inner_product(f, u, cache))
            .collect()
    }

    /// Residual norm of `f` outside the subspace.
    pub fn residual_norm(
        &self,
        f: &HomogeneousPolynomial<T>,
        cache: &SphereMomentCache<T>,
    ) -> Result<T> {
        let coords = self.project(f, cache)?;
        let mut res = f.clone();
        for (u, &c) in self.ortho_basis.iter().zip(&coords) {
            res = res.sub(&u.scale(c))?;
        }
        Ok(norm2(&res, cache))
    }
}

/// Empirical isotropy statistics of the pushforward measure of `φ_E`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct IsotropyReport<T: Real> {
    /// `‖(1/s) Σ φφᵀ − I‖_F / √(m−1)`
    pub covariance_deviation: T,
    /// `‖(1/s) Σ φ‖₂`
    pub mean_deviation: T,
    /// `(1/s) Σ ‖φ‖₂²`, which should approach `m − 1`
    pub avg_squared_norm: T,
    pub samples: usize,
}

/// Samples `φ_E(v)` for uniform `v` and compares the empirical covariance
/// and centroid against the identity and the origin.
pub fn isotropy_check<T: Real>(
    subspace: &Subspace<T>,
    samples: usize,
    seed: u64,
) -> Result<IsotropyReport<T>> {
    if samples < 10_000 {
        return Err(Error::InvalidInput(format!(
            "isotropy check needs at least 1e4 samples, got {samples}"
        )));
    }
    let p = subspace.m - 1;
    let n = subspace.n();
    let draws: Vec<Vec<T>> = mc::chunked(seed, samples, |rng| {
        let v: Vec<T> = mc::unit_vector(n, rng);
        subspace.phi(&v).unwrap().coords
    });
    let mut cov = DMatrix::<T>::zeros(p, p);
    let mut mean = vec![T::zero(); p];
    let mut sq = T::zero();
    for phi in &draws {
        for i in 0..p {
            mean[i] += phi[i];
            sq += phi[i] * phi[i];
            for j in 0..p {
                cov[(i, j)] += phi[i] * phi[j];
            }
        }
    }
    let s = from_usize::<T>(samples);
    let mut frob = T::zero();
    for i in 0..p {
        for j in 0..p {
            let target = if i == j { T::one() } else { T::zero() };
            let dev = cov[(i, j)] / s - target;
            frob += dev * dev;
        }
    }
    let mean_norm = mean.iter().map(|&x| (x / s) * (x / s)).sum::<T>().sqrt();
    Ok(IsotropyReport {
        covariance_deviation: frob.sqrt() / from_usize::<T>(p).sqrt(),
        mean_deviation: mean_norm,
        avg_squared_norm: sq / s,
        samples,
    })
}

/// Lower estimate of `M(E) = max ‖f‖₂²/‖f‖₁²` by multi-start coordinate
/// ascent over unit coefficient vectors, checked against the `2^{2d}` cap.
pub fn m_ratio_estimate<T: Real>(
    subspace: &Subspace<T>,
    trials: usize,
    seed: u64,
) -> Result<T> {
    if trials < 100 {
        return Err(Error::InvalidInput(format!(
            "M(E) estimate needs at least 100 trials, got {trials}"
        )));
    }
    let cache = SphereMomentCache::new();
    let norm1_samples = 4_000;
    let ratio = |coords: &[T]| -> T {
        let f = poly_from_full_coords(subspace, coords);
        let n2 = norm2(&f, &cache);
        if n2 == T::zero() {
            return T::zero();
        }
        let (n1, _) = norm1(&f, norm1_samples, mc::subseed(seed, "m-ratio-norm1")).unwrap();
        if n1 == T::zero() {
            return T::zero();
        }
        (n2 * n2) / (n1 * n1)
    };
    let m = subspace.m;
    let mut best = T::zero();
    let restarts = (trials / 20).max(3);
    let sweeps = trials / restarts;
    let mut rng = mc::stream(mc::subseed(seed, "m-ratio"), 0);
    for _ in 0..restarts {
        let mut x: Vec<T> = mc::unit_vector(m, &mut rng);
        let mut fx = ratio(&x);
        let mut step = lit::<T>(0.5);
        for _ in 0..sweeps {
            let mut improved = false;
            for i in 0..m {
                for sign in [T::one(), -T::one()] {
                    let mut y = x.clone();
                    y[i] += sign * step;
                    let norm = y.iter().map(|&c| c * c).sum::<T>().sqrt();
                    for c in &mut y {
                        *c /= norm;
                    }
                    let fy = ratio(&y);
                    if fy > fx {
                        x = y;
                        fx = fy;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= lit(0.5);
                if step < lit(1e-3) {
                    break;
                }
            }
        }
        best = best.max(fx);
    }
    let cap = lit::<T>(2.0).powi(subspace.two_d() as i32);
    if best > cap * lit(1.05) {
        return Err(Error::Internal(format!(
            "M(E) estimate {:?} exceeds the 2^(2d) = {:?} bound",
            best, cap
        )));
    }
    Ok(best)
}

fn poly_from_full_coords<T: Real>(subspace: &Subspace<T>, coords: &[T]) -> HomogeneousPolynomial<T> {
    let mut f = HomogeneousPolynomial::zero(subspace.n(), subspace.two_d());
    for (u, &c) in subspace.ortho_basis.iter().zip(coords) {
        f = f.add(&u.scale(c)).unwrap();
    }
    f
}

/// Membership of `f` in the unit-mean base of the nonnegative cone.
///
/// `min_oracle` must return the minimum of its argument over the sphere.
pub fn pos_base_membership<T: Real>(
    subspace: &Subspace<T>,
    f: &HomogeneousPolynomial<T>,
    cache: &SphereMomentCache<T>,
    min_oracle: impl Fn(&HomogeneousPolynomial<T>) -> Result<T>,
) -> Result<bool> {
    if subspace.residual_norm(f, cache)? > lit(1e-7) {
        return Err(Error::InvalidInput("polynomial is not in the subspace".into()));
    }
    let mean = inner_product(f, subspace.r(), cache)?;
    if (mean - T::one()).abs() > lit(1e-9) {
        return Ok(false);
    }
    Ok(min_oracle(f)? >= lit(-1e-9))
}
