//! Calculus for homogeneous polynomials on the unit sphere: evaluation,
//! exact inner products via closed-form monomial moments, 2-norms, and
//! Monte Carlo 1-norms.

use crate::mc;
use crate::scalar::{from_usize, lit, ln_gamma, Real};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;

/// Monomial exponents; entries sum to the polynomial degree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExponentVector(pub Vec<u32>);

impl ExponentVector {
    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Exponentwise sum, the exponent of a monomial product.
    pub fn plus(&self, other: &ExponentVector) -> ExponentVector {
        ExponentVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

/// Sparse homogeneous polynomial of even degree `two_d` in `n` variables.
///
/// Zero coefficients are never stored, so structural equality of the term
/// maps is polynomial equality. Term order is lexicographic by exponents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyRepr<T>", into = "PolyRepr<T>")]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct HomogeneousPolynomial<T: Real> {
    n: usize,
    two_d: u32,
    terms: BTreeMap<ExponentVector, T>,
}

#[derive(Serialize, Deserialize)]
struct TermRepr<T> {
    exps: Vec<u32>,
    coef: T,
}

#[derive(Serialize, Deserialize)]
struct PolyRepr<T> {
    n: usize,
    degree: u32,
    terms: Vec<TermRepr<T>>,
}

impl<T: Real + Serialize> From<HomogeneousPolynomial<T>> for PolyRepr<T> {
    fn from(p: HomogeneousPolynomial<T>) -> Self {
        PolyRepr {
            n: p.n,
            degree: p.two_d,
            terms: p
                .terms
                .into_iter()
                .map(|(e, c)| TermRepr { exps: e.0, coef: c })
                .collect(),
        }
    }
}

impl<T: Real> TryFrom<PolyRepr<T>> for HomogeneousPolynomial<T> {
    type Error = Error;

    fn try_from(repr: PolyRepr<T>) -> Result<Self> {
        let mut p = HomogeneousPolynomial::zero(repr.n, repr.degree);
        for t in repr.terms {
            p.add_term(ExponentVector(t.exps), t.coef)?;
        }
        Ok(p)
    }
}

impl<T: Real> HomogeneousPolynomial<T> {
    pub fn zero(n: usize, two_d: u32) -> Self {
        HomogeneousPolynomial { n, two_d, terms: BTreeMap::new() }
    }

    /// Single monomial `coef * x^alpha`.
    pub fn monomial(n: usize, alpha: ExponentVector, coef: T) -> Result<Self> {
        let two_d = alpha.degree();
        let mut p = Self::zero(n, two_d);
        p.add_term(alpha, coef)?;
        Ok(p)
    }

    /// `r = (x_1^2 + ... + x_n^2)^d`, identically 1 on the sphere.
    pub fn r(n: usize, d: u32) -> Self {
        assert!(d > 0, "degree must be positive");
        let mut sum_sq = Self::zero(n, 2);
        for i in 0..n {
            let mut e = vec![0u32; n];
            e[i] = 2;
            sum_sq.add_term(ExponentVector(e), T::one()).unwrap();
        }
        let mut out = sum_sq.clone();
        for _ in 1..d {
            out = out.mul(&sum_sq).unwrap();
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.two_d
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, &T)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coef(&self, alpha: &ExponentVector) -> T {
        self.terms.get(alpha).copied().unwrap_or_else(T::zero)
    }

    /// Adds `coef * x^alpha`, dropping the term if it cancels to zero.
    pub fn add_term(&mut self, alpha: ExponentVector, coef: T) -> Result<()> {
        if alpha.n() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "exponent vector has {} entries, polynomial has {} variables",
                alpha.n(),
                self.n
            )));
        }
        if alpha.degree() != self.two_d {
            return Err(Error::InvalidInput(format!(
                "term degree {} != polynomial degree {}",
                alpha.degree(),
                self.two_d
            )));
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(alpha) {
            Entry::Vacant(slot) => {
                if coef != T::zero() {
                    slot.insert(coef);
                }
            }
            Entry::Occupied(mut slot) => {
                let updated = *slot.get() + coef;
                if updated == T::zero() {
                    slot.remove();
                } else {
                    *slot.get_mut() = updated;
                }
            }
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (e, &c) in other.terms() {
            out.add_term(e.clone(), c)?;
        }
        Ok(out)
    }

    pub fn scale(&self, s: T) -> Self {
        if s == T::zero() {
            return Self::zero(self.n, self.two_d);
        }
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= s;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-T::one()))
    }

    /// Polynomial product, degrees add.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(
                "product of polynomials in different variable counts".into(),
            ));
        }
        let mut out = Self::zero(self.n, self.two_d + other.two_d);
        for (ea, &ca) in self.terms() {
            for (eb, &cb) in other.terms() {
                out.add_term(ea.plus(eb), ca * cb)?;
            }
        }
        Ok(out)
    }

    /// Partial derivative with respect to variable `i`.
    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(self.n, self.two_d.saturating_sub(1));
        for (e, &c) in self.terms() {
            if e.0[i] > 0 {
                let mut exps = e.0.clone();
                exps[i] -= 1;
                out.add_term(ExponentVector(exps), c * from_usize(e.0[i] as usize))
                    .unwrap();
            }
        }
        out
    }

    /// Raw evaluation at an arbitrary point (no unit-norm requirement).
    pub fn eval_raw(&self, v: &[T]) -> Result<T> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "point has {} coordinates, polynomial has {} variables",
                v.len(),
                self.n
            )));
        }
        let mut acc = T::zero();
        for (e, &c) in self.terms() {
            let mut m = c;
            for (i, &ei) in e.0.iter().enumerate() {
                if ei > 0 {
                    m *= v[i].powi(ei as i32);
                }
            }
            acc += m;
        }
        Ok(acc)
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.two_d != other.two_d {
            return Err(Error::DimensionMismatch(format!(
                "({} vars, deg {}) vs ({} vars, deg {})",
                self.n, self.two_d, other.n, other.two_d
            )));
        }
        Ok(())
    }
}

/// Evaluates `f` at a unit vector `v`.
pub fn evaluate<T: Real>(f: &HomogeneousPolynomial<T>, v: &[T]) -> Result<T> {
    let norm = v.iter().map(|&x| x * x).sum::<T>().sqrt();
    if (norm - T::one()).abs() > lit(1e-12) {
        return Err(Error::InvalidInput(format!(
            "evaluation point is not on the unit sphere (|norm - 1| = {:e})",
            (norm - T::one()).abs().to_f64().unwrap_or(f64::NAN)
        )));
    }
    f.eval_raw(v)
}

/// Memo for closed-form monomial sphere moments; safe for concurrent readers.
#[derive(Default)]
pub struct SphereMomentCache<T: Real> {
    memo: RwLock<HashMap<ExponentVector, T>>,
}

impl<T: Real> SphereMomentCache<T> {
    pub fn new() -> Self {
        SphereMomentCache { memo: RwLock::new(HashMap::new()) }
    }

    pub fn len(&self) -> usize {
        self.memo.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `∫_{S^{n-1}} x^alpha dσ` under the uniform probability measure.
///
/// Zero when any exponent is odd; otherwise
/// `Γ(n/2) Π_i Γ((α_i+1)/2) / (Γ((n+|α|)/2) Γ(1/2)^n)`, computed in
/// log-Gamma space to avoid overflow.
pub fn monomial_sphere_moment<T: Real>(
    alpha: &ExponentVector,
    cache: &SphereMomentCache<T>,
) -> T {
    if alpha.0.iter().any(|e| e % 2 == 1) {
        return T::zero();
    }
    if let Some(&v) = cache.memo.read().unwrap().get(alpha) {
        return v;
    }
    let n = alpha.n();
    let total = alpha.degree();
    let half = lit::<T>(0.5);
    let mut log = ln_gamma(from_usize::<T>(n) * half);
    for &e in &alpha.0 {
        log += ln_gamma((from_usize::<T>(e as usize) + T::one()) * half);
    }
    log -= ln_gamma((from_usize::<T>(n) + from_usize::<T>(total as usize)) * half);
    log -= from_usize::<T>(n) * ln_gamma(half);
    let value = log.exp();
    cache.memo.write().unwrap().insert(alpha.clone(), value);
    value
}

/// Sphere inner product `⟨f, g⟩ = ∫ f g dσ`, exact via termwise moments.
pub fn inner_product<T: Real>(
    f: &HomogeneousPolynomial<T>,
    g: &HomogeneousPolynomial<T>,
    cache: &SphereMomentCache<T>,
) -> Result<T> {
    if f.n() != g.n() {
        return Err(Error::DimensionMismatch(
            "inner product of polynomials in different variable counts".into(),
        ));
    }
    if f.degree() != g.degree() {
        return Err(Error::DimensionMismatch(format!(
            "inner product needs equal degrees ({} vs {}); multiply by r explicitly to shift",
            f.degree(),
            g.degree()
        )));
    }
    let mut acc = T::zero();
    for (ea, &ca) in f.terms() {
        for (eb, &cb) in g.terms() {
            acc += ca * cb * monomial_sphere_moment(&ea.plus(eb), cache);
        }
    }
    Ok(acc)
}

/// Exact sphere 2-norm.
pub fn norm2<T: Real>(f: &HomogeneousPolynomial<T>, cache: &SphereMomentCache<T>) -> T {
    inner_product(f, f, cache).expect("self inner product").max(T::zero()).sqrt()
}

/// Monte Carlo sphere 1-norm with central-limit standard error.
pub fn norm1<T: Real>(
    f: &HomogeneousPolynomial<T>,
    samples: usize,
    seed: u64,
) -> Result<(T, T)> {
    if samples < 1_000 {
        return Err(Error::InvalidInput(format!(
            "norm1 needs at least 1000 samples, got {samples}"
        )));
    }
    let n = f.n();
    let values: Vec<T> = mc::chunked(seed, samples, |rng| {
        let v: Vec<T> = mc::unit_vector(n, rng);
        f.eval_raw(&v).unwrap().abs()
    });
    Ok(mc::mean_stderr(&values))
}

/// `Γ(n/2) / (2^{2d} Γ(n/2 + 2d))`: conversion factor between the squared
/// sphere 2-norm and the squared Gaussian 2-norm of a degree-2d form.
pub fn gaussian_sphere_ratio<T: Real>(n: usize, d: u32) -> T {
    let half_n = from_usize::<T>(n) * lit::<T>(0.5);
    let log = ln_gamma(half_n)
        - from_usize::<T>(2 * d as usize) * lit::<T>(2.0).ln()
        - ln_gamma(half_n + from_usize::<T>(2 * d as usize));
    log.exp()
}

/// Number of degree-`two_d` monomials in `n` variables, by enumeration-free
/// binomial counting: `C(n + 2d − 1, 2d)`.
pub fn monomial_count(n: usize, two_d: u32) -> usize {
    let k = two_d as usize;
    let mut num = 1usize;
    let mut den = 1usize;
    for i in 0..k {
        num *= n + k - 1 - i;
        den *= i + 1;
    }
    num / den
}

/// All exponent vectors of total degree `two_d` in `n` variables,
/// lexicographic order.
pub fn enumerate_exponents(n: usize, two_d: u32) -> Vec<ExponentVector> {
    let mut out = Vec::new();
    let mut current = vec![0u32; n];
    fn rec(n: usize, left: u32, idx: usize, current: &mut Vec<u32>, out: &mut Vec<ExponentVector>) {
        if idx == n - 1 {
            current[idx] = left;
            out.push(ExponentVector(current.clone()));
            return;
        }
        for e in (0..=left).rev() {
            current[idx] = e;
            rec(n, left - e, idx + 1, current, out);
        }
        current[idx] = 0;
    }
    rec(n, two_d, 0, &mut current, &mut out);
    out.sort();
    out
}
