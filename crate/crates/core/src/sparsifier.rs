//! Spectral sparsification of vector systems in isotropic position by the
//! Batson–Spielman–Srivastava potential-barrier method, plus the whitening
//! transform that puts a weighted system into isotropic position first.

use crate::scalar::{from_usize, lit, Real};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// A finite weighted system of vectors in `R^dim`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct VectorSystem<T: Real> {
    pub dim: usize,
    pub vectors: Vec<Vec<T>>,
    pub weights: Vec<T>,
}

impl<T: Real> VectorSystem<T> {
    pub fn new(dim: usize, vectors: Vec<Vec<T>>, weights: Vec<T>) -> Result<Self> {
        if vectors.len() != weights.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} vectors but {} weights",
                vectors.len(),
                weights.len()
            )));
        }
        if vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch("vector length differs from dim".into()));
        }
        if weights.iter().any(|w| *w < T::zero()) {
            return Err(Error::InvalidInput("negative weight".into()));
        }
        Ok(VectorSystem { dim, vectors, weights })
    }

    pub fn unit_weights(dim: usize, vectors: Vec<Vec<T>>) -> Result<Self> {
        let w = vec![T::one(); vectors.len()];
        Self::new(dim, vectors, w)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `Σ w_i x_i x_iᵀ`
    pub fn second_moment(&self) -> DMatrix<T> {
        let mut s = DMatrix::zeros(self.dim, self.dim);
        for (x, &w) in self.vectors.iter().zip(&self.weights) {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    s[(i, j)] += w * x[i] * x[j];
                }
            }
        }
        s
    }
}

/// Output of [`bss_sparsify`]: indices into the input system, new weights,
/// and the certified spectral sandwich for the reweighted subsystem.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct WeightedDecomposition<T: Real> {
    pub indices: Vec<usize>,
    pub weights: Vec<T>,
    pub epsilon: T,
    /// Eigenvalue range `[lo, hi]` of `Σ s_i x_i x_iᵀ`; contained in
    /// `[(1−ε)², (1+ε)²]`.
    pub achieved_bounds: (T, T),
}

/// Symmetric inverse square root. Fails if the smallest eigenvalue is below
/// `1e-10`, i.e. the system does not span `R^dim`.
fn inv_sqrt<T: Real>(s: &DMatrix<T>) -> Result<DMatrix<T>> {
    let eig = s.clone().symmetric_eigen();
    let min = eig.eigenvalues.iter().fold(T::max_value().unwrap(), |a, &b| a.min(b));
    if min < lit(1e-10) {
        return Err(Error::RankDeficient(format!(
            "second moment eigenvalue {:?} below 1e-10; vectors do not span the space",
            min
        )));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| T::one() / l.sqrt()));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// Whitening transform `W = S^{-1/2}` for `S = Σ w_i x_i x_iᵀ`, so that the
/// system `{√w_i · W x_i}` is exactly isotropic.
pub fn whiten<T: Real>(system: &VectorSystem<T>) -> Result<(VectorSystem<T>, DMatrix<T>)> {
    let w = inv_sqrt(&system.second_moment())?;
    let vectors: Vec<Vec<T>> = system
        .vectors
        .iter()
        .zip(&system.weights)
        .map(|(x, &wt)| {
            let y = &w * DVector::from_column_slice(x) * wt.sqrt();
            y.iter().copied().collect()
        })
        .collect();
    Ok((VectorSystem::unit_weights(system.dim, vectors)?, w))
}

/// Sparsifies an isotropic system down to at most `⌈dim/ε²⌉` vectors whose
/// reweighted second moment has all eigenvalues in `[(1−ε)², (1+ε)²]`.
///
/// The input is whitened internally, so any full-rank weighted system is
/// accepted; the returned weights compose the whitening with the barrier
/// selection and apply to the *original* vectors.
pub fn bss_sparsify<T: Real>(system: &VectorSystem<T>, epsilon: T) -> Result<WeightedDecomposition<T>> {
    let n = system.dim;
    if n == 0 || system.is_empty() {
        return Err(Error::InvalidInput("empty system".into()));
    }
    if !(epsilon > T::zero()) || epsilon >= T::one() {
        return Err(Error::InvalidInput(format!("epsilon {:?} outside (0, 1)", epsilon)));
    }
    let nf = from_usize::<T>(n);
    if epsilon < T::one() / nf.sqrt() {
        log::warn!(
            "sparsification target below the 1/sqrt(dim) resolution limit; \
             output may keep every vector"
        );
    }

    let (iso, _w) = whiten(system)?;
    let d = T::one() / (epsilon * epsilon);
    let steps = (nf * d).ceil().to_usize().expect("step count fits usize");
    let sd = d.sqrt();
    let delta_l = T::one();
    let delta_u = (sd + T::one()) / (sd - T::one());
    let eps_l = T::one() / sd;
    let eps_u = (sd - T::one()) / (d + sd);
    let mut u = nf / eps_u;
    let mut l = -nf / eps_l;

    let xs: Vec<DVector<T>> = iso.vectors.iter().map(|v| DVector::from_column_slice(v)).collect();
    let mut a = DMatrix::<T>::zeros(n, n);
    let mut s = vec![T::zero(); xs.len()];

    for _ in 0..steps {
        let u_next = u + delta_u;
        let l_next = l + delta_l;
        let eye = DMatrix::<T>::identity(n, n);

        let mu = (&eye * u_next - &a)
            .try_inverse()
            .ok_or_else(|| Error::Internal("upper barrier resolvent is singular".into()))?;
        let ml = (&a - &eye * l_next)
            .try_inverse()
            .ok_or_else(|| Error::Internal("lower barrier resolvent is singular".into()))?;
        let mu2 = &mu * &mu;
        let ml2 = &ml * &ml;
        // potential drops from shifting the barrier alone
        let phi_u_gap = {
            let before = (&eye * u - &a)
                .try_inverse()
                .ok_or_else(|| Error::Internal("upper barrier resolvent is singular".into()))?;
            before.trace() - mu.trace()
        };
        let phi_l_gap = {
            let before = (&a - &eye * l)
                .try_inverse()
                .ok_or_else(|| Error::Internal("lower barrier resolvent is singular".into()))?;
            ml.trace() - before.trace()
        };
        if !(phi_u_gap > T::zero()) || !(phi_l_gap > T::zero()) {
            return Err(Error::Internal("barrier potential gap is not positive".into()));
        }

        let mut best: Option<(usize, T, T, T)> = None;
        for (i, x) in xs.iter().enumerate() {
            let xu2 = (x.transpose() * &mu2 * x)[(0, 0)];
            let xu1 = (x.transpose() * &mu * x)[(0, 0)];
            let xl2 = (x.transpose() * &ml2 * x)[(0, 0)];
            let xl1 = (x.transpose() * &ml * x)[(0, 0)];
            let upper = xu2 / phi_u_gap + xu1;
            let lower = xl2 / phi_l_gap - xl1;
            let margin = lower - upper;
            match best {
                Some((_, _, _, best_margin)) if margin <= best_margin => {}
                _ => best = Some((i, upper, lower, margin)),
            }
        }
        let (idx, upper, lower, margin) = best.expect("nonempty system");
        if !(margin >= T::zero()) {
            return Err(Error::Internal(format!(
                "no vector fits between the barriers (best margin {:?})",
                margin
            )));
        }
        let t = lit::<T>(2.0) / (upper + lower);
        let x = &xs[idx];
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] += t * x[i] * x[j];
            }
        }
        s[idx] += t;
        u = u_next;
        l = l_next;
    }

    // final scale maps the eigenvalue window into [(1−ε)², (1+ε)²]
    let l_final = -nf / eps_l + from_usize::<T>(steps) * delta_l;
    if !(l_final > T::zero()) {
        return Err(Error::Internal("lower barrier never became positive".into()));
    }
    let gamma = (T::one() - epsilon) * (T::one() - epsilon) / l_final;

    let eig = (&a * gamma).symmetric_eigenvalues();
    let lo = eig.iter().fold(T::max_value().unwrap(), |acc, &e| acc.min(e));
    let hi = eig.iter().fold(T::zero(), |acc, &e| acc.max(e));
    let lo_target = (T::one() - epsilon) * (T::one() - epsilon);
    let hi_target = (T::one() + epsilon) * (T::one() + epsilon);
    let slack = lit::<T>(1e-7);
    if lo < lo_target - slack || hi > hi_target + slack {
        return Err(Error::Internal(format!(
            "achieved eigenvalue range [{:?}, {:?}] escapes the target sandwich",
            lo, hi
        )));
    }

    // compose whitening weights back onto the original vectors:
    // γ s_i (√w_i W x_i)(√w_i W x_i)ᵀ = W (Σ γ s_i w_i x_i x_iᵀ) W
    let mut indices = Vec::new();
    let mut weights = Vec::new();
    for (i, &si) in s.iter().enumerate() {
        if si > T::zero() {
            indices.push(i);
            weights.push(gamma * si * system.weights[i]);
        }
    }
    Ok(WeightedDecomposition { indices, weights, epsilon, achieved_bounds: (lo, hi) })
}
