//! Minimum-volume enclosing ellipsoid of a finite point set, by Khachiyan's
//! barycentric coordinate-ascent iteration on the lifted scatter matrix.

use crate::scalar::{from_usize, lit, Real};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Convergence threshold on the relative barycentric optimality gap.
const GAP_TOL: f64 = 1e-7;
const MAX_ITERS: usize = 200_000;

/// Affine map `x ↦ L (x − center)` sending the minimum-volume enclosing
/// ellipsoid of a sample to the unit ball.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct LoewnerTransform<T: Real> {
    /// Row-major `(m−1) × (m−1)` matrix.
    pub matrix: Vec<Vec<T>>,
    pub center: Vec<T>,
}

impl<T: Real> LoewnerTransform<T> {
    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn matrix_view(&self) -> DMatrix<T> {
        let p = self.dim();
        DMatrix::from_fn(p, p, |i, j| self.matrix[i][j])
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let p = self.dim();
        (0..p)
            .map(|i| {
                (0..p)
                    .map(|j| self.matrix[i][j] * (x[j] - self.center[j]))
                    .sum()
            })
            .collect()
    }

    pub fn apply_norm(&self, x: &[T]) -> T {
        self.apply(x).iter().map(|&c| c * c).sum::<T>().sqrt()
    }

    /// Inverse map `y ↦ L⁻¹ y + center`.
    pub fn invert(&self, y: &[T]) -> Result<Vec<T>> {
        let inv = self
            .matrix_view()
            .try_inverse()
            .ok_or_else(|| Error::RankDeficient("transform matrix is singular".into()))?;
        let v = inv * DVector::from_column_slice(y);
        Ok(v.iter().zip(&self.center).map(|(&a, &c)| a + c).collect())
    }
}

/// Computes the MVEE transform of `points` (which must affinely span).
///
/// Iterates Khachiyan's update until the lifted leverage scores exceed the
/// dimension by a relative factor below `1e-7`, then normalizes so that
/// every input point lands inside the unit ball.
pub fn loewner_position<T: Real>(points: &[Vec<T>]) -> Result<LoewnerTransform<T>> {
    if points.is_empty() {
        return Err(Error::InvalidInput("no points".into()));
    }
    let p = points[0].len();
    if points.iter().any(|x| x.len() != p) {
        return Err(Error::DimensionMismatch("points of mixed dimension".into()));
    }
    let big_n = points.len();
    if big_n < p + 1 {
        return Err(Error::RankDeficient(format!(
            "{big_n} points cannot affinely span R^{p}"
        )));
    }
    let lifted_dim = p + 1;
    let lifted: Vec<DVector<T>> = points
        .iter()
        .map(|x| {
            let mut q = DVector::zeros(lifted_dim);
            for (i, &c) in x.iter().enumerate() {
                q[i] = c;
            }
            q[p] = T::one();
            q
        })
        .collect();

    let mut u = vec![T::one() / from_usize::<T>(big_n); big_n];
    let df = from_usize::<T>(lifted_dim);
    for _ in 0..MAX_ITERS {
        let mut x = DMatrix::<T>::zeros(lifted_dim, lifted_dim);
        for (q, &w) in lifted.iter().zip(&u) {
            x += q * q.transpose() * w;
        }
        let xinv = x.try_inverse().ok_or_else(|| {
            Error::RankDeficient("lifted scatter matrix is singular; points do not affinely span".into())
        })?;
        let mut g_max = T::zero();
        let mut j = 0;
        for (i, q) in lifted.iter().enumerate() {
            let g = (q.transpose() * &xinv * q)[(0, 0)];
            if g > g_max {
                g_max = g;
                j = i;
            }
        }
        if (g_max - df) / df < lit(GAP_TOL) {
            break;
        }
        let kappa = (g_max - df) / (df * (g_max - T::one()));
        for w in &mut u {
            *w *= T::one() - kappa;
        }
        u[j] += kappa;
    }

    let mut center = vec![T::zero(); p];
    for (x, &w) in points.iter().zip(&u) {
        for i in 0..p {
            center[i] += w * x[i];
        }
    }
    let mut scatter = DMatrix::<T>::zeros(p, p);
    for (x, &w) in points.iter().zip(&u) {
        for i in 0..p {
            for j in 0..p {
                scatter[(i, j)] += w * (x[i] - center[i]) * (x[j] - center[j]);
            }
        }
    }
    let a = scatter
        .try_inverse()
        .ok_or_else(|| Error::RankDeficient("centered scatter matrix is singular".into()))?
        / from_usize::<T>(p);
    // symmetric square root of the shape matrix
    let eig = a.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| !(l > T::zero())) {
        return Err(Error::RankDeficient("ellipsoid shape matrix is not positive".into()));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.sqrt()));
    let mut l = &eig.eigenvectors * d * eig.eigenvectors.transpose();

    // guarantee coverage: scale down so the farthest sample is inside
    let max_norm = points
        .iter()
        .map(|x| {
            let mut y = DVector::zeros(p);
            for i in 0..p {
                y[i] = x[i] - center[i];
            }
            (&l * y).norm()
        })
        .fold(T::zero(), |acc, n| acc.max(n));
    if max_norm > T::one() {
        l /= max_norm;
    }

    Ok(LoewnerTransform {
        matrix: (0..p).map(|i| (0..p).map(|j| l[(i, j)]).collect()).collect(),
        center,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc;
    use approx::assert_relative_eq;

    fn cross_polytope(scales: &[f64]) -> Vec<Vec<f64>> {
        let p = scales.len();
        let mut pts = Vec::new();
        for (i, &s) in scales.iter().enumerate() {
            for sign in [1.0, -1.0] {
                let mut v = vec![0.0; p];
                v[i] = sign * s;
                pts.push(v);
            }
        }
        pts
    }

    #[test]
    fn unit_cross_polytope_gives_identity() {
        let t = loewner_position(&cross_polytope(&[1.0, 1.0, 1.0])).unwrap();
        for c in &t.center {
            assert_relative_eq!(*c, 0.0, epsilon = 1e-6);
        }
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(t.matrix[i][j], target, epsilon = 1e-3);
            }
        }
    }

    #[test]
    fn scaled_cross_polytope_gives_diagonal_inverse() {
        let t = loewner_position(&cross_polytope(&[2.0, 1.0])).unwrap();
        // MVEE is the ellipse x²/4 + y² = 1, so up to an orthogonal factor
        // the map is diag(1/2, 1); check via norms of the images instead.
        assert_relative_eq!(t.apply_norm(&[2.0, 0.0]), 1.0, epsilon = 1e-3);
        assert_relative_eq!(t.apply_norm(&[0.0, 1.0]), 1.0, epsilon = 1e-3);
        assert_relative_eq!(t.apply_norm(&[1.0, 0.0]), 0.5, epsilon = 1e-3);
    }

    #[test]
    fn random_cloud_coverage_and_touching() {
        let mut rng = mc::stream(42, 0);
        let p = 3;
        let pts: Vec<Vec<f64>> = (0..60).map(|_| mc::gaussian_vector(p, &mut rng)).collect();
        let t = loewner_position(&pts).unwrap();
        let norms: Vec<f64> = pts.iter().map(|x| t.apply_norm(x)).collect();
        assert!(norms.iter().all(|&n| n <= 1.0 + 1e-8));
        let touching = norms.iter().filter(|&&n| n >= 1.0 - 1e-4).count();
        assert!(touching >= p + 1, "only {touching} touching points");
    }

    #[test]
    fn shifted_cloud_is_recentred() {
        let mut rng = mc::stream(43, 0);
        let pts: Vec<Vec<f64>> = (0..40)
            .map(|_| {
                let g: Vec<f64> = mc::gaussian_vector(2, &mut rng);
                vec![g[0] + 10.0, g[1] - 5.0]
            })
            .collect();
        let t = loewner_position(&pts).unwrap();
        assert!((t.center[0] - 10.0).abs() < 2.0);
        assert!((t.center[1] + 5.0).abs() < 2.0);
        assert!(pts.iter().all(|x| t.apply_norm(x) <= 1.0 + 1e-8));
    }

    #[test]
    fn degenerate_span_is_rank_error() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![2.0, 0.0]];
        assert!(matches!(loewner_position(&pts), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn round_trip_inverse() {
        let t = loewner_position(&cross_polytope(&[3.0, 0.5])).unwrap();
        let x = vec![1.2, -0.3];
        let back = t.invert(&t.apply(&x)).unwrap();
        assert_relative_eq!(back[0], x[0], epsilon = 1e-10);
        assert_relative_eq!(back[1], x[1], epsilon = 1e-10);
    }
}
