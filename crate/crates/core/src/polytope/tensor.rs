//! Symmetric tensor powers of coordinate vectors, with multinomial weights
//! chosen so that inner products of lifts are powers of inner products.

use crate::polyspace::enumerate_exponents;
use crate::scalar::{lit, Real};
use crate::{Error, Result};

/// Desk-scale cap on the lifted dimension.
const LIFT_DIM_CAP: usize = 10_000;

/// `C(a, b)` as an exact integer count (panics on overflow beyond u128).
pub fn binomial(a: usize, b: usize) -> usize {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    let mut acc: u128 = 1;
    for i in 0..b {
        acc = acc * (a - i) as u128 / (i + 1) as u128;
    }
    usize::try_from(acc).expect("binomial fits usize")
}

/// Dimension of the symmetric `k`-th power of `R^p`: `C(p + k − 1, k)`.
pub fn sym_power_dim(p: usize, k: u32) -> usize {
    binomial(p + k as usize - 1, k as usize)
}

/// `√(k! / ∏ β_i!)` for a multi-index `β` of weight `k`.
///
/// Computed as an exact integer before the square root, so multinomial
/// coefficients equal to 1 lift coordinates without rounding.
fn multinomial_sqrt<T: Real>(beta: &[u32]) -> T {
    // k! / ∏ β_i! = ∏ C(partial sums, β_i), each factor exact in u128
    let mut acc: u128 = 1;
    let mut total: usize = 0;
    for &b in beta {
        total += b as usize;
        acc *= binomial(total, b as usize) as u128;
    }
    lit::<T>(acc as f64).sqrt()
}

/// Lifts `x ∈ R^p` into symmetric-power coordinates so that
/// `⟨lift(x), lift(y)⟩ = ⟨x, y⟩^k`.
pub fn tensor_lift<T: Real>(x: &[T], k: u32) -> Result<Vec<T>> {
    if k == 0 {
        return Err(Error::InvalidInput("tensor power must be at least 1".into()));
    }
    let p = x.len();
    if p == 0 {
        return Err(Error::InvalidInput("empty vector".into()));
    }
    let dim = sym_power_dim(p, k);
    if dim > LIFT_DIM_CAP {
        return Err(Error::Config(format!(
            "lift dimension {dim} exceeds the {LIFT_DIM_CAP} cap"
        )));
    }
    let mut out = Vec::with_capacity(dim);
    for beta in enumerate_exponents(p, k) {
        let mut term = multinomial_sqrt::<T>(&beta.0);
        for (xi, &b) in x.iter().zip(&beta.0) {
            term *= xi.powi(b as i32);
        }
        out.push(term);
    }
    Ok(out)
}
