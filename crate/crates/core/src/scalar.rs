//! Scalar abstraction shared by all numeric modules.

use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
///
/// `nalgebra::RealField` supplies the field and elementary-function surface,
/// the num-traits bounds cover conversions from counts and literals.
pub trait Real:
    nalgebra::RealField + Copy + FromPrimitive + ToPrimitive + std::iter::Sum + Default
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into the working scalar type.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Converts a count into the working scalar type.
#[inline]
pub fn from_usize<T: Real>(x: usize) -> T {
    T::from_usize(x).expect("count representable")
}

// Lanczos approximation, g = 7, 9 terms. Good to ~15 significant digits on
// the half-integer arguments the moment formulas need.
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the Gamma function for positive arguments.
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = lit::<T>(0.5);
    if x < half {
        // reflection: ln Γ(x) = ln(π / sin(πx)) − ln Γ(1 − x)
        let pi = T::pi();
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut sum = lit::<T>(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        sum += lit::<T>(c) / (x + from_usize(i));
    }
    let base = x + lit::<T>(7.5);
    lit::<T>(0.5 * (2.0 * std::f64::consts::PI).ln()) + (x + half) * base.ln() - base + sum.ln()
}
