//! Scalar abstractions shared by the numeric modules.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, Num, ToPrimitive};

/// Arithmetic needed by aggregation and counting code.
///
/// Exact types such as `num_rational::Ratio<i64>` satisfy it as well as
/// `f32` and `f64`, which lets tests compare strategies against exact
/// oracles.
pub trait Scalar: Num + Copy + PartialOrd + Debug + Send + Sync + 'static {
    /// `n` as a scalar, built by repeated addition so no conversion trait
    /// is required.
    fn from_count(n: usize) -> Self {
        let mut acc = Self::zero();
        for _ in 0..n {
            acc = acc + Self::one();
        }
        acc
    }
}

impl<T> Scalar for T where T: Num + Copy + PartialOrd + Debug + Send + Sync + 'static {}

/// Floating point scalar: `f32` or `f64`.
pub trait Real: Scalar + Float + FromPrimitive + ToPrimitive {
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 converts to float scalar")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Ratio `num / den`, zero when the denominator vanishes.
pub fn safe_ratio<T: Scalar>(num: T, den: T) -> T {
    if den == T::zero() {
        T::zero()
    } else {
        num / den
    }
}

/// Harmonic mean of precision and recall, zero when both are zero.
pub fn f1_score<T: Scalar>(precision: T, recall: T) -> T {
    let sum = precision + recall;
    if sum == T::zero() {
        T::zero()
    } else {
        (T::one() + T::one()) * precision * recall / sum
    }
}
