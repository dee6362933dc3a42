//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the solver can run on (`f32` or `f64`).
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Converts an `f64` constant into this scalar type.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable in scalar type")
    }

    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl<T> Scalar for T where
    T: Float
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + Default
        + Sum
        + Send
        + Sync
        + 'static
{
}

/// Trapezoidal integral of samples on a uniform grid of spacing `dt`.
pub(crate) fn trapezoid<T: Scalar>(samples: &[T], dt: T) -> T {
    match samples.len() {
        0 | 1 => T::zero(),
        n => {
            let half = T::lit(0.5);
            let inner: T = samples[1..n - 1].iter().copied().sum();
            dt * (inner + half * (samples[0] + samples[n - 1]))
        }
    }
}

/// Running trapezoidal integral; `out[k]` integrates `samples[0..=k]`.
pub(crate) fn cumulative_trapezoid<T: Scalar>(samples: &[T], dt: T) -> Vec<T> {
    let half = T::lit(0.5);
    let mut out = Vec::with_capacity(samples.len());
    let mut acc = T::zero();
    for (k, &v) in samples.iter().enumerate() {
        if k > 0 {
            acc = acc + half * dt * (samples[k - 1] + v);
        }
        out.push(acc);
    }
    out
}
