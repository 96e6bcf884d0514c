//! Scalar abstraction for the solver core.
//!
//! Everything numeric is written against [`Real`], which is any nalgebra
//! `RealField` that also supports conversion from/to primitive numbers.
//! `f32` and `f64` both qualify; the experiment presets use `f64`.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by the solver core: `f32` or `f64`.
pub trait Real: RealField + FromPrimitive + ToPrimitive + Copy {
    /// Conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("scalar conversion from f64 literal")
    }

    /// Conversion from a count.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("scalar conversion from usize")
    }

    /// Lossy view as `f64`, for reporting and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar conversion to f64")
    }
}

impl<T: RealField + FromPrimitive + ToPrimitive + Copy> Real for T {}

#[cfg(test)]
mod tests {
    use super::*;

    fn sum_of_halves<T: Real>(n: usize) -> T {
        let mut acc = T::zero();
        for _ in 0..n {
            acc += T::lit(0.5);
        }
        acc
    }

    #[test]
    fn generic_literals_work_for_both_widths() {
        assert_eq!(sum_of_halves::<f64>(4), 2.0);
        assert_eq!(sum_of_halves::<f32>(4), 2.0);
        assert_eq!(3usize, f64::lit(3.0).as_f64() as usize);
    }
}
