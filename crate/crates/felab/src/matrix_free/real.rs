//! Scalar abstraction so the matrix-free kernels can run in double or
//! single precision with identical code.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

pub trait Real:
    Copy
    + Clone
    + Debug
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + AddAssign
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const ZERO: Self;
    const ONE: Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Real for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;

    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(self) -> f64 {
        self
    }
}

impl Real for f32 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;

    fn from_f64(x: f64) -> Self {
        x as f32
    }

    fn to_f64(self) -> f64 {
        f64::from(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sum<T: Real>(values: &[f64]) -> f64 {
        let mut acc = T::ZERO;
        for &v in values {
            acc += T::from_f64(v);
        }
        acc.to_f64()
    }

    #[test]
    fn both_precisions_accumulate() {
        let values = [0.5, 0.25, 0.125];
        assert_eq!(sum::<f64>(&values), 0.875);
        assert_eq!(sum::<f32>(&values), 0.875);
    }
}
