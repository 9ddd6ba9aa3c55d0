//! Scalar coefficient and data functions on real space.

use crate::geometry::{Point, Tensor1};

/// A deterministic scalar field, used for right-hand sides, boundary data
/// and manufactured solutions.
pub trait ScalarFunction<const D: usize>: Send + Sync {
    fn value(&self, p: &Point<D>) -> f64;

    /// Exact gradient where available; error norms in H1 need it.
    fn gradient(&self, _p: &Point<D>) -> Option<Tensor1<D>> {
        None
    }
}

/// Every plain closure is a scalar function without a gradient.
impl<const D: usize, F> ScalarFunction<D> for F
where
    F: Fn(&Point<D>) -> f64 + Send + Sync,
{
    fn value(&self, p: &Point<D>) -> f64 {
        self(p)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantFunction(pub f64);

impl<const D: usize> ScalarFunction<D> for ConstantFunction {
    fn value(&self, _p: &Point<D>) -> f64 {
        self.0
    }

    fn gradient(&self, _p: &Point<D>) -> Option<Tensor1<D>> {
        Some(Tensor1::zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closures_and_constants() {
        let f = |p: &Point<2>| p[0] * p[1];
        assert_eq!(f.value(&Point::new([2.0, 3.0])), 6.0);
        assert!(ScalarFunction::gradient(&f, &Point::new([0.0, 0.0])).is_none());
        let c = ConstantFunction(4.0);
        assert_eq!(ScalarFunction::<3>::value(&c, &Point::origin()), 4.0);
        assert_eq!(
            ScalarFunction::<3>::gradient(&c, &Point::origin()),
            Some(Tensor1::zero())
        );
    }
}
