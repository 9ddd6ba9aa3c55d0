use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Sub};

use super::tensor::Tensor1;

/// A point in `D`-dimensional space with compile-time dimension.
///
/// The dimension is a const generic so that coordinate loops unroll and the
/// storage lives on the stack.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point<const D: usize>(pub [f64; D]);

impl<const D: usize> Point<D> {
    pub fn new(coords: [f64; D]) -> Self {
        debug_assert!(coords.iter().all(|c| c.is_finite()));
        Point(coords)
    }

    pub fn origin() -> Self {
        Point([0.0; D])
    }

    pub fn coords(&self) -> &[f64; D] {
        &self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn distance(&self, other: &Point<D>) -> f64 {
        (*self - *other).norm()
    }

    /// Componentwise affine combination `self + t * (other - self)`.
    pub fn lerp(&self, other: &Point<D>, t: f64) -> Point<D> {
        let mut out = [0.0; D];
        for i in 0..D {
            out[i] = (1.0 - t) * self.0[i] + t * other.0[i];
        }
        Point(out)
    }
}

impl<const D: usize> Index<usize> for Point<D> {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl<const D: usize> IndexMut<usize> for Point<D> {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl<const D: usize> Sub for Point<D> {
    type Output = Tensor1<D>;
    fn sub(self, rhs: Point<D>) -> Tensor1<D> {
        let mut out = [0.0; D];
        for i in 0..D {
            out[i] = self.0[i] - rhs.0[i];
        }
        Tensor1(out)
    }
}

impl<const D: usize> Add<Tensor1<D>> for Point<D> {
    type Output = Point<D>;
    fn add(self, rhs: Tensor1<D>) -> Point<D> {
        let mut out = self.0;
        for i in 0..D {
            out[i] += rhs.0[i];
        }
        Point(out)
    }
}

impl<const D: usize> AddAssign<Tensor1<D>> for Point<D> {
    fn add_assign(&mut self, rhs: Tensor1<D>) {
        for i in 0..D {
            self.0[i] += rhs.0[i];
        }
    }
}

impl<const D: usize> Mul<f64> for Point<D> {
    type Output = Point<D>;
    fn mul(self, s: f64) -> Point<D> {
        let mut out = self.0;
        for c in &mut out {
            *c *= s;
        }
        Point(out)
    }
}
