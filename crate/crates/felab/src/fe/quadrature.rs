use crate::geometry::Point;

use super::lagrange::gauss_legendre;

/// A quadrature rule on the reference cell `[0, 1]^D`.
#[derive(Clone, Debug)]
pub struct Quadrature<const D: usize> {
    points: Vec<Point<D>>,
    weights: Vec<f64>,
}

impl<const D: usize> Quadrature<D> {
    pub fn new(points: Vec<Point<D>>, weights: Vec<f64>) -> Self {
        assert_eq!(points.len(), weights.len());
        Quadrature { points, weights }
    }

    /// Tensor-product Gauss-Legendre rule with `n_1d` points per direction,
    /// exact for polynomials of degree `2 n_1d - 1` in each variable.
    ///
    /// Point order is lexicographic with the x index running fastest, the
    /// same convention used for element node numbering.
    pub fn gauss(n_1d: usize) -> Self {
        let (x, w) = gauss_legendre(n_1d);
        let n = n_1d.pow(D as u32);
        let mut points = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for flat in 0..n {
            let mut coords = [0.0; D];
            let mut weight = 1.0;
            let mut rest = flat;
            for coord in coords.iter_mut() {
                let i = rest % n_1d;
                rest /= n_1d;
                *coord = x[i];
                weight *= w[i];
            }
            points.push(Point::new(coords));
            weights.push(weight);
        }
        Quadrature { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, q: usize) -> Point<D> {
        self.points[q]
    }

    pub fn weight(&self, q: usize) -> f64 {
        self.weights[q]
    }

    pub fn points(&self) -> &[Point<D>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}
