use crate::error::{Error, Result};
use crate::geometry::{Point, Tensor1};

use super::lagrange::Lagrange1d;

/// Slack allowed for reference coordinates before they count as outside
/// `[0, 1]^D`.
pub const REFERENCE_CELL_TOL: f64 = 1e-12;

/// Maximum supported polynomial degree.
pub const MAX_DEGREE: usize = 4;

/// Continuous tensor-product Lagrange element Q_p on `[0, 1]^D`.
///
/// Nodes are the tensor product of the `p+1` Gauss-Lobatto points, numbered
/// lexicographically with the x index running fastest. Shape function `i`
/// is therefore a product of 1d Lagrange functions, one per direction.
#[derive(Clone, Debug)]
pub struct FiniteElementQ<const D: usize> {
    degree: usize,
    basis: Lagrange1d,
}

impl<const D: usize> FiniteElementQ<D> {
    pub fn new(degree: usize) -> Self {
        assert!(
            (1..=MAX_DEGREE).contains(&degree),
            "supported element degrees are 1..={MAX_DEGREE}, got {degree}"
        );
        FiniteElementQ {
            degree,
            basis: Lagrange1d::on_lobatto(degree),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dofs_per_cell(&self) -> usize {
        (self.degree + 1).pow(D as u32)
    }

    /// The 1d support points shared by all directions.
    pub fn nodes_1d(&self) -> &[f64] {
        self.basis.nodes()
    }

    pub fn basis_1d(&self) -> &Lagrange1d {
        &self.basis
    }

    /// Decomposes a lexicographic node index into per-direction indices.
    pub fn tensor_index(&self, i: usize) -> [usize; D] {
        let n = self.degree + 1;
        let mut out = [0; D];
        let mut rest = i;
        for o in out.iter_mut() {
            *o = rest % n;
            rest /= n;
        }
        out
    }

    /// Reference-cell coordinates of node `i`.
    pub fn node(&self, i: usize) -> Point<D> {
        let idx = self.tensor_index(i);
        let mut coords = [0.0; D];
        for d in 0..D {
            coords[d] = self.basis.nodes()[idx[d]];
        }
        Point::new(coords)
    }

    fn check_args(&self, i: usize, x: &Point<D>) -> Result<()> {
        if i >= self.dofs_per_cell() {
            return Err(Error::IndexError {
                index: i,
                limit: self.dofs_per_cell(),
            });
        }
        let lo = -REFERENCE_CELL_TOL;
        let hi = 1.0 + REFERENCE_CELL_TOL;
        if x.coords().iter().any(|&c| !(lo..=hi).contains(&c)) {
            return Err(Error::DomainError(x.coords().to_vec()));
        }
        Ok(())
    }

    /// Value of shape function `i` at reference point `x`.
    pub fn shape_value(&self, i: usize, x: &Point<D>) -> Result<f64> {
        self.check_args(i, x)?;
        let idx = self.tensor_index(i);
        let mut acc = 1.0;
        for d in 0..D {
            acc *= self.basis.value(idx[d], x[d]);
        }
        Ok(acc)
    }

    /// Reference-cell gradient of shape function `i` at `x`.
    pub fn shape_grad(&self, i: usize, x: &Point<D>) -> Result<Tensor1<D>> {
        self.check_args(i, x)?;
        let idx = self.tensor_index(i);
        let mut values = [0.0; D];
        let mut derivatives = [0.0; D];
        for d in 0..D {
            values[d] = self.basis.value(idx[d], x[d]);
            derivatives[d] = self.basis.derivative(idx[d], x[d]);
        }
        let mut grad = [0.0; D];
        for (d, g) in grad.iter_mut().enumerate() {
            let mut acc = 1.0;
            for k in 0..D {
                acc *= if k == d { derivatives[k] } else { values[k] };
            }
            *g = acc;
        }
        Ok(Tensor1::new(grad))
    }
}
