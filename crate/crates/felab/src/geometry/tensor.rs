use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// A rank-1 tensor (gradient, direction, displacement) in `D` dimensions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor1<const D: usize>(pub [f64; D]);

impl<const D: usize> Tensor1<D> {
    pub fn new(components: [f64; D]) -> Self {
        debug_assert!(components.iter().all(|c| c.is_finite()));
        Tensor1(components)
    }

    pub fn zero() -> Self {
        Tensor1([0.0; D])
    }

    pub fn dot(&self, other: &Tensor1<D>) -> f64 {
        let mut s = 0.0;
        for i in 0..D {
            s += self.0[i] * other.0[i];
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

impl<const D: usize> Index<usize> for Tensor1<D> {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl<const D: usize> IndexMut<usize> for Tensor1<D> {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl<const D: usize> Add for Tensor1<D> {
    type Output = Tensor1<D>;
    fn add(self, rhs: Self) -> Self {
        let mut out = self.0;
        for i in 0..D {
            out[i] += rhs.0[i];
        }
        Tensor1(out)
    }
}

impl<const D: usize> AddAssign for Tensor1<D> {
    fn add_assign(&mut self, rhs: Self) {
        for i in 0..D {
            self.0[i] += rhs.0[i];
        }
    }
}

impl<const D: usize> Sub for Tensor1<D> {
    type Output = Tensor1<D>;
    fn sub(self, rhs: Self) -> Self {
        let mut out = self.0;
        for i in 0..D {
            out[i] -= rhs.0[i];
        }
        Tensor1(out)
    }
}

impl<const D: usize> Neg for Tensor1<D> {
    type Output = Tensor1<D>;
    fn neg(self) -> Self {
        let mut out = self.0;
        for c in &mut out {
            *c = -*c;
        }
        Tensor1(out)
    }
}

impl<const D: usize> Mul<f64> for Tensor1<D> {
    type Output = Tensor1<D>;
    fn mul(self, s: f64) -> Self {
        let mut out = self.0;
        for c in &mut out {
            *c *= s;
        }
        Tensor1(out)
    }
}

/// A rank-2 tensor (Jacobian, metric) stored row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tensor2<const D: usize>(pub [[f64; D]; D]);

/// Relative determinant threshold below which a tensor counts as singular.
pub const SINGULAR_REL_TOL: f64 = 1e-12;

impl<const D: usize> Tensor2<D> {
    pub fn zero() -> Self {
        Tensor2([[0.0; D]; D])
    }

    pub fn identity() -> Self {
        let mut t = Self::zero();
        for i in 0..D {
            t.0[i][i] = 1.0;
        }
        t
    }

    pub fn from_diagonal(diag: [f64; D]) -> Self {
        let mut t = Self::zero();
        for i in 0..D {
            t.0[i][i] = diag[i];
        }
        t
    }

    /// Contraction with a rank-1 tensor: `(t v)_i = sum_j t_ij v_j`.
    pub fn contract(&self, v: &Tensor1<D>) -> Tensor1<D> {
        let mut out = [0.0; D];
        for i in 0..D {
            for j in 0..D {
                out[i] += self.0[i][j] * v.0[j];
            }
        }
        Tensor1(out)
    }

    /// Contraction with the transpose: `(t^T v)_i = sum_j t_ji v_j`.
    pub fn contract_transpose(&self, v: &Tensor1<D>) -> Tensor1<D> {
        let mut out = [0.0; D];
        for i in 0..D {
            for j in 0..D {
                out[i] += self.0[j][i] * v.0[j];
            }
        }
        Tensor1(out)
    }

    pub fn transpose(&self) -> Tensor2<D> {
        let mut out = Self::zero();
        for i in 0..D {
            for j in 0..D {
                out.0[i][j] = self.0[j][i];
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|row| row.iter())
            .map(|c| c * c)
            .sum::<f64>()
            .sqrt()
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        match D {
            1 => m[0][0],
            2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
            3 => {
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                    - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            }
            _ => unreachable!("only dimensions 1..=3 are supported"),
        }
    }

    /// Inverse by cofactor expansion. Fails with `SingularTensor` when
    /// `|det| <= 1e-12 * ||t||_F^D`.
    pub fn invert(&self) -> Result<Tensor2<D>> {
        let det = self.det();
        let threshold = SINGULAR_REL_TOL * self.frobenius_norm().powi(D as i32);
        if det.abs() <= threshold {
            return Err(Error::SingularTensor { det, threshold });
        }
        let inv_det = 1.0 / det;
        let m = &self.0;
        let mut out = Self::zero();
        match D {
            1 => out.0[0][0] = inv_det,
            2 => {
                out.0[0][0] = m[1][1] * inv_det;
                out.0[0][1] = -m[0][1] * inv_det;
                out.0[1][0] = -m[1][0] * inv_det;
                out.0[1][1] = m[0][0] * inv_det;
            }
            3 => {
                out.0[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv_det;
                out.0[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv_det;
                out.0[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv_det;
                out.0[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv_det;
                out.0[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv_det;
                out.0[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv_det;
                out.0[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv_det;
                out.0[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv_det;
                out.0[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv_det;
            }
            _ => unreachable!("only dimensions 1..=3 are supported"),
        }
        Ok(out)
    }
}

impl<const D: usize> Mul<Tensor2<D>> for Tensor2<D> {
    type Output = Tensor2<D>;
    fn mul(self, rhs: Tensor2<D>) -> Tensor2<D> {
        let mut out = Tensor2::zero();
        for i in 0..D {
            for j in 0..D {
                for k in 0..D {
                    out.0[i][j] += self.0[i][k] * rhs.0[k][j];
                }
            }
        }
        out
    }
}
