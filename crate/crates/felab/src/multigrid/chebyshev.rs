//! Chebyshev polynomial smoothing and the spectral estimate it needs.

use crate::error::{Error, Result};
use crate::matrix_free::Real;

/// Fixed-increment generator for the deterministic Lanczos start vector.
/// Keeping the sequence independent of any external RNG makes eigenvalue
/// estimates bit-reproducible across runs and platforms.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn unit_interval(bits: u64) -> f64 {
    (bits >> 11) as f64 / (1u64 << 53) as f64
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations. Only used
/// for the tiny Lanczos tridiagonals, so no pivoting sophistication.
fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    if n == 1 {
        return vec![a[0][0]];
    }
    let scale: f64 = a
        .iter()
        .flat_map(|row| row.iter())
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let tau = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

/// Estimates the largest eigenvalue of `D^{-1} A` by `steps` Lanczos
/// iterations on the symmetrized operator `D^{-1/2} A D^{-1/2}`, returning
/// the top Ritz value times `safety`.
///
/// The start vector comes from a fixed seed, so the estimate is
/// deterministic. Early Krylov exhaustion (an invariant subspace) terminates
/// the iteration gracefully.
pub fn estimate_largest_eigenvalue<F>(
    op: F,
    diagonal: &[f64],
    steps: usize,
    safety: f64,
) -> Result<f64>
where
    F: Fn(&mut [f64], &[f64]),
{
    let n = diagonal.len();
    if n == 0 || steps == 0 {
        return Err(Error::InvalidInput(
            "eigenvalue estimate needs a nonempty operator and at least one step".into(),
        ));
    }
    let mut inv_sqrt = Vec::with_capacity(n);
    for (i, &d) in diagonal.iter().enumerate() {
        if d <= 0.0 {
            return Err(Error::ZeroDiagonal(i));
        }
        inv_sqrt.push(1.0 / d.sqrt());
    }

    let mut state = LANCZOS_SEED;
    let mut v: Vec<f64> = (0..n)
        .map(|_| 2.0 * unit_interval(splitmix64(&mut state)) - 1.0)
        .collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::Breakdown("zero Lanczos start vector".into()));
    }
    v.iter_mut().for_each(|x| *x /= norm);

    let mut basis: Vec<Vec<f64>> = vec![v.clone()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    for _ in 0..steps.min(n) {
        for i in 0..n {
            tmp[i] = v[i] * inv_sqrt[i];
        }
        op(&mut w, &tmp);
        for i in 0..n {
            w[i] *= inv_sqrt[i];
        }
        let alpha: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        if !alpha.is_finite() {
            return Err(Error::Breakdown("non-finite Lanczos coefficient".into()));
        }
        alphas.push(alpha);
        // full reorthogonalization; the basis stays tiny
        for u in &basis {
            let proj: f64 = u.iter().zip(&w).map(|(a, b)| a * b).sum();
            for i in 0..n {
                w[i] -= proj * u[i];
            }
        }
        let beta = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if beta <= 1e-12 * alpha.abs().max(1.0) {
            break;
        }
        betas.push(beta);
        v = w.iter().map(|x| x / beta).collect();
        basis.push(v.clone());
    }

    let m = alphas.len();
    let mut t = vec![vec![0.0; m]; m];
    for (i, &a) in alphas.iter().enumerate() {
        t[i][i] = a;
        if i + 1 < m {
            t[i][i + 1] = betas[i];
            t[i + 1][i] = betas[i];
        }
    }
    let lambda = symmetric_eigenvalues(t)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(lambda * safety)
}

const LANCZOS_SEED: u64 = 0x5eed_0000_0000_4d47;

/// Degree-`k` Chebyshev iteration preconditioned by the operator diagonal,
/// smoothing the interval `[lambda_max/range, lambda_max]`.
///
/// Each application is a fixed linear operation: no inner products, no
/// stopping tests, always exactly `k` operator applications. Degree 1
/// degenerates to damped Jacobi with weight `1/theta`.
pub struct ChebyshevSmoother<T> {
    degree: usize,
    inv_diagonal: Vec<T>,
    theta: f64,
    delta: f64,
}

impl<T: Real> ChebyshevSmoother<T> {
    pub fn new(degree: usize, diagonal: &[T], lambda_max: f64, range: f64) -> Result<Self> {
        if degree == 0 || lambda_max <= 0.0 || range <= 1.0 {
            return Err(Error::InvalidInput(format!(
                "invalid Chebyshev parameters: degree {degree}, lambda_max {lambda_max}, \
                 range {range}"
            )));
        }
        let mut inv_diagonal = Vec::with_capacity(diagonal.len());
        for (i, &d) in diagonal.iter().enumerate() {
            if !(d.to_f64() > 0.0) {
                return Err(Error::ZeroDiagonal(i));
            }
            inv_diagonal.push(T::ONE / d);
        }
        let max = lambda_max;
        let min = lambda_max / range;
        Ok(Self {
            degree,
            inv_diagonal,
            theta: 0.5 * (max + min),
            delta: 0.5 * (max - min),
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// The interval midpoint; `1/theta` is the damped-Jacobi weight of the
    /// degree-1 smoother.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// `x <- x + p(D^{-1}A) D^{-1} (b - A x)` with the Chebyshev polynomial
    /// of the configured degree.
    pub fn smooth<F>(&self, op: F, b: &[T], x: &mut [T])
    where
        F: Fn(&mut [T], &[T]),
    {
        let mut r = vec![T::ZERO; b.len()];
        op(&mut r, x);
        for (ri, &bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        self.smooth_residual(op, r, x);
    }

    /// Same smoothing step starting from `x = 0`, saving one operator
    /// application; used for the pre-smoothing of a V-cycle.
    pub fn smooth_from_zero<F>(&self, op: F, b: &[T], x: &mut [T])
    where
        F: Fn(&mut [T], &[T]),
    {
        x.iter_mut().for_each(|v| *v = T::ZERO);
        self.smooth_residual(op, b.to_vec(), x);
    }

    fn smooth_residual<F>(&self, op: F, mut r: Vec<T>, x: &mut [T])
    where
        F: Fn(&mut [T], &[T]),
    {
        let n = r.len();
        debug_assert_eq!(n, self.inv_diagonal.len());
        let sigma1 = self.theta / self.delta;
        let inv_theta = T::from_f64(1.0 / self.theta);
        let mut d: Vec<T> = (0..n)
            .map(|i| inv_theta * self.inv_diagonal[i] * r[i])
            .collect();
        for i in 0..n {
            x[i] += d[i];
        }
        let mut rho_prev = 1.0 / sigma1;
        let mut a_d = vec![T::ZERO; n];
        for _ in 1..self.degree {
            op(&mut a_d, &d);
            for i in 0..n {
                r[i] = r[i] - a_d[i];
            }
            let rho = 1.0 / (2.0 * sigma1 - rho_prev);
            let c1 = T::from_f64(rho * rho_prev);
            let c2 = T::from_f64(2.0 * rho / self.delta);
            for i in 0..n {
                d[i] = c1 * d[i] + c2 * self.inv_diagonal[i] * r[i];
                x[i] += d[i];
            }
            rho_prev = rho;
        }
    }
}
