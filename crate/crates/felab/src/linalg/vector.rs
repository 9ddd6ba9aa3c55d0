//! Small helpers on `&[f64]` slices; vectors are plain `Vec<f64>`.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `y = x + beta * y` (the CG direction update)
pub fn xpby(x: &[f64], beta: f64, y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi = xi + beta * *yi;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let a = vec![1.0, 2.0, 2.0];
        let b = vec![3.0, 0.0, 4.0];
        assert_eq!(dot(&a, &b), 11.0);
        assert_eq!(norm(&a), 3.0);
        let mut y = b.clone();
        axpy(2.0, &a, &mut y);
        assert_eq!(y, vec![5.0, 4.0, 8.0]);
        let mut y = vec![1.0, 1.0, 1.0];
        xpby(&a, 0.5, &mut y);
        assert_eq!(y, vec![1.5, 2.5, 2.5]);
    }
}
