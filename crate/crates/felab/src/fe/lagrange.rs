//! One-dimensional building blocks: Gauss point computation and Lagrange
//! interpolation on arbitrary node sets in `[0, 1]`.

/// Evaluates the Legendre polynomial `P_n` and its derivative at `x` on the
/// standard interval `[-1, 1]` via the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 1..n {
        let k = k as f64;
        let p_next = ((2.0 * k + 1.0) * x * p - k * p_prev) / (k + 1.0);
        p_prev = p;
        p = p_next;
    }
    // P'_n(x) = n (x P_n - P_{n-1}) / (x^2 - 1), valid away from the endpoints.
    let dp = if (x * x - 1.0).abs() < 1e-30 {
        // Endpoint values: P'_n(±1) = (±1)^{n-1} n(n+1)/2.
        let sign = if x > 0.0 { 1.0 } else { (-1.0f64).powi(n as i32 - 1) };
        sign * (n * (n + 1)) as f64 / 2.0
    } else {
        n as f64 * (x * p - p_prev) / (x * x - 1.0)
    };
    (p, dp)
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[0, 1]`.
///
/// Roots are found by Newton iteration from the Chebyshev initial guess;
/// for the modest orders used here this converges in a handful of steps.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature needs at least one point");
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map from [-1, 1] to [0, 1]; cos gives descending roots, so flip.
        points[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 0.5 * w;
    }
    (points, weights)
}

/// Nodes of the `n`-point Gauss-Lobatto rule on `[0, 1]`, endpoints included.
///
/// The interior nodes are the roots of `P'_{n-1}`; they serve as element
/// support points, so only the nodes are computed, not the weights.
pub fn gauss_lobatto(n: usize) -> Vec<f64> {
    assert!(n >= 2, "Lobatto nodes include both endpoints");
    let mut nodes = vec![0.0; n];
    nodes[0] = 0.0;
    nodes[n - 1] = 1.0;
    let m = n - 1;
    for i in 1..n - 1 {
        // Chebyshev-Lobatto points interlace the true roots closely.
        let mut x = -(std::f64::consts::PI * i as f64 / m as f64).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(m, x);
            // Legendre's ODE gives P''_m in terms of P'_m and P_m.
            let ddp = (2.0 * x * dp - (m * (m + 1)) as f64 * p) / (1.0 - x * x);
            let dx = dp / ddp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = 0.5 * (x + 1.0);
    }
    nodes
}

/// Lagrange interpolation basis on a fixed set of distinct 1d nodes.
#[derive(Clone, Debug)]
pub struct Lagrange1d {
    nodes: Vec<f64>,
}

impl Lagrange1d {
    pub fn new(nodes: Vec<f64>) -> Self {
        for w in nodes.windows(2) {
            assert!(w[1] > w[0], "nodes must be strictly increasing");
        }
        Lagrange1d { nodes }
    }

    /// Basis on the `p+1` Gauss-Lobatto support points of degree `p`.
    pub fn on_lobatto(degree: usize) -> Self {
        Lagrange1d::new(gauss_lobatto(degree + 1))
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Value of basis function `i` at `x`, by the product formula.
    pub fn value(&self, i: usize, x: f64) -> f64 {
        let xi = self.nodes[i];
        let mut acc = 1.0;
        for (j, &xj) in self.nodes.iter().enumerate() {
            if j != i {
                acc *= (x - xj) / (xi - xj);
            }
        }
        acc
    }

    /// Derivative of basis function `i` at `x`.
    pub fn derivative(&self, i: usize, x: f64) -> f64 {
        let xi = self.nodes[i];
        let mut acc = 0.0;
        for (k, &xk) in self.nodes.iter().enumerate() {
            if k == i {
                continue;
            }
            let mut term = 1.0 / (xi - xk);
            for (j, &xj) in self.nodes.iter().enumerate() {
                if j != i && j != k {
                    term *= (x - xj) / (xi - xj);
                }
            }
            acc += term;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_two_points() {
        let (x, w) = gauss_legendre(2);
        let off = 1.0 / (2.0 * 3.0f64.sqrt());
        assert!((x[0] - (0.5 - off)).abs() < 1e-15);
        assert!((x[1] - (0.5 + off)).abs() < 1e-15);
        assert!((w[0] - 0.5).abs() < 1e-15);
        assert!((w[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gauss_three_points_integrate_x5() {
        let (x, w) = gauss_legendre(3);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(5)).sum();
        assert!((integral - 1.0 / 6.0).abs() <= 1e-14);
    }

    #[test]
    fn gauss_exactness_up_to_degree() {
        for n in 1..=6 {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for a in 0..=(2 * n - 1) {
                let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(a as i32)).sum();
                let exact = 1.0 / (a as f64 + 1.0);
                assert!(
                    (integral - exact).abs() < 1e-13 * exact.abs().max(1.0),
                    "n = {n}, monomial x^{a}"
                );
            }
        }
    }

    #[test]
    fn lobatto_nodes_match_closed_forms() {
        assert_eq!(gauss_lobatto(2), vec![0.0, 1.0]);

        let n3 = gauss_lobatto(3);
        assert!((n3[1] - 0.5).abs() < 1e-15);

        // Interior nodes of the 4-point rule: (1 ± 1/√5)/2.
        let n4 = gauss_lobatto(4);
        let off = 1.0 / 5.0f64.sqrt();
        assert!((n4[1] - 0.5 * (1.0 - off)).abs() < 1e-14);
        assert!((n4[2] - 0.5 * (1.0 + off)).abs() < 1e-14);

        // Interior nodes of the 5-point rule: 1/2 and (1 ± √(3/7))/2.
        let n5 = gauss_lobatto(5);
        let off = (3.0f64 / 7.0).sqrt();
        assert!((n5[1] - 0.5 * (1.0 - off)).abs() < 1e-14);
        assert!((n5[2] - 0.5).abs() < 1e-15);
        assert!((n5[3] - 0.5 * (1.0 + off)).abs() < 1e-14);
    }

    #[test]
    fn lagrange_kronecker_property() {
        for degree in 1..=4 {
            let basis = Lagrange1d::on_lobatto(degree);
            for i in 0..basis.n_nodes() {
                for j in 0..basis.n_nodes() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((basis.value(i, basis.nodes()[j]) - expected).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn lagrange_derivative_matches_finite_difference() {
        let basis = Lagrange1d::on_lobatto(3);
        let h = 1e-6;
        for i in 0..basis.n_nodes() {
            for &x in &[0.1, 0.37, 0.5, 0.82] {
                let fd = (basis.value(i, x + h) - basis.value(i, x - h)) / (2.0 * h);
                assert!((basis.derivative(i, x) - fd).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn linear_basis_derivative_constant() {
        let basis = Lagrange1d::on_lobatto(1);
        for &x in &[0.0, 0.3, 1.0] {
            assert!((basis.derivative(0, x) + 1.0).abs() < 1e-15);
            assert!((basis.derivative(1, x) - 1.0).abs() < 1e-15);
        }
    }
}
