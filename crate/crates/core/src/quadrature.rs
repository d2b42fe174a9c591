//! Gauss–Legendre rules on [-1, 1] and their tensor products on rectangles.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `order`-point rule by Newton iteration on P_n, starting
    /// from the Chebyshev-like asymptotic guess for each root.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be at least 1");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(mid + half * t))
            .sum::<f64>()
            * half
    }

    /// Tensor-product integral of `f` over `[x0, x1] × [y0, y1]`.
    pub fn integrate_rect<F: Fn(f64, f64) -> f64>(&self, x: (f64, f64), y: (f64, f64), f: F) -> f64 {
        let hx = 0.5 * (x.1 - x.0);
        let mx = 0.5 * (x.1 + x.0);
        let hy = 0.5 * (y.1 - y.0);
        let my = 0.5 * (y.1 + y.0);
        let mut acc = 0.0;
        for (&tx, &wx) in self.nodes.iter().zip(&self.weights) {
            let xv = mx + hx * tx;
            let mut row = 0.0;
            for (&ty, &wy) in self.nodes.iter().zip(&self.weights) {
                row += wy * f(xv, my + hy * ty);
            }
            acc += wx * row;
        }
        acc * hx * hy
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = if n == 0 {
        0.0
    } else {
        n as f64 * (x * p1 - p0) / (x * x - 1.0)
    };
    (p, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 16, 32, 64] {
            let r = GaussLegendre::new(n);
            assert_relative_eq!(r.weights.iter().sum::<f64>(), 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn three_point_rule_matches_table() {
        let r = GaussLegendre::new(3);
        assert_relative_eq!(r.nodes[2], (0.6f64).sqrt(), epsilon = 1e-15);
        assert_relative_eq!(r.weights[0], 5.0 / 9.0, epsilon = 1e-15);
        assert_relative_eq!(r.weights[1], 8.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let r = GaussLegendre::new(6);
        for deg in 0..12 {
            let got = r.integrate(0.0, 2.0, |x| x.powi(deg));
            let want = 2f64.powi(deg + 1) / (deg as f64 + 1.0);
            assert_relative_eq!(got, want, max_relative = 1e-13);
        }
    }

    #[test]
    fn rectangle_integral() {
        let r = GaussLegendre::new(8);
        let got = r.integrate_rect((0.0, 1.0), (-1.0, 2.0), |x, y| x * x * y + 1.0);
        // ∫0^1 x² dx · ∫-1^2 y dy + area = 1/3 · 3/2 + 3
        assert_relative_eq!(got, 0.5 + 3.0, epsilon = 1e-13);
    }
}
