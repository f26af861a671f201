//! Quadrature rules used to project noise operators and test basis
//! orthonormality: Gauss-Legendre on [-1, 1], the periodic trapezoid rule on
//! [0, 2 pi), Gauss-Hermite with weight exp(-x^2), and the affine map that
//! turns a Gauss-Legendre rule into a rule for integrals over the unit-disk
//! radius, integral_0^1 f(r) r dr.
//!
//! Gauss-Legendre nodes are Newton-refined roots of P_n; Gauss-Hermite comes
//! from the Golub-Welsch eigenproblem of the Jacobi tridiagonal. Both are
//! deterministic and fail hard on non-convergence rather than returning
//! degraded rules.

use crate::error::{Error, Result};
use crate::matrix::{sym_eigen, SymMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureDomain {
    /// [-1, 1] with weight 1.
    SymmetricInterval,
    /// [0, 1] with weight r (radial part of a disk integral).
    Radial,
    /// [0, 2 pi) periodic, weight 1.
    Periodic,
    /// (-inf, inf) with weight exp(-x^2).
    HermiteWeight,
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub domain: QuadratureDomain,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sum_i w_i f(x_i).
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Quadrature orders used when discretizing a basis.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSet {
    /// Gauss-Legendre order for the disk radius.
    pub radial: usize,
    /// Trapezoid points for periodic angles (disk theta, sphere phi).
    pub angular: usize,
    /// Gauss-Hermite order per oscillator dimension.
    pub hermite: usize,
    /// Gauss-Legendre order in cos(theta) for the sphere polar angle.
    pub sphere_polar: usize,
}

impl Default for QuadratureSet {
    fn default() -> Self {
        QuadratureSet {
            radial: 64,
            angular: 128,
            hermite: 80,
            sphere_polar: 64,
        }
    }
}

fn check_order(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "order",
            message: "quadrature order must be >= 1".into(),
        });
    }
    if n > 4096 {
        return Err(Error::SizeLimit {
            what: "quadrature order",
            got: n,
            max: 4096,
        });
    }
    Ok(())
}

/// Legendre polynomial value and derivative at x by the three-term
/// recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0_f64;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // derivative from P_n and P_{n-1}
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// n-point Gauss-Legendre rule on [-1, 1]. Exact for polynomials of degree
/// <= 2n - 1. Nodes ascending, exactly antisymmetric about 0.
pub fn gauss_legendre_rule(n: usize) -> Result<QuadratureRule> {
    check_order(n)?;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess, counted from the upper end.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, d) = legendre_pair(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() <= NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::ConvergenceFailure {
                what: "Gauss-Legendre Newton iteration",
                iterations: NEWTON_MAX_ITER,
            });
        }
        // polish once more and recompute the derivative at the final node
        let (p, d) = legendre_pair(n, x);
        x -= p / d;
        let (_, dp) = legendre_pair(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // x is the i-th node from the top; mirror to fill both ends.
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_pair(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        domain: QuadratureDomain::SymmetricInterval,
    })
}

/// n-point periodic trapezoid rule: theta_j = 2 pi j / n, weight 2 pi / n.
/// Spectrally accurate for smooth 2 pi-periodic integrands; integrates
/// trigonometric polynomials of degree < n exactly.
pub fn trapezoid_periodic_rule(n: usize) -> Result<QuadratureRule> {
    check_order(n)?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let nodes = (0..n).map(|j| two_pi * j as f64 / n as f64).collect();
    let weights = vec![two_pi / n as f64; n];
    Ok(QuadratureRule {
        nodes,
        weights,
        domain: QuadratureDomain::Periodic,
    })
}

/// n-point Gauss-Hermite rule for integral f(x) exp(-x^2) dx, by
/// eigendecomposition of the symmetric tridiagonal Jacobi matrix
/// (Golub-Welsch): off-diagonal beta_k = sqrt(k / 2), weights
/// sqrt(pi) * (first eigenvector component)^2. Nodes ascending, exactly
/// antisymmetric.
pub fn gauss_hermite_rule(n: usize) -> Result<QuadratureRule> {
    check_order(n)?;
    if n > 256 {
        return Err(Error::SizeLimit {
            what: "Gauss-Hermite order",
            got: n,
            max: 256,
        });
    }
    let mut jac = SymMatrix::zeros(n);
    for k in 1..n {
        jac.set(k - 1, k, (k as f64 / 2.0).sqrt());
    }
    let eig = sym_eigen(&jac)?;
    let mu0 = std::f64::consts::PI.sqrt();
    let mut nodes = eig.values.clone();
    let mut weights: Vec<f64> = (0..n)
        .map(|j| {
            let v0 = eig.vectors[j]; // row 0, column j
            mu0 * v0 * v0
        })
        .collect();
    // Enforce the exact symmetry the rule has analytically.
    let m = n / 2;
    for i in 0..m {
        let x = 0.5 * (nodes[n - 1 - i] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[n - 1 - i]);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[m] = 0.0;
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        domain: QuadratureDomain::HermiteWeight,
    })
}

/// Maps a Gauss-Legendre rule on [-1, 1] to the disk radius: r = (x + 1) / 2
/// on [0, 1] with the area element folded in, so
/// sum_i w_i f(r_i) ~ integral_0^1 f(r) r dr.
pub fn map_to_radial(rule: &QuadratureRule) -> Result<QuadratureRule> {
    if rule.domain != QuadratureDomain::SymmetricInterval {
        return Err(Error::InvalidParameter {
            name: "rule",
            message: "radial map expects a rule on [-1, 1]".into(),
        });
    }
    let nodes: Vec<f64> = rule.nodes.iter().map(|&x| 0.5 * (x + 1.0)).collect();
    let weights: Vec<f64> = rule
        .weights
        .iter()
        .zip(&nodes)
        .map(|(&w, &r)| 0.5 * w * r)
        .collect();
    Ok(QuadratureRule {
        nodes,
        weights,
        domain: QuadratureDomain::Radial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_two_point() {
        let r = gauss_legendre_rule(2).unwrap();
        let x = 1.0 / 3.0_f64.sqrt();
        assert_relative_eq!(r.nodes[0], -x, epsilon = 1e-15);
        assert_relative_eq!(r.nodes[1], x, epsilon = 1e-15);
        assert_relative_eq!(r.weights[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(r.weights[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn gauss_legendre_five_point_integrates_x8() {
        // degree 8 <= 2*5 - 1
        let r = gauss_legendre_rule(5).unwrap();
        let v = r.integrate(|x| x.powi(8));
        assert_relative_eq!(v, 2.0 / 9.0, max_relative = 1e-14);
    }

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for n in [1, 2, 3, 7, 16, 64, 128] {
            let r = gauss_legendre_rule(n).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert_relative_eq!(s, 2.0, max_relative = 1e-14);
            // nodes strictly ascending and antisymmetric
            for i in 1..n {
                assert!(r.nodes[i] > r.nodes[i - 1]);
            }
            for i in 0..n {
                assert_eq!(r.nodes[i], -r.nodes[n - 1 - i]);
            }
        }
    }

    #[test]
    fn trapezoid_rule_sums_to_two_pi_and_kills_harmonics() {
        let r = trapezoid_periodic_rule(16).unwrap();
        let s: f64 = r.weights.iter().sum();
        assert_relative_eq!(s, 2.0 * std::f64::consts::PI, max_relative = 1e-14);
        for m in 1..8 {
            let v = r.integrate(|t| (m as f64 * t).cos());
            assert!(v.abs() < 1e-13, "harmonic {m} not annihilated: {v}");
        }
        let v = r.integrate(|t| (3.0 * t).cos().powi(2));
        assert_relative_eq!(v, std::f64::consts::PI, max_relative = 1e-13);
    }

    #[test]
    fn gauss_hermite_small_orders_closed_form() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let r1 = gauss_hermite_rule(1).unwrap();
        assert_eq!(r1.nodes[0], 0.0);
        assert_relative_eq!(r1.weights[0], sqrt_pi, epsilon = 1e-14);

        let r2 = gauss_hermite_rule(2).unwrap();
        let x = 1.0 / 2.0_f64.sqrt();
        assert_relative_eq!(r2.nodes[0], -x, epsilon = 1e-14);
        assert_relative_eq!(r2.nodes[1], x, epsilon = 1e-14);
        assert_relative_eq!(r2.weights[0], sqrt_pi / 2.0, epsilon = 1e-14);
        assert_relative_eq!(r2.weights[1], sqrt_pi / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn gauss_hermite_integrates_x4() {
        // integral x^4 exp(-x^2) = 3 sqrt(pi) / 4
        let r = gauss_hermite_rule(10).unwrap();
        let v = r.integrate(|x| x.powi(4));
        assert_relative_eq!(v, 0.75 * std::f64::consts::PI.sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn gauss_hermite_order_80_moments() {
        let r = gauss_hermite_rule(80).unwrap();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let v0 = r.integrate(|_| 1.0);
        assert_relative_eq!(v0, sqrt_pi, max_relative = 1e-13);
        // integral x^10 exp(-x^2) = 945/32 sqrt(pi)
        let v10 = r.integrate(|x| x.powi(10));
        assert_relative_eq!(v10, 945.0 / 32.0 * sqrt_pi, max_relative = 1e-12);
    }

    #[test]
    fn radial_map_integrates_monomials() {
        let r = map_to_radial(&gauss_legendre_rule(8).unwrap()).unwrap();
        // integral_0^1 r dr = 1/2 (f = 1)
        assert_relative_eq!(r.integrate(|_| 1.0), 0.5, max_relative = 1e-14);
        // integral_0^1 r^3 dr = 1/4 (f = r^2)
        assert_relative_eq!(r.integrate(|x| x * x), 0.25, max_relative = 1e-14);
        assert!(r.nodes.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn zero_order_rejected() {
        assert!(gauss_legendre_rule(0).is_err());
        assert!(trapezoid_periodic_rule(0).is_err());
        assert!(gauss_hermite_rule(0).is_err());
    }
}
