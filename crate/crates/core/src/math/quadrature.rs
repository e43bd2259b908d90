//! Gauss-Legendre rules and the polar-grid integrator used by the
//! overlap and normalization integrals.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MIN_ORDER: usize = 2;
pub const MAX_ORDER: usize = 2048;

/// Nodes and weights of a Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    order: usize,
}

impl QuadratureRule {
    /// Builds the rule of the given order by Newton iteration on the
    /// Legendre polynomial roots. Nodes come out strictly increasing and
    /// exactly symmetric about zero; weights are positive and sum to 2.
    pub fn gauss_legendre(order: usize) -> Result<Self> {
        if !(MIN_ORDER..=MAX_ORDER).contains(&order) {
            return Err(Error::domain(format!(
                "gauss_legendre order {order} outside {MIN_ORDER}..={MAX_ORDER}"
            )));
        }
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n / 2;

        for i in 0..half {
            // i-th root counted from x = +1 downward
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, z);
                let dz = p / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, z);
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[n - 1 - i] = z;
            nodes[i] = -z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            let (_, dp) = legendre_with_derivative(n, 0.0);
            nodes[half] = 0.0;
            weights[half] = 2.0 / (dp * dp);
        }

        Ok(QuadratureRule {
            nodes,
            weights,
            order,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let scale = 0.5 * (b - a);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + scale * x);
        }
        scale * acc
    }

    /// Integrates a complex-valued `f` over [a, b].
    pub fn integrate_complex<F: FnMut(f64) -> Complex64>(
        &self,
        a: f64,
        b: f64,
        mut f: F,
    ) -> Complex64 {
        let mid = 0.5 * (a + b);
        let scale = 0.5 * (b - a);
        let mut acc = Complex64::new(0.0, 0.0);
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += f(mid + scale * x) * w;
        }
        acc * scale
    }
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    if n == 1 {
        return (x, 1.0);
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// The azimuthal node set: uniform with nodes at phi = -pi + (j + stagger) h.
/// `stagger = 0.5` gives the midpoint grid, which maps onto itself under
/// phi -> -phi; other staggers are deliberately asymmetric.
#[derive(Debug, Clone, Copy)]
pub struct AzimuthalGrid {
    pub n_phi: usize,
    pub stagger: f64,
}

impl AzimuthalGrid {
    pub fn midpoint(n_phi: usize) -> Self {
        AzimuthalGrid {
            n_phi,
            stagger: 0.5,
        }
    }

    pub fn node(&self, j: usize) -> f64 {
        let h = std::f64::consts::TAU / self.n_phi as f64;
        -std::f64::consts::PI + (j as f64 + self.stagger) * h
    }

    pub fn weight(&self) -> f64 {
        std::f64::consts::TAU / self.n_phi as f64
    }
}

/// Integral of f(rho, phi) rho drho dphi over the disk rho <= rho_max,
/// Gauss-Legendre in rho and the midpoint rule in phi.
pub fn integrate_2d_polar<F>(f: F, rho_max: f64, n_rho: usize, n_phi: usize) -> Result<Complex64>
where
    F: FnMut(f64, f64) -> Complex64,
{
    integrate_2d_polar_on(f, rho_max, n_rho, AzimuthalGrid::midpoint(n_phi))
}

/// Same as [`integrate_2d_polar`] but with an explicit azimuthal grid, so
/// the negation symmetry of the node set can be broken on purpose.
pub fn integrate_2d_polar_on<F>(
    mut f: F,
    rho_max: f64,
    n_rho: usize,
    phi_grid: AzimuthalGrid,
) -> Result<Complex64>
where
    F: FnMut(f64, f64) -> Complex64,
{
    if rho_max.is_nan() || rho_max <= 0.0 {
        return Err(Error::domain(format!(
            "integrate_2d_polar rho_max {rho_max} must be positive"
        )));
    }
    if n_rho < 4 || phi_grid.n_phi < 4 {
        return Err(Error::domain(
            "integrate_2d_polar needs n_rho >= 4 and n_phi >= 4".to_string(),
        ));
    }
    if !phi_grid.n_phi.is_multiple_of(2) {
        return Err(Error::domain(format!(
            "integrate_2d_polar n_phi {} must be even",
            phi_grid.n_phi
        )));
    }

    let rule = QuadratureRule::gauss_legendre(n_rho)?;
    let w_phi = phi_grid.weight();
    let mut total = Complex64::new(0.0, 0.0);
    for (&x, &w_rho) in rule.nodes().iter().zip(rule.weights()) {
        let rho = 0.5 * (x + 1.0) * rho_max;
        let mut ring = Complex64::new(0.0, 0.0);
        for j in 0..phi_grid.n_phi {
            let phi = phi_grid.node(j);
            let v = f(rho, phi);
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Evaluation(format!(
                    "non-finite integrand sample at rho = {rho:.6e}, phi = {phi:.6e}"
                )));
            }
            ring += v;
        }
        total += ring * (w_phi * w_rho * rho);
    }
    Ok(total * (0.5 * rho_max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_rule_is_textbook() {
        let rule = QuadratureRule::gauss_legendre(2).unwrap();
        let s = 1.0 / 3.0f64.sqrt();
        assert!((rule.nodes()[0] + s).abs() < 1e-15);
        assert!((rule.nodes()[1] - s).abs() < 1e-15);
        assert!((rule.weights()[0] - 1.0).abs() < 1e-15);
        assert!((rule.weights()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_interval_measure() {
        for order in [2, 3, 5, 17, 64, 255, 600] {
            let rule = QuadratureRule::gauss_legendre(order).unwrap();
            let sum: f64 = rule.weights().iter().sum();
            assert!((sum - 2.0).abs() < 1e-12, "order {order}: sum {sum}");
            for pair in rule.nodes().windows(2) {
                assert!(pair[0] < pair[1]);
            }
            for i in 0..order {
                assert!((rule.nodes()[i] + rule.nodes()[order - 1 - i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn polynomial_exactness() {
        // order 5 integrates x^8 exactly: int_{-1}^{1} x^8 dx = 2/9
        let rule = QuadratureRule::gauss_legendre(5).unwrap();
        let got = rule.integrate(-1.0, 1.0, |x| x.powi(8));
        assert!((got - 2.0 / 9.0).abs() < 1e-13);

        for order in [2usize, 3, 8, 30] {
            let rule = QuadratureRule::gauss_legendre(order).unwrap();
            for k in (0..2 * order).step_by(2) {
                let got = rule.integrate(-1.0, 1.0, |x| x.powi(k as i32));
                let want = 2.0 / (k as f64 + 1.0);
                assert!(
                    (got - want).abs() < 1e-12,
                    "order {order} moment {k}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn gaussian_matches_trapezoid_oracle() {
        // Frozen from a 10^6-interval trapezoid rule for exp(-x^2) on [-1, 1].
        let oracle = trapezoid(|x| (-x * x).exp(), -1.0, 1.0, 1_000_000);
        let rule = QuadratureRule::gauss_legendre(64).unwrap();
        let got = rule.integrate(-1.0, 1.0, |x| (-x * x).exp());
        assert!((got - oracle).abs() < 1e-12, "{got} vs {oracle}");
    }

    fn trapezoid<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = 0.5 * (f(a) + f(b));
        for i in 1..n {
            acc += f(a + i as f64 * h);
        }
        acc * h
    }

    #[test]
    fn order_out_of_range() {
        assert!(QuadratureRule::gauss_legendre(1).is_err());
        assert!(QuadratureRule::gauss_legendre(2049).is_err());
    }

    #[test]
    fn polar_disk_area() {
        let got = integrate_2d_polar(|_, _| Complex64::new(1.0, 0.0), 2.0, 32, 32).unwrap();
        assert!((got.re - 4.0 * std::f64::consts::PI).abs() < 1e-10);
        assert!(got.im.abs() < 1e-12);
    }

    #[test]
    fn polar_full_turn_phase_averages_out() {
        let got = integrate_2d_polar(
            |_, phi| Complex64::from_polar(1.0, phi),
            1.0,
            16,
            64,
        )
        .unwrap();
        assert!(got.norm() < 1e-12);
    }

    #[test]
    fn polar_cos_squared_oracle() {
        // int_0^1 int_0^{2pi} rho cos^2(phi) rho drho dphi = pi/3 by hand
        let got = integrate_2d_polar(
            |rho, phi| Complex64::new(rho * phi.cos().powi(2), 0.0),
            1.0,
            32,
            64,
        )
        .unwrap();
        assert!((got.re - std::f64::consts::PI / 3.0).abs() < 1e-10);
    }

    #[test]
    fn polar_rejects_bad_grids() {
        let one = |_: f64, _: f64| Complex64::new(1.0, 0.0);
        assert!(integrate_2d_polar(one, -1.0, 16, 16).is_err());
        assert!(integrate_2d_polar(one, 1.0, 2, 16).is_err());
        assert!(integrate_2d_polar(one, 1.0, 16, 15).is_err());
    }

    #[test]
    fn polar_reports_offending_node() {
        let err = integrate_2d_polar(
            |rho, _| Complex64::new(if rho > 0.5 { f64::NAN } else { 1.0 }, 0.0),
            1.0,
            8,
            8,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("rho"), "{msg}");
    }

    #[test]
    fn midpoint_grid_is_negation_symmetric() {
        let grid = AzimuthalGrid::midpoint(16);
        for j in 0..16 {
            let neg = -grid.node(j);
            let found = (0..16).any(|k| (grid.node(k) - neg).abs() < 1e-12);
            assert!(found, "node {j} has no negated partner");
        }
    }

    #[test]
    fn polar_doubling_converges_for_smooth_integrands() {
        let f = |rho: f64, phi: f64| {
            Complex64::from_polar((-rho * rho).exp() * (1.0 + 0.3 * phi.cos()), 2.0 * phi)
        };
        let coarse = integrate_2d_polar(f, 3.0, 32, 32).unwrap();
        let fine = integrate_2d_polar(f, 3.0, 64, 64).unwrap();
        assert!((fine - coarse).norm() < 1e-8, "{:.3e}", (fine - coarse).norm());
    }

    #[test]
    fn phi_negation_conjugates_hermitian_integrands() {
        // With f(rho, -phi) = conj(f(rho, phi)), re-integrating the
        // negated integrand gives the conjugate result; the midpoint
        // grid preserves this exactly because it maps onto itself under
        // phi -> -phi.
        let f = |rho: f64, phi: f64| {
            let decay = (-rho).exp();
            Complex64::new(0.7 * decay, 0.0)
                + Complex64::from_polar(decay, phi)
                + Complex64::from_polar(0.3 * decay, 2.0 * phi)
        };
        let direct = integrate_2d_polar(f, 2.0, 24, 32).unwrap();
        let negated = integrate_2d_polar(|rho, phi| f(rho, -phi), 2.0, 24, 32).unwrap();
        assert!((negated - direct.conj()).norm() < 1e-13);
    }
}
