//! Nyström grids and quadrature rules.
//!
//! Uniform-parameter trapezoid grids are spectrally accurate for the
//! analytic curve families here; the dedicated product rule handles the
//! 2π-periodic logarithmic singularity `ln(4 sin²((t−s)/2))`.

use crate::error::{Error, Result};
use crate::geometry::{Curve, Vec2};
use std::f64::consts::TAU;

/// Nyström discretization of one closed curve: nodes, outward normals,
/// parameterization speeds, curvatures, and arclength weights.
#[derive(Debug, Clone)]
pub struct BoundaryGrid {
    pub curve: Curve,
    pub n: usize,
    pub nodes_t: Vec<f64>,
    pub positions: Vec<Vec2>,
    pub normals: Vec<Vec2>,
    pub speeds: Vec<f64>,
    pub curvatures: Vec<f64>,
    /// Arclength weights `w_k = 2π s_k / N`.
    pub weights: Vec<f64>,
}

impl BoundaryGrid {
    pub fn new(curve: &Curve, n: usize) -> Result<Self> {
        if n < 16 || n % 2 != 0 {
            return Err(Error::domain(format!("grid size must be even and >= 16, got {n}")));
        }
        let mut nodes_t = Vec::with_capacity(n);
        let mut positions = Vec::with_capacity(n);
        let mut normals = Vec::with_capacity(n);
        let mut speeds = Vec::with_capacity(n);
        let mut curvatures = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let h = TAU / n as f64;
        for k in 0..n {
            let t = h * k as f64;
            nodes_t.push(t);
            positions.push(curve.position(t));
            normals.push(curve.outward_normal(t));
            let s = curve.speed(t);
            speeds.push(s);
            curvatures.push(curve.curvature(t)?);
            weights.push(h * s);
        }
        Ok(BoundaryGrid {
            curve: curve.clone(),
            n,
            nodes_t,
            positions,
            normals,
            speeds,
            curvatures,
            weights,
        })
    }

    pub fn perimeter(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Largest node arc spacing, `2π s_max / N`.
    pub fn max_spacing(&self) -> f64 {
        self.speeds.iter().fold(0.0f64, |a, &s| a.max(s)) * TAU / self.n as f64
    }
}

/// Integrates nodal samples against the arclength weights.
pub fn trapezoid_integrate(grid: &BoundaryGrid, samples: &[f64]) -> Result<f64> {
    if samples.len() != grid.n {
        return Err(Error::domain(format!(
            "sample length {} does not match grid size {}",
            samples.len(),
            grid.n
        )));
    }
    Ok(grid.weights.iter().zip(samples).map(|(w, f)| w * f).sum())
}

/// Spectral product quadrature for the periodic log kernel.
///
/// For a 2π-periodic `f` sampled at `t_k = 2πk/N` the rule approximates
/// `∫₀^{2π} ln(4 sin²((t_j − s)/2)) f(s) ds ≈ Σ_k R_{jk} f(t_k)`,
/// exactly for trigonometric polynomials of degree < N/2. The weight
/// matrix is circulant; only its first row is stored.
#[derive(Debug, Clone)]
pub struct LogQuadratureRule {
    pub n: usize,
    row: Vec<f64>,
}

impl LogQuadratureRule {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2 && n % 2 == 0, "log rule needs even N");
        let half = n / 2;
        let mut row = Vec::with_capacity(n);
        for d in 0..n {
            let td = TAU * d as f64 / n as f64;
            let mut sum = 0.0;
            for m in 1..half {
                sum += (m as f64 * td).cos() / m as f64;
            }
            let nyquist = (half as f64 * td).cos() / half as f64;
            row.push(-(4.0 * std::f64::consts::PI / n as f64) * (sum + 0.5 * nyquist));
        }
        LogQuadratureRule { n, row }
    }

    #[inline]
    pub fn weight(&self, j: usize, k: usize) -> f64 {
        let d = if j >= k { j - k } else { k - j };
        self.row[d]
    }

    /// Applies the rule with target node `j` to nodal samples.
    pub fn apply(&self, j: usize, samples: &[f64]) -> f64 {
        samples
            .iter()
            .enumerate()
            .map(|(k, f)| self.weight(j, k) * f)
            .sum()
    }
}

/// Default resolution policy: grids must resolve the `O(√ε)` density
/// peaks near the gap.
pub fn default_grid_size(eps: f64) -> usize {
    let n = (64.0 / eps.sqrt()).ceil() as usize;
    let n = n.max(256);
    if n % 2 == 0 {
        n
    } else {
        n + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn unit_circle_grid(n: usize) -> BoundaryGrid {
        let c = Curve::circle(Vec2::zeros(), 1.0).unwrap();
        BoundaryGrid::new(&c, n).unwrap()
    }

    #[test]
    fn circle_grid_weights_and_perimeter() {
        let g = unit_circle_grid(64);
        for w in &g.weights {
            assert_relative_eq!(*w, TAU / 64.0, epsilon = 1e-14);
        }
        assert_relative_eq!(g.perimeter(), TAU, epsilon = 1e-12);
    }

    #[test]
    fn ellipse_perimeter_matches_adaptive_quadrature() {
        let e = Curve::ellipse(Vec2::zeros(), 2.0, 1.0, 0.4).unwrap();
        let g = BoundaryGrid::new(&e, 256).unwrap();

        // Adaptive Simpson oracle on the speed.
        fn simpson(e: &Curve, a: f64, b: f64, fa: f64, fm: f64, fb: f64, tol: f64) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = e.speed(lm);
            let frm = e.speed(rm);
            let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if (left + right - whole).abs() < 15.0 * tol {
                left + right + (left + right - whole) / 15.0
            } else {
                simpson(e, a, m, fa, flm, fm, tol / 2.0) + simpson(e, m, b, fm, frm, fb, tol / 2.0)
            }
        }
        let oracle = simpson(&e, 0.0, TAU, e.speed(0.0), e.speed(PI), e.speed(TAU), 1e-13);
        assert_relative_eq!(g.perimeter(), oracle, epsilon = 1e-10);
    }

    #[test]
    fn normals_are_unit_outward_and_orthogonal() {
        let f = Curve::fourier_radial(Vec2::zeros(), 1.0, vec![0.05], vec![0.02]).unwrap();
        let g = BoundaryGrid::new(&f, 128).unwrap();
        for k in 0..g.n {
            assert_relative_eq!(g.normals[k].norm(), 1.0, epsilon = 1e-13);
            assert!(g.normals[k].dot(&f.derivative(g.nodes_t[k])).abs() < 1e-12);
            // A short step along the normal leaves the curve.
            let probe = g.positions[k] + 1e-4 * g.normals[k];
            assert!(!f.contains(probe));
        }
    }

    #[test]
    fn closed_curve_normal_balance() {
        let e = Curve::ellipse(Vec2::new(0.3, -0.2), 1.7, 0.9, 0.7).unwrap();
        let g = BoundaryGrid::new(&e, 128).unwrap();
        let mut sum = Vec2::zeros();
        for k in 0..g.n {
            sum += g.weights[k] * g.normals[k];
        }
        assert!(sum.norm() < 1e-10, "normal balance {:e}", sum.norm());
    }

    #[test]
    fn trapezoid_smooth_integrands() {
        let g = unit_circle_grid(64);
        let ones = vec![1.0; 64];
        assert_relative_eq!(trapezoid_integrate(&g, &ones).unwrap(), TAU, epsilon = 1e-13);
        let cos_t: Vec<f64> = g.nodes_t.iter().map(|t| t.cos()).collect();
        assert!(trapezoid_integrate(&g, &cos_t).unwrap().abs() < 1e-14);
    }

    #[test]
    fn trapezoid_arclength_moment_matches_oracle() {
        let e = Curve::ellipse(Vec2::zeros(), 2.0, 1.0, 0.0).unwrap();
        let g = BoundaryGrid::new(&e, 256).unwrap();
        let fx: Vec<f64> = g.positions.iter().map(|p| p.x).collect();
        let got = trapezoid_integrate(&g, &fx).unwrap();
        // Brute-force fine trapezoid oracle.
        let m = 1 << 20;
        let mut oracle = 0.0;
        for k in 0..m {
            let t = TAU * k as f64 / m as f64;
            oracle += e.position(t).x * e.speed(t);
        }
        oracle *= TAU / m as f64;
        assert!((got - oracle).abs() < 1e-10);
    }

    #[test]
    fn trapezoid_length_mismatch_errors() {
        let g = unit_circle_grid(64);
        assert!(trapezoid_integrate(&g, &[1.0; 63]).is_err());
    }

    #[test]
    fn grid_rejects_odd_or_tiny_n() {
        let c = Curve::circle(Vec2::zeros(), 1.0).unwrap();
        assert!(BoundaryGrid::new(&c, 65).is_err());
        assert!(BoundaryGrid::new(&c, 8).is_err());
    }

    #[test]
    fn log_rule_annihilates_constants() {
        // ∫₀^{2π} ln(4 sin²(t/2)) dt = 0.
        for &n in &[32usize, 64, 128] {
            let rule = LogQuadratureRule::new(n);
            for j in [0, n / 3, n - 1] {
                let v = rule.apply(j, &vec![1.0; n]);
                assert!(v.abs() < 1e-12, "n={n} j={j}: {v:e}");
            }
        }
    }

    #[test]
    fn log_rule_reproduces_fourier_symbol() {
        // ∫₀^{2π} ln(4 sin²((t−s)/2)) cos(ms) ds = −(2π/m) cos(mt).
        // Frozen oracle for m=1, t=0, computed by 10⁶-point quadrature below.
        let n = 64;
        let rule = LogQuadratureRule::new(n);
        let cos_t: Vec<f64> = (0..n).map(|k| (TAU * k as f64 / n as f64).cos()).collect();
        let got = rule.apply(0, &cos_t);

        // The kernel integrates to zero against constants, so integrate the
        // continuous remainder ln(4 sin²(s/2))·(cos s − 1) instead.
        let m = 1_000_000;
        let mut oracle = 0.0;
        for k in 0..m {
            let s = TAU * (k as f64 + 0.5) / m as f64;
            oracle += (4.0 * (s / 2.0).sin().powi(2)).ln() * (s.cos() - 1.0);
        }
        oracle *= TAU / m as f64;
        assert_relative_eq!(oracle, -TAU, epsilon = 1e-7);
        assert_relative_eq!(got, -TAU, epsilon = 1e-10);
    }

    #[test]
    fn log_rule_converges_superalgebraically() {
        // Smooth-plus-log integrand with a pole close enough to the real
        // axis that the spectral decay is visible before machine noise:
        // f(s) = 1 / (1.1 − cos s), target t = 0.
        let fine = |n: usize| {
            let rule = LogQuadratureRule::new(n);
            let f: Vec<f64> =
                (0..n).map(|k| 1.0 / (1.1 - (TAU * k as f64 / n as f64).cos())).collect();
            rule.apply(0, &f)
        };
        let reference = fine(1024);
        let e32 = (fine(32) - reference).abs();
        let e64 = (fine(64) - reference).abs();
        let e128 = (fine(128) - reference).abs();
        assert!(e64 < e32 / 2.0, "32→64: {e32:e} → {e64:e}");
        assert!(e128 < e64 / 2.0 || e128 < 1e-13, "64→128: {e64:e} → {e128:e}");
    }

    #[test]
    fn default_grid_size_policy() {
        assert_eq!(default_grid_size(0.1), 256);
        assert_eq!(default_grid_size(1e-4), 6400);
        assert!(default_grid_size(3e-4) % 2 == 0);
    }
}
