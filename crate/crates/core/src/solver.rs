//! Exterior solves for perfectly conducting and insulating inclusion pairs,
//! and the decomposition of the solution into an explicit singular part
//! plus bounded remainders.

use crate::error::{Error, Result};
use crate::geometry::{InclusionPair, Vec2};
use crate::potentials::{np_apply, single_layer_boundary_apply, DensityPair, LayerField, PairSetup};
use crate::singular::{weighted_stats, DiskSingular, SingularFunction};
use crate::spectral::{Eigenfunction, MeanZeroSolver};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

fn rot90(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

/// Finite combination of the entire harmonic basis
/// `{1, Re zᵐ, Im zᵐ : m ≥ 1}`; closed-form gradient and harmonic
/// conjugate. Coefficient index 0 corresponds to m = 1.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct HarmonicPolynomial {
    pub constant: f64,
    pub re_coeffs: Vec<f64>,
    pub im_coeffs: Vec<f64>,
}

impl HarmonicPolynomial {
    pub fn constant(c: f64) -> Self {
        HarmonicPolynomial { constant: c, ..Default::default() }
    }

    /// `h(x, y) = x`.
    pub fn coordinate_x() -> Self {
        HarmonicPolynomial { constant: 0.0, re_coeffs: vec![1.0], im_coeffs: vec![] }
    }

    /// `h(x, y) = y`.
    pub fn coordinate_y() -> Self {
        HarmonicPolynomial { constant: 0.0, re_coeffs: vec![], im_coeffs: vec![1.0] }
    }

    pub fn value(&self, x: Vec2) -> f64 {
        let mut v = self.constant;
        let mut zr = 1.0;
        let mut zi = 0.0;
        let max_m = self.re_coeffs.len().max(self.im_coeffs.len());
        for m in 0..max_m {
            let nr = zr * x.x - zi * x.y;
            let ni = zr * x.y + zi * x.x;
            zr = nr;
            zi = ni;
            if let Some(&a) = self.re_coeffs.get(m) {
                v += a * zr;
            }
            if let Some(&b) = self.im_coeffs.get(m) {
                v += b * zi;
            }
        }
        v
    }

    pub fn gradient(&self, x: Vec2) -> Vec2 {
        let mut g = Vec2::zeros();
        let mut zr = 1.0; // z^{m−1}
        let mut zi = 0.0;
        let max_m = self.re_coeffs.len().max(self.im_coeffs.len());
        for m in 0..max_m {
            let mf = (m + 1) as f64;
            if let Some(&a) = self.re_coeffs.get(m) {
                g += a * mf * Vec2::new(zr, -zi);
            }
            if let Some(&b) = self.im_coeffs.get(m) {
                g += b * mf * Vec2::new(zi, zr);
            }
            let nr = zr * x.x - zi * x.y;
            let ni = zr * x.y + zi * x.x;
            zr = nr;
            zi = ni;
        }
        g
    }

    /// Harmonic conjugate: `Re zᵐ ↦ Im zᵐ`, `Im zᵐ ↦ −Re zᵐ`, constants
    /// drop to zero.
    pub fn conjugate(&self) -> HarmonicPolynomial {
        HarmonicPolynomial {
            constant: 0.0,
            re_coeffs: self.im_coeffs.iter().map(|b| -b).collect(),
            im_coeffs: self.re_coeffs.clone(),
        }
    }

    /// `self + c · other`.
    pub fn axpy(&self, c: f64, other: &HarmonicPolynomial) -> HarmonicPolynomial {
        let len = self.re_coeffs.len().max(other.re_coeffs.len());
        let mut re = vec![0.0; len];
        for (i, v) in re.iter_mut().enumerate() {
            *v = self.re_coeffs.get(i).unwrap_or(&0.0) + c * other.re_coeffs.get(i).unwrap_or(&0.0);
        }
        let len = self.im_coeffs.len().max(other.im_coeffs.len());
        let mut im = vec![0.0; len];
        for (i, v) in im.iter_mut().enumerate() {
            *v = self.im_coeffs.get(i).unwrap_or(&0.0) + c * other.im_coeffs.get(i).unwrap_or(&0.0);
        }
        HarmonicPolynomial { constant: self.constant + c * other.constant, re_coeffs: re, im_coeffs: im }
    }
}

/// Solution of the exterior problem with constant boundary potentials and
/// zero net fluxes (the perfectly conducting limit).
pub struct ConductingSolution {
    pub background: HarmonicPolynomial,
    /// Layer density, componentwise mean-zero.
    pub density: DensityPair,
    field: LayerField,
    /// Nodal boundary values of the full potential.
    pub boundary_nodal: DensityPair,
    /// Constant boundary potentials (weighted means).
    pub lambda1: f64,
    pub lambda2: f64,
    pub constancy_std1: f64,
    pub constancy_std2: f64,
    /// Nodal exterior normal derivative of the full potential.
    pub normal_derivative: DensityPair,
    /// Net outward fluxes (targets are zero).
    pub flux1: f64,
    pub flux2: f64,
}

/// Solves the conducting problem for an entire harmonic background.
pub fn solve_conducting(
    setup: &PairSetup,
    solver: &MeanZeroSolver,
    background: &HarmonicPolynomial,
) -> Result<ConductingSolution> {
    let grids = &setup.grids;
    let rhs = DensityPair {
        first: (0..grids.first.n)
            .map(|k| background.gradient(grids.first.positions[k]).dot(&grids.first.normals[k]))
            .collect(),
        second: (0..grids.second.n)
            .map(|k| background.gradient(grids.second.positions[k]).dot(&grids.second.normals[k]))
            .collect(),
    };
    let density = solver.solve(&rhs)?.density;

    let s_phi = single_layer_boundary_apply(setup, &density)?;
    let boundary_nodal = DensityPair {
        first: (0..grids.first.n)
            .map(|k| background.value(grids.first.positions[k]) + s_phi.first[k])
            .collect(),
        second: (0..grids.second.n)
            .map(|k| background.value(grids.second.positions[k]) + s_phi.second[k])
            .collect(),
    };
    let (lambda1, std1) = weighted_stats(&boundary_nodal.first, &grids.first.weights);
    let (lambda2, std2) = weighted_stats(&boundary_nodal.second, &grids.second.weights);
    let scale = (lambda1.abs() + lambda2.abs()).max(1.0);
    if std1 > 1e-6 * scale || std2 > 1e-6 * scale {
        return Err(Error::accuracy(format!(
            "solution not constant on boundaries: std ({std1:.3e}, {std2:.3e}) at scale {scale:.3e}"
        )));
    }

    let k_phi = np_apply(setup, &density);
    let normal_derivative = DensityPair {
        first: (0..grids.first.n).map(|k| rhs.first[k] + 0.5 * density.first[k] + k_phi.first[k]).collect(),
        second: (0..grids.second.n)
            .map(|k| rhs.second[k] + 0.5 * density.second[k] + k_phi.second[k])
            .collect(),
    };
    let (flux1, flux2) = normal_derivative.moments(grids);
    let flux_scale = normal_derivative.max_abs().max(1.0);
    if flux1.abs() > 1e-8 * flux_scale || flux2.abs() > 1e-8 * flux_scale {
        return Err(Error::accuracy(format!(
            "net boundary fluxes ({flux1:.3e}, {flux2:.3e}) are not zero"
        )));
    }

    let field = LayerField::new(grids, &density)?;
    Ok(ConductingSolution {
        background: background.clone(),
        density,
        field,
        boundary_nodal,
        lambda1,
        lambda2,
        constancy_std1: std1,
        constancy_std2: std2,
        normal_derivative,
        flux1,
        flux2,
    })
}

impl ConductingSolution {
    pub fn value(&self, x: Vec2) -> Result<f64> {
        Ok(self.background.value(x) + self.field.value(x)?)
    }

    pub fn gradient(&self, x: Vec2) -> Result<Vec2> {
        Ok(self.background.gradient(x) + self.field.gradient(x)?)
    }

    pub fn boundary_gap(&self) -> f64 {
        self.lambda1 - self.lambda2
    }
}

/// Inner product of the background trace with the eigenfunction,
/// `∮ h g⁽¹⁾ dσ + ∮ h g⁽²⁾ dσ`.
pub fn inner_product_hg(
    setup: &PairSetup,
    background: &HarmonicPolynomial,
    g: &Eigenfunction,
) -> f64 {
    let grids = &setup.grids;
    let h_nodal = DensityPair {
        first: grids.first.positions.iter().map(|&p| background.value(p)).collect(),
        second: grids.second.positions.iter().map(|&p| background.value(p)).collect(),
    };
    h_nodal.inner(grids, &g.density)
}

/// Decomposition of a conducting solution against the singular function and
/// its osculating-disk closed form: all scalar factors, plus gradient
/// evaluators for the remainders.
pub struct GapDecomposition {
    pub h_g: f64,
    /// Ratio of boundary-potential gaps (the defining formula).
    pub c_eps: f64,
    /// Flux-form evaluation of the same constant.
    pub c_eps_alt: f64,
    pub a_eps: f64,
    /// `−√2 π ⟨h,g⟩ / √(ε(κ₁+κ₂))`.
    pub coefficient: f64,
    pub alpha_eps: f64,
    combined_b: LayerField,
    background: HarmonicPolynomial,
    q_field: Arc<LayerField>,
    disk: DiskSingular,
}

pub fn decompose(
    setup: &PairSetup,
    pair: &InclusionPair,
    solution: &ConductingSolution,
    q: &SingularFunction,
    disk: &DiskSingular,
) -> Result<GapDecomposition> {
    let grids = &setup.grids;
    let q_gap = q.gap_value();
    if q_gap.abs() < 1e-14 {
        return Err(Error::domain("singular-function gap is degenerate"));
    }
    let h_g = inner_product_hg(setup, &solution.background, &q.eigenfunction);
    let c_eps = solution.boundary_gap() / q_gap;

    // Flux form: Σ_j ∮ h ∂q/∂ν|₊ dσ over both boundaries, divided by the gap.
    let k_g = np_apply(setup, &q.eigenfunction.density);
    let dq_dn = k_g.axpy(0.5, &q.eigenfunction.density);
    let h_nodal = DensityPair {
        first: grids.first.positions.iter().map(|&p| solution.background.value(p)).collect(),
        second: grids.second.positions.iter().map(|&p| solution.background.value(p)).collect(),
    };
    let c_eps_alt = h_nodal.inner(grids, &dq_dn) / q_gap;

    let a_eps = q_gap / disk.gap_value();
    let coefficient =
        -std::f64::consts::SQRT_2 * PI * h_g / (pair.eps * (pair.kappa1 + pair.kappa2)).sqrt();
    let alpha_eps = c_eps * a_eps / coefficient;

    let combined_density = solution.density.axpy(-c_eps, &q.eigenfunction.density);
    let combined_b = LayerField::new(grids, &combined_density)?;
    let q_field = q.field_handle();

    Ok(GapDecomposition {
        h_g,
        c_eps,
        c_eps_alt,
        a_eps,
        coefficient,
        alpha_eps,
        combined_b,
        background: solution.background.clone(),
        q_field,
        disk: disk.clone(),
    })
}

impl GapDecomposition {
    /// Gradient of the remainder `b = u − c_ε q`, evaluated through the
    /// combined density so the near-boundary errors of the two terms cancel.
    pub fn grad_b(&self, x: Vec2) -> Result<Vec2> {
        Ok(self.background.gradient(x) + self.combined_b.gradient(x)?)
    }

    /// Gradient of `v = q − a_ε q_B`.
    pub fn grad_v(&self, x: Vec2) -> Result<Vec2> {
        Ok(self.q_field.gradient(x)? - self.a_eps * self.disk.gradient(x))
    }

    /// Gradient of the remainder `r = u − coefficient·α_ε·q_B = b + c_ε v`.
    pub fn grad_r(&self, x: Vec2) -> Result<Vec2> {
        Ok(self.grad_b(x)? + self.c_eps * self.grad_v(x)?)
    }

    /// Relative disagreement of the two defining formulas for `c_ε`.
    pub fn c_eps_discrepancy(&self) -> f64 {
        (self.c_eps - self.c_eps_alt).abs() / self.c_eps.abs().max(1e-300)
    }
}

/// Solution of the insulating problem, exposed through the conjugate
/// rotation of the conducting solve for the conjugate background.
pub struct InsulatingSolution {
    /// Conducting solution for the conjugate background.
    pub conjugate: ConductingSolution,
}

pub fn solve_insulating(
    setup: &PairSetup,
    solver: &MeanZeroSolver,
    background: &HarmonicPolynomial,
) -> Result<InsulatingSolution> {
    let conjugate = solve_conducting(setup, solver, &background.conjugate())?;
    Ok(InsulatingSolution { conjugate })
}

impl InsulatingSolution {
    /// Gradient of the insulating solution, `∇u = rot90(∇u^⊥)`.
    pub fn gradient(&self, x: Vec2) -> Result<Vec2> {
        Ok(rot90(self.conjugate.gradient(x)?))
    }

    /// Gradient of the remainder against the conjugate disk singular
    /// function, `∇u − coefficient·β_ε·∇q_B^⊥`.
    pub fn grad_remainder(&self, dec: &GapDecomposition, x: Vec2) -> Result<Vec2> {
        let qperp = dec.disk.conjugate_gradient(x)?;
        Ok(self.gradient(x)? - dec.coefficient * dec.alpha_eps * qperp)
    }

    /// Max |∂u/∂ν| over boundary probes pushed a distance `delta` outward,
    /// relative to the largest gradient among them.
    pub fn neumann_residual(&self, setup: &PairSetup, delta: f64) -> Result<f64> {
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for grid in [&setup.grids.first, &setup.grids.second] {
            for k in (0..grid.n).step_by((grid.n / 32).max(1)) {
                let x = grid.positions[k] + delta * grid.normals[k];
                let g = self.gradient(x)?;
                worst = worst.max(g.dot(&grid.normals[k]).abs());
                scale = scale.max(g.norm());
            }
        }
        Ok(worst / scale.max(1e-300))
    }
}

/// Clustered probe points on the open gap segment between the closest
/// points; offsets from the endpoints are kept above `floor`.
pub fn gap_segment_points(pair: &InclusionPair, count: usize, floor: f64) -> Vec<Vec2> {
    let eps = pair.eps;
    let mut pts = Vec::with_capacity(count);
    for i in 1..=count {
        let tau = i as f64 / (count + 1) as f64;
        // Chebyshev clustering toward both endpoints.
        let xi = 0.5 * (1.0 - (PI * tau).cos());
        let offset = (xi * eps).max(floor).min(eps - floor);
        pts.push(Vec2::new(-eps / 2.0 + offset, 0.0));
    }
    pts.dedup_by(|a, b| (a.x - b.x).abs() < 1e-300);
    pts
}

/// Probes spread over a bounded neighborhood of the configuration: points
/// offset from each boundary (outside the gap zone) plus a far ring. Used
/// to proxy the sup over the paper-style bounded exterior region.
pub fn region_probe_points(pair: &InclusionPair) -> Vec<Vec2> {
    let mut pts = Vec::new();
    let extent = (0..128)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / 128.0;
            pair.curve1.position(t).norm().max(pair.curve2.position(t).norm())
        })
        .fold(0.0f64, f64::max);
    for curve in [&pair.curve1, &pair.curve2] {
        let other = if std::ptr::eq(curve, &pair.curve1) { &pair.curve2 } else { &pair.curve1 };
        let delta = 0.05 * curve.diameter();
        for k in 0..32 {
            let t = std::f64::consts::TAU * k as f64 / 32.0;
            let p = curve.position(t) + delta * curve.outward_normal(t);
            // Skip offsets that land inside or hug the other inclusion.
            if other.nearest_point(p).1 > 0.5 * delta {
                pts.push(p);
            }
        }
    }
    for k in 0..24 {
        let t = std::f64::consts::TAU * (k as f64 + 0.5) / 24.0;
        pts.push(1.5 * extent * Vec2::new(t.cos(), t.sin()));
    }
    pts
}

/// Maximum gradient magnitude over the gap and a bounded neighborhood:
/// interior segment probes, region probes, and optionally the boundary
/// normal derivative at nodes facing the gap.
pub struct GapGradientScan {
    pub max: f64,
    pub argmax: Vec2,
    pub segment_max: f64,
    pub boundary_max: f64,
    pub region_max: f64,
}

pub fn max_gap_gradient(
    setup: &PairSetup,
    pair: &InclusionPair,
    probes: usize,
    gradient: impl Fn(Vec2) -> Result<Vec2>,
    normal_derivative: Option<&DensityPair>,
) -> Result<GapGradientScan> {
    // Keep probes far enough out that close evaluation stays below ~2²¹
    // sources; the boundary-node values cover the endpoint blow-up.
    let floor = (1e-3 * pair.eps).max(1.6e-5);
    let mut max = 0.0f64;
    let mut argmax = Vec2::zeros();
    for x in gap_segment_points(pair, probes, floor) {
        let g = gradient(x)?.norm();
        if g > max {
            max = g;
            argmax = x;
        }
    }
    let segment_max = max;
    let mut region_max = 0.0f64;
    for x in region_probe_points(pair) {
        let g = gradient(x)?.norm();
        region_max = region_max.max(g);
        if g > max {
            max = g;
            argmax = x;
        }
    }
    let mut boundary_max = 0.0f64;
    if let Some(nd) = normal_derivative {
        let zone = pair.eps.sqrt().max(4.0 * setup.grids.first.max_spacing());
        for (side, grid) in [(0usize, &setup.grids.first), (1usize, &setup.grids.second)] {
            let z = if side == 0 { pair.z1 } else { pair.z2 };
            let vals = if side == 0 { &nd.first } else { &nd.second };
            for k in 0..grid.n {
                if (grid.positions[k] - z).norm() <= zone {
                    let g = vals[k].abs();
                    if g > boundary_max {
                        boundary_max = g;
                    }
                    if g > max {
                        max = g;
                        argmax = grid.positions[k];
                    }
                }
            }
        }
    }
    Ok(GapGradientScan { max, argmax, segment_max, boundary_max, region_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{place_at_gap, Curve};
    use crate::singular::build_q;
    use crate::spectral::build_g;
    use approx::assert_relative_eq;

    fn disk_pair(eps: f64) -> InclusionPair {
        let c = Curve::circle(Vec2::zeros(), 1.0).unwrap();
        place_at_gap(&c, &c, eps).unwrap()
    }

    fn solve_pair(
        pair: &InclusionPair,
        n: usize,
        h: &HarmonicPolynomial,
    ) -> (PairSetup, MeanZeroSolver, ConductingSolution) {
        let setup = PairSetup::new(pair, n).unwrap();
        let solver = MeanZeroSolver::new(&setup).unwrap();
        let sol = solve_conducting(&setup, &solver, h).unwrap();
        (setup, solver, sol)
    }

    #[test]
    fn harmonic_polynomial_values_and_gradients() {
        let h = HarmonicPolynomial { constant: 0.5, re_coeffs: vec![1.0, 2.0], im_coeffs: vec![0.0, 3.0] };
        let x = Vec2::new(1.2, -0.7);
        // 0.5 + x + 2(x² − y²) + 3·2xy
        let want = 0.5 + 1.2 + 2.0 * (1.44 - 0.49) + 3.0 * 2.0 * 1.2 * (-0.7);
        assert_relative_eq!(h.value(x), want, epsilon = 1e-14);
        let fd = 1e-6;
        let gx = (h.value(x + Vec2::new(fd, 0.0)) - h.value(x - Vec2::new(fd, 0.0))) / (2.0 * fd);
        let gy = (h.value(x + Vec2::new(0.0, fd)) - h.value(x - Vec2::new(0.0, fd))) / (2.0 * fd);
        let g = h.gradient(x);
        assert_relative_eq!(g.x, gx, epsilon = 1e-8);
        assert_relative_eq!(g.y, gy, epsilon = 1e-8);
    }

    #[test]
    fn harmonic_polynomial_is_harmonic() {
        let h = HarmonicPolynomial { constant: -1.0, re_coeffs: vec![0.3, 1.5, 0.8], im_coeffs: vec![2.0, 0.0, 0.5] };
        let d = 1e-4;
        for &x in &[Vec2::new(0.3, 0.9), Vec2::new(-2.0, 1.4)] {
            let lap = (h.value(x + Vec2::new(d, 0.0))
                + h.value(x - Vec2::new(d, 0.0))
                + h.value(x + Vec2::new(0.0, d))
                + h.value(x - Vec2::new(0.0, d))
                - 4.0 * h.value(x))
                / (d * d);
            assert!(lap.abs() < 1e-8 * (1.0 + h.value(x).abs()), "laplacian {lap:e}");
        }
    }

    #[test]
    fn conjugate_satisfies_cauchy_riemann_exactly() {
        let h = HarmonicPolynomial { constant: 2.0, re_coeffs: vec![1.0, 0.4], im_coeffs: vec![0.0, 1.1] };
        let hp = h.conjugate();
        for &x in &[Vec2::new(0.7, -0.2), Vec2::new(-1.1, 0.5)] {
            let g = h.gradient(x);
            let gp = hp.gradient(x);
            assert_relative_eq!(gp.x, -g.y, epsilon = 1e-14);
            assert_relative_eq!(gp.y, g.x, epsilon = 1e-14);
        }
        // x ↦ y, y ↦ −x.
        assert_relative_eq!(
            HarmonicPolynomial::coordinate_x().conjugate().value(Vec2::new(0.3, 0.8)),
            0.8,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            HarmonicPolynomial::coordinate_y().conjugate().value(Vec2::new(0.3, 0.8)),
            -0.3,
            epsilon = 1e-15
        );
    }

    #[test]
    fn constant_background_gives_trivial_solution() {
        let pair = disk_pair(0.2);
        let (_, _, sol) = solve_pair(&pair, 64, &HarmonicPolynomial::constant(3.0));
        assert!(sol.density.max_abs() < 1e-12);
        assert_relative_eq!(sol.lambda1, 3.0, epsilon = 1e-12);
        assert_relative_eq!(sol.lambda2, 3.0, epsilon = 1e-12);
        assert!(sol.gradient(Vec2::new(0.0, 2.0)).unwrap().norm() < 1e-12);
    }

    #[test]
    fn odd_symmetry_for_x_background_on_identical_disks() {
        let pair = disk_pair(0.1);
        let (_, _, sol) = solve_pair(&pair, 256, &HarmonicPolynomial::coordinate_x());
        assert_relative_eq!(sol.lambda1, -sol.lambda2, epsilon = 1e-10);
        for &p in &[Vec2::new(0.4, 1.4), Vec2::new(2.2, -0.6), Vec2::new(0.0, 0.03)] {
            let u_plus = sol.value(p).unwrap();
            let u_minus = sol.value(Vec2::new(-p.x, p.y)).unwrap();
            assert!((u_plus + u_minus).abs() < 1e-8, "at {p:?}: {u_plus} vs {u_minus}");
        }
    }

    #[test]
    fn representation_decays_far_away() {
        let pair = disk_pair(0.1);
        let (_, _, sol) = solve_pair(&pair, 128, &HarmonicPolynomial::coordinate_x());
        let far = Vec2::new(1e3, 40.0);
        let dev = (sol.value(far).unwrap() - sol.background.value(far)).abs();
        assert!(dev < 1e-2, "u − h = {dev:e} at |x| ≈ 1e3");
        // Gradient approaches the background field.
        let g = sol.gradient(far).unwrap();
        assert!((g - Vec2::new(1.0, 0.0)).norm() < 2e-5);
    }

    #[test]
    fn u_g_pairing_equals_h_g_pairing() {
        let e = Curve::ellipse(Vec2::zeros(), 1.5, 1.0, 0.0).unwrap();
        let pair = place_at_gap(&e, &e, 0.1).unwrap();
        let h = HarmonicPolynomial::coordinate_x();
        let (setup, solver, sol) = solve_pair(&pair, 256, &h);
        let g = build_g(&solver, &setup).unwrap();
        let h_g = inner_product_hg(&setup, &h, &g);
        let u_g = sol.boundary_nodal.inner(&setup.grids, &g.density);
        // The layer density lives in the mean-zero subspace.
        let (m1, m2) = sol.density.moments(&setup.grids);
        assert!(m1.abs() < 1e-10 && m2.abs() < 1e-10, "density means ({m1:e}, {m2:e})");
        assert!((u_g - h_g).abs() < 1e-8 * h_g.abs().max(1.0), "⟨u,g⟩={u_g} vs ⟨h,g⟩={h_g}");
        // The boundary-potential gap is that same pairing.
        assert!((sol.boundary_gap() - h_g).abs() < 1e-8 * h_g.abs().max(1.0));
    }

    #[test]
    fn inner_product_parity_cases() {
        let pair = disk_pair(0.1);
        let setup = PairSetup::new(&pair, 128).unwrap();
        let solver = MeanZeroSolver::new(&setup).unwrap();
        let g = build_g(&solver, &setup).unwrap();
        // Constants pair to zero by the flux normalization.
        let c = HarmonicPolynomial::constant(5.0);
        assert!(inner_product_hg(&setup, &c, &g).abs() < 1e-9);
        // Odd-in-y background on an even-in-y geometry.
        let hy = HarmonicPolynomial::coordinate_y();
        assert!(inner_product_hg(&setup, &hy, &g).abs() < 1e-10);
    }

    #[test]
    fn c_eps_two_formulas_agree() {
        let e = Curve::ellipse(Vec2::zeros(), 1.5, 1.0, 0.0).unwrap();
        let pair = place_at_gap(&e, &e, 0.1).unwrap();
        let h = HarmonicPolynomial::coordinate_x();
        let (setup, solver, sol) = solve_pair(&pair, 256, &h);
        let g = build_g(&solver, &setup).unwrap();
        let q = build_q(&setup, g).unwrap();
        let disk = DiskSingular::from_pair(&pair).unwrap();
        let dec = decompose(&setup, &pair, &sol, &q, &disk).unwrap();
        assert!(dec.c_eps_discrepancy() < 1e-6, "discrepancy {:e}", dec.c_eps_discrepancy());
        assert!(dec.c_eps.abs() > 0.01);
    }

    #[test]
    fn constant_background_zero_c_eps() {
        let pair = disk_pair(0.1);
        let h = HarmonicPolynomial::constant(1.0);
        let (setup, solver, sol) = solve_pair(&pair, 128, &h);
        let g = build_g(&solver, &setup).unwrap();
        let q = build_q(&setup, g).unwrap();
        let disk = DiskSingular::from_pair(&pair).unwrap();
        let dec = decompose(&setup, &pair, &sol, &q, &disk).unwrap();
        assert!(dec.c_eps.abs() < 1e-9);
    }

    #[test]
    fn remainder_b_has_equal_boundary_constants() {
        let pair = disk_pair(0.05);
        let h = HarmonicPolynomial::coordinate_x();
        let (setup, solver, sol) = solve_pair(&pair, 256, &h);
        let g = build_g(&solver, &setup).unwrap();
        let q = build_q(&setup, g).unwrap();
        let disk = DiskSingular::from_pair(&pair).unwrap();
        let dec = decompose(&setup, &pair, &sol, &q, &disk).unwrap();
        // b = u − c_ε q has equal boundary values; exact by the definition
        // of c_ε, so this is a consistency check of the plumbing.
        let b1 = sol.lambda1 - dec.c_eps * q.boundary_value1;
        let b2 = sol.lambda2 - dec.c_eps * q.boundary_value2;
        assert!((b1 - b2).abs() < 1e-10 * (b1.abs().max(1.0)));
    }

    #[test]
    fn insulating_solution_neumann_and_conjugacy() {
        let pair = disk_pair(0.1);
        let setup = PairSetup::new(&pair, 256).unwrap();
        let solver = MeanZeroSolver::new(&setup).unwrap();
        let h = HarmonicPolynomial::coordinate_y();
        let ins = solve_insulating(&setup, &solver, &h).unwrap();
        // Boundary Neumann condition; the probe offset keeps the O(δ)
        // tangential leakage below the tolerance.
        let res = ins.neumann_residual(&setup, 1e-6).unwrap();
        assert!(res < 1e-5, "neumann residual {res:e}");
        // |∇u| = |∇u^⊥| pointwise.
        let x = Vec2::new(0.0, 0.02);
        assert_relative_eq!(
            ins.gradient(x).unwrap().norm(),
            ins.conjugate.gradient(x).unwrap().norm(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn gap_scan_finds_endpoint_blowup() {
        let eps = 1e-3;
        let pair = disk_pair(eps);
        let n = crate::discretization::default_grid_size(eps);
        let (setup, solver, sol) = solve_pair(&pair, n, &HarmonicPolynomial::coordinate_x());
        let _ = &solver;
        let scan = max_gap_gradient(&setup, &pair, 41, |x| sol.gradient(x), Some(&sol.normal_derivative))
            .unwrap();
        assert!(scan.max.is_finite());
        // For unit disks with h = x the peak gradient is 2/√ε + O(1).
        let predicted = 2.0 / eps.sqrt();
        assert!(
            (scan.max / predicted - 1.0).abs() < 0.02,
            "max {:.4} vs predicted {:.4}",
            scan.max,
            predicted
        );
        // The maximizer sits within 1e-2·√ε of a gap endpoint.
        let d1 = (scan.argmax - pair.z1).norm();
        let d2 = (scan.argmax - pair.z2).norm();
        assert!(
            d1.min(d2) <= 1e-2 * eps.sqrt(),
            "argmax {:?} is {:.3e} from the nearest endpoint",
            scan.argmax,
            d1.min(d2)
        );
    }
}
