//! Singular functions: the numeric capacitor potential built from the
//! unit-flux eigenfunction, and its closed form for two disks.
//!
//! For two disks the potential is a difference of logs at the common
//! inverse points of the circle pair (the limit points of their coaxial
//! pencil, fixed under composed reflections). The general singular
//! function is the single-layer potential of the eigenfunction; on disk
//! pairs the two agree identically, which is the main cross-check oracle.

use crate::error::{Error, Result};
use crate::geometry::{InclusionPair, Vec2};
use crate::potentials::{np_apply, single_layer_boundary_apply, DensityPair, LayerField, PairSetup};
use crate::spectral::Eigenfunction;
use serde::Serialize;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

/// Tolerance on the constancy of the singular potential along each boundary.
pub const CONSTANCY_TOL: f64 = 1e-6;

fn rot90(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

/// Closed-form singular function for two disks with centers on the x-axis.
#[derive(Debug, Clone)]
pub struct DiskSingular {
    pub center1: Vec2,
    pub center2: Vec2,
    pub radius1: f64,
    pub radius2: f64,
    /// Fixed point of the composed reflection through circle 1 then 2.
    pub p1: Vec2,
    /// Fixed point of the composed reflection through circle 2 then 1.
    pub p2: Vec2,
    pub boundary_value1: f64,
    pub boundary_value2: f64,
}

impl DiskSingular {
    /// Builds from the osculating disks of a placed pair.
    pub fn from_pair(pair: &InclusionPair) -> Result<Self> {
        Self::from_disks(pair.disk_center1, pair.radius1, pair.disk_center2, pair.radius2)
    }

    pub fn from_disks(center1: Vec2, radius1: f64, center2: Vec2, radius2: f64) -> Result<Self> {
        if center1.y.abs() > 1e-12 || center2.y.abs() > 1e-12 {
            return Err(Error::domain("disk centers must lie on the x-axis"));
        }
        let (p1x, p2x) = fixed_points_on_axis(center1.x, radius1, center2.x, radius2)?;
        let p1 = Vec2::new(p1x, 0.0);
        let p2 = Vec2::new(p2x, 0.0);
        let mut ds = DiskSingular {
            center1,
            center2,
            radius1,
            radius2,
            p1,
            p2,
            boundary_value1: 0.0,
            boundary_value2: 0.0,
        };
        // The potential is constant on each circle; the contact points are
        // as good as any.
        ds.boundary_value1 = ds.value(Vec2::new(center1.x + radius1, 0.0));
        ds.boundary_value2 = ds.value(Vec2::new(center2.x - radius2, 0.0));
        Ok(ds)
    }

    /// `(ln|x−p₁| − ln|x−p₂|) / 2π`.
    pub fn value(&self, x: Vec2) -> f64 {
        ((x - self.p1).norm().ln() - (x - self.p2).norm().ln()) / TAU
    }

    pub fn gradient(&self, x: Vec2) -> Vec2 {
        let d1 = x - self.p1;
        let d2 = x - self.p2;
        (d1 / d1.norm_squared() - d2 / d2.norm_squared()) / TAU
    }

    /// Difference of the two boundary constants.
    pub fn gap_value(&self) -> f64 {
        self.boundary_value1 - self.boundary_value2
    }

    /// Harmonic conjugate variant used by the insulating problem. The four
    /// argument terms have their branch cuts inside the disks, so the
    /// function is continuous outside both closed disks.
    pub fn conjugate_value(&self, x: Vec2) -> Result<f64> {
        if (x - self.center1).norm() <= self.radius1 || (x - self.center2).norm() <= self.radius2 {
            return Err(Error::domain("conjugate singular function needs x outside both disks"));
        }
        let arg = |v: Vec2| v.y.atan2(v.x);
        Ok((arg(x - self.p1) - arg(x - self.p2) - arg(x - self.center1)
            + arg(x - self.center2))
            / TAU)
    }

    pub fn conjugate_gradient(&self, x: Vec2) -> Result<Vec2> {
        if (x - self.center1).norm() <= self.radius1 || (x - self.center2).norm() <= self.radius2 {
            return Err(Error::domain("conjugate singular function needs x outside both disks"));
        }
        let term = |v: Vec2| rot90(v) / v.norm_squared();
        Ok((term(x - self.p1) - term(x - self.p2) - term(x - self.center1)
            + term(x - self.center2))
            / TAU)
    }

    /// Leading-order fixed-point positions `∓√2 √(r₁r₂/(r₁+r₂)) √ε`.
    pub fn predicted_fixed_points(eps: f64, radius1: f64, radius2: f64) -> (f64, f64) {
        let scale = (2.0 * radius1 * radius2 / (radius1 + radius2)).sqrt() * eps.sqrt();
        (-scale, scale)
    }
}

/// Common inverse points of two disjoint circles with centers on the x-axis
/// (the limit points of their coaxial pencil), via the radical-axis
/// quadratic.
fn fixed_points_on_axis(a1: f64, r1: f64, a2: f64, r2: f64) -> Result<(f64, f64)> {
    if a1 >= a2 {
        return Err(Error::domain("disk 1 must lie left of disk 2"));
    }
    let xr = ((a2 * a2 - r2 * r2) - (a1 * a1 - r1 * r1)) / (2.0 * (a2 - a1));
    let power = (xr - a1) * (xr - a1) - r1 * r1;
    if power <= 0.0 {
        return Err(Error::domain("disks overlap: no real limit points"));
    }
    let delta = power.sqrt();
    Ok((xr - delta, xr + delta))
}

/// The numeric singular function: single-layer potential of the unit-flux
/// eigenfunction, constant on each boundary with fluxes (+1, −1) and decay
/// at infinity.
pub struct SingularFunction {
    pub eigenfunction: Eigenfunction,
    field: Arc<LayerField>,
    /// Nodal boundary values of the potential.
    pub boundary_nodal: DensityPair,
    pub boundary_value1: f64,
    pub boundary_value2: f64,
    pub constancy_std1: f64,
    pub constancy_std2: f64,
    /// Outward fluxes measured through the exterior jump relation.
    pub outward_flux1: f64,
    pub outward_flux2: f64,
}

/// Weighted mean and standard deviation over one boundary.
pub(crate) fn weighted_stats(values: &[f64], weights: &[f64]) -> (f64, f64) {
    let total: f64 = weights.iter().sum();
    let mean: f64 = weights.iter().zip(values).map(|(w, v)| w * v).sum::<f64>() / total;
    let var: f64 =
        weights.iter().zip(values).map(|(w, v)| w * (v - mean) * (v - mean)).sum::<f64>() / total;
    (mean, var.max(0.0).sqrt())
}

/// Builds the singular function from a constructed eigenfunction and
/// verifies its defining properties.
pub fn build_q(setup: &PairSetup, eigenfunction: Eigenfunction) -> Result<SingularFunction> {
    let grids = &setup.grids;
    let boundary_nodal = single_layer_boundary_apply(setup, &eigenfunction.density)?;
    let (m1, s1) = weighted_stats(&boundary_nodal.first, &grids.first.weights);
    let (m2, s2) = weighted_stats(&boundary_nodal.second, &grids.second.weights);
    let scale = (m1.abs() + m2.abs()).max(1.0);
    if s1 > CONSTANCY_TOL * scale || s2 > CONSTANCY_TOL * scale {
        return Err(Error::accuracy(format!(
            "singular potential not constant on boundaries: std ({s1:.3e}, {s2:.3e})"
        )));
    }

    // Exterior normal derivative (1/2 I + K*)[g], integrated per boundary.
    let k_g = np_apply(setup, &eigenfunction.density);
    let dq_dn = k_g.axpy(0.5, &eigenfunction.density);
    let (outward_flux1, outward_flux2) = dq_dn.moments(grids);
    if (outward_flux1 - 1.0).abs() > 1e-6 || (outward_flux2 + 1.0).abs() > 1e-6 {
        return Err(Error::accuracy(format!(
            "singular potential fluxes ({outward_flux1:.8}, {outward_flux2:.8}) stray from (1, -1)"
        )));
    }

    let field = Arc::new(LayerField::new(grids, &eigenfunction.density)?);
    Ok(SingularFunction {
        eigenfunction,
        field,
        boundary_nodal,
        boundary_value1: m1,
        boundary_value2: m2,
        constancy_std1: s1,
        constancy_std2: s2,
        outward_flux1,
        outward_flux2,
    })
}

impl SingularFunction {
    pub fn value(&self, x: Vec2) -> Result<f64> {
        self.field.value(x)
    }

    pub fn gradient(&self, x: Vec2) -> Result<Vec2> {
        self.field.gradient(x)
    }

    pub fn gap_value(&self) -> f64 {
        self.boundary_value1 - self.boundary_value2
    }

    /// Exterior normal derivative along a boundary equals the eigenfunction
    /// density itself; expose it for the envelope diagnostics.
    pub fn normal_derivative(&self) -> &DensityPair {
        &self.eigenfunction.density
    }

    /// Shared handle to the field evaluator (the fine-level caches are
    /// expensive; decompositions reuse them instead of rebuilding).
    pub fn field_handle(&self) -> Arc<LayerField> {
        self.field.clone()
    }
}

/// Leading-order prediction of the boundary-constant difference,
/// `−√(κ₁+κ₂) √ε / (√2 π)`.
pub fn predicted_gap_value(pair: &InclusionPair) -> f64 {
    -((pair.kappa1 + pair.kappa2).sqrt()) * pair.eps.sqrt() / (std::f64::consts::SQRT_2 * PI)
}

/// Empirical envelope constants for the near-gap behavior of the singular
/// function: each field is the supremum of a measured quantity divided by
/// its predicted envelope, so stability of these numbers across a gap sweep
/// is the testable content.
#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeReport {
    pub eps: f64,
    pub delta0: f64,
    /// sup |q_B(x) − q_B|∂B| / (√ε |x−z|) over boundary nodes with
    /// 0 < |x−z| ≤ δ₀ (osculating-disk comparison on the true boundary).
    pub near_value_ratio: f64,
    /// sup |∂q/∂ν| / (√ε / (|x−z|² + ε)) over the same nodes.
    pub near_flux_ratio: f64,
    /// sup |q_B(x) − q_B|∂B| / √ε over nodes with |x−z| > δ₀.
    pub far_value_ratio: f64,
    /// sup |∂q/∂ν| / √ε over the far nodes.
    pub far_flux_ratio: f64,
    /// sup |∂q/∂ν| / |∇q_B| over all boundary nodes (the comparability of
    /// the true flux density with the disk closed form).
    pub comparability_ratio: f64,
}

/// Measures the envelope ratios for a built singular function.
pub fn envelope_report(
    setup: &PairSetup,
    q: &SingularFunction,
    pair: &InclusionPair,
    disk: &DiskSingular,
) -> EnvelopeReport {
    let eps = pair.eps;
    let sqrt_eps = eps.sqrt();
    let d1 = pair.curve1.diameter().min(pair.curve2.diameter());
    let delta0 = (0.25 * d1).min(0.5);

    let mut near_value_ratio: f64 = 0.0;
    let mut near_flux_ratio: f64 = 0.0;
    let mut far_value_ratio: f64 = 0.0;
    let mut far_flux_ratio: f64 = 0.0;
    let mut comparability_ratio: f64 = 0.0;

    for (side, grid) in [(0usize, &setup.grids.first), (1usize, &setup.grids.second)] {
        let z = if side == 0 { pair.z1 } else { pair.z2 };
        let qb_const = if side == 0 { disk.boundary_value1 } else { disk.boundary_value2 };
        let g = if side == 0 { &q.normal_derivative().first } else { &q.normal_derivative().second };
        for k in 0..grid.n {
            let x = grid.positions[k];
            let r = (x - z).norm();
            let qb_dev = (disk.value(x) - qb_const).abs();
            let flux = g[k].abs();
            comparability_ratio = comparability_ratio.max(flux / disk.gradient(x).norm());
            if r <= delta0 {
                if r > 1e-12 {
                    near_value_ratio = near_value_ratio.max(qb_dev / (sqrt_eps * r));
                }
                near_flux_ratio = near_flux_ratio.max(flux * (r * r + eps) / sqrt_eps);
            } else {
                far_value_ratio = far_value_ratio.max(qb_dev / sqrt_eps);
                far_flux_ratio = far_flux_ratio.max(flux / sqrt_eps);
            }
        }
    }

    EnvelopeReport {
        eps,
        delta0,
        near_value_ratio,
        near_flux_ratio,
        far_value_ratio,
        far_flux_ratio,
        comparability_ratio,
    }
}
