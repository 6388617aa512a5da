//! Smooth strictly convex closed curves and two-body placement.
//!
//! A [`Curve`] is one of three analytic families (circle, rotated ellipse,
//! radial Fourier perturbation), all parameterized counterclockwise over
//! `[0, 2π)`. [`place_at_gap`] positions two curves in the normalized frame:
//! closest points on the x-axis, gap of width `eps` centered at the origin.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

pub type Vec2 = nalgebra::Vector2<f64>;

/// Number of samples used by convexity and regularity validation.
const VALIDATION_SAMPLES: usize = 2048;
/// Curves with min curvature at or below this are rejected as non-convex.
const MIN_CURVATURE: f64 = 1e-8;

/// Shape family of a [`Curve`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum CurveKind {
    Circle {
        radius: f64,
    },
    Ellipse {
        semi_major: f64,
        semi_minor: f64,
        rotation: f64,
    },
    /// Radial graph `ρ(θ) = r0 + Σ aₙ cos nθ + Σ bₙ sin nθ` around the center.
    /// Coefficient index 0 corresponds to mode n = 1.
    FourierRadial {
        base_radius: f64,
        cos_coeffs: Vec<f64>,
        sin_coeffs: Vec<f64>,
    },
}

/// A closed, strictly convex, analytic plane curve.
///
/// Evaluation is at parameter `t + t_offset`, so a curve can be
/// reparameterized to put a distinguished point at `t = 0` without
/// changing its trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Curve {
    kind: CurveKind,
    center: Vec2,
    t_offset: f64,
}

impl Curve {
    pub fn circle(center: Vec2, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::domain(format!("circle radius must be positive, got {radius}")));
        }
        Ok(Curve { kind: CurveKind::Circle { radius }, center, t_offset: 0.0 })
    }

    pub fn ellipse(center: Vec2, semi_major: f64, semi_minor: f64, rotation: f64) -> Result<Self> {
        if !(semi_minor > 0.0) || semi_major < semi_minor {
            return Err(Error::domain(format!(
                "ellipse needs a >= b > 0, got a={semi_major}, b={semi_minor}"
            )));
        }
        Ok(Curve {
            kind: CurveKind::Ellipse { semi_major, semi_minor, rotation },
            center,
            t_offset: 0.0,
        })
    }

    /// Radial Fourier perturbation of a circle. Rejected unless strictly
    /// convex (κ > 0) and regular on a dense parameter sample.
    pub fn fourier_radial(
        center: Vec2,
        base_radius: f64,
        cos_coeffs: Vec<f64>,
        sin_coeffs: Vec<f64>,
    ) -> Result<Self> {
        if !(base_radius > 0.0) {
            return Err(Error::domain("fourier base radius must be positive"));
        }
        let curve = Curve {
            kind: CurveKind::FourierRadial { base_radius, cos_coeffs, sin_coeffs },
            center,
            t_offset: 0.0,
        };
        curve.validate_convexity()?;
        Ok(curve)
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn center(&self) -> Vec2 {
        self.center
    }

    /// Radial distance from the center at raw angle `tau` (FourierRadial only).
    fn radial(&self, tau: f64) -> (f64, f64, f64) {
        match &self.kind {
            CurveKind::FourierRadial { base_radius, cos_coeffs, sin_coeffs } => {
                let mut r = *base_radius;
                let mut dr = 0.0;
                let mut ddr = 0.0;
                for (i, &a) in cos_coeffs.iter().enumerate() {
                    let n = (i + 1) as f64;
                    let (s, c) = (n * tau).sin_cos();
                    r += a * c;
                    dr -= a * n * s;
                    ddr -= a * n * n * c;
                }
                for (i, &b) in sin_coeffs.iter().enumerate() {
                    let n = (i + 1) as f64;
                    let (s, c) = (n * tau).sin_cos();
                    r += b * s;
                    dr += b * n * c;
                    ddr -= b * n * n * s;
                }
                (r, dr, ddr)
            }
            _ => unreachable!("radial() is only called for FourierRadial curves"),
        }
    }

    /// Position `x(t)`.
    pub fn position(&self, t: f64) -> Vec2 {
        let tau = t + self.t_offset;
        match &self.kind {
            CurveKind::Circle { radius } => {
                let (s, c) = tau.sin_cos();
                self.center + Vec2::new(radius * c, radius * s)
            }
            CurveKind::Ellipse { semi_major, semi_minor, rotation } => {
                let (s, c) = tau.sin_cos();
                let local = Vec2::new(semi_major * c, semi_minor * s);
                self.center + rotate(local, *rotation)
            }
            CurveKind::FourierRadial { .. } => {
                let (r, _, _) = self.radial(tau);
                let (s, c) = tau.sin_cos();
                self.center + Vec2::new(r * c, r * s)
            }
        }
    }

    /// First derivative `x'(t)`.
    pub fn derivative(&self, t: f64) -> Vec2 {
        let tau = t + self.t_offset;
        match &self.kind {
            CurveKind::Circle { radius } => {
                let (s, c) = tau.sin_cos();
                Vec2::new(-radius * s, radius * c)
            }
            CurveKind::Ellipse { semi_major, semi_minor, rotation } => {
                let (s, c) = tau.sin_cos();
                let local = Vec2::new(-semi_major * s, semi_minor * c);
                rotate(local, *rotation)
            }
            CurveKind::FourierRadial { .. } => {
                let (r, dr, _) = self.radial(tau);
                let (s, c) = tau.sin_cos();
                Vec2::new(dr * c - r * s, dr * s + r * c)
            }
        }
    }

    /// Second derivative `x''(t)`.
    pub fn second_derivative(&self, t: f64) -> Vec2 {
        let tau = t + self.t_offset;
        match &self.kind {
            CurveKind::Circle { radius } => {
                let (s, c) = tau.sin_cos();
                Vec2::new(-radius * c, -radius * s)
            }
            CurveKind::Ellipse { semi_major, semi_minor, rotation } => {
                let (s, c) = tau.sin_cos();
                let local = Vec2::new(-semi_major * c, -semi_minor * s);
                rotate(local, *rotation)
            }
            CurveKind::FourierRadial { .. } => {
                let (r, dr, ddr) = self.radial(tau);
                let (s, c) = tau.sin_cos();
                Vec2::new((ddr - r) * c - 2.0 * dr * s, (ddr - r) * s + 2.0 * dr * c)
            }
        }
    }

    pub fn speed(&self, t: f64) -> f64 {
        self.derivative(t).norm()
    }

    /// Unit outward normal (tangent rotated by −90°, valid for the
    /// counterclockwise parameterizations used here).
    pub fn outward_normal(&self, t: f64) -> Vec2 {
        let d = self.derivative(t);
        let n = Vec2::new(d.y, -d.x);
        n / n.norm()
    }

    /// Signed curvature from the cross-product formula; positive for these
    /// counterclockwise convex curves.
    pub fn curvature(&self, t: f64) -> Result<f64> {
        let d = self.derivative(t);
        let dd = self.second_derivative(t);
        let sp = d.norm();
        if sp < 1e-14 {
            return Err(Error::domain(format!("degenerate parameterization at t={t}")));
        }
        Ok(cross(d, dd) / (sp * sp * sp))
    }

    /// Rejects curves that are not strictly convex or not regular.
    pub fn validate_convexity(&self) -> Result<()> {
        let mut min_kappa = f64::INFINITY;
        for k in 0..VALIDATION_SAMPLES {
            let t = TAU * k as f64 / VALIDATION_SAMPLES as f64;
            if let CurveKind::FourierRadial { .. } = self.kind {
                let (r, _, _) = self.radial(t + self.t_offset);
                if r <= 0.0 {
                    return Err(Error::domain("fourier radial curve has non-positive radius"));
                }
            }
            min_kappa = min_kappa.min(self.curvature(t)?);
        }
        if min_kappa <= MIN_CURVATURE {
            return Err(Error::domain(format!(
                "curve is not strictly convex: min curvature {min_kappa:.3e}"
            )));
        }
        Ok(())
    }

    pub fn translated(&self, shift: Vec2) -> Curve {
        let mut c = self.clone();
        c.center += shift;
        c
    }

    /// Scales the curve about the origin by `factor > 0`.
    pub fn scaled_about_origin(&self, factor: f64) -> Curve {
        let kind = match &self.kind {
            CurveKind::Circle { radius } => CurveKind::Circle { radius: radius * factor },
            CurveKind::Ellipse { semi_major, semi_minor, rotation } => CurveKind::Ellipse {
                semi_major: semi_major * factor,
                semi_minor: semi_minor * factor,
                rotation: *rotation,
            },
            CurveKind::FourierRadial { base_radius, cos_coeffs, sin_coeffs } => {
                CurveKind::FourierRadial {
                    base_radius: base_radius * factor,
                    cos_coeffs: cos_coeffs.iter().map(|a| a * factor).collect(),
                    sin_coeffs: sin_coeffs.iter().map(|b| b * factor).collect(),
                }
            }
        };
        Curve { kind, center: self.center * factor, t_offset: self.t_offset }
    }

    /// Shifts the parameter origin so that the point previously at `t0`
    /// is at `t = 0`.
    pub fn with_parameter_origin(&self, t0: f64) -> Curve {
        let mut c = self.clone();
        c.t_offset = (self.t_offset + t0).rem_euclid(TAU);
        c
    }

    /// Parameter maximizing `⟨x(t), dir⟩` (the support point in direction
    /// `dir`), found by a dense scan plus Newton refinement.
    pub fn support_parameter(&self, dir: Vec2) -> Result<f64> {
        let m = 4096;
        let mut best_t = 0.0;
        let mut best_v = f64::NEG_INFINITY;
        for k in 0..m {
            let t = TAU * k as f64 / m as f64;
            let v = self.position(t).dot(&dir);
            if v > best_v {
                best_v = v;
                best_t = t;
            }
        }
        // Newton on f'(t) = ⟨x'(t), dir⟩ = 0; f'' < 0 near a strict maximum.
        let mut t = best_t;
        for _ in 0..60 {
            let g = self.derivative(t).dot(&dir);
            let h = self.second_derivative(t).dot(&dir);
            if h.abs() < 1e-300 {
                break;
            }
            let step = g / h;
            t -= step;
            if step.abs() < 1e-14 {
                return Ok(t.rem_euclid(TAU));
            }
        }
        let g = self.derivative(t).dot(&dir);
        if g.abs() < 1e-9 {
            Ok(t.rem_euclid(TAU))
        } else {
            Err(Error::NonConvergence(format!(
                "support point iteration stalled (residual {g:.3e})"
            )))
        }
    }

    /// Parameter of the point on the curve nearest to `p`, with the signed
    /// offset of `p` along the outward normal there (positive outside).
    pub fn nearest_point(&self, p: Vec2) -> (f64, f64) {
        let m = 1024;
        let mut best_t = 0.0;
        let mut best_d = f64::INFINITY;
        for k in 0..m {
            let t = TAU * k as f64 / m as f64;
            let d = (self.position(t) - p).norm_squared();
            if d < best_d {
                best_d = d;
                best_t = t;
            }
        }
        let mut t = best_t;
        for _ in 0..60 {
            let x = self.position(t);
            let d = self.derivative(t);
            let dd = self.second_derivative(t);
            let g = (x - p).dot(&d);
            let h = d.norm_squared() + (x - p).dot(&dd);
            if h.abs() < 1e-300 {
                break;
            }
            let step = g / h;
            t -= step;
            if step.abs() < 1e-14 {
                break;
            }
        }
        let signed = (p - self.position(t)).dot(&self.outward_normal(t));
        (t.rem_euclid(TAU), signed)
    }

    /// True when `p` lies strictly inside the curve.
    pub fn contains(&self, p: Vec2) -> bool {
        self.nearest_point(p).1 < 0.0
    }

    /// Maximum parameterization speed over a dense sample.
    pub fn max_speed(&self) -> f64 {
        let m = 512;
        (0..m)
            .map(|k| self.speed(TAU * k as f64 / m as f64))
            .fold(0.0, f64::max)
    }

    /// Diameter estimate from a dense boundary sample.
    pub fn diameter(&self) -> f64 {
        let m = 256;
        let pts: Vec<Vec2> = (0..m).map(|k| self.position(TAU * k as f64 / m as f64)).collect();
        let mut d = 0.0f64;
        for i in 0..m {
            for j in (i + 1)..m {
                d = d.max((pts[i] - pts[j]).norm());
            }
        }
        d
    }
}

fn rotate(v: Vec2, angle: f64) -> Vec2 {
    let (s, c) = angle.sin_cos();
    Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Result of the two-curve closest-point search.
#[derive(Debug, Clone)]
pub struct ClosestPoints {
    pub z1: Vec2,
    pub z2: Vec2,
    pub eps: f64,
    pub t1: f64,
    pub t2: f64,
}

/// Finds the closest pair of points between two disjoint convex curves.
///
/// Seeds Newton's method on the stationarity system of `|x₁(s) − x₂(t)|²`
/// from the best pair on a coarse parameter grid, refining the grid once
/// if the iteration stalls.
pub fn closest_points(curve1: &Curve, curve2: &Curve) -> Result<ClosestPoints> {
    for &grid_n in &[512usize, 2048] {
        let seed = seed_pair(curve1, curve2, grid_n);
        if let Some((s, t)) = newton_closest(curve1, curve2, seed) {
            let z1 = curve1.position(s);
            let z2 = curve2.position(t);
            let eps = (z1 - z2).norm();
            if eps <= 1e-14 {
                return Err(Error::domain("curves touch or overlap"));
            }
            if curve1.contains(z2) || curve2.contains(z1) {
                return Err(Error::domain("curves overlap"));
            }
            return Ok(ClosestPoints { z1, z2, eps, t1: s.rem_euclid(TAU), t2: t.rem_euclid(TAU) });
        }
    }
    Err(Error::NonConvergence(
        "closest-point Newton iteration failed after grid refinement".into(),
    ))
}

fn seed_pair(curve1: &Curve, curve2: &Curve, n: usize) -> (f64, f64) {
    let p1: Vec<Vec2> = (0..n).map(|k| curve1.position(TAU * k as f64 / n as f64)).collect();
    let p2: Vec<Vec2> = (0..n).map(|k| curve2.position(TAU * k as f64 / n as f64)).collect();
    let mut best = (0.0, 0.0);
    let mut best_d = f64::INFINITY;
    for (i, a) in p1.iter().enumerate() {
        for (j, b) in p2.iter().enumerate() {
            let d = (a - b).norm_squared();
            if d < best_d {
                best_d = d;
                best = (TAU * i as f64 / n as f64, TAU * j as f64 / n as f64);
            }
        }
    }
    best
}

fn newton_closest(curve1: &Curve, curve2: &Curve, seed: (f64, f64)) -> Option<(f64, f64)> {
    let (mut s, mut t) = seed;
    for _ in 0..50 {
        let x1 = curve1.position(s);
        let x2 = curve2.position(t);
        let d1 = curve1.derivative(s);
        let d2 = curve2.derivative(t);
        let dd1 = curve1.second_derivative(s);
        let dd2 = curve2.second_derivative(t);
        let diff = x1 - x2;

        let g = Vec2::new(diff.dot(&d1), -diff.dot(&d2));
        let j11 = d1.norm_squared() + diff.dot(&dd1);
        let j12 = -d1.dot(&d2);
        let j22 = d2.norm_squared() - diff.dot(&dd2);
        let det = j11 * j22 - j12 * j12;
        if det.abs() < 1e-300 {
            return None;
        }
        let ds = (g.x * j22 - g.y * j12) / det;
        let dt = (g.y * j11 - g.x * j12) / det;
        s -= ds;
        t -= dt;
        if ds.abs().max(dt.abs()) < 1e-12 {
            return Some((s, t));
        }
    }
    None
}

/// Two placed inclusions in the normalized frame: closest points
/// `z₁ = (−ε/2, 0)`, `z₂ = (ε/2, 0)`, contact at parameter 0 on each curve,
/// and osculating-disk centers on the x-axis.
#[derive(Debug, Clone)]
pub struct InclusionPair {
    pub curve1: Curve,
    pub curve2: Curve,
    pub eps: f64,
    pub z1: Vec2,
    pub z2: Vec2,
    /// Contact parameters after reparameterization (both zero by construction).
    pub t1: f64,
    pub t2: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub radius1: f64,
    pub radius2: f64,
    pub disk_center1: Vec2,
    pub disk_center2: Vec2,
}

/// Translates two shapes into the normalized frame at gap `eps`.
///
/// Shape 1 is supported from the left (`+x` support point touches the gap),
/// shape 2 from the right; orientations are kept. Supporting-line convexity
/// makes the two support points the global closest pair.
pub fn place_at_gap(shape1: &Curve, shape2: &Curve, eps: f64) -> Result<InclusionPair> {
    if !(eps > 0.0) {
        return Err(Error::domain(format!("gap must be positive, got {eps}")));
    }
    shape1.validate_convexity()?;
    shape2.validate_convexity()?;

    let t1 = shape1.support_parameter(Vec2::new(1.0, 0.0))?;
    let t2 = shape2.support_parameter(Vec2::new(-1.0, 0.0))?;

    let z1 = Vec2::new(-eps / 2.0, 0.0);
    let z2 = Vec2::new(eps / 2.0, 0.0);
    let curve1 = shape1.translated(z1 - shape1.position(t1)).with_parameter_origin(t1);
    let curve2 = shape2.translated(z2 - shape2.position(t2)).with_parameter_origin(t2);

    let kappa1 = curve1.curvature(0.0)?;
    let kappa2 = curve2.curvature(0.0)?;
    let radius1 = 1.0 / kappa1;
    let radius2 = 1.0 / kappa2;
    // Outward normals at contact point along ±x; disk centers sit inside.
    let disk_center1 = z1 - radius1 * curve1.outward_normal(0.0);
    let disk_center2 = z2 - radius2 * curve2.outward_normal(0.0);

    Ok(InclusionPair {
        curve1,
        curve2,
        eps,
        z1,
        z2,
        t1: 0.0,
        t2: 0.0,
        kappa1,
        kappa2,
        radius1,
        radius2,
        disk_center1,
        disk_center2,
    })
}

impl InclusionPair {
    /// Osculating disks at the closest points, radius `1/κⱼ`.
    pub fn osculating_disks(&self) -> Result<(Curve, Curve)> {
        let b1 = Curve::circle(self.disk_center1, self.radius1)?;
        let b2 = Curve::circle(self.disk_center2, self.radius2)?;
        Ok((b1, b2))
    }

    /// Overall configuration diameter.
    pub fn diameter(&self) -> f64 {
        let d1 = self.curve1.diameter();
        let d2 = self.curve2.diameter();
        // Widths add across the gap; a sampled cross-diameter bound.
        let mut d = d1.max(d2);
        let m = 128;
        for i in 0..m {
            let a = self.curve1.position(TAU * i as f64 / m as f64);
            for j in 0..m {
                let b = self.curve2.position(TAU * j as f64 / m as f64);
                d = d.max((a - b).norm());
            }
        }
        d
    }

    /// The same configuration scaled about the origin (the gap center).
    pub fn scaled(&self, factor: f64) -> InclusionPair {
        InclusionPair {
            curve1: self.curve1.scaled_about_origin(factor),
            curve2: self.curve2.scaled_about_origin(factor),
            eps: self.eps * factor,
            z1: self.z1 * factor,
            z2: self.z2 * factor,
            t1: self.t1,
            t2: self.t2,
            kappa1: self.kappa1 / factor,
            kappa2: self.kappa2 / factor,
            radius1: self.radius1 * factor,
            radius2: self.radius2 * factor,
            disk_center1: self.disk_center1 * factor,
            disk_center2: self.disk_center2 * factor,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn unit_circle_at(x: f64) -> Curve {
        Curve::circle(Vec2::new(x, 0.0), 1.0).unwrap()
    }

    #[test]
    fn circle_curvature_is_inverse_radius() {
        let c = Curve::circle(Vec2::zeros(), 2.0).unwrap();
        for k in 0..8 {
            let t = TAU * k as f64 / 8.0;
            assert_relative_eq!(c.curvature(t).unwrap(), 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn ellipse_vertex_curvature() {
        // κ(t) = ab / (a² sin²t + b² cos²t)^{3/2}: a/b² at the major vertex,
        // b/a² at the minor vertex.
        let e = Curve::ellipse(Vec2::zeros(), 2.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(e.curvature(0.0).unwrap(), 2.0, epsilon = 1e-13);
        assert_relative_eq!(e.curvature(PI / 2.0).unwrap(), 1.0 / 4.0, epsilon = 1e-13);
    }

    #[test]
    fn fourier_curvature_matches_tangent_angle_derivative() {
        let c = Curve::fourier_radial(Vec2::zeros(), 1.0, vec![0.0, 0.04], vec![0.02]).unwrap();
        let h = 1e-5;
        for k in 0..16 {
            let t = TAU * k as f64 / 16.0 + 0.0371;
            let angle = |tt: f64| {
                let d = c.derivative(tt);
                d.y.atan2(d.x)
            };
            let mut dtheta = angle(t + h) - angle(t - h);
            if dtheta > PI {
                dtheta -= TAU;
            }
            if dtheta < -PI {
                dtheta += TAU;
            }
            let fd = dtheta / (2.0 * h) / c.speed(t);
            assert_relative_eq!(c.curvature(t).unwrap(), fd, epsilon = 1e-7);
        }
    }

    #[test]
    fn nonconvex_fourier_rejected() {
        let r = Curve::fourier_radial(Vec2::zeros(), 1.0, vec![0.0, 0.0, 0.4], vec![]);
        assert!(r.is_err());
    }

    #[test]
    fn collinear_circles_closest_points() {
        let c1 = unit_circle_at(-1.05);
        let c2 = unit_circle_at(1.05);
        let cp = closest_points(&c1, &c2).unwrap();
        assert_relative_eq!(cp.eps, 0.1, epsilon = 1e-12);
        assert_relative_eq!(cp.z1.x, -0.05, epsilon = 1e-12);
        assert_relative_eq!(cp.z1.y, 0.0, epsilon = 1e-12);
        assert_relative_eq!(cp.z2.x, 0.05, epsilon = 1e-12);
    }

    #[test]
    fn mirror_symmetric_pair() {
        let left = Curve::ellipse(Vec2::new(-3.0, 0.4), 1.5, 1.0, 0.3).unwrap();
        let right = Curve::ellipse(Vec2::new(3.0, 0.4), 1.5, 1.0, -0.3).unwrap();
        let cp = closest_points(&left, &right).unwrap();
        assert_relative_eq!(cp.z1.x, -cp.z2.x, epsilon = 1e-9);
        assert_relative_eq!(cp.z1.y, cp.z2.y, epsilon = 1e-9);
    }

    #[test]
    fn ellipse_circle_gap_matches_dense_scan() {
        let e = Curve::ellipse(Vec2::new(-2.2, 0.0), 2.0, 1.0, 0.0).unwrap();
        let c = unit_circle_at(1.21);
        let cp = closest_points(&e, &c).unwrap();

        // Exhaustive minimization oracle on a fine parameter grid.
        let n = 4000;
        let mut best = f64::INFINITY;
        for i in 0..n {
            let s = TAU * i as f64 / n as f64;
            let xs = e.position(s);
            for j in 0..n {
                let t = TAU * j as f64 / n as f64;
                best = best.min((xs - c.position(t)).norm());
            }
        }
        assert!((cp.eps - best).abs() < 1e-8, "newton {} vs scan {}", cp.eps, best);
    }

    #[test]
    fn overlapping_curves_error() {
        let c1 = unit_circle_at(0.0);
        let c2 = unit_circle_at(0.5);
        assert!(closest_points(&c1, &c2).is_err());
    }

    #[test]
    fn place_two_unit_circles() {
        let c = Curve::circle(Vec2::zeros(), 1.0).unwrap();
        let pair = place_at_gap(&c, &c, 0.1).unwrap();
        assert_relative_eq!(pair.curve1.center().x, -1.05, epsilon = 1e-12);
        assert_relative_eq!(pair.curve2.center().x, 1.05, epsilon = 1e-12);
        assert_relative_eq!(pair.kappa1, 1.0, epsilon = 1e-12);
        // A circle is its own osculating disk.
        let (b1, _) = pair.osculating_disks().unwrap();
        assert_relative_eq!(b1.center().x, -1.05, epsilon = 1e-12);
    }

    #[test]
    fn placement_self_consistency_small_gap() {
        let e = Curve::ellipse(Vec2::zeros(), 1.5, 0.8, 0.0).unwrap();
        let pair = place_at_gap(&e, &e, 1e-3).unwrap();
        let cp = closest_points(&pair.curve1, &pair.curve2).unwrap();
        assert!((cp.eps - 1e-3).abs() < 1e-10, "eps {}", cp.eps);
        assert!(cp.z1.y.abs() < 1e-9 && cp.z2.y.abs() < 1e-9);
    }

    #[test]
    fn placement_fourier_curvature_matches_radial_formula() {
        let f1 = Curve::fourier_radial(Vec2::zeros(), 1.0, vec![0.03, 0.02], vec![0.01]).unwrap();
        let f2 = Curve::fourier_radial(Vec2::zeros(), 0.9, vec![0.0, 0.03], vec![]).unwrap();
        let pair = place_at_gap(&f1, &f2, 0.02).unwrap();

        // κ(θ) = (ρ² + 2ρ'² − ρρ'') / (ρ² + ρ'²)^{3/2} for a radial graph.
        for (curve, kappa) in [(&pair.curve1, pair.kappa1), (&pair.curve2, pair.kappa2)] {
            let (r, dr, ddr) = curve.radial(curve.t_offset);
            let expect = (r * r + 2.0 * dr * dr - r * ddr) / (r * r + dr * dr).powf(1.5);
            assert_relative_eq!(kappa, expect, epsilon = 1e-9);
        }
    }

    #[test]
    fn osculating_disk_second_order_contact() {
        let e = Curve::ellipse(Vec2::zeros(), 2.0, 1.0, 0.0).unwrap();
        let pair = place_at_gap(&e, &e, 0.05).unwrap();
        let (b1, _) = pair.osculating_disks().unwrap();
        // |x(t) − nearest point of B₁| = O(|t|³) near the contact parameter.
        for &dt in &[0.02, 0.01, 0.005] {
            let x = pair.curve1.position(dt);
            let gap = ((x - b1.center()).norm() - pair.radius1).abs();
            assert!(
                gap < 10.0 * dt * dt * dt,
                "contact defect {gap:.3e} at dt={dt} exceeds cubic bound"
            );
        }
    }

    #[test]
    fn ellipse_contact_at_major_vertex_radius() {
        // Touching at the major axis vertex: osculating radius b²/a.
        let e = Curve::ellipse(Vec2::zeros(), 2.0, 1.0, 0.0).unwrap();
        let pair = place_at_gap(&e, &e, 0.01).unwrap();
        assert_relative_eq!(pair.radius1, 0.5, epsilon = 1e-10);
        assert_relative_eq!(pair.radius2, 0.5, epsilon = 1e-10);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

            /// Any radial perturbation the validator accepts is strictly
            /// convex on a fine sample, and placement reproduces the gap.
            #[test]
            fn accepted_fourier_curves_are_convex(
                a1 in -0.06f64..0.06,
                a2 in -0.04f64..0.04,
                b1 in -0.05f64..0.05,
                eps in 1e-3f64..0.2,
            ) {
                if let Ok(curve) =
                    Curve::fourier_radial(Vec2::zeros(), 1.0, vec![a1, a2], vec![b1])
                {
                    for k in 0..512 {
                        let t = TAU * k as f64 / 512.0;
                        prop_assert!(curve.curvature(t).unwrap() > 0.0);
                    }
                    let pair = place_at_gap(&curve, &curve, eps).unwrap();
                    let cp = closest_points(&pair.curve1, &pair.curve2).unwrap();
                    prop_assert!((cp.eps - eps).abs() < 1e-9 * eps.max(1e-3));
                }
            }

            /// Two circles: the closest pair is along the center line with
            /// gap |c₁−c₂| − r₁ − r₂.
            #[test]
            fn circle_pair_gap_closed_form(
                r1 in 0.2f64..2.0,
                r2 in 0.2f64..2.0,
                d in 0.05f64..3.0,
                y in -1.0f64..1.0,
            ) {
                let c1 = Curve::circle(Vec2::new(0.0, 0.0), r1).unwrap();
                let c2 = Curve::circle(Vec2::new(r1 + r2 + d, y * 0.0), r2).unwrap();
                let cp = closest_points(&c1, &c2).unwrap();
                prop_assert!((cp.eps - d).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn normals_at_contact_are_collinear_with_gap() {
        let f = Curve::fourier_radial(Vec2::zeros(), 1.0, vec![0.02, 0.03], vec![0.015]).unwrap();
        let c = Curve::circle(Vec2::zeros(), 0.7).unwrap();
        let pair = place_at_gap(&f, &c, 0.02).unwrap();
        let n1 = pair.curve1.outward_normal(0.0);
        let n2 = pair.curve2.outward_normal(0.0);
        assert_relative_eq!(n1.x, 1.0, epsilon = 1e-10);
        assert_relative_eq!(n2.x, -1.0, epsilon = 1e-10);
        assert_relative_eq!((pair.z1 - pair.z2).norm(), 0.02, epsilon = 1e-12);
    }
}
