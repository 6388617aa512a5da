//! Single-layer potentials and the block Neumann–Poincaré operator.
//!
//! All operators act on nodal density values with quadrature weights folded
//! in, so matrix–vector products approximate the continuous operators
//! directly. Off-boundary evaluation close to a curve goes through
//! [`NearEvaluator`], which upsamples the density by trigonometric
//! interpolation before applying the plain trapezoid rule.

use crate::discretization::{BoundaryGrid, LogQuadratureRule};
use crate::error::{Error, Result};
use crate::geometry::{Curve, InclusionPair, Vec2};
use faer::Mat;
use rustfft::{num_complex::Complex, FftPlanner};
use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::{Arc, Mutex};

/// Multiple of the local node spacing below which plain trapezoid
/// evaluation refuses to work.
pub const NEAR_ZONE_FACTOR: f64 = 5.0;
/// Close-evaluation upsampling: target `M ≈ UPSAMPLE_RATE · speed / dist`.
const UPSAMPLE_RATE: f64 = 32.0;
/// Hard cap on upsampled source counts.
const UPSAMPLE_CAP: usize = 1 << 24;

/// Nyström grids for a placed pair of curves.
#[derive(Debug, Clone)]
pub struct GridPair {
    pub first: BoundaryGrid,
    pub second: BoundaryGrid,
}

impl GridPair {
    pub fn new(pair: &InclusionPair, n: usize) -> Result<Self> {
        Ok(GridPair {
            first: BoundaryGrid::new(&pair.curve1, n)?,
            second: BoundaryGrid::new(&pair.curve2, n)?,
        })
    }

    pub fn total_nodes(&self) -> usize {
        self.first.n + self.second.n
    }

    pub fn perimeters(&self) -> (f64, f64) {
        (self.first.perimeter(), self.second.perimeter())
    }
}

/// Nodal density values on both boundaries (charge per arclength).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityPair {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

impl DensityPair {
    pub fn zeros(grids: &GridPair) -> Self {
        DensityPair { first: vec![0.0; grids.first.n], second: vec![0.0; grids.second.n] }
    }

    pub fn indicator_first(grids: &GridPair) -> Self {
        DensityPair { first: vec![1.0; grids.first.n], second: vec![0.0; grids.second.n] }
    }

    pub fn indicator_second(grids: &GridPair) -> Self {
        DensityPair { first: vec![0.0; grids.first.n], second: vec![1.0; grids.second.n] }
    }

    /// Componentwise boundary integrals `(∮ φ⁽¹⁾ dσ, ∮ φ⁽²⁾ dσ)`.
    pub fn moments(&self, grids: &GridPair) -> (f64, f64) {
        let m1 = grids.first.weights.iter().zip(&self.first).map(|(w, f)| w * f).sum();
        let m2 = grids.second.weights.iter().zip(&self.second).map(|(w, f)| w * f).sum();
        (m1, m2)
    }

    /// Weighted L² inner product over both boundaries.
    pub fn inner(&self, grids: &GridPair, other: &DensityPair) -> f64 {
        let a: f64 = grids
            .first
            .weights
            .iter()
            .zip(&self.first)
            .zip(&other.first)
            .map(|((w, f), g)| w * f * g)
            .sum();
        let b: f64 = grids
            .second
            .weights
            .iter()
            .zip(&self.second)
            .zip(&other.second)
            .map(|((w, f), g)| w * f * g)
            .sum();
        a + b
    }

    pub fn max_abs(&self) -> f64 {
        self.first.iter().chain(&self.second).fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    /// `self + c · other`.
    pub fn axpy(&self, c: f64, other: &DensityPair) -> DensityPair {
        DensityPair {
            first: self.first.iter().zip(&other.first).map(|(a, b)| a + c * b).collect(),
            second: self.second.iter().zip(&other.second).map(|(a, b)| a + c * b).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> DensityPair {
        DensityPair {
            first: self.first.iter().map(|v| c * v).collect(),
            second: self.second.iter().map(|v| c * v).collect(),
        }
    }

    pub fn from_concat(values: &[f64], n1: usize) -> DensityPair {
        DensityPair { first: values[..n1].to_vec(), second: values[n1..].to_vec() }
    }

    pub fn concat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.first.len() + self.second.len());
        v.extend_from_slice(&self.first);
        v.extend_from_slice(&self.second);
        v
    }
}

#[inline]
pub(crate) fn log_kernel(x: Vec2, y: Vec2) -> f64 {
    (x - y).norm().ln() / TAU
}

#[inline]
pub(crate) fn grad_log_kernel(x: Vec2, y: Vec2) -> Vec2 {
    let d = x - y;
    d / (TAU * d.norm_squared())
}

#[inline]
pub(crate) fn np_kernel(x: Vec2, nu: Vec2, y: Vec2) -> f64 {
    let d = x - y;
    d.dot(&nu) / (TAU * d.norm_squared())
}

/// Plain trapezoid single-layer evaluation away from the boundary.
///
/// Refuses targets closer than [`NEAR_ZONE_FACTOR`] node spacings; use a
/// [`NearEvaluator`] there.
pub fn slp_eval(grid: &BoundaryGrid, density: &[f64], x: Vec2) -> Result<f64> {
    check_far(grid, x)?;
    Ok(slp_eval_unchecked(grid, density, x))
}

/// Gradient counterpart of [`slp_eval`].
pub fn slp_grad(grid: &BoundaryGrid, density: &[f64], x: Vec2) -> Result<Vec2> {
    check_far(grid, x)?;
    let mut g = Vec2::zeros();
    for k in 0..grid.n {
        g += grid.weights[k] * density[k] * grad_log_kernel(x, grid.positions[k]);
    }
    Ok(g)
}

fn slp_eval_unchecked(grid: &BoundaryGrid, density: &[f64], x: Vec2) -> f64 {
    let mut v = 0.0;
    for k in 0..grid.n {
        v += grid.weights[k] * density[k] * log_kernel(x, grid.positions[k]);
    }
    v
}

fn check_far(grid: &BoundaryGrid, x: Vec2) -> Result<()> {
    let (_, signed) = grid.curve.nearest_point(x);
    let dist = signed.abs();
    let threshold = NEAR_ZONE_FACTOR * grid.max_spacing();
    if dist < threshold {
        Err(Error::NearZone { dist, threshold })
    } else {
        Ok(())
    }
}

/// Dense self-interaction single-layer matrix on one boundary.
///
/// The kernel splits into the periodic log singularity (handled by the
/// product rule) and a smooth factor with diagonal limit `ln |x'(t)|²`.
pub fn slp_matrix_on(grid: &BoundaryGrid, rule: &LogQuadratureRule) -> Result<Mat<f64>> {
    if rule.n != grid.n {
        return Err(Error::domain(format!(
            "log rule size {} does not match grid size {}",
            rule.n, grid.n
        )));
    }
    let n = grid.n;
    let h = TAU / n as f64;
    let c = 1.0 / (4.0 * std::f64::consts::PI);
    Ok(Mat::from_fn(n, n, |j, k| {
        let smooth = if j == k {
            (grid.speeds[j] * grid.speeds[j]).ln()
        } else {
            let dt = grid.nodes_t[j] - grid.nodes_t[k];
            let sin2 = 4.0 * (dt / 2.0).sin().powi(2);
            ((grid.positions[j] - grid.positions[k]).norm_squared() / sin2).ln()
        };
        c * (rule.weight(j, k) + h * smooth) * grid.speeds[k]
    }))
}

/// Dense self-interaction Neumann–Poincaré matrix on one boundary.
/// The diagonal uses the continuous kernel limit `κ(x)/(4π)`.
pub fn npstar_self(grid: &BoundaryGrid) -> Mat<f64> {
    let n = grid.n;
    Mat::from_fn(n, n, |j, k| {
        let kernel = if j == k {
            grid.curvatures[j] / (2.0 * TAU)
        } else {
            np_kernel(grid.positions[j], grid.normals[j], grid.positions[k])
        };
        kernel * grid.weights[k]
    })
}

/// Dense cross matrix: normal derivative on `target` of the single layer
/// generated on `source`.
pub fn npstar_cross(target: &BoundaryGrid, source: &BoundaryGrid) -> Result<Mat<f64>> {
    check_disjoint(target, source)?;
    Ok(Mat::from_fn(target.n, source.n, |j, k| {
        np_kernel(target.positions[j], target.normals[j], source.positions[k]) * source.weights[k]
    }))
}

/// Dense cross single-layer matrix: potential on `target` generated on `source`.
pub fn slp_matrix_cross(target: &BoundaryGrid, source: &BoundaryGrid) -> Result<Mat<f64>> {
    check_disjoint(target, source)?;
    Ok(Mat::from_fn(target.n, source.n, |j, k| {
        log_kernel(target.positions[j], source.positions[k]) * source.weights[k]
    }))
}

fn check_disjoint(a: &BoundaryGrid, b: &BoundaryGrid) -> Result<()> {
    let mut min2 = f64::INFINITY;
    for j in (0..a.n).step_by((a.n / 64).max(1)) {
        for k in (0..b.n).step_by((b.n / 64).max(1)) {
            min2 = min2.min((a.positions[j] - b.positions[k]).norm_squared());
        }
    }
    if min2 < 1e-28 {
        return Err(Error::domain("curves touch: cross kernel is singular"));
    }
    Ok(())
}

/// 2×2 block operator on the product boundary space.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    pub b11: Mat<f64>,
    pub b12: Mat<f64>,
    pub b21: Mat<f64>,
    pub b22: Mat<f64>,
}

impl BlockOperator {
    pub fn apply(&self, phi: &DensityPair) -> DensityPair {
        let apply_block = |m: &Mat<f64>, v: &[f64]| -> Vec<f64> {
            (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
                .collect()
        };
        let mut first = apply_block(&self.b11, &phi.first);
        for (a, b) in first.iter_mut().zip(apply_block(&self.b12, &phi.second)) {
            *a += b;
        }
        let mut second = apply_block(&self.b21, &phi.first);
        for (a, b) in second.iter_mut().zip(apply_block(&self.b22, &phi.second)) {
            *a += b;
        }
        DensityPair { first, second }
    }

    /// Dense concatenated form, block rows stacked.
    pub fn to_dense(&self) -> Mat<f64> {
        let n1 = self.b11.nrows();
        let m1 = self.b11.ncols();
        let n = n1 + self.b22.nrows();
        Mat::from_fn(n, n, |i, j| match (i < n1, j < m1) {
            (true, true) => self.b11[(i, j)],
            (true, false) => self.b12[(i, j - m1)],
            (false, true) => self.b21[(i - n1, j)],
            (false, false) => self.b22[(i - n1, j - m1)],
        })
    }
}

/// Assembles the block Neumann–Poincaré operator for a placed pair,
/// including the near-gap cross-row corrections.
pub fn assemble_np(setup: &PairSetup) -> Result<BlockOperator> {
    let grids = &setup.grids;
    let mut b12 = npstar_cross(&grids.first, &grids.second)?;
    let mut b21 = npstar_cross(&grids.second, &grids.first)?;
    for j in 0..grids.first.n {
        if let Some(row) = setup.np_cross_row(true, j) {
            for (k, v) in row.iter().enumerate() {
                b12[(j, k)] = *v;
            }
        }
    }
    for j in 0..grids.second.n {
        if let Some(row) = setup.np_cross_row(false, j) {
            for (k, v) in row.iter().enumerate() {
                b21[(j, k)] = *v;
            }
        }
    }
    Ok(BlockOperator {
        b11: npstar_self(&grids.first),
        b12,
        b21,
        b22: npstar_self(&grids.second),
    })
}

/// Assembles the block single-layer operator: each block row restricts the
/// total potential to one boundary. Near-gap cross rows are corrected.
pub fn assemble_single_layer(setup: &PairSetup) -> Result<BlockOperator> {
    let grids = &setup.grids;
    let mut b12 = slp_matrix_cross(&grids.first, &grids.second)?;
    let mut b21 = slp_matrix_cross(&grids.second, &grids.first)?;
    for j in 0..grids.first.n {
        if let Some(row) = setup.log_cross_row(true, j) {
            for (k, v) in row.iter().enumerate() {
                b12[(j, k)] = *v;
            }
        }
    }
    for j in 0..grids.second.n {
        if let Some(row) = setup.log_cross_row(false, j) {
            for (k, v) in row.iter().enumerate() {
                b21[(j, k)] = *v;
            }
        }
    }
    Ok(BlockOperator {
        b11: slp_matrix_on(&grids.first, &setup.rule1)?,
        b12,
        b21,
        b22: slp_matrix_on(&grids.second, &setup.rule2)?,
    })
}

/// Matrix-free application of the block Neumann–Poincaré operator; used for
/// residual checks at resolutions where a second dense copy is not worth it.
pub fn np_apply(setup: &PairSetup, phi: &DensityPair) -> DensityPair {
    let g1 = &setup.grids.first;
    let g2 = &setup.grids.second;
    let mut first = vec![0.0; g1.n];
    for j in 0..g1.n {
        let x = g1.positions[j];
        let nu = g1.normals[j];
        let mut acc = 0.0;
        for k in 0..g1.n {
            let kernel = if j == k {
                g1.curvatures[j] / (2.0 * TAU)
            } else {
                np_kernel(x, nu, g1.positions[k])
            };
            acc += kernel * g1.weights[k] * phi.first[k];
        }
        if let Some(row) = setup.np_cross_row(true, j) {
            for k in 0..g2.n {
                acc += row[k] * phi.second[k];
            }
        } else {
            for k in 0..g2.n {
                acc += np_kernel(x, nu, g2.positions[k]) * g2.weights[k] * phi.second[k];
            }
        }
        first[j] = acc;
    }
    let mut second = vec![0.0; g2.n];
    for j in 0..g2.n {
        let x = g2.positions[j];
        let nu = g2.normals[j];
        let mut acc = 0.0;
        if let Some(row) = setup.np_cross_row(false, j) {
            for k in 0..g1.n {
                acc += row[k] * phi.first[k];
            }
        } else {
            for k in 0..g1.n {
                acc += np_kernel(x, nu, g1.positions[k]) * g1.weights[k] * phi.first[k];
            }
        }
        for k in 0..g2.n {
            let kernel = if j == k {
                g2.curvatures[j] / (2.0 * TAU)
            } else {
                np_kernel(x, nu, g2.positions[k])
            };
            acc += kernel * g2.weights[k] * phi.second[k];
        }
        second[j] = acc;
    }
    DensityPair { first, second }
}

/// Matrix-free boundary restriction of the total single-layer potential.
pub fn single_layer_boundary_apply(setup: &PairSetup, phi: &DensityPair) -> Result<DensityPair> {
    let grids = &setup.grids;
    let rule1 = &setup.rule1;
    let rule2 = &setup.rule2;
    let on_boundary = |g: &BoundaryGrid, rule: &LogQuadratureRule, phi: &[f64]| -> Vec<f64> {
        let n = g.n;
        let h = TAU / n as f64;
        let c = 1.0 / (4.0 * std::f64::consts::PI);
        (0..n)
            .map(|j| {
                let mut acc = 0.0;
                for k in 0..n {
                    let smooth = if j == k {
                        (g.speeds[j] * g.speeds[j]).ln()
                    } else {
                        let dt = g.nodes_t[j] - g.nodes_t[k];
                        let sin2 = 4.0 * (dt / 2.0).sin().powi(2);
                        ((g.positions[j] - g.positions[k]).norm_squared() / sin2).ln()
                    };
                    acc += c * (rule.weight(j, k) + h * smooth) * g.speeds[k] * phi[k];
                }
                acc
            })
            .collect()
    };
    let cross = |target_first: bool, target: &BoundaryGrid, source: &BoundaryGrid, phi: &[f64]| -> Vec<f64> {
        (0..target.n)
            .map(|j| {
                if let Some(row) = setup.log_cross_row(target_first, j) {
                    (0..source.n).map(|k| row[k] * phi[k]).sum()
                } else {
                    let x = target.positions[j];
                    (0..source.n)
                        .map(|k| log_kernel(x, source.positions[k]) * source.weights[k] * phi[k])
                        .sum()
                }
            })
            .collect()
    };
    let mut first = on_boundary(&grids.first, rule1, &phi.first);
    for (a, b) in first.iter_mut().zip(cross(true, &grids.first, &grids.second, &phi.second)) {
        *a += b;
    }
    let mut second = on_boundary(&grids.second, rule2, &phi.second);
    for (a, b) in second.iter_mut().zip(cross(false, &grids.second, &grids.first, &phi.first)) {
        *a += b;
    }
    Ok(DensityPair { first, second })
}

struct FineLevel {
    positions: Vec<Vec2>,
    /// `(2π/M) · φ(t_m) · |x'(t_m)|`, trigonometrically interpolated.
    fw: Vec<f64>,
}

/// Close evaluation of a single-layer potential by global trigonometric
/// upsampling of the density.
///
/// The source count grows like `1/dist` so the plain trapezoid rule regains
/// spectral accuracy arbitrarily close to the curve (cap 2²⁴ sources).
pub struct NearEvaluator {
    curve: Curve,
    n: usize,
    max_speed: f64,
    spectrum: Vec<Complex<f64>>,
    levels: Mutex<HashMap<usize, Arc<FineLevel>>>,
}

impl NearEvaluator {
    pub fn new(grid: &BoundaryGrid, density: &[f64]) -> Result<Self> {
        if density.len() != grid.n {
            return Err(Error::domain("density length does not match grid"));
        }
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(grid.n);
        let mut buf: Vec<Complex<f64>> = density
            .iter()
            .zip(&grid.speeds)
            .map(|(d, s)| Complex::new(d * s, 0.0))
            .collect();
        fft.process(&mut buf);
        Ok(NearEvaluator {
            curve: grid.curve.clone(),
            n: grid.n,
            max_speed: grid.curve.max_speed(),
            spectrum: buf,
            levels: Mutex::new(HashMap::new()),
        })
    }

    fn level_for(&self, dist: f64) -> usize {
        let want = (UPSAMPLE_RATE * self.max_speed / dist).ceil();
        let want = want.clamp(8.0 * self.n as f64, UPSAMPLE_CAP as f64) as usize;
        want.next_power_of_two().min(UPSAMPLE_CAP)
    }

    fn fine(&self, m: usize) -> Arc<FineLevel> {
        if let Some(l) = self.levels.lock().unwrap().get(&m) {
            return l.clone();
        }
        let fine_f = upsample(&self.spectrum, self.n, m);
        let h = TAU / m as f64;
        let positions: Vec<Vec2> = (0..m).map(|k| self.curve.position(h * k as f64)).collect();
        let fw: Vec<f64> = fine_f.iter().map(|f| f * h).collect();
        let level = Arc::new(FineLevel { positions, fw });
        let mut map = self.levels.lock().unwrap();
        // Fine levels are large; keep the cache at two entries.
        while map.len() >= 2 {
            let smallest = *map.keys().min().unwrap();
            map.remove(&smallest);
        }
        map.insert(m, level.clone());
        level
    }

    /// Distance from `x` to the curve (positive outside, negative inside).
    pub fn signed_distance(&self, x: Vec2) -> f64 {
        self.curve.nearest_point(x).1
    }

    /// Potential value at any point off the curve, either side.
    pub fn value_any_side(&self, x: Vec2) -> Result<f64> {
        let d = self.signed_distance(x).abs();
        if d < 1e-13 {
            return Err(Error::domain("evaluation point lies on the curve"));
        }
        let level = self.fine(self.level_for(d));
        let mut v = 0.0;
        for (p, fw) in level.positions.iter().zip(&level.fw) {
            v += fw * (x - p).norm().ln();
        }
        Ok(v / TAU)
    }

    /// Gradient at any point off the curve, either side.
    pub fn gradient_any_side(&self, x: Vec2) -> Result<Vec2> {
        let d = self.signed_distance(x).abs();
        if d < 1e-13 {
            return Err(Error::domain("evaluation point lies on the curve"));
        }
        let level = self.fine(self.level_for(d));
        let mut g = Vec2::zeros();
        for (p, fw) in level.positions.iter().zip(&level.fw) {
            let diff = x - p;
            g += (*fw / diff.norm_squared()) * diff;
        }
        Ok(g / TAU)
    }

    /// Exterior-only value; errors for points inside the curve.
    pub fn value(&self, x: Vec2) -> Result<f64> {
        if self.signed_distance(x) <= 0.0 {
            return Err(Error::domain("evaluation point is inside the curve"));
        }
        self.value_any_side(x)
    }

    /// Exterior-only gradient; errors for points inside the curve.
    pub fn gradient(&self, x: Vec2) -> Result<Vec2> {
        if self.signed_distance(x) <= 0.0 {
            return Err(Error::domain("evaluation point is inside the curve"));
        }
        self.gradient_any_side(x)
    }

    #[cfg(test)]
    fn value_at_level(&self, x: Vec2, m: usize) -> f64 {
        let level = self.fine(m);
        let mut v = 0.0;
        for (p, fw) in level.positions.iter().zip(&level.fw) {
            v += fw * (x - p).norm().ln();
        }
        v / TAU
    }
}

/// Trigonometric zero-pad interpolation of length-`n` spectral data to `m`
/// uniform nodes; the Nyquist mode is split to keep the result real.
fn upsample(spectrum: &[Complex<f64>], n: usize, m: usize) -> Vec<f64> {
    assert!(m >= n && n % 2 == 0);
    let mut planner = FftPlanner::new();
    if m == n {
        let ifft = planner.plan_fft_inverse(n);
        let mut buf = spectrum.to_vec();
        ifft.process(&mut buf);
        return buf.iter().map(|c| c.re / n as f64).collect();
    }
    let mut padded = vec![Complex::new(0.0, 0.0); m];
    let half = n / 2;
    padded[..half].copy_from_slice(&spectrum[..half]);
    for k in (half + 1)..n {
        padded[m - n + k] = spectrum[k];
    }
    padded[half] = 0.5 * spectrum[half];
    padded[m - half] += 0.5 * spectrum[half];
    let ifft = planner.plan_fft_inverse(m);
    ifft.process(&mut padded);
    padded.iter().map(|c| c.re / n as f64).collect()
}

/// Direction-specific correction of near-gap cross-operator rows.
///
/// When a target node faces the other boundary at a distance comparable to
/// the node spacing, the cross kernels develop structure on the scale of
/// that distance and the plain trapezoid row is wrong. The corrected row is
/// the kernel sampled on a fine grid and band-limited back to the coarse
/// grid, which integrates trigonometrically interpolated densities to
/// spectral accuracy.
#[derive(Debug, Clone, Default)]
struct CrossRows {
    np: HashMap<usize, Vec<f64>>,
    log: HashMap<usize, Vec<f64>>,
}

/// Fine-sampling rate for corrected rows: `M ≈ CROSS_RATE · speed / dist`.
const CROSS_RATE: f64 = 48.0;
/// Targets within this many source arc-spacings of the source curve get
/// corrected rows.
const CROSS_CUTOFF_SPACINGS: f64 = 8.0;
const CROSS_CAP: usize = 1 << 23;

fn build_cross_rows(target: &BoundaryGrid, source: &BoundaryGrid) -> CrossRows {
    let n = source.n;
    let cutoff = CROSS_CUTOFF_SPACINGS * source.max_spacing();
    let src_max_speed = source.curve.max_speed();
    let mut rows = CrossRows::default();
    let mut planner = FftPlanner::new();
    let mut fine_cache: HashMap<usize, Arc<(Vec<Vec2>, Vec<f64>)>> = HashMap::new();

    for j in 0..target.n {
        let x = target.positions[j];
        // Cheap lower bound on the distance before the Newton refinement.
        let coarse = source
            .positions
            .iter()
            .map(|p| (x - p).norm())
            .fold(f64::INFINITY, f64::min);
        if coarse > cutoff + 2.0 * source.max_spacing() {
            continue;
        }
        let d = source.curve.nearest_point(x).1.abs();
        if d > cutoff {
            continue;
        }
        let m_raw = (CROSS_RATE * src_max_speed / d.max(1e-12)) as usize;
        let m = m_raw.clamp(4 * n, CROSS_CAP).next_power_of_two().min(CROSS_CAP);
        let fine = fine_cache
            .entry(m)
            .or_insert_with(|| {
                let h = TAU / m as f64;
                let pos: Vec<Vec2> = (0..m).map(|i| source.curve.position(h * i as f64)).collect();
                let sp: Vec<f64> = (0..m).map(|i| source.curve.speed(h * i as f64)).collect();
                Arc::new((pos, sp))
            })
            .clone();
        let nu = target.normals[j];
        let mut f_np: Vec<Complex<f64>> = Vec::with_capacity(m);
        let mut f_log: Vec<Complex<f64>> = Vec::with_capacity(m);
        for i in 0..m {
            let y = fine.0[i];
            let s = fine.1[i];
            f_np.push(Complex::new(np_kernel(x, nu, y) * s, 0.0));
            f_log.push(Complex::new(log_kernel(x, y) * s, 0.0));
        }
        rows.np.insert(j, band_limit_row(&mut planner, f_np, m, n));
        rows.log.insert(j, band_limit_row(&mut planner, f_log, m, n));
    }
    rows
}

/// Band-limits `m` fine kernel samples to the `n`-node grid, returning the
/// weighted quadrature row `R_k` with `Σ_k R_k φ_k ≈ ∫ F · (interp φ) ds`.
fn band_limit_row(planner: &mut FftPlanner<f64>, mut fine: Vec<Complex<f64>>, m: usize, n: usize) -> Vec<f64> {
    planner.plan_fft_forward(m).process(&mut fine);
    let half = n / 2;
    let mut h = vec![Complex::new(0.0, 0.0); n];
    h[..half].copy_from_slice(&fine[..half]);
    for f in 1..half {
        h[n - f] = fine[m - f];
    }
    h[half] = 0.5 * (fine[half] + fine[m - half]);
    planner.plan_fft_inverse(n).process(&mut h);
    let scale = TAU / (n as f64 * m as f64);
    h.iter().map(|c| c.re * scale).collect()
}

/// Grids, log rules, and near-gap cross-row corrections for a placed pair:
/// everything the operator assemblies need.
pub struct PairSetup {
    pub grids: GridPair,
    pub rule1: LogQuadratureRule,
    pub rule2: LogQuadratureRule,
    /// Corrected rows for targets on the first grid against the second.
    cross12: CrossRows,
    /// Corrected rows for targets on the second grid against the first.
    cross21: CrossRows,
}

impl PairSetup {
    pub fn new(pair: &InclusionPair, n: usize) -> Result<Self> {
        let grids = GridPair::new(pair, n)?;
        Self::from_grids(grids)
    }

    pub fn from_grids(grids: GridPair) -> Result<Self> {
        let rule1 = LogQuadratureRule::new(grids.first.n);
        let rule2 = LogQuadratureRule::new(grids.second.n);
        let cross12 = build_cross_rows(&grids.first, &grids.second);
        let cross21 = build_cross_rows(&grids.second, &grids.first);
        Ok(PairSetup { grids, rule1, rule2, cross12, cross21 })
    }

    /// Weighted cross-operator row (kernel × weights) for the normal
    /// derivative kernel; `None` when the plain trapezoid row is accurate.
    pub fn np_cross_row(&self, target_first: bool, j: usize) -> Option<&[f64]> {
        let rows = if target_first { &self.cross12 } else { &self.cross21 };
        rows.np.get(&j).map(|v| v.as_slice())
    }

    /// Same for the log kernel.
    pub fn log_cross_row(&self, target_first: bool, j: usize) -> Option<&[f64]> {
        let rows = if target_first { &self.cross12 } else { &self.cross21 };
        rows.log.get(&j).map(|v| v.as_slice())
    }

    pub fn corrected_rows(&self) -> usize {
        self.cross12.np.len() + self.cross21.np.len()
    }
}

/// Sum of the two single-layer potentials of a density pair, evaluated
/// anywhere in the exterior of both curves (including deep in the gap).
pub struct LayerField {
    ev1: NearEvaluator,
    ev2: NearEvaluator,
}

impl LayerField {
    pub fn new(grids: &GridPair, density: &DensityPair) -> Result<Self> {
        Ok(LayerField {
            ev1: NearEvaluator::new(&grids.first, &density.first)?,
            ev2: NearEvaluator::new(&grids.second, &density.second)?,
        })
    }

    fn check_exterior(&self, x: Vec2) -> Result<()> {
        if self.ev1.signed_distance(x) <= 0.0 || self.ev2.signed_distance(x) <= 0.0 {
            return Err(Error::domain("evaluation point is not exterior to both curves"));
        }
        Ok(())
    }

    pub fn value(&self, x: Vec2) -> Result<f64> {
        self.check_exterior(x)?;
        Ok(self.ev1.value_any_side(x)? + self.ev2.value_any_side(x)?)
    }

    pub fn gradient(&self, x: Vec2) -> Result<Vec2> {
        self.check_exterior(x)?;
        Ok(self.ev1.gradient_any_side(x)? + self.ev2.gradient_any_side(x)?)
    }
}
