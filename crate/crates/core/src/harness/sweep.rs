//! Gap sweeps: run the full pipeline over a list of gap widths and collect
//! one row of measurements per gap, plus log-log rate fitting.

use crate::discretization::default_grid_size;
use crate::error::{Error, Result};
use crate::geometry::{place_at_gap, Curve, InclusionPair};
use crate::harness::config::{ExperimentConfig, ProblemKind};
use crate::potentials::PairSetup;
use crate::singular::{build_q, predicted_gap_value, DiskSingular, SingularFunction};
use crate::solver::{
    decompose, inner_product_hg, max_gap_gradient, solve_conducting, HarmonicPolynomial,
};
use crate::spectral::{build_g, multiplicity_near_half, MeanZeroSolver, MULTIPLICITY_TOL};
use serde::Serialize;

fn rot90(v: crate::geometry::Vec2) -> crate::geometry::Vec2 {
    crate::geometry::Vec2::new(-v.y, v.x)
}

/// One gap width's worth of measurements.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub eps: f64,
    pub n_used: usize,
    pub q_gap_measured: f64,
    pub q_gap_predicted: f64,
    /// `⟨h, g⟩` (conjugate background for insulating runs).
    pub h_g_inner: f64,
    pub c_eps: f64,
    pub a_eps: f64,
    /// `α_ε` (or `β_ε` for insulating runs).
    pub alpha_eps: f64,
    pub max_gap_grad_u: f64,
    /// `α_ε |⟨h,g⟩| / ε`.
    pub predicted_grad_u: f64,
    pub max_gap_grad_b: f64,
    pub max_gap_grad_r: f64,
    pub max_gap_grad_v: f64,
    pub multiplicity: usize,
    pub spectral_gap: f64,
    pub eigen_residual: f64,
    pub u_constancy: f64,
    pub q_constancy: f64,
    pub flux_residual: f64,
}

impl SweepRow {
    pub fn all_finite(&self) -> bool {
        [
            self.eps,
            self.q_gap_measured,
            self.q_gap_predicted,
            self.h_g_inner,
            self.c_eps,
            self.a_eps,
            self.alpha_eps,
            self.max_gap_grad_u,
            self.predicted_grad_u,
            self.max_gap_grad_b,
            self.max_gap_grad_r,
            self.max_gap_grad_v,
            self.spectral_gap,
            self.eigen_residual,
            self.u_constancy,
            self.q_constancy,
            self.flux_residual,
        ]
        .iter()
        .all(|v| v.is_finite())
    }

    /// Column names, in CSV order (snake_case field names).
    pub const COLUMNS: &'static [&'static str] = &[
        "eps",
        "n_used",
        "q_gap_measured",
        "q_gap_predicted",
        "h_g_inner",
        "c_eps",
        "a_eps",
        "alpha_eps",
        "max_gap_grad_u",
        "predicted_grad_u",
        "max_gap_grad_b",
        "max_gap_grad_r",
        "max_gap_grad_v",
        "multiplicity",
        "spectral_gap",
        "eigen_residual",
        "u_constancy",
        "q_constancy",
        "flux_residual",
    ];

    /// Numeric value of a named column (integers widened).
    pub fn column(&self, name: &str) -> Option<f64> {
        Some(match name {
            "eps" => self.eps,
            "n_used" => self.n_used as f64,
            "q_gap_measured" => self.q_gap_measured,
            "q_gap_predicted" => self.q_gap_predicted,
            "h_g_inner" => self.h_g_inner,
            "c_eps" => self.c_eps,
            "a_eps" => self.a_eps,
            "alpha_eps" => self.alpha_eps,
            "max_gap_grad_u" => self.max_gap_grad_u,
            "predicted_grad_u" => self.predicted_grad_u,
            "max_gap_grad_b" => self.max_gap_grad_b,
            "max_gap_grad_r" => self.max_gap_grad_r,
            "max_gap_grad_v" => self.max_gap_grad_v,
            "multiplicity" => self.multiplicity as f64,
            "spectral_gap" => self.spectral_gap,
            "eigen_residual" => self.eigen_residual,
            "u_constancy" => self.u_constancy,
            "q_constancy" => self.q_constancy,
            "flux_residual" => self.flux_residual,
            _ => return None,
        })
    }
}

/// One background task evaluated on a shared factorization.
#[derive(Debug, Clone)]
pub enum SweepTask {
    Conducting(HarmonicPolynomial),
    Insulating(HarmonicPolynomial),
    /// `h` with its eigenfunction pairing projected out against a second
    /// basis function, per gap width.
    ConductingOrthogonalized { h: HarmonicPolynomial, against: HarmonicPolynomial },
}

/// Sweep output: per-task rows plus per-gap failures.
#[derive(Debug)]
pub struct SweepOutcome {
    /// `rows[task][row]`, rows ordered by descending gap width.
    pub rows: Vec<Vec<SweepRow>>,
    /// Gap widths whose pipeline failed, with the error text.
    pub failures: Vec<(f64, String)>,
}

/// Resolution for the sweep multiplicity diagnostic: enough to pin the
/// eigenvalue cluster at 1/2 within its tolerance, cheaper than the solve.
fn multiplicity_grid_size(eps: f64) -> usize {
    let n = ((32.0 / eps.sqrt()).ceil() as usize).max(256);
    if n % 2 == 0 {
        n
    } else {
        n + 1
    }
}

/// Runs the full pipeline for several tasks over a gap list, sharing the
/// per-gap operator factorization between tasks.
pub fn run_sweep_tasks(
    shape1: &Curve,
    shape2: &Curve,
    eps_list: &[f64],
    tasks: &[SweepTask],
    n_override: Option<usize>,
    probe_count: usize,
    seed: u64,
) -> Result<SweepOutcome> {
    let mut rows: Vec<Vec<SweepRow>> = vec![Vec::new(); tasks.len()];
    let mut failures = Vec::new();

    for &eps in eps_list {
        match sweep_one_gap(shape1, shape2, eps, tasks, n_override, probe_count, seed) {
            Ok(gap_rows) => {
                for (t, row) in gap_rows.into_iter().enumerate() {
                    if !row.all_finite() {
                        failures.push((eps, format!("task {t}: non-finite row value")));
                        continue;
                    }
                    rows[t].push(row);
                }
            }
            Err(e) => failures.push((eps, e.to_string())),
        }
    }
    Ok(SweepOutcome { rows, failures })
}

/// Config-driven sweep (single task).
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutcome> {
    let task = match config.kind {
        ProblemKind::Conducting => SweepTask::Conducting(config.background.clone()),
        ProblemKind::Insulating => SweepTask::Insulating(config.background.clone()),
        ProblemKind::ConductingOrthogonalized => SweepTask::ConductingOrthogonalized {
            h: config.background.clone(),
            against: config.ortho_against.clone(),
        },
    };
    run_sweep_tasks(
        &config.shape1,
        &config.shape2,
        &config.eps_list,
        &[task],
        config.n_override,
        config.probe_count,
        config.seed,
    )
}

/// Everything per-gap that tasks share.
pub struct GapPipeline {
    pub pair: InclusionPair,
    pub setup: PairSetup,
    pub solver: MeanZeroSolver,
    pub q: SingularFunction,
    pub disk: DiskSingular,
    pub multiplicity: usize,
    pub spectral_gap: f64,
    pub n: usize,
}

pub fn build_pipeline(
    shape1: &Curve,
    shape2: &Curve,
    eps: f64,
    n_override: Option<usize>,
    seed: u64,
) -> Result<GapPipeline> {
    let pair = place_at_gap(shape1, shape2, eps)?;
    let n = n_override.unwrap_or_else(|| default_grid_size(eps));
    let setup = PairSetup::new(&pair, n)?;
    let solver = MeanZeroSolver::new(&setup)?;
    let g = build_g(&solver, &setup)?;
    let q = build_q(&setup, g)?;
    let disk = DiskSingular::from_pair(&pair)?;

    let n_mult = multiplicity_grid_size(eps).min(n);
    let mult = if n_mult == n {
        multiplicity_near_half(&setup, MULTIPLICITY_TOL, seed)?
    } else {
        let mult_setup = PairSetup::new(&pair, n_mult)?;
        multiplicity_near_half(&mult_setup, MULTIPLICITY_TOL, seed)?
    };

    Ok(GapPipeline {
        pair,
        setup,
        solver,
        q,
        disk,
        multiplicity: mult.count,
        spectral_gap: mult.gap,
        n,
    })
}

fn sweep_one_gap(
    shape1: &Curve,
    shape2: &Curve,
    eps: f64,
    tasks: &[SweepTask],
    n_override: Option<usize>,
    probe_count: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let p = build_pipeline(shape1, shape2, eps, n_override, seed)?;
    let mut out = Vec::with_capacity(tasks.len());
    for task in tasks {
        out.push(run_task(&p, task, probe_count)?);
    }
    Ok(out)
}

pub fn run_task(p: &GapPipeline, task: &SweepTask, probe_count: usize) -> Result<SweepRow> {
    match task {
        SweepTask::Conducting(h) => measure_row(p, h, probe_count, false),
        SweepTask::Insulating(h) => measure_row(p, h, probe_count, true),
        SweepTask::ConductingOrthogonalized { h, against } => {
            let num = inner_product_hg(&p.setup, h, &p.q.eigenfunction);
            let den = inner_product_hg(&p.setup, against, &p.q.eigenfunction);
            if den.abs() < 1e-14 {
                return Err(Error::domain(
                    "orthogonalization basis function has vanishing eigenfunction pairing",
                ));
            }
            let h_ortho = h.axpy(-num / den, against);
            measure_row(p, &h_ortho, probe_count, false)
        }
    }
}

/// Solves one background and fills a row. An insulating run solves the
/// conducting problem for the conjugate background; gradient magnitudes
/// carry over under the conjugate rotation, and only the remainder is
/// measured against the rotated (conjugate) disk singular function.
fn measure_row(
    p: &GapPipeline,
    h: &HarmonicPolynomial,
    probe_count: usize,
    insulating: bool,
) -> Result<SweepRow> {
    let h_eff = if insulating { h.conjugate() } else { h.clone() };
    let sol = solve_conducting(&p.setup, &p.solver, &h_eff)?;
    let dec = decompose(&p.setup, &p.pair, &sol, &p.q, &p.disk)?;

    let scan_u = max_gap_gradient(
        &p.setup,
        &p.pair,
        probe_count,
        |x| sol.gradient(x),
        Some(&sol.normal_derivative),
    )?;
    let scan_b = max_gap_gradient(&p.setup, &p.pair, probe_count, |x| dec.grad_b(x), None)?;
    let scan_v = max_gap_gradient(&p.setup, &p.pair, probe_count, |x| dec.grad_v(x), None)?;
    let scan_r = if insulating {
        // r = rot90(∇u^⊥) − coefficient·β_ε·∇q_B^⊥.
        max_gap_gradient(&p.setup, &p.pair, probe_count, |x| {
            let qperp = p.disk.conjugate_gradient(x)?;
            Ok(rot90(sol.gradient(x)?) - dec.coefficient * dec.alpha_eps * qperp)
        }, None)?
    } else {
        max_gap_gradient(&p.setup, &p.pair, probe_count, |x| dec.grad_r(x), None)?
    };

    Ok(SweepRow {
        eps: p.pair.eps,
        n_used: p.n,
        q_gap_measured: p.q.gap_value(),
        q_gap_predicted: predicted_gap_value(&p.pair),
        h_g_inner: dec.h_g,
        c_eps: dec.c_eps,
        a_eps: dec.a_eps,
        alpha_eps: dec.alpha_eps,
        max_gap_grad_u: scan_u.max,
        predicted_grad_u: dec.alpha_eps * dec.h_g.abs() / p.pair.eps,
        max_gap_grad_b: scan_b.max,
        max_gap_grad_r: scan_r.max,
        max_gap_grad_v: scan_v.max,
        multiplicity: p.multiplicity,
        spectral_gap: p.spectral_gap,
        eigen_residual: p.q.eigenfunction.residual,
        u_constancy: sol.constancy_std1.max(sol.constancy_std2),
        q_constancy: p.q.constancy_std1.max(p.q.constancy_std2),
        flux_residual: sol.flux1.abs().max(sol.flux2.abs()),
    })
}

/// Least-squares line fit on `(ln x, ln |y|)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_rate(xs: &[f64], ys: &[f64]) -> Result<RateFit> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::domain("rate fit needs at least 3 matched samples"));
    }
    if xs.iter().any(|&x| !(x > 0.0)) || ys.iter().any(|&y| y == 0.0 || !y.is_finite()) {
        return Err(Error::domain("rate fit needs positive x and nonzero finite y"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("rate fit needs at least two distinct x values"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(RateFit { slope, intercept, r_squared })
}

/// Fits a named column against the gap width, skipping the largest gap
/// (pre-asymptotic) when `skip_first` is set.
pub fn fit_column(rows: &[SweepRow], column: &str, skip_first: bool) -> Result<RateFit> {
    let start = if skip_first && rows.len() > 3 { 1 } else { 0 };
    let xs: Vec<f64> = rows[start..].iter().map(|r| r.eps).collect();
    let ys: Vec<f64> = rows[start..]
        .iter()
        .map(|r| r.column(column).ok_or_else(|| Error::domain(format!("unknown column {column}"))))
        .collect::<Result<_>>()?;
    fit_rate(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec2;
    use rand::rngs::StdRng;
    use rand::{RngExt, SeedableRng};

    #[test]
    fn fit_rate_exact_power_law() {
        let xs: Vec<f64> = (1..=6).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.sqrt()).collect();
        let fit = fit_rate(&xs, &ys).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-12);
        assert!((fit.intercept - 3.0f64.ln()).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_rate_noisy_inverse_law() {
        let mut rng = StdRng::seed_from_u64(11);
        let xs: Vec<f64> = (0..20).map(|i| 10.0f64.powf(-(i as f64) / 5.0)).collect();
        let ys: Vec<f64> =
            xs.iter().map(|x| (1.0 / x) * (1.0 + 0.01 * (rng.random::<f64>() - 0.5))).collect();
        let fit = fit_rate(&xs, &ys).unwrap();
        assert!((fit.slope + 1.0).abs() < 0.02, "slope {}", fit.slope);
    }

    #[test]
    fn fit_rate_rejects_bad_input() {
        assert!(fit_rate(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(fit_rate(&[1.0, 2.0, -3.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(fit_rate(&[1.0, 2.0, 3.0], &[1.0, 0.0, 3.0]).is_err());
    }

    #[test]
    fn empty_eps_list_gives_empty_outcome() {
        let c = crate::geometry::Curve::circle(Vec2::zeros(), 1.0).unwrap();
        let out = run_sweep_tasks(
            &c,
            &c,
            &[],
            &[SweepTask::Conducting(HarmonicPolynomial::coordinate_x())],
            None,
            11,
            0,
        )
        .unwrap();
        assert_eq!(out.rows.len(), 1);
        assert!(out.rows[0].is_empty());
        assert!(out.failures.is_empty());
    }

    #[test]
    fn small_disk_sweep_rows_consistent() {
        let c = crate::geometry::Curve::circle(Vec2::zeros(), 1.0).unwrap();
        let out = run_sweep_tasks(
            &c,
            &c,
            &[0.1, 0.05],
            &[SweepTask::Conducting(HarmonicPolynomial::coordinate_x())],
            Some(256),
            21,
            0,
        )
        .unwrap();
        assert!(out.failures.is_empty(), "{:?}", out.failures);
        let rows = &out.rows[0];
        assert_eq!(rows.len(), 2);
        for row in rows {
            assert!(row.all_finite());
            assert_eq!(row.multiplicity, 2);
            // Pipeline identity: u-gap = c_ε · q-gap, i.e. ⟨h,g⟩ = c_ε q-gap.
            let lhs = row.h_g_inner;
            let rhs = row.c_eps * row.q_gap_measured;
            assert!((lhs - rhs).abs() < 1e-8 * lhs.abs().max(1e-12), "{lhs} vs {rhs}");
            assert!(row.q_gap_measured < 0.0 && row.q_gap_predicted < 0.0);
        }
    }
}
