//! The acceptance suite behind `npgap verify` and the `acceptance`
//! integration test: one pass/fail entry per criterion, with all
//! tolerances pinned in code.
//!
//! The expensive gap sweeps are computed once per process and shared
//! between criteria.

use crate::discretization::default_grid_size;
use crate::error::Result;
use crate::geometry::{place_at_gap, Curve, Vec2};
use crate::harness::oracle::image_series_oracle;
use crate::harness::sweep::{
    build_pipeline, fit_rate, run_sweep_tasks, SweepOutcome, SweepRow, SweepTask,
};
use crate::potentials::{np_apply, single_layer_boundary_apply, NearEvaluator, PairSetup};
use crate::singular::{build_q, DiskSingular};
use crate::solver::{solve_conducting, solve_insulating, HarmonicPolynomial};
use crate::spectral::{build_g, spectrum_for_pair, MeanZeroSolver};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use std::sync::LazyLock;

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:2} {:<28} {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.details
        )
    }
}

/// The standard sweep: seven geometric gap widths from 1e-1 down to 1e-4.
pub fn standard_eps_list() -> Vec<f64> {
    (0..7).map(|i| 1e-1 * 1e-3f64.powf(i as f64 / 6.0)).collect()
}

const PROBES: usize = 33;
const SEED: u64 = 0;

fn unit_circle() -> Curve {
    Curve::circle(Vec2::zeros(), 1.0).unwrap()
}

fn standard_ellipse() -> Curve {
    Curve::ellipse(Vec2::zeros(), 2.0, 1.0, 0.0).unwrap()
}

type SweepCache = LazyLock<std::result::Result<SweepOutcome, String>>;

/// Unit disks; task 0 is conducting h = x, task 1 is insulating h = y.
static DISK_SWEEP: SweepCache = LazyLock::new(|| {
    let c = unit_circle();
    run_sweep_tasks(
        &c,
        &c,
        &standard_eps_list(),
        &[
            SweepTask::Conducting(HarmonicPolynomial::coordinate_x()),
            SweepTask::Insulating(HarmonicPolynomial::coordinate_y()),
        ],
        None,
        PROBES,
        SEED,
    )
    .map_err(|e| e.to_string())
});

/// Ellipse pair (2, 1), conducting h = x.
static ELLIPSE_SWEEP: SweepCache = LazyLock::new(|| {
    let e = standard_ellipse();
    run_sweep_tasks(
        &e,
        &e,
        &standard_eps_list(),
        &[SweepTask::Conducting(HarmonicPolynomial::coordinate_x())],
        None,
        PROBES,
        SEED,
    )
    .map_err(|e| e.to_string())
});

/// Asymmetric disk pair with the quadratic background orthogonalized
/// against x; the symmetric pair would pair the quadratic to zero
/// identically and leave nothing to project.
static ORTHO_SWEEP: SweepCache = LazyLock::new(|| {
    let c1 = unit_circle();
    let c2 = Curve::circle(Vec2::zeros(), 0.6).unwrap();
    // The background must keep an order-one gap field after the x-component
    // is projected out; a pure quadratic has a critical point at the gap
    // and would leave nothing to measure.
    let h = HarmonicPolynomial { constant: 0.0, re_coeffs: vec![1.0, 0.3], im_coeffs: vec![1.0] };
    run_sweep_tasks(
        &c1,
        &c2,
        &standard_eps_list(),
        &[SweepTask::ConductingOrthogonalized {
            h,
            against: HarmonicPolynomial::coordinate_x(),
        }],
        None,
        PROBES,
        SEED,
    )
    .map_err(|e| e.to_string())
});

/// Rows of the cached unit-disk sweep (task 0 conducting h = x, task 1
/// insulating h = y); computed on first use.
pub fn disk_sweep_rows(task: usize) -> std::result::Result<&'static [SweepRow], String> {
    sweep_rows(&DISK_SWEEP, task)
}

/// Rows of the cached ellipse-pair sweep (conducting h = x).
pub fn ellipse_sweep_rows() -> std::result::Result<&'static [SweepRow], String> {
    sweep_rows(&ELLIPSE_SWEEP, 0)
}

fn sweep_rows(cache: &'static SweepCache, task: usize) -> std::result::Result<&'static [SweepRow], String> {
    match &**cache {
        Ok(outcome) => {
            if !outcome.failures.is_empty() {
                return Err(format!("sweep rows failed: {:?}", outcome.failures));
            }
            Ok(&outcome.rows[task])
        }
        Err(e) => Err(e.clone()),
    }
}

fn result(id: usize, name: &'static str, r: std::result::Result<(bool, String), String>) -> CriterionResult {
    match r {
        Ok((passed, details)) => CriterionResult { id, name, passed, details },
        Err(e) => CriterionResult { id, name, passed: false, details: format!("error: {e}") },
    }
}

fn band(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Criterion 1: one-sided normal derivatives of the total single layer
/// match (±1/2 + K*)[φ] at δ = 1e-5 within 1e-6, N = 256, gap 0.1.
pub fn criterion_1() -> CriterionResult {
    result(1, "jump relation", (|| {
        let e = Curve::ellipse(Vec2::zeros(), 1.5, 1.0, 0.0).unwrap();
        let pair = place_at_gap(&e, &e, 0.1).map_err(|e| e.to_string())?;
        let n = 256;
        let setup = PairSetup::new(&pair, n).map_err(|e| e.to_string())?;
        let grids = &setup.grids;

        // Random smooth density: decaying trigonometric polynomial.
        let mut rng = StdRng::seed_from_u64(42);
        let mut coeffs = Vec::new();
        for _ in 0..2 {
            let c: Vec<(f64, f64)> = (0..=6)
                .map(|m| {
                    let s = 1.0 / (1.0 + (m * m) as f64);
                    (s * (rng.random::<f64>() - 0.5), s * (rng.random::<f64>() - 0.5))
                })
                .collect();
            coeffs.push(c);
        }
        let eval_trig = |c: &[(f64, f64)], t: f64| -> f64 {
            c.iter()
                .enumerate()
                .map(|(m, (a, b))| a * (m as f64 * t).cos() + b * (m as f64 * t).sin())
                .sum()
        };
        let phi = crate::potentials::DensityPair {
            first: grids.first.nodes_t.iter().map(|&t| eval_trig(&coeffs[0], t)).collect(),
            second: grids.second.nodes_t.iter().map(|&t| eval_trig(&coeffs[1], t)).collect(),
        };

        let k_phi = np_apply(&setup, &phi);
        let s_on = single_layer_boundary_apply(&setup, &phi).map_err(|e| e.to_string())?;
        let ev1 = NearEvaluator::new(&grids.first, &phi.first).map_err(|e| e.to_string())?;
        let ev2 = NearEvaluator::new(&grids.second, &phi.second).map_err(|e| e.to_string())?;

        let delta = 1e-5;
        let mut max_err = 0.0f64;
        for side in 0..2 {
            let grid = if side == 0 { &grids.first } else { &grids.second };
            for j in (0..n).step_by(n / 8) {
                let x = grid.positions[j];
                let nu = grid.normals[j];
                let total = |p: Vec2| -> std::result::Result<f64, String> {
                    Ok(ev1.value_any_side(p).map_err(|e| e.to_string())?
                        + ev2.value_any_side(p).map_err(|e| e.to_string())?)
                };
                let f0 = if side == 0 { s_on.first[j] } else { s_on.second[j] };
                let (phi_j, kphi_j) = if side == 0 {
                    (phi.first[j], k_phi.first[j])
                } else {
                    (phi.second[j], k_phi.second[j])
                };
                // Second-order one-sided differences from the boundary value.
                let outer =
                    (-3.0 * f0 + 4.0 * total(x + delta * nu)? - total(x + 2.0 * delta * nu)?)
                        / (2.0 * delta);
                let inner =
                    (-3.0 * f0 + 4.0 * total(x - delta * nu)? - total(x - 2.0 * delta * nu)?)
                        / (-2.0 * delta);
                max_err = max_err.max((outer - (0.5 * phi_j + kphi_j)).abs());
                max_err = max_err.max((inner - (-0.5 * phi_j + kphi_j)).abs());
            }
        }
        Ok((max_err <= 1e-6, format!("max one-sided derivative error {max_err:.3e} (tol 1e-6)")))
    })())
}

/// Criterion 2: eigenvalue 1/2 has multiplicity exactly 2 and the spectrum
/// stays in (−1/2, 1/2], for disk and ellipse pairs at three gap widths.
pub fn criterion_2() -> CriterionResult {
    result(2, "multiplicity two", (|| {
        let mut details = String::new();
        let mut ok = true;
        for (label, curve) in [("disks", unit_circle()), ("ellipses", standard_ellipse())] {
            for eps in [1e-1, 1e-2, 1e-3] {
                let pair = place_at_gap(&curve, &curve, eps).map_err(|e| e.to_string())?;
                let n = (((20.0 / eps.sqrt()).ceil() as usize).max(256) + 1) & !1;
                let report = spectrum_for_pair(&pair, n).map_err(|e| e.to_string())?;
                let good = report.multiplicity_half == 2 && report.contained;
                ok &= good;
                details.push_str(&format!(
                    "{label} eps={eps:.0e}: mult {} contained {} | ",
                    report.multiplicity_half, report.contained
                ));
            }
        }
        Ok((ok, details))
    })())
}

/// Criterion 3: eigenfunction fluxes are (1, −1) within 1e-8 and the
/// eigen-residual is at most 1e-6.
pub fn criterion_3() -> CriterionResult {
    result(3, "eigenfunction normalization", (|| {
        let mut details = String::new();
        let mut ok = true;
        for (label, curve) in [("disks", unit_circle()), ("ellipses", standard_ellipse())] {
            let pair = place_at_gap(&curve, &curve, 0.1).map_err(|e| e.to_string())?;
            let setup = PairSetup::new(&pair, 256).map_err(|e| e.to_string())?;
            let solver = MeanZeroSolver::new(&setup).map_err(|e| e.to_string())?;
            let g = build_g(&solver, &setup).map_err(|e| e.to_string())?;
            let flux_err = (g.fluxes.0 - 1.0).abs().max((g.fluxes.1 + 1.0).abs());
            ok &= flux_err <= 1e-8 && g.residual <= 1e-6;
            details.push_str(&format!(
                "{label}: flux err {flux_err:.2e}, residual {:.2e} | ",
                g.residual
            ));
        }
        Ok((ok, details))
    })())
}

/// Exterior probe set for the disk-uniqueness and oracle criteria: two
/// jittered rings enclosing the whole configuration plus points on the
/// vertical gap line.
fn probe_points(
    pair: &crate::geometry::InclusionPair,
    count_ring: usize,
    count_gap: usize,
    seed: u64,
) -> Vec<Vec2> {
    let eps = pair.eps;
    let extent = (0..256)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / 256.0;
            pair.curve1.position(t).norm().max(pair.curve2.position(t).norm())
        })
        .fold(0.0f64, f64::max);
    let mut rng = StdRng::seed_from_u64(seed);
    let mut pts = Vec::new();
    for radius in [1.25 * extent, 1.8 * extent] {
        for k in 0..count_ring {
            let jitter = 0.2 * (rng.random::<f64>() - 0.5);
            let t = std::f64::consts::TAU * (k as f64 + 0.5 + jitter) / count_ring as f64;
            pts.push(Vec2::new(radius * t.cos(), radius * t.sin()));
        }
    }
    for k in 0..count_gap {
        // Vertical gap line, log-spaced heights from ~eps up to 1.2.
        let y = eps * (1.2 / eps).powf((k as f64 + 0.5) / count_gap as f64);
        pts.push(Vec2::new(0.0, if k % 2 == 0 { y } else { -y }));
    }
    pts
}

/// Criterion 4: on a disk pair the numeric singular function matches the
/// closed form at 200 exterior probes within 1e-6 (uniqueness oracle).
pub fn criterion_4() -> CriterionResult {
    result(4, "disk uniqueness oracle", (|| {
        let eps = 0.05;
        let c = unit_circle();
        let pair = place_at_gap(&c, &c, eps).map_err(|e| e.to_string())?;
        let setup = PairSetup::new(&pair, 512).map_err(|e| e.to_string())?;
        let solver = MeanZeroSolver::new(&setup).map_err(|e| e.to_string())?;
        let g = build_g(&solver, &setup).map_err(|e| e.to_string())?;
        let q = build_q(&setup, g).map_err(|e| e.to_string())?;
        let ds = DiskSingular::from_pair(&pair).map_err(|e| e.to_string())?;
        let mut max_diff = 0.0f64;
        for x in probe_points(&pair, 80, 40, 4) {
            let diff = (q.value(x).map_err(|e| e.to_string())? - ds.value(x)).abs();
            max_diff = max_diff.max(diff);
        }
        Ok((max_diff <= 1e-6, format!("max |q − q_B| {max_diff:.3e} over 200 probes (tol 1e-6)")))
    })())
}

/// Criterion 5: exact reflection fixed points approach the √ε predictor
/// with an O(ε) remainder (log-log slope ≥ 0.95).
pub fn criterion_5() -> CriterionResult {
    result(5, "fixed-point asymptotics", (|| {
        let c = unit_circle();
        let eps_list: Vec<f64> = (0..12).map(|i| 1e-1 * 1e-3f64.powf(i as f64 / 11.0)).collect();
        let mut resid = Vec::new();
        for &eps in &eps_list {
            let pair = place_at_gap(&c, &c, eps).map_err(|e| e.to_string())?;
            let ds = DiskSingular::from_pair(&pair).map_err(|e| e.to_string())?;
            let (pred1, _) = DiskSingular::predicted_fixed_points(eps, 1.0, 1.0);
            resid.push((ds.p1.x - pred1).abs());
        }
        let fit = fit_rate(&eps_list, &resid).map_err(|e| e.to_string())?;
        Ok((
            fit.slope >= 0.95,
            format!("residual slope {:.4} (need >= 0.95), r² {:.6}", fit.slope, fit.r_squared),
        ))
    })())
}

/// Criterion 6: measured boundary gap of the singular function tracks the
/// √ε prediction on the ellipse sweep.
pub fn criterion_6() -> CriterionResult {
    result(6, "gap potential asymptotics", (|| {
        let rows = sweep_rows(&ELLIPSE_SWEEP, 0)?;
        let last = rows.last().ok_or("empty sweep")?;
        let ratio = last.q_gap_measured / last.q_gap_predicted;
        let xs: Vec<f64> = rows[1..].iter().map(|r| r.eps).collect();
        let ys: Vec<f64> =
            rows[1..].iter().map(|r| (r.q_gap_measured - r.q_gap_predicted).abs()).collect();
        let fit = fit_rate(&xs, &ys).map_err(|e| e.to_string())?;
        let ok = (0.9..=1.1).contains(&ratio) && fit.slope >= 0.9;
        Ok((ok, format!(
            "ratio at eps=1e-4: {ratio:.4} (need [0.9,1.1]); residual slope {:.3} (need >= 0.9)",
            fit.slope
        )))
    })())
}

/// Criterion 7: |⟨h,g⟩| ~ √ε — bounded ratio band and slope ≥ 0.45.
pub fn criterion_7() -> CriterionResult {
    result(7, "pairing sqrt-eps bound", (|| {
        let rows = sweep_rows(&ELLIPSE_SWEEP, 0)?;
        let ratios: Vec<f64> = rows.iter().map(|r| r.h_g_inner.abs() / r.eps.sqrt()).collect();
        let (lo, hi) = band(&ratios);
        let xs: Vec<f64> = rows[1..].iter().map(|r| r.eps).collect();
        let ys: Vec<f64> = rows[1..].iter().map(|r| r.h_g_inner.abs()).collect();
        let fit = fit_rate(&xs, &ys).map_err(|e| e.to_string())?;
        let ok = hi / lo <= 2.0 && fit.slope >= 0.45;
        Ok((ok, format!(
            "|⟨h,g⟩|/√ε band ratio {:.3} (need <= 2); slope {:.3} (need >= 0.45)",
            hi / lo,
            fit.slope
        )))
    })())
}

/// Criterion 8: c_ε bounded independently of ε (factor ≤ 3 over the sweep).
pub fn criterion_8() -> CriterionResult {
    result(8, "c_eps boundedness", (|| {
        let rows = sweep_rows(&ELLIPSE_SWEEP, 0)?;
        let vals: Vec<f64> = rows.iter().map(|r| r.c_eps.abs()).collect();
        let (lo, hi) = band(&vals);
        Ok((hi / lo <= 3.0, format!("|c_eps| in [{lo:.4}, {hi:.4}], ratio {:.3} (need <= 3)", hi / lo)))
    })())
}

/// Criterion 9: the peak gap gradient matches α_ε|⟨h,g⟩|/ε within 10% at
/// ε = 1e-3 and blows up at the −1/2 rate on the disk sweep.
pub fn criterion_9() -> CriterionResult {
    result(9, "gradient blow-up law", (|| {
        let rows = sweep_rows(&DISK_SWEEP, 0)?;
        let row = rows
            .iter()
            .find(|r| (r.eps - 1e-3).abs() < 1e-9)
            .ok_or("no eps=1e-3 row")?;
        let ratio = row.max_gap_grad_u / row.predicted_grad_u;
        let xs: Vec<f64> = rows[1..].iter().map(|r| r.eps).collect();
        let ys: Vec<f64> = rows[1..].iter().map(|r| r.max_gap_grad_u).collect();
        let fit = fit_rate(&xs, &ys).map_err(|e| e.to_string())?;
        let ok = (0.9..=1.1).contains(&ratio) && (fit.slope + 0.5).abs() <= 0.05;
        Ok((ok, format!(
            "peak/prediction {ratio:.4} at eps=1e-3 (need [0.9,1.1]); blow-up slope {:.4} (need −0.5±0.05)",
            fit.slope
        )))
    })())
}

/// Criterion 10: remainder gradients stay bounded — no field may grow past
/// 3× its value at the start of the window ε = 1e-2 → 1e-4 — while the
/// full gradient grows at least 8×. (The remainders are screened out of
/// the gap itself and may decay there; boundedness is the claim, so the
/// check is one-sided. On disk pairs the singular function equals its disk
/// closed form identically, so the v-comparison runs on the ellipse pair.)
pub fn criterion_10() -> CriterionResult {
    result(10, "remainder boundedness", (|| {
        let mut details = String::new();
        let mut ok = true;
        let mut check_window = |label: &str,
                                rows: &[SweepRow],
                                pick: fn(&SweepRow) -> f64|
         -> std::result::Result<(), String> {
            let window: Vec<&SweepRow> =
                rows.iter().filter(|r| r.eps <= 1e-2 * (1.0 + 1e-9)).collect();
            if window.len() < 3 {
                return Err("window too small".into());
            }
            let start = pick(window[0]);
            let worst = window.iter().map(|r| pick(r)).fold(0.0f64, f64::max);
            let growth = worst / start;
            ok &= growth <= 3.0;
            details.push_str(&format!("{label} growth {growth:.3} | "));
            Ok(())
        };
        let disk_rows = sweep_rows(&DISK_SWEEP, 0)?;
        let ellipse_rows = sweep_rows(&ELLIPSE_SWEEP, 0)?;
        check_window("disk grad_b", disk_rows, |r| r.max_gap_grad_b)?;
        check_window("disk grad_r", disk_rows, |r| r.max_gap_grad_r)?;
        check_window("ellipse grad_b", ellipse_rows, |r| r.max_gap_grad_b)?;
        check_window("ellipse grad_r", ellipse_rows, |r| r.max_gap_grad_r)?;
        check_window("ellipse grad_v", ellipse_rows, |r| r.max_gap_grad_v)?;

        let window: Vec<&SweepRow> =
            disk_rows.iter().filter(|r| r.eps <= 1e-2 * (1.0 + 1e-9)).collect();
        let growth = window.last().unwrap().max_gap_grad_u / window[0].max_gap_grad_u;
        ok &= growth >= 8.0;
        details.push_str(&format!("grad_u growth {growth:.2} (need >= 8)"));
        Ok((ok, details))
    })())
}

/// Criterion 11: insulating case — Neumann residual, −1/2 blow-up slope,
/// and branch continuity of the conjugate disk singular function.
pub fn criterion_11() -> CriterionResult {
    result(11, "insulating case", (|| {
        // Neumann residual at a moderate gap.
        let c = unit_circle();
        let pair = place_at_gap(&c, &c, 0.1).map_err(|e| e.to_string())?;
        let setup = PairSetup::new(&pair, 256).map_err(|e| e.to_string())?;
        let solver = MeanZeroSolver::new(&setup).map_err(|e| e.to_string())?;
        let ins = solve_insulating(&setup, &solver, &HarmonicPolynomial::coordinate_y())
            .map_err(|e| e.to_string())?;
        let neumann = ins.neumann_residual(&setup, 1e-6).map_err(|e| e.to_string())?;

        let rows = sweep_rows(&DISK_SWEEP, 1)?;
        let xs: Vec<f64> = rows[1..].iter().map(|r| r.eps).collect();
        let ys: Vec<f64> = rows[1..].iter().map(|r| r.max_gap_grad_u).collect();
        let fit = fit_rate(&xs, &ys).map_err(|e| e.to_string())?;

        // Branch continuity of the conjugate closed form on the negative axis.
        let pair_s = place_at_gap(&c, &c, 1e-3).map_err(|e| e.to_string())?;
        let ds = DiskSingular::from_pair(&pair_s).map_err(|e| e.to_string())?;
        let mut max_jump = 0.0f64;
        for x in [-2.2, -3.7, -9.0] {
            let a = ds.conjugate_value(Vec2::new(x, 1e-12)).map_err(|e| e.to_string())?;
            let b = ds.conjugate_value(Vec2::new(x, -1e-12)).map_err(|e| e.to_string())?;
            max_jump = max_jump.max((a - b).abs());
        }

        let ok = neumann <= 1e-5 && (fit.slope + 0.5).abs() <= 0.05 && max_jump <= 1e-10;
        Ok((ok, format!(
            "Neumann residual {neumann:.2e} (tol 1e-5); slope {:.4} (need −0.5±0.05); branch jump {max_jump:.2e} (tol 1e-10)",
            fit.slope
        )))
    })())
}

/// Criterion 12: the boundary-integral solve agrees with the image-series
/// oracle at 50 probes within 1e-6 relative, including the gap midpoint.
pub fn criterion_12() -> CriterionResult {
    result(12, "oracle equivalence", (|| {
        let eps = 0.05;
        let c = unit_circle();
        let pair = place_at_gap(&c, &c, eps).map_err(|e| e.to_string())?;
        let setup = PairSetup::new(&pair, 512).map_err(|e| e.to_string())?;
        let solver = MeanZeroSolver::new(&setup).map_err(|e| e.to_string())?;
        let h = HarmonicPolynomial::coordinate_x();
        let sol = solve_conducting(&setup, &solver, &h).map_err(|e| e.to_string())?;
        let oracle = image_series_oracle(
            pair.curve1.center(),
            1.0,
            pair.curve2.center(),
            1.0,
            &h,
            1e-12,
        )
        .map_err(|e| e.to_string())?;

        let mut probes = probe_points(&pair, 20, 9, 12);
        probes.push(Vec2::zeros()); // gap midpoint
        let mut max_u = 0.0f64;
        let mut max_g = 0.0f64;
        for &x in &probes {
            let ub = sol.value(x).map_err(|e| e.to_string())?;
            let uo = oracle.value(x);
            max_u = max_u.max((ub - uo).abs() / uo.abs().max(1.0));
            let gb = sol.gradient(x).map_err(|e| e.to_string())?;
            let go = oracle.gradient(x);
            max_g = max_g.max((gb - go).norm() / go.norm().max(1.0));
        }
        let ok = max_u <= 1e-6 && max_g <= 1e-6;
        Ok((ok, format!(
            "max rel err over {} probes: u {max_u:.3e}, grad {max_g:.3e} (tol 1e-6; {} series terms)",
            probes.len(),
            oracle.terms
        )))
    })())
}

/// Criterion 13: with the background orthogonalized against the
/// eigenfunction, the peak gap gradient stays bounded across the sweep.
pub fn criterion_13() -> CriterionResult {
    result(13, "orthogonal background", (|| {
        let rows = sweep_rows(&ORTHO_SWEEP, 0)?;
        let vals: Vec<f64> = rows.iter().map(|r| r.max_gap_grad_u).collect();
        let (lo, hi) = band(&vals);
        Ok((hi / lo <= 3.0, format!(
            "max gap |∇u| in [{lo:.4}, {hi:.4}], factor {:.3} (need <= 3)",
            hi / lo
        )))
    })())
}

/// Runs every criterion in order.
pub fn run_all() -> Vec<CriterionResult> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
        criterion_11(),
        criterion_12(),
        criterion_13(),
    ]
}

/// The cheap oracle gate run before emitting any sweep report: disk
/// cross-validation at ε = 0.05 on a coarse grid.
pub fn oracle_gate() -> Result<()> {
    let eps = 0.05;
    let c = unit_circle();
    let pair = place_at_gap(&c, &c, eps)?;
    let p = build_pipeline(&c, &c, eps, Some(default_grid_size(eps)), SEED)?;
    let _ = &p.q;
    let solver = &p.solver;
    let h = HarmonicPolynomial::coordinate_x();
    let sol = solve_conducting(&p.setup, solver, &h)?;
    let oracle = image_series_oracle(pair.curve1.center(), 1.0, pair.curve2.center(), 1.0, &h, 1e-12)?;
    for &x in &[Vec2::zeros(), Vec2::new(0.0, 0.5), Vec2::new(2.0, 0.4), Vec2::new(-1.2, -1.6)] {
        let ub = sol.value(x)?;
        let uo = oracle.value(x);
        if (ub - uo).abs() > 1e-6 * uo.abs().max(1.0) {
            return Err(crate::error::Error::accuracy(format!(
                "oracle gate failed at {x:?}: bie {ub} vs oracle {uo}"
            )));
        }
    }
    Ok(())
}
