//! Command-line front end: spectra, singular-function reports, single
//! solves, gap sweeps, oracle cross-validation, and the acceptance suite.

use clap::{Args, Parser, Subcommand};
use npgap::discretization::default_grid_size;
use npgap::error::{Error, Result};
use npgap::geometry::place_at_gap;
use npgap::harness::acceptance;
use npgap::harness::emit::{emit, rows_to_csv, EmitFormat};
use npgap::harness::oracle::image_series_oracle;
use npgap::harness::sweep::{build_pipeline, fit_column, run_sweep, run_task, SweepTask};
use npgap::harness::{ExperimentConfig, ProblemKind};
use npgap::singular::envelope_report;
use npgap::solver::solve_conducting;
use npgap::spectral::spectrum_for_pair;
use serde_json::json;
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "npgap", version, about = "Gap-field analysis for close-to-touching conductors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (TOML); required by every subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Output format for tabular artifacts.
    #[arg(long, global = true, default_value = "both")]
    format: String,
    /// Log-log plot column pair, e.g. `eps:max_gap_grad_u` (repeatable).
    #[arg(long, global = true)]
    plot: Vec<String>,
    /// Grid-size override (even), replacing the resolution policy.
    #[arg(long, global = true)]
    n_override: Option<usize>,
    /// Random seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Spectrum report of the block operator for each configured gap.
    Spectrum,
    /// Build the singular function and report gap values and envelopes.
    Qfun,
    /// Full decomposition report at the largest configured gap.
    Solve,
    /// Gap sweep with rate fits.
    Sweep,
    /// Disk cross-validation against the image-series oracle.
    Oracle,
    /// Run the acceptance suite.
    Verify,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config PATH is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(n) = common.n_override {
        if n < 16 || n % 2 != 0 {
            return Err(Error::Config(format!("--n-override must be even and >= 16, got {n}")));
        }
        cfg.n_override = Some(n);
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn parse_plots(common: &Common) -> Result<Vec<(String, String)>> {
    common
        .plot
        .iter()
        .map(|p| {
            p.split_once(':')
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .ok_or_else(|| Error::Config(format!("--plot needs COLX:COLY, got `{p}`")))
        })
        .collect()
}

fn write_json(common: &Common, name: &str, value: &serde_json::Value) -> Result<PathBuf> {
    std::fs::create_dir_all(&common.out)?;
    let path = common.out.join(name);
    std::fs::write(&path, format!("{}\n", serde_json::to_string_pretty(value).unwrap()))?;
    Ok(path)
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Spectrum => {
            let cfg = load_config(&cli.common)?;
            let mut reports = Vec::new();
            for &eps in &cfg.eps_list {
                let pair = place_at_gap(&cfg.shape1, &cfg.shape2, eps)?;
                let n = cfg
                    .n_override
                    .unwrap_or_else(|| (((20.0 / eps.sqrt()).ceil() as usize).max(256) + 1) & !1);
                let report = spectrum_for_pair(&pair, n)?;
                println!(
                    "eps={eps:.3e} n={n}: multiplicity {} (tol {:.0e}), contained {}, gap {:.4e}, symm res {:.3e}",
                    report.multiplicity_half,
                    report.tolerance,
                    report.contained,
                    report.spectral_gap,
                    report.symmetrization_residual
                );
                reports.push(report);
            }
            let path = write_json(
                &cli.common,
                &format!("{}_spectrum.json", cfg.stem),
                &json!({ "config": cfg.raw_text, "reports": reports }),
            )?;
            println!("wrote {}", path.display());
            Ok(0)
        }
        Command::Qfun => {
            let cfg = load_config(&cli.common)?;
            let mut entries = Vec::new();
            for &eps in &cfg.eps_list {
                let p = build_pipeline(&cfg.shape1, &cfg.shape2, eps, cfg.n_override, cfg.seed)?;
                let envelopes = envelope_report(&p.setup, &p.q, &p.pair, &p.disk);
                let predicted = npgap::singular::predicted_gap_value(&p.pair);
                println!(
                    "eps={eps:.3e} n={}: q-gap {:.8e} predicted {:.8e} ratio {:.5}, constancy ({:.2e},{:.2e}), fluxes ({:.8},{:.8})",
                    p.n,
                    p.q.gap_value(),
                    predicted,
                    p.q.gap_value() / predicted,
                    p.q.constancy_std1,
                    p.q.constancy_std2,
                    p.q.outward_flux1,
                    p.q.outward_flux2
                );
                entries.push(json!({
                    "eps": eps,
                    "n": p.n,
                    "q_gap_measured": p.q.gap_value(),
                    "q_gap_predicted": predicted,
                    "constancy_std": [p.q.constancy_std1, p.q.constancy_std2],
                    "fluxes": [p.q.outward_flux1, p.q.outward_flux2],
                    "fixed_points": [p.disk.p1.x, p.disk.p2.x],
                    "disk_gap_value": p.disk.gap_value(),
                    "envelopes": envelopes,
                }));
            }
            let path = write_json(
                &cli.common,
                &format!("{}_qfun.json", cfg.stem),
                &json!({ "config": cfg.raw_text, "gaps": entries }),
            )?;
            println!("wrote {}", path.display());
            Ok(0)
        }
        Command::Solve => {
            let cfg = load_config(&cli.common)?;
            let &eps = cfg
                .eps_list
                .first()
                .ok_or_else(|| Error::Config("solve needs at least one gap value".into()))?;
            let p = build_pipeline(&cfg.shape1, &cfg.shape2, eps, cfg.n_override, cfg.seed)?;
            let task = match cfg.kind {
                ProblemKind::Conducting => SweepTask::Conducting(cfg.background.clone()),
                ProblemKind::Insulating => SweepTask::Insulating(cfg.background.clone()),
                ProblemKind::ConductingOrthogonalized => SweepTask::ConductingOrthogonalized {
                    h: cfg.background.clone(),
                    against: cfg.ortho_against.clone(),
                },
            };
            let row = run_task(&p, &task, cfg.probe_count)?;
            println!("{}", rows_to_csv(std::slice::from_ref(&row)));
            let path = write_json(
                &cli.common,
                &format!("{}_solve.json", cfg.stem),
                &json!({ "config": cfg.raw_text, "row": row }),
            )?;
            println!("wrote {}", path.display());
            Ok(0)
        }
        Command::Sweep => {
            let cfg = load_config(&cli.common)?;
            let plots = parse_plots(&cli.common)?;
            let format: EmitFormat = cli.common.format.parse()?;
            // No sweep report ships unless the disk oracle cross-check passes.
            acceptance::oracle_gate()?;
            let outcome = run_sweep(&cfg)?;
            let rows = &outcome.rows[0];
            let mut fits = BTreeMap::new();
            if rows.len() >= 4 {
                for col in ["max_gap_grad_u", "h_g_inner", "q_gap_measured"] {
                    if let Ok(fit) = fit_column(rows, col, true) {
                        fits.insert(col.to_string(), fit);
                    }
                }
            }
            for (eps, msg) in &outcome.failures {
                eprintln!("gap {eps:.3e} failed: {msg}");
            }
            for row in rows {
                println!(
                    "eps={:.3e} n={} mult={} c_eps={:+.5e} alpha={:+.5e} max|∇u|={:.5e}",
                    row.eps, row.n_used, row.multiplicity, row.c_eps, row.alpha_eps, row.max_gap_grad_u
                );
            }
            for (col, fit) in &fits {
                println!("fit {col}: slope {:.4}, r² {:.6}", fit.slope, fit.r_squared);
            }
            let written = emit(
                &cli.common.out,
                &cfg.stem,
                format,
                &plots,
                &cfg.raw_text,
                &outcome,
                &fits,
            )?;
            for p in written {
                println!("wrote {}", p.display());
            }
            Ok(if outcome.failures.is_empty() { 0 } else { 3 })
        }
        Command::Oracle => {
            let cfg = load_config(&cli.common)?;
            let (r1, r2) = match (cfg.shape1.kind(), cfg.shape2.kind()) {
                (
                    npgap::geometry::CurveKind::Circle { radius: r1 },
                    npgap::geometry::CurveKind::Circle { radius: r2 },
                ) => (*r1, *r2),
                _ => {
                    return Err(Error::Config(
                        "oracle cross-validation needs two circle shapes".into(),
                    ))
                }
            };
            let &eps = cfg.eps_list.first().unwrap_or(&0.05);
            let pair = place_at_gap(&cfg.shape1, &cfg.shape2, eps)?;
            let n = cfg.n_override.unwrap_or_else(|| default_grid_size(eps));
            let setup = npgap::potentials::PairSetup::new(&pair, n)?;
            let solver = npgap::spectral::MeanZeroSolver::new(&setup)?;
            let h = npgap::solver::HarmonicPolynomial::coordinate_x();
            let sol = solve_conducting(&setup, &solver, &h)?;
            let oracle = image_series_oracle(
                pair.curve1.center(),
                r1,
                pair.curve2.center(),
                r2,
                &h,
                1e-12,
            )?;
            let mut max_u = 0.0f64;
            let mut max_g = 0.0f64;
            let probes = [
                npgap::geometry::Vec2::zeros(),
                npgap::geometry::Vec2::new(0.0, 0.8),
                npgap::geometry::Vec2::new(2.5, 0.5),
                npgap::geometry::Vec2::new(-1.0, -2.0),
            ];
            for &x in &probes {
                max_u = max_u
                    .max((sol.value(x)? - oracle.value(x)).abs() / oracle.value(x).abs().max(1.0));
                max_g = max_g.max(
                    (sol.gradient(x)? - oracle.gradient(x)).norm()
                        / oracle.gradient(x).norm().max(1.0),
                );
            }
            println!(
                "oracle cross-validation at eps={eps:.3e}, n={n}: max rel err u {max_u:.3e}, grad {max_g:.3e} ({} terms)",
                oracle.terms
            );
            if max_u > 1e-6 || max_g > 1e-6 {
                return Err(Error::accuracy("oracle disagreement above 1e-6"));
            }
            Ok(0)
        }
        Command::Verify => {
            load_config(&cli.common)?;
            let results = acceptance::run_all();
            let mut failed = 0;
            for r in &results {
                println!("{}", r.line());
                if !r.passed {
                    failed += 1;
                }
            }
            println!("{} of {} criteria passed", results.len() - failed, results.len());
            Ok(if failed == 0 { 0 } else { 3 })
        }
    }
}
