//! Experiment configuration: a strict TOML schema (unknown keys are errors).

use crate::error::{Error, Result};
use crate::geometry::{Curve, Vec2};
use crate::solver::HarmonicPolynomial;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "kebab-case")]
pub enum ShapeSpec {
    Circle {
        radius: f64,
    },
    Ellipse {
        semi_major: f64,
        semi_minor: f64,
        #[serde(default)]
        rotation: f64,
    },
    FourierRadialConvex {
        base_radius: f64,
        #[serde(default)]
        cos_coeffs: Vec<f64>,
        #[serde(default)]
        sin_coeffs: Vec<f64>,
    },
}

impl ShapeSpec {
    pub fn to_curve(&self) -> Result<Curve> {
        match self {
            ShapeSpec::Circle { radius } => Curve::circle(Vec2::zeros(), *radius),
            ShapeSpec::Ellipse { semi_major, semi_minor, rotation } => {
                Curve::ellipse(Vec2::zeros(), *semi_major, *semi_minor, *rotation)
            }
            ShapeSpec::FourierRadialConvex { base_radius, cos_coeffs, sin_coeffs } => {
                Curve::fourier_radial(
                    Vec2::zeros(),
                    *base_radius,
                    cos_coeffs.clone(),
                    sin_coeffs.clone(),
                )
            }
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GapSection {
    values: Option<Vec<f64>>,
    min: Option<f64>,
    max: Option<f64>,
    count: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct BackgroundSection {
    #[serde(default)]
    constant: f64,
    #[serde(default)]
    re_coeffs: Vec<f64>,
    #[serde(default)]
    im_coeffs: Vec<f64>,
}

impl BackgroundSection {
    fn to_polynomial(&self) -> HarmonicPolynomial {
        HarmonicPolynomial {
            constant: self.constant,
            re_coeffs: self.re_coeffs.clone(),
            im_coeffs: self.im_coeffs.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Conducting,
    Insulating,
    ConductingOrthogonalized,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemSection {
    kind: ProblemKind,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NumericsSection {
    n_override: Option<usize>,
    probe_count: Option<usize>,
    seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    stem: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    shape1: ShapeSpec,
    shape2: ShapeSpec,
    gap: GapSection,
    background: BackgroundSection,
    problem: ProblemSection,
    orthogonalize: Option<BackgroundSection>,
    #[serde(default)]
    numerics: NumericsSection,
    #[serde(default)]
    output: OutputSection,
}

/// Validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub shape1: Curve,
    pub shape2: Curve,
    /// Gap widths, positive and sorted descending.
    pub eps_list: Vec<f64>,
    pub background: HarmonicPolynomial,
    pub kind: ProblemKind,
    /// Second basis function for the orthogonalized-background experiment.
    pub ortho_against: HarmonicPolynomial,
    pub n_override: Option<usize>,
    pub probe_count: usize,
    pub seed: u64,
    pub stem: String,
    /// Raw text the config was parsed from (echoed in reports).
    pub raw_text: String,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("{e}")))?;

        let shape1 = raw.shape1.to_curve().map_err(config_err)?;
        let shape2 = raw.shape2.to_curve().map_err(config_err)?;

        let mut eps_list = match (&raw.gap.values, raw.gap.min, raw.gap.max, raw.gap.count) {
            (Some(values), None, None, None) => values.clone(),
            (None, Some(min), Some(max), Some(count)) => {
                if !(min > 0.0 && max >= min) {
                    return Err(Error::Config("gap range needs 0 < min <= max".into()));
                }
                if count == 0 {
                    vec![]
                } else if count == 1 {
                    vec![max]
                } else {
                    (0..count)
                        .map(|i| max * (min / max).powf(i as f64 / (count - 1) as f64))
                        .collect()
                }
            }
            _ => {
                return Err(Error::Config(
                    "gap section needs either `values` or all of `min`, `max`, `count`".into(),
                ))
            }
        };
        if eps_list.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
            return Err(Error::Config("gap values must be positive and finite".into()));
        }
        eps_list.sort_by(|a, b| b.partial_cmp(a).unwrap());

        if raw.orthogonalize.is_some() && raw.problem.kind != ProblemKind::ConductingOrthogonalized
        {
            return Err(Error::Config(
                "[orthogonalize] section requires problem kind `conducting-orthogonalized`".into(),
            ));
        }
        let ortho_against = raw
            .orthogonalize
            .as_ref()
            .map(|b| b.to_polynomial())
            .unwrap_or_else(HarmonicPolynomial::coordinate_x);

        if let Some(n) = raw.numerics.n_override {
            if n < 16 || n % 2 != 0 {
                return Err(Error::Config(format!(
                    "n_override must be even and >= 16, got {n}"
                )));
            }
        }

        Ok(ExperimentConfig {
            shape1,
            shape2,
            eps_list,
            background: raw.background.to_polynomial(),
            kind: raw.problem.kind,
            ortho_against,
            n_override: raw.numerics.n_override,
            probe_count: raw.numerics.probe_count.unwrap_or(41),
            seed: raw.numerics.seed.unwrap_or(0),
            stem: raw.output.stem.unwrap_or_else(|| "run".into()),
            raw_text: text.to_string(),
        })
    }
}

fn config_err(e: Error) -> Error {
    Error::Config(format!("{e}"))
}
