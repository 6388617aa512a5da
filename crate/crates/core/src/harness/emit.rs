//! Structured output: CSV tables, JSON reports, optional SVG log-log plots.

use crate::error::{Error, Result};
use crate::harness::sweep::{RateFit, SweepOutcome, SweepRow};
use serde::Serialize;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Json,
    Both,
}

impl std::str::FromStr for EmitFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(EmitFormat::Csv),
            "json" => Ok(EmitFormat::Json),
            "both" => Ok(EmitFormat::Both),
            other => Err(Error::Config(format!("unknown format `{other}` (csv|json|both)"))),
        }
    }
}

/// 17-significant-digit float text, the CSV contract.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders sweep rows as CSV with the fixed header.
pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str(&SweepRow::COLUMNS.join(","));
    out.push('\n');
    for row in rows {
        let mut fields = Vec::with_capacity(SweepRow::COLUMNS.len());
        for &col in SweepRow::COLUMNS {
            let v = row.column(col).unwrap();
            if col == "n_used" || col == "multiplicity" {
                fields.push(format!("{}", v as usize));
            } else {
                fields.push(fmt_f64(v));
            }
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct JsonReport<'a> {
    config: &'a str,
    rows: &'a [SweepRow],
    failures: Vec<(f64, String)>,
    fits: &'a BTreeMap<String, RateFit>,
}

/// Writes the requested artifacts; returns the paths written.
pub fn emit(
    out_dir: &Path,
    stem: &str,
    format: EmitFormat,
    plots: &[(String, String)],
    config_text: &str,
    outcome: &SweepOutcome,
    fits: &BTreeMap<String, RateFit>,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let rows = outcome.rows.first().map(|r| r.as_slice()).unwrap_or(&[]);
    let mut written = Vec::new();

    if matches!(format, EmitFormat::Csv | EmitFormat::Both) {
        let path = out_dir.join(format!("{stem}.csv"));
        let mut f = std::fs::File::create(&path)?;
        f.write_all(rows_to_csv(rows).as_bytes())?;
        written.push(path);
    }
    if matches!(format, EmitFormat::Json | EmitFormat::Both) {
        let report = JsonReport {
            config: config_text,
            rows,
            failures: outcome.failures.clone(),
            fits,
        };
        let path = out_dir.join(format!("{stem}.json"));
        let mut f = std::fs::File::create(&path)?;
        f.write_all(serde_json::to_string_pretty(&report).unwrap().as_bytes())?;
        f.write_all(b"\n")?;
        written.push(path);
    }
    for (colx, coly) in plots {
        if rows.is_empty() {
            return Err(Error::domain("plot emission needs at least one row"));
        }
        let path = out_dir.join(format!("{stem}_{colx}_{coly}.svg"));
        let svg = loglog_svg(rows, colx, coly)?;
        let mut f = std::fs::File::create(&path)?;
        f.write_all(svg.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

/// Minimal static log-log plot: one polyline plus markers per series.
pub fn loglog_svg(rows: &[SweepRow], colx: &str, coly: &str) -> Result<String> {
    let xs: Vec<f64> = rows
        .iter()
        .map(|r| r.column(colx).ok_or_else(|| Error::domain(format!("unknown column {colx}"))))
        .collect::<Result<_>>()?;
    let ys: Vec<f64> = rows
        .iter()
        .map(|r| r.column(coly).ok_or_else(|| Error::domain(format!("unknown column {coly}"))))
        .collect::<Result<_>>()?;
    if xs.iter().any(|&v| !(v > 0.0)) || ys.iter().any(|&v| v == 0.0) {
        return Err(Error::domain("log-log plot needs positive x and nonzero y"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.log10()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.abs().log10()).collect();
    let (x0, x1) = bounds(&lx);
    let (y0, y1) = bounds(&ly);

    let w = 640.0;
    let h = 480.0;
    let ml = 70.0;
    let mb = 50.0;
    let mt = 20.0;
    let mr = 20.0;
    let sx = |v: f64| ml + (v - x0) / (x1 - x0).max(1e-12) * (w - ml - mr);
    let sy = |v: f64| h - mb - (v - y0) / (y1 - y0).max(1e-12) * (h - mb - mt);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - mb,
        w - mr,
        h - mb
    ));
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - mb
    ));
    // Decade ticks.
    for d in (x0.floor() as i64)..=(x1.ceil() as i64) {
        let px = sx(d as f64);
        if px >= ml - 1.0 && px <= w - mr + 1.0 {
            svg.push_str(&format!(
                "<line x1=\"{px}\" y1=\"{}\" x2=\"{px}\" y2=\"{}\" stroke=\"black\"/>\n",
                h - mb,
                h - mb + 6.0
            ));
            svg.push_str(&format!(
                "<text x=\"{px}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">1e{d}</text>\n",
                h - mb + 20.0
            ));
        }
    }
    for d in (y0.floor() as i64)..=(y1.ceil() as i64) {
        let py = sy(d as f64);
        if py >= mt - 1.0 && py <= h - mb + 1.0 {
            svg.push_str(&format!(
                "<line x1=\"{}\" y1=\"{py}\" x2=\"{ml}\" y2=\"{py}\" stroke=\"black\"/>\n",
                ml - 6.0
            ));
            svg.push_str(&format!(
                "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">1e{d}</text>\n",
                ml - 10.0,
                py + 4.0
            ));
        }
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">{colx}</text>\n",
        (ml + w - mr) / 2.0,
        h - 10.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{coly}</text>\n",
        (mt + h - mb) / 2.0,
        (mt + h - mb) / 2.0
    ));

    let pts: Vec<String> =
        lx.iter().zip(&ly).map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
    svg.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\"/>\n",
        pts.join(" ")
    ));
    for p in &pts {
        let mut it = p.split(',');
        let cx = it.next().unwrap();
        let cy = it.next().unwrap();
        svg.push_str(&format!(
            "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"3\" fill=\"#1f6fb2\"/>\n"
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in v {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::sweep::SweepRow;

    fn fake_row(eps: f64) -> SweepRow {
        SweepRow {
            eps,
            n_used: 256,
            q_gap_measured: -eps.sqrt(),
            q_gap_predicted: -eps.sqrt(),
            h_g_inner: -0.5 * eps.sqrt(),
            c_eps: 1.5,
            a_eps: 1.0,
            alpha_eps: 1.0,
            max_gap_grad_u: 2.0 / eps.sqrt(),
            predicted_grad_u: 2.0 / eps.sqrt(),
            max_gap_grad_b: 0.4,
            max_gap_grad_r: 0.5,
            max_gap_grad_v: 0.1,
            multiplicity: 2,
            spectral_gap: 0.2,
            eigen_residual: 1e-12,
            u_constancy: 1e-12,
            q_constancy: 1e-12,
            flux_residual: 1e-13,
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let rows = vec![fake_row(0.1), fake_row(0.01)];
        let csv = rows_to_csv(&rows);
        let lines: Vec<&str> = csv.trim_end().lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("eps,n_used,q_gap_measured"));
        assert_eq!(lines[0].split(',').count(), SweepRow::COLUMNS.len());
        assert_eq!(lines[1].split(',').count(), SweepRow::COLUMNS.len());
        // 17 significant digits in float fields.
        assert!(lines[1].contains("e-1"), "{}", lines[1]);
    }

    #[test]
    fn csv_is_deterministic() {
        let rows = vec![fake_row(0.05)];
        assert_eq!(rows_to_csv(&rows), rows_to_csv(&rows));
    }

    #[test]
    fn svg_contains_polyline_per_series() {
        let rows = vec![fake_row(0.1), fake_row(0.01), fake_row(0.001)];
        let svg = loglog_svg(&rows, "eps", "max_gap_grad_u").unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("</svg>"));
        assert!(loglog_svg(&rows, "eps", "nope").is_err());
    }

    #[test]
    fn json_roundtrip_preserves_config_text() {
        let dir = std::env::temp_dir().join(format!("npgap_emit_test_{}", std::process::id()));
        let outcome = SweepOutcome { rows: vec![vec![fake_row(0.1)]], failures: vec![] };
        let config_text = "[shape1]\nkind = \"circle\"\nradius = 1.0\n# exact bytes ✓\n";
        let fits = BTreeMap::new();
        let written = emit(
            &dir,
            "t",
            EmitFormat::Both,
            &[("eps".into(), "max_gap_grad_u".into())],
            config_text,
            &outcome,
            &fits,
        )
        .unwrap();
        assert_eq!(written.len(), 3);
        let json_text = std::fs::read_to_string(dir.join("t.json")).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&json_text).unwrap();
        assert_eq!(parsed["config"].as_str().unwrap(), config_text);
        std::fs::remove_dir_all(&dir).ok();
    }
}
