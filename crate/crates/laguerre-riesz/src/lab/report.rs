//! Experiment reports and the run-directory layout
//! `runs/<timestamp>-<name>/{report.json, samples.csv, config.txt, plot.svg}`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::lab::fit::SlopeFit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Slope experiments with fewer than 6 abscissa points or spanning
    /// less than 1.2 decades are not judged.
    Inconclusive,
}

/// Output of one named experiment. `verdict` is `Pass` exactly when
/// `|fitted_slope - expected_slope| <= tolerance`; one-sided experiments
/// encode their bound as a transformed metric in `fitted_slope` (documented
/// in `params["metric"]`) so the same rule applies.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub params: BTreeMap<String, String>,
    pub samples: Vec<(f64, f64)>,
    pub fitted_slope: f64,
    pub slope_stderr: f64,
    pub expected_slope: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub runtime_seconds: f64,
    pub seed: u64,
}

impl ExperimentReport {
    /// Report for a log-log slope experiment; applies the inconclusive rule
    /// (at least 6 points over at least 1.2 decades).
    #[allow(clippy::too_many_arguments)]
    pub fn slope_experiment(
        name: impl Into<String>,
        params: BTreeMap<String, String>,
        samples: Vec<(f64, f64)>,
        fit: &SlopeFit,
        expected_slope: f64,
        tolerance: f64,
        runtime_seconds: f64,
        seed: u64,
    ) -> Self {
        let verdict = if fit.n_points < 6 || fit.decades < 1.2 {
            Verdict::Inconclusive
        } else if (fit.slope - expected_slope).abs() <= tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            name: name.into(),
            params,
            samples,
            fitted_slope: fit.slope,
            slope_stderr: fit.stderr,
            expected_slope,
            tolerance,
            verdict,
            runtime_seconds,
            seed,
        }
    }

    /// Report for a bound-style experiment: `metric` plays the role of the
    /// fitted value and the verdict is `|metric - expected| <= tolerance`.
    #[allow(clippy::too_many_arguments)]
    pub fn bound_experiment(
        name: impl Into<String>,
        mut params: BTreeMap<String, String>,
        samples: Vec<(f64, f64)>,
        metric_name: &str,
        metric: f64,
        expected: f64,
        tolerance: f64,
        runtime_seconds: f64,
        seed: u64,
    ) -> Self {
        params.insert("metric".into(), metric_name.into());
        let verdict = if (metric - expected).abs() <= tolerance {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            name: name.into(),
            params,
            samples,
            fitted_slope: metric,
            slope_stderr: 0.0,
            expected_slope: expected,
            tolerance,
            verdict,
            runtime_seconds,
            seed,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Serialize samples as CSV with a header row; floats are written with
/// full precision so identical runs produce identical bytes.
pub fn samples_csv(samples: &[(f64, f64)]) -> String {
    let mut out = String::from("abscissa,value\n");
    for &(x, y) in samples {
        out.push_str(&format!("{x:.17e},{y:.17e}\n"));
    }
    out
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Minimal static SVG of the samples on log-log axes (falls back to linear
/// for non-positive data).
pub fn render_svg(samples: &[(f64, f64)], title: &str) -> String {
    let (w, h, ml, mb) = (640.0, 480.0, 60.0, 40.0);
    let loggable = samples.iter().all(|&(x, y)| x > 0.0 && y > 0.0);
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(x, y)| if loggable { (x.ln(), y.ln()) } else { (x, y) })
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| ml + (x - x0) / (x1 - x0) * (w - ml - 20.0);
    let sy = |y: f64| (h - mb) - (y - y0) / (y1 - y0) * (h - mb - 30.0);
    let poly: Vec<String> = pts
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
        .collect();
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    );
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"18\" font-size=\"14\" text-anchor=\"middle\">{title}{}</text>\n",
        w / 2.0,
        if loggable { " (log-log)" } else { "" }
    ));
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
        h - mb,
        w - 20.0
    ));
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"30\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - mb
    ));
    svg.push_str(&format!(
        "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        poly.join(" ")
    ));
    for p in &poly {
        let xy: Vec<&str> = p.split(',').collect();
        svg.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"firebrick\"/>\n",
            xy[0], xy[1]
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Write `report.json`, `samples.csv`, `config.txt`, and `plot.svg` under
/// `dir`, each atomically (temp file + rename).
pub fn write_run_dir(dir: &Path, report: &ExperimentReport, config_text: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| crate::error::Error::Parse(format!("report serialization: {e}")))?;
    write_atomic(&dir.join("report.json"), json.as_bytes())?;
    write_atomic(
        &dir.join("samples.csv"),
        samples_csv(&report.samples).as_bytes(),
    )?;
    write_atomic(&dir.join("config.txt"), config_text.as_bytes())?;
    write_atomic(
        &dir.join("plot.svg"),
        render_svg(&report.samples, &report.name).as_bytes(),
    )?;
    Ok(dir.to_path_buf())
}

/// The `runs/<timestamp>-<name>` directory path (not yet created); a
/// counter suffix keeps runs within the same second apart.
pub fn run_dir(root: &Path, name: &str) -> PathBuf {
    let stamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let base = root.join(format!("{stamp}-{name}"));
    if !base.exists() {
        return base;
    }
    for k in 2.. {
        let alt = root.join(format!("{stamp}-{name}-{k}"));
        if !alt.exists() {
            return alt;
        }
    }
    unreachable!()
}
