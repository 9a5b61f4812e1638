//! File formats: report files, sample and trajectory CSV, frame summaries.
//!
//! Every CSV file starts with a header row.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use dirwalk_core::lattice::DirectionFrame;
use dirwalk_core::model::{dot, RationalDisplay, WeightSystem};
use dirwalk_core::walk::Trajectory;
use dirwalk_core::Rational;

use crate::config::Format;
use crate::experiments::beta_parameters;
use crate::report::ExperimentReport;
use crate::Result;

fn rat(r: &Rational) -> String {
    RationalDisplay(r).to_string()
}

/// Writes `report` to `dir/<stem>.json` or `dir/<stem>.txt`, creating `dir`.
pub fn write_report(dir: &Path, stem: &str, report: &ExperimentReport, format: Format) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let (ext, body) = match format {
        Format::Json => ("json", report.to_json() + "\n"),
        Format::Text => ("txt", report.to_text()),
    };
    let path = dir.join(format!("{stem}.{ext}"));
    fs::write(&path, body)?;
    Ok(path)
}

/// `index,<column>` rows for a one-dimensional sample.
pub fn write_samples_csv<W: Write>(out: W, column: &str, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", column])?;
    for (i, v) in values.iter().enumerate() {
        w.write_record([i.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `n,step,x1,…,xd` rows, plus `projection` (`X_n·u`) when `u` is given.
/// The `step` column holds the index of the step taken to reach `X_n`
/// (empty for `n = 0`).
pub fn write_trajectory_csv<W: Write>(out: W, traj: &Trajectory, u: Option<&[i64]>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let dim = traj.start.len();
    let mut header = vec!["n".to_string(), "step".to_string()];
    header.extend((1..=dim).map(|i| format!("x{i}")));
    if u.is_some() {
        header.push("projection".into());
    }
    w.write_record(&header)?;
    for (n, x) in traj.positions.iter().enumerate() {
        let mut row = vec![n.to_string(), if n == 0 { String::new() } else { traj.steps[n - 1].to_string() }];
        row.extend(x.iter().map(i64::to_string));
        if let Some(u) = u {
            row.push(dot(x, u).to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Geometry and exact constants attached to a direction, as JSON.
pub fn frame_summary(frame: &DirectionFrame, w: &WeightSystem) -> Value {
    let moments = w.projected_moments(frame.u());
    let mut summary = json!({
        "u": frame.u(),
        "norm_sq": frame.norm_sq(),
        "scale": frame.scale(),
        "basis": frame.basis(),
        "cobasis": frame.cobasis(),
        "volume": frame.volume(),
        "entry_points": frame.entry_points(),
        "drift": w.drift().iter().map(rat).collect::<Vec<_>>(),
        "positive_moment": rat(&moments.positive),
        "negative_moment": rat(&moments.negative),
        "drift_along_u": rat(&w.drift_along(frame.u())),
    });
    let extra = match frame.entry_measure(w) {
        Ok(mu) => {
            let mut extra = json!({
                "entry_measure": mu.probabilities.iter().map(rat).collect::<Vec<_>>(),
                "entry_masses": mu.masses.iter().map(rat).collect::<Vec<_>>(),
                "entry_normalizer": rat(&mu.normalizer),
            });
            if let (Ok(stay), Ok(ratio)) = (moments.stay_probability(), moments.exit_ratio()) {
                extra["stay_probability"] = json!(rat(&stay));
                extra["exit_ratio"] = json!(rat(&ratio));
            }
            if let Ok((a, b)) = beta_parameters(w, frame) {
                extra["beta"] = json!({ "a": rat(&a), "b": rat(&b) });
            }
            extra
        }
        Err(e) => json!({ "drift_condition": e.to_string() }),
    };
    if let (Value::Object(base), Value::Object(more)) = (&mut summary, extra) {
        base.extend(more);
    }
    summary
}
