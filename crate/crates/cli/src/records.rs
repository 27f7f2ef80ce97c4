//! CSV files read and written by the tool. Each has a header line.

use std::path::Path;

use anyhow::{bail, Context, Result};
use sdd_core::metrics::{GtPoint, RocCurve};
use sdd_core::pipeline::{BBox, Detection};
use sdd_core::solver::SolveTrace;

use crate::io::write_atomic;

pub const DETECTION_HEADER: [&str; 9] = ["frame", "row", "col", "score", "area", "r0", "c0", "r1", "c1"];
pub const GT_HEADER: [&str; 3] = ["frame", "row", "col"];

fn write_rows(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    write_atomic(path, |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(header)?;
        for r in rows {
            csv.write_record(&r)?;
        }
        csv.flush()?;
        Ok(())
    })
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let got = rdr.headers().with_context(|| format!("reading {}", path.display()))?.clone();
    if got.iter().map(str::trim).ne(header.iter().copied()) {
        bail!("{}: header is {:?}, expected {:?}", path.display(), got, header);
    }
    rdr.records()
        .collect::<csv::Result<Vec<_>>>()
        .with_context(|| format!("reading {}", path.display()))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, path: &Path) -> Result<T> {
    let raw = rec.get(i).unwrap_or("").trim();
    raw.parse().map_err(|_| {
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        anyhow::anyhow!("{}:{line}: bad value {raw:?} in column {}", path.display(), i + 1)
    })
}

pub fn detection_row(d: &Detection) -> Vec<String> {
    vec![
        d.frame.to_string(),
        format!("{:.6}", d.centroid.0),
        format!("{:.6}", d.centroid.1),
        format!("{:.6}", d.score),
        d.area.to_string(),
        d.bbox.r0.to_string(),
        d.bbox.c0.to_string(),
        d.bbox.r1.to_string(),
        d.bbox.c1.to_string(),
    ]
}

pub fn write_detections(path: &Path, dets: &[Detection]) -> Result<()> {
    write_rows(path, &DETECTION_HEADER, dets.iter().map(detection_row).collect())
}

pub fn read_detections(path: &Path) -> Result<Vec<Detection>> {
    read_rows(path, &DETECTION_HEADER)?
        .iter()
        .map(|r| {
            Ok(Detection {
                frame: field(r, 0, path)?,
                centroid: (field(r, 1, path)?, field(r, 2, path)?),
                score: field(r, 3, path)?,
                area: field(r, 4, path)?,
                bbox: BBox {
                    r0: field(r, 5, path)?,
                    c0: field(r, 6, path)?,
                    r1: field(r, 7, path)?,
                    c1: field(r, 8, path)?,
                },
            })
        })
        .collect()
}

pub fn write_ground_truth(path: &Path, points: &[GtPoint]) -> Result<()> {
    let rows = points
        .iter()
        .map(|g| vec![g.frame.to_string(), format!("{:.6}", g.row), format!("{:.6}", g.col)])
        .collect();
    write_rows(path, &GT_HEADER, rows)
}

pub fn read_ground_truth(path: &Path) -> Result<Vec<GtPoint>> {
    read_rows(path, &GT_HEADER)?
        .iter()
        .map(|r| {
            Ok(GtPoint {
                frame: field(r, 0, path)?,
                row: field(r, 1, path)?,
                col: field(r, 2, path)?,
            })
        })
        .collect()
}

pub const TRACE_HEADER: [&str; 9] = [
    "cube", "iteration", "rel_change", "residual", "group_term", "column_term", "temporal_term",
    "target_term", "inner_iters",
];

/// One row per outer iteration of every cube.
pub fn write_trace(path: &Path, traces: &[SolveTrace]) -> Result<()> {
    let mut rows = Vec::new();
    for (cube, t) in traces.iter().enumerate() {
        for r in &t.records {
            rows.push(vec![
                cube.to_string(),
                r.iteration.to_string(),
                format!("{:.9e}", r.rel_change),
                format!("{:.9e}", r.residual),
                format!("{:.9e}", r.group_term),
                format!("{:.9e}", r.column_term),
                format!("{:.9e}", r.temporal_term),
                format!("{:.9e}", r.target_term),
                r.inner_iters.to_string(),
            ]);
        }
    }
    write_rows(path, &TRACE_HEADER, rows)
}

pub const ROC_HEADER: [&str; 5] = ["threshold", "fa", "pd", "auc_raw", "auc_normalized"];

/// Operating points with the curve's AUC values repeated on every row.
pub fn write_roc(path: &Path, curve: &RocCurve) -> Result<()> {
    let rows = curve
        .points
        .iter()
        .map(|p| {
            vec![
                format!("{:.6}", p.threshold),
                format!("{:.6}", p.fa),
                format!("{:.6}", p.pd),
                format!("{:.6}", curve.auc_raw),
                format!("{:.6}", curve.auc_normalized),
            ]
        })
        .collect();
    write_rows(path, &ROC_HEADER, rows)
}

pub const METRICS_HEADER: [&str; 7] = ["frame", "row", "col", "detected", "bsf", "gscr", "cg"];

/// Per-target scores of one frame. Undefined metrics are `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub gt: GtPoint,
    pub detected: bool,
    pub bsf: Option<f64>,
    pub gscr: Option<f64>,
    pub cg: Option<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "nan".into())
}

fn mean(vals: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let xs: Vec<f64> = vals.flatten().filter(|v| v.is_finite()).collect();
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Per-target rows followed by one `mean` row (detected = Pd).
pub fn write_metrics(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let mut out: Vec<Vec<String>> = rows
        .iter()
        .map(|m| {
            vec![
                m.gt.frame.to_string(),
                format!("{:.6}", m.gt.row),
                format!("{:.6}", m.gt.col),
                u8::from(m.detected).to_string(),
                opt(m.bsf),
                opt(m.gscr),
                opt(m.cg),
            ]
        })
        .collect();
    let pd = mean(rows.iter().map(|m| Some(if m.detected { 1.0 } else { 0.0 })));
    out.push(vec![
        "mean".into(),
        String::new(),
        String::new(),
        opt(pd),
        opt(mean(rows.iter().map(|m| m.bsf))),
        opt(mean(rows.iter().map(|m| m.gscr))),
        opt(mean(rows.iter().map(|m| m.cg))),
    ]);
    write_rows(path, &METRICS_HEADER, out)
}
