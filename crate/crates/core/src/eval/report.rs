//! Dataset-level evaluation runs and their CSV / JSON exports.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cal::{cal_with, CalParams};
use super::mask::threshold_map;
use super::mcc::mcc;
use super::prf::{argmax_first, sweep_thresholds, ThresholdGrid, Tolerance};
use super::stats::paired_significance;
use super::{BinaryMask, EvalError};
use crate::raster::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricSet {
    /// Tolerance-based precision / recall / F on centerlines.
    Prf,
    /// MCC inside the field of view, plus CAL.
    MccCal,
}

impl MetricSet {
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            MetricSet::Prf => &["precision", "recall", "f"],
            MetricSet::MccCal => &["mcc", "c", "a", "l", "cal"],
        }
    }

    /// Column used for the threshold choice and for paired tests.
    pub fn primary(self) -> &'static str {
        match self {
            MetricSet::Prf => "f",
            MetricSet::MccCal => "cal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub id: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub t: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub dataset: String,
    pub metric_set: MetricSet,
    pub params: serde_json::Value,
    pub t_star: f64,
    /// Sorted by id.
    pub records: Vec<ImageRecord>,
    /// Dataset averages at every grid threshold; columns are
    /// `curve_columns`.
    pub curve: Vec<CurveRow>,
    pub curve_columns: Vec<String>,
    pub p_value: Option<f64>,
}

/// One image to evaluate: normalized response plus ground truth.
#[derive(Debug, Clone)]
pub struct EvalItem {
    pub id: String,
    pub response: GrayImage,
    pub gt: BinaryMask,
    pub fov: Option<BinaryMask>,
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

fn sorted(mut items: Vec<EvalItem>) -> Vec<EvalItem> {
    items.sort_by(|a, b| a.id.cmp(&b.id));
    items
}

/// Sweep the grid with centerline P/R/F and report at `t*`.
pub fn evaluate_centerlines(
    dataset: &str,
    items: Vec<EvalItem>,
    tolerance: Tolerance,
    grid: ThresholdGrid,
) -> Result<EvalReport, EvalError> {
    let items = sorted(items);
    let pairs: Vec<(GrayImage, BinaryMask)> = items.iter().map(|i| (i.response.clone(), i.gt.clone())).collect();
    let sweep = sweep_thresholds(&pairs, tolerance, grid)?;
    Ok(EvalReport {
        dataset: dataset.to_string(),
        metric_set: MetricSet::Prf,
        params: serde_json::json!({ "d_star": tolerance.distance, "metric": tolerance.metric, "threshold_steps": grid.steps }),
        t_star: sweep.t_star,
        records: items
            .iter()
            .zip(&sweep.per_image)
            .map(|(i, s)| ImageRecord { id: i.id.clone(), values: vec![s.precision, s.recall, s.f] })
            .collect(),
        curve: sweep
            .curve
            .iter()
            .map(|r| CurveRow { t: r.t, values: vec![r.average.precision, r.average.recall, r.average.f] })
            .collect(),
        curve_columns: vec!["precision".into(), "recall".into(), "f".into()],
        p_value: None,
    })
}

/// Choose `t*` by average MCC over the grid, then report MCC and CAL there.
pub fn evaluate_segmentation(
    dataset: &str,
    items: Vec<EvalItem>,
    grid: ThresholdGrid,
    cal_params: CalParams,
) -> Result<EvalReport, EvalError> {
    if items.is_empty() {
        return Err(EvalError::Parameter("evaluation over an empty image set".into()));
    }
    if grid.steps == 0 {
        return Err(EvalError::Parameter("threshold grid needs at least one step".into()));
    }
    let items = sorted(items);
    let ts = grid.values();
    let mcc_grid: Vec<Vec<f64>> = items
        .par_iter()
        .map(|i| {
            ts.iter()
                .map(|&t| mcc(&threshold_map(&i.response, t)?, &i.gt, i.fov.as_ref()))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let curve: Vec<CurveRow> = ts
        .iter()
        .enumerate()
        .map(|(k, &t)| CurveRow { t, values: vec![mean(mcc_grid.iter().map(|m| m[k]))] })
        .collect();
    let best = argmax_first(&curve.iter().map(|r| r.values[0]).collect::<Vec<_>>());
    let t_star = ts[best];

    let records = items
        .par_iter()
        .zip(&mcc_grid)
        .map(|(i, m)| {
            let mut pred = threshold_map(&i.response, t_star)?;
            if let Some(f) = &i.fov {
                pred = pred.and(f);
            }
            let c = cal_with(&pred, &i.gt, cal_params)?;
            Ok(ImageRecord { id: i.id.clone(), values: vec![m[best], c.connectivity, c.area, c.length, c.cal] })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;

    Ok(EvalReport {
        dataset: dataset.to_string(),
        metric_set: MetricSet::MccCal,
        params: serde_json::json!({ "cal_alpha": cal_params.alpha, "cal_beta": cal_params.beta, "threshold_steps": grid.steps }),
        t_star,
        records,
        curve,
        curve_columns: vec!["mcc".into()],
        p_value: None,
    })
}

impl EvalReport {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.metric_set.columns().iter().position(|c| *c == name)?;
        Some(self.records.iter().map(|r| r.values[idx]).collect())
    }

    pub fn averages(&self) -> BTreeMap<String, f64> {
        self.metric_set
            .columns()
            .iter()
            .enumerate()
            .map(|(k, c)| (c.to_string(), mean(self.records.iter().map(|r| r.values[k]))))
            .collect()
    }

    /// Pair this run with a baseline on the primary metric by image id.
    pub fn attach_baseline(&mut self, baseline: &BTreeMap<String, f64>) -> Result<f64, EvalError> {
        let missing: Vec<&str> =
            self.records.iter().map(|r| r.id.as_str()).filter(|id| !baseline.contains_key(*id)).collect();
        if !missing.is_empty() {
            return Err(EvalError::UnmatchedIds(missing.join(", ")));
        }
        let ours = self.column(self.metric_set.primary()).expect("primary column exists");
        let theirs: Vec<f64> = self.records.iter().map(|r| baseline[&r.id]).collect();
        let p = paired_significance(&ours, &theirs)?;
        self.p_value = Some(p);
        Ok(p)
    }

    pub fn per_image_csv(&self) -> String {
        let mut out = String::from("id");
        for c in self.metric_set.columns() {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.id);
            for v in &r.values {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn sweep_csv(&self) -> String {
        let mut out = String::from("t");
        for c in &self.curve_columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for r in &self.curve {
            out.push_str(&format!("{}", r.t));
            for v in &r.values {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn summary_json(&self) -> String {
        let doc = serde_json::json!({
            "dataset": self.dataset,
            "metric_set": self.metric_set,
            "params": self.params,
            "t_star": self.t_star,
            "averages": self.averages(),
            "p_value": self.p_value,
        });
        serde_json::to_string_pretty(&doc).expect("summary serializes")
    }

    /// Writes `per_image.csv`, `sweep.csv` and `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("per_image.csv"), self.per_image_csv())?;
        std::fs::write(dir.join("sweep.csv"), self.sweep_csv())?;
        std::fs::write(dir.join("summary.json"), self.summary_json())?;
        Ok(())
    }
}

/// Read `id -> value` for one column of a per-image CSV.
pub fn read_csv_column(text: &str, column: &str) -> Result<BTreeMap<String, f64>, EvalError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| EvalError::Format("empty CSV".into()))?.split(',').collect();
    let idx = header
        .iter()
        .position(|h| h.trim() == column)
        .ok_or_else(|| EvalError::Format(format!("CSV has no column '{column}'")))?;
    let mut out = BTreeMap::new();
    for (n, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        let (Some(id), Some(v)) = (fields.first(), fields.get(idx)) else {
            return Err(EvalError::Format(format!("row {} is short", n + 2)));
        };
        let v: f64 = v.trim().parse().map_err(|_| EvalError::Format(format!("row {}: bad number '{v}'", n + 2)))?;
        out.insert(id.trim().to_string(), v);
    }
    Ok(out)
}
