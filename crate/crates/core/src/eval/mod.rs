//! Quantitative evaluation: thresholding, tolerance-based P/R/F, MCC, CAL
//! and paired significance testing.

mod cal;
mod distance;
mod mask;
mod mcc;
pub mod morphology;
mod prf;
mod report;
mod stats;

use thiserror::Error;

pub use cal::{cal, cal_with, Cal, CalParams};
pub use distance::{distance_transform, squared_edt, DistanceMetric};
pub use mask::{threshold_map, BinaryMask};
pub use mcc::{mcc, Confusion};
pub use morphology::{count_components, dilate_disk, skeletonize};
pub use prf::{
    argmax_first, centerline_prf, f_score, sweep_thresholds, CenterlineTarget, Prf, SweepResult, SweepRow,
    ThresholdGrid, Tolerance,
};
pub use report::{
    evaluate_centerlines, evaluate_segmentation, read_csv_column, CurveRow, EvalItem, EvalReport, ImageRecord,
    MetricSet,
};
pub use stats::{paired_significance, signed_ranks};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch { left: (usize, usize), right: (usize, usize) },
    #[error("bad mask shape: {0}")]
    Shape(String),
    #[error("metric undefined: {0}")]
    UndefinedMetric(String),
    #[error("no match for ids: {0}")]
    UnmatchedIds(String),
    #[error("malformed report: {0}")]
    Format(String),
}
