//! Connectivity-Area-Length agreement between a segmented line network and
//! its ground truth.

use serde::{Deserialize, Serialize};

use super::mask::check_same_dims;
use super::morphology::{count_components, dilate_disk, skeletonize};
use super::{BinaryMask, EvalError};

/// Dilation radii for the area (`alpha`) and length (`beta`) terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalParams {
    pub alpha: usize,
    pub beta: usize,
}

impl Default for CalParams {
    fn default() -> Self {
        Self { alpha: 2, beta: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cal {
    pub connectivity: f64,
    pub area: f64,
    pub length: f64,
    pub cal: f64,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// CAL with the default radii.
pub fn cal(pred: &BinaryMask, gt: &BinaryMask) -> Result<Cal, EvalError> {
    cal_with(pred, gt, CalParams::default())
}

pub fn cal_with(pred: &BinaryMask, gt: &BinaryMask, params: CalParams) -> Result<Cal, EvalError> {
    check_same_dims(pred, gt)?;
    let gt_size = gt.count();
    if gt_size == 0 {
        return Err(EvalError::UndefinedMetric("CAL needs a non-empty ground truth".into()));
    }

    let c_gt = count_components(gt) as f64;
    let c_pred = count_components(pred) as f64;
    let connectivity = 1.0 - ((c_gt - c_pred).abs() / gt_size as f64).min(1.0);

    let area_hits = dilate_disk(pred, params.alpha).and(gt).or(&pred.and(&dilate_disk(gt, params.alpha)));
    let area = ratio(area_hits.count(), pred.or(gt).count());

    let (sk_pred, sk_gt) = (skeletonize(pred), skeletonize(gt));
    let length_hits = sk_pred.and(&dilate_disk(gt, params.beta)).or(&dilate_disk(pred, params.beta).and(&sk_gt));
    let length = ratio(length_hits.count(), sk_pred.or(&sk_gt).count());

    Ok(Cal { connectivity, area, length, cal: connectivity * area * length })
}
