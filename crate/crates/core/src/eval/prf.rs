//! Tolerance-based precision/recall for centerline detection and the
//! threshold sweep that selects `t*`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distance::{distance_transform, DistanceMetric};
use super::mask::{check_same_dims, threshold_map};
use super::{BinaryMask, EvalError};
use crate::raster::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Matching distance `d*` in pixels.
    pub distance: f64,
    #[serde(default)]
    pub metric: DistanceMetric,
}

impl Tolerance {
    pub fn euclidean(distance: f64) -> Self {
        Self { distance, metric: DistanceMetric::Euclidean }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f: f64,
}

impl Prf {
    pub fn new(precision: f64, recall: f64) -> Self {
        Self { precision, recall, f: f_score(precision, recall) }
    }
}

/// Harmonic mean, zero when both inputs are zero.
pub fn f_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// Ground truth with its distance map precomputed, for repeated matching.
#[derive(Debug, Clone)]
pub struct CenterlineTarget {
    gt: BinaryMask,
    gt_distance: Vec<f64>,
    tolerance: Tolerance,
}

impl CenterlineTarget {
    pub fn new(gt: BinaryMask, tolerance: Tolerance) -> Result<Self, EvalError> {
        if !(tolerance.distance.is_finite() && tolerance.distance >= 0.0) {
            return Err(EvalError::Parameter(format!("d* must be >= 0, got {}", tolerance.distance)));
        }
        let gt_distance = distance_transform(&gt, tolerance.metric);
        Ok(Self { gt, gt_distance, tolerance })
    }

    pub fn gt(&self) -> &BinaryMask {
        &self.gt
    }

    pub fn score(&self, det: &BinaryMask) -> Result<Prf, EvalError> {
        check_same_dims(det, &self.gt)?;
        let d_star = self.tolerance.distance + 1e-9;
        let n_det = det.count();
        let n_gt = self.gt.count();
        if n_det == 0 || n_gt == 0 {
            return Ok(if n_det == 0 && n_gt == 0 {
                Prf { precision: 1.0, recall: 1.0, f: 1.0 }
            } else {
                Prf::default()
            });
        }
        let tp_det = det.bits().iter().zip(&self.gt_distance).filter(|(&b, &d)| b && d <= d_star).count();
        let det_distance = distance_transform(det, self.tolerance.metric);
        let tp_gt = self.gt.bits().iter().zip(&det_distance).filter(|(&b, &d)| b && d <= d_star).count();
        Ok(Prf::new(tp_det as f64 / n_det as f64, tp_gt as f64 / n_gt as f64))
    }
}

/// Precision, recall and F of a detected centerline against ground truth,
/// counting matches within the tolerance distance.
pub fn centerline_prf(det: &BinaryMask, gt: &BinaryMask, tolerance: Tolerance) -> Result<Prf, EvalError> {
    check_same_dims(det, gt)?;
    CenterlineTarget::new(gt.clone(), tolerance)?.score(det)
}

/// The threshold grid `{1/steps, 2/steps, …, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdGrid {
    pub steps: usize,
}

impl Default for ThresholdGrid {
    /// 0.01 to 1.00 in steps of 0.01.
    fn default() -> Self {
        Self { steps: 100 }
    }
}

impl ThresholdGrid {
    pub fn values(&self) -> Vec<f64> {
        (1..=self.steps).map(|k| k as f64 / self.steps as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub t: f64,
    pub average: Prf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub t_star: f64,
    /// Dataset averages at `t*`.
    pub best: Prf,
    /// Per-image scores at `t*`, in input order.
    pub per_image: Vec<Prf>,
    /// Dataset averages at every grid threshold.
    pub curve: Vec<SweepRow>,
}

/// Index of the largest value; the earliest index wins ties.
pub fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Sweep the grid over a set of normalized response maps and pick the
/// threshold with the highest dataset-average F (smallest `t` on ties).
pub fn sweep_thresholds(
    items: &[(GrayImage, BinaryMask)],
    tolerance: Tolerance,
    grid: ThresholdGrid,
) -> Result<SweepResult, EvalError> {
    if items.is_empty() {
        return Err(EvalError::Parameter("threshold sweep over an empty image set".into()));
    }
    if grid.steps == 0 {
        return Err(EvalError::Parameter("threshold grid needs at least one step".into()));
    }
    let ts = grid.values();
    // scores[image][threshold]
    let scores: Vec<Vec<Prf>> = items
        .par_iter()
        .map(|(resp, gt)| {
            let target = CenterlineTarget::new(gt.clone(), tolerance)?;
            ts.iter().map(|&t| target.score(&threshold_map(resp, t)?)).collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;

    let curve: Vec<SweepRow> = ts
        .iter()
        .enumerate()
        .map(|(k, &t)| SweepRow {
            t,
            average: Prf {
                precision: mean(scores.iter().map(|s| s[k].precision)),
                recall: mean(scores.iter().map(|s| s[k].recall)),
                f: mean(scores.iter().map(|s| s[k].f)),
            },
        })
        .collect();
    let best_k = argmax_first(&curve.iter().map(|r| r.average.f).collect::<Vec<_>>());
    Ok(SweepResult {
        t_star: ts[best_k],
        best: curve[best_k].average,
        per_image: scores.iter().map(|s| s[best_k]).collect(),
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vline(col: usize) -> BinaryMask {
        BinaryMask::from_fn(30, 30, |x, _| x == col)
    }

    #[test]
    fn identical_masks_score_one() {
        let m = vline(10);
        for d in [0.0, 1.0, 3.0] {
            assert_eq!(
                centerline_prf(&m, &m, Tolerance::euclidean(d)).unwrap(),
                Prf { precision: 1.0, recall: 1.0, f: 1.0 }
            );
        }
    }

    #[test]
    fn offset_line_tolerance() {
        let (gt, det) = (vline(10), vline(12));
        assert_eq!(centerline_prf(&det, &gt, Tolerance::euclidean(3.0)).unwrap().f, 1.0);
        assert_eq!(centerline_prf(&det, &gt, Tolerance::euclidean(1.0)).unwrap().f, 0.0);
        // exactly at the tolerance counts as a match
        assert_eq!(centerline_prf(&det, &gt, Tolerance::euclidean(2.0)).unwrap().f, 1.0);
    }

    #[test]
    fn far_spurious_pixel() {
        let gt = BinaryMask::from_fn(120, 10, |x, y| y == 2 && x < 100);
        let mut det = gt.clone();
        det.set(110, 9, true);
        let s = centerline_prf(&det, &gt, Tolerance::euclidean(3.0)).unwrap();
        assert_eq!(s.recall, 1.0);
        assert!((s.precision - 100.0 / 101.0).abs() < 1e-15);
    }

    #[test]
    fn empty_cases() {
        let e = BinaryMask::empty(5, 5);
        let g = BinaryMask::from_fn(5, 5, |x, _| x == 2);
        assert_eq!(centerline_prf(&e, &g, Tolerance::euclidean(2.0)).unwrap(), Prf::default());
        assert_eq!(centerline_prf(&e, &e, Tolerance::euclidean(2.0)).unwrap().f, 1.0);
        assert!(centerline_prf(&e, &BinaryMask::empty(4, 5), Tolerance::euclidean(2.0)).is_err());
    }

    #[test]
    fn grid_is_hundredths() {
        let v = ThresholdGrid::default().values();
        assert_eq!(v.len(), 100);
        assert_eq!(v[0], 0.01);
        assert_eq!(v[99], 1.0);
        assert_eq!(v[49], 0.5);
    }

    #[test]
    fn sweep_exact_and_scaled_maps() {
        let gt = vline(7);
        let exact = GrayImage::from_fn(30, 30, |x, _| if x == 7 { 1.0 } else { 0.0 });
        let r = sweep_thresholds(&[(exact.clone(), gt.clone())], Tolerance::euclidean(2.0), ThresholdGrid::default())
            .unwrap();
        assert_eq!(r.t_star, 0.01);
        assert_eq!(r.best.f, 1.0);
        assert!(r.curve.iter().all(|row| row.average.f == 1.0));

        let half = exact.map(|v| v * 0.5);
        let r = sweep_thresholds(&[(half, gt)], Tolerance::euclidean(2.0), ThresholdGrid::default()).unwrap();
        assert_eq!(r.t_star, 0.01);
        for row in &r.curve {
            assert_eq!(row.average.f, if row.t <= 0.5 { 1.0 } else { 0.0 }, "t={}", row.t);
        }
    }

    #[test]
    fn sweep_matches_exhaustive_recomputation() {
        // image A: true line at 0.3, clutter at 0.25; image B: true line at 0.55, clutter at 0.45
        let gt = BinaryMask::from_fn(40, 40, |x, _| x == 20);
        let map = |line: f64, clutter: f64| {
            GrayImage::from_fn(40, 40, |x, y| {
                if x == 20 {
                    line
                } else if x == 5 && y < 30 {
                    clutter
                } else {
                    0.0
                }
            })
        };
        let items = vec![(map(0.3, 0.25), gt.clone()), (map(0.55, 0.45), gt.clone())];
        let tol = Tolerance::euclidean(2.0);
        let r = sweep_thresholds(&items, tol, ThresholdGrid::default()).unwrap();

        let mut best = (0.0, f64::NEG_INFINITY);
        for k in 1..=100 {
            let t = k as f64 / 100.0;
            let avg = items
                .iter()
                .map(|(m, g)| centerline_prf(&threshold_map(m, t).unwrap(), g, tol).unwrap().f)
                .sum::<f64>()
                / 2.0;
            if avg > best.1 {
                best = (t, avg);
            }
        }
        assert_eq!(r.t_star, best.0);
        assert_eq!(r.best.f, best.1);
        assert!(r.t_star > 0.25 && r.t_star <= 0.3);
    }

    proptest! {
        #[test]
        fn swapping_roles_swaps_precision_and_recall(
            a in proptest::collection::vec(any::<bool>(), 144),
            b in proptest::collection::vec(any::<bool>(), 144),
            d in 0.0f64..4.0,
        ) {
            let ma = BinaryMask::new(12, 12, a).unwrap();
            let mb = BinaryMask::new(12, 12, b).unwrap();
            let ab = centerline_prf(&ma, &mb, Tolerance::euclidean(d)).unwrap();
            let ba = centerline_prf(&mb, &ma, Tolerance::euclidean(d)).unwrap();
            prop_assert_eq!(ab.precision, ba.recall);
            prop_assert_eq!(ab.recall, ba.precision);
            prop_assert!((0.0..=1.0).contains(&ab.f));
        }
    }
}
