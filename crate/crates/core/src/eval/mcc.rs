use serde::{Deserialize, Serialize};

use super::mask::check_same_dims;
use super::{BinaryMask, EvalError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl Confusion {
    pub fn count(pred: &BinaryMask, gt: &BinaryMask, fov: Option<&BinaryMask>) -> Result<Self, EvalError> {
        check_same_dims(pred, gt)?;
        if let Some(f) = fov {
            check_same_dims(pred, f)?;
        }
        let mut c = Confusion::default();
        for (i, (&p, &g)) in pred.bits().iter().zip(gt.bits()).enumerate() {
            if fov.is_some_and(|f| !f.bits()[i]) {
                continue;
            }
            match (p, g) {
                (true, true) => c.tp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        Ok(c)
    }

    /// Matthews correlation; 0 when any marginal is empty.
    pub fn mcc(&self) -> f64 {
        let (tp, tn, fp, fn_) = (self.tp as f64, self.tn as f64, self.fp as f64, self.fn_ as f64);
        let denom = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
        if denom == 0.0 {
            return 0.0;
        }
        ((tp * tn - fp * fn_) / denom.sqrt()).clamp(-1.0, 1.0)
    }
}

/// Matthews correlation coefficient, counted inside `fov` when given.
pub fn mcc(pred: &BinaryMask, gt: &BinaryMask, fov: Option<&BinaryMask>) -> Result<f64, EvalError> {
    Ok(Confusion::count(pred, gt, fov)?.mcc())
}
