//! Push-pull inhibited curvilinear operator.
//!
//! The inhibitory filter mirrors the excitatory one with flipped polarity and
//! DoG scales multiplied by `λ`. At one orientation the response is
//! `max(0, r_B − ξ·r_inh)`; the multi-orientation response is the pixelwise
//! maximum over the orientation set.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cosfire::{response_from_bank, rotate_filter, CosfireFilter, FilterError, Tuple};
use crate::dog::ResponseBank;
use crate::raster::GrayImage;

/// `B̂_λ`: flipped polarity, DoG sigma scaled by `lambda`.
pub fn derive_inhibitor(b: &CosfireFilter, lambda: f64) -> Result<CosfireFilter, FilterError> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(FilterError::Parameter(format!("lambda must be positive, got {lambda}")));
    }
    b.map_tuples(|t| Tuple { polarity: t.polarity.flipped(), sigma: lambda * t.sigma, ..*t })
}

/// `k·π/count` for `k = 0..count`.
pub fn uniform_orientations(count: usize) -> Vec<f64> {
    (0..count).map(|k| k as f64 * PI / count as f64).collect()
}

/// Pixelwise `max(0, excitatory − xi·inhibitory)`.
pub fn push_pull(excitatory: &GrayImage, inhibitory: &GrayImage, xi: f64) -> GrayImage {
    excitatory.zip_map(inhibitory, |e, i| (e - xi * i).max(0.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RusticoOperator {
    excitatory: CosfireFilter,
    inhibitory: CosfireFilter,
    lambda: f64,
    xi: f64,
    orientations: Vec<f64>,
}

impl RusticoOperator {
    pub const DEFAULT_ORIENTATIONS: usize = 12;

    pub fn new(excitatory: CosfireFilter, lambda: f64, xi: f64, orientations: Vec<f64>) -> Result<Self, FilterError> {
        if !(xi.is_finite() && xi >= 0.0) {
            return Err(FilterError::Parameter(format!("xi must be >= 0, got {xi}")));
        }
        if orientations.is_empty() {
            return Err(FilterError::Parameter("orientation set is empty".into()));
        }
        if orientations.iter().any(|p| !(0.0..PI).contains(p)) {
            return Err(FilterError::Parameter("orientations must lie in [0, pi)".into()));
        }
        let mut sorted = orientations.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(FilterError::Parameter("orientations must be distinct".into()));
        }
        let inhibitory = derive_inhibitor(&excitatory, lambda)?;
        Ok(Self { excitatory, inhibitory, lambda, xi, orientations })
    }

    /// Operator over `count` evenly spaced orientations in `[0, π)`.
    pub fn with_orientation_count(
        excitatory: CosfireFilter,
        lambda: f64,
        xi: f64,
        count: usize,
    ) -> Result<Self, FilterError> {
        Self::new(excitatory, lambda, xi, uniform_orientations(count))
    }

    pub fn excitatory(&self) -> &CosfireFilter {
        &self.excitatory
    }

    pub fn inhibitory(&self) -> &CosfireFilter {
        &self.inhibitory
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn orientations(&self) -> &[f64] {
        &self.orientations
    }

    /// Same operator with a different inhibition strength.
    pub fn with_xi(&self, xi: f64) -> Result<Self, FilterError> {
        Self::new(self.excitatory.clone(), self.lambda, xi, self.orientations.clone())
    }

    /// All DoG/blur maps needed by every orientation of both filters.
    /// Rotation only moves `φ`, so one bank serves the whole orientation set.
    pub fn build_bank(&self, img: &GrayImage) -> Result<ResponseBank, FilterError> {
        let requests = self
            .excitatory
            .bank_requests()
            .chain((self.xi > 0.0).then(|| self.inhibitory.bank_requests()).into_iter().flatten());
        Ok(ResponseBank::build(img, requests)?)
    }

    fn response_with_bank(&self, psi: f64, bank: &ResponseBank, dims: (usize, usize)) -> GrayImage {
        let exc = response_from_bank(&rotate_filter(&self.excitatory, psi), bank, dims);
        if self.xi == 0.0 {
            return exc;
        }
        let inh = response_from_bank(&rotate_filter(&self.inhibitory, psi), bank, dims);
        push_pull(&exc, &inh, self.xi)
    }

    /// Single-orientation response at offset `psi`.
    pub fn response_at(&self, psi: f64, img: &GrayImage) -> Result<GrayImage, FilterError> {
        let bank = self.build_bank(img)?;
        Ok(self.response_with_bank(psi, &bank, img.dims()))
    }

    /// Pixelwise maximum of the single-orientation responses.
    pub fn multi_orientation_response(&self, img: &GrayImage) -> Result<GrayImage, FilterError> {
        let bank = self.build_bank(img)?;
        let maps: Vec<GrayImage> =
            self.orientations.par_iter().map(|&psi| self.response_with_bank(psi, &bank, img.dims())).collect();
        Ok(pixelwise_max(maps))
    }

    pub fn to_document(&self) -> OperatorDocument {
        OperatorDocument {
            filter: self.excitatory.clone(),
            lambda: self.lambda,
            xi: self.xi,
            psi_count: self.orientations.len(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("operator serializes")
    }

    /// Parse an operator document; the inhibitory filter is re-derived.
    pub fn from_json(s: &str) -> Result<Self, FilterError> {
        let doc: OperatorDocument = serde_json::from_str(s)?;
        doc.into_operator()
    }
}

/// Multi-orientation response of the plain excitatory filter.
pub fn multi_orientation_cosfire(
    f: &CosfireFilter,
    orientations: &[f64],
    img: &GrayImage,
) -> Result<GrayImage, FilterError> {
    let bank = ResponseBank::build(img, f.bank_requests())?;
    let maps: Vec<GrayImage> =
        orientations.par_iter().map(|&psi| response_from_bank(&rotate_filter(f, psi), &bank, img.dims())).collect();
    if maps.is_empty() {
        return Err(FilterError::Parameter("orientation set is empty".into()));
    }
    Ok(pixelwise_max(maps))
}

fn pixelwise_max(maps: Vec<GrayImage>) -> GrayImage {
    let mut iter = maps.into_iter();
    let first = iter.next().expect("at least one map");
    iter.fold(first, |acc, m| acc.zip_map(&m, f64::max))
}

/// On-disk operator: the excitatory filter fields plus the push-pull
/// parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorDocument {
    #[serde(flatten)]
    pub filter: CosfireFilter,
    pub lambda: f64,
    pub xi: f64,
    pub psi_count: usize,
}

impl OperatorDocument {
    pub fn into_operator(self) -> Result<RusticoOperator, FilterError> {
        RusticoOperator::with_orientation_count(self.filter, self.lambda, self.xi, self.psi_count)
    }
}
