//! Bar-selective COSFIRE filters.
//!
//! A filter is a set of afferent tuples `(δ, σ, ρ, φ)`: take the rectified
//! DoG response with polarity `δ` and scale `σ`, blur it with
//! `σ' = σ₀ + α·ρ`, and move the evidence found at polar offset `(ρ, φ)`
//! onto the filter center. The filter response is the geometric mean of the
//! per-tuple maps, so it is non-zero only where every afferent fires.
//!
//! `φ` is a counterclockwise angle in the mathematical plane; on the raster
//! the keypoint sits at `(cx + ρ·cos φ, cy − ρ·sin φ)`.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dog::{dog_response, DogSpec, Polarity, ResponseBank};
use crate::raster::{shift_offset, GrayImage, RasterError};

#[derive(Debug, Error)]
pub enum FilterError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("configuration failed: {0}")]
    Configuration(String),
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error("malformed filter document: {0}")]
    Format(#[from] serde_json::Error),
}

/// Wrap an angle into `[0, 2π)`.
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Round to nine significant digits, the precision of the JSON format.
pub fn round_sig9(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{v:.8e}").parse().unwrap_or(v)
}

fn ser_sig9<S: serde::Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig9(*v))
}

/// One afferent: which DoG to read and where its evidence is collected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tuple {
    #[serde(rename = "delta")]
    pub polarity: Polarity,
    #[serde(serialize_with = "ser_sig9")]
    pub sigma: f64,
    #[serde(serialize_with = "ser_sig9")]
    pub rho: f64,
    #[serde(serialize_with = "ser_sig9")]
    pub phi: f64,
}

impl Tuple {
    pub fn new(polarity: Polarity, sigma: f64, rho: f64, phi: f64) -> Self {
        Self { polarity, sigma, rho, phi: normalize_angle(phi) }
    }

    pub fn dog_spec(&self) -> DogSpec {
        DogSpec { polarity: self.polarity, sigma: self.sigma }
    }

    fn canonical_cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.rho
            .total_cmp(&other.rho)
            .then(self.phi.total_cmp(&other.phi))
            .then(self.polarity.cmp(&other.polarity))
            .then(self.sigma.total_cmp(&other.sigma))
    }
}

/// Blur hyperparameters: `σ' = sigma0 + alpha·ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlurParams {
    #[serde(serialize_with = "ser_sig9")]
    pub sigma0: f64,
    #[serde(serialize_with = "ser_sig9")]
    pub alpha: f64,
}

impl BlurParams {
    pub fn sigma_at(&self, rho: f64) -> f64 {
        self.sigma0 + self.alpha * rho
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CosfireFilter {
    #[serde(flatten)]
    blur: BlurParams,
    tuples: Vec<Tuple>,
}

#[derive(Deserialize)]
struct RawFilter {
    #[serde(flatten)]
    blur: BlurParams,
    tuples: Vec<Tuple>,
}

impl<'de> Deserialize<'de> for CosfireFilter {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = RawFilter::deserialize(d)?;
        CosfireFilter::new(raw.tuples, raw.blur.sigma0, raw.blur.alpha).map_err(serde::de::Error::custom)
    }
}

impl CosfireFilter {
    /// Validates the tuples and stores them in canonical order
    /// (by `ρ`, then `φ`).
    pub fn new(mut tuples: Vec<Tuple>, sigma0: f64, alpha: f64) -> Result<Self, FilterError> {
        if tuples.is_empty() {
            return Err(FilterError::Parameter("a filter needs at least one tuple".into()));
        }
        if !(sigma0.is_finite() && sigma0 >= 0.0) || !(alpha.is_finite() && alpha >= 0.0) {
            return Err(FilterError::Parameter(format!("sigma0 and alpha must be >= 0, got {sigma0}, {alpha}")));
        }
        let blur = BlurParams { sigma0, alpha };
        for t in &mut tuples {
            if !(t.sigma.is_finite() && t.sigma > 0.0) {
                return Err(FilterError::Parameter(format!("tuple sigma must be positive, got {}", t.sigma)));
            }
            if !(t.rho.is_finite() && t.rho >= 0.0) {
                return Err(FilterError::Parameter(format!("tuple rho must be >= 0, got {}", t.rho)));
            }
            if !t.phi.is_finite() {
                return Err(FilterError::Parameter("tuple phi must be finite".into()));
            }
            t.phi = normalize_angle(t.phi);
            if blur.sigma_at(t.rho) <= 0.0 {
                return Err(FilterError::Parameter(format!(
                    "blur sigma0 + alpha*rho must be positive at rho={}",
                    t.rho
                )));
            }
        }
        tuples.sort_by(Tuple::canonical_cmp);
        Ok(Self { blur, tuples })
    }

    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }

    pub fn blur(&self) -> BlurParams {
        self.blur
    }

    pub fn sigma0(&self) -> f64 {
        self.blur.sigma0
    }

    pub fn alpha(&self) -> f64 {
        self.blur.alpha
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// Same filter with every tuple replaced by `f(tuple)`.
    pub fn map_tuples(&self, f: impl Fn(&Tuple) -> Tuple) -> Result<Self, FilterError> {
        Self::new(self.tuples.iter().map(f).collect(), self.blur.sigma0, self.blur.alpha)
    }

    /// The `(DoG, blur σ)` pairs this filter reads from a [`ResponseBank`].
    pub fn bank_requests(&self) -> impl Iterator<Item = (DogSpec, f64)> + '_ {
        self.tuples.iter().map(|t| (t.dog_spec(), self.blur.sigma_at(t.rho)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("filter serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, FilterError> {
        Ok(serde_json::from_str(s)?)
    }
}

/// `B^ψ`: every polar angle advanced by `psi`.
pub fn rotate_filter(f: &CosfireFilter, psi: f64) -> CosfireFilter {
    f.map_tuples(|t| Tuple { phi: normalize_angle(t.phi + psi), ..*t }).expect("rotation preserves validity")
}

/// Dark canvas with a bright horizontal bar centered on the center pixel.
///
/// `length` and `width` must be odd (so the bar is symmetric about the
/// center pixel) and `width < length <= canvas`; `canvas` must be odd.
pub fn render_bar_prototype(length: usize, width: usize, canvas: usize) -> Result<GrayImage, FilterError> {
    if canvas.is_multiple_of(2) {
        return Err(FilterError::Parameter(format!("canvas must be odd, got {canvas}")));
    }
    if length.is_multiple_of(2) || width.is_multiple_of(2) {
        return Err(FilterError::Parameter(format!("bar length and width must be odd, got {length}x{width}")));
    }
    if width == 0 || width >= length || length > canvas {
        return Err(FilterError::Parameter(format!(
            "need 0 < width < length <= canvas, got width={width} length={length} canvas={canvas}"
        )));
    }
    let c = canvas / 2;
    let (hl, hw) = (length / 2, width / 2);
    Ok(GrayImage::from_fn(canvas, canvas, |x, y| if x.abs_diff(c) <= hl && y.abs_diff(c) <= hw { 1.0 } else { 0.0 }))
}

/// Keypoint search settings for [`configure_with`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigureOptions {
    /// Circle radii in pixels, ascending; `0` probes the center pixel.
    pub radii: Vec<f64>,
    /// Keypoints must exceed this fraction of the global DoG maximum.
    pub fraction: f64,
    /// Equiangular samples per circle.
    pub samples: usize,
    /// Maxima closer than this angle (radians) are merged.
    pub merge_window: f64,
    pub sigma0: f64,
    pub alpha: f64,
}

impl ConfigureOptions {
    pub const DEFAULT_FRACTION: f64 = 0.2;
    pub const DEFAULT_SAMPLES: usize = 360;
    pub const DEFAULT_MERGE_WINDOW: f64 = TAU / 16.0;

    pub fn new(radii: Vec<f64>, sigma0: f64, alpha: f64) -> Self {
        Self {
            radii,
            fraction: Self::DEFAULT_FRACTION,
            samples: Self::DEFAULT_SAMPLES,
            merge_window: Self::DEFAULT_MERGE_WINDOW,
            sigma0,
            alpha,
        }
    }
}

/// `{0, step, 2·step, …}` up to and including `rho_max` (within rounding).
pub fn radii_up_to(rho_max: f64, step: f64) -> Vec<f64> {
    assert!(step > 0.0, "radius step must be positive");
    let n = (rho_max / step + 1e-9).floor() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

/// Configure with the default search settings.
pub fn configure(
    prototype: &GrayImage,
    spec: DogSpec,
    radii: &[f64],
    fraction: f64,
    sigma0: f64,
    alpha: f64,
) -> Result<CosfireFilter, FilterError> {
    let opts = ConfigureOptions { fraction, ..ConfigureOptions::new(radii.to_vec(), sigma0, alpha) };
    configure_with(prototype, spec, &opts)
}

/// Derive a filter from a prototype: probe the rectified DoG response on
/// concentric circles around the prototype center and keep one tuple per
/// dominant angular maximum.
pub fn configure_with(
    prototype: &GrayImage,
    spec: DogSpec,
    opts: &ConfigureOptions,
) -> Result<CosfireFilter, FilterError> {
    let (w, h) = prototype.dims();
    if w % 2 == 0 || h % 2 == 0 {
        return Err(FilterError::Parameter(format!("prototype needs odd dimensions, got {w}x{h}")));
    }
    if opts.radii.is_empty() {
        return Err(FilterError::Parameter("no radii given".into()));
    }
    if opts.radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) || opts.radii.windows(2).any(|p| p[1] < p[0]) {
        return Err(FilterError::Parameter("radii must be non-negative and ascending".into()));
    }
    if !(opts.fraction > 0.0 && opts.fraction <= 1.0) {
        return Err(FilterError::Parameter(format!("fraction must lie in (0, 1], got {}", opts.fraction)));
    }
    if opts.samples < 3 {
        return Err(FilterError::Parameter("need at least 3 samples per circle".into()));
    }

    let response = dog_response(prototype, spec)?;
    let peak = response.max_value();
    if peak <= 0.0 {
        return Err(FilterError::Configuration(format!(
            "the prototype produces no response to DoG (polarity {:+}, sigma {})",
            spec.polarity.sign(),
            spec.sigma
        )));
    }
    let threshold = opts.fraction * peak;
    let (cx, cy) = ((w / 2) as f64, (h / 2) as f64);

    let mut tuples = Vec::new();
    for &rho in &opts.radii {
        if rho == 0.0 {
            if response.get(w / 2, h / 2) > threshold {
                tuples.push(Tuple::new(spec.polarity, spec.sigma, 0.0, 0.0));
            }
            continue;
        }
        let n = opts.samples;
        let step = TAU / n as f64;
        let values: Vec<f64> = (0..n)
            .map(|k| {
                let a = k as f64 * step;
                response.sample_bilinear(cx + rho * a.cos(), cy - rho * a.sin())
            })
            .collect();
        for k in circle_maxima(&values, threshold, opts.merge_window / step) {
            tuples.push(Tuple::new(spec.polarity, spec.sigma, rho, k as f64 * step));
        }
    }

    if tuples.is_empty() {
        return Err(FilterError::Configuration(format!(
            "no keypoint above {:.3} x max on radii {:?}",
            opts.fraction, opts.radii
        )));
    }
    CosfireFilter::new(tuples, opts.sigma0, opts.alpha)
}

/// Indices of circular local maxima above `threshold`, strongest first,
/// with maxima closer than `merge` samples to a stronger one dropped.
fn circle_maxima(values: &[f64], threshold: f64, merge: f64) -> Vec<usize> {
    let n = values.len();
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&k| {
            let v = values[k];
            v > threshold && v >= values[(k + n - 1) % n] && v >= values[(k + 1) % n]
        })
        .collect();
    peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for k in peaks {
        let far = kept.iter().all(|&j| {
            let d = k.abs_diff(j);
            (d.min(n - d) as f64) >= merge
        });
        if far {
            kept.push(k);
        }
    }
    kept
}

/// Geometric mean of the shifted, blurred afferent maps held in `bank`.
///
/// Pixels where any afferent map is zero (or falls outside the raster after
/// the shift) respond with exactly zero.
pub fn response_from_bank(f: &CosfireFilter, bank: &ResponseBank, dims: (usize, usize)) -> GrayImage {
    let (w, h) = dims;
    let maps: Vec<(&GrayImage, isize, isize)> = f
        .tuples
        .iter()
        .map(|t| {
            let map = bank
                .blurred(t.dog_spec(), f.blur.sigma_at(t.rho))
                .expect("response bank is missing a map requested by the filter");
            assert_eq!(map.dims(), dims, "bank built for a different image");
            let (dx, dy) = shift_offset(t.rho, PI - t.phi);
            (map, dx, dy)
        })
        .collect();
    let inv_n = 1.0 / maps.len() as f64;

    let mut out = vec![0.0; w * h];
    out.par_chunks_mut(w).enumerate().for_each(|(y, row)| {
        let y = y as isize;
        for (x, o) in row.iter_mut().enumerate() {
            let x = x as isize;
            let mut log_sum = 0.0;
            let mut zero = false;
            for &(map, dx, dy) in &maps {
                let (sx, sy) = (x - dx, y - dy);
                if sx < 0 || sy < 0 || sx >= w as isize || sy >= h as isize {
                    zero = true;
                    break;
                }
                let v = map.get(sx as usize, sy as usize);
                if v <= 0.0 {
                    zero = true;
                    break;
                }
                log_sum += v.ln();
            }
            *o = if zero { 0.0 } else { (log_sum * inv_n).exp() };
        }
    });
    GrayImage::new(w, h, out).expect("dimensions preserved")
}

/// `r_B`: the filter response on `img`.
pub fn response(f: &CosfireFilter, img: &GrayImage) -> Result<GrayImage, FilterError> {
    let bank = ResponseBank::build(img, f.bank_requests())?;
    Ok(response_from_bank(f, &bank, img.dims()))
}
