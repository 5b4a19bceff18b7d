//! Difference-of-Gaussians afferents.
//!
//! A DoG is the unit-mass inner Gaussian (std `0.5σ`) minus the unit-mass
//! outer Gaussian (std `σ`), both sampled on the same `ceil(3σ)` support, so
//! constant regions produce (nearly) zero response.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::raster::{
    convolve_separable, gaussian_blur, gaussian_kernel_with_radius, gaussian_radius, gaussian_taps, rectify, GrayImage,
    Kernel2D, RasterError,
};

/// Ratio between the inner and outer Gaussian standard deviations.
pub const INNER_SIGMA_RATIO: f64 = 0.5;

/// Contrast polarity of a DoG afferent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    /// Bright center on dark surround (`δ = +1`).
    CenterOn,
    /// Dark center on bright surround (`δ = -1`).
    CenterOff,
}

impl Polarity {
    pub fn sign(self) -> i8 {
        match self {
            Polarity::CenterOn => 1,
            Polarity::CenterOff => -1,
        }
    }

    pub fn from_sign(sign: i8) -> Option<Self> {
        match sign {
            1 => Some(Polarity::CenterOn),
            -1 => Some(Polarity::CenterOff),
            _ => None,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Polarity::CenterOn => Polarity::CenterOff,
            Polarity::CenterOff => Polarity::CenterOn,
        }
    }
}

impl Serialize for Polarity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i8(self.sign())
    }
}

impl<'de> Deserialize<'de> for Polarity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = i8::deserialize(d)?;
        Polarity::from_sign(v).ok_or_else(|| serde::de::Error::custom(format!("polarity must be +1 or -1, got {v}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DogSpec {
    pub polarity: Polarity,
    /// Outer Gaussian standard deviation, pixels.
    pub sigma: f64,
}

impl DogSpec {
    pub fn new(polarity: Polarity, sigma: f64) -> Result<Self, RasterError> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(RasterError::Parameter(format!("DoG sigma must be positive, got {sigma}")));
        }
        Ok(Self { polarity, sigma })
    }

    pub fn inner_sigma(&self) -> f64 {
        INNER_SIGMA_RATIO * self.sigma
    }

    pub fn radius(&self) -> usize {
        gaussian_radius(self.sigma)
    }

    fn validate(&self) -> Result<(), RasterError> {
        Self::new(self.polarity, self.sigma).map(|_| ())
    }
}

/// 2-D DoG mask of radius `ceil(3σ)`.
pub fn dog_kernel(spec: DogSpec) -> Result<Kernel2D, RasterError> {
    spec.validate()?;
    let r = spec.radius();
    let inner = gaussian_kernel_with_radius(spec.inner_sigma(), r)?;
    let outer = gaussian_kernel_with_radius(spec.sigma, r)?;
    let on: Vec<f64> = inner.weights().iter().zip(outer.weights()).map(|(a, b)| a - b).collect();
    let k = Kernel2D::new(r, on)?;
    Ok(match spec.polarity {
        Polarity::CenterOn => k,
        Polarity::CenterOff => k.negated(),
    })
}

/// Rectified DoG response, computed as the difference of two separable
/// Gaussian blurs.
pub fn dog_response(img: &GrayImage, spec: DogSpec) -> Result<GrayImage, RasterError> {
    spec.validate()?;
    let r = spec.radius();
    let inner = convolve_separable(img, &gaussian_taps(spec.inner_sigma(), r)?)?;
    let outer = convolve_separable(img, &gaussian_taps(spec.sigma, r)?)?;
    let sign = f64::from(spec.polarity.sign());
    Ok(rectify(&inner.zip_map(&outer, |a, b| sign * (a - b))))
}

/// Canonical cache key for a real parameter: rounded to 1e-6.
pub fn canonical_key(v: f64) -> i64 {
    (v * 1e6).round() as i64
}

type BlurKey = (Polarity, i64, i64);

/// Per-image store of DoG responses and their blurred versions.
///
/// Each distinct `(δ, σ)` is filtered once and each distinct
/// `(δ, σ, σ_blur)` is blurred once, however many tuples, orientations or
/// filters (excitatory and inhibitory) ask for it. The bank is filled up
/// front and read-only afterwards, so concurrent readers need no locking.
#[derive(Debug)]
pub struct ResponseBank {
    dog: HashMap<(Polarity, i64), GrayImage>,
    blurred: HashMap<BlurKey, GrayImage>,
    dog_computations: AtomicUsize,
    blur_computations: AtomicUsize,
}

impl ResponseBank {
    /// Compute every map needed for the `(spec, blur sigma)` requests.
    pub fn build(img: &GrayImage, requests: impl IntoIterator<Item = (DogSpec, f64)>) -> Result<Self, RasterError> {
        let mut dog_specs: Vec<DogSpec> = Vec::new();
        let mut blur_reqs: Vec<(DogSpec, f64)> = Vec::new();
        let mut seen_dog = std::collections::HashSet::new();
        let mut seen_blur = std::collections::HashSet::new();
        for (spec, blur) in requests {
            spec.validate()?;
            if !(blur.is_finite() && blur > 0.0) {
                return Err(RasterError::Parameter(format!("blur sigma must be positive, got {blur}")));
            }
            if seen_dog.insert((spec.polarity, canonical_key(spec.sigma))) {
                dog_specs.push(spec);
            }
            if seen_blur.insert((spec.polarity, canonical_key(spec.sigma), canonical_key(blur))) {
                blur_reqs.push((spec, blur));
            }
        }

        let dog_computations = AtomicUsize::new(0);
        let blur_computations = AtomicUsize::new(0);

        let dog_maps: Vec<GrayImage> = dog_specs
            .par_iter()
            .map(|&s| {
                dog_computations.fetch_add(1, Ordering::Relaxed);
                dog_response(img, s)
            })
            .collect::<Result<_, _>>()?;
        let dog: HashMap<_, _> = dog_specs.iter().map(|s| (s.polarity, canonical_key(s.sigma))).zip(dog_maps).collect();

        let blurred_maps: Vec<GrayImage> = blur_reqs
            .par_iter()
            .map(|(s, b)| {
                blur_computations.fetch_add(1, Ordering::Relaxed);
                gaussian_blur(&dog[&(s.polarity, canonical_key(s.sigma))], *b)
            })
            .collect::<Result<_, _>>()?;
        let blurred = blur_reqs
            .iter()
            .map(|(s, b)| (s.polarity, canonical_key(s.sigma), canonical_key(*b)))
            .zip(blurred_maps)
            .collect();

        Ok(Self { dog, blurred, dog_computations, blur_computations })
    }

    pub fn dog(&self, spec: DogSpec) -> Option<&GrayImage> {
        self.dog.get(&(spec.polarity, canonical_key(spec.sigma)))
    }

    pub fn blurred(&self, spec: DogSpec, blur_sigma: f64) -> Option<&GrayImage> {
        self.blurred.get(&(spec.polarity, canonical_key(spec.sigma), canonical_key(blur_sigma)))
    }

    /// Number of DoG filterings performed while building the bank.
    pub fn dog_computations(&self) -> usize {
        self.dog_computations.load(Ordering::Relaxed)
    }

    pub fn blur_computations(&self) -> usize {
        self.blur_computations.load(Ordering::Relaxed)
    }
}
