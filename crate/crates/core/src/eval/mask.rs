use std::path::Path;

use image::{GrayImage as Luma8Image, ImageBuffer, Luma};

use super::EvalError;
use crate::raster::{Channel, GrayImage, RasterError};

/// One boolean per pixel, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, EvalError> {
        if width == 0 || height == 0 || bits.len() != width * height {
            return Err(EvalError::Shape(format!("{} bits for {width}x{height}", bits.len())));
        }
        Ok(Self { width, height, bits })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self { width, height, bits: vec![false; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self { width, height, bits }
    }

    /// Pixels with intensity above one half.
    pub fn from_image(img: &GrayImage) -> Self {
        Self { width: img.width(), height: img.height(), bits: img.data().iter().map(|&v| v > 0.5).collect() }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, RasterError> {
        Ok(Self::from_image(&GrayImage::load(path, Channel::Luminance)?))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    /// Out-of-raster reads are background.
    #[inline]
    pub fn get_or_false(&self, x: isize, y: isize) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height && self.get(x as usize, y as usize)
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn complement(&self) -> Self {
        Self { width: self.width, height: self.height, bits: self.bits.iter().map(|b| !b).collect() }
    }

    pub fn and(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a && b)
    }

    pub fn or(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a || b)
    }

    fn combine(&self, other: &Self, f: impl Fn(bool, bool) -> bool) -> Self {
        assert_eq!(self.dims(), other.dims(), "mask dimensions differ");
        Self {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn to_luma8(&self) -> Luma8Image {
        ImageBuffer::from_fn(self.width as u32, self.height as u32, |x, y| {
            Luma([if self.get(x as usize, y as usize) { 255 } else { 0 }])
        })
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<(), RasterError> {
        self.to_luma8().save_with_format(path, image::ImageFormat::Png)?;
        Ok(())
    }
}

pub(crate) fn check_same_dims(a: &BinaryMask, b: &BinaryMask) -> Result<(), EvalError> {
    if a.dims() != b.dims() {
        return Err(EvalError::DimensionMismatch { left: a.dims(), right: b.dims() });
    }
    Ok(())
}

/// Set where `resp >= t`; `t` must lie in `(0, 1]`.
pub fn threshold_map(resp: &GrayImage, t: f64) -> Result<BinaryMask, EvalError> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(EvalError::Parameter(format!("threshold must lie in (0, 1], got {t}")));
    }
    Ok(BinaryMask { width: resp.width(), height: resp.height(), bits: resp.data().iter().map(|&v| v >= t).collect() })
}
