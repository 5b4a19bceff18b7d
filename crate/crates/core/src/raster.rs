//! Image container and the low-level kernels shared by every filter stage.
//!
//! Coordinates follow the image convention: `x` grows to the right, `y` grows
//! downward, and pixel `(x, y)` lives at `data[y * width + x]`. Polar angles
//! elsewhere in the crate are measured counterclockwise from the `+x` axis in
//! the mathematical plane (y up); [`shift`] is the one place that maps them
//! onto the raster.
//!
//! Border policy: convolution replicates edge pixels, translation fills
//! vacated pixels with zero.

use std::path::Path;

use image::{DynamicImage, GrayImage as Luma8Image, ImageBuffer, Luma};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("image is empty ({width}x{height})")]
    Empty { width: usize, height: usize },
    #[error("buffer length {len} does not match {width}x{height}")]
    Shape { width: usize, height: usize, len: usize },
    #[error("kernel side {side} exceeds four times the image side {image_side}")]
    DegenerateKernel { side: usize, image_side: usize },
    #[error("unsupported pixel layout: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Image(#[from] image::ImageError),
}

/// Which scalar to extract from a color image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Green,
    /// ITU-R BT.601 luma.
    #[default]
    Luminance,
}

/// A 2-D raster of real intensities, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::Empty { width, height });
        }
        if data.len() != width * height {
            return Err(RasterError::Shape { width, height, len: data.len() });
        }
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self { width, height, data: vec![value; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    /// Pixel value with coordinates clamped into the raster.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let cx = x.clamp(0, self.width as isize - 1) as usize;
        let cy = y.clamp(0, self.height as isize - 1) as usize;
        self.data[cy * self.width + cx]
    }

    /// Bilinear sample at a real-valued position; positions outside the
    /// raster are clamped to the border.
    pub fn sample_bilinear(&self, x: f64, y: f64) -> f64 {
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let (x0, y0) = (x0 as isize, y0 as isize);
        let v00 = self.get_clamped(x0, y0);
        let v10 = self.get_clamped(x0 + 1, y0);
        let v01 = self.get_clamped(x0, y0 + 1);
        let v11 = self.get_clamped(x0 + 1, y0 + 1);
        let top = v00 + fx * (v10 - v00);
        let bottom = v01 + fx * (v11 - v01);
        top + fy * (bottom - top)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { width: self.width, height: self.height, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// Pixelwise combination of two images of equal size.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.dims(), other.dims(), "image dimensions differ");
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Self { width: self.width, height: self.height, data }
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Location of the global maximum; the first occurrence in raster order
    /// wins ties.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, &v) in self.data.iter().enumerate() {
            if v > self.data[best] {
                best = i;
            }
        }
        (best % self.width, best / self.width)
    }

    /// Divide by the global maximum when it is positive.
    pub fn normalized_by_max(&self) -> Self {
        let m = self.max_value();
        if m > 0.0 {
            self.map(|v| v / m)
        } else {
            self.clone()
        }
    }

    /// `1 - v` for every pixel.
    pub fn inverted(&self) -> Self {
        self.map(|v| 1.0 - v)
    }

    /// Loads PNG, PGM/PPM (and the other formats enabled in the `image`
    /// dependency) into `[0, 1]` intensities.
    pub fn load(path: impl AsRef<Path>, channel: Channel) -> Result<Self, RasterError> {
        let img = image::ImageReader::open(path.as_ref())
            .map_err(image::ImageError::IoError)?
            .with_guessed_format()
            .map_err(image::ImageError::IoError)?
            .decode()?;
        Self::from_dynamic(&img, channel)
    }

    pub fn from_dynamic(img: &DynamicImage, channel: Channel) -> Result<Self, RasterError> {
        let (w, h) = (img.width() as usize, img.height() as usize);
        if w == 0 || h == 0 {
            return Err(RasterError::Empty { width: w, height: h });
        }
        let gray = img.color().channel_count() < 3;
        let data: Vec<f64> = if gray {
            img.to_luma32f().into_raw().into_iter().map(f64::from).collect()
        } else {
            let rgb = img.to_rgb32f();
            rgb.pixels()
                .map(|p| {
                    let [r, g, b] = p.0.map(f64::from);
                    match channel {
                        Channel::Green => g,
                        Channel::Luminance => 0.299 * r + 0.587 * g + 0.114 * b,
                    }
                })
                .collect()
        };
        let data = data.into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
        Self::new(w, h, data)
    }

    /// 8-bit rendering scaled by the global maximum (an all-zero or
    /// non-positive map renders black).
    pub fn to_luma8_scaled(&self) -> Luma8Image {
        let m = self.max_value();
        let scale = if m > 0.0 { 255.0 / m } else { 0.0 };
        ImageBuffer::from_fn(self.width as u32, self.height as u32, |x, y| {
            let v = (self.get(x as usize, y as usize) * scale).round().clamp(0.0, 255.0);
            Luma([v as u8])
        })
    }

    pub fn save_png_scaled(&self, path: impl AsRef<Path>) -> Result<(), RasterError> {
        self.to_luma8_scaled().save_with_format(path, image::ImageFormat::Png)?;
        Ok(())
    }
}

/// Square correlation mask with an odd side and the center tap at
/// `(radius, radius)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    radius: usize,
    weights: Vec<f64>,
}

impl Kernel2D {
    pub fn new(radius: usize, weights: Vec<f64>) -> Result<Self, RasterError> {
        let side = 2 * radius + 1;
        if weights.len() != side * side {
            return Err(RasterError::Shape { width: side, height: side, len: weights.len() });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(RasterError::Parameter("kernel weights must be finite".into()));
        }
        Ok(Self { radius, weights })
    }

    pub fn identity() -> Self {
        Self { radius: 0, weights: vec![1.0] }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at offset `(dx, dy)` from the center.
    pub fn at(&self, dx: isize, dy: isize) -> f64 {
        let r = self.radius as isize;
        self.weights[((dy + r) * (2 * r + 1) + dx + r) as usize]
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn negated(&self) -> Self {
        Self { radius: self.radius, weights: self.weights.iter().map(|w| -w).collect() }
    }
}

/// Truncation radius used for every Gaussian-derived kernel.
pub fn gaussian_radius(sigma: f64) -> usize {
    (3.0 * sigma).ceil() as usize
}

fn check_sigma(sigma: f64) -> Result<(), RasterError> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(RasterError::Parameter(format!("gaussian sigma must be positive, got {sigma}")))
    }
}

/// Unit-sum 1-D Gaussian taps over `[-radius, radius]`.
pub fn gaussian_taps(sigma: f64, radius: usize) -> Result<Vec<f64>, RasterError> {
    check_sigma(sigma)?;
    let r = radius as isize;
    let denom = 2.0 * sigma * sigma;
    let mut taps: Vec<f64> = (-r..=r).map(|i| (-((i * i) as f64) / denom).exp()).collect();
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    Ok(taps)
}

/// Isotropic Gaussian over a square support of the given radius, normalized
/// to unit sum.
pub fn gaussian_kernel_with_radius(sigma: f64, radius: usize) -> Result<Kernel2D, RasterError> {
    check_sigma(sigma)?;
    let r = radius as isize;
    let denom = 2.0 * sigma * sigma;
    let mut weights = Vec::with_capacity((2 * radius + 1).pow(2));
    for dy in -r..=r {
        for dx in -r..=r {
            weights.push((-((dx * dx + dy * dy) as f64) / denom).exp());
        }
    }
    let sum: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= sum);
    Kernel2D::new(radius, weights)
}

/// Isotropic Gaussian truncated at `ceil(3σ)`, normalized to unit sum.
pub fn gaussian_kernel(sigma: f64) -> Result<Kernel2D, RasterError> {
    check_sigma(sigma)?;
    gaussian_kernel_with_radius(sigma, gaussian_radius(sigma))
}

fn check_kernel_side(img: &GrayImage, side: usize) -> Result<(), RasterError> {
    let image_side = img.width.min(img.height);
    if side > 4 * image_side {
        return Err(RasterError::DegenerateKernel { side, image_side });
    }
    Ok(())
}

/// Direct 2-D correlation with edge-replicated borders.
pub fn convolve(img: &GrayImage, k: &Kernel2D) -> Result<GrayImage, RasterError> {
    check_kernel_side(img, k.side())?;
    let r = k.radius as isize;
    let (w, h) = (img.width as isize, img.height as isize);
    let mut out = Vec::with_capacity(img.data.len());
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            let mut ki = 0;
            for dy in -r..=r {
                let sy = (y + dy).clamp(0, h - 1) as usize * img.width;
                for dx in -r..=r {
                    let sx = (x + dx).clamp(0, w - 1) as usize;
                    acc += k.weights[ki] * img.data[sy + sx];
                    ki += 1;
                }
            }
            out.push(acc);
        }
    }
    GrayImage::new(img.width, img.height, out)
}

/// Separable correlation: `taps` applied along rows, then along columns,
/// with edge replication. Equivalent to [`convolve`] with the outer-product
/// kernel.
pub fn convolve_separable(img: &GrayImage, taps: &[f64]) -> Result<GrayImage, RasterError> {
    if taps.len().is_multiple_of(2) {
        return Err(RasterError::Parameter("separable kernel must have odd length".into()));
    }
    check_kernel_side(img, taps.len())?;
    let r = (taps.len() / 2) as isize;
    let (w, h) = (img.width, img.height);

    let mut rows = vec![0.0; w * h];
    let mut padded = vec![0.0; w + 2 * r as usize];
    for y in 0..h {
        let src = &img.data[y * w..(y + 1) * w];
        for (i, p) in padded.iter_mut().enumerate() {
            *p = src[(i as isize - r).clamp(0, w as isize - 1) as usize];
        }
        let dst = &mut rows[y * w..(y + 1) * w];
        for (x, d) in dst.iter_mut().enumerate() {
            *d = taps.iter().zip(&padded[x..x + taps.len()]).map(|(t, v)| t * v).sum();
        }
    }

    let mut out = vec![0.0; w * h];
    for y in 0..h as isize {
        let dst = &mut out[y as usize * w..(y as usize + 1) * w];
        for (ti, &t) in taps.iter().enumerate() {
            let sy = (y + ti as isize - r).clamp(0, h as isize - 1) as usize;
            let src = &rows[sy * w..(sy + 1) * w];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += t * s;
            }
        }
    }
    GrayImage::new(w, h, out)
}

/// Gaussian blur (radius `ceil(3σ)`), computed separably.
pub fn gaussian_blur(img: &GrayImage, sigma: f64) -> Result<GrayImage, RasterError> {
    let taps = gaussian_taps(sigma, gaussian_radius(sigma))?;
    convolve_separable(img, &taps)
}

/// Half-wave rectification.
pub fn rectify(img: &GrayImage) -> GrayImage {
    img.map(|v| v.max(0.0))
}

/// Integer pixel displacement for a polar vector `(rho, angle)`.
///
/// `dx = round(rho·cos(angle))` moves right, `dy = round(rho·sin(angle))`
/// moves down the raster.
pub fn shift_offset(rho: f64, angle: f64) -> (isize, isize) {
    ((rho * angle.cos()).round() as isize, (rho * angle.sin()).round() as isize)
}

/// Translate the image by [`shift_offset`]`(rho, angle)`; vacated pixels are 0.
pub fn shift(img: &GrayImage, rho: f64, angle: f64) -> GrayImage {
    let (dx, dy) = shift_offset(rho, angle);
    shift_by(img, dx, dy)
}

/// Integer translation: `out(x + dx, y + dy) = img(x, y)`.
pub fn shift_by(img: &GrayImage, dx: isize, dy: isize) -> GrayImage {
    if dx == 0 && dy == 0 {
        return img.clone();
    }
    let (w, h) = (img.width as isize, img.height as isize);
    let mut out = vec![0.0; img.data.len()];
    if dx.abs() < w && dy.abs() < h {
        let x_lo = dx.max(0);
        let x_hi = (w + dx).min(w);
        let len = (x_hi - x_lo) as usize;
        for y in dy.max(0)..(h + dy).min(h) {
            let sy = y - dy;
            let dst = (y * w + x_lo) as usize;
            let src = (sy * w + x_lo - dx) as usize;
            out[dst..dst + len].copy_from_slice(&img.data[src..src + len]);
        }
    }
    GrayImage { width: img.width, height: img.height, data: out }
}
