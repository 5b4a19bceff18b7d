//! Inputs shared by the pipeline benchmarks.

use rustico_core::datasets::{make_fixture, FixtureKind, FixtureNoise};
use rustico_core::{presets, GrayImage, RusticoOperator};

/// Two noisy crossed bars on a `size`×`size` raster.
pub fn scene(size: usize) -> GrayImage {
    let kind = FixtureKind::CrossedBars { size, length: size as f64 * 0.8, width: 3.0, angles: (0.3, 1.7) };
    make_fixture(&kind, FixtureNoise { amplitude: 0.15, seed: 42 }).image
}

/// Operator with the TB-roses parameters.
pub fn operator() -> RusticoOperator {
    presets::tb_roses_1().build_operator().expect("preset configures")
}
