//! Trainable COSFIRE line filters with push-pull inhibition, and the
//! evaluation tooling used to benchmark curvilinear-structure delineation.
//!
//! The pipeline, bottom-up:
//!
//! - [`raster`]: images, Gaussian kernels, convolution, rectification, shifts
//! - [`dog`]: difference-of-Gaussians afferents and the shared response cache
//! - [`cosfire`]: tuple filters, configuration from a prototype, rotation,
//!   geometric-mean response
//! - [`rustico`]: inhibitory filter derivation, push-pull combination and
//!   the multi-orientation operator
//! - [`eval`]: thresholding, P/R/F with tolerance, MCC, CAL, signed-rank test
//! - [`datasets`]: on-disk dataset adapters and synthetic fixtures
//! - [`config`]: run configuration and the per-dataset presets

pub mod config;
pub mod cosfire;
pub mod datasets;
pub mod dog;
pub mod eval;
pub mod raster;
pub mod rustico;

pub use config::{presets, ConfigError, RunConfig};
pub use cosfire::{configure, render_bar_prototype, response, rotate_filter, CosfireFilter, FilterError, Tuple};
pub use dog::{dog_kernel, dog_response, DogSpec, Polarity, ResponseBank};
pub use eval::{BinaryMask, EvalError, EvalReport};
pub use raster::{Channel, GrayImage, Kernel2D, RasterError};
pub use rustico::{derive_inhibitor, multi_orientation_cosfire, RusticoOperator};
