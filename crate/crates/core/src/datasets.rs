//! Dataset adapters and synthetic fixtures.
//!
//! On-disk layouts (all relative to the dataset root; image extensions are
//! matched case-insensitively among png, pgm, ppm, pnm, jpg, jpeg, tif,
//! tiff, gif, bmp):
//!
//! | layout         | images             | ground truth                                             | fov                     |
//! |----------------|--------------------|----------------------------------------------------------|-------------------------|
//! | `tb_roses_1`   | `images/<id>.*`    | `centerline/<id>.*`, `segmentation/<id>.*` (either/both) | –                       |
//! | `cracktree206` | `image/<id>.*`     | `gt/<id>.*` (centerline)                                 | –                       |
//! | `drive`        | `images/<id>_<split>.*` | `1st_manual/<id>_manual1.*` (segmentation)          | `mask/<id>_<split>_mask.*` |
//!
//! A `manifest.json` in the root overrides directory names and file-name
//! patterns; see [`LayoutManifest`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eval::BinaryMask;
use crate::raster::{Channel, GrayImage, RasterError};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("dataset root {0} does not exist")]
    MissingRoot(PathBuf),
    #[error("no images found under {0}")]
    Empty(PathBuf),
    #[error("{id}: missing {what} ({path})")]
    MissingFile { id: String, what: &'static str, path: PathBuf },
    #[error("{id}: {what} is {got:?}, image is {expected:?}")]
    DimensionMismatch { id: String, what: &'static str, got: (usize, usize), expected: (usize, usize) },
    #[error("{id}: {source}")]
    Image { id: String, source: RasterError },
    #[error("bad manifest: {0}")]
    Manifest(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    #[serde(rename = "tb_roses_1")]
    TbRoses1,
    Cracktree206,
    Drive,
}

impl Layout {
    /// Nominal `(width, height)` of the public release.
    pub fn nominal_dims(self) -> (usize, usize) {
        match self {
            Layout::TbRoses1 => (960, 540),
            Layout::Cracktree206 => (800, 600),
            Layout::Drive => (565, 584),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Layout::TbRoses1 => "tb_roses_1",
            Layout::Cracktree206 => "cracktree206",
            Layout::Drive => "drive",
        }
    }
}

/// Directory and file-name conventions for one layout.
///
/// Patterns use `{id}` for the item id and `{split}` for the suffix that
/// follows `_` in a DRIVE-style image stem (`01_test` → id `01`, split
/// `test`). An image stem without `_` has an empty split. Every field is
/// optional in `manifest.json`; absent fields keep the layout default.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutManifest {
    pub images_dir: String,
    /// Whether image stems carry a `_<split>` suffix.
    pub split_suffix: bool,
    pub centerline: Option<PathPattern>,
    pub segmentation: Option<PathPattern>,
    pub fov: Option<PathPattern>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathPattern {
    pub dir: String,
    /// File stem pattern, e.g. `{id}_manual1`.
    pub stem: String,
}

impl PathPattern {
    fn new(dir: &str, stem: &str) -> Option<Self> {
        Some(Self { dir: dir.into(), stem: stem.into() })
    }
}

impl Default for LayoutManifest {
    fn default() -> Self {
        Self::for_layout(Layout::TbRoses1)
    }
}

impl LayoutManifest {
    pub fn for_layout(layout: Layout) -> Self {
        match layout {
            Layout::TbRoses1 => Self {
                images_dir: "images".into(),
                split_suffix: false,
                centerline: PathPattern::new("centerline", "{id}"),
                segmentation: PathPattern::new("segmentation", "{id}"),
                fov: None,
            },
            Layout::Cracktree206 => Self {
                images_dir: "image".into(),
                split_suffix: false,
                centerline: PathPattern::new("gt", "{id}"),
                segmentation: None,
                fov: None,
            },
            Layout::Drive => Self {
                images_dir: "images".into(),
                split_suffix: true,
                centerline: None,
                segmentation: PathPattern::new("1st_manual", "{id}_manual1"),
                fov: PathPattern::new("mask", "{id}_{split}_mask"),
            },
        }
    }

    /// Layout defaults overridden by `root/manifest.json` when present.
    pub fn resolve(root: &Path, layout: Layout) -> Result<Self, DatasetError> {
        let path = root.join("manifest.json");
        if !path.exists() {
            return Ok(Self::for_layout(layout));
        }
        let text = std::fs::read_to_string(&path)?;
        let mut base = serde_json::to_value(Self::for_layout(layout)).expect("manifest serializes");
        let overrides: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| DatasetError::Manifest(e.to_string()))?;
        let serde_json::Value::Object(map) = overrides else {
            return Err(DatasetError::Manifest("manifest must be a JSON object".into()));
        };
        for (k, v) in map {
            base[k] = v;
        }
        serde_json::from_value(base).map_err(|e| DatasetError::Manifest(e.to_string()))
    }
}

const IMAGE_EXTENSIONS: &[&str] = &["png", "pgm", "ppm", "pnm", "jpg", "jpeg", "tif", "tiff", "gif", "bmp"];

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

/// Finds `<dir>/<stem>.<any image extension>`, preferring the extension
/// order of [`IMAGE_EXTENSIONS`].
fn find_with_stem(dir: &Path, stem: &str) -> Option<PathBuf> {
    let entries = std::fs::read_dir(dir).ok()?;
    let mut hits: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| is_image(p) && p.file_stem().and_then(|s| s.to_str()) == Some(stem))
        .collect();
    hits.sort_by_key(|p| {
        let ext = p.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
        IMAGE_EXTENSIONS.iter().position(|e| *e == ext).unwrap_or(usize::MAX)
    });
    hits.into_iter().next()
}

/// Loading options.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadOptions {
    pub channel: Channel,
    /// Map `v` to `1 - v` so dark structures become bright.
    pub invert: bool,
}

/// Read one input image with channel extraction and optional inversion.
pub fn load_image(path: &Path, opts: LoadOptions) -> Result<GrayImage, RasterError> {
    let img = GrayImage::load(path, opts.channel)?;
    Ok(if opts.invert { img.inverted() } else { img })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetItem {
    pub id: String,
    pub image_path: PathBuf,
    pub image: GrayImage,
    pub gt_centerline: Option<BinaryMask>,
    pub gt_segmentation: Option<BinaryMask>,
    pub fov: Option<BinaryMask>,
}

#[derive(Debug, Clone)]
struct PendingItem {
    id: String,
    split: String,
    image_path: PathBuf,
}

/// Lazily loads items in lexicographic id order; each item is an
/// independent `Result`.
#[derive(Debug)]
pub struct DatasetStream {
    root: PathBuf,
    manifest: LayoutManifest,
    opts: LoadOptions,
    pending: std::vec::IntoIter<PendingItem>,
    len: usize,
}

impl DatasetStream {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn load(&self, p: PendingItem) -> Result<DatasetItem, DatasetError> {
        let image =
            load_image(&p.image_path, self.opts).map_err(|source| DatasetError::Image { id: p.id.clone(), source })?;
        let dims = image.dims();
        let load_mask = |pattern: &Option<PathPattern>,
                         what: &'static str|
         -> Result<Option<BinaryMask>, DatasetError> {
            let Some(pat) = pattern else { return Ok(None) };
            let dir = self.root.join(&pat.dir);
            let stem = pat.stem.replace("{id}", &p.id).replace("{split}", &p.split);
            let path = find_with_stem(&dir, &stem).ok_or_else(|| DatasetError::MissingFile {
                id: p.id.clone(),
                what,
                path: dir.join(&stem),
            })?;
            let mask = BinaryMask::load(&path).map_err(|source| DatasetError::Image { id: p.id.clone(), source })?;
            if mask.dims() != dims {
                return Err(DatasetError::DimensionMismatch {
                    id: p.id.clone(),
                    what,
                    got: mask.dims(),
                    expected: dims,
                });
            }
            Ok(Some(mask))
        };
        let gt_centerline = load_mask(&self.manifest.centerline, "centerline ground truth");
        let gt_segmentation = load_mask(&self.manifest.segmentation, "segmentation ground truth");
        let fov = load_mask(&self.manifest.fov, "field-of-view mask")?;

        // a layout that declares two ground truths needs at least one of them
        let (gt_centerline, gt_segmentation) = match (gt_centerline, gt_segmentation) {
            (Ok(c), Ok(s)) => (c, s),
            (Ok(Some(c)), Err(DatasetError::MissingFile { .. }))
                if self.manifest.segmentation.is_some() && self.manifest.centerline.is_some() =>
            {
                (Some(c), None)
            }
            (Err(DatasetError::MissingFile { .. }), Ok(Some(s)))
                if self.manifest.segmentation.is_some() && self.manifest.centerline.is_some() =>
            {
                (None, Some(s))
            }
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        Ok(DatasetItem { id: p.id, image_path: p.image_path, image, gt_centerline, gt_segmentation, fov })
    }
}

impl Iterator for DatasetStream {
    type Item = Result<DatasetItem, DatasetError>;

    fn next(&mut self) -> Option<Self::Item> {
        let p = self.pending.next()?;
        Some(self.load(p))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.pending.size_hint()
    }
}

fn enumerate(root: &Path, manifest: &LayoutManifest) -> Result<Vec<PendingItem>, DatasetError> {
    if !root.is_dir() {
        return Err(DatasetError::MissingRoot(root.to_path_buf()));
    }
    let images_dir = root.join(&manifest.images_dir);
    let mut found: BTreeMap<String, PendingItem> = BTreeMap::new();
    if images_dir.is_dir() {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&images_dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && is_image(p))
            .collect();
        paths.sort();
        for path in paths {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            let (id, split) = match (manifest.split_suffix, stem.split_once('_')) {
                (true, Some((id, split))) => (id.to_string(), split.to_string()),
                _ => (stem.clone(), String::new()),
            };
            found.entry(id.clone()).or_insert(PendingItem { id, split, image_path: path });
        }
    }
    if found.is_empty() {
        return Err(DatasetError::Empty(images_dir));
    }
    Ok(found.into_values().collect())
}

/// `(id, image path)` pairs of a dataset root in id order, without reading
/// any pixels or ground truth.
pub fn list_images(root: &Path, layout: Layout) -> Result<Vec<(String, PathBuf)>, DatasetError> {
    let manifest = LayoutManifest::resolve(root, layout)?;
    Ok(enumerate(root, &manifest)?.into_iter().map(|p| (p.id, p.image_path)).collect())
}

/// Enumerate a dataset root. Errors when the root is missing or holds no
/// images; per-item problems surface while iterating.
pub fn load_dataset(root: &Path, layout: Layout, opts: LoadOptions) -> Result<DatasetStream, DatasetError> {
    if !root.is_dir() {
        return Err(DatasetError::MissingRoot(root.to_path_buf()));
    }
    let manifest = LayoutManifest::resolve(root, layout)?;
    let pending = enumerate(root, &manifest)?;
    let len = pending.len();
    Ok(DatasetStream { root: root.to_path_buf(), manifest, opts, pending: pending.into_iter(), len })
}

/// Synthetic test patterns with exact ground truth.
#[derive(Debug, Clone, PartialEq)]
pub enum FixtureKind {
    /// Bright bar of `length`×`width` through the center at `angle`
    /// (counterclockwise, radians).
    Bar { size: usize, length: f64, width: f64, angle: f64 },
    /// Two bars through the center.
    CrossedBars { size: usize, length: f64, width: f64, angles: (f64, f64) },
    /// Horizontal bar centered in the left half, checkerboard texture with
    /// cells of `cell` pixels filling the right half.
    BarPlusTexture { width: usize, height: usize, bar_length: f64, bar_width: f64, cell: usize },
    /// Quarter circle of `radius` around `(margin, margin)`, in the
    /// lower-right quadrant of the raster.
    Curve { size: usize, radius: f64, width: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub image: GrayImage,
    /// Centerline pixels of the curvilinear structure.
    pub ground_truth: BinaryMask,
    /// For `BarPlusTexture`: the left (bar) and right (texture) halves.
    pub regions: Option<(BinaryMask, BinaryMask)>,
}

/// Fixture options shared by every kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixtureNoise {
    /// Half-width of additive uniform noise (0 = clean).
    pub amplitude: f64,
    pub seed: u64,
}

impl Default for FixtureNoise {
    fn default() -> Self {
        Self { amplitude: 0.0, seed: 0 }
    }
}

fn segment_distance(px: f64, py: f64, cx: f64, cy: f64, angle: f64, half_len: f64) -> f64 {
    // image y points down, so the math-plane direction is (cos, -sin)
    let (ux, uy) = (angle.cos(), -angle.sin());
    let (dx, dy) = (px - cx, py - cy);
    let t = (dx * ux + dy * uy).clamp(-half_len, half_len);
    let (qx, qy) = (dx - t * ux, dy - t * uy);
    (qx * qx + qy * qy).sqrt()
}

fn draw_segment_centerline(mask: &mut BinaryMask, cx: f64, cy: f64, angle: f64, half_len: f64) {
    let (ux, uy) = (angle.cos(), -angle.sin());
    let steps = (half_len * 4.0).ceil() as isize;
    for k in -steps..=steps {
        let t = k as f64 / steps.max(1) as f64 * half_len;
        let (x, y) = ((cx + t * ux).round(), (cy + t * uy).round());
        if x >= 0.0 && y >= 0.0 && (x as usize) < mask.width() && (y as usize) < mask.height() {
            mask.set(x as usize, y as usize, true);
        }
    }
}

fn bar_image(size: usize, bars: &[(f64, f64, f64)]) -> GrayImage {
    let c = (size / 2) as f64;
    GrayImage::from_fn(size, size, |x, y| {
        let hit = bars.iter().any(|&(len, width, angle)| {
            segment_distance(x as f64, y as f64, c, c, angle, (len - 1.0) / 2.0) <= width / 2.0
        });
        if hit {
            1.0
        } else {
            0.0
        }
    })
}

/// Pixels of a rasterized circular arc, stepping along the major axis of
/// each octant so every pixel center is within half a pixel of the arc.
pub fn rasterize_quarter_circle(mask: &mut BinaryMask, cx: f64, cy: f64, radius: f64) {
    let r = radius;
    let lim = (r / 2f64.sqrt()).floor() as isize;
    let mut put = |dx: f64, dy: f64| {
        let (x, y) = (cx + dx, cy + dy);
        if x >= 0.0 && y >= 0.0 && (x as usize) < mask.width() && (y as usize) < mask.height() {
            mask.set(x as usize, y as usize, true);
        }
    };
    for i in 0..=lim {
        let a = i as f64;
        let b = (r * r - a * a).sqrt().round();
        put(a, b);
        put(b, a);
    }
}

pub fn make_fixture(kind: &FixtureKind, noise: FixtureNoise) -> Fixture {
    let mut fixture = match *kind {
        FixtureKind::Bar { size, length, width, angle } => {
            let c = (size / 2) as f64;
            let mut gt = BinaryMask::empty(size, size);
            draw_segment_centerline(&mut gt, c, c, angle, (length - 1.0) / 2.0);
            Fixture { image: bar_image(size, &[(length, width, angle)]), ground_truth: gt, regions: None }
        }
        FixtureKind::CrossedBars { size, length, width, angles } => {
            let c = (size / 2) as f64;
            let mut gt = BinaryMask::empty(size, size);
            draw_segment_centerline(&mut gt, c, c, angles.0, (length - 1.0) / 2.0);
            draw_segment_centerline(&mut gt, c, c, angles.1, (length - 1.0) / 2.0);
            let image = bar_image(size, &[(length, width, angles.0), (length, width, angles.1)]);
            Fixture { image, ground_truth: gt, regions: None }
        }
        FixtureKind::BarPlusTexture { width, height, bar_length, bar_width, cell } => {
            let half = width / 2;
            let (cx, cy) = ((half / 2) as f64, (height / 2) as f64);
            let cell = cell.max(1);
            let image = GrayImage::from_fn(width, height, |x, y| {
                if x >= half {
                    (((x - half) / cell + y / cell) % 2) as f64
                } else if segment_distance(x as f64, y as f64, cx, cy, 0.0, (bar_length - 1.0) / 2.0) <= bar_width / 2.0
                {
                    1.0
                } else {
                    0.0
                }
            });
            let mut gt = BinaryMask::empty(width, height);
            draw_segment_centerline(&mut gt, cx, cy, 0.0, (bar_length - 1.0) / 2.0);
            let left = BinaryMask::from_fn(width, height, |x, _| x < half);
            let right = left.complement();
            Fixture { image, ground_truth: gt, regions: Some((left, right)) }
        }
        FixtureKind::Curve { size, radius, width } => {
            let m = ((size as f64 - radius) / 2.0).floor();
            let image = GrayImage::from_fn(size, size, |x, y| {
                let (dx, dy) = (x as f64 - m, y as f64 - m);
                let inside = dx >= -0.5 && dy >= -0.5 && ((dx * dx + dy * dy).sqrt() - radius).abs() <= width / 2.0;
                if inside {
                    1.0
                } else {
                    0.0
                }
            });
            let mut gt = BinaryMask::empty(size, size);
            rasterize_quarter_circle(&mut gt, m, m, radius);
            Fixture { image, ground_truth: gt, regions: None }
        }
    };
    if noise.amplitude > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        let (w, h) = fixture.image.dims();
        let noisy = fixture
            .image
            .data()
            .iter()
            .map(|v| (v + rng.random_range(-noise.amplitude..noise.amplitude)).clamp(0.0, 1.0))
            .collect();
        fixture.image = GrayImage::new(w, h, noisy).expect("same shape");
    }
    fixture
}

/// Default `BarPlusTexture` used for texture-suppression checks: a 5 px
/// bar and a period-2 checkerboard.
pub fn texture_fixture() -> Fixture {
    make_fixture(
        &FixtureKind::BarPlusTexture { width: 200, height: 100, bar_length: 61.0, bar_width: 5.0, cell: 1 },
        FixtureNoise::default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::count_components;

    #[test]
    fn horizontal_bar_fixture() {
        let f = make_fixture(
            &FixtureKind::Bar { size: 101, length: 40.0, width: 3.0, angle: 0.0 },
            FixtureNoise::default(),
        );
        // centerline is row 50, 40 pixels long
        assert_eq!(f.ground_truth.count(), 40);
        assert!((0..101).filter(|&x| f.ground_truth.get(x, 50)).count() == 40);
        assert_eq!(f.image.get(50, 50), 1.0);
        assert_eq!(f.image.get(50, 52), 0.0);
        assert!(f.ground_truth.bits().iter().zip(f.image.data()).all(|(&g, &v)| !g || v == 1.0));
    }

    #[test]
    fn texture_fixture_regions() {
        let f = make_fixture(
            &FixtureKind::BarPlusTexture { width: 40, height: 20, bar_length: 11.0, bar_width: 1.0, cell: 1 },
            FixtureNoise::default(),
        );
        let (left, right) = f.regions.unwrap();
        assert_eq!(left.count() + right.count(), 800);
        assert!(!left.get(20, 0) && right.get(20, 0));
        // period-2 checkerboard on the right
        assert_ne!(f.image.get(20, 0), f.image.get(21, 0));
        assert_ne!(f.image.get(20, 0), f.image.get(20, 1));
        assert_eq!(f.image.get(20, 0), f.image.get(21, 1));
    }

    #[test]
    fn quarter_circle_is_close_to_arc() {
        let f = make_fixture(&FixtureKind::Curve { size: 80, radius: 30.0, width: 3.0 }, FixtureNoise::default());
        let m = ((80.0 - 30.0) / 2.0f64).floor();
        let gt = &f.ground_truth;
        assert!(gt.count() > 40);
        for y in 0..80 {
            for x in 0..80 {
                if gt.get(x, y) {
                    let d = ((x as f64 - m).hypot(y as f64 - m) - 30.0).abs();
                    assert!(d <= 0.5, "({x},{y}) off by {d}");
                }
            }
        }
        assert_eq!(count_components(gt), 1);
        // endpoints on both axes
        assert!(gt.get(m as usize + 30, m as usize) && gt.get(m as usize, m as usize + 30));
    }

    #[test]
    fn noise_is_seeded() {
        let kind = FixtureKind::Bar { size: 31, length: 15.0, width: 3.0, angle: 0.3 };
        let a = make_fixture(&kind, FixtureNoise { amplitude: 0.1, seed: 7 });
        let b = make_fixture(&kind, FixtureNoise { amplitude: 0.1, seed: 7 });
        let c = make_fixture(&kind, FixtureNoise { amplitude: 0.1, seed: 8 });
        assert_eq!(a, b);
        assert_ne!(a.image, c.image);
    }

    fn write_png(path: &Path, img: &GrayImage) {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        img.save_png_scaled(path).unwrap();
    }

    fn tiny(seed: usize) -> GrayImage {
        GrayImage::from_fn(8, 6, |x, y| ((x + y + seed) % 3) as f64 / 2.0)
    }

    #[test]
    fn drive_layout() {
        let dir = tempfile::tempdir().unwrap();
        for i in (1..=20).rev() {
            let id = format!("{i:02}");
            write_png(&dir.path().join(format!("images/{id}_test.png")), &tiny(i));
            write_png(&dir.path().join(format!("1st_manual/{id}_manual1.png")), &tiny(i + 1));
            write_png(&dir.path().join(format!("mask/{id}_test_mask.png")), &GrayImage::filled(8, 6, 1.0));
        }
        let opts = LoadOptions { channel: Channel::Green, invert: true };
        let items: Vec<DatasetItem> =
            load_dataset(dir.path(), Layout::Drive, opts).unwrap().map(Result::unwrap).collect();
        assert_eq!(items.len(), 20);
        assert_eq!(items[0].id, "01");
        assert_eq!(items[19].id, "20");
        assert!(items.iter().all(|i| i.fov.is_some() && i.gt_segmentation.is_some() && i.gt_centerline.is_none()));
        // inverted on load
        assert!((items[0].image.get(0, 0) - (1.0 - tiny(1).get(0, 0))).abs() <= 1.0 / 255.0);

        // determinism
        let again: Vec<DatasetItem> =
            load_dataset(dir.path(), Layout::Drive, opts).unwrap().map(Result::unwrap).collect();
        assert_eq!(items, again);
    }

    #[test]
    fn cracktree_layout_with_a_missing_gt() {
        let dir = tempfile::tempdir().unwrap();
        for i in 0..5 {
            write_png(&dir.path().join(format!("image/{i}.png")), &tiny(i));
            if i != 3 {
                write_png(&dir.path().join(format!("gt/{i}.png")), &tiny(i));
            }
        }
        write_png(&dir.path().join("gt/4.png"), &GrayImage::zeros(5, 5));
        let results: Vec<_> =
            load_dataset(dir.path(), Layout::Cracktree206, LoadOptions { channel: Channel::Luminance, invert: false })
                .unwrap()
                .collect();
        assert_eq!(results.len(), 5);
        assert!(results[0].as_ref().unwrap().gt_centerline.is_some());
        assert!(matches!(results[3], Err(DatasetError::MissingFile { .. })));
        assert!(matches!(results[4], Err(DatasetError::DimensionMismatch { .. })));
    }

    #[test]
    fn tb_roses_tolerates_one_gt_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        write_png(&dir.path().join("rgb/a.png"), &tiny(0));
        write_png(&dir.path().join("rgb/b.png"), &tiny(1));
        write_png(&dir.path().join("cl/a_cl.png"), &tiny(0));
        write_png(&dir.path().join("segmentation/b.png"), &tiny(1));
        write_png(&dir.path().join("cl/b_cl.png"), &tiny(1));
        std::fs::write(
            dir.path().join("manifest.json"),
            r#"{"images_dir": "rgb", "centerline": {"dir": "cl", "stem": "{id}_cl"}}"#,
        )
        .unwrap();
        let items: Vec<DatasetItem> =
            load_dataset(dir.path(), Layout::TbRoses1, LoadOptions { channel: Channel::Luminance, invert: false })
                .unwrap()
                .map(Result::unwrap)
                .collect();
        assert_eq!(items.len(), 2);
        assert!(items[0].gt_centerline.is_some() && items[0].gt_segmentation.is_none());
        assert!(items[1].gt_centerline.is_some() && items[1].gt_segmentation.is_some());
    }

    #[test]
    fn empty_and_missing_roots() {
        let dir = tempfile::tempdir().unwrap();
        let opts = LoadOptions { channel: Channel::Luminance, invert: false };
        assert!(matches!(load_dataset(dir.path(), Layout::Drive, opts), Err(DatasetError::Empty(_))));
        assert!(matches!(
            load_dataset(&dir.path().join("nope"), Layout::Drive, opts),
            Err(DatasetError::MissingRoot(_))
        ));
    }

    #[test]
    fn double_inversion_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.png");
        let img = tiny(2);
        img.save_png_scaled(&p).unwrap();
        let once = load_image(&p, LoadOptions { channel: Channel::Luminance, invert: true }).unwrap();
        let plain = load_image(&p, LoadOptions { channel: Channel::Luminance, invert: false }).unwrap();
        for (a, b) in once.inverted().data().iter().zip(plain.data()) {
            assert!((a - b).abs() <= 1.0 / 255.0);
        }
    }
}
