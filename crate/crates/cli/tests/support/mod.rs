#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustico_core::datasets::{make_fixture, texture_fixture, FixtureKind, FixtureNoise};
use rustico_core::{CosfireFilter, GrayImage};

/// Straight from the definitions: direct 2-D sums per output pixel, no
/// caching, no separability, no shifted copies.
pub fn naive_response(f: &CosfireFilter, img: &GrayImage) -> GrayImage {
    let (w, h) = img.dims();
    let pix = |x: isize, y: isize| img.get(x.clamp(0, w as isize - 1) as usize, y.clamp(0, h as isize - 1) as usize);
    let gauss = |s: f64, r: isize| -> Vec<f64> {
        let mut k = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                k.push((-((dx * dx + dy * dy) as f64) / (2.0 * s * s)).exp());
            }
        }
        let total: f64 = k.iter().sum();
        k.into_iter().map(|v| v / total).collect()
    };
    let dog_at = |sign: f64, s: f64, x: isize, y: isize| -> f64 {
        let r = (3.0 * s).ceil() as isize;
        let (gi, go) = (gauss(0.5 * s, r), gauss(s, r));
        let mut acc = 0.0;
        let mut i = 0;
        for dy in -r..=r {
            for dx in -r..=r {
                acc += (gi[i] - go[i]) * pix(x + dx, y + dy);
                i += 1;
            }
        }
        (sign * acc).max(0.0)
    };
    let blurred_at = |sign: f64, s: f64, b: f64, x: isize, y: isize| -> f64 {
        let r = (3.0 * b).ceil() as isize;
        let g = gauss(b, r);
        let mut acc = 0.0;
        let mut i = 0;
        for dy in -r..=r {
            for dx in -r..=r {
                let (qx, qy) = ((x + dx).clamp(0, w as isize - 1), (y + dy).clamp(0, h as isize - 1));
                acc += g[i] * dog_at(sign, s, qx, qy);
                i += 1;
            }
        }
        acc
    };
    GrayImage::from_fn(w, h, |x, y| {
        let mut logs = 0.0;
        for t in f.tuples() {
            // keypoint at (x + ρ cos φ, y − ρ sin φ), y pointing down
            let sx = x as isize + (t.rho * t.phi.cos()).round() as isize;
            let sy = y as isize - (t.rho * t.phi.sin()).round() as isize;
            if sx < 0 || sy < 0 || sx >= w as isize || sy >= h as isize {
                return 0.0;
            }
            let b = f.sigma0() + f.alpha() * t.rho;
            let v = blurred_at(f64::from(t.polarity.sign()), t.sigma, b, sx, sy);
            if v <= 0.0 {
                return 0.0;
            }
            logs += v.ln();
        }
        (logs / f.len() as f64).exp()
    })
}

/// A few random bright strokes plus uniform noise, values in [0, 1].
pub fn random_stroke_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> GrayImage {
    let strokes: Vec<(f64, f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(0.0..w as f64),
                rng.random_range(0.0..h as f64),
                rng.random_range(0.0..std::f64::consts::PI),
                rng.random_range(0.5..2.0),
            )
        })
        .collect();
    let noise: Vec<f64> = (0..w * h).map(|_| rng.random_range(0.0..0.3)).collect();
    GrayImage::from_fn(w, h, |x, y| {
        let on = strokes.iter().any(|&(cx, cy, a, half_w)| {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            (dx * a.sin() + dy * a.cos()).abs() <= half_w
        });
        let v = noise[y * w + x] + if on { 0.7 } else { 0.0 };
        v.min(1.0)
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Bar of the given length and width through the center of a square
/// canvas, at `angle` counterclockwise from the x axis.
pub fn rotated_bar(size: usize, length: usize, width: usize, angle: f64) -> GrayImage {
    let c = (size / 2) as f64;
    let half_len = (length as f64 - 1.0) / 2.0;
    let half_w = width as f64 / 2.0;
    let (ux, uy) = (angle.cos(), -angle.sin());
    GrayImage::from_fn(size, size, |x, y| {
        let (dx, dy) = (x as f64 - c, y as f64 - c);
        let along = dx * ux + dy * uy;
        let across = (-dx * uy + dy * ux).abs();
        if along.abs() <= half_len + 0.5 && across <= half_w {
            1.0
        } else {
            0.0
        }
    })
}

/// Writes a small fixture dataset in the `tb_roses_1` layout
/// (`images/<id>.png`, `centerline/<id>.png`).
pub fn write_fixture_corpus(root: &Path) {
    std::fs::create_dir_all(root.join("images")).unwrap();
    std::fs::create_dir_all(root.join("centerline")).unwrap();
    let noise = |seed| FixtureNoise { amplitude: 0.1, seed };
    let fixtures = [
        ("bar", make_fixture(&FixtureKind::Bar { size: 72, length: 45.0, width: 3.0, angle: 0.5 }, noise(1))),
        (
            "crossed",
            make_fixture(
                &FixtureKind::CrossedBars { size: 72, length: 51.0, width: 3.0, angles: (0.3, 1.9) },
                noise(2),
            ),
        ),
        ("curve", make_fixture(&FixtureKind::Curve { size: 72, radius: 40.0, width: 3.0 }, noise(3))),
        ("texture", texture_fixture()),
    ];
    for (id, fx) in fixtures {
        // dark structures on light ground, like the real datasets
        fx.image.inverted().save_png_scaled(root.join(format!("images/{id}.png"))).unwrap();
        fx.ground_truth.save_png(root.join(format!("centerline/{id}.png"))).unwrap();
    }
}

pub fn rustico(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rustico")).args(args).current_dir(cwd).output().expect("binary runs")
}
