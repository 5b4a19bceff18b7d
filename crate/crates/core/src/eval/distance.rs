//! Distance transforms to the nearest foreground pixel.

use serde::{Deserialize, Serialize};

use super::BinaryMask;

/// Metric used for the centerline matching tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMetric {
    #[default]
    Euclidean,
    Chebyshev,
}

/// Distance of every pixel to the nearest set pixel of `mask`, in the given
/// metric. Returns `f64::INFINITY` everywhere when the mask is empty.
pub fn distance_transform(mask: &BinaryMask, metric: DistanceMetric) -> Vec<f64> {
    match metric {
        DistanceMetric::Euclidean => squared_edt(mask).into_iter().map(f64::sqrt).collect(),
        DistanceMetric::Chebyshev => chessboard(mask),
    }
}

/// Exact squared Euclidean distance transform (separable lower-envelope
/// algorithm of Felzenszwalb and Huttenlocher).
pub fn squared_edt(mask: &BinaryMask) -> Vec<f64> {
    let (w, h) = mask.dims();
    let mut grid: Vec<f64> = mask.bits().iter().map(|&b| if b { 0.0 } else { f64::INFINITY }).collect();

    let mut f = vec![0.0; w.max(h)];
    let mut d = vec![0.0; w.max(h)];
    let mut v = vec![0usize; w.max(h)];
    let mut z = vec![0.0; w.max(h) + 1];

    for x in 0..w {
        for y in 0..h {
            f[y] = grid[y * w + x];
        }
        edt_1d(&f[..h], &mut d[..h], &mut v, &mut z);
        for y in 0..h {
            grid[y * w + x] = d[y];
        }
    }
    for y in 0..h {
        f[..w].copy_from_slice(&grid[y * w..(y + 1) * w]);
        edt_1d(&f[..w], &mut d[..w], &mut v, &mut z);
        grid[y * w..(y + 1) * w].copy_from_slice(&d[..w]);
    }
    grid
}

fn edt_1d(f: &[f64], d: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    // first finite sample starts the envelope
    let Some(first) = f.iter().position(|x| x.is_finite()) else {
        d.fill(f64::INFINITY);
        return;
    };
    let mut k = 0;
    v[0] = first;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in first + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        let qf = q as f64;
        loop {
            let p = v[k] as f64;
            let s = ((f[q] + qf * qf) - (f[v[k]] + p * p)) / (2.0 * qf - 2.0 * p);
            if s <= z[k] {
                // k > 0 here: z[0] is -inf
                k -= 1;
                continue;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    k = 0;
    for (q, out) in d.iter_mut().enumerate() {
        let qf = q as f64;
        while z[k + 1] < qf {
            k += 1;
        }
        let p = v[k] as f64;
        *out = (qf - p) * (qf - p) + f[v[k]];
    }
}

fn chessboard(mask: &BinaryMask) -> Vec<f64> {
    let (w, h) = mask.dims();
    let big = (w + h) as f64 + 1.0;
    let mut d: Vec<f64> = mask.bits().iter().map(|&b| if b { 0.0 } else { big }).collect();
    let idx = |x: usize, y: usize| y * w + x;
    for y in 0..h {
        for x in 0..w {
            let mut m = d[idx(x, y)];
            if x > 0 {
                m = m.min(d[idx(x - 1, y)] + 1.0);
            }
            if y > 0 {
                m = m.min(d[idx(x, y - 1)] + 1.0);
                if x > 0 {
                    m = m.min(d[idx(x - 1, y - 1)] + 1.0);
                }
                if x + 1 < w {
                    m = m.min(d[idx(x + 1, y - 1)] + 1.0);
                }
            }
            d[idx(x, y)] = m;
        }
    }
    for y in (0..h).rev() {
        for x in (0..w).rev() {
            let mut m = d[idx(x, y)];
            if x + 1 < w {
                m = m.min(d[idx(x + 1, y)] + 1.0);
            }
            if y + 1 < h {
                m = m.min(d[idx(x, y + 1)] + 1.0);
                if x + 1 < w {
                    m = m.min(d[idx(x + 1, y + 1)] + 1.0);
                }
                if x > 0 {
                    m = m.min(d[idx(x - 1, y + 1)] + 1.0);
                }
            }
            d[idx(x, y)] = m;
        }
    }
    if mask.is_empty() {
        d.fill(f64::INFINITY);
    }
    d
}
