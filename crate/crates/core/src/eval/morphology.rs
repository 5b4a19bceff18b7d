//! Binary morphology needed by the CAL measure: connected components, disk
//! dilation and Zhang-Suen thinning.

use super::BinaryMask;

const NEIGHBOURS_8: [(isize, isize); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];

/// Per-pixel component label (0 = background, components numbered from 1
/// in raster order of their first pixel) and the component count.
pub fn label_components(mask: &BinaryMask) -> (Vec<u32>, usize) {
    let (w, h) = mask.dims();
    let mut labels = vec![0u32; w * h];
    let mut next = 0u32;
    let mut stack = Vec::new();
    for start in 0..w * h {
        if !mask.bits()[start] || labels[start] != 0 {
            continue;
        }
        next += 1;
        labels[start] = next;
        stack.push(start);
        while let Some(i) = stack.pop() {
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for (dx, dy) in NEIGHBOURS_8 {
                let (nx, ny) = (x + dx, y + dy);
                if mask.get_or_false(nx, ny) {
                    let j = ny as usize * w + nx as usize;
                    if labels[j] == 0 {
                        labels[j] = next;
                        stack.push(j);
                    }
                }
            }
        }
    }
    (labels, next as usize)
}

/// Number of 8-connected components.
pub fn count_components(mask: &BinaryMask) -> usize {
    label_components(mask).1
}

/// Dilation by the digital disk `{(dx, dy) : dx² + dy² ≤ radius²}`.
pub fn dilate_disk(mask: &BinaryMask, radius: usize) -> BinaryMask {
    let r = radius as isize;
    let offsets: Vec<(isize, isize)> = (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
        .filter(|&(dx, dy)| dx * dx + dy * dy <= r * r)
        .collect();
    let (w, h) = mask.dims();
    let mut out = BinaryMask::empty(w, h);
    for y in 0..h {
        for x in 0..w {
            if !mask.get(x, y) {
                continue;
            }
            for &(dx, dy) in &offsets {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                if nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h {
                    out.set(nx as usize, ny as usize, true);
                }
            }
        }
    }
    out
}

/// Zhang-Suen thinning to a one-pixel-wide skeleton.
///
/// Components that the two-subiteration scheme would erase entirely (for
/// example a 2x2 block) keep their first pixel in raster order, so the
/// skeleton has exactly one component per input component.
pub fn skeletonize(mask: &BinaryMask) -> BinaryMask {
    let (w, h) = mask.dims();
    let mut img = mask.clone();
    let mut to_clear = Vec::new();
    loop {
        let mut changed = false;
        for pass in 0..2 {
            to_clear.clear();
            for y in 0..h {
                for x in 0..w {
                    if img.get(x, y) && deletable(&img, x as isize, y as isize, pass) {
                        to_clear.push((x, y));
                    }
                }
            }
            changed |= !to_clear.is_empty();
            for &(x, y) in &to_clear {
                img.set(x, y, false);
            }
        }
        if !changed {
            break;
        }
    }

    let (labels, n) = label_components(mask);
    let mut seen = vec![false; n + 1];
    for (i, &b) in img.bits().iter().enumerate() {
        if b {
            seen[labels[i] as usize] = true;
        }
    }
    for (i, &l) in labels.iter().enumerate() {
        if l != 0 && !seen[l as usize] {
            seen[l as usize] = true;
            img.set(i % w, i / w, true);
        }
    }
    img
}

fn deletable(img: &BinaryMask, x: isize, y: isize, pass: usize) -> bool {
    // P2..P9 clockwise from north
    let p = [
        img.get_or_false(x, y - 1),
        img.get_or_false(x + 1, y - 1),
        img.get_or_false(x + 1, y),
        img.get_or_false(x + 1, y + 1),
        img.get_or_false(x, y + 1),
        img.get_or_false(x - 1, y + 1),
        img.get_or_false(x - 1, y),
        img.get_or_false(x - 1, y - 1),
    ];
    let b = p.iter().filter(|&&v| v).count();
    if !(2..=6).contains(&b) {
        return false;
    }
    let a = (0..8).filter(|&i| !p[i] && p[(i + 1) % 8]).count();
    if a != 1 {
        return false;
    }
    let (n, e, s, wst) = (p[0], p[2], p[4], p[6]);
    if pass == 0 {
        !(n && e && s) && !(e && s && wst)
    } else {
        !(n && e && wst) && !(n && s && wst)
    }
}
