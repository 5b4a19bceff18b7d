use std::f64::consts::PI;

use rustico_core::cosfire::{configure, radii_up_to, Tuple};
use rustico_core::datasets::{make_fixture, FixtureKind, FixtureNoise};
use rustico_core::raster::shift_offset;
use rustico_core::rustico::uniform_orientations;
use rustico_core::{
    derive_inhibitor, presets, render_bar_prototype, response, rotate_filter, CosfireFilter, DogSpec, GrayImage,
    Polarity, ResponseBank, RusticoOperator,
};

fn noisy_bar(angle: f64, seed: u64) -> GrayImage {
    make_fixture(&FixtureKind::Bar { size: 64, length: 41.0, width: 3.0, angle }, FixtureNoise { amplitude: 0.2, seed })
        .image
}

fn small_operator(xi: f64, orientations: usize) -> RusticoOperator {
    let spec = DogSpec::new(Polarity::CenterOn, 1.5).unwrap();
    let f = configure(&render_bar_prototype(17, 1, 41).unwrap(), spec, &radii_up_to(8.0, 2.0), 0.2, 1.0, 0.2).unwrap();
    RusticoOperator::with_orientation_count(f, 0.5, xi, orientations).unwrap()
}

/// Clockwise quarter turn of the raster, which is a counterclockwise turn
/// in the y-up plane.
fn rot90(img: &GrayImage) -> GrayImage {
    let (w, h) = img.dims();
    GrayImage::from_fn(h, w, |x, y| img.get(w - 1 - y, x))
}

#[test]
fn geometric_mean_lies_between_afferent_extremes() {
    let f = CosfireFilter::new(
        vec![
            Tuple::new(Polarity::CenterOn, 1.5, 0.0, 0.0),
            Tuple::new(Polarity::CenterOn, 1.5, 4.0, 0.0),
            Tuple::new(Polarity::CenterOn, 1.5, 4.0, PI),
        ],
        1.0,
        0.2,
    )
    .unwrap();
    let img = noisy_bar(0.2, 3);
    let r = response(&f, &img).unwrap();
    let bank = ResponseBank::build(&img, f.bank_requests()).unwrap();
    let (w, h) = img.dims();
    let mut checked = 0;
    for y in 8..h - 8 {
        for x in 8..w - 8 {
            let s: Vec<f64> = f
                .tuples()
                .iter()
                .map(|t| {
                    let (dx, dy) = shift_offset(t.rho, PI - t.phi);
                    let map = bank.blurred(t.dog_spec(), f.blur().sigma_at(t.rho)).unwrap();
                    map.get((x as isize - dx) as usize, (y as isize - dy) as usize)
                })
                .collect();
            let lo = s.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = s.iter().cloned().fold(0.0, f64::max);
            let v = r.get(x, y);
            assert!(v >= lo * (1.0 - 1e-12) && v <= hi * (1.0 + 1e-12), "({x},{y}): {v} not in [{lo}, {hi}]");
            checked += usize::from(lo > 0.0);
        }
    }
    assert!(checked > 100);
}

#[test]
fn quarter_turn_covariance_is_exact() {
    // a quarter turn maps the integer shift grid and the square kernels onto
    // themselves, so the rotated filter on the rotated image is the rotated map
    let op = small_operator(1.0, 1);
    let f = op.excitatory();
    let img = noisy_bar(0.4, 7);
    let r0 = response(f, &img).unwrap();
    let r1 = response(&rotate_filter(f, PI / 2.0), &rot90(&img)).unwrap();
    let expected = rot90(&r0);
    for (a, b) in r1.data().iter().zip(expected.data()) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn rotated_filter_finds_rotated_bar() {
    let cfg = presets::tb_roses_1();
    let f = cfg.build_filter().unwrap();
    for psi in [0.0, PI / 4.0, PI / 2.0] {
        let fx =
            make_fixture(&FixtureKind::Bar { size: 71, length: 33.0, width: 1.0, angle: psi }, FixtureNoise::default());
        let (x, y) = response(&rotate_filter(&f, psi), &fx.image).unwrap().argmax();
        assert!(x.abs_diff(35) <= 2 && y.abs_diff(35) <= 2, "psi={psi}: argmax ({x},{y})");
    }
}

#[test]
fn configuring_a_rotated_prototype_rotates_the_angles() {
    let spec = DogSpec::new(Polarity::CenterOn, 2.0).unwrap();
    let radii = radii_up_to(8.0, 2.0);
    let proto = render_bar_prototype(17, 1, 41).unwrap();
    let a = configure(&proto, spec, &radii, 0.2, 1.0, 0.1).unwrap();
    let b = configure(&rot90(&proto), spec, &radii, 0.2, 1.0, 0.1).unwrap();
    assert_eq!(a.len(), b.len());
    let mut expected: Vec<(f64, f64)> =
        a.tuples().iter().map(|t| (t.rho, if t.rho == 0.0 { 0.0 } else { (t.phi + PI / 2.0) % (2.0 * PI) })).collect();
    expected.sort_by(|p, q| p.partial_cmp(q).unwrap());
    for (t, (rho, phi)) in b.tuples().iter().zip(expected) {
        assert_eq!(t.rho, rho);
        let diff = (t.phi - phi).abs();
        assert!(diff.min(2.0 * PI - diff).to_degrees() < 2.0, "{} vs {}", t.phi, phi);
    }
}

#[test]
fn suppression_is_monotone_in_xi() {
    let img = make_fixture(
        &FixtureKind::BarPlusTexture { width: 120, height: 60, bar_length: 41.0, bar_width: 3.0, cell: 2 },
        FixtureNoise { amplitude: 0.1, seed: 11 },
    )
    .image;
    let base = small_operator(0.0, 4);
    let mut prev = base.response_at(PI / 4.0, &img).unwrap();
    for xi in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let next = base.with_xi(xi).unwrap().response_at(PI / 4.0, &img).unwrap();
        assert!(next.data().iter().zip(prev.data()).all(|(n, p)| n <= p));
        prev = next;
    }
}

#[test]
fn multi_orientation_dominates_each_orientation() {
    let img = noisy_bar(1.0, 5);
    let op = small_operator(1.0, 6);
    let multi = op.multi_orientation_response(&img).unwrap();
    for &psi in op.orientations() {
        let single = op.response_at(psi, &img).unwrap();
        assert!(multi.data().iter().zip(single.data()).all(|(m, s)| m >= s));
    }
    let one = small_operator(1.0, 1);
    assert_eq!(one.multi_orientation_response(&img).unwrap(), one.response_at(0.0, &img).unwrap());
}

#[test]
fn crossed_bars_keep_single_bar_response() {
    let op = small_operator(1.0, 12);
    let bar = |angles: &[f64]| {
        let size = 81;
        let c = 40.0;
        GrayImage::from_fn(size, size, |x, y| {
            let (dx, dy) = (x as f64 - c, y as f64 - c);
            let hit = angles.iter().any(|a| {
                let along = dx * a.cos() - dy * a.sin();
                let across = dx * a.sin() + dy * a.cos();
                along.abs() <= 25.0 && across.abs() <= 1.5
            });
            if hit {
                1.0
            } else {
                0.0
            }
        })
    };
    let both = op.multi_orientation_response(&bar(&[0.0, PI / 2.0])).unwrap();
    for (angle, probe) in [(0.0, (52, 40)), (PI / 2.0, (40, 28))] {
        let alone = op.multi_orientation_response(&bar(&[angle])).unwrap();
        let (x, y) = probe;
        let (a, b) = (alone.get(x, y), both.get(x, y));
        assert!(a > 0.0);
        assert!((a - b).abs() <= 0.05 * a, "bar {angle}: alone {a}, crossed {b}");
    }
}

#[test]
fn inhibitor_round_trip() {
    let f = small_operator(1.0, 1).excitatory().clone();
    let back = derive_inhibitor(&derive_inhibitor(&f, 0.5).unwrap(), 2.0).unwrap();
    assert_eq!(back, f);
    assert!(derive_inhibitor(&f, 0.0).is_err());
}

#[test]
fn one_bank_serves_every_orientation() {
    let op = small_operator(1.0, 12);
    let img = noisy_bar(0.0, 1);
    let bank = op.build_bank(&img).unwrap();
    // one DoG map per (polarity, sigma): excitatory and inhibitory
    assert_eq!(bank.dog_computations(), 2);
    let radii = op.excitatory().tuples().iter().map(|t| t.rho.to_bits()).collect::<std::collections::BTreeSet<_>>();
    assert_eq!(bank.blur_computations(), 2 * radii.len());
    assert_eq!(uniform_orientations(12).len(), op.orientations().len());

    let plain = small_operator(0.0, 12).build_bank(&img).unwrap();
    assert_eq!(plain.dog_computations(), 1);
}

#[test]
fn zero_image_gives_zero_everywhere() {
    let img = GrayImage::filled(40, 40, 0.0);
    let r = small_operator(1.5, 12).multi_orientation_response(&img).unwrap();
    assert_eq!(r.max_value(), 0.0);
}
