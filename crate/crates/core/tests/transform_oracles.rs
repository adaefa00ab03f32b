//! Oracle-driven checks of the transform layer: quadrature cross-checks,
//! the Nevanlinna property, decay at infinity, and inversion fidelity.

use freeprob_core::measure::kolmogorov_distance;
use freeprob_core::quad::adaptive_simpson;
use freeprob_core::transforms::{
    cauchy_transform, default_inversion_eta, semicircle_cauchy, stieltjes_invert,
};
use freeprob_core::{HalfPlanePoint, Measure};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn hp(re: f64, im: f64) -> HalfPlanePoint {
    HalfPlanePoint::new(re, im).unwrap()
}

/// Quadrature oracle for the transform of a density-backed law.
fn transform_by_quadrature(m: &Measure, z: Complex64) -> Complex64 {
    let (lo, hi) = m.support_interval();
    let re = adaptive_simpson(
        |t| m.density_at(t) * ((z.re - t) / ((z.re - t).powi(2) + z.im * z.im)),
        lo,
        hi,
        1e-11,
        40,
    );
    let im = adaptive_simpson(
        |t| m.density_at(t) * (-z.im / ((z.re - t).powi(2) + z.im * z.im)),
        lo,
        hi,
        1e-11,
        40,
    );
    Complex64::new(re.value, im.value)
}

#[test]
fn semicircle_transform_matches_quadrature_oracle() {
    let omega = Measure::standard_semicircle();
    // G(i) = -0.618034 i from the closed form; the quadrature oracle and
    // the golden-ratio value agree.
    let g = cauchy_transform(&omega, hp(0.0, 1.0));
    assert!((g - Complex64::new(0.0, -0.6180339887498949)).norm() < 1e-12);
    for &(x, y) in &[(0.0, 1.0), (0.0, 2.0), (1.3, 0.4), (-2.5, 0.2)] {
        let z = Complex64::new(x, y);
        let oracle = transform_by_quadrature(&omega, z);
        let direct = cauchy_transform(&omega, hp(x, y));
        assert!(
            (oracle - direct).norm() < 1e-7,
            "at {z:?}: {direct:?} vs {oracle:?}"
        );
    }
}

#[test]
fn nevanlinna_property_random_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7A);
    let measures = vec![
        Measure::standard_semicircle(),
        Measure::free_poisson(4.0, 0.25).unwrap(),
        Measure::atomic(vec![-1.5, 0.25, 2.0], vec![0.5, 0.25, 0.25]).unwrap(),
        Measure::empirical(vec![-0.4, 0.1, 0.1, 1.7]).unwrap(),
        Measure::standard_semicircle().to_grid(501).unwrap(),
    ];
    for m in &measures {
        for _ in 0..200 {
            let x = rng.gen_range(-6.0..6.0);
            let y = 10f64.powf(rng.gen_range(-4.0..1.0));
            let g = cauchy_transform(m, hp(x, y));
            assert!(g.im < 0.0, "Im G = {} at {x}+{y}i for {m:?}", g.im);
            assert!(g.norm() <= 1.0 / y + 1e-9, "|G| bound violated");
        }
    }
}

#[test]
fn transform_decay_at_infinity() {
    let measures = vec![
        Measure::standard_semicircle(),
        Measure::free_poisson(2.0, 0.5).unwrap(),
        Measure::atomic(vec![-2.0, 3.0], vec![0.6, 0.4]).unwrap(),
    ];
    for m in &measures {
        let bound = m.moment(2).unwrap() + 1.0;
        for &r in &[10.0, 100.0] {
            for &angle in &[0.3, 0.9, 1.5, 2.4] {
                let z = Complex64::from_polar(r, angle);
                if z.im <= 0.1 {
                    continue;
                }
                let g = cauchy_transform(m, hp(z.re, z.im));
                let defect = (z * g - 1.0).norm();
                assert!(
                    defect <= bound / z.im,
                    "decay violated at |z| = {r}: {defect} > {}",
                    bound / z.im
                );
            }
        }
    }
}

#[test]
fn inversion_recovers_atom_mass() {
    // Point mass at a: integrating the recovered density over
    // (a - 10 eta, a + 10 eta) captures at least 0.93 of the mass.
    let a = 0.7;
    let eta = 1e-2;
    let inv = stieltjes_invert(
        |z| Complex64::new(1.0, 0.0) / (z - a),
        (a - 3.0, a + 3.0),
        8192,
        eta,
    )
    .unwrap();
    let captured = inv.measure.cdf(a + 10.0 * eta) - inv.measure.cdf(a - 10.0 * eta);
    assert!(captured >= 0.93, "captured {captured}");
}

#[test]
fn inversion_round_trip_on_semicircle() {
    let omega = Measure::standard_semicircle();
    let inv = stieltjes_invert(
        |z| semicircle_cauchy(HalfPlanePoint::new(z.re, z.im).unwrap(), 1.0),
        (-3.0, 3.0),
        4096,
        1e-3,
    )
    .unwrap();
    let d = kolmogorov_distance(&inv.measure, &omega);
    assert!(d <= 5e-3, "round trip distance {d}");
}

#[test]
fn grid_transform_consistent_with_closed_form_on_z_grid() {
    // Agreement between the per-cell log-kernel integration and the closed
    // form on a 100-point z-grid.
    let omega = Measure::standard_semicircle();
    let grid = omega.to_grid(8001).unwrap();
    for i in 0..100 {
        let x = -4.0 + 8.0 * i as f64 / 99.0;
        let y = 0.05 + 1.5 * (i as f64 / 99.0);
        let a = cauchy_transform(&grid, hp(x, y));
        let b = semicircle_cauchy(hp(x, y), 1.0);
        assert!((a - b).norm() < 1e-4, "at {x}+{y}i: {:?} vs {:?}", a, b);
    }
}

#[test]
fn default_eta_follows_grid_pitch() {
    let eta = default_inversion_eta((-3.0, 3.0), 2048);
    assert!((eta - 4.0 * 6.0 / 2048.0).abs() < 1e-15);
}
