//! Property tests for the measure layer: CDF shape, dilation scaling,
//! serialization round trips, and the empirical concentration check.

use freeprob_core::measure::{kolmogorov_distance, linspace};
use freeprob_core::Measure;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_atomic() -> impl Strategy<Value = Measure> {
    (2usize..6)
        .prop_flat_map(|k| {
            (
                proptest::collection::vec(-5.0f64..5.0, k),
                proptest::collection::vec(0.05f64..1.0, k),
            )
        })
        .prop_filter_map("points must be distinct after sorting", |(mut pts, raw)| {
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pts.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            if pts.len() < 2 {
                return None;
            }
            let total: f64 = raw[..pts.len()].iter().sum();
            let masses: Vec<f64> = raw[..pts.len()].iter().map(|m| m / total).collect();
            Measure::atomic(pts, masses).ok()
        })
}

fn arb_measure() -> impl Strategy<Value = Measure> {
    prop_oneof![
        arb_atomic(),
        (0.25f64..4.0).prop_map(|v| Measure::semicircle(v).unwrap()),
        (1.5f64..6.0, 0.1f64..2.0)
            .prop_map(|(r, j)| Measure::free_poisson(r, j).unwrap()),
        proptest::collection::vec(-4.0f64..4.0, 3..40)
            .prop_map(|s| Measure::empirical(s).unwrap()),
        (1.0f64..3.0).prop_map(|w| {
            let grid = linspace(-w, w, 201);
            let density = grid.iter().map(|x| (w * w - x * x).max(0.0)).collect();
            Measure::grid_density(grid, density).unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// CDF is monotone over a 1000-point sweep and clamps to {0, 1} outside
    /// the support interval.
    #[test]
    fn cdf_monotone_and_clamped(m in arb_measure()) {
        let (lo, hi) = m.support_interval();
        let sweep = linspace(lo - 1.0, hi + 1.0, 1000);
        let mut prev = -1.0;
        for &x in &sweep {
            let f = m.cdf(x);
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!(f >= prev - 1e-15);
            prop_assert!(m.cdf_left(x) <= f + 1e-15);
            prev = f;
        }
        prop_assert!(m.cdf(lo - 1e-9) == 0.0);
        prop_assert!(m.cdf(hi) >= 1.0 - 1e-9);
    }

    /// Moments scale as c^k under dilation.
    #[test]
    fn dilation_scales_moments(m in arb_measure(), c in prop_oneof![-3.0f64..-0.2, 0.2f64..3.0]) {
        let d = match m.dilate(c) {
            Ok(d) => d,
            // Reflected free Poisson with an atom is not representable.
            Err(_) => return Ok(()),
        };
        for k in 1..=4u32 {
            let want = c.powi(k as i32) * m.moment(k).unwrap();
            let got = d.moment(k).unwrap();
            let scale = want.abs().max(1.0);
            prop_assert!((got - want).abs() <= 1e-8 * scale, "k={k}: {got} vs {want}");
        }
    }

    /// Serialization round-trips bit-exactly.
    #[test]
    fn text_round_trip(m in arb_measure()) {
        let text = m.to_text();
        let back = Measure::from_text(&text).unwrap();
        prop_assert_eq!(m, back);
    }

    /// The Kolmogorov distance is symmetric and vanishes on equal inputs.
    #[test]
    fn distance_symmetry(a in arb_atomic(), b in arb_atomic()) {
        let dab = kolmogorov_distance(&a, &b);
        let dba = kolmogorov_distance(&b, &a);
        prop_assert_eq!(dab, dba);
        prop_assert_eq!(kolmogorov_distance(&a, &a), 0.0);
        prop_assert!((0.0..=1.0).contains(&dab));
    }
}

/// Distribution-free concentration: the empirical law of N draws sits
/// within 2/sqrt(N) of the sampled law in at least 95 of 100 seeded trials.
#[test]
fn empirical_concentration_around_semicircle() {
    let omega = Measure::standard_semicircle();
    let n = 400usize;
    let bound = 2.0 / (n as f64).sqrt();
    let mut hits = 0;
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xDFa0 + trial);
        let samples: Vec<f64> = (0..n).map(|_| omega.sample(&mut rng)).collect();
        let emp = Measure::empirical(samples).unwrap();
        if kolmogorov_distance(&emp, &omega) < bound {
            hits += 1;
        }
    }
    assert!(hits >= 95, "only {hits}/100 trials under the bound");
}
