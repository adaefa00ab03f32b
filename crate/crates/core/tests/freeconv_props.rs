//! Randomized structural checks of the free convolution: associativity of
//! the binary fold, moment additivity, subordination range, and agreement
//! between the n-fold atom rule and pairwise composition.

use freeprob_core::freeconv::{
    convolution_atoms, free_convolve, nfold_atoms, AtomList, ConvolveOptions,
};
use freeprob_core::measure::kolmogorov_distance;
use freeprob_core::Measure;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_atomic(rng: &mut ChaCha8Rng) -> Measure {
    let k = rng.gen_range(2..=4usize);
    let mut pts: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    let raw: Vec<f64> = (0..pts.len()).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    Measure::atomic(pts, raw.iter().map(|m| m / total).collect()).unwrap()
}

#[test]
fn binary_fold_associativity() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA550C);
    // Grid-density inputs converge slowly near spectral edges, so the outer
    // convolutions get a looser residual target and a deeper budget. The
    // defect between the two routes concentrates on smeared atom bumps, so
    // eta is pinned to one grid pitch to keep those bumps tight.
    let conv = |m1: &Measure, m2: &Measure| -> Measure {
        let (l1, h1) = m1.support_interval();
        let (l2, h2) = m2.support_interval();
        let width = (h1 + h2 + 1.0) - (l1 + l2 - 1.0);
        let opts = ConvolveOptions {
            resolution: 4096,
            eta: Some(width / 4096.0),
            tol: 1e-9,
            max_iter: 8000,
            ..ConvolveOptions::default()
        };
        free_convolve(m1, m2, &opts).unwrap().measure
    };
    for trial in 0..5 {
        let a = random_atomic(&mut rng);
        let b = random_atomic(&mut rng);
        let c = random_atomic(&mut rng);
        let left = conv(&conv(&a, &b), &c);
        let right = conv(&a, &conv(&b, &c));
        let d = kolmogorov_distance(&left, &right);
        assert!(d <= 5e-3, "trial {trial}: associativity defect {d}");
    }
}

#[test]
fn moment_additivity_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x30317);
    for trial in 0..8 {
        let a = random_atomic(&mut rng);
        let b = random_atomic(&mut rng);
        let opts = ConvolveOptions {
            resolution: 16384,
            eta: Some({
                let (la, ha) = a.support_interval();
                let (lb, hb) = b.support_interval();
                (ha + hb + 1.0 - (la + lb - 1.0)) / 16384.0
            }),
            ..ConvolveOptions::default()
        };
        let out = free_convolve(&a, &b, &opts).unwrap().measure;
        let mean_err = (out.mean() - a.mean() - b.mean()).abs();
        let want_var = a.variance() + b.variance();
        let var_err = (out.variance() - want_var).abs() / want_var;
        assert!(mean_err <= 1e-3, "trial {trial}: mean error {mean_err}");
        assert!(var_err <= 5e-3, "trial {trial}: variance error {var_err}");
    }
}

#[test]
fn subordination_maps_stay_above_the_base_height() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5150);
    for _ in 0..5 {
        let a = random_atomic(&mut rng);
        let b = random_atomic(&mut rng);
        let out = free_convolve(&a, &b, &ConvolveOptions::default()).unwrap();
        assert!(out.diagnostics.worst_halfplane_margin() >= -1e-9);
    }
}

#[test]
fn nfold_matches_pairwise_composition() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF01D);
    for _ in 0..50 {
        let k = rng.gen_range(1..=3usize);
        let mut entries = Vec::new();
        let mut budget = 1.0f64;
        for i in 0..k {
            let m = rng.gen_range(0.05..budget.min(0.95));
            entries.push((i as f64 + rng.gen_range(0.0..0.4), m));
            budget -= m;
            if budget < 0.06 {
                break;
            }
        }
        let Ok(list) = AtomList::new(entries) else {
            continue;
        };
        let n = rng.gen_range(2..=5u32);
        let folded = nfold_atoms(&list, n);
        let mut manual = list.clone();
        for _ in 1..n {
            manual = convolution_atoms(&manual, &list);
        }
        assert_eq!(folded, manual);
    }
}

#[test]
fn nonconvergence_reports_worst_point() {
    // A starved iteration budget must abort with the diagnostic rather
    // than return a bad density.
    let b = Measure::atomic(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
    let opts = ConvolveOptions {
        window: Some((-3.0, 3.0)),
        resolution: 4096,
        eta: Some(6.0 / 4096.0),
        tol: 1e-12,
        max_iter: 3,
        ..ConvolveOptions::default()
    };
    match free_convolve(&b, &b, &opts) {
        Err(freeprob_core::freeconv::ConvolveError::NonConvergence {
            failed,
            total,
            worst_residual,
            ..
        }) => {
            assert!(failed * 100 > total);
            assert!(worst_residual > 0.0);
        }
        other => panic!("expected a non-convergence diagnostic, got {other:?}"),
    }
}
