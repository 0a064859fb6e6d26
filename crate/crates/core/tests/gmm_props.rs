mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trajsign::gmm::{
    gaussian_logpdf, mixture_logpdf, weighted_em_update, weighted_em_update_or_reset, EmSettings,
    Gaussian, Gmm,
};
use trajsign::Error;

#[test]
fn agrees_with_direct_inverse_on_random_spd() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for i in 0..100 {
        let d = 1 + i % 5;
        let cov = random_spd(&mut rng, d);
        let mean: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let g = Gaussian::new(mean.clone(), cov.clone()).unwrap();
        let got = gaussian_logpdf(&x, &g).unwrap();
        let want = naive_gauss_pdf(&x, &mean, &cov).ln();
        assert!(
            (got - want).abs() / want.abs().max(1.0) < 1e-8,
            "d={d}: {got} vs {want}"
        );
    }
}

#[test]
fn one_dimensional_mixtures_integrate_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let g = random_gmm(&mut rng, 2, 1);
        let lo = g
            .components()
            .iter()
            .map(|c| c.mean()[0] - 10.0 * c.covariance()[0].sqrt())
            .fold(f64::INFINITY, f64::min);
        let hi = g
            .components()
            .iter()
            .map(|c| c.mean()[0] + 10.0 * c.covariance()[0].sqrt())
            .fold(f64::NEG_INFINITY, f64::max);
        let integral = trapezoid(|x| mixture_logpdf(&[x], &g).unwrap().exp(), lo, hi, 10_001);
        assert!((integral - 1.0).abs() < 1e-6, "{integral}");
    }
}

#[test]
fn identical_components_collapse() {
    let g = Gaussian::new(vec![0.5, -1.0], vec![2.0, 0.3, 0.3, 1.0]).unwrap();
    let mix = Gmm::new(vec![0.3, 0.7], vec![g.clone(), g.clone()]).unwrap();
    for x in [[0.0, 0.0], [3.0, -2.0]] {
        assert!(
            (mixture_logpdf(&x, &mix).unwrap() - gaussian_logpdf(&x, &g).unwrap()).abs() < 1e-12
        );
    }
}

#[test]
fn hard_assignments_give_cluster_means() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let a: Vec<[f64; 1]> = (0..40).map(|_| [rng.random_range(-6.0..-4.0)]).collect();
    let b: Vec<[f64; 1]> = (0..25).map(|_| [rng.random_range(4.0..7.0)]).collect();
    let samples: Vec<&[f64]> = a.iter().chain(&b).map(|x| &x[..]).collect();
    let resp: Vec<f64> = (0..65)
        .flat_map(|i| if i < 40 { [1.0, 0.0] } else { [0.0, 1.0] })
        .collect();
    let prior = Gmm::new(
        vec![0.5, 0.5],
        vec![Gaussian::new(vec![0.0], vec![1.0]).unwrap(); 2],
    )
    .unwrap();
    let g = weighted_em_update(&samples, &resp, &prior, &EmSettings::default()).unwrap();
    let mean_a = a.iter().map(|x| x[0]).sum::<f64>() / 40.0;
    let mean_b = b.iter().map(|x| x[0]).sum::<f64>() / 25.0;
    assert!((g.components()[0].mean()[0] - mean_a).abs() < 1e-12);
    assert!((g.components()[1].mean()[0] - mean_b).abs() < 1e-12);
    assert!((g.weights()[0] - 40.0 / 65.0).abs() < 1e-12);
}

#[test]
fn empty_component_is_reported_then_reset() {
    let xs: Vec<[f64; 2]> = (0..10).map(|i| [i as f64, (i * i) as f64 * 0.1]).collect();
    let samples: Vec<&[f64]> = xs.iter().map(|x| &x[..]).collect();
    let resp: Vec<f64> = (0..10).flat_map(|_| [1.0, 0.0]).collect();
    let g = Gaussian::new(vec![0.0, 0.0], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
    let prior = Gmm::new(vec![0.5, 0.5], vec![g.clone(), g]).unwrap();
    let settings = EmSettings::default();
    assert!(matches!(
        weighted_em_update(&samples, &resp, &prior, &settings),
        Err(Error::DegenerateComponent { component: 1 })
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let up = weighted_em_update_or_reset(&samples, &resp, &prior, &settings, &mut rng).unwrap();
    assert_eq!(up.reset, vec![1]);
    assert!((up.gmm.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(xs.iter().any(|x| x[..] == *up.gmm.components()[1].mean()));
}

fn min_eigenvalue_2x2(c: &[f64]) -> f64 {
    let (a, b, d) = (c[0], c[1], c[3]);
    0.5 * (a + d) - (0.25 * (a - d).powi(2) + b * b).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn component_order_does_not_matter(seed in any::<u64>(), m in 1usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_gmm(&mut rng, m, 3);
        let mut w = g.weights().to_vec();
        let mut c = g.components().to_vec();
        w.reverse();
        c.reverse();
        let r = Gmm::new(w, c).unwrap();
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
        prop_assert!((mixture_logpdf(&x, &g).unwrap() - mixture_logpdf(&x, &r).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn updates_keep_weights_normalized_and_covariances_floored(seed in any::<u64>(), n in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // a collinear cloud has a singular scatter matrix
        let xs: Vec<[f64; 2]> = (0..n).map(|_| { let t = rng.random_range(-1.0..1.0); [t, 2.0 * t] }).collect();
        let samples: Vec<&[f64]> = xs.iter().map(|x| &x[..]).collect();
        let resp: Vec<f64> = (0..n * 2).map(|_| rng.random_range(0.0..1.0)).collect();
        let prior = random_gmm(&mut rng, 2, 2);
        let up = weighted_em_update_or_reset(&samples, &resp, &prior, &EmSettings::default(), &mut rng).unwrap();
        prop_assert!((up.gmm.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for c in up.gmm.components() {
            prop_assert!(min_eigenvalue_2x2(c.covariance()) >= 1e-6 * (1.0 - 1e-6));
        }
    }
}
