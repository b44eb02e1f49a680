use std::f64::consts::PI;

use afc_core::efficiency::{
    efficiency_from_coefficients, efficiency_lorentzian, numeric_optimal_finesse, optimal_efficiency,
    optimal_finesse, FORWARD_LIMIT,
};
use afc_core::spectral::{fourier_coefficients, synth_comb, CombDescriptor, FrequencyGrid};
use proptest::prelude::*;

const PERIOD: f64 = 1.0 / 1.5e-6;

/// The Lorentzian efficiency written out directly, as an independent oracle.
fn eta_closed_form(d: f64, finesse: f64) -> f64 {
    let x = PI / finesse;
    let mean = d * (x / 2.0).tanh();
    let b1 = mean * (-x).exp();
    b1 * b1 * (-mean).exp()
}

fn synthesized_eta(d: f64, finesse: f64, scale: f64) -> (f64, f64, f64) {
    let spp = 64.max((16.0 * finesse).ceil() as usize);
    let grid = FrequencyGrid::centered(0.0, PERIOD, 20, spp).unwrap();
    let s = synth_comb(&CombDescriptor::lorentzian(d, finesse, PERIOD, 20.0 * PERIOD), &grid)
        .unwrap()
        .scaled(scale)
        .unwrap();
    let c = fourier_coefficients(&s, PERIOD, 1).unwrap();
    (efficiency_from_coefficients(&c).eta, c.b(0).re, c.b(1).norm())
}

#[test]
fn optimum_never_exceeds_forward_limit() {
    for i in 0..=400 {
        let d = 10f64.powf(-2.0 + i as f64 * 0.02);
        let eta = optimal_efficiency(d).eta;
        assert!(eta <= FORWARD_LIMIT);
        let (_, eta_star) = numeric_optimal_finesse(d).unwrap();
        assert!(eta_star <= FORWARD_LIMIT);
    }
}

#[test]
fn exact_optimum_dominates_approximation_at_its_finesse() {
    for i in 1..=200 {
        let d = 0.1 * i as f64;
        let (_, eta_star) = numeric_optimal_finesse(d).unwrap();
        let at_approx = efficiency_lorentzian(d, optimal_finesse(d)).unwrap().eta;
        assert!(eta_star >= at_approx - 1e-12, "d={d}");
    }
}

#[test]
fn numeric_optimum_matches_dense_scan() {
    for &d in &[0.5, 1.0, 2.0, 4.0, 8.0, 20.0] {
        let (f_star, eta_star) = numeric_optimal_finesse(d).unwrap();
        let (mut best_f, mut best) = (0.0, 0.0);
        for j in 0..200_000 {
            let f = 0.5 + j as f64 * 5e-4;
            let eta = eta_closed_form(d, f);
            if eta > best {
                best = eta;
                best_f = f;
            }
        }
        assert!((f_star - best_f).abs() < 1e-3, "d={d}: {f_star} vs {best_f}");
        assert!(eta_star >= best - 1e-12);
    }
}

#[test]
fn efficiency_has_single_interior_maximum_in_finesse() {
    for &d in &[0.1, 0.5, 1.0, 3.0, 10.0, 50.0] {
        let values: Vec<f64> = (0..2000)
            .map(|j| efficiency_lorentzian(d, 0.2 * 1.004f64.powi(j)).unwrap().eta)
            .collect();
        let slopes: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
        let changes = slopes.windows(2).filter(|s| (s[0] > 0.0) != (s[1] > 0.0)).count();
        assert_eq!(changes, 1, "d={d}");
        assert!(slopes[0] > 0.0 && *slopes.last().unwrap() < 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fourier_pipeline_matches_closed_form(d in 0.5f64..5.0, finesse in 2.0f64..20.0) {
        let (eta, _, _) = synthesized_eta(d, finesse, 1.0);
        let closed = efficiency_lorentzian(d, finesse).unwrap().eta;
        prop_assert!((eta - closed).abs() / closed < 0.01);
        prop_assert!((closed - eta_closed_form(d, finesse)).abs() < 1e-14);
    }

    #[test]
    fn scaling_the_depth_scales_the_coefficients(d in 0.2f64..4.0, finesse in 2.0f64..12.0, alpha in 0.1f64..4.0) {
        let (_, b0, b1) = synthesized_eta(d, finesse, 1.0);
        let (eta, b0a, b1a) = synthesized_eta(d, finesse, alpha);
        prop_assert!((b0a - alpha * b0).abs() < 1e-12 * b0a.max(1.0));
        prop_assert!((b1a - alpha * b1).abs() < 1e-12 * b1a.max(1.0));
        let expected = alpha * alpha * b1 * b1 * (-alpha * b0).exp();
        prop_assert!((eta - expected).abs() < 1e-12 * expected.max(1e-3));
    }

    #[test]
    fn optimal_finesse_is_linear_in_depth(d in 0.0f64..100.0) {
        prop_assert!((optimal_finesse(d) - PI * (1.0 + d / 4.0)).abs() < 1e-12 * optimal_finesse(d));
    }
}
