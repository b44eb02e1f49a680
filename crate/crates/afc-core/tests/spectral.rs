use std::f64::consts::PI;

use afc_core::spectral::{
    causal_susceptibility, fourier_coefficients, synth_comb, CombDescriptor, CombShape, FrequencyGrid,
    OpticalDepthSpectrum,
};
use num_complex::Complex64;
use proptest::prelude::*;
use rustfft::FftPlanner;

const PERIOD: f64 = 1.0 / 1.5e-6;

fn comb(shape: CombShape, d: f64, finesse: f64, background: f64) -> CombDescriptor {
    CombDescriptor {
        shape,
        peak_depth: d,
        finesse,
        period: PERIOD,
        bandwidth: 1e9,
        background,
    }
}

fn lorentzian_on_grid(d: f64, finesse: f64, periods: usize, spp: usize) -> OpticalDepthSpectrum {
    let grid = FrequencyGrid::centered(0.0, PERIOD, periods, spp).unwrap();
    synth_comb(&comb(CombShape::Lorentzian, d, finesse, 0.0), &grid).unwrap()
}

/// Sum of unit-height Lorentzian images at offset `x` (in periods), truncated at `images`
/// with the tail of the image sum added in closed form.
fn image_sum(x: f64, hwhm: f64, images: i64) -> f64 {
    let h2 = hwhm * hwhm;
    let mut total = 0.0;
    for k in -images..=images {
        let u = x - k as f64;
        total += h2 / (u * u + h2);
    }
    // Tail: sum over |k| > K of h^2/k^2 is about 2 h^2 / K.
    total + 2.0 * h2 / (images as f64 + 0.5)
}

/// Midpoint quadrature of one period of the image sum: returns (mean, |b1|) for unit height
/// normalised to a peak of one.
fn brute_force_stats(finesse: f64) -> (f64, f64) {
    let hwhm = 1.0 / (2.0 * finesse);
    let n = 4_000;
    let peak = image_sum(0.0, hwhm, 1_000);
    let (mut mean, mut b1) = (0.0, Complex64::new(0.0, 0.0));
    for j in 0..n {
        let x = (j as f64 + 0.5) / n as f64 - 0.5;
        let v = image_sum(x, hwhm, 1_000) / peak;
        mean += v;
        b1 += v * Complex64::from_polar(1.0, -2.0 * PI * x);
    }
    (mean / n as f64, b1.norm() / n as f64)
}

#[test]
fn lorentzian_statistics_match_dense_integration() {
    for &finesse in &[2.0, 3.0, 5.0, 8.0, 12.0, 20.0] {
        let (mean, b1) = brute_force_stats(finesse);
        for &d in &[0.5, 2.0, 5.0] {
            let s = lorentzian_on_grid(d, finesse, 20, 64.max((16.0 * finesse) as usize));
            let c = fourier_coefficients(&s, PERIOD, 1).unwrap();
            let expected_mean = d * mean;
            assert!((c.mean_depth() - expected_mean).abs() / expected_mean < 5e-3, "F={finesse} d={d}");
            assert!((s.mean() - expected_mean).abs() / expected_mean < 5e-3);
            let ratio = c.b(1).norm() / c.b(0).re;
            assert!((ratio - b1 / mean).abs() / (b1 / mean) < 5e-3, "F={finesse} d={d}");
            assert!((ratio - (-PI / finesse).exp()).abs() < 5e-3 * ratio);
            assert!((c.mean_depth() - d * (PI / (2.0 * finesse)).tanh()).abs() < 5e-3 * c.mean_depth());
        }
    }
}

#[test]
fn fourier_round_trip_at_ten_harmonics() {
    let d = 3.0;
    let s = lorentzian_on_grid(d, 5.0, 20, 128);
    let c = fourier_coefficients(&s, PERIOD, 10).unwrap();
    let n = s.depth().len() as f64;
    let rms = (s
        .grid()
        .points()
        .zip(s.depth())
        .map(|(nu, &v)| (c.reconstruct(nu) - v).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    assert!(rms < 0.01 * d, "rms {rms}");
    let coarse = fourier_coefficients(&s, PERIOD, 3).unwrap();
    let rms3 = (s
        .grid()
        .points()
        .zip(s.depth())
        .map(|(nu, &v)| (coarse.reconstruct(nu) - v).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    assert!(rms < rms3);
}

/// Fraction of the delay-domain energy of the complex depth that sits at negative delays.
fn negative_delay_fraction(s: &OpticalDepthSpectrum) -> f64 {
    let cs = causal_susceptibility(s);
    let n = cs.values().len();
    let mut buf: Vec<Complex64> = (0..n).map(|i| cs.complex_depth(i)).collect();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    let total: f64 = buf.iter().map(|v| v.norm_sqr()).sum();
    let negative: f64 = buf[n / 2 + 1..].iter().map(|v| v.norm_sqr()).sum();
    negative / total
}

#[test]
fn causal_depth_has_no_negative_delays() {
    assert!(negative_delay_fraction(&lorentzian_on_grid(2.0, 5.0, 20, 80)) < 1e-6);
    let grid = FrequencyGrid::centered(0.0, 1.0, 2000, 16).unwrap();
    let line = grid.points().map(|nu| 1.0 / (1.0 + nu * nu)).collect();
    assert!(negative_delay_fraction(&OpticalDepthSpectrum::new(grid, line).unwrap()) < 1e-6);
}

fn shape() -> impl Strategy<Value = CombShape> {
    prop_oneof![
        Just(CombShape::Lorentzian),
        Just(CombShape::Gaussian),
        Just(CombShape::Cosine),
        Just(CombShape::Flat),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synthesized_combs_are_nonnegative(
        shape in shape(),
        d in 0.0f64..20.0,
        finesse in 0.5f64..16.0,
        background in 0.0f64..3.0,
        bands in 1.0f64..12.0,
    ) {
        let grid = FrequencyGrid::centered(1e6, PERIOD, 12, 128).unwrap();
        let desc = CombDescriptor { bandwidth: bands * PERIOD, ..comb(shape, d, finesse, background) };
        let s = synth_comb(&desc, &grid).unwrap();
        prop_assert!(s.depth().iter().all(|&v| v >= 0.0));
        prop_assert!(s.max() <= d + background + 1e-12);
    }

    #[test]
    fn fourier_coefficients_are_linear(
        d1 in 0.0f64..5.0,
        f1 in 1.0f64..10.0,
        d2 in 0.0f64..5.0,
        alpha in 0.0f64..3.0,
        beta in 0.0f64..3.0,
        harmonics in 1usize..8,
    ) {
        let grid = FrequencyGrid::centered(0.0, PERIOD, 10, 96).unwrap();
        let s1 = synth_comb(&comb(CombShape::Lorentzian, d1, f1, 0.0), &grid).unwrap();
        let s2 = synth_comb(&comb(CombShape::Cosine, d2, 1.0, 0.3), &grid).unwrap();
        let mixed = s1.depth().iter().zip(s2.depth()).map(|(a, b)| alpha * a + beta * b).collect();
        let mixed = OpticalDepthSpectrum::new(grid, mixed).unwrap();
        let c1 = fourier_coefficients(&s1, PERIOD, harmonics).unwrap();
        let c2 = fourier_coefficients(&s2, PERIOD, harmonics).unwrap();
        let cm = fourier_coefficients(&mixed, PERIOD, harmonics).unwrap();
        for p in 0..=harmonics {
            let expected = alpha * c1.b(p) + beta * c2.b(p);
            prop_assert!((cm.b(p) - expected).norm() < 1e-12 * (1.0 + expected.norm()));
        }
    }

    #[test]
    fn synthesis_is_deterministic(d in 0.0f64..10.0, finesse in 1.0f64..10.0) {
        let a = lorentzian_on_grid(d, finesse, 10, 160);
        let b = lorentzian_on_grid(d, finesse, 10, 160);
        prop_assert_eq!(a, b);
    }
}
