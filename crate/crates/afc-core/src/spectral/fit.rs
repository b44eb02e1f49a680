use std::f64::consts::PI;

use super::comb::{tooth_profile, CombDescriptor, CombShape};
use super::fourier::fourier_coefficients;
use super::grid::OpticalDepthSpectrum;
use crate::error::{AfcError, Result};
use crate::optimize::maximize_log_bracketed;

/// Below this harmonic contrast `|b_1|/b_0` the spectrum is treated as unstructured.
pub const MIN_HARMONIC_CONTRAST: f64 = 0.05;

const FINESSE_RANGE: (f64, f64) = (0.3, 500.0);

/// Least-squares fit of a periodized Lorentzian comb `background + d * profile(F)`.
///
/// Tooth positions come from the phase of the first harmonic; `d` and `background` are
/// solved linearly for each trial finesse and the finesse by a 1-D search. Returns the
/// fitted descriptor and the RMS misfit divided by the fitted peak depth.
pub fn fit_lorentzian_comb(s: &OpticalDepthSpectrum, period: f64) -> Result<(CombDescriptor, f64)> {
    let grid = s.grid();
    if grid.span() < 3.0 * period * (1.0 - 1e-9) {
        return Err(AfcError::FitFailure(format!(
            "spectrum spans {:.3} periods, at least 3 teeth are needed",
            grid.span() / period
        )));
    }
    let coeffs = fourier_coefficients(s, period, 1)?;
    let b0 = coeffs.mean_depth();
    let b1 = coeffs.b(1);
    if b0 <= 0.0 || b1.norm() / b0 < MIN_HARMONIC_CONTRAST {
        return Err(AfcError::FitFailure(format!(
            "no periodic structure at period {period} Hz (|b1|/b0 = {:.4})",
            if b0 > 0.0 { b1.norm() / b0 } else { 0.0 }
        )));
    }
    let tooth_center = coeffs.window().reference - b1.arg() * period / (2.0 * PI);
    let phases: Vec<f64> = grid.points().map(|nu| (nu - tooth_center) / period).collect();
    let y = s.depth();

    let solve = |finesse: f64| -> (f64, f64, f64) {
        let prof: Vec<f64> = phases
            .iter()
            .map(|&x| tooth_profile(CombShape::Lorentzian, finesse, x))
            .collect();
        let n = y.len() as f64;
        let (sp, spp) = prof.iter().fold((0.0, 0.0), |(a, b), p| (a + p, b + p * p));
        let sy: f64 = y.iter().sum();
        let spy: f64 = prof.iter().zip(y).map(|(p, v)| p * v).sum();
        let det = n * spp - sp * sp;
        let (mut d, mut bg) = if det.abs() > 1e-12 * n * spp {
            ((n * spy - sp * sy) / det, (spp * sy - sp * spy) / det)
        } else {
            (0.0, sy / n)
        };
        if bg < 0.0 {
            bg = 0.0;
            d = spy / spp;
        }
        if d < 0.0 {
            d = 0.0;
            bg = (sy / n).max(0.0);
        }
        let ssr: f64 = prof
            .iter()
            .zip(y)
            .map(|(p, v)| (v - bg - d * p).powi(2))
            .sum();
        (d, bg, ssr)
    };

    let (finesse, _) = maximize_log_bracketed(|f| -solve(f).2, FINESSE_RANGE.0, FINESSE_RANGE.1, 1e-9);
    let (d, bg, ssr) = solve(finesse);
    if !(d > 0.0) {
        return Err(AfcError::FitFailure("fitted peak depth is zero".into()));
    }
    let residual = (ssr / y.len() as f64).sqrt() / d;
    let desc = CombDescriptor {
        shape: CombShape::Lorentzian,
        peak_depth: d,
        finesse,
        period,
        bandwidth: grid.span(),
        background: bg,
    };
    Ok((desc, residual))
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::spectral::comb::synth_comb;
    use crate::spectral::grid::FrequencyGrid;

    fn lorentzian(d: f64, f: f64) -> OpticalDepthSpectrum {
        let g = FrequencyGrid::centered(0.0, 1.0, 20, 64).unwrap();
        synth_comb(&CombDescriptor::lorentzian(d, f, 1.0, 20.0), &g).unwrap()
    }

    #[test]
    fn round_trip_recovers_parameters() {
        let (desc, residual) = fit_lorentzian_comb(&lorentzian(2.0, 5.0), 1.0).unwrap();
        assert!((desc.peak_depth - 2.0).abs() < 0.02);
        assert!((desc.finesse - 5.0).abs() < 0.1);
        assert!(desc.background.abs() < 1e-6);
        assert!(residual < 1e-6);
    }

    #[test]
    fn recovers_background_and_offset() {
        let g = FrequencyGrid::centered(0.3e6, 0.5e6, 12, 128).unwrap();
        let mut desc = CombDescriptor::lorentzian(1.2, 9.0, 0.5e6, 6e6);
        desc.background = 0.4;
        let s = synth_comb(&desc, &g).unwrap();
        let (fit, _) = fit_lorentzian_comb(&s, 0.5e6).unwrap();
        assert!((fit.peak_depth - 1.2).abs() < 1e-3);
        assert!((fit.finesse - 9.0).abs() < 1e-2);
        assert!((fit.background - 0.4).abs() < 1e-3);
    }

    #[test]
    fn flat_spectrum_fails() {
        let g = FrequencyGrid::centered(0.0, 1.0, 20, 64).unwrap();
        let s = OpticalDepthSpectrum::new(g, vec![2.0; g.count()]).unwrap();
        assert!(matches!(fit_lorentzian_comb(&s, 1.0), Err(AfcError::FitFailure(_))));
    }

    #[test]
    fn noisy_round_trip() {
        let clean = lorentzian(3.0, 8.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let noisy: Vec<f64> = clean
            .depth()
            .iter()
            .map(|d| (d + rng.random_range(-0.02..=0.02)).max(0.0))
            .collect();
        let s = OpticalDepthSpectrum::new(*clean.grid(), noisy).unwrap();
        let (fit, _) = fit_lorentzian_comb(&s, 1.0).unwrap();
        assert!((fit.finesse - 8.0).abs() / 8.0 < 0.05, "F = {}", fit.finesse);
    }
}
