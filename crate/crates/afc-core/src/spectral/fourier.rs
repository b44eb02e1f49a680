use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::grid::OpticalDepthSpectrum;
use crate::error::{AfcError, Result};

/// Which part of the spectrum enters the Fourier projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "camelCase")]
pub enum WindowChoice {
    /// Largest whole number of periods centred in the supplied band.
    #[default]
    Full,
    /// The given number of periods around the band centre.
    CentralPeriods(usize),
}

/// Where the projection was taken; kept alongside the coefficients as provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalysisWindow {
    pub start: f64,
    pub periods: usize,
    /// Fraction of the supplied band left out of the window.
    pub trimmed_fraction: f64,
    /// Frequency at which the harmonic phases are referenced.
    pub reference: f64,
    pub choice: WindowChoice,
}

/// One-sided Fourier coefficients `b_p`, `p = 0..=P`, of a periodic optical depth:
/// `d(nu) = b_0 + 2 Re sum_p b_p exp(2 pi i p (nu - ref) / period)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoefficientSet {
    period: f64,
    b: Vec<Complex64>,
    window: AnalysisWindow,
}

impl FourierCoefficientSet {
    /// Build a set from explicit coefficients. `b[0]` must be real and non-negative.
    pub fn from_coefficients(period: f64, b: Vec<Complex64>, reference: f64) -> Result<Self> {
        if !(period > 0.0) {
            return Err(AfcError::invalid("period", format!("must be > 0, got {period}")));
        }
        let Some(b0) = b.first() else {
            return Err(AfcError::invalid("b", "at least b_0 is required"));
        };
        if b0.im != 0.0 || !(b0.re >= 0.0) {
            return Err(AfcError::invalid("b", format!("b_0 must be real and >= 0, got {b0}")));
        }
        Ok(FourierCoefficientSet {
            period,
            b,
            window: AnalysisWindow {
                start: reference,
                periods: 0,
                trimmed_fraction: 0.0,
                reference,
                choice: WindowChoice::Full,
            },
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.b
    }

    /// `b_p`, zero beyond the stored order.
    pub fn b(&self, p: usize) -> Complex64 {
        self.b.get(p).copied().unwrap_or_default()
    }

    pub fn mean_depth(&self) -> f64 {
        self.b[0].re
    }

    pub fn harmonics(&self) -> usize {
        self.b.len() - 1
    }

    pub fn window(&self) -> &AnalysisWindow {
        &self.window
    }

    /// Susceptibility coefficients scaled by `k L`, from keeping only the `p >= 0` terms:
    /// `c_0 = i b_0` (real part fixed to 0) and `c_p = 2 i b_p` for `p >= 1`.
    pub fn causal_coefficients(&self) -> Vec<Complex64> {
        let i = Complex64::i();
        self.b
            .iter()
            .enumerate()
            .map(|(p, &bp)| if p == 0 { i * bp.re } else { 2.0 * i * bp })
            .collect()
    }

    /// Evaluate the truncated series at `nu`.
    pub fn reconstruct(&self, nu: f64) -> f64 {
        let x = 2.0 * PI * (nu - self.window.reference) / self.period;
        self.b[0].re
            + 2.0
                * self.b[1..]
                    .iter()
                    .enumerate()
                    .map(|(k, bp)| (bp * Complex64::from_polar(1.0, (k + 1) as f64 * x)).re)
                    .sum::<f64>()
    }
}

/// Project `s` onto `exp(-2 pi i p nu / period)` over the full band (whole periods only).
pub fn fourier_coefficients(s: &OpticalDepthSpectrum, period: f64, harmonics: usize) -> Result<FourierCoefficientSet> {
    fourier_coefficients_in(s, period, harmonics, WindowChoice::Full)
}

/// As [`fourier_coefficients`] with an explicit window choice.
///
/// Each sample stands for its cell of width `step`; cells cut by the window edge are
/// weighted by their overlap. When the window covers whole cells this is the periodic
/// rectangle rule, exact for band-limited periodic data.
pub fn fourier_coefficients_in(
    s: &OpticalDepthSpectrum,
    period: f64,
    harmonics: usize,
    choice: WindowChoice,
) -> Result<FourierCoefficientSet> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(AfcError::invalid("period", format!("must be > 0, got {period}")));
    }
    if harmonics < 1 {
        return Err(AfcError::invalid("harmonics", "at least one harmonic is required"));
    }
    let grid = s.grid();
    let available = (grid.span() / period + 1e-9).floor();
    if available < 1.0 {
        return Err(AfcError::Domain(format!(
            "analysis band {} Hz is shorter than one period {} Hz",
            grid.span(),
            period
        )));
    }
    let periods = match choice {
        WindowChoice::Full => available as usize,
        WindowChoice::CentralPeriods(m) => {
            if m == 0 || m as f64 > available {
                return Err(AfcError::Domain(format!(
                    "requested {m} central periods but the band holds {available}"
                )));
            }
            m
        }
    };
    let width = periods as f64 * period;
    let start = grid.midpoint() - 0.5 * width;
    let end = start + width;
    let reference = grid.center();
    let half = 0.5 * grid.step();

    let mut b = vec![Complex64::default(); harmonics + 1];
    for (nu, &d) in grid.points().zip(s.depth()) {
        let overlap = ((nu + half).min(end) - (nu - half).max(start)).max(0.0);
        if overlap == 0.0 {
            continue;
        }
        let weight = d * overlap / width;
        let x = -2.0 * PI * (nu - reference) / period;
        for (p, bp) in b.iter_mut().enumerate() {
            *bp += weight * Complex64::from_polar(1.0, p as f64 * x);
        }
    }
    b[0].im = 0.0;

    Ok(FourierCoefficientSet {
        period,
        b,
        window: AnalysisWindow {
            start,
            periods,
            trimmed_fraction: 1.0 - width / grid.span(),
            reference,
            choice,
        },
    })
}
