//! Forward-retrieval storage efficiency of a comb.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AfcError, Result};
use crate::optimize::maximize_log_bracketed;
use crate::spectral::comb::{lorentzian_harmonic_ratio, lorentzian_mean_depth};
use crate::spectral::FourierCoefficientSet;

/// `4 e^-2`, the forward-retrieval ceiling.
pub const FORWARD_LIMIT: f64 = 4.0 * 0.135_335_283_236_612_7;

/// Search interval for the exact optimum over finesse.
pub const FINESSE_SEARCH_RANGE: (f64, f64) = (PI / 4.0, 100.0 * PI);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EfficiencyMethod {
    Fourier,
    LorentzianClosedForm,
    NumericOptimum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EfficiencyResult {
    pub eta: f64,
    pub mean_depth: f64,
    /// `|c_1| / Im(c_0)`, which is `2 |b_1| / b_0`.
    pub contrast_ratio: f64,
    pub method: EfficiencyMethod,
    /// Set when the medium has zero mean depth and so produces no echo.
    pub transparent: bool,
}

impl EfficiencyResult {
    /// Efficiency clamped to `[0, 1]` for display.
    pub fn reported_eta(&self) -> f64 {
        self.eta.clamp(0.0, 1.0)
    }
}

/// Echo efficiency from the first two Fourier coefficients: `|b_1|^2 exp(-b_0)`.
pub fn efficiency_from_coefficients(coeffs: &FourierCoefficientSet) -> EfficiencyResult {
    let b0 = coeffs.mean_depth();
    let b1 = coeffs.b(1);
    if b0 == 0.0 {
        return EfficiencyResult {
            eta: 0.0,
            mean_depth: 0.0,
            contrast_ratio: 0.0,
            method: EfficiencyMethod::Fourier,
            transparent: true,
        };
    }
    let eta = b1.norm_sqr() * (-b0).exp();

    // Same quantity written with susceptibility coefficients; guards the coefficient map.
    let c = coeffs.causal_coefficients();
    let im_c0 = c[0].im;
    let c1 = c.get(1).copied().unwrap_or_default();
    let mean = im_c0;
    let unreduced = 0.25 * c1.norm_sqr() / (im_c0 * im_c0) * mean * mean * (-mean).exp();
    debug_assert!((unreduced - eta).abs() <= 1e-12 * eta.max(1e-300));

    EfficiencyResult {
        eta,
        mean_depth: b0,
        contrast_ratio: c1.norm() / im_c0,
        method: EfficiencyMethod::Fourier,
        transparent: false,
    }
}

fn check_lorentzian(d: f64, finesse: f64) -> Result<()> {
    if !(d >= 0.0 && d.is_finite()) {
        return Err(AfcError::invalid("d", format!("must be >= 0, got {d}")));
    }
    if !(finesse > 0.0) {
        return Err(AfcError::invalid("finesse", format!("must be > 0, got {finesse}")));
    }
    Ok(())
}

fn eta_lorentzian(d: f64, finesse: f64) -> f64 {
    let mean = lorentzian_mean_depth(d, finesse);
    mean * mean * (-mean).exp() * (-2.0 * PI / finesse).exp()
}

/// Efficiency of a Lorentzian comb of peak depth `d` and finesse `F`:
/// `d^2 tanh^2(pi/2F) exp(-d tanh(pi/2F)) exp(-2 pi / F)`.
pub fn efficiency_lorentzian(d: f64, finesse: f64) -> Result<EfficiencyResult> {
    check_lorentzian(d, finesse)?;
    Ok(EfficiencyResult {
        eta: eta_lorentzian(d, finesse),
        mean_depth: lorentzian_mean_depth(d, finesse),
        contrast_ratio: 2.0 * lorentzian_harmonic_ratio(finesse),
        method: EfficiencyMethod::LorentzianClosedForm,
        transparent: d == 0.0,
    })
}

/// High-finesse optimum `pi (1 + d/4)`.
pub fn optimal_finesse(d: f64) -> f64 {
    PI * (1.0 + d / 4.0)
}

/// High-finesse optimal efficiency `4 e^-2 d^2 / (4 + d)^2`.
pub fn optimal_efficiency(d: f64) -> EfficiencyResult {
    let finesse = optimal_finesse(d);
    let ratio = d / (4.0 + d);
    EfficiencyResult {
        eta: FORWARD_LIMIT * ratio * ratio,
        mean_depth: lorentzian_mean_depth(d, finesse),
        contrast_ratio: 2.0 * lorentzian_harmonic_ratio(finesse),
        method: EfficiencyMethod::LorentzianClosedForm,
        transparent: d == 0.0,
    }
}

/// Exact maximum of [`efficiency_lorentzian`] over finesse in [`FINESSE_SEARCH_RANGE`].
pub fn numeric_optimal_finesse(d: f64) -> Result<(f64, f64)> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(AfcError::invalid("d", format!("must be > 0, got {d}")));
    }
    let (lo, hi) = FINESSE_SEARCH_RANGE;
    Ok(maximize_log_bracketed(|f| eta_lorentzian(d, f), lo, hi, 1e-8))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRow {
    pub d: f64,
    pub f_opt: f64,
    pub eta_opt: f64,
    pub f_star: f64,
    pub eta_star: f64,
}

/// Approximate and exact optima for each depth. At `d = 0` there is no optimum and
/// `f_star` is NaN.
pub fn efficiency_curve(depths: &[f64]) -> Result<Vec<EfficiencyRow>> {
    if let Some(bad) = depths.iter().find(|d| !(**d >= 0.0 && d.is_finite())) {
        return Err(AfcError::invalid("d", format!("must be >= 0, got {bad}")));
    }
    depths
        .par_iter()
        .map(|&d| {
            let (f_star, eta_star) = if d == 0.0 {
                (f64::NAN, 0.0)
            } else {
                numeric_optimal_finesse(d)?
            };
            Ok(EfficiencyRow {
                d,
                f_opt: optimal_finesse(d),
                eta_opt: optimal_efficiency(d).eta,
                f_star,
                eta_star,
            })
        })
        .collect()
}
