//! Optical-pumping model for comb preparation with a train of pulse pairs.
//!
//! Each inhomogeneous class `x` has two ground spin states `g1`, `g2` (split by `deltaG`)
//! and two excited states (split by `deltaE`). Class `x` absorbs at
//!
//! | transition | frequency           |
//! |------------|---------------------|
//! | g1 -> e1   | `x`                 |
//! | g1 -> e2   | `x + dE`            |
//! | g2 -> e1   | `x - dG`            |
//! | g2 -> e2   | `x - dG + dE`       |
//!
//! with equal strengths. The pulse pairs deposit a fringe pattern with period `1/T`,
//! smeared by a power-broadened Lorentzian. Population is pumped between the spin states
//! by a saturable exponential bleach, relaxes towards equilibrium during the wait, and is
//! finally probed through a Lorentzian of half the unsaturated hole width.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::efficiency::{efficiency_from_coefficients, optimal_efficiency};
use crate::error::{AfcError, Result};
use crate::spectral::{fit_lorentzian_comb, fourier_coefficients, CombDescriptor, FrequencyGrid, OpticalDepthSpectrum};

/// Relative strengths of the transitions ending on `e1` and `e2`.
const WEIGHTS: [f64; 2] = [0.5, 0.5];

fn default_initial_depth() -> f64 {
    5.0
}
fn default_delta_g() -> f64 {
    6.0e6
}
fn default_delta_e() -> f64 {
    1.3e6
}
fn default_branching_ratio() -> f64 {
    0.02
}
fn default_hole_width0() -> f64 {
    25.0e3
}
fn default_saturation_power() -> f64 {
    1.0
}
fn default_pumping_coefficient() -> f64 {
    0.1
}
fn default_zeeman_lifetime() -> f64 {
    7.0
}
fn default_excited_lifetime() -> f64 {
    800e-6
}
fn default_coherence_t2() -> f64 {
    30e-6
}

/// Material parameters. Frequencies in Hz, times in s, powers in arbitrary units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct MaterialConfig {
    #[serde(default = "default_initial_depth")]
    pub initial_depth: f64,
    #[serde(default = "default_delta_g")]
    pub delta_g: f64,
    #[serde(default = "default_delta_e")]
    pub delta_e: f64,
    #[serde(default = "default_branching_ratio")]
    pub branching_ratio: f64,
    /// Unsaturated hole HWHM.
    #[serde(default = "default_hole_width0")]
    pub hole_width0: f64,
    #[serde(default = "default_saturation_power")]
    pub saturation_power: f64,
    /// Bleach exponent per unit of `branchingRatio * pairCount * power * pump density`.
    #[serde(default = "default_pumping_coefficient")]
    pub pumping_coefficient: f64,
    #[serde(default = "default_zeeman_lifetime")]
    pub zeeman_lifetime: f64,
    #[serde(default = "default_excited_lifetime")]
    pub excited_lifetime: f64,
    #[serde(default = "default_coherence_t2")]
    pub coherence_t2: f64,
    /// Multiply predicted efficiencies by `exp(-2 T / T2)`. Off by default.
    #[serde(default)]
    pub t2_damping: bool,
}

impl Default for MaterialConfig {
    fn default() -> Self {
        MaterialConfig {
            initial_depth: default_initial_depth(),
            delta_g: default_delta_g(),
            delta_e: default_delta_e(),
            branching_ratio: default_branching_ratio(),
            hole_width0: default_hole_width0(),
            saturation_power: default_saturation_power(),
            pumping_coefficient: default_pumping_coefficient(),
            zeeman_lifetime: default_zeeman_lifetime(),
            excited_lifetime: default_excited_lifetime(),
            coherence_t2: default_coherence_t2(),
            t2_damping: false,
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(AfcError::invalid(field, format!("must be > 0, got {v}")))
    }
}

impl MaterialConfig {
    pub fn validate(&self) -> Result<()> {
        positive("initialDepth", self.initial_depth)?;
        positive("deltaG", self.delta_g)?;
        positive("deltaE", self.delta_e)?;
        positive("branchingRatio", self.branching_ratio)?;
        if self.branching_ratio > 1.0 {
            return Err(AfcError::invalid(
                "branchingRatio",
                format!("must be <= 1, got {}", self.branching_ratio),
            ));
        }
        positive("holeWidth0", self.hole_width0)?;
        positive("saturationPower", self.saturation_power)?;
        positive("pumpingCoefficient", self.pumping_coefficient)?;
        positive("zeemanLifetime", self.zeeman_lifetime)?;
        positive("excitedLifetime", self.excited_lifetime)?;
        positive("coherenceT2", self.coherence_t2)?;
        Ok(())
    }
}

fn default_pair_delay() -> f64 {
    1.5e-6
}
fn default_pulse_fwhm() -> f64 {
    300e-9
}
fn default_pair_count() -> u32 {
    5000
}
fn default_dead_time() -> f64 {
    100e-6
}
fn default_wait_time() -> f64 {
    50e-3
}

/// Pump pulse-pair train.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PumpSequenceConfig {
    #[serde(default = "default_pair_delay")]
    pub pair_delay: f64,
    #[serde(default = "default_pulse_fwhm")]
    pub pulse_fwhm: f64,
    #[serde(default = "default_pair_count")]
    pub pair_count: u32,
    #[serde(default = "default_dead_time")]
    pub dead_time: f64,
    #[serde(default = "default_wait_time")]
    pub wait_time: f64,
    #[serde(default)]
    pub power: f64,
}

impl Default for PumpSequenceConfig {
    fn default() -> Self {
        PumpSequenceConfig {
            pair_delay: default_pair_delay(),
            pulse_fwhm: default_pulse_fwhm(),
            pair_count: default_pair_count(),
            dead_time: default_dead_time(),
            wait_time: default_wait_time(),
            power: 0.0,
        }
    }
}

impl PumpSequenceConfig {
    pub fn validate(&self) -> Result<()> {
        positive("pairDelay", self.pair_delay)?;
        positive("pulseFwhm", self.pulse_fwhm)?;
        if self.pair_delay <= self.pulse_fwhm {
            return Err(AfcError::invalid(
                "pairDelay",
                format!("must exceed pulseFwhm ({} s), got {}", self.pulse_fwhm, self.pair_delay),
            ));
        }
        if self.pair_count < 1 {
            return Err(AfcError::invalid("pairCount", "must be >= 1"));
        }
        positive("deadTime", self.dead_time)?;
        if !(self.wait_time >= 0.0 && self.wait_time.is_finite()) {
            return Err(AfcError::invalid("waitTime", format!("must be >= 0, got {}", self.wait_time)));
        }
        if !(self.power >= 0.0 && self.power.is_finite()) {
            return Err(AfcError::invalid("power", format!("must be >= 0, got {}", self.power)));
        }
        Ok(())
    }

    /// Comb period `1/T` in Hz.
    pub fn period(&self) -> f64 {
        1.0 / self.pair_delay
    }

    /// FWHM of a single pulse's power spectrum.
    pub fn spectral_fwhm(&self) -> f64 {
        2.0 * LN_2 / (PI * self.pulse_fwhm)
    }

    /// Same sequence at another pump power.
    pub fn with_power(&self, power: f64) -> Self {
        PumpSequenceConfig { power, ..*self }
    }

    /// Spectral energy density of one pulse pair at detuning `delta` from the carrier.
    fn density(&self, delta: f64) -> f64 {
        let w = self.spectral_fwhm();
        let envelope = (-4.0 * LN_2 * (delta / w).powi(2)).exp();
        self.power * envelope * 2.0 * (1.0 + (2.0 * PI * delta * self.pair_delay).cos())
    }
}

/// Pump spectral density of one pulse pair on `grid`, carrier at the band centre.
/// Fringe maxima sit at the carrier plus multiples of `1/T`; the minima are exact zeros.
pub fn pump_spectrum(seq: &PumpSequenceConfig, grid: &FrequencyGrid) -> Result<Vec<f64>> {
    seq.validate()?;
    if grid.step() > seq.period() / 16.0 * (1.0 + 1e-9) {
        return Err(AfcError::Resolution(format!(
            "grid step {} Hz does not resolve the {} Hz pump fringes (need <= {} Hz)",
            grid.step(),
            seq.period(),
            seq.period() / 16.0
        )));
    }
    let center = grid.center();
    Ok(grid.points().map(|nu| seq.density(nu - center)).collect())
}

/// Power-broadened hole HWHM: `holeWidth0 * sqrt(1 + power / saturationPower)`.
pub fn power_broadened_width(power: f64, mat: &MaterialConfig) -> f64 {
    mat.hole_width0 * (1.0 + power / mat.saturation_power).sqrt()
}

/// Result of burning a comb.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedComb {
    pub spectrum: OpticalDepthSpectrum,
    /// Lorentzian comb fit; `None` when no periodic structure was found.
    pub fitted: Option<CombDescriptor>,
    /// Fitted tooth height plus background, or the spectrum maximum when the fit fails.
    pub peak_depth: f64,
    /// Fitted finesse, NaN when the fit fails.
    pub finesse: f64,
}

/// Convolve `y` (spacing `step`) with a unit-area Lorentzian of HWHM `hwhm`, circularly.
fn lorentzian_smooth(y: &mut [f64], step: f64, hwhm: f64) {
    if hwhm <= 0.0 {
        return;
    }
    let n = y.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex64> = y.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let span = n as f64 * step;
    for (m, v) in buf.iter_mut().enumerate() {
        let k = if m <= n / 2 { m as f64 } else { n as f64 - m as f64 };
        *v *= (-2.0 * PI * hwhm * k / span).exp() / n as f64;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    for (out, v) in y.iter_mut().zip(&buf) {
        *out = v.re;
    }
}

/// Uniform samples with linear interpolation and a constant outside the range.
struct Sampled<'a> {
    start: f64,
    step: f64,
    values: &'a [f64],
    outside: f64,
}

impl Sampled<'_> {
    fn at(&self, nu: f64) -> f64 {
        let x = (nu - self.start) / self.step;
        if x < 0.0 || x > (self.values.len() - 1) as f64 {
            return self.outside;
        }
        let i = (x.floor() as usize).min(self.values.len() - 2);
        let f = x - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }
}

/// Burn a comb with `seq` into `mat` and probe it on `grid` (carrier at the band centre).
pub fn burn_comb(mat: &MaterialConfig, seq: &PumpSequenceConfig, grid: &FrequencyGrid) -> Result<PreparedComb> {
    let spectrum = burn_spectrum(mat, seq, grid)?;
    let period = seq.period();
    Ok(match fit_lorentzian_comb(&spectrum, period) {
        Ok((desc, _)) => PreparedComb {
            peak_depth: desc.peak_depth + desc.background,
            finesse: desc.finesse,
            fitted: Some(desc),
            spectrum,
        },
        Err(AfcError::FitFailure(_)) => PreparedComb {
            peak_depth: spectrum.max(),
            finesse: f64::NAN,
            fitted: None,
            spectrum,
        },
        Err(e) => return Err(e),
    })
}

fn burn_spectrum(mat: &MaterialConfig, seq: &PumpSequenceConfig, grid: &FrequencyGrid) -> Result<OpticalDepthSpectrum> {
    mat.validate()?;
    seq.validate()?;
    let step = grid.step();
    if step > seq.period() / 16.0 * (1.0 + 1e-9) {
        return Err(AfcError::Resolution(format!(
            "grid step {step} Hz does not resolve the {} Hz comb (need <= {} Hz)",
            seq.period(),
            seq.period() / 16.0
        )));
    }
    let d0 = mat.initial_depth;
    if seq.power == 0.0 {
        return OpticalDepthSpectrum::new(*grid, vec![d0; grid.count()]);
    }

    // Internal grid wide enough for the pump band, every spin-shifted partner, and the
    // Lorentzian tails, sharing the sample positions of `grid`.
    let carrier = grid.center();
    let reach = mat.delta_g + mat.delta_e + 4.0 * seq.spectral_fwhm() + 16.0 * seq.period();
    let pad = (reach / step).ceil() as usize;
    let n = (grid.count() + 2 * pad).next_power_of_two();
    let lead = (n - grid.count()) / 2;
    let start = grid.start() - lead as f64 * step;
    let nu = |i: usize| start + i as f64 * step;

    let mut burn: Vec<f64> = (0..n).map(|i| seq.density(nu(i) - carrier)).collect();
    let burn_hwhm = power_broadened_width(seq.power, mat) - 0.5 * mat.hole_width0;
    lorentzian_smooth(&mut burn, step, burn_hwhm);
    let burn = Sampled { start, step, values: &burn, outside: 0.0 };

    let [w1, w2] = WEIGHTS;
    let fluence = mat.pumping_coefficient * mat.branching_ratio * seq.pair_count as f64;
    let relax = (-seq.wait_time / mat.zeeman_lifetime).exp();
    let n1: Vec<f64> = (0..n)
        .map(|i| {
            let x = nu(i);
            let r1 = w1 * burn.at(x) + w2 * burn.at(x + mat.delta_e);
            let r2 = w1 * burn.at(x - mat.delta_g) + w2 * burn.at(x - mat.delta_g + mat.delta_e);
            let total = (r1 + r2).max(0.0);
            let pumped = if total > 0.0 {
                let eq = r2.max(0.0) / total;
                eq + (0.5 - eq) * (-fluence * total).exp()
            } else {
                0.5
            };
            (0.5 + (pumped - 0.5) * relax).clamp(0.0, 1.0)
        })
        .collect();
    let g1 = Sampled { start, step, values: &n1, outside: 0.5 };

    // Probe each class through all four transitions; store the deviation from d0.
    let mut excess: Vec<f64> = (0..n)
        .map(|i| {
            let v = nu(i);
            let sum = w1 * g1.at(v)
                + w2 * g1.at(v - mat.delta_e)
                + w1 * (1.0 - g1.at(v + mat.delta_g))
                + w2 * (1.0 - g1.at(v + mat.delta_g - mat.delta_e));
            d0 * sum - d0
        })
        .collect();
    lorentzian_smooth(&mut excess, step, 0.5 * mat.hole_width0);

    let depth = excess[lead..lead + grid.count()]
        .iter()
        .map(|e| (d0 + e).max(0.0))
        .collect();
    OpticalDepthSpectrum::new(*grid, depth)
}

/// One row of a power sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub power: f64,
    pub peak_depth: f64,
    pub finesse: f64,
    pub eta_fourier: f64,
    pub eta_opt: f64,
}

/// Analysis grid used by [`power_sweep`] when none is given: the central comb periods
/// around the carrier at 64 samples per period.
pub fn default_analysis_grid(seq: &PumpSequenceConfig) -> Result<FrequencyGrid> {
    FrequencyGrid::centered(0.0, seq.period(), 4, 64)
}

/// Ten log-spaced steps over one decade of power, `0.1..=1` saturation powers.
pub fn default_sweep_powers(mat: &MaterialConfig) -> Vec<f64> {
    (0..=10)
        .map(|i| 0.1 * mat.saturation_power * 10f64.powf(i as f64 / 10.0))
        .collect()
}

/// Burn, fit and evaluate the comb at each power (which must increase).
pub fn power_sweep(
    mat: &MaterialConfig,
    seq: &PumpSequenceConfig,
    powers: &[f64],
    grid: &FrequencyGrid,
) -> Result<Vec<SweepRow>> {
    mat.validate()?;
    if let Some(w) = powers.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(AfcError::Domain(format!(
            "powers must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    let damping = if mat.t2_damping {
        (-2.0 * seq.pair_delay / mat.coherence_t2).exp()
    } else {
        1.0
    };
    powers
        .par_iter()
        .map(|&power| {
            let comb = burn_comb(mat, &seq.with_power(power), grid)?;
            let coeffs = fourier_coefficients(&comb.spectrum, seq.period(), 1)?;
            Ok(SweepRow {
                power,
                peak_depth: comb.peak_depth,
                finesse: comb.finesse,
                eta_fourier: efficiency_from_coefficients(&coeffs).eta * damping,
                eta_opt: optimal_efficiency(comb.peak_depth).eta,
            })
        })
        .collect()
}
