//! Pulse propagation through a comb and echo extraction.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{AfcError, Result};
use crate::spectral::{causal_susceptibility, ComplexSpectrum, FourierCoefficientSet, OpticalDepthSpectrum};

/// Guard band (in comb periods) of unit transmission added on each side of the spectrum.
const GUARD_PERIODS: f64 = 8.0;
/// Minimum time samples per pulse FWHM.
const SAMPLES_PER_FWHM: f64 = 8.0;
/// Trace margin before the pulse centre, in pulse FWHM.
const LEAD_FWHM: f64 = 4.0;

/// Scale between the supplied spectra and optical depth (`k L` for raw susceptibilities).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PropagationConfig {
    pub scale: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig { scale: 1.0 }
    }
}

impl PropagationConfig {
    /// Complex depth of `s` after applying the scale.
    pub fn complex_depth(&self, s: &OpticalDepthSpectrum) -> Result<ComplexSpectrum> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(AfcError::invalid("scale", format!("must be > 0, got {}", self.scale)));
        }
        Ok(causal_susceptibility(&s.scaled(self.scale)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PulseShape {
    Gaussian,
}

/// Input pulse; `fwhm` is the intensity FWHM in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PulseSpec {
    pub shape: PulseShape,
    pub fwhm: f64,
    pub center: f64,
    pub mean_photon_number: f64,
}

impl PulseSpec {
    pub fn gaussian(fwhm: f64, mean_photon_number: f64) -> Self {
        PulseSpec {
            shape: PulseShape::Gaussian,
            fwhm,
            center: 0.0,
            mean_photon_number,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fwhm > 0.0 && self.fwhm.is_finite()) {
            return Err(AfcError::invalid("fwhm", format!("must be > 0, got {}", self.fwhm)));
        }
        if !self.center.is_finite() {
            return Err(AfcError::invalid("center", "must be finite"));
        }
        if !(self.mean_photon_number >= 0.0 && self.mean_photon_number.is_finite()) {
            return Err(AfcError::invalid(
                "meanPhotonNumber",
                format!("must be >= 0, got {}", self.mean_photon_number),
            ));
        }
        Ok(())
    }

    fn rate(&self) -> f64 {
        2.0 * LN_2 / (self.fwhm * self.fwhm)
    }

    /// Field amplitude normalized so that `integral |a|^2 dt = meanPhotonNumber`.
    fn peak_amplitude(&self) -> f64 {
        (self.mean_photon_number / (PI / (2.0 * self.rate())).sqrt()).sqrt()
    }

    /// Intensity (photons/s) at time `t`.
    pub fn intensity(&self, t: f64) -> f64 {
        let a = self.peak_amplitude();
        let u = t - self.center;
        a * a * (-2.0 * self.rate() * u * u).exp()
    }

    /// Envelope spectrum at detuning `delta` (Hz) from the carrier.
    fn spectrum(&self, delta: f64) -> Complex64 {
        let a = self.rate();
        let mag = self.peak_amplitude() * (PI / a).sqrt() * (-PI * PI * delta * delta / a).exp();
        Complex64::from_polar(mag, 2.0 * PI * delta * self.center)
    }
}

/// Intensity versus time, in photons/s. `input` holds the undistorted input pulse on the
/// same samples, for reference.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTrace {
    pub start: f64,
    pub time_step: f64,
    /// Centre of the input pulse.
    pub origin: f64,
    pub samples: Vec<f64>,
    pub input: Vec<f64>,
}

impl TimeTrace {
    pub fn time(&self, j: usize) -> f64 {
        self.start + j as f64 * self.time_step
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.samples.len()).map(move |j| self.time(j))
    }

    pub fn end(&self) -> f64 {
        self.time(self.samples.len() - 1)
    }

    /// Photon number carried by the whole trace.
    pub fn energy(&self) -> f64 {
        self.samples.iter().sum::<f64>() * self.time_step
    }

    pub fn input_energy(&self) -> f64 {
        self.input.iter().sum::<f64>() * self.time_step
    }

    /// Integral of the output intensity over `[a, b]` (linear interpolation between samples).
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        integrate_linear(&self.samples, self.start, self.time_step, a, b)
    }

    /// Index of the output maximum inside `[a, b]`.
    pub fn argmax_in(&self, a: f64, b: f64) -> Option<usize> {
        self.times()
            .enumerate()
            .filter(|(_, t)| *t >= a && *t <= b)
            .max_by(|(i, _), (j, _)| self.samples[*i].total_cmp(&self.samples[*j]))
            .map(|(i, _)| i)
    }
}

/// Complex field samples, for inspecting phases.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTrace {
    pub start: f64,
    pub time_step: f64,
    pub origin: f64,
    pub amplitude: Vec<Complex64>,
}

fn integrate_linear(y: &[f64], start: f64, dt: f64, a: f64, b: f64) -> f64 {
    if y.len() < 2 || b <= a {
        return 0.0;
    }
    let value = |t: f64| -> f64 {
        let x = ((t - start) / dt).clamp(0.0, (y.len() - 1) as f64);
        let i = (x.floor() as usize).min(y.len() - 2);
        let f = x - i as f64;
        y[i] * (1.0 - f) + y[i + 1] * f
    };
    let first = ((a - start) / dt).ceil().max(0.0) as usize;
    let last = (((b - start) / dt).floor() as isize).min(y.len() as isize - 1);
    if last < first as isize {
        return 0.5 * (value(a) + value(b)) * (b - a);
    }
    let last = last as usize;
    let t_first = start + first as f64 * dt;
    let t_last = start + last as f64 * dt;
    let mut total = 0.5 * (value(a) + y[first]) * (t_first - a);
    total += 0.5 * (y[last] + value(b)) * (b - t_last);
    for i in first..last {
        total += 0.5 * (y[i] + y[i + 1]) * dt;
    }
    total
}

/// Amplitude transmission `exp(-(d + i phi) / 2)`, so that `|t|^2 = exp(-d)`.
pub fn transfer_function(cs: &ComplexSpectrum) -> ComplexSpectrum {
    let values = (0..cs.values().len())
        .map(|i| (-0.5 * cs.complex_depth(i)).exp())
        .collect();
    ComplexSpectrum::new(*cs.grid(), values).expect("length preserved")
}

/// Field after the filter `t`, sampled from `center - 4 fwhm` to `center + horizon`.
///
/// The carrier sits at the band centre of `t`. Outside the band the medium is taken as
/// transparent. `period` (Hz) is the comb period, used to size the guard band and to
/// check that the horizon covers three echo delays.
pub fn propagate_field(pulse: &PulseSpec, t: &ComplexSpectrum, period: f64, horizon: f64) -> Result<FieldTrace> {
    pulse.validate()?;
    if !(period > 0.0 && period.is_finite()) {
        return Err(AfcError::invalid("period", format!("must be > 0, got {period}")));
    }
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(AfcError::invalid("horizon", format!("must be > 0, got {horizon}")));
    }
    let delay = 1.0 / period;
    if horizon < 3.0 * delay * (1.0 - 1e-9) {
        return Err(AfcError::Resolution(format!(
            "horizon {horizon} s is shorter than three echo delays ({} s)",
            3.0 * delay
        )));
    }
    let grid = t.grid();
    let step = grid.step();
    if grid.span() < 4.0 / pulse.fwhm {
        return Err(AfcError::Resolution(format!(
            "spectral band {} Hz does not resolve a {} s pulse (need >= {} Hz)",
            grid.span(),
            pulse.fwhm,
            4.0 / pulse.fwhm
        )));
    }
    let lead = LEAD_FWHM * pulse.fwhm;
    let window = 1.0 / step;
    if horizon + 2.0 * lead > window {
        return Err(AfcError::Resolution(format!(
            "frequency step {step} Hz limits the time window to {window} s, shorter than the {} s required",
            horizon + 2.0 * lead
        )));
    }

    let guard = (GUARD_PERIODS * period / step).ceil() as usize;
    let by_rate = (SAMPLES_PER_FWHM / (pulse.fwhm * step)).ceil() as usize;
    let n = (grid.count() + 2 * guard).max(by_rate).next_power_of_two();
    let dt = 1.0 / (n as f64 * step);
    let t0 = pulse.center - lead;

    let half = grid.count() / 2;
    let mut spec: Vec<Complex64> = (0..n)
        .map(|k| {
            let m = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
            let delta = m * step;
            pulse.spectrum(delta) * Complex64::from_polar(1.0, -2.0 * PI * delta * t0)
        })
        .collect();
    for (i, tv) in t.values().iter().enumerate() {
        let k = (i as isize - half as isize).rem_euclid(n as isize) as usize;
        spec[k] *= tv;
    }
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut spec);

    let samples = (((horizon + lead) / dt).ceil() as usize + 1).min(n);
    let amplitude = spec[..samples].iter().map(|v| v * step).collect();
    Ok(FieldTrace {
        start: t0,
        time_step: dt,
        origin: pulse.center,
        amplitude,
    })
}

/// Intensity after the filter `t`; see [`propagate_field`].
pub fn propagate(pulse: &PulseSpec, t: &ComplexSpectrum, period: f64, horizon: f64) -> Result<TimeTrace> {
    let field = propagate_field(pulse, t, period, horizon)?;
    let samples: Vec<f64> = field.amplitude.iter().map(|a| a.norm_sqr()).collect();
    let input = (0..samples.len())
        .map(|j| pulse.intensity(field.start + j as f64 * field.time_step))
        .collect();
    Ok(TimeTrace {
        start: field.start,
        time_step: field.time_step,
        origin: field.origin,
        samples,
        input,
    })
}

/// Gated energies of the transmitted pulse and the first two echoes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EchoReport {
    /// Input pulse energy inside the same gate, centred on the input.
    pub input_energy: f64,
    pub transmitted_energy: f64,
    pub echo1_energy: f64,
    pub echo2_energy: f64,
    pub eta_echo1: f64,
    pub eta_echo2: f64,
}

/// Integrate `trace` over gates of width `gate` centred at the origin, `+T` and `+2T`.
///
/// Efficiencies are taken relative to the input pulse seen through the same gate, so the
/// gate's truncation of the pulse cancels.
pub fn echo_energies(trace: &TimeTrace, delay: f64, gate: f64) -> Result<EchoReport> {
    if !(delay > 0.0 && delay.is_finite()) {
        return Err(AfcError::invalid("period", format!("must be > 0, got {delay}")));
    }
    if !(gate > 0.0 && gate.is_finite()) {
        return Err(AfcError::invalid("gate", format!("must be > 0, got {gate}")));
    }
    if gate >= 0.5 * delay {
        return Err(AfcError::Domain(format!(
            "gate {gate} s must be shorter than half the echo delay ({} s)",
            0.5 * delay
        )));
    }
    let half = 0.5 * gate;
    if trace.start > trace.origin - half || trace.end() < trace.origin + 2.0 * delay + half {
        return Err(AfcError::Resolution(format!(
            "trace [{}, {}] s does not cover the gates up to {} s",
            trace.start,
            trace.end(),
            trace.origin + 2.0 * delay + half
        )));
    }
    let window = |k: f64| trace.integrate(trace.origin + k * delay - half, trace.origin + k * delay + half);
    let input_energy = integrate_linear(&trace.input, trace.start, trace.time_step, trace.origin - half, trace.origin + half);
    let transmitted_energy = window(0.0);
    let echo1_energy = window(1.0);
    let echo2_energy = window(2.0);
    let ratio = |e: f64| if input_energy > 0.0 { e / input_energy } else { 0.0 };
    Ok(EchoReport {
        input_energy,
        transmitted_energy,
        echo1_energy,
        echo2_energy,
        eta_echo1: ratio(echo1_energy),
        eta_echo2: ratio(echo2_energy),
    })
}

/// Output amplitudes of the carrier `a0` and the first retrieval `a1` for unit input,
/// integrating `a0' = (i/2) c0 a0` and `a1' = (i/2) (c0 a1 + c1 a0)` across the medium
/// with fourth-order Runge-Kutta. `c_p` are the causal coefficients (scaled by `k L`).
pub fn perturbative_amplitudes(coeffs: &FourierCoefficientSet) -> (Complex64, Complex64) {
    let c = coeffs.causal_coefficients();
    let c0 = c[0];
    let c1 = c.get(1).copied().unwrap_or_default();
    let half_i = Complex64::new(0.0, 0.5);
    let rhs = |a: [Complex64; 2]| -> [Complex64; 2] { [half_i * c0 * a[0], half_i * (c0 * a[1] + c1 * a[0])] };

    let steps = ((0.5 * coeffs.mean_depth() / 0.002).ceil() as usize).max(1000);
    let h = 1.0 / steps as f64;
    let mut a = [Complex64::new(1.0, 0.0), Complex64::default()];
    let axpy = |a: [Complex64; 2], k: [Complex64; 2], s: f64| [a[0] + k[0] * s, a[1] + k[1] * s];
    for _ in 0..steps {
        let k1 = rhs(a);
        let k2 = rhs(axpy(a, k1, 0.5 * h));
        let k3 = rhs(axpy(a, k2, 0.5 * h));
        let k4 = rhs(axpy(a, k3, h));
        for j in 0..2 {
            a[j] += (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (h / 6.0);
        }
    }
    (a[0], a[1])
}
