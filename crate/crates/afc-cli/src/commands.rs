use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use serde::Serialize;

use afc_core::detection::{self, DetectionConfig, GatePosition};
use afc_core::efficiency::{efficiency_curve, efficiency_from_coefficients, efficiency_lorentzian};
use afc_core::io::{self, RunManifest};
use afc_core::preparation::{self, MaterialConfig, PumpSequenceConfig};
use afc_core::propagation::{self, PropagationConfig, PulseSpec};
use afc_core::spectral::{
    fit_lorentzian_comb, fourier_coefficients_in, synth_comb, AnalysisWindow, CombDescriptor, CombShape,
    FrequencyGrid, WindowChoice,
};
use afc_core::{AfcError, Result};

/// Comma-separated numbers; the empty string is the empty list.
#[derive(Debug, Clone, Serialize)]
pub struct NumberList(Vec<f64>);

impl FromStr for NumberList {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(NumberList)
    }
}

pub struct Context {
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
}

impl Context {
    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn finish(&self, mut manifest: RunManifest, inputs: &[&Path], outputs: &[&str]) -> Result<()> {
        manifest.input_files = inputs.iter().map(|p| p.display().to_string()).collect();
        manifest.output_files = outputs.iter().map(|s| s.to_string()).collect();
        io::write_json_file(&self.path("manifest.json"), &manifest)
    }
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SynthArgs {
    /// Comb descriptor JSON; replaces the shape flags.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "lorentzian")]
    shape: CombShape,
    /// Tooth height above the background.
    #[arg(long, required_unless_present = "config")]
    peak_depth: Option<f64>,
    /// Period over tooth FWHM; unused for flat combs.
    #[arg(long)]
    finesse: Option<f64>,
    /// Comb period in Hz.
    #[arg(long, required_unless_present = "config")]
    period: Option<f64>,
    /// Comb extent in Hz (default: the whole grid).
    #[arg(long)]
    bandwidth: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    background: f64,
    /// Band centre in Hz.
    #[arg(long, default_value_t = 0.0)]
    center: f64,
    /// Grid length in comb periods.
    #[arg(long, default_value_t = 20)]
    periods: usize,
    /// Grid samples per period (default: enough for the tooth width).
    #[arg(long)]
    samples_per_period: Option<usize>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SynthConfig {
    comb: CombDescriptor,
    center: f64,
    periods: usize,
    samples_per_period: usize,
}

pub fn synth(ctx: &Context, a: SynthArgs) -> Result<()> {
    let comb = match &a.config {
        Some(path) => io::read_json_file::<CombDescriptor>(path)?,
        None => {
            let period = a.period.unwrap_or(f64::NAN);
            CombDescriptor {
                shape: a.shape,
                peak_depth: a.peak_depth.unwrap_or(f64::NAN),
                finesse: a.finesse.unwrap_or(f64::NAN),
                period,
                bandwidth: a.bandwidth.unwrap_or(a.periods as f64 * period),
                background: a.background,
            }
        }
    };
    comb.validate()?;
    let spp = match a.samples_per_period {
        Some(n) => n,
        None if comb.shape == CombShape::Lorentzian || comb.shape == CombShape::Gaussian => {
            64usize.max((16.0 * comb.finesse).ceil() as usize)
        }
        None => 64,
    };
    let grid = FrequencyGrid::centered(a.center, comb.period, a.periods, spp)?;
    let spectrum = synth_comb(&comb, &grid)?;
    io::write_file(&ctx.path("spectrum.csv"), |w| io::write_spectrum_csv(w, &spectrum))?;
    let config = SynthConfig {
        comb,
        center: a.center,
        periods: a.periods,
        samples_per_period: spp,
    };
    let inputs: Vec<&Path> = a.config.iter().map(PathBuf::as_path).collect();
    ctx.finish(RunManifest::new("synth", &config, None)?, &inputs, &["spectrum.csv"])
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AnalyzeArgs {
    /// Spectrum CSV with columns frequency_hz, optical_depth.
    input: PathBuf,
    /// Comb period in Hz.
    #[arg(long)]
    period: f64,
    /// Highest harmonic to report.
    #[arg(long, default_value_t = 8)]
    harmonics: usize,
    /// Analyse only this many periods around the band centre.
    #[arg(long)]
    central_periods: Option<usize>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct FitReport {
    peak_depth: f64,
    finesse: f64,
    background: f64,
    tooth_center: f64,
    residual: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct AnalysisReport {
    period: f64,
    window: AnalysisWindow,
    /// `[re, im]` of each `b_p`.
    b: Vec<[f64; 2]>,
    mean_depth: f64,
    contrast_ratio: f64,
    eta_fourier: f64,
    transparent: bool,
    fit: Option<FitReport>,
    fit_error: Option<String>,
    eta_lorentzian: Option<f64>,
}

pub fn analyze(ctx: &Context, a: AnalyzeArgs) -> Result<()> {
    let spectrum = io::read_spectrum_file(&a.input)?;
    let choice = a.central_periods.map_or(WindowChoice::Full, WindowChoice::CentralPeriods);
    let coeffs = fourier_coefficients_in(&spectrum, a.period, a.harmonics, choice)?;
    let eta = efficiency_from_coefficients(&coeffs);
    let (fit, fit_error, eta_lorentzian) = match fit_lorentzian_comb(&spectrum, a.period) {
        Ok((desc, residual)) => {
            let eta2 = efficiency_lorentzian(desc.peak_depth, desc.finesse)?.eta;
            let center = spectrum.grid().center();
            let offset = tooth_offset(&coeffs, center);
            let report = FitReport {
                peak_depth: desc.peak_depth,
                finesse: desc.finesse,
                background: desc.background,
                tooth_center: center + offset,
                residual,
            };
            (Some(report), None, Some(eta2))
        }
        Err(AfcError::FitFailure(msg)) => (None, Some(msg), None),
        Err(e) => return Err(e),
    };
    let report = AnalysisReport {
        period: a.period,
        window: *coeffs.window(),
        b: coeffs.coefficients().iter().map(|b| [b.re, b.im]).collect(),
        mean_depth: eta.mean_depth,
        contrast_ratio: eta.contrast_ratio,
        eta_fourier: eta.reported_eta(),
        transparent: eta.transparent,
        fit,
        fit_error,
        eta_lorentzian,
    };
    io::write_json_file(&ctx.path("analysis.json"), &report)?;
    io::write_file(&ctx.path("coefficients.csv"), |w| io::write_coefficients_csv(w, &coeffs))?;
    ctx.finish(
        RunManifest::new("analyze", &a, None)?,
        &[&a.input],
        &["analysis.json", "coefficients.csv"],
    )
}

/// Offset of the nearest tooth from `center`, from the phase of the first harmonic.
fn tooth_offset(coeffs: &afc_core::spectral::FourierCoefficientSet, center: f64) -> f64 {
    let b1 = coeffs.b(1);
    let shift = coeffs.window().reference - b1.arg() * coeffs.period() / (2.0 * std::f64::consts::PI) - center;
    shift - (shift / coeffs.period()).round() * coeffs.period()
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EchoArgs {
    /// Spectrum CSV with columns frequency_hz, optical_depth.
    input: PathBuf,
    /// Comb period in Hz; echoes are expected at multiples of its inverse.
    #[arg(long)]
    period: f64,
    /// Input pulse intensity FWHM in s.
    #[arg(long, default_value_t = 450e-9)]
    fwhm: f64,
    /// Time after the input up to which the output is computed, in s.
    #[arg(long)]
    horizon: Option<f64>,
    /// Detection gate width in s.
    #[arg(long, default_value_t = 300e-9)]
    gate: f64,
    /// Photons per pulse; scales the intensity trace.
    #[arg(long, default_value_t = 1.0)]
    photons: f64,
    /// Multiplier applied to the optical depth.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
}

pub fn echo(ctx: &Context, a: EchoArgs) -> Result<()> {
    let spectrum = io::read_spectrum_file(&a.input)?;
    let pulse = PulseSpec::gaussian(a.fwhm, a.photons);
    pulse.validate()?;
    if !(a.period > 0.0 && a.period.is_finite()) {
        return Err(AfcError::invalid("period", format!("must be > 0, got {}", a.period)));
    }
    let horizon = a.horizon.unwrap_or(3.0 / a.period);
    let cs = PropagationConfig { scale: a.scale }.complex_depth(&spectrum)?;
    let transfer = propagation::transfer_function(&cs);
    let trace = propagation::propagate(&pulse, &transfer, a.period, horizon)?;
    let report = propagation::echo_energies(&trace, 1.0 / a.period, a.gate)?;
    io::write_file(&ctx.path("trace.csv"), |w| {
        io::write_table(
            w,
            &io::TRACE_HEADER,
            trace.times().zip(&trace.samples).map(|(t, &v)| vec![t - trace.origin, v]),
        )
    })?;
    io::write_json_file(&ctx.path("echo.json"), &report)?;
    ctx.finish(RunManifest::new("echo", &a, None)?, &[&a.input], &["trace.csv", "echo.json"])
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PrepareArgs {
    /// Material JSON (missing fields take defaults).
    #[arg(long)]
    #[serde(skip)]
    material: Option<PathBuf>,
    /// Pump sequence JSON (missing fields take defaults).
    #[arg(long)]
    #[serde(skip)]
    sequence: Option<PathBuf>,
    /// Pump powers, comma separated, strictly increasing (default: one decade below
    /// the saturation power). An empty list gives a header-only table.
    #[arg(long)]
    powers: Option<NumberList>,
    /// Analysis grid length in comb periods.
    #[arg(long, default_value_t = 4)]
    periods: usize,
    /// Also write each burned spectrum as spectrum_<index>.csv.
    #[arg(long)]
    spectra: bool,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct PrepareConfig<'a> {
    material: &'a MaterialConfig,
    sequence: &'a PumpSequenceConfig,
    powers: &'a [f64],
    periods: usize,
    spectra: bool,
}

pub fn prepare(ctx: &Context, a: PrepareArgs) -> Result<()> {
    let material: MaterialConfig = match &a.material {
        Some(p) => io::read_json_file(p)?,
        None => MaterialConfig::default(),
    };
    let sequence: PumpSequenceConfig = match &a.sequence {
        Some(p) => io::read_json_file(p)?,
        None => PumpSequenceConfig::default(),
    };
    material.validate()?;
    sequence.validate()?;
    let powers = a.powers.clone().map(|l| l.0).unwrap_or_else(|| preparation::default_sweep_powers(&material));
    let grid = FrequencyGrid::centered(0.0, sequence.period(), a.periods, 64)?;
    let rows = preparation::power_sweep(&material, &sequence, &powers, &grid)?;
    io::write_file(&ctx.path("sweep.csv"), |w| {
        io::write_table(
            w,
            &io::SWEEP_HEADER,
            rows.iter().map(|r| vec![r.power, r.peak_depth, r.finesse, r.eta_fourier, r.eta_opt]),
        )
    })?;
    let mut outputs = vec!["sweep.csv".to_string()];
    if a.spectra {
        for (i, &power) in powers.iter().enumerate() {
            let comb = preparation::burn_comb(&material, &sequence.with_power(power), &grid)?;
            let name = format!("spectrum_{i}.csv");
            io::write_file(&ctx.path(&name), |w| io::write_spectrum_csv(w, &comb.spectrum))?;
            outputs.push(name);
        }
    }
    let config = PrepareConfig {
        material: &material,
        sequence: &sequence,
        powers: &powers,
        periods: a.periods,
        spectra: a.spectra,
    };
    let inputs: Vec<&Path> = a.material.iter().chain(&a.sequence).map(PathBuf::as_path).collect();
    let outputs: Vec<&str> = outputs.iter().map(String::as_str).collect();
    ctx.finish(RunManifest::new("prepare", &config, None)?, &inputs, &outputs)
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CountsArgs {
    /// Detection JSON (default: the built-in single-photon budget).
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Storage time (echo delay) in s.
    #[arg(long, default_value_t = 1.5e-6)]
    storage_time: f64,
    /// Background gates placed before the transmitted pulse.
    #[arg(long, default_value_t = 4)]
    off_gates: usize,
    /// Independent histograms for the median signal-to-noise ratio.
    #[arg(long, default_value_t = 1)]
    runs: usize,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CountsConfig<'a> {
    detection: &'a DetectionConfig,
    storage_time: f64,
    off_gates: usize,
    runs: usize,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct CountsReport {
    total_gates: u64,
    expected_echo1: f64,
    expected_background: f64,
    echo1_counts: u64,
    snr: f64,
    background_free: bool,
    runs: usize,
    median_snr: f64,
}

pub fn counts(ctx: &Context, a: CountsArgs) -> Result<()> {
    let mut cfg: DetectionConfig = match &a.config {
        Some(p) => io::read_json_file(p)?,
        None => DetectionConfig::default(),
    };
    if let Some(seed) = ctx.seed {
        cfg.rng_seed = seed;
    }
    cfg.validate()?;
    if !(a.storage_time > 0.0 && a.storage_time.is_finite()) {
        return Err(AfcError::invalid("storageTime", format!("must be > 0, got {}", a.storage_time)));
    }
    if a.off_gates == 0 {
        return Err(AfcError::invalid("offGates", "must be >= 1"));
    }
    if a.runs == 0 {
        return Err(AfcError::invalid("runs", "must be >= 1"));
    }
    let gates = detection::standard_gates(a.storage_time, a.off_gates);
    let signal = gates.iter().position(|g| g.position == GatePosition::Echo1).unwrap_or(0);
    let background: Vec<usize> = (0..gates.len()).filter(|&i| gates[i].position == GatePosition::Off).collect();

    let histograms = detection::simulate_ensemble(&cfg, &gates, a.runs)?;
    let first = &histograms[0];
    let single = detection::snr(first, signal, &background)?;
    let all = histograms
        .iter()
        .map(|h| detection::snr(h, signal, &background).map(|r| r.snr))
        .collect::<Result<Vec<f64>>>()?;
    let report = CountsReport {
        total_gates: cfg.total_gates(),
        expected_echo1: detection::expected_counts(&cfg, GatePosition::Echo1),
        expected_background: detection::expected_counts(&cfg, GatePosition::Off),
        echo1_counts: first.counts[signal],
        snr: single.snr,
        background_free: single.background_free,
        runs: a.runs,
        median_snr: detection::median(&all).unwrap_or(f64::NAN),
    };
    io::write_file(&ctx.path("histogram.csv"), |w| {
        io::write_table(
            w,
            &io::HISTOGRAM_HEADER,
            first.gate_centers.iter().zip(&first.counts).map(|(&t, &c)| vec![t, c as f64]),
        )
    })?;
    io::write_json_file(&ctx.path("snr.json"), &report)?;
    let config = CountsConfig {
        detection: &cfg,
        storage_time: a.storage_time,
        off_gates: a.off_gates,
        runs: a.runs,
    };
    let inputs: Vec<&Path> = a.config.iter().map(PathBuf::as_path).collect();
    ctx.finish(
        RunManifest::new("counts", &config, Some(cfg.rng_seed))?,
        &inputs,
        &["histogram.csv", "snr.json"],
    )
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct OptimizeArgs {
    /// Optical depths, comma separated (default: 0 to 10 in steps of 0.5).
    #[arg(long)]
    depths: Option<NumberList>,
}

pub fn optimize(ctx: &Context, a: OptimizeArgs) -> Result<()> {
    let depths = a
        .depths
        .clone()
        .map(|l| l.0)
        .unwrap_or_else(|| (0..=20).map(|i| 0.5 * i as f64).collect());
    let rows = efficiency_curve(&depths)?;
    io::write_file(&ctx.path("curve.csv"), |w| {
        io::write_table(
            w,
            &io::CURVE_HEADER,
            rows.iter().map(|r| vec![r.d, r.f_opt, r.eta_opt, r.f_star, r.eta_star]),
        )
    })?;
    ctx.finish(RunManifest::new("optimize", &OptimizeConfig { depths: &depths }, None)?, &[], &["curve.csv"])
}

#[derive(Serialize)]
struct OptimizeConfig<'a> {
    depths: &'a [f64],
}
