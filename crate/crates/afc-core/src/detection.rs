//! Gated photon counting at the single-photon level.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AfcError, Result};

/// Count budget of a gated measurement. Rates in counts/s, times in s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DetectionConfig {
    pub mean_photon_number: f64,
    pub afc_efficiency: f64,
    pub transmitted_fraction: f64,
    /// Fraction of the input re-emitted in the second echo.
    #[serde(default)]
    pub echo2_efficiency: f64,
    pub collection_efficiency: f64,
    pub quantum_efficiency: f64,
    pub dark_rate: f64,
    pub leak_rate: f64,
    pub gate_width: f64,
    pub pulses_per_second: f64,
    pub accumulation_time: f64,
    pub rng_seed: u64,
}

impl Default for DetectionConfig {
    /// 0.5 photon per pulse, 300 ns gates, 3039 pulses/s for 5.51 s.
    ///
    /// The dark rate is back-calculated from 0.31 dark counts over 16744 gates. The leak
    /// brings the off-gate background to 8 counts and the collection efficiency puts 88
    /// counts in the echo gate.
    fn default() -> Self {
        DetectionConfig {
            mean_photon_number: 0.5,
            afc_efficiency: 0.0913,
            transmitted_fraction: 0.3,
            echo2_efficiency: 0.0,
            collection_efficiency: 0.161_02,
            quantum_efficiency: 0.65,
            dark_rate: 61.7,
            leak_rate: 1530.9,
            gate_width: 300e-9,
            pulses_per_second: 3039.0,
            accumulation_time: 5.51,
            rng_seed: 0,
        }
    }
}

fn fraction(field: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(AfcError::invalid(field, format!("must be in [0, 1], got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(AfcError::invalid(field, format!("must be >= 0, got {v}")))
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<()> {
        non_negative("meanPhotonNumber", self.mean_photon_number)?;
        fraction("afcEfficiency", self.afc_efficiency)?;
        fraction("transmittedFraction", self.transmitted_fraction)?;
        fraction("echo2Efficiency", self.echo2_efficiency)?;
        fraction("collectionEfficiency", self.collection_efficiency)?;
        fraction("quantumEfficiency", self.quantum_efficiency)?;
        non_negative("darkRate", self.dark_rate)?;
        non_negative("leakRate", self.leak_rate)?;
        if !(self.gate_width > 0.0 && self.gate_width.is_finite()) {
            return Err(AfcError::invalid("gateWidth", format!("must be > 0, got {}", self.gate_width)));
        }
        non_negative("pulsesPerSecond", self.pulses_per_second)?;
        non_negative("accumulationTime", self.accumulation_time)?;
        Ok(())
    }

    /// Number of gates accumulated at each gate position.
    pub fn total_gates(&self) -> u64 {
        (self.pulses_per_second * self.accumulation_time).floor() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GatePosition {
    Transmitted,
    Echo1,
    Echo2,
    Off,
}

/// A counting gate centred at `center` seconds after the input pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub center: f64,
    pub position: GatePosition,
}

/// Transmitted, echo and echo-2 gates at `0`, `T`, `2T`, plus `off` background gates at
/// `-T, -2T, ...`.
pub fn standard_gates(storage_time: f64, off: usize) -> Vec<Gate> {
    let mut gates: Vec<Gate> = (1..=off)
        .rev()
        .map(|k| Gate {
            center: -(k as f64) * storage_time,
            position: GatePosition::Off,
        })
        .collect();
    for (k, position) in [GatePosition::Transmitted, GatePosition::Echo1, GatePosition::Echo2]
        .into_iter()
        .enumerate()
    {
        gates.push(Gate {
            center: k as f64 * storage_time,
            position,
        });
    }
    gates
}

/// Mean accumulated counts for a gate at `position`.
pub fn expected_counts(cfg: &DetectionConfig, position: GatePosition) -> f64 {
    let fraction = match position {
        GatePosition::Transmitted => cfg.transmitted_fraction,
        GatePosition::Echo1 => cfg.afc_efficiency,
        GatePosition::Echo2 => cfg.echo2_efficiency,
        GatePosition::Off => 0.0,
    };
    let per_gate = cfg.mean_photon_number * fraction * cfg.collection_efficiency * cfg.quantum_efficiency
        + (cfg.dark_rate + cfg.leak_rate) * cfg.gate_width;
    cfg.total_gates() as f64 * per_gate
}

/// Accumulated counts per gate position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CountHistogram {
    pub gate_centers: Vec<f64>,
    pub counts: Vec<u64>,
    pub total_gates: u64,
    pub rng_seed: u64,
}

fn check_gates(cfg: &DetectionConfig, gates: &[Gate]) -> Result<()> {
    let mut centers: Vec<f64> = gates.iter().map(|g| g.center).collect();
    if let Some(c) = centers.iter().find(|c| !c.is_finite()) {
        return Err(AfcError::invalid("gateCenter", format!("must be finite, got {c}")));
    }
    centers.sort_by(f64::total_cmp);
    if let Some(w) = centers.windows(2).find(|w| w[1] - w[0] < cfg.gate_width * (1.0 - 1e-9)) {
        return Err(AfcError::Domain(format!(
            "gates at {} s and {} s overlap (width {} s)",
            w[0], w[1], cfg.gate_width
        )));
    }
    Ok(())
}

/// Independent Poisson draws at each gate, seeded from `cfg.rngSeed`.
pub fn simulate_histogram(cfg: &DetectionConfig, gates: &[Gate]) -> Result<CountHistogram> {
    cfg.validate()?;
    check_gates(cfg, gates)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let counts = gates
        .iter()
        .map(|g| {
            let mean = expected_counts(cfg, g.position);
            if mean > 0.0 {
                let poisson = Poisson::new(mean).map_err(|e| AfcError::Domain(e.to_string()))?;
                Ok(poisson.sample(&mut rng) as u64)
            } else {
                Ok(0)
            }
        })
        .collect::<Result<Vec<u64>>>()?;
    Ok(CountHistogram {
        gate_centers: gates.iter().map(|g| g.center).collect(),
        counts,
        total_gates: cfg.total_gates(),
        rng_seed: cfg.rng_seed,
    })
}

/// `runs` histograms; run `i` uses seed `rngSeed + i` (wrapping).
pub fn simulate_ensemble(cfg: &DetectionConfig, gates: &[Gate], runs: usize) -> Result<Vec<CountHistogram>> {
    (0..runs)
        .into_par_iter()
        .map(|i| {
            let run = DetectionConfig {
                rng_seed: cfg.rng_seed.wrapping_add(i as u64),
                ..*cfg
            };
            simulate_histogram(&run, gates)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SnrResult {
    /// `+inf` when the background is zero and the signal is not.
    pub snr: f64,
    pub signal: f64,
    pub background_mean: f64,
    pub background_free: bool,
}

/// Signal gate counts over the mean of the background gates.
pub fn snr(h: &CountHistogram, signal_gate: usize, background_gates: &[usize]) -> Result<SnrResult> {
    if background_gates.is_empty() {
        return Err(AfcError::invalid("backgroundGates", "at least one background gate is required"));
    }
    if background_gates.contains(&signal_gate) {
        return Err(AfcError::invalid("backgroundGates", "must not include the signal gate"));
    }
    let n = h.counts.len();
    if let Some(i) = std::iter::once(&signal_gate).chain(background_gates).find(|&&i| i >= n) {
        return Err(AfcError::Domain(format!("gate index {i} out of range for {n} gates")));
    }
    let signal = h.counts[signal_gate] as f64;
    let background_mean =
        background_gates.iter().map(|&i| h.counts[i] as f64).sum::<f64>() / background_gates.len() as f64;
    let (value, background_free) = if background_mean == 0.0 {
        (if signal > 0.0 { f64::INFINITY } else { f64::NAN }, true)
    } else {
        (signal / background_mean, false)
    };
    Ok(SnrResult {
        snr: value,
        signal,
        background_mean,
        background_free,
    })
}

/// Median of the finite-or-infinite values, ignoring NaN. `None` when nothing remains.
pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| !x.is_nan()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dark_only(rate: f64) -> DetectionConfig {
        DetectionConfig {
            mean_photon_number: 0.0,
            dark_rate: rate,
            leak_rate: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn gate_total() {
        assert_eq!(DetectionConfig::default().total_gates(), 16744);
    }

    #[test]
    fn dark_count_budget() {
        let e = expected_counts(&dark_only(60.0), GatePosition::Off);
        assert!((e - 16744.0 * 300e-9 * 60.0).abs() < 1e-12);
        assert!((e - 0.30).abs() < 0.005);
        assert!((expected_counts(&dark_only(61.7), GatePosition::Off) - 0.31).abs() < 0.001);
    }

    #[test]
    fn default_budget_hits_background_and_echo() {
        let cfg = DetectionConfig::default();
        assert!((expected_counts(&cfg, GatePosition::Off) - 8.0).abs() < 0.01);
        assert!((expected_counts(&cfg, GatePosition::Echo1) - 88.0).abs() < 0.1);
    }

    #[test]
    fn ideal_detection_per_gate() {
        let cfg = DetectionConfig {
            mean_photon_number: 0.5,
            transmitted_fraction: 1.0,
            collection_efficiency: 1.0,
            quantum_efficiency: 1.0,
            dark_rate: 0.0,
            leak_rate: 0.0,
            ..Default::default()
        };
        let e = expected_counts(&cfg, GatePosition::Transmitted);
        assert!((e / cfg.total_gates() as f64 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_config_gives_zero_histogram() {
        let cfg = DetectionConfig {
            mean_photon_number: 0.0,
            dark_rate: 0.0,
            leak_rate: 0.0,
            ..Default::default()
        };
        let h = simulate_histogram(&cfg, &standard_gates(1.5e-6, 4)).unwrap();
        assert!(h.counts.iter().all(|&c| c == 0));
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let cfg = DetectionConfig {
            rng_seed: 42,
            ..Default::default()
        };
        let gates = standard_gates(1.5e-6, 4);
        assert_eq!(simulate_histogram(&cfg, &gates).unwrap(), simulate_histogram(&cfg, &gates).unwrap());
    }

    #[test]
    fn overlapping_gates_rejected() {
        let cfg = DetectionConfig::default();
        let gates = [
            Gate { center: 0.0, position: GatePosition::Off },
            Gate { center: 100e-9, position: GatePosition::Off },
        ];
        assert!(matches!(simulate_histogram(&cfg, &gates), Err(AfcError::Domain(_))));
    }

    #[test]
    fn snr_cases() {
        let h = |counts: Vec<u64>| CountHistogram {
            gate_centers: (0..counts.len()).map(|i| i as f64).collect(),
            counts,
            total_gates: 1,
            rng_seed: 0,
        };
        let r = snr(&h(vec![8, 8, 88]), 2, &[0, 1]).unwrap();
        assert_eq!(r.snr, 11.0);
        assert_eq!(snr(&h(vec![5, 5]), 1, &[0]).unwrap().snr, 1.0);
        let r = snr(&h(vec![0, 3]), 1, &[0]).unwrap();
        assert!(r.background_free && r.snr.is_infinite());
        assert!(snr(&h(vec![1, 2]), 1, &[]).is_err());
        assert!(snr(&h(vec![1, 2]), 1, &[1]).is_err());
        assert!(snr(&h(vec![1, 2]), 1, &[5]).is_err());
    }

    #[test]
    fn median_values() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[f64::NAN]), None);
    }
}
