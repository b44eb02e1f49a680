use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::grid::{FrequencyGrid, OpticalDepthSpectrum};
use crate::error::{AfcError, Result};

/// Tooth profile of a synthetic comb.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombShape {
    Lorentzian,
    Gaussian,
    Cosine,
    Flat,
}

impl fmt::Display for CombShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CombShape::Lorentzian => "lorentzian",
            CombShape::Gaussian => "gaussian",
            CombShape::Cosine => "cosine",
            CombShape::Flat => "flat",
        };
        f.write_str(s)
    }
}

impl FromStr for CombShape {
    type Err = AfcError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lorentzian" => Ok(CombShape::Lorentzian),
            "gaussian" => Ok(CombShape::Gaussian),
            "cosine" => Ok(CombShape::Cosine),
            "flat" => Ok(CombShape::Flat),
            other => Err(AfcError::invalid(
                "shape",
                format!("unknown comb shape `{other}` (expected lorentzian, gaussian, cosine or flat)"),
            )),
        }
    }
}

/// Parametric comb: teeth of height `peak_depth` above `background`, spaced by `period` (Hz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct CombDescriptor {
    pub shape: CombShape,
    pub peak_depth: f64,
    pub finesse: f64,
    pub period: f64,
    pub bandwidth: f64,
    pub background: f64,
}

impl CombDescriptor {
    /// Lorentzian comb filling `bandwidth`, zero background.
    pub fn lorentzian(peak_depth: f64, finesse: f64, period: f64, bandwidth: f64) -> Self {
        CombDescriptor {
            shape: CombShape::Lorentzian,
            peak_depth,
            finesse,
            period,
            bandwidth,
            background: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.peak_depth >= 0.0 && self.peak_depth.is_finite()) {
            return Err(AfcError::invalid("peakDepth", format!("must be >= 0, got {}", self.peak_depth)));
        }
        let needs_finesse = matches!(self.shape, CombShape::Lorentzian | CombShape::Gaussian);
        if needs_finesse && !(self.finesse > 0.0 && self.finesse.is_finite()) {
            return Err(AfcError::invalid("finesse", format!("must be > 0, got {}", self.finesse)));
        }
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(AfcError::invalid("period", format!("must be > 0, got {}", self.period)));
        }
        if !(self.background >= 0.0 && self.background.is_finite()) {
            return Err(AfcError::invalid("background", format!("must be >= 0, got {}", self.background)));
        }
        if !self.bandwidth.is_finite() {
            return Err(AfcError::invalid("bandwidth", "must be finite"));
        }
        if self.bandwidth < self.period {
            return Err(AfcError::Domain(format!(
                "bandwidth {} Hz is narrower than one comb period {} Hz",
                self.bandwidth, self.period
            )));
        }
        Ok(())
    }

    /// Tooth HWHM in Hz for this descriptor's finesse.
    pub fn tooth_hwhm(&self) -> f64 {
        tooth_hwhm(self.period, self.finesse)
    }
}

/// Tooth half width at half maximum (Hz) for a comb of `period` (Hz) and `finesse`.
///
/// Finesse is `F = pi / (Gamma * T)` with `Gamma` the angular HWHM and `T = 1 / period`;
/// in ordinary frequency units this is `period / (2 F)`. Every conversion between the
/// two goes through this function and [`finesse_from_hwhm`].
pub fn tooth_hwhm(period: f64, finesse: f64) -> f64 {
    period / (2.0 * finesse)
}

/// Inverse of [`tooth_hwhm`].
pub fn finesse_from_hwhm(period: f64, hwhm: f64) -> f64 {
    period / (2.0 * hwhm)
}

/// Mean of a periodized Lorentzian comb of maximum depth `d`: `d tanh(pi / 2F)`.
pub fn lorentzian_mean_depth(d: f64, finesse: f64) -> f64 {
    d * (PI / (2.0 * finesse)).tanh()
}

/// Ratio between consecutive harmonics of a periodized Lorentzian comb: `exp(-pi / F)`.
pub fn lorentzian_harmonic_ratio(finesse: f64) -> f64 {
    (-PI / finesse).exp()
}

/// Periodized tooth profile normalized to 1 at the tooth centre. `phase` is the offset from
/// the nearest tooth in units of periods.
pub(crate) fn tooth_profile(shape: CombShape, finesse: f64, phase: f64) -> f64 {
    let theta = 2.0 * PI * phase;
    match shape {
        CombShape::Flat => 1.0,
        CombShape::Cosine => 0.5 * (1.0 + theta.cos()),
        CombShape::Lorentzian => {
            // Poisson kernel, which is the closed form of the image sum of Lorentzians.
            let r = lorentzian_harmonic_ratio(finesse);
            let kernel = (1.0 - r * r) / (1.0 - 2.0 * r * theta.cos() + r * r);
            kernel * (1.0 - r) / (1.0 + r)
        }
        CombShape::Gaussian => {
            let hwhm = 1.0 / (2.0 * finesse);
            let sigma = hwhm / (2.0 * std::f64::consts::LN_2).sqrt();
            let reach = (10.0 * sigma).ceil() as i64 + 1;
            let image_sum = |x: f64| -> f64 {
                (-reach..=reach)
                    .map(|k| {
                        let u = (x - k as f64) / sigma;
                        (-0.5 * u * u).exp()
                    })
                    .sum()
            };
            let frac = phase - phase.round();
            image_sum(frac) / image_sum(0.0)
        }
    }
}

/// Synthesize a comb on `grid`. Teeth sit at `grid.center() + k * period`; outside
/// `bandwidth` (centred on the band centre) only the background remains.
pub fn synth_comb(desc: &CombDescriptor, grid: &FrequencyGrid) -> Result<OpticalDepthSpectrum> {
    desc.validate()?;
    if desc.shape != CombShape::Flat {
        let periods = grid.span() / desc.period;
        if periods < 3.0 - 1e-9 {
            return Err(AfcError::Resolution(format!(
                "grid spans {periods:.3} comb periods, at least 3 are required"
            )));
        }
        let max_step = match desc.shape {
            CombShape::Cosine => desc.period / 8.0,
            _ => desc.period / (8.0 * desc.finesse),
        };
        if grid.step() > max_step * (1.0 + 1e-9) {
            return Err(AfcError::Resolution(format!(
                "grid step {} Hz is too coarse to resolve comb teeth (need <= {} Hz)",
                grid.step(),
                max_step
            )));
        }
    }

    let center = grid.center();
    let half_band = 0.5 * desc.bandwidth * (1.0 + 1e-12) + 1e-9 * grid.step();
    let depth = grid
        .points()
        .map(|nu| {
            let offset = nu - center;
            let comb = if offset.abs() <= half_band {
                desc.peak_depth * tooth_profile(desc.shape, desc.finesse, offset / desc.period)
            } else {
                0.0
            };
            desc.background + comb
        })
        .collect();
    OpticalDepthSpectrum::new(*grid, depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(periods: usize, spp: usize) -> FrequencyGrid {
        FrequencyGrid::centered(0.0, 1.0, periods, spp).unwrap()
    }

    #[test]
    fn flat_comb_is_constant() {
        let desc = CombDescriptor {
            shape: CombShape::Flat,
            peak_depth: 2.0,
            finesse: 0.0,
            period: 1.0,
            bandwidth: 10.0,
            background: 0.0,
        };
        let s = synth_comb(&desc, &grid(10, 16)).unwrap();
        assert!(s.depth().iter().all(|&d| d == 2.0));
    }

    #[test]
    fn cosine_comb_normalization() {
        let desc = CombDescriptor {
            shape: CombShape::Cosine,
            peak_depth: 1.0,
            finesse: 1.0,
            period: 1.0,
            bandwidth: 10.0,
            background: 0.0,
        };
        let s = synth_comb(&desc, &grid(10, 64)).unwrap();
        assert!((s.max() - 1.0).abs() < 1e-12);
        assert!((s.mean() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn lorentzian_max_and_symmetry() {
        let desc = CombDescriptor::lorentzian(2.0, 5.0, 1.0, 20.0);
        let g = grid(20, 64);
        let s = synth_comb(&desc, &g).unwrap();
        assert!((s.max() - 2.0).abs() < 1e-12);
        let c = g.count() / 2;
        for k in 1..c {
            assert!((s.depth()[c + k] - s.depth()[c - k]).abs() < 1e-12);
        }
    }

    #[test]
    fn background_adds_to_peak() {
        let mut desc = CombDescriptor::lorentzian(2.0, 5.0, 1.0, 20.0);
        desc.background = 0.3;
        let s = synth_comb(&desc, &grid(20, 64)).unwrap();
        assert!((s.max() - 2.3).abs() < 1e-12);
    }

    #[test]
    fn coarse_grid_is_resolution_error() {
        let desc = CombDescriptor::lorentzian(2.0, 5.0, 1.0, 20.0);
        let err = synth_comb(&desc, &grid(20, 16)).unwrap_err();
        assert!(matches!(err, AfcError::Resolution(_)));
        let err = synth_comb(&desc, &grid(2, 64)).unwrap_err();
        assert!(matches!(err, AfcError::Resolution(_)));
    }

    #[test]
    fn narrow_bandwidth_is_domain_error() {
        let desc = CombDescriptor::lorentzian(2.0, 5.0, 1.0, 0.5);
        let err = synth_comb(&desc, &grid(20, 64)).unwrap_err();
        assert!(matches!(err, AfcError::Domain(_)));
    }

    #[test]
    fn teeth_confined_to_band() {
        let desc = CombDescriptor::lorentzian(2.0, 5.0, 1.0, 4.0);
        let g = grid(10, 64);
        let s = synth_comb(&desc, &g).unwrap();
        for (nu, d) in g.points().zip(s.depth()) {
            if nu.abs() > 2.0 + 1e-9 {
                assert_eq!(*d, 0.0);
            }
        }
    }

    #[test]
    fn gaussian_comb_peaks_at_one() {
        let desc = CombDescriptor {
            shape: CombShape::Gaussian,
            peak_depth: 1.5,
            finesse: 4.0,
            period: 1.0,
            bandwidth: 10.0,
            background: 0.0,
        };
        let s = synth_comb(&desc, &grid(10, 64)).unwrap();
        assert!((s.max() - 1.5).abs() < 1e-12);
        // half maximum one HWHM away from the tooth centre
        let hwhm = tooth_hwhm(1.0, 4.0);
        let v = tooth_profile(CombShape::Gaussian, 4.0, hwhm);
        assert!((v - 0.5).abs() < 1e-3);
    }

    #[test]
    fn shape_parsing() {
        assert_eq!("Lorentzian".parse::<CombShape>().unwrap(), CombShape::Lorentzian);
        assert!(matches!(
            "triangle".parse::<CombShape>(),
            Err(AfcError::InvalidParameter { .. })
        ));
    }
}
