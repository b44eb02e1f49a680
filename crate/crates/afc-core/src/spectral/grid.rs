use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{AfcError, Result};

/// Relative tolerance used when checking that sampled frequencies are evenly spaced.
const UNIFORMITY_TOLERANCE: f64 = 1e-6;

/// Uniform frequency axis `start + i * step`, `i = 0..count`.
///
/// Each sample owns a cell of width `step` centred on it, so the grid covers
/// `[start - step/2, start + (count - 1/2) * step]`. A grid holding `M * S` samples
/// with `step = period / S` therefore tiles exactly `M` comb periods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    start: f64,
    step: f64,
    count: usize,
}

impl FrequencyGrid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !start.is_finite() {
            return Err(AfcError::invalid("start", "must be finite"));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(AfcError::invalid("step", format!("must be > 0, got {step}")));
        }
        if count < 2 {
            return Err(AfcError::invalid("count", format!("must be >= 2, got {count}")));
        }
        Ok(FrequencyGrid { start, step, count })
    }

    /// Grid of `periods * samples_per_period` cells centred on `center`, with a sample
    /// exactly at `center` (index `count / 2`).
    pub fn centered(center: f64, period: f64, periods: usize, samples_per_period: usize) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(AfcError::invalid("period", format!("must be > 0, got {period}")));
        }
        if periods == 0 || samples_per_period == 0 {
            return Err(AfcError::invalid("periods", "periods and samples per period must be positive"));
        }
        let count = periods * samples_per_period;
        let step = period / samples_per_period as f64;
        Self::new(center - (count / 2) as f64 * step, step, count)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.point(i))
    }

    pub fn last(&self) -> f64 {
        self.point(self.count - 1)
    }

    /// Total width covered by the sample cells.
    pub fn span(&self) -> f64 {
        self.count as f64 * self.step
    }

    /// Lower edge of the first cell.
    pub fn lower_edge(&self) -> f64 {
        self.start - 0.5 * self.step
    }

    /// Midpoint of the covered interval.
    pub fn midpoint(&self) -> f64 {
        self.lower_edge() + 0.5 * self.span()
    }

    /// Band centre: the sample at index `count / 2`.
    pub fn center(&self) -> f64 {
        self.point(self.count / 2)
    }

    /// Build a grid from explicit sample positions, rejecting non-uniform spacing.
    pub fn from_points(points: &[f64]) -> Result<Self> {
        if points.len() < 2 {
            return Err(AfcError::Domain(format!(
                "a frequency grid needs at least 2 points, got {}",
                points.len()
            )));
        }
        let n = points.len();
        let step = (points[n - 1] - points[0]) / (n - 1) as f64;
        if !(step > 0.0) {
            return Err(AfcError::Domain("frequencies must be strictly increasing".into()));
        }
        for (i, w) in points.windows(2).enumerate() {
            let d = w[1] - w[0];
            if d <= 0.0 {
                return Err(AfcError::Domain(format!(
                    "frequencies must be strictly increasing (point {})",
                    i + 1
                )));
            }
            if (d - step).abs() > UNIFORMITY_TOLERANCE * step {
                return Err(AfcError::Domain(format!(
                    "non-uniform frequency grid: spacing {d} at point {} differs from mean spacing {step}",
                    i + 1
                )));
            }
        }
        Self::new(points[0], step, n)
    }
}

/// Optical depth `d(nu)` sampled on a [`FrequencyGrid`]. Intensity transmission is `exp(-d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalDepthSpectrum {
    grid: FrequencyGrid,
    depth: Vec<f64>,
}

impl OpticalDepthSpectrum {
    pub fn new(grid: FrequencyGrid, depth: Vec<f64>) -> Result<Self> {
        if depth.len() != grid.count() {
            return Err(AfcError::Domain(format!(
                "depth array has {} values but the grid has {} points",
                depth.len(),
                grid.count()
            )));
        }
        if let Some((i, v)) = depth.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && v.is_finite())) {
            return Err(AfcError::Domain(format!(
                "optical depth must be finite and >= 0, got {v} at index {i}"
            )));
        }
        Ok(OpticalDepthSpectrum { grid, depth })
    }

    pub fn from_samples(frequencies: &[f64], depth: Vec<f64>) -> Result<Self> {
        Self::new(FrequencyGrid::from_points(frequencies)?, depth)
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn depth(&self) -> &[f64] {
        &self.depth
    }

    pub fn into_depth(self) -> Vec<f64> {
        self.depth
    }

    pub fn mean(&self) -> f64 {
        self.depth.iter().sum::<f64>() / self.depth.len() as f64
    }

    pub fn max(&self) -> f64 {
        self.depth.iter().copied().fold(0.0, f64::max)
    }

    /// Multiply every depth by `factor` (must be >= 0).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.grid, self.depth.iter().map(|d| d * factor).collect())
    }
}

/// Complex spectrum on a frequency grid.
///
/// For a causal medium the values are `phi(nu) + i d(nu)`: the imaginary part is the
/// optical depth and the real part its Kramers-Kronig partner, chosen so that
/// `d + i phi` (the complex depth) has a response supported on non-negative delays.
/// The same container also holds amplitude transfer functions.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    grid: FrequencyGrid,
    values: Vec<Complex64>,
}

impl ComplexSpectrum {
    pub fn new(grid: FrequencyGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(AfcError::Domain(format!(
                "value array has {} entries but the grid has {} points",
                values.len(),
                grid.count()
            )));
        }
        Ok(ComplexSpectrum { grid, values })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Complex depth `d + i phi` at sample `i`.
    pub fn complex_depth(&self, i: usize) -> Complex64 {
        let v = self.values[i];
        Complex64::new(v.im, v.re)
    }

    /// Identity transfer function (or transparent medium) on `grid`.
    pub fn unity(grid: FrequencyGrid) -> Self {
        ComplexSpectrum {
            grid,
            values: vec![Complex64::new(1.0, 0.0); grid.count()],
        }
    }
}
