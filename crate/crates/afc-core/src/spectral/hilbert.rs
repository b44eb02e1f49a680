use num_complex::Complex64;
use rustfft::FftPlanner;

use super::grid::{ComplexSpectrum, OpticalDepthSpectrum};
use crate::error::Result;

/// Complex depth whose real part is `s` and whose delay response vanishes for `t < 0`.
///
/// Works on the samples as one period of a circular sequence: the positive-delay half of
/// the discrete spectrum is doubled and the negative half removed. For inputs spanning a
/// whole number of comb periods this is the one-sided map `c_p kL = 2 i b_p`; for a
/// non-periodic line the band edges must have settled to a common background.
///
/// The stored values are `phi + i d` (see [`ComplexSpectrum`]).
pub fn causal_susceptibility(s: &OpticalDepthSpectrum) -> ComplexSpectrum {
    let n = s.depth().len();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex64> = s.depth().iter().map(|&d| Complex64::new(d, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);

    let scale = 1.0 / n as f64;
    for (m, v) in buf.iter_mut().enumerate() {
        let w = if m == 0 || 2 * m == n {
            1.0
        } else if 2 * m < n {
            2.0
        } else {
            0.0
        };
        *v *= w * scale;
    }
    planner.plan_fft_inverse(n).process(&mut buf);

    let values = buf
        .iter()
        .zip(s.depth())
        .map(|(dc, &d)| Complex64::new(dc.im, d))
        .collect();
    ComplexSpectrum::new(*s.grid(), values).expect("length preserved")
}

/// As [`causal_susceptibility`] for raw samples; a non-uniform axis is a domain error.
pub fn causal_susceptibility_from_samples(frequencies: &[f64], depth: Vec<f64>) -> Result<ComplexSpectrum> {
    Ok(causal_susceptibility(&OpticalDepthSpectrum::from_samples(frequencies, depth)?))
}
