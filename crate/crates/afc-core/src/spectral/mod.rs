//! Frequency grids, comb synthesis, Fourier analysis and causal reconstruction.

pub mod comb;
pub mod fit;
pub mod fourier;
pub mod grid;
pub mod hilbert;

pub use comb::{
    finesse_from_hwhm, lorentzian_harmonic_ratio, lorentzian_mean_depth, synth_comb, tooth_hwhm, CombDescriptor,
    CombShape,
};
pub use fit::fit_lorentzian_comb;
pub use fourier::{fourier_coefficients, fourier_coefficients_in, AnalysisWindow, FourierCoefficientSet, WindowChoice};
pub use grid::{ComplexSpectrum, FrequencyGrid, OpticalDepthSpectrum};
pub use hilbert::{causal_susceptibility, causal_susceptibility_from_samples};
