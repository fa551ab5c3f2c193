//! Statistical verification layer: spectra, structure functions and
//! exponent fits, block-replacement residuals, oscillatory crossed-field
//! integrals and the regularized energy process.

pub mod bg;
pub mod crossed;
pub mod dft;
pub mod energy;
pub mod riemann;
pub mod stats;
pub mod structure;

pub use bg::{bg_residual, bg_residual_smooth, bg_residual_smooth_multi, BgEstimate};
pub use crossed::{crossed_decay_table, DecayRow};
pub use dft::{dft, dft_complex, idft, SpectralSeries};
pub use energy::{energy_increment_gap, EnergyGap};
pub use riemann::{oscillatory_integral, StepProcess};
pub use structure::{exponent_fit, profile_width, structure_function, StructureFunctionEstimate};
