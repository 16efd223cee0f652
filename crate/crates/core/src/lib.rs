//! Modified-dispersion toolkit: frequency laws, Bogoliubov coefficients,
//! tail/total energy-density ratios and scale-factor reconstruction.

pub mod bogoliubov;
pub mod cli;
pub mod dispersion;
pub mod numeric;
pub mod quadrature;
pub mod reconstruct;
pub mod spectra;
