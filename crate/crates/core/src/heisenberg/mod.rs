//! Second-order Heisenberg correlation expansion for a single V emitter on a
//! discretized phonon grid, plus linear absorption spectra.

mod evolve;
mod rhs;
mod spectrum;
mod state;

pub use evolve::{evolve_heisenberg, heisenberg_channels, HeisenbergRun, PAIRING_TOL, POPULATION_TOL};
pub use rhs::{rhs, HeisenbergOptions, HeisenbergSystem};
pub use spectrum::{
    absorption_spectrum, fourier, ibm_reference_spectrum, omega_grid, significant_maxima, Spectrum,
    SpectrumConfig,
};
pub use state::{HeisenbergState, M3};
