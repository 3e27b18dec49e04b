//! Physical constants and unit conversions.
//!
//! Internally every rate and energy is an angular frequency in ps⁻¹, times are
//! in ps, wavenumbers in nm⁻¹ and sound velocities in nm/ps. Conversions to and
//! from meV, kelvin and SI material parameters happen at the config boundary.

/// Reduced Planck constant in meV·ps.
pub const HBAR_MEV_PS: f64 = 0.6582;

/// Boltzmann constant in meV/K.
pub const KB_MEV_PER_K: f64 = 0.08617;

/// Joules per electron volt.
pub const JOULE_PER_EV: f64 = 1.602_176_634e-19;

/// Reduced Planck constant in J·s, consistent with [`HBAR_MEV_PS`].
pub const HBAR_SI: f64 = HBAR_MEV_PS * 1e-3 * JOULE_PER_EV * 1e-12;

/// Free electron mass in kg.
pub const ELECTRON_MASS_KG: f64 = 9.109_383_7015e-31;

/// Converts an energy in meV to an angular frequency in ps⁻¹.
pub fn mev_to_per_ps(energy_mev: f64) -> f64 {
    energy_mev / HBAR_MEV_PS
}

/// Converts an angular frequency in ps⁻¹ to an energy in meV.
pub fn per_ps_to_mev(omega: f64) -> f64 {
    omega * HBAR_MEV_PS
}

/// Converts a rate in ns⁻¹ to ps⁻¹.
pub fn per_ns_to_per_ps(rate: f64) -> f64 {
    rate * 1e-3
}

/// Thermal energy k_B·T expressed as an angular frequency in ps⁻¹.
pub fn thermal_frequency(temperature_k: f64) -> f64 {
    KB_MEV_PER_K * temperature_k / HBAR_MEV_PS
}

/// Sound velocity m/s → nm/ps.
pub fn m_per_s_to_nm_per_ps(v: f64) -> f64 {
    v * 1e-3
}
