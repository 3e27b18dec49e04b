//! Phonon reservoir definitions and the spectral density they induce.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{self, ELECTRON_MASS_KG, HBAR_SI, JOULE_PER_EV};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BathKind {
    Microscopic,
    ParametricSuperohmic,
    Gaussian,
    Lorentzian,
}

/// Deformation-potential coupling to longitudinal acoustic phonons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MicroscopicParams {
    /// m/s
    pub sound_velocity: f64,
    /// kg/m³
    pub mass_density: f64,
    /// eV; effective difference of the excited- and ground-state potentials.
    pub deformation_potential: f64,
    /// kg
    pub effective_mass: f64,
    /// meV
    pub confinement_energy: f64,
}

impl Default for MicroscopicParams {
    fn default() -> Self {
        Self {
            sound_velocity: 5110.0,
            mass_density: 5370.0,
            deformation_potential: 3.5,
            effective_mass: 0.067 * ELECTRON_MASS_KG,
            confinement_energy: 71.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParametricParams {
    /// Dimensionless strength in J(ω) = α ω³/ω_c² · F(ω/ω_c).
    pub alpha: f64,
    /// ħω_c in meV.
    pub cutoff_energy: f64,
    /// m/s; only used to map ω = c_s k for the k-grid.
    pub sound_velocity: f64,
}

impl Default for ParametricParams {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            cutoff_energy: 1.2,
            sound_velocity: 5110.0,
        }
    }
}

/// Missing fields take their defaults; the parameter block matching `kind`
/// is filled in by [`BathSpec::resolved`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSpec {
    #[serde(default = "default_kind")]
    pub kind: BathKind,
    /// K
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub microscopic: Option<MicroscopicParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parametric: Option<ParametricParams>,
    #[serde(default = "one")]
    pub coupling_scale: f64,
}

fn default_kind() -> BathKind {
    BathKind::Microscopic
}

fn default_temperature() -> f64 {
    4.0
}

fn one() -> f64 {
    1.0
}

impl Default for BathSpec {
    fn default() -> Self {
        Self {
            kind: BathKind::Microscopic,
            temperature: 4.0,
            microscopic: Some(MicroscopicParams::default()),
            parametric: None,
            coupling_scale: 1.0,
        }
    }
}

/// Shape of the cutoff in the spectral density, x = ω/ω_c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    /// exp(−x²)
    Gaussian,
    /// exp(−2x²)
    GaussianFormFactor,
    /// (1 + x²)⁻⁴
    LorentzianFormFactor,
}

impl Cutoff {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            Cutoff::Gaussian => (-x * x).exp(),
            Cutoff::GaussianFormFactor => (-2.0 * x * x).exp(),
            Cutoff::LorentzianFormFactor => (1.0 + x * x).powi(-4),
        }
    }

    /// Upper frequency (in units of ω_c) beyond which ω²·F(ω) is negligible.
    pub fn extent(self) -> f64 {
        match self {
            Cutoff::Gaussian => 8.0,
            Cutoff::GaussianFormFactor => 6.0,
            Cutoff::LorentzianFormFactor => 60.0,
        }
    }
}

/// J(ω) = α ω³ F(ω/ω_c), with α in ps² and ω in ps⁻¹, plus the thermal scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralDensity {
    pub alpha: f64,
    pub omega_c: f64,
    pub cutoff: Cutoff,
    /// k_B T / ħ in ps⁻¹.
    pub omega_t: f64,
    /// nm/ps
    pub sound_velocity: f64,
}

impl SpectralDensity {
    pub fn j(&self, omega: f64) -> f64 {
        if omega <= 0.0 {
            return 0.0;
        }
        self.alpha * omega.powi(3) * self.cutoff.eval(omega / self.omega_c)
    }

    /// Upper integration limit for frequency integrals.
    pub fn omega_max(&self) -> f64 {
        self.cutoff.extent() * self.omega_c
    }

    pub fn is_zero(&self) -> bool {
        self.alpha == 0.0
    }
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(path, format!("must be a finite positive number, got {v}")))
    }
}

impl BathSpec {
    /// Supplies the default parameter block for `kind` when none was given.
    pub fn resolved(mut self) -> Self {
        match self.kind {
            BathKind::Microscopic if self.microscopic.is_none() && self.parametric.is_none() => {
                self.microscopic = Some(MicroscopicParams::default());
            }
            BathKind::Microscopic => {}
            _ if self.parametric.is_none() && self.microscopic.is_none() => {
                self.parametric = Some(ParametricParams::default());
            }
            _ => {}
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        positive("bath.temperature", self.temperature)?;
        if !(self.coupling_scale.is_finite() && self.coupling_scale >= 0.0) {
            return Err(Error::config(
                "bath.coupling_scale",
                format!("must be finite and non-negative, got {}", self.coupling_scale),
            ));
        }
        match self.kind {
            BathKind::Microscopic => {
                let m = self.microscopic.as_ref().ok_or_else(|| {
                    Error::config("bath.microscopic", "required when kind = microscopic")
                })?;
                if self.parametric.is_some() {
                    return Err(Error::config(
                        "bath.parametric",
                        "not allowed when kind = microscopic",
                    ));
                }
                positive("bath.microscopic.sound_velocity", m.sound_velocity)?;
                positive("bath.microscopic.mass_density", m.mass_density)?;
                positive("bath.microscopic.deformation_potential", m.deformation_potential)?;
                positive("bath.microscopic.effective_mass", m.effective_mass)?;
                positive("bath.microscopic.confinement_energy", m.confinement_energy)?;
            }
            _ => {
                let p = self.parametric.as_ref().ok_or_else(|| {
                    Error::config("bath.parametric", "required for parametric bath kinds")
                })?;
                if self.microscopic.is_some() {
                    return Err(Error::config(
                        "bath.microscopic",
                        "only allowed when kind = microscopic",
                    ));
                }
                if !(p.alpha.is_finite() && p.alpha >= 0.0) {
                    return Err(Error::config(
                        "bath.parametric.alpha",
                        format!("must be finite and non-negative, got {}", p.alpha),
                    ));
                }
                positive("bath.parametric.cutoff_energy", p.cutoff_energy)?;
                positive("bath.parametric.sound_velocity", p.sound_velocity)?;
            }
        }
        Ok(())
    }

    /// Sound velocity in nm/ps.
    pub fn sound_velocity(&self) -> Result<f64> {
        self.validate()?;
        Ok(units::m_per_s_to_nm_per_ps(match self.kind {
            BathKind::Microscopic => self.microscopic.unwrap().sound_velocity,
            _ => self.parametric.unwrap().sound_velocity,
        }))
    }

    pub fn spectral_density(&self) -> Result<SpectralDensity> {
        self.validate()?;
        let scale2 = self.coupling_scale * self.coupling_scale;
        let omega_t = units::thermal_frequency(self.temperature);
        let sd = match self.kind {
            BathKind::Microscopic => {
                let m = self.microscopic.unwrap();
                let d = m.deformation_potential * JOULE_PER_EV;
                let c = m.sound_velocity;
                let omega_conf = m.confinement_energy * 1e-3 * JOULE_PER_EV / HBAR_SI;
                // SI: α in s², ω_c in s⁻¹.
                let alpha_si = d * d / (4.0 * PI * PI * m.mass_density * HBAR_SI * c.powi(5));
                let omega_c_si = (2.0 * m.effective_mass * omega_conf * c * c / HBAR_SI).sqrt();
                SpectralDensity {
                    alpha: alpha_si * 1e24 * scale2,
                    omega_c: omega_c_si * 1e-12,
                    cutoff: Cutoff::Gaussian,
                    omega_t,
                    sound_velocity: units::m_per_s_to_nm_per_ps(c),
                }
            }
            kind => {
                let p = self.parametric.unwrap();
                let omega_c = units::mev_to_per_ps(p.cutoff_energy);
                SpectralDensity {
                    alpha: p.alpha / (omega_c * omega_c) * scale2,
                    omega_c,
                    cutoff: match kind {
                        BathKind::ParametricSuperohmic => Cutoff::Gaussian,
                        BathKind::Gaussian => Cutoff::GaussianFormFactor,
                        _ => Cutoff::LorentzianFormFactor,
                    },
                    omega_t,
                    sound_velocity: units::m_per_s_to_nm_per_ps(p.sound_velocity),
                }
            }
        };
        Ok(sd)
    }
}

/// Mode coupling g(k) in ps⁻¹·nm^{3/2}, normalized so that
/// ∫ 4πk² g(k)² f(c_s k) dk = ∫ J(ω) f(ω) dω.
///
/// The microscopic kind is evaluated from the material constants directly
/// rather than through [`SpectralDensity`], so the two routes can be checked
/// against each other.
pub fn coupling_g(k: f64, spec: &BathSpec) -> Result<f64> {
    spec.validate()?;
    if !(k >= 0.0) {
        return Err(Error::Domain(format!("wavenumber must be non-negative, got {k}")));
    }
    if k == 0.0 {
        return Ok(0.0);
    }
    match spec.kind {
        BathKind::Microscopic => {
            let m = spec.microscopic.unwrap();
            let k_si = k * 1e9;
            let d = m.deformation_potential * JOULE_PER_EV;
            let omega_conf = m.confinement_energy * 1e-3 * JOULE_PER_EV / HBAR_SI;
            // Energy-valued coupling with (2π)⁻³ folded in, J·m^{3/2}.
            let g_energy = (HBAR_SI * k_si / (2.0 * m.mass_density * m.sound_velocity)).sqrt()
                * d
                * (-HBAR_SI * k_si * k_si / (4.0 * m.effective_mass * omega_conf)).exp()
                / (2.0 * PI).powf(1.5);
            // → s⁻¹·m^{3/2} → ps⁻¹·nm^{3/2}
            let g = g_energy / HBAR_SI * 1e-12 * 1e9f64.powf(1.5);
            Ok(g * spec.coupling_scale)
        }
        _ => {
            let sd = spec.spectral_density()?;
            let c = sd.sound_velocity;
            let omega = c * k;
            Ok((sd.j(omega) * c / (4.0 * PI * k * k)).sqrt())
        }
    }
}
