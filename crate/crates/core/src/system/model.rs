use serde::{Deserialize, Serialize};

use super::dissipator::Dissipator;
use super::scheme::{LevelScheme, SchemeKind};
use crate::error::{Error, Result};
use crate::linalg::{hermiticity_error, zeros, CMat, I, ONE};

/// Continuous-wave drive in the laser rotating frame, all in ps⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    pub rabi: f64,
    pub detuning2: f64,
    pub detuning3: f64,
}

impl DriveSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rabi.is_finite() && self.rabi >= 0.0) {
            return Err(Error::config("drive.rabi", "must be finite and non-negative"));
        }
        if !self.detuning2.is_finite() || !self.detuning3.is_finite() {
            return Err(Error::config("drive", "detunings must be finite"));
        }
        Ok(())
    }
}

/// Polaron renormalization applied to the coherent part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolaronDressing {
    /// B, multiplies the Rabi frequency.
    pub factor: f64,
    /// Subtracted from both excited-state detunings, ps⁻¹.
    pub shift: f64,
}

impl PolaronDressing {
    pub fn bare() -> Self {
        Self {
            factor: 1.0,
            shift: 0.0,
        }
    }
}

/// Phonon coupling operators of one excited level on one site.
#[derive(Debug, Clone)]
pub struct SiteCoupling {
    pub site: usize,
    pub level: usize,
    /// σ_1i + σ_i1
    pub x_plus: CMat,
    /// i(σ_i1 − σ_1i)
    pub x_minus: CMat,
}

#[derive(Debug, Clone)]
pub struct SystemModel {
    pub scheme: LevelScheme,
    pub drive: DriveSpec,
    pub dressing: PolaronDressing,
    /// Polaron-frame Hamiltonian in ps⁻¹.
    pub h0: CMat,
    pub x_ops: Vec<SiteCoupling>,
    pub dexter_f: f64,
    pub decay: Option<Dissipator>,
}

impl SystemModel {
    /// Ω̄ = B·Ω
    pub fn rabi_bar(&self) -> f64 {
        self.dressing.factor * self.drive.rabi
    }

    pub fn with_decay(mut self, gamma_r_per_ns: f64) -> Result<Self> {
        let d = Dissipator::radiative(&self.scheme, gamma_r_per_ns)?;
        self.decay = if d.is_zero() { None } else { Some(d) };
        Ok(self)
    }

    /// Summed coupling operators S_s^l = Σ_i X_{s,i}^{[l]} per site: (S₊, S₋).
    pub fn site_sums(&self) -> Vec<(CMat, CMat)> {
        (0..self.scheme.n_sites)
            .map(|l| {
                let mut sp = zeros(self.scheme.dim);
                let mut sm = zeros(self.scheme.dim);
                for x in self.x_ops.iter().filter(|x| x.site == l) {
                    sp += &x.x_plus;
                    sm += &x.x_minus;
                }
                (sp, sm)
            })
            .collect()
    }
}

fn site_block(scheme: &LevelScheme, drive: &DriveSpec, dressing: &PolaronDressing) -> CMat {
    let mut h = zeros(scheme.dim);
    let rabi = dressing.factor * drive.rabi;
    let detunings = [drive.detuning2 - dressing.shift, drive.detuning3 - dressing.shift];
    for l in 0..scheme.n_sites {
        for (k, &det) in detunings.iter().enumerate() {
            let i = k + 2;
            h += scheme.site_operator(l, i, i).scale(det);
            let s1i = scheme.site_operator(l, 1, i);
            h += (&s1i + s1i.transpose()).scale(rabi);
        }
    }
    h
}

fn couplings(scheme: &LevelScheme) -> Vec<SiteCoupling> {
    let mut out = Vec::new();
    for site in 0..scheme.n_sites {
        for level in [2, 3] {
            let s1i = scheme.site_operator(site, 1, level);
            let si1 = s1i.transpose();
            out.push(SiteCoupling {
                site,
                level,
                x_plus: &s1i + &si1,
                x_minus: (si1 - s1i) * I,
            });
        }
    }
    out
}

fn assemble(
    scheme: LevelScheme,
    drive: DriveSpec,
    dressing: PolaronDressing,
    dexter_f: f64,
    transfer: CMat,
) -> SystemModel {
    let h0 = site_block(&scheme, &drive, &dressing) + transfer;
    debug_assert!(hermiticity_error(&h0) < 1e-12);
    SystemModel {
        x_ops: couplings(&scheme),
        scheme,
        drive,
        dressing,
        h0,
        dexter_f,
        decay: None,
    }
}

pub fn build_single(drive: DriveSpec, dressing: PolaronDressing) -> SystemModel {
    let scheme = LevelScheme::new(SchemeKind::Single, 1);
    let transfer = zeros(scheme.dim);
    assemble(scheme, drive, dressing, 0.0, transfer)
}

fn check_chain(n_sites: usize, f: f64) -> Result<()> {
    if n_sites < 2 {
        return Err(Error::config("chain.n_sites", "chains need at least two sites"));
    }
    if !f.is_finite() {
        return Err(Error::config("chain.f", "must be finite"));
    }
    Ok(())
}

/// Symmetric hopping between one-electron basis pairs of adjacent sites.
fn dexter_transfer(scheme: &LevelScheme, f: f64, pairs: &[(usize, usize)]) -> CMat {
    let mut h = zeros(scheme.dim);
    for l in 0..scheme.n_sites - 1 {
        for &(a, b) in pairs {
            let i = scheme.index(l, a).unwrap();
            let j = scheme.index(l + 1, b).unwrap();
            h[(i, j)] += ONE * f;
            h[(j, i)] += ONE * f;
        }
    }
    h
}

/// Hopping from the detuned level |3⟩ of each site into |2⟩ of the next.
pub fn build_dexter_single_chain(
    n_sites: usize,
    drive: DriveSpec,
    f: f64,
    dressing: PolaronDressing,
) -> Result<SystemModel> {
    check_chain(n_sites, f)?;
    let scheme = LevelScheme::new(SchemeKind::DexterSingle, n_sites);
    let t = dexter_transfer(&scheme, f, &[(3, 2)]);
    Ok(assemble(scheme, drive, dressing, f, t))
}

/// Hopping between every pair of excited levels of adjacent sites.
pub fn build_dexter_all_chain(
    n_sites: usize,
    drive: DriveSpec,
    f: f64,
    dressing: PolaronDressing,
) -> Result<SystemModel> {
    check_chain(n_sites, f)?;
    let scheme = LevelScheme::new(SchemeKind::DexterAll, n_sites);
    let t = dexter_transfer(&scheme, f, &[(2, 2), (2, 3), (3, 2), (3, 3)]);
    Ok(assemble(scheme, drive, dressing, f, t))
}

/// Largest Förster chain built without an explicit override.
pub const FOERSTER_MAX_SITES: usize = 2;

/// Excitation transfer (3, 0) ↔ (0, 2) between adjacent sites via the
/// reservoir level |0⟩.
pub fn build_foerster_chain(
    n_sites: usize,
    drive: DriveSpec,
    f: f64,
    dressing: PolaronDressing,
    allow_large: bool,
) -> Result<SystemModel> {
    check_chain(n_sites, f)?;
    if n_sites > FOERSTER_MAX_SITES && !allow_large {
        return Err(Error::config(
            "chain.n_sites",
            format!(
                "Förster chains with more than {FOERSTER_MAX_SITES} sites grow as 4^N; \
                 set chain.allow_large_foerster to enable"
            ),
        ));
    }
    let scheme = LevelScheme::new(SchemeKind::Foerster, n_sites);
    let mut t = zeros(scheme.dim);
    for l in 0..n_sites - 1 {
        let hop = scheme.site_operator(l, 0, 3) * scheme.site_operator(l + 1, 2, 0);
        t += (&hop + hop.adjoint()).scale(f);
    }
    Ok(assemble(scheme, drive, dressing, f, t))
}
