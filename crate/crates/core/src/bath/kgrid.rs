use std::f64::consts::PI;

use serde::Serialize;

use super::spec::BathSpec;
use super::{coupling_g, thermal_occupation};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Relative size of g at the end of the k-range.
const TAIL_RATIO: f64 = 1e-6;
/// Tail condition enforced on the returned nodes.
const TAIL_CHECK: f64 = 1e-4;

/// Midpoint discretization of the radial phonon mode integral.
#[derive(Debug, Clone, Serialize)]
pub struct KGrid {
    /// nm⁻¹
    pub nodes: Vec<f64>,
    pub dk: f64,
    /// g(k_j)·sqrt(4π k_j² Δk), ps⁻¹
    pub effective_couplings: Vec<f64>,
    /// ω_j = c_s k_j, ps⁻¹
    pub frequencies: Vec<f64>,
    pub occupations: Vec<f64>,
}

impl KGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn omega_max(&self) -> f64 {
        self.frequencies.last().copied().unwrap_or(0.0)
    }

    /// Discrete-mode version of φ(τ).
    pub fn phi(&self, tau: f64) -> Complex64 {
        self.effective_couplings
            .iter()
            .zip(&self.frequencies)
            .zip(&self.occupations)
            .map(|((&g, &w), &n)| {
                let a = (g / w).powi(2);
                let (s, c) = (w * tau).sin_cos();
                Complex64::new(a * (2.0 * n + 1.0) * c, -a * s)
            })
            .sum()
    }
}

/// Range [0, k_max] such that g has dropped below TAIL_RATIO of its peak.
fn k_range(spec: &BathSpec) -> Result<f64> {
    let sd = spec.spectral_density()?;
    let kc = sd.omega_c / sd.sound_velocity;
    let scan_max = 64.0 * kc;
    let samples = 8192;
    let gs: Vec<f64> = (1..=samples)
        .map(|i| coupling_g(scan_max * i as f64 / samples as f64, spec))
        .collect::<Result<_>>()?;
    let (peak_idx, peak) = gs
        .iter()
        .enumerate()
        .fold((0, 0.0), |acc, (i, &g)| if g > acc.1 { (i, g) } else { acc });
    if peak == 0.0 {
        // Zero coupling: any range works, keep the natural scale.
        return Ok(8.0 * kc);
    }
    gs.iter()
        .enumerate()
        .skip(peak_idx)
        .find(|(_, &g)| g < TAIL_RATIO * peak)
        .map(|(i, _)| scan_max * (i + 1) as f64 / samples as f64)
        .ok_or_else(|| Error::config("bath", "coupling has no decaying form factor"))
}

pub fn build_kgrid(spec: &BathSpec, n_k: usize) -> Result<KGrid> {
    if n_k < 8 {
        return Err(Error::config("numerics.n_k", "must be at least 8"));
    }
    let k_max = k_range(spec)?;
    let c = spec.sound_velocity()?;
    let dk = k_max / n_k as f64;
    let nodes: Vec<f64> = (0..n_k).map(|j| (j as f64 + 0.5) * dk).collect();
    let g: Vec<f64> = nodes
        .iter()
        .map(|&k| coupling_g(k, spec))
        .collect::<Result<_>>()?;
    let g_peak = g.iter().copied().fold(0.0, f64::max);
    if g_peak > 0.0 && g[n_k - 1] >= TAIL_CHECK * g_peak {
        return Err(Error::config(
            "numerics.n_k",
            format!(
                "k-grid tail condition fails (g(k_max)/max g = {:.2e}); increase n_k",
                g[n_k - 1] / g_peak
            ),
        ));
    }
    let frequencies: Vec<f64> = nodes.iter().map(|&k| c * k).collect();
    let occupations = frequencies
        .iter()
        .map(|&w| thermal_occupation(w, spec.temperature))
        .collect::<Result<_>>()?;
    let effective_couplings = nodes
        .iter()
        .zip(&g)
        .map(|(&k, &gk)| gk * (4.0 * PI * k * k * dk).sqrt())
        .collect();
    Ok(KGrid {
        nodes,
        dk,
        effective_couplings,
        frequencies,
        occupations,
    })
}
