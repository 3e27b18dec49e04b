use num_complex::Complex64;
use serde::Serialize;

use super::evolve::{rk4, validate_run, HeisenbergRun};
use super::rhs::{HeisenbergOptions, HeisenbergSystem};
use super::state::{HeisenbergState, M3};
use crate::bath::{CorrelationTables, KGrid};
use crate::error::{Error, Result};
use crate::system::{build_single, DriveSpec, PolaronDressing};

#[derive(Debug, Clone, Serialize)]
pub struct Spectrum {
    /// ps⁻¹, rotating frame
    pub omega: Vec<f64>,
    pub alpha: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct SpectrumConfig {
    /// Initial coherence amplitude.
    pub epsilon: f64,
    pub t_end: f64,
    pub dt: f64,
    /// Points on the symmetric ω-grid (made odd so ω = 0 is a node).
    pub n_omega: usize,
    pub omega_max: f64,
    /// Apply the half-Hann taper cos²(πt/2T).
    pub window: bool,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            t_end: 100.0,
            dt: 0.005,
            n_omega: 1601,
            omega_max: 4.0,
            window: true,
        }
    }
}

pub fn omega_grid(n_omega: usize, omega_max: f64) -> Vec<f64> {
    let n = n_omega.max(3) | 1;
    let half = (n / 2) as f64;
    (0..n).map(|i| omega_max * (i as f64 - half) / half).collect()
}

fn hann(t: f64, t_end: f64) -> f64 {
    let c = (std::f64::consts::FRAC_PI_2 * t / t_end).cos();
    c * c
}

/// Trapezoid Fourier sum F(ω) = ∫₀^T w(t) p(t) e^{iωt} dt on a uniform grid.
pub fn fourier(p: &[Complex64], dt: f64, omega: &[f64], window: bool) -> Vec<Complex64> {
    let t_end = dt * (p.len() - 1) as f64;
    let weights: Vec<f64> = (0..p.len())
        .map(|n| {
            let end = if n == 0 || n + 1 == p.len() { 0.5 } else { 1.0 };
            let w = if window { hann(n as f64 * dt, t_end) } else { 1.0 };
            end * w * dt
        })
        .collect();
    omega
        .iter()
        .map(|&w| {
            let step = Complex64::from_polar(1.0, w * dt);
            let mut z = Complex64::new(1.0, 0.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for (n, (&pn, &wn)) in p.iter().zip(&weights).enumerate() {
                if n % 64 == 0 {
                    z = Complex64::from_polar(1.0, w * dt * n as f64);
                }
                acc += pn * z * wn;
                z *= step;
            }
            acc
        })
        .collect()
}

/// Linear absorption α(ω) ∝ Im[σ₁₂(ω) + σ₁₃(ω)] from the free polarization
/// decay after an impulsive kick σ₁₂ = σ₁₃ = iε (no drive during evolution).
pub fn absorption_spectrum(
    drive: &DriveSpec,
    kgrid: &KGrid,
    cfg: &SpectrumConfig,
    options: &HeisenbergOptions,
) -> Result<Spectrum> {
    if !(cfg.epsilon > 0.0 && cfg.epsilon < 0.1) {
        return Err(Error::config("spectrum.epsilon", "must lie in (0, 0.1)"));
    }
    let run = HeisenbergRun {
        t_end: cfg.t_end,
        dt: cfg.dt,
        sample_every: 1,
        horizon: f64::INFINITY,
    };
    validate_run(kgrid, &run)?;
    let free = DriveSpec { rabi: 0.0, ..*drive };
    let model = build_single(free, PolaronDressing::bare());
    let sys = HeisenbergSystem::new(&model, kgrid, options)?;

    let kick = Complex64::new(0.0, cfg.epsilon);
    let mut s = M3::zeros();
    s[(0, 0)] = Complex64::new(1.0 - 2.0 * cfg.epsilon * cfg.epsilon, 0.0);
    s[(1, 1)] = Complex64::new(cfg.epsilon * cfg.epsilon, 0.0);
    s[(2, 2)] = Complex64::new(cfg.epsilon * cfg.epsilon, 0.0);
    s[(0, 1)] = kick;
    s[(0, 2)] = kick;
    s[(1, 0)] = kick.conj();
    s[(2, 0)] = kick.conj();
    s[(1, 2)] = Complex64::new(cfg.epsilon * cfg.epsilon, 0.0);
    s[(2, 1)] = Complex64::new(cfg.epsilon * cfg.epsilon, 0.0);
    let mut y = HeisenbergState::factorized(s, kgrid.len());

    let n_steps = (cfg.t_end / cfg.dt).round() as usize;
    let mut p = Vec::with_capacity(n_steps + 1);
    p.push((y.sigma[(0, 1)] + y.sigma[(0, 2)]) / cfg.epsilon);
    for _ in 0..n_steps {
        y = rk4(&sys, &y, cfg.dt)?;
        let v = (y.sigma[(0, 1)] + y.sigma[(0, 2)]) / cfg.epsilon;
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Numerical(format!("polarization diverged at t = {:.3} ps", y.t)));
        }
        p.push(v);
    }
    let omega = omega_grid(cfg.n_omega, cfg.omega_max);
    let alpha = fourier(&p, cfg.dt, &omega, cfg.window)
        .into_iter()
        .map(|z| z.im)
        .collect();
    Ok(Spectrum { omega, alpha })
}

/// Independent-boson lineshape Re ∫₀^T e^{iωt} exp[φ(t) − φ(0)] w(t) dt on the
/// tables' τ-grid.
pub fn ibm_reference_spectrum(tables: &CorrelationTables, omega: &[f64], window: bool) -> Spectrum {
    let phi0 = tables.phi[0];
    let p: Vec<Complex64> = tables.phi.iter().map(|&f| (f - phi0).exp()).collect();
    let alpha = fourier(&p, tables.dtau, omega, window)
        .into_iter()
        .map(|z| z.re)
        .collect();
    Spectrum {
        omega: omega.to_vec(),
        alpha,
    }
}

/// Indices of local maxima higher than `rel_height` times the global maximum.
pub fn significant_maxima(alpha: &[f64], rel_height: f64) -> Vec<usize> {
    let top = alpha.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (1..alpha.len().saturating_sub(1))
        .filter(|&i| alpha[i] > alpha[i - 1] && alpha[i] >= alpha[i + 1] && alpha[i] >= rel_height * top)
        .collect()
}
