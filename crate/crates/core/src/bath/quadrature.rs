//! Frequency quadrature of the bath correlation function.
//!
//! With the radial measure absorbed into J(ω),
//! φ(τ) = ∫ J(ω)/ω² [coth(ω/2ω_T) cos ωτ − i sin ωτ] dω.

use num_complex::Complex64;

use super::spec::SpectralDensity;
use crate::error::{Error, Result};

/// Absolute tolerance on φ.
pub const PHI_TOL: f64 = 1e-8;

const MIN_PANELS: usize = 256;
const MAX_PANELS: usize = 1 << 22;

/// x·coth(x), finite at x = 0.
pub fn x_coth(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 + x * x / 3.0
    } else {
        x / x.tanh()
    }
}

/// Composite Simpson nodes on [0, ω_max] carrying the two even/odd weights of
/// the φ integrand: φ(τ) = Σ_j c_j cos(ω_j τ) − i s_j sin(ω_j τ).
#[derive(Debug, Clone)]
pub struct PhiRule {
    pub omega: Vec<f64>,
    pub cos_weight: Vec<f64>,
    pub sin_weight: Vec<f64>,
}

impl PhiRule {
    pub fn new(sd: &SpectralDensity, panels: usize) -> Self {
        let n = panels + (panels % 2);
        let h = sd.omega_max() / n as f64;
        let mut omega = Vec::with_capacity(n + 1);
        let mut cos_weight = Vec::with_capacity(n + 1);
        let mut sin_weight = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let w = i as f64 * h;
            let simpson = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            } * h
                / 3.0;
            // J/ω² = α ω F(ω/ω_c); ω·coth(ω/2ω_T) = 2ω_T · x coth x.
            let f = sd.alpha * sd.cutoff.eval(w / sd.omega_c);
            omega.push(w);
            cos_weight.push(simpson * f * 2.0 * sd.omega_t * x_coth(w / (2.0 * sd.omega_t)));
            sin_weight.push(simpson * f * w);
        }
        Self {
            omega,
            cos_weight,
            sin_weight,
        }
    }

    pub fn eval(&self, tau: f64) -> Complex64 {
        let mut re = 0.0;
        let mut im = 0.0;
        for ((&w, &c), &s) in self.omega.iter().zip(&self.cos_weight).zip(&self.sin_weight) {
            let (sn, cs) = (w * tau).sin_cos();
            re += c * cs;
            im -= s * sn;
        }
        Complex64::new(re, im)
    }

    /// φ on the uniform grid τ_n = n·Δτ, using a phase recurrence per node.
    pub fn eval_grid(&self, dtau: f64, n_tau: usize) -> Vec<Complex64> {
        const RESYNC: usize = 64;
        let mut re = vec![0.0; n_tau];
        let mut im = vec![0.0; n_tau];
        for ((&w, &c), &s) in self.omega.iter().zip(&self.cos_weight).zip(&self.sin_weight) {
            let step = Complex64::from_polar(1.0, w * dtau);
            let mut z = Complex64::new(1.0, 0.0);
            for n in 0..n_tau {
                if n % RESYNC == 0 {
                    z = Complex64::from_polar(1.0, w * dtau * n as f64);
                }
                re[n] += c * z.re;
                im[n] -= s * z.im;
                z *= step;
            }
        }
        re.into_iter()
            .zip(im)
            .map(|(r, i)| Complex64::new(r, i))
            .collect()
    }
}

/// Doubles the panel count until the Richardson estimate |S_2n − S_n|/15 at
/// every probe time is below `tol`; returns the converged rule.
pub fn converged_rule(sd: &SpectralDensity, probes: &[f64], tol: f64) -> Result<PhiRule> {
    let mut panels = MIN_PANELS;
    let mut coarse = PhiRule::new(sd, panels);
    let mut worst = f64::INFINITY;
    while panels < MAX_PANELS {
        panels *= 2;
        let fine = PhiRule::new(sd, panels);
        worst = probes
            .iter()
            .map(|&t| (fine.eval(t) - coarse.eval(t)).norm() / 15.0)
            .fold(0.0, f64::max);
        if worst < tol {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::Quadrature(format!(
        "phi quadrature error estimate {worst:.3e} above tolerance {tol:.1e} with {panels} panels"
    )))
}

/// Bath correlation function φ(τ) in the continuum limit.
pub fn phi_from_density(tau: f64, sd: &SpectralDensity) -> Result<Complex64> {
    if sd.is_zero() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(converged_rule(sd, &[tau], PHI_TOL)?.eval(tau))
}

/// Polaron shift ∫ J(ω)/ω dω in ps⁻¹.
pub fn polaron_shift_from_density(sd: &SpectralDensity) -> Result<f64> {
    if sd.is_zero() {
        return Ok(0.0);
    }
    let integrand = |w: f64| sd.alpha * w * w * sd.cutoff.eval(w / sd.omega_c);
    let simpson = |n: usize| {
        let h = sd.omega_max() / n as f64;
        let mut acc = integrand(0.0) + integrand(n as f64 * h);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * integrand(i as f64 * h);
        }
        acc * h / 3.0
    };
    let mut n = MIN_PANELS;
    let mut coarse = simpson(n);
    while n < MAX_PANELS {
        n *= 2;
        let fine = simpson(n);
        if (fine - coarse).abs() / 15.0 < PHI_TOL {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(Error::Quadrature("polaron shift quadrature did not converge".into()))
}
