use num_complex::Complex64;

use super::quadrature::{converged_rule, polaron_shift_from_density, PHI_TOL};
use super::spec::BathSpec;
use crate::error::{Error, Result};

/// φ(τ), G±(τ) and the polaron renormalization on a uniform τ-grid.
#[derive(Debug, Clone)]
pub struct CorrelationTables {
    pub dtau: f64,
    pub tau: Vec<f64>,
    pub phi: Vec<Complex64>,
    pub g_plus: Vec<Complex64>,
    pub g_minus: Vec<Complex64>,
    /// B = exp(−φ(0)/2)
    pub polaron_factor: f64,
    /// ∫ J(ω)/ω dω, ps⁻¹
    pub polaron_shift: f64,
    pub kernel_tol: f64,
    /// Kernels are treated as zero beyond this node.
    pub memory_cutoff_index: usize,
    /// Set when the kernels never dropped below `kernel_tol` on the grid.
    pub cutoff_clamped: bool,
}

/// cosh φ − 1 without cancellation for small φ.
fn cosh_m1(z: Complex64) -> Complex64 {
    let s = (z * 0.5).sinh();
    s * s * 2.0
}

impl CorrelationTables {
    /// Builds tables from sampled φ values on τ_n = n·dtau.
    pub fn from_phi(dtau: f64, phi: Vec<Complex64>, polaron_shift: f64, kernel_tol: f64) -> Result<Self> {
        if phi.len() < 2 || !(dtau > 0.0) {
            return Err(Error::config(
                "numerics.n_tau",
                "a correlation table needs at least two nodes and a positive spacing",
            ));
        }
        let tau: Vec<f64> = (0..phi.len()).map(|n| n as f64 * dtau).collect();
        let g_plus: Vec<Complex64> = phi.iter().map(|&p| cosh_m1(p)).collect();
        let g_minus: Vec<Complex64> = phi.iter().map(|&p| p.sinh()).collect();
        let last_above = g_plus
            .iter()
            .zip(&g_minus)
            .rposition(|(a, b)| a.norm() >= kernel_tol || b.norm() >= kernel_tol);
        let (memory_cutoff_index, cutoff_clamped) = match last_above {
            None => (0, false),
            Some(m) if m + 1 >= phi.len() => (phi.len() - 1, true),
            Some(m) => (m + 1, false),
        };
        if cutoff_clamped {
            log::warn!(
                "bath kernels exceed {kernel_tol:.1e} at tau_max = {:.3} ps; memory is truncated there",
                tau[tau.len() - 1]
            );
        }
        Ok(Self {
            dtau,
            tau,
            polaron_factor: (-phi[0].re / 2.0).exp(),
            phi,
            g_plus,
            g_minus,
            polaron_shift,
            kernel_tol,
            memory_cutoff_index,
            cutoff_clamped,
        })
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn tau_max(&self) -> f64 {
        self.tau[self.tau.len() - 1]
    }

    /// Largest |(G₊+1)² − G₋² − 1| over the grid.
    pub fn hyperbolic_defect(&self) -> f64 {
        self.g_plus
            .iter()
            .zip(&self.g_minus)
            .map(|(&gp, &gm)| ((gp + 1.0) * (gp + 1.0) - gm * gm - 1.0).norm())
            .fold(0.0, f64::max)
    }
}

pub fn build_correlation_tables(
    spec: &BathSpec,
    tau_max: f64,
    n_tau: usize,
    kernel_tol: f64,
) -> Result<CorrelationTables> {
    if !(tau_max > 0.0) || !tau_max.is_finite() {
        return Err(Error::config("numerics.tau_max", "must be positive"));
    }
    if n_tau < 2 {
        return Err(Error::config("numerics.n_tau", "must be at least 2"));
    }
    if !(kernel_tol > 0.0) {
        return Err(Error::config("numerics.kernel_tol", "must be positive"));
    }
    let sd = spec.spectral_density()?;
    let dtau = tau_max / (n_tau - 1) as f64;
    let phi = if sd.is_zero() {
        vec![Complex64::new(0.0, 0.0); n_tau]
    } else {
        let rule = converged_rule(&sd, &[0.0, 0.37 * tau_max, tau_max], PHI_TOL)?;
        rule.eval_grid(dtau, n_tau)
    };
    let shift = polaron_shift_from_density(&sd)?;
    CorrelationTables::from_phi(dtau, phi, shift, kernel_tol)
}
