use num_complex::Complex64;
use rayon::prelude::*;

use super::state::{HeisenbergState, M3};
use crate::bath::KGrid;
use crate::error::{Error, Result};
use crate::system::SystemModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeisenbergOptions {
    /// Intraband coupling as a fraction of the interband coupling.
    pub intraband_ratio: f64,
    /// Freeze ⟨σ₂₃⟩, ⟨σ₃₂⟩ and their phonon-assisted partners at zero.
    pub ablate_sigma23: bool,
}

impl Default for HeisenbergOptions {
    fn default() -> Self {
        Self {
            intraband_ratio: 0.0,
            ablate_sigma23: false,
        }
    }
}

/// Static inputs of the equations of motion.
#[derive(Debug, Clone)]
pub struct HeisenbergSystem {
    /// Bare electronic Hamiltonian in the rotating frame, ps⁻¹.
    pub h: M3,
    /// Phonon coupling operator: diag(0,1,1) + intraband·(σ₂₃ + σ₃₂).
    pub c: M3,
    pub g: Vec<f64>,
    pub omega: Vec<f64>,
    pub n: Vec<f64>,
    pub ablate_sigma23: bool,
}

const CHUNK: usize = 64;

impl HeisenbergSystem {
    pub fn new(model: &SystemModel, kgrid: &KGrid, options: &HeisenbergOptions) -> Result<Self> {
        if model.scheme.dim != 3 {
            return Err(Error::config(
                "scenario",
                format!(
                    "the Heisenberg engine handles a single emitter (dim 3), got dim {}",
                    model.scheme.dim
                ),
            ));
        }
        if !options.intraband_ratio.is_finite() {
            return Err(Error::config("flags.intraband_ratio", "must be finite"));
        }
        let h = M3::from_fn(|i, j| model.h0[(i, j)]);
        let mut c = M3::zeros();
        c[(1, 1)] = Complex64::from(1.0);
        c[(2, 2)] = Complex64::from(1.0);
        c[(1, 2)] = Complex64::from(options.intraband_ratio);
        c[(2, 1)] = Complex64::from(options.intraband_ratio);
        Ok(Self {
            h,
            c,
            g: kgrid.effective_couplings.clone(),
            omega: kgrid.frequencies.clone(),
            n: kgrid.occupations.clone(),
            ablate_sigma23: options.ablate_sigma23,
        })
    }

    pub fn n_k(&self) -> usize {
        self.g.len()
    }

    fn ablate(&self, m: &mut M3) {
        if self.ablate_sigma23 {
            m[(1, 2)] = Complex64::from(0.0);
            m[(2, 1)] = Complex64::from(0.0);
        }
    }

    /// Time derivative of every expectation value.
    pub fn rhs(&self, state: &HeisenbergState) -> Result<HeisenbergState> {
        let nk = self.n_k();
        if state.sigma_r.len() != nk || state.sigma_rdag.len() != nk {
            return Err(Error::config(
                "numerics.n_k",
                format!("state carries {} modes, k-grid has {nk}", state.sigma_r.len()),
            ));
        }
        let i = Complex64::i();
        let h = &self.h;
        let s = &state.sigma;
        let cs = self.c * s;
        let sc = s * self.c;

        let node = |j: usize| -> (M3, M3) {
            let (g, w, n) = (self.g[j], self.omega[j], self.n[j]);
            let a = &state.sigma_r[j];
            let b = &state.sigma_rdag[j];
            let mut da = (h * a - a * h - a * Complex64::from(w)
                + (cs * Complex64::from(n) - sc * Complex64::from(n + 1.0)) * Complex64::from(g))
                * i;
            let mut db = (h * b - b * h + b * Complex64::from(w)
                + (cs * Complex64::from(n + 1.0) - sc * Complex64::from(n)) * Complex64::from(g))
                * i;
            self.ablate(&mut da);
            self.ablate(&mut db);
            (da, db)
        };
        let pairs: Vec<(M3, M3)> = (0..nk)
            .into_par_iter()
            .with_min_len(CHUNK)
            .map(node)
            .collect();

        // Fixed-order reduction keeps results independent of scheduling.
        let mut x = M3::zeros();
        for j in 0..nk {
            x += (state.sigma_r[j] + state.sigma_rdag[j]) * Complex64::from(self.g[j]);
        }
        let mut ds = (h * s - s * h + self.c * x - x * self.c) * i;
        self.ablate(&mut ds);
        let (sigma_r, sigma_rdag) = pairs.into_iter().unzip();
        Ok(HeisenbergState {
            sigma: ds,
            sigma_r,
            sigma_rdag,
            t: 1.0,
        })
    }
}

/// Derivative of a Heisenberg state.
pub fn rhs(
    state: &HeisenbergState,
    model: &SystemModel,
    kgrid: &KGrid,
    options: &HeisenbergOptions,
) -> Result<HeisenbergState> {
    HeisenbergSystem::new(model, kgrid, options)?.rhs(state)
}
