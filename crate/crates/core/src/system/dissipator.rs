use super::scheme::LevelScheme;
use crate::error::{Error, Result};
use crate::linalg::{zeros, CMat};
use crate::units;

/// γ Σ_L (2LρL† − L†Lρ − ρL†L) with unit-amplitude jump operators.
#[derive(Debug, Clone)]
pub struct Dissipator {
    /// ps⁻¹
    pub rate: f64,
    /// Each jump is a partial permutation Σ |row⟩⟨col|.
    pub jumps: Vec<Vec<(usize, usize)>>,
    /// Σ_L L†L
    pub loss: CMat,
}

impl Dissipator {
    /// Radiative decay of every excited level to its site's ground level.
    pub fn radiative(scheme: &LevelScheme, gamma_r_per_ns: f64) -> Result<Self> {
        if !(gamma_r_per_ns.is_finite() && gamma_r_per_ns >= 0.0) {
            return Err(Error::Domain(format!(
                "radiative rate must be non-negative, got {gamma_r_per_ns}"
            )));
        }
        let mut jumps = Vec::new();
        for l in 0..scheme.n_sites {
            for i in [2, 3] {
                jumps.push(scheme.site_transition_pairs(l, 1, i));
            }
        }
        let mut loss = zeros(scheme.dim);
        for jump in &jumps {
            for &(_, c) in jump {
                loss[(c, c)] += 1.0;
            }
        }
        Ok(Self {
            rate: units::per_ns_to_per_ps(gamma_r_per_ns),
            jumps,
            loss,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.rate == 0.0
    }

    /// out += 2γ Σ L ρ L†   (the L†L part is folded into effective Hamiltonians)
    pub fn jump_term_acc(&self, rho: &CMat, out: &mut CMat) {
        let w = 2.0 * self.rate;
        for jump in &self.jumps {
            for &(r1, c1) in jump {
                for &(r2, c2) in jump {
                    out[(r1, r2)] += rho[(c1, c2)] * w;
                }
            }
        }
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        let mut out = zeros(rho.nrows());
        self.jump_term_acc(rho, &mut out);
        let ll = self.loss.scale(self.rate);
        out - &ll * rho - rho * &ll
    }
}
