use nalgebra::Matrix3;
use num_complex::Complex64;

pub type M3 = Matrix3<Complex64>;

/// Electronic expectation values ⟨σ_mn⟩ plus the phonon-assisted amplitudes
/// ⟨σ_mn r_j⟩ and ⟨σ_mn r_j†⟩ for every k-node j.
#[derive(Debug, Clone, PartialEq)]
pub struct HeisenbergState {
    pub sigma: M3,
    pub sigma_r: Vec<M3>,
    pub sigma_rdag: Vec<M3>,
    pub t: f64,
}

impl HeisenbergState {
    /// Factorized initial condition: no phonon-assisted correlations.
    pub fn factorized(sigma: M3, n_k: usize) -> Self {
        Self {
            sigma,
            sigma_r: vec![M3::zeros(); n_k],
            sigma_rdag: vec![M3::zeros(); n_k],
            t: 0.0,
        }
    }

    /// Electron in the ground state |1⟩.
    pub fn ground(n_k: usize) -> Self {
        let mut s = M3::zeros();
        s[(0, 0)] = Complex64::new(1.0, 0.0);
        Self::factorized(s, n_k)
    }

    pub fn zeros_like(&self) -> Self {
        Self::factorized(M3::zeros(), self.sigma_r.len())
    }

    /// self + h·d
    pub fn axpy(&self, h: f64, d: &Self) -> Self {
        Self {
            sigma: self.sigma + d.sigma * Complex64::from(h),
            sigma_r: self
                .sigma_r
                .iter()
                .zip(&d.sigma_r)
                .map(|(a, b)| a + b * Complex64::from(h))
                .collect(),
            sigma_rdag: self
                .sigma_rdag
                .iter()
                .zip(&d.sigma_rdag)
                .map(|(a, b)| a + b * Complex64::from(h))
                .collect(),
            t: self.t + h,
        }
    }

    pub fn trace_error(&self) -> f64 {
        (self.sigma.trace() - 1.0).norm()
    }

    pub fn max_imag_population(&self) -> f64 {
        (0..3).map(|i| self.sigma[(i, i)].im.abs()).fold(0.0, f64::max)
    }

    /// max |⟨σ_mn⟩ − conj⟨σ_nm⟩|
    pub fn sigma_pairing_error(&self) -> f64 {
        (self.sigma - self.sigma.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max |⟨σ_mn r⟩ − conj⟨σ_nm r†⟩| over all nodes
    pub fn amplitude_pairing_error(&self) -> f64 {
        self.sigma_r
            .iter()
            .zip(&self.sigma_rdag)
            .flat_map(|(a, b)| (a - b.adjoint()).iter().map(|z| z.norm()).collect::<Vec<_>>())
            .fold(0.0, f64::max)
    }

    /// Density matrix ρ = Sᵀ, since ⟨σ_mn⟩ = ρ_nm.
    pub fn density_matrix(&self) -> M3 {
        self.sigma.transpose()
    }
}
