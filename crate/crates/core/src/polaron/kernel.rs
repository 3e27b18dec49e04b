use num_complex::Complex64;

use crate::bath::CorrelationTables;
use crate::error::{Error, Result};
use crate::linalg::{zeros, CMat, HermitianEigen, SparseOp};
use crate::system::SystemModel;

/// One bath channel: the summed coupling operator S of a site (or of the
/// whole chain when bath correlations are not site-diagonal) for one sign.
#[derive(Debug, Clone)]
struct Channel {
    /// 0 for G₊, 1 for G₋.
    sign: usize,
    s: SparseOp,
    s_dense: CMat,
    /// S in the eigenbasis of h0.
    s_eig: CMat,
}

/// Memory-kernel data for the polaron master equation.
///
/// For every eigen-pair (a, b) of h0 the cache stores the running integral
/// I_s,ab(t) = ∫₀ᵗ G_s(τ) e^{−i(E_a−E_b)τ} dτ on the τ-grid, so the
/// convolution Λ(t) = ∫₀ᵗ G_s(τ) S(−τ) dτ becomes an element-wise product
/// with S in the eigenbasis.
#[derive(Debug, Clone)]
pub struct KernelCache {
    pub dtau: f64,
    /// Nodes kept: memory_cutoff_index + 1.
    pub n_nodes: usize,
    pub eigen: HermitianEigen,
    pub site_diagonal: bool,
    rabi_bar2: f64,
    channels: Vec<Channel>,
    /// cumulative[s][n]
    cumulative: [Vec<CMat>; 2],
    g: [Vec<Complex64>; 2],
}

impl KernelCache {
    pub fn new(model: &SystemModel, tables: &CorrelationTables, site_diagonal: bool) -> Result<Self> {
        let dim = model.scheme.dim;
        if model.h0.nrows() != dim {
            return Err(Error::config("system", "Hamiltonian dimension does not match the level scheme"));
        }
        let eigen = HermitianEigen::new(&model.h0)?;
        let v = &eigen.vectors;
        let vh = v.adjoint();

        let sums = model.site_sums();
        let groups: Vec<(CMat, CMat)> = if site_diagonal {
            sums
        } else {
            let mut p = zeros(dim);
            let mut m = zeros(dim);
            for (sp, sm) in &sums {
                p += sp;
                m += sm;
            }
            vec![(p, m)]
        };
        let mut channels = Vec::new();
        for (sp, sm) in groups {
            for (sign, s) in [(0, sp), (1, sm)] {
                channels.push(Channel {
                    sign,
                    s: SparseOp::from_dense(&s),
                    s_eig: &vh * &s * v,
                    s_dense: s,
                });
            }
        }

        let n_nodes = (tables.memory_cutoff_index + 1).min(tables.len());
        let g = [
            tables.g_plus[..n_nodes].to_vec(),
            tables.g_minus[..n_nodes].to_vec(),
        ];
        let e = &eigen.values;
        let dtau = tables.dtau;
        let mut cumulative: [Vec<CMat>; 2] = [Vec::with_capacity(n_nodes), Vec::with_capacity(n_nodes)];
        for s in 0..2 {
            let integrand = |n: usize, a: usize, b: usize| {
                g[s][n] * Complex64::from_polar(1.0, -(e[a] - e[b]) * n as f64 * dtau)
            };
            let mut acc = zeros(dim);
            cumulative[s].push(acc.clone());
            for n in 1..n_nodes {
                for a in 0..dim {
                    for b in 0..dim {
                        acc[(a, b)] += (integrand(n - 1, a, b) + integrand(n, a, b)) * (0.5 * dtau);
                    }
                }
                cumulative[s].push(acc.clone());
            }
        }
        Ok(Self {
            dtau,
            n_nodes,
            site_diagonal,
            rabi_bar2: model.rabi_bar().powi(2),
            eigen,
            channels,
            cumulative,
            g,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigen.values.len()
    }

    /// Time after which the generator no longer changes.
    pub fn saturation_time(&self) -> f64 {
        (self.n_nodes - 1) as f64 * self.dtau
    }

    /// X(−τ) = e^{−iHτ} X e^{iHτ}.
    pub fn x_minus_tau(&self, x: &CMat, tau: f64) -> CMat {
        let v = &self.eigen.vectors;
        let mut xe = v.adjoint() * x * v;
        let e = &self.eigen.values;
        for a in 0..xe.nrows() {
            for b in 0..xe.ncols() {
                xe[(a, b)] *= Complex64::from_polar(1.0, -(e[a] - e[b]) * tau);
            }
        }
        v * xe * v.adjoint()
    }

    /// Kernel value G_s at node n (sign 0 = G₊, 1 = G₋).
    pub fn g_node(&self, sign: usize, n: usize) -> Complex64 {
        self.g[sign][n]
    }

    /// Running integrals at time t, linearly interpolated between nodes and
    /// frozen beyond the memory cutoff.
    fn integrals_at(&self, t: f64) -> [CMat; 2] {
        let x = (t / self.dtau).max(0.0);
        let last = self.n_nodes - 1;
        if x >= last as f64 {
            return [self.cumulative[0][last].clone(), self.cumulative[1][last].clone()];
        }
        let n = x.floor() as usize;
        let w = x - n as f64;
        let mix = |s: usize| self.cumulative[s][n].scale(1.0 - w) + self.cumulative[s][n + 1].scale(w);
        [mix(0), mix(1)]
    }

    /// Λ_c(t) = ∫₀^{min(t, τ_c)} G_s(τ) S_c(−τ) dτ for every channel c.
    pub fn lambdas(&self, t: f64) -> Vec<CMat> {
        let ints = self.integrals_at(t);
        let v = &self.eigen.vectors;
        let vh = v.adjoint();
        self.channels
            .iter()
            .map(|c| {
                let le = c.s_eig.component_mul(&ints[c.sign]);
                v * le * &vh
            })
            .collect()
    }

    /// Coherent-plus-dissipative generator frozen at time t.
    pub fn generator(&self, t: f64, model: &SystemModel) -> Generator {
        let lambdas = self.lambdas(t);
        let mut heff = model.h0.map(|z| z * Complex64::i());
        let mut terms = Vec::with_capacity(lambdas.len());
        for (c, lam) in self.channels.iter().zip(lambdas) {
            heff += (&c.s_dense * &lam).scale(self.rabi_bar2);
            terms.push((lam, c.s.clone()));
        }
        if let Some(d) = &model.decay {
            heff += d.loss.map(|z| z * d.rate);
        }
        Generator {
            heff,
            terms,
            prefactor: self.rabi_bar2,
            decay: model.decay.clone(),
        }
    }
}

/// dρ/dt = −Kρ − (Kρ)† + Ω̄² Σ_c [Λ_c ρ S_c + h.c.] + 2γ Σ_L LρL†,
/// with K = iH + Ω̄² Σ_c S_c Λ_c + γ Σ_L L†L.
#[derive(Debug, Clone)]
pub struct Generator {
    heff: CMat,
    terms: Vec<(CMat, SparseOp)>,
    prefactor: f64,
    decay: Option<crate::system::Dissipator>,
}

impl Generator {
    pub fn apply(&self, rho: &CMat) -> CMat {
        let k_rho = &self.heff * rho;
        let mut out = -(&k_rho + k_rho.adjoint());
        if self.prefactor != 0.0 {
            let mut acc = zeros(rho.nrows());
            for (lam, s) in &self.terms {
                let lr = lam * rho;
                s.right_mul_acc(&lr, Complex64::new(self.prefactor, 0.0), &mut acc);
            }
            out += &acc + acc.adjoint();
        }
        if let Some(d) = &self.decay {
            d.jump_term_acc(rho, &mut out);
        }
        out
    }

    /// Same map for an arbitrary (not necessarily Hermitian) matrix.
    pub fn apply_general(&self, x: &CMat) -> CMat {
        let mut out = -(&self.heff * x + x * self.heff.adjoint());
        let w = Complex64::new(self.prefactor, 0.0);
        for (lam, s) in &self.terms {
            let mut acc = zeros(x.nrows());
            s.right_mul_acc(&(lam * x), w, &mut acc);
            let s_dense = s.to_dense();
            out += acc + s_dense * x * lam.adjoint() * w;
        }
        if let Some(d) = &self.decay {
            d.jump_term_acc(x, &mut out);
        }
        out
    }

    /// Matrix of the map acting on column-major vectorized ρ.
    pub fn superoperator(&self) -> CMat {
        let d = self.heff.nrows();
        let mut l = zeros(d * d);
        for k in 0..d * d {
            let mut e = zeros(d);
            e[(k % d, k / d)] = Complex64::new(1.0, 0.0);
            let col = self.apply_general(&e);
            l.set_column(k, &nalgebra::DVector::from_column_slice(col.as_slice()));
        }
        l
    }
}
