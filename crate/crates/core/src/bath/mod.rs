//! Phonon reservoir: spectral density, correlation functions and the grids
//! both engines consume.

mod kgrid;
mod quadrature;
mod spec;
mod tables;

pub use kgrid::{build_kgrid, KGrid};
pub use quadrature::{converged_rule, x_coth, PhiRule, PHI_TOL};
pub use spec::{
    coupling_g, BathKind, BathSpec, Cutoff, MicroscopicParams, ParametricParams, SpectralDensity,
};
pub use tables::{build_correlation_tables, CorrelationTables};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::units;

/// φ(τ) for the continuum bath; τ may be negative.
pub fn phi_of_tau(tau: f64, spec: &BathSpec) -> Result<Complex64> {
    quadrature::phi_from_density(tau, &spec.spectral_density()?)
}

/// Polaron shift ∫ J(ω)/ω dω in ps⁻¹.
pub fn polaron_shift(spec: &BathSpec) -> Result<f64> {
    quadrature::polaron_shift_from_density(&spec.spectral_density()?)
}

/// Bose occupation 1/(exp(ħω/k_BT) − 1) for ω in ps⁻¹.
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("phonon frequency must be positive, got {omega}")));
    }
    if !(temperature > 0.0) {
        return Err(Error::Domain(format!("temperature must be positive, got {temperature}")));
    }
    Ok(1.0 / (omega / units::thermal_frequency(temperature)).exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn scaled(scale: f64) -> BathSpec {
        BathSpec {
            coupling_scale: scale,
            ..BathSpec::default()
        }
    }

    /// φ(0) integrated in k-space from the SI coupling, midpoint rule on a
    /// dense grid.
    fn phi0_k_space(spec: &BathSpec) -> f64 {
        let c = spec.sound_velocity().unwrap();
        let wt = units::thermal_frequency(spec.temperature);
        let sd = spec.spectral_density().unwrap();
        let k_max = sd.omega_max() / c;
        let n = 400_000;
        let dk = k_max / n as f64;
        (0..n)
            .map(|j| {
                let k = (j as f64 + 0.5) * dk;
                let w = c * k;
                let g = coupling_g(k, spec).unwrap();
                4.0 * PI * k * k * g * g / (w * w) / (w / (2.0 * wt)).tanh() * dk
            })
            .sum()
    }

    #[test]
    fn phi_at_zero_matches_k_space_oracle() {
        let spec = BathSpec::default();
        let phi0 = phi_of_tau(0.0, &spec).unwrap();
        assert_eq!(phi0.im, 0.0);
        let oracle = phi0_k_space(&spec);
        assert!((phi0.re - oracle).abs() < 1e-7 * oracle.max(1.0), "{} vs {oracle}", phi0.re);
        let tables = build_correlation_tables(&spec, 20.0, 2001, 1e-8).unwrap();
        assert!((tables.polaron_factor - (-oracle / 2.0).exp()).abs() < 1e-7);
        assert!(tables.polaron_factor > 0.0 && tables.polaron_factor < 1.0);
    }

    #[test]
    fn phi_is_hermitian_in_tau() {
        let spec = BathSpec::default();
        let a = phi_of_tau(1.3, &spec).unwrap();
        let b = phi_of_tau(-1.3, &spec).unwrap();
        assert!((a - b.conj()).norm() < 1e-12);
    }

    #[test]
    fn zero_coupling_is_trivial() {
        let spec = scaled(0.0);
        assert_eq!(phi_of_tau(0.7, &spec).unwrap(), Complex64::new(0.0, 0.0));
        let t = build_correlation_tables(&spec, 20.0, 101, 1e-8).unwrap();
        assert!(t.g_plus.iter().chain(&t.g_minus).all(|z| z.norm() == 0.0));
        assert_eq!(t.polaron_factor, 1.0);
        assert_eq!(t.memory_cutoff_index, 0);
        assert_eq!(polaron_shift(&spec).unwrap(), 0.0);
        let kg = build_kgrid(&spec, 64).unwrap();
        assert!(kg.effective_couplings.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn tables_satisfy_invariants() {
        let spec = BathSpec::default();
        let t = build_correlation_tables(&spec, 20.0, 10001, 1e-8).unwrap();
        assert!(t.hyperbolic_defect() < 1e-10);
        assert_eq!(t.phi[0].im, 0.0);
        assert!(t.phi[0].re > 0.0);
        assert!(!t.cutoff_clamped);
        let m = t.memory_cutoff_index;
        assert!(m > 0 && m < t.len() - 1);
        assert!(t.g_plus[m..].iter().chain(&t.g_minus[m..]).all(|z| z.norm() < 1e-8));
        assert!(t.g_minus[m - 1].norm() >= 1e-8 || t.g_plus[m - 1].norm() >= 1e-8);
        // The grid values agree with pointwise evaluation.
        for n in [0, 1, 777, 5000, 10000] {
            let direct = phi_of_tau(t.tau[n], &spec).unwrap();
            assert!((t.phi[n] - direct).norm() < 1e-8, "node {n}");
        }
    }

    #[test]
    fn short_grid_clamps_the_cutoff() {
        let t = build_correlation_tables(&BathSpec::default(), 0.5, 51, 1e-8).unwrap();
        assert!(t.cutoff_clamped);
        assert_eq!(t.memory_cutoff_index, 50);
    }

    #[test]
    fn table_arguments_are_validated() {
        let s = BathSpec::default();
        assert!(build_correlation_tables(&s, 0.0, 10, 1e-8).is_err());
        assert!(build_correlation_tables(&s, 1.0, 1, 1e-8).is_err());
        assert!(build_correlation_tables(&s, 1.0, 10, 0.0).is_err());
    }

    #[test]
    fn phi_grows_with_temperature() {
        let mut last = 0.0;
        for t in [1.0, 4.0, 10.0, 30.0] {
            let spec = BathSpec {
                temperature: t,
                ..BathSpec::default()
            };
            let p = phi_of_tau(0.0, &spec).unwrap().re;
            assert!(p >= last);
            last = p;
        }
    }

    #[test]
    fn thermal_occupation_values() {
        let wt = units::thermal_frequency(4.0);
        assert!((thermal_occupation(wt, 4.0).unwrap() - 0.581_976_7).abs() < 1e-7);
        assert!(thermal_occupation(50.0 * wt, 4.0).unwrap() < 2e-22);
        let w = units::mev_to_per_ps(1.0);
        let direct = 1.0 / ((1.0f64 / (0.08617 * 4.0)).exp() - 1.0);
        assert!((thermal_occupation(w, 4.0).unwrap() - direct).abs() < 1e-12);
        assert!(matches!(thermal_occupation(0.0, 4.0), Err(Error::Domain(_))));
        assert!(matches!(thermal_occupation(1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn polaron_shift_matches_k_space_oracle() {
        let spec = BathSpec::default();
        let c = spec.sound_velocity().unwrap();
        let n = 200_000;
        let k_max = spec.spectral_density().unwrap().omega_max() / c;
        let dk = k_max / n as f64;
        let oracle: f64 = (0..n)
            .map(|j| {
                let k = (j as f64 + 0.5) * dk;
                let g = coupling_g(k, &spec).unwrap();
                4.0 * PI * k * k * g * g / (c * k) * dk
            })
            .sum();
        assert!((polaron_shift(&spec).unwrap() - oracle).abs() < 1e-8);
    }

    #[test]
    fn kgrid_reproduces_continuum_phi() {
        let spec = BathSpec::default();
        let kg = build_kgrid(&spec, 1000).unwrap();
        assert!(kg.frequencies.windows(2).all(|w| w[1] > w[0]));
        assert!(kg.effective_couplings.iter().all(|&g| g >= 0.0));
        let peak = kg.effective_couplings.iter().zip(&kg.nodes).map(|(g, k)| g / (4.0 * PI * k * k * kg.dk).sqrt()).fold(0.0, f64::max);
        let last = kg.effective_couplings[999] / (4.0 * PI * kg.nodes[999].powi(2) * kg.dk).sqrt();
        assert!(last < 1e-4 * peak);
        for tau in [0.0, 0.5, 2.0, 7.0, 20.0] {
            let cont = phi_of_tau(tau, &spec).unwrap();
            let disc = kg.phi(tau);
            let scale = phi_of_tau(0.0, &spec).unwrap().re;
            assert!((disc - cont).norm() < 1e-2 * scale, "tau {tau}: {disc} vs {cont}");
        }
    }

    #[test]
    fn small_kgrid_on_narrow_family() {
        let spec = BathSpec {
            kind: BathKind::Gaussian,
            microscopic: None,
            parametric: Some(ParametricParams::default()),
            ..BathSpec::default()
        };
        let kg = build_kgrid(&spec, 8).unwrap();
        assert_eq!(kg.len(), 8);
        assert!(matches!(build_kgrid(&spec, 7), Err(Error::Config { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn phi_hermiticity_random_tau(tau in -20.0..20.0f64) {
            let sd = BathSpec::default().spectral_density().unwrap();
            let rule = converged_rule(&sd, &[tau], PHI_TOL).unwrap();
            let a = rule.eval(tau);
            let b = rule.eval(-tau);
            prop_assert!((a - b.conj()).norm() <= 1e-10 * a.norm().max(1e-3));
        }

        #[test]
        fn hyperbolic_identity_on_random_tables(scale in 0.0..3.0f64, temp in 0.5..40.0f64) {
            let spec = BathSpec { coupling_scale: scale, temperature: temp, ..BathSpec::default() };
            let t = build_correlation_tables(&spec, 10.0, 501, 1e-8).unwrap();
            prop_assert!(t.hyperbolic_defect() < 1e-10);
            prop_assert!(t.polaron_factor > 0.0 && t.polaron_factor <= 1.0);
            prop_assert_eq!(t.polaron_factor == 1.0, scale == 0.0);
        }
    }
}
