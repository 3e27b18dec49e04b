//! Coherent Hamiltonians, phonon coupling operators and radiative dissipators
//! for single emitters and emitter chains.

mod dissipator;
mod model;
mod scheme;

pub use dissipator::Dissipator;
pub use model::{
    build_dexter_all_chain, build_dexter_single_chain, build_foerster_chain, build_single,
    DriveSpec, PolaronDressing, SiteCoupling, SystemModel, FOERSTER_MAX_SITES,
};
pub use scheme::{LevelScheme, SchemeKind};

use nalgebra::DVector;
use num_complex::Complex64;

/// Normalized dressed states of the resonant V system: [|−⟩, |+⟩, |D⟩].
pub fn dressed_basis() -> [DVector<Complex64>; 3] {
    let s2 = std::f64::consts::SQRT_2;
    let v = |a: f64, b: f64, c: f64| {
        DVector::from_vec(vec![
            Complex64::new(a, 0.0),
            Complex64::new(b, 0.0),
            Complex64::new(c, 0.0),
        ])
    };
    [
        v(-s2 / 2.0, 0.5, 0.5),
        v(s2 / 2.0, 0.5, 0.5),
        v(0.0, 1.0 / s2, -1.0 / s2),
    ]
}
