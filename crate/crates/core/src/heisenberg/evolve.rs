use super::rhs::{HeisenbergOptions, HeisenbergSystem};
use super::state::HeisenbergState;
use crate::analysis::TimeSeries;
use crate::bath::KGrid;
use crate::error::{Error, Result, Violation};
use crate::system::SystemModel;

#[derive(Debug, Clone, Copy)]
pub struct HeisenbergRun {
    pub t_end: f64,
    pub dt: f64,
    pub sample_every: usize,
    /// Longest admissible t_end, ps.
    pub horizon: f64,
}

impl Default for HeisenbergRun {
    fn default() -> Self {
        Self {
            t_end: 200.0,
            dt: 0.002,
            sample_every: 500,
            horizon: 200.0,
        }
    }
}

pub const POPULATION_TOL: f64 = 1e-6;
pub const PAIRING_TOL: f64 = 1e-8;

pub fn heisenberg_channels() -> Vec<String> {
    crate::analysis::density_channels(&crate::system::LevelScheme::new(
        crate::system::SchemeKind::Single,
        1,
    ))
}

fn observe(state: &HeisenbergState) -> Vec<f64> {
    let rho = state.density_matrix();
    let mut out: Vec<f64> = (0..3).map(|i| rho[(i, i)].re).collect();
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        out.push(rho[(a, b)].re);
        out.push(rho[(a, b)].im);
    }
    out
}

pub(crate) fn rk4(sys: &HeisenbergSystem, y: &HeisenbergState, dt: f64) -> Result<HeisenbergState> {
    let k1 = sys.rhs(y)?;
    let k2 = sys.rhs(&y.axpy(0.5 * dt, &k1))?;
    let k3 = sys.rhs(&y.axpy(0.5 * dt, &k2))?;
    let k4 = sys.rhs(&y.axpy(dt, &k3))?;
    let mut out = y.axpy(dt / 6.0, &k1);
    out = out.axpy(dt / 3.0, &k2);
    out = out.axpy(dt / 3.0, &k3);
    out = out.axpy(dt / 6.0, &k4);
    out.t = y.t + dt;
    Ok(out)
}

pub(crate) fn validate_run(kgrid: &KGrid, run: &HeisenbergRun) -> Result<()> {
    if !(run.dt > 0.0) {
        return Err(Error::config("numerics.dt", "must be positive"));
    }
    let limit = 0.1 / kgrid.omega_max();
    if run.dt > limit * (1.0 + 1e-12) {
        return Err(Error::config(
            "numerics.dt",
            format!(
                "dt = {} ps does not resolve the fastest phonon mode (need dt <= {:.5} ps)",
                run.dt, limit
            ),
        ));
    }
    if !(run.t_end >= 0.0) || run.t_end > run.horizon {
        return Err(Error::config(
            "numerics.t_end",
            format!("must lie in [0, {}] ps for the Heisenberg engine", run.horizon),
        ));
    }
    if run.sample_every == 0 {
        return Err(Error::config("numerics.sample_every", "must be at least 1"));
    }
    Ok(())
}

/// Fixed-step RK4 integration of the correlation-expansion equations.
pub fn evolve_heisenberg(
    model: &SystemModel,
    kgrid: &KGrid,
    state0: &HeisenbergState,
    run: &HeisenbergRun,
    options: &HeisenbergOptions,
) -> Result<TimeSeries> {
    validate_run(kgrid, run)?;
    let sys = HeisenbergSystem::new(model, kgrid, options)?;
    let n_steps = (run.t_end / run.dt - 1e-9).ceil().max(0.0) as usize;
    let mut series = TimeSeries::new(heisenberg_channels());
    let mut y = state0.clone();
    y.t = 0.0;

    let record = |step: usize, y: &HeisenbergState, series: &mut TimeSeries| -> Result<()> {
        let d = &mut series.diagnostics;
        let tr = y.trace_error();
        let im = y.max_imag_population();
        let pair = y.sigma_pairing_error().max(y.amplitude_pairing_error());
        d.max_trace_error = d.max_trace_error.max(tr);
        d.max_hermiticity_error = d.max_hermiticity_error.max(pair);
        for i in 0..3 {
            d.min_population = d.min_population.min(y.sigma[(i, i)].re);
            d.max_population = d.max_population.max(y.sigma[(i, i)].re);
        }
        let checks = [
            ("population sum error", tr, POPULATION_TOL),
            ("imaginary population", im, PAIRING_TOL),
            ("conjugation pairing error", pair, PAIRING_TOL),
        ];
        for (quantity, value, tolerance) in checks {
            if !(value <= tolerance) {
                return Err(Error::Aborted(Violation {
                    step,
                    t: step as f64 * run.dt,
                    quantity: quantity.into(),
                    value,
                    tolerance,
                }));
            }
        }
        series.push(step as f64 * run.dt, &observe(y));
        Ok(())
    };

    record(0, &y, &mut series)?;
    for step in 1..=n_steps {
        y = rk4(&sys, &y, run.dt)?;
        if step % run.sample_every == 0 || step == n_steps {
            record(step, &y, &mut series)?;
        }
    }
    Ok(series)
}
