use super::kernel::{Generator, KernelCache};
use crate::analysis::{density_channels, observe_density, TimeSeries};
use crate::error::{Error, Result, Violation};
use crate::linalg::{hermiticity_error, min_eigenvalue, trace, CMat};
use crate::system::SystemModel;

/// Time derivative of ρ at time t.
pub fn liouvillian_apply(t: f64, rho: &CMat, cache: &KernelCache, model: &SystemModel) -> Result<CMat> {
    check_dims(rho, cache, model)?;
    Ok(cache.generator(t, model).apply(rho))
}

fn check_dims(rho: &CMat, cache: &KernelCache, model: &SystemModel) -> Result<()> {
    let d = model.scheme.dim;
    if cache.dim() != d || rho.nrows() != d || rho.ncols() != d {
        return Err(Error::config(
            "system",
            format!(
                "dimension mismatch: model {d}, kernel cache {}, density matrix {}x{}",
                cache.dim(),
                rho.nrows(),
                rho.ncols()
            ),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub sample_every: usize,
    pub keep_snapshots: bool,
    pub trace_tol: f64,
    pub hermiticity_tol: f64,
    /// Abort when the smallest eigenvalue of ρ drops below −positivity_tol.
    pub positivity_tol: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            sample_every: 100,
            keep_snapshots: false,
            trace_tol: 1e-8,
            hermiticity_tol: 1e-10,
            positivity_tol: 1e-4,
        }
    }
}

/// Reuses generators across RK stages: the end of one step is the start of
/// the next, and everything past the memory cutoff shares one generator.
struct Generators<'a> {
    cache: &'a KernelCache,
    model: &'a SystemModel,
    t_sat: f64,
    saturated: Option<Generator>,
    recent: Vec<(f64, Generator)>,
}

impl<'a> Generators<'a> {
    fn get(&mut self, t: f64) -> &Generator {
        if t >= self.t_sat {
            return self
                .saturated
                .get_or_insert_with(|| self.cache.generator(self.t_sat, self.model));
        }
        if let Some(i) = self.recent.iter().position(|(s, _)| *s == t) {
            return &self.recent[i].1;
        }
        if self.recent.len() >= 3 {
            self.recent.remove(0);
        }
        self.recent.push((t, self.cache.generator(t, self.model)));
        &self.recent.last().unwrap().1
    }
}

fn rk4_step(gens: &mut Generators, t: f64, dt: f64, rho: &CMat) -> CMat {
    let k1 = gens.get(t).apply(rho);
    let k2 = gens.get(t + 0.5 * dt).apply(&(rho + k1.scale(0.5 * dt)));
    let k3 = gens.get(t + 0.5 * dt).apply(&(rho + k2.scale(0.5 * dt)));
    let k4 = gens.get(t + dt).apply(&(rho + k3.scale(dt)));
    rho + (k1 + (k2 + k3).scale(2.0) + k4).scale(dt / 6.0)
}

/// Fixed-step RK4 integration of the polaron master equation from t = 0.
pub fn evolve(
    model: &SystemModel,
    cache: &KernelCache,
    rho0: &CMat,
    t_end: f64,
    dt: f64,
    opts: &EvolveOptions,
) -> Result<TimeSeries> {
    check_dims(rho0, cache, model)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::config("numerics.dt", "must be positive"));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::config("numerics.t_end", "must be non-negative"));
    }
    if opts.sample_every == 0 {
        return Err(Error::config("numerics.sample_every", "must be at least 1"));
    }
    let n_steps = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    let scheme = &model.scheme;
    let mut series = TimeSeries::new(density_channels(scheme));
    if opts.keep_snapshots {
        series.snapshots = Some(Vec::new());
    }
    let mut gens = Generators {
        cache,
        model,
        t_sat: cache.saturation_time(),
        saturated: None,
        recent: Vec::new(),
    };

    let mut rho = rho0.clone();
    let record = |step: usize, rho: &CMat, series: &mut TimeSeries| -> Result<()> {
        let t = step as f64 * dt;
        let d = &mut series.diagnostics;
        let tr = (trace(rho) - 1.0).norm();
        let herm = hermiticity_error(rho);
        let min_eig = min_eigenvalue(rho);
        d.max_trace_error = d.max_trace_error.max(tr);
        d.max_hermiticity_error = d.max_hermiticity_error.max(herm);
        d.min_eigenvalue = d.min_eigenvalue.min(min_eig);
        for i in 0..rho.nrows() {
            d.min_population = d.min_population.min(rho[(i, i)].re);
            d.max_population = d.max_population.max(rho[(i, i)].re);
        }
        let checks = [
            ("trace error", tr, opts.trace_tol),
            ("hermiticity error", herm, opts.hermiticity_tol),
            ("negative eigenvalue", -min_eig, opts.positivity_tol),
        ];
        for (quantity, value, tolerance) in checks {
            if !(value <= tolerance) {
                return Err(Error::Aborted(Violation {
                    step,
                    t,
                    quantity: quantity.into(),
                    value,
                    tolerance,
                }));
            }
        }
        series.push(t, &observe_density(scheme, rho));
        if let Some(s) = series.snapshots.as_mut() {
            s.push(rho.clone());
        }
        Ok(())
    };

    record(0, &rho, &mut series)?;
    let mut step = 0;
    // Memory phase: the generator changes from stage to stage.
    while step < n_steps && (step as f64 * dt) < gens.t_sat {
        rho = rk4_step(&mut gens, step as f64 * dt, dt, &rho);
        step += 1;
        if step % opts.sample_every == 0 || step == n_steps {
            record(step, &rho, &mut series)?;
        }
    }
    if step == n_steps {
        return Ok(series);
    }
    // Saturated phase: the RK4 step is a fixed linear map, applied as a
    // matrix on vec(ρ) and raised to the sampling interval once.
    let one_step = trace_preserving(rk4_propagator(&gens.get(gens.t_sat).superoperator(), dt));
    let to_sample = (opts.sample_every - step % opts.sample_every) % opts.sample_every;
    let chunk = trace_preserving(matrix_power(&one_step, opts.sample_every));
    let advance = |rho: &CMat, p: &CMat| -> CMat {
        let d = rho.nrows();
        let v = p * nalgebra::DVector::from_column_slice(rho.as_slice());
        let m = CMat::from_column_slice(d, d, v.as_slice());
        (&m + m.adjoint()).scale(0.5)
    };
    if to_sample > 0 {
        let k = to_sample.min(n_steps - step);
        rho = advance(&rho, &trace_preserving(matrix_power(&one_step, k)));
        step += k;
        record(step, &rho, &mut series)?;
    }
    while step + opts.sample_every <= n_steps {
        rho = advance(&rho, &chunk);
        step += opts.sample_every;
        record(step, &rho, &mut series)?;
    }
    if step < n_steps {
        rho = advance(&rho, &trace_preserving(matrix_power(&one_step, n_steps - step)));
        step = n_steps;
        record(step, &rho, &mut series)?;
    }
    Ok(series)
}

/// One classical RK4 step of dx/dt = Lx: Σ_{k≤4} (hL)^k / k!.
fn rk4_propagator(l: &CMat, h: f64) -> CMat {
    let n = l.nrows();
    let hl = l.scale(h);
    let mut term = CMat::identity(n, n);
    let mut out = term.clone();
    for k in 1..=4 {
        term = &term * &hl / num_complex::Complex64::from(k as f64);
        out += &term;
    }
    out
}

/// Rank-one update P + vec(I)/d (t - tP), where t = vec(I)^T picks the trace,
/// so that tr(P x) = tr(x) holds exactly. Removes slow roundoff drift over
/// many repeated applications.
fn trace_preserving(mut p: CMat) -> CMat {
    let n = p.nrows();
    let d = (n as f64).sqrt().round() as usize;
    let diag: Vec<usize> = (0..d).map(|i| i * d + i).collect();
    for col in 0..n {
        let tp: num_complex::Complex64 = diag.iter().map(|&r| p[(r, col)]).sum();
        let target = if diag.contains(&col) { 1.0 } else { 0.0 };
        let corr = (num_complex::Complex64::from(target) - tp) / d as f64;
        for &r in &diag {
            p[(r, col)] += corr;
        }
    }
    p
}

fn matrix_power(m: &CMat, mut k: usize) -> CMat {
    let n = m.nrows();
    let mut result = CMat::identity(n, n);
    let mut base = m.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::{build_correlation_tables, BathSpec, CorrelationTables};
    use crate::linalg::{commutator, max_abs_diff, zeros, I};
    use crate::system::{
        build_dexter_single_chain, build_single, dressed_basis, DriveSpec, PolaronDressing,
    };
    use num_complex::Complex64;
    use proptest::prelude::*;

    const PHI: [(f64, f64); 3] = [(0.3, 0.0), (0.25, -0.1), (0.1, -0.05)];
    const DTAU: f64 = 0.7;

    fn toy_tables() -> CorrelationTables {
        let phi = PHI.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        CorrelationTables::from_phi(DTAU, phi, 0.02, 1e-12).unwrap()
    }

    fn toy_g() -> Vec<(Complex64, Complex64)> {
        PHI.iter()
            .map(|&(a, b)| {
                let p = Complex64::new(a, b);
                (p.cosh() - 1.0, p.sinh())
            })
            .collect()
    }

    fn trapezoid_weights(n: usize) -> Vec<f64> {
        (0..=n)
            .map(|k| if k == 0 || k == n { 0.5 * DTAU } else { DTAU })
            .collect()
    }

    fn rotate(h: &CMat, x: &CMat, tau: f64) -> CMat {
        let u = h.map(|z| z * Complex64::new(0.0, -tau)).exp();
        &u * x * u.adjoint()
    }

    fn test_rho(dim: usize) -> CMat {
        let mut a = zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                a[(i, j)] = Complex64::new(((3 * i + 7 * j) % 5) as f64 - 1.7, ((i + 2 * j) % 3) as f64 - 0.9);
            }
        }
        let rho = &a * a.adjoint();
        let t = crate::linalg::trace(&rho).re;
        rho.unscale(t)
    }

    /// Element-wise single-emitter equations of motion: coherent part plus
    /// the memory kernel expanded over m, n, i, j, q.
    fn single_emitter_oracle(rabi: f64, d: [f64; 2], rho: &CMat, n_t: usize) -> CMat {
        let h = {
            let mut h = zeros(3);
            h[(1, 1)] = d[0].into();
            h[(2, 2)] = d[1].into();
            for i in 1..3 {
                h[(0, i)] = rabi.into();
                h[(i, 0)] = rabi.into();
            }
            h
        };
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        let xp = |j: usize| {
            let mut x = zeros(3);
            x[(0, j)] = 1.0.into();
            x[(j, 0)] = 1.0.into();
            x
        };
        let xm = |j: usize| {
            let mut x = zeros(3);
            x[(j, 0)] = I;
            x[(0, j)] = -I;
            x
        };
        let g = toy_g();
        let w = trapezoid_weights(n_t);
        let mut out = zeros(3);
        for m in 0..3 {
            for n in 0..3 {
                let mut v = Complex64::new(0.0, 0.0);
                for i in 1..3 {
                    v += I * d[i - 1] * (rho[(m, i)] * delta(n, i) - rho[(i, n)] * delta(m, i));
                    v += I * rabi
                        * (rho[(m, 0)] * delta(n, i) + rho[(m, i)] * delta(n, 0)
                            - rho[(i, n)] * delta(m, 0)
                            - rho[(0, n)] * delta(m, i));
                }
                let mut mem = Complex64::new(0.0, 0.0);
                for (k, &wk) in w.iter().enumerate() {
                    let tau = k as f64 * DTAU;
                    let (gp, gm) = g[k];
                    let (gpc, gmc) = (gp.conj(), gm.conj());
                    for i in 1..3 {
                        for j in 1..3 {
                            let p = rotate(&h, &xp(j), tau);
                            let q_ = rotate(&h, &xm(j), tau);
                            let mut chi = Complex64::new(0.0, 0.0);
                            for q in 0..3 {
                                chi += rho[(q, n)]
                                    * ((gp * p[(i, q)] - I * gm * q_[(i, q)]) * delta(m, 0)
                                        + (gp * p[(0, q)] + I * gm * q_[(0, q)]) * delta(m, i));
                                chi += rho[(m, q)]
                                    * ((gpc * p[(q, 0)] - I * gmc * q_[(q, 0)]) * delta(n, i)
                                        + (gpc * p[(q, i)] + I * gmc * q_[(q, i)]) * delta(n, 0));
                                chi += rho[(q, 0)] * (-gp * p[(m, q)] + I * gm * q_[(m, q)]) * delta(n, i);
                                chi += rho[(q, i)] * (-gp * p[(m, q)] - I * gm * q_[(m, q)]) * delta(n, 0);
                                chi += rho[(0, q)] * (-gpc * p[(q, n)] - I * gmc * q_[(q, n)]) * delta(m, i);
                                chi += rho[(i, q)] * (-gpc * p[(q, n)] + I * gmc * q_[(q, n)]) * delta(m, 0);
                            }
                            mem += chi * wk;
                        }
                    }
                }
                out[(m, n)] = v - mem * rabi * rabi;
            }
        }
        out
    }

    #[test]
    fn single_emitter_matches_elementwise_kernel_oracle() {
        let dr = PolaronDressing { factor: 0.93, shift: 0.02 };
        let (rabi, d2, d3) = (0.4, 0.15, -1.519);
        let model = build_single(DriveSpec { rabi, detuning2: d2, detuning3: d3 }, dr);
        let cache = KernelCache::new(&model, &toy_tables(), true).unwrap();
        let rho = test_rho(3);
        for n_t in [1, 2] {
            let got = liouvillian_apply(n_t as f64 * DTAU, &rho, &cache, &model).unwrap();
            let want = single_emitter_oracle(0.93 * rabi, [d2 - 0.02, d3 - 0.02], &rho, n_t);
            let err = max_abs_diff(&got, &want);
            assert!(err < 1e-12, "n_t = {n_t}: {err:e}");
        }
        // past the end of the grid the memory integral stays at its full value
        let late = liouvillian_apply(50.0, &rho, &cache, &model).unwrap();
        let want = single_emitter_oracle(0.93 * rabi, [d2 - 0.02, d3 - 0.02], &rho, 2);
        assert!(max_abs_diff(&late, &want) < 1e-12);
    }

    /// Dense chain equation: commutator form with an explicit double site sum.
    fn chain_oracle(model: &SystemModel, rho: &CMat, n_t: usize, site_diagonal: bool) -> CMat {
        let dim = model.scheme.dim;
        let h = &model.h0;
        let n = model.scheme.n_sites;
        let op = |l: usize, a: usize, b: usize| {
            let mut m = zeros(dim);
            m[(3 * l + a - 1, 3 * l + b - 1)] = 1.0.into();
            m
        };
        let xs = |s: usize, l: usize, i: usize| {
            if s == 0 {
                op(l, 1, i) + op(l, i, 1)
            } else {
                (op(l, i, 1) - op(l, 1, i)) * I
            }
        };
        let rb2 = model.rabi_bar().powi(2);
        let g = toy_g();
        let w = trapezoid_weights(n_t);
        let mut out = -commutator(h, rho) * I;
        for l in 0..n {
            for lp in 0..n {
                if site_diagonal && l != lp {
                    continue;
                }
                for i in 2..=3 {
                    for j in 2..=3 {
                        for (k, &wk) in w.iter().enumerate() {
                            let tau = k as f64 * DTAU;
                            for s in 0..2 {
                                let gs = if s == 0 { g[k].0 } else { g[k].1 };
                                let term = commutator(&xs(s, l, j), &(rotate(h, &xs(s, lp, i), tau) * rho)) * gs;
                                out -= (&term + term.adjoint()) * Complex64::from(rb2 * wk);
                            }
                        }
                    }
                }
            }
        }
        if let Some(d) = &model.decay {
            for l in 0..n {
                for i in 2..=3 {
                    let a = op(l, 1, i);
                    let ad = a.adjoint();
                    out += ((&a * rho * &ad).scale(2.0) - &ad * &a * rho - rho * &ad * &a).scale(d.rate);
                }
            }
        }
        out
    }

    #[test]
    fn chain_matches_dense_double_site_sum() {
        let dr = PolaronDressing { factor: 0.9, shift: 0.02 };
        let drive = DriveSpec { rabi: 0.3, detuning2: 0.0, detuning3: -1.519 };
        let model = build_dexter_single_chain(2, drive, 0.1, dr)
            .unwrap()
            .with_decay(500.0)
            .unwrap();
        let rho = test_rho(6);
        for site_diagonal in [true, false] {
            let cache = KernelCache::new(&model, &toy_tables(), site_diagonal).unwrap();
            for n_t in [1, 2] {
                let got = liouvillian_apply(n_t as f64 * DTAU, &rho, &cache, &model).unwrap();
                let want = chain_oracle(&model, &rho, n_t, site_diagonal);
                let err = max_abs_diff(&got, &want);
                assert!(err < 1e-12, "site_diagonal = {site_diagonal}, n_t = {n_t}: {err:e}");
            }
        }
    }

    fn closed_tables() -> CorrelationTables {
        let spec = BathSpec { coupling_scale: 0.0, ..BathSpec::default() };
        build_correlation_tables(&spec, 20.0, 101, 1e-8).unwrap()
    }

    #[test]
    fn zero_coupling_reduces_to_the_commutator() {
        let model = build_single(DriveSpec { rabi: 0.1, detuning2: 0.0, detuning3: -1.0 }, PolaronDressing::bare());
        let cache = KernelCache::new(&model, &closed_tables(), true).unwrap();
        let rho = model.scheme.initial_state();
        let got = liouvillian_apply(3.0, &rho, &cache, &model).unwrap();
        let want = -commutator(&model.h0, &rho) * I;
        assert!(max_abs_diff(&got, &want) < 1e-15);
    }

    #[test]
    fn closed_system_matches_matrix_exponential() {
        let drive = DriveSpec { rabi: 0.1, detuning2: 0.0, detuning3: crate::units::mev_to_per_ps(-1.0) };
        let model = build_single(drive, PolaronDressing::bare());
        let cache = KernelCache::new(&model, &closed_tables(), true).unwrap();
        let rho0 = model.scheme.initial_state();
        let opts = EvolveOptions { sample_every: 50, keep_snapshots: true, ..Default::default() };
        let s = evolve(&model, &cache, &rho0, 100.0, 0.01, &opts).unwrap();
        assert_eq!(s.len(), 201);
        let mut worst = 0.0f64;
        for (t, rho) in s.t.iter().zip(s.snapshots.as_ref().unwrap()) {
            let u = model.h0.map(|z| z * Complex64::new(0.0, -t)).exp();
            worst = worst.max(max_abs_diff(rho, &(&u * &rho0 * u.adjoint())));
        }
        assert!(worst < 1e-8, "{worst:e}");
    }

    #[test]
    fn resonant_closed_system_is_an_effective_two_level_rabi_flop() {
        let model = build_single(DriveSpec { rabi: 0.1, detuning2: 0.0, detuning3: 0.0 }, PolaronDressing::bare());
        let cache = KernelCache::new(&model, &closed_tables(), true).unwrap();
        let opts = EvolveOptions { sample_every: 37, ..Default::default() };
        let s = evolve(&model, &cache, &model.scheme.initial_state(), 100.0, 0.01, &opts).unwrap();
        let w = 0.1 * std::f64::consts::SQRT_2;
        for (t, p) in s.t.iter().zip(s.channel("occ_s1_l1").unwrap()) {
            assert!((p - (w * t).cos().powi(2)).abs() < 1e-8);
        }
    }

    #[test]
    fn dark_state_is_stationary() {
        let model = build_single(DriveSpec { rabi: 0.1, detuning2: 0.0, detuning3: 0.0 }, PolaronDressing::bare());
        let cache = KernelCache::new(&model, &closed_tables(), true).unwrap();
        let dark = &dressed_basis()[2];
        let rho0 = dark * dark.adjoint();
        let opts = EvolveOptions { sample_every: 100, keep_snapshots: true, ..Default::default() };
        let s = evolve(&model, &cache, &rho0, 200.0, 0.01, &opts).unwrap();
        for rho in s.snapshots.unwrap() {
            let p = dark.dotc(&(&rho * dark)).re;
            assert!((p - 1.0).abs() < 1e-10);
        }
    }

    /// RK4 with a freshly built generator at every stage, no fast path.
    fn plain_rk4(model: &SystemModel, cache: &KernelCache, t_end: f64, dt: f64) -> CMat {
        let mut rho = model.scheme.initial_state();
        let n = (t_end / dt).round() as usize;
        for k in 0..n {
            let t = k as f64 * dt;
            let f = |t: f64, r: &CMat| cache.generator(t, model).apply(r);
            let k1 = f(t, &rho);
            let k2 = f(t + dt / 2.0, &(&rho + k1.scale(dt / 2.0)));
            let k3 = f(t + dt / 2.0, &(&rho + k2.scale(dt / 2.0)));
            let k4 = f(t + dt, &(&rho + k3.scale(dt)));
            rho += (k1 + (k2 + k3).scale(2.0) + k4).scale(dt / 6.0);
        }
        rho
    }

    #[test]
    fn saturated_fast_path_agrees_with_stepwise_rk4() {
        let drive = DriveSpec { rabi: 0.1, detuning2: 0.0, detuning3: -1.519 };
        let tables = build_correlation_tables(&BathSpec::default(), 20.0, 2001, 1e-8).unwrap();
        let dr = PolaronDressing { factor: tables.polaron_factor, shift: tables.polaron_shift };
        let model = build_single(drive, dr).with_decay(50.0).unwrap();
        let cache = KernelCache::new(&model, &tables, true).unwrap();
        assert!(cache.saturation_time() < 10.0);
        let t_end = 40.0;
        let opts = EvolveOptions { sample_every: 700, keep_snapshots: true, ..Default::default() };
        let s = evolve(&model, &cache, &model.scheme.initial_state(), t_end, 0.01, &opts).unwrap();
        let fast = s.snapshots.unwrap().pop().unwrap();
        assert_eq!(*s.t.last().unwrap(), t_end);
        let slow = plain_rk4(&model, &cache, t_end, 0.01);
        assert!(max_abs_diff(&fast, &slow) < 1e-11, "{:e}", max_abs_diff(&fast, &slow));
    }

    #[test]
    fn sampling_includes_both_ends() {
        let model = build_single(DriveSpec { rabi: 0.1, detuning2: 0.0, detuning3: -1.0 }, PolaronDressing::bare());
        let cache = KernelCache::new(&model, &closed_tables(), true).unwrap();
        let opts = EvolveOptions { sample_every: 30, ..Default::default() };
        let s = evolve(&model, &cache, &model.scheme.initial_state(), 1.0, 0.01, &opts).unwrap();
        assert_eq!(s.t, vec![0.0, 0.3, 0.6, 0.9, 1.0]);
    }

    #[test]
    fn invariant_violation_aborts_with_a_diagnostic() {
        let model = build_single(DriveSpec { rabi: 0.1, detuning2: 0.0, detuning3: -1.0 }, PolaronDressing::bare());
        let cache = KernelCache::new(&model, &closed_tables(), true).unwrap();
        let mut rho0 = model.scheme.initial_state();
        rho0[(1, 1)] = Complex64::new(1e-3, 0.0);
        let err = evolve(&model, &cache, &rho0, 1.0, 0.01, &EvolveOptions::default()).unwrap_err();
        match err {
            Error::Aborted(v) => {
                assert_eq!(v.step, 0);
                assert_eq!(v.quantity, "trace error");
                assert!((v.value - 1e-3).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn argument_errors() {
        let model = build_single(DriveSpec { rabi: 0.1, detuning2: 0.0, detuning3: -1.0 }, PolaronDressing::bare());
        let cache = KernelCache::new(&model, &closed_tables(), true).unwrap();
        let rho = model.scheme.initial_state();
        let o = EvolveOptions::default();
        assert!(evolve(&model, &cache, &rho, 1.0, 0.0, &o).is_err());
        assert!(evolve(&model, &cache, &rho, -1.0, 0.01, &o).is_err());
        let zero = EvolveOptions { sample_every: 0, ..o };
        assert!(evolve(&model, &cache, &rho, 1.0, 0.01, &zero).is_err());
        let chain = build_dexter_single_chain(2, model.drive, 0.1, PolaronDressing::bare()).unwrap();
        let e = liouvillian_apply(0.0, &chain.scheme.initial_state(), &cache, &model).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(liouvillian_apply(0.0, &rho, &cache, &chain).is_err());
    }

    #[test]
    fn trace_correction_is_exact_on_the_identity_direction() {
        let l = CMat::from_fn(9, 9, |i, j| Complex64::new(((i * 5 + j * 3) % 7) as f64 * 0.01, 0.0));
        let p = trace_preserving(rk4_propagator(&l, 0.1));
        let rho = test_rho(3);
        let v = &p * nalgebra::DVector::from_column_slice(rho.as_slice());
        let tr: Complex64 = [0, 4, 8].iter().map(|&k| v[k]).sum();
        assert!((tr - 1.0).norm() < 1e-15);
        assert_eq!(matrix_power(&p, 0), CMat::identity(9, 9));
        assert!(max_abs_diff(&matrix_power(&p, 5), &(&p * &p * &p * &p * &p)) < 1e-13);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn generator_output_is_hermitian_and_traceless(
            seed in proptest::collection::vec(-1.0f64..1.0, 12),
            t in 0.0f64..3.0,
            rabi in 0.0f64..1.0,
            gamma in 0.0f64..100.0,
        ) {
            let drive = DriveSpec { rabi, detuning2: 0.0, detuning3: -1.519 };
            let model = build_dexter_single_chain(2, drive, 0.1, PolaronDressing::bare())
                .unwrap()
                .with_decay(gamma)
                .unwrap();
            let cache = KernelCache::new(&model, &toy_tables(), true).unwrap();
            let mut a = zeros(6);
            for i in 0..6 {
                for j in 0..6 {
                    a[(i, j)] = Complex64::new(seed[(i + j) % 12], seed[(2 * i + 5 * j) % 12]);
                }
            }
            let rho = (&a * a.adjoint()).unscale(crate::linalg::trace(&(&a * a.adjoint())).re);
            let out = liouvillian_apply(t, &rho, &cache, &model).unwrap();
            prop_assert!(crate::linalg::hermiticity_error(&out) < 1e-12);
            prop_assert!(crate::linalg::trace(&out).norm() < 1e-12);
        }
    }
}
