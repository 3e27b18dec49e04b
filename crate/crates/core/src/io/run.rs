use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::artifacts::{write_atomic, write_snapshots, write_spectrum_csv, write_timeseries_csv};
use super::config::{Engine, RunConfig, Scenario, HEISENBERG_HORIZON};
use super::svg::{line_plot, Line};
use crate::analysis::{
    compare_engines, dressed_populations, find_steady_state, occupation_channel, transfer_metrics,
    Diagnostics, SteadyState, TimeSeries, TransferMetrics,
};
use crate::bath::{build_correlation_tables, build_kgrid, CorrelationTables};
use crate::error::{Error, Result};
use crate::heisenberg::{
    absorption_spectrum, evolve_heisenberg, ibm_reference_spectrum, significant_maxima,
    HeisenbergOptions, HeisenbergRun, HeisenbergState, Spectrum, SpectrumConfig,
};
use crate::polaron::{evolve, precompute_kernel, EvolveOptions};
use crate::system::{
    build_dexter_all_chain, build_dexter_single_chain, build_foerster_chain, build_single,
    dressed_basis, PolaronDressing, SystemModel,
};

/// Tolerance on the spread of steady ground occupations across sites.
pub const GROUND_EQUAL_TOL: f64 = 0.02;

#[derive(Debug, Clone, Serialize)]
pub struct ChannelDiffSummary {
    pub channel: String,
    pub max_abs_diff: f64,
    pub t_at_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumSummary {
    /// Frequencies of the local maxima above the relative height threshold.
    pub maxima: Vec<f64>,
    pub peak_omega: f64,
    pub ibm_maxima: Vec<f64>,
    pub ibm_peak_omega: f64,
    /// ω-grid spacing, ps⁻¹.
    pub resolution: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BathSummary {
    pub polaron_factor: f64,
    /// ps⁻¹
    pub polaron_shift: f64,
    pub memory_cutoff_ps: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub config_sha256: String,
    pub scenario: Scenario,
    pub engine: Engine,
    pub config: RunConfig,
    pub bath: BathSummary,
    pub channels: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steady_state: Option<SteadyState>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transfer: Option<TransferMetrics>,
    /// Worst invariant values per engine.
    pub diagnostics: BTreeMap<String, Diagnostics>,
    /// Chains: steady state reached with every site's ground level above its
    /// excited levels, i.e. no inversion feeding a current.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub no_steady_current: Option<bool>,
    /// Chains: steady ground occupations agree within [`GROUND_EQUAL_TOL`].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ground_occupations_equal: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Vec<ChannelDiffSummary>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSummary>,
}

/// Everything a run computes, before anything touches the disk.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub summary: Summary,
    /// Time series written to `timeseries.csv`; for engine comparisons the
    /// channels carry `polaron_`/`heisenberg_` prefixes.
    pub series: Option<TimeSeries>,
    pub spectrum: Option<(Spectrum, Spectrum)>,
}

fn polaron_tables(cfg: &RunConfig) -> Result<CorrelationTables> {
    let n = &cfg.numerics;
    build_correlation_tables(&cfg.bath, n.tau_max, n.n_tau, n.kernel_tol)
}

fn dressing(cfg: &RunConfig, tables: &CorrelationTables) -> PolaronDressing {
    PolaronDressing {
        factor: tables.polaron_factor,
        shift: if cfg.flags.apply_polaron_shift {
            tables.polaron_shift
        } else {
            0.0
        },
    }
}

fn bath_summary(tables: &CorrelationTables) -> BathSummary {
    BathSummary {
        polaron_factor: tables.polaron_factor,
        polaron_shift: tables.polaron_shift,
        memory_cutoff_ps: tables.tau[tables.memory_cutoff_index],
    }
}

fn polaron_model(cfg: &RunConfig, dressing: PolaronDressing) -> Result<SystemModel> {
    let drive = cfg.drive_spec();
    let c = &cfg.chain;
    let model = match cfg.effective_scenario() {
        Scenario::ChainDexterSingle => build_dexter_single_chain(c.n_sites, drive, c.f, dressing)?,
        Scenario::ChainDexterAll => build_dexter_all_chain(c.n_sites, drive, c.f, dressing)?,
        Scenario::ChainFoerster => {
            build_foerster_chain(c.n_sites, drive, c.f, dressing, c.allow_large_foerster)?
        }
        _ => build_single(drive, dressing),
    };
    if cfg.decay.gamma_r > 0.0 {
        model.with_decay(cfg.decay.gamma_r)
    } else {
        Ok(model)
    }
}

fn run_polaron(cfg: &RunConfig, tables: &CorrelationTables) -> Result<TimeSeries> {
    let model = polaron_model(cfg, dressing(cfg, tables))?;
    let single = model.scheme.n_sites == 1;
    let cache = precompute_kernel(&model, tables, cfg.flags.site_diagonal_bath)?;
    let opts = EvolveOptions {
        sample_every: cfg.sample_every(),
        keep_snapshots: single || cfg.output.emit_rho_snapshots,
        ..Default::default()
    };
    let mut series = evolve(&model, &cache, &model.scheme.initial_state(), cfg.t_end(), cfg.dt(), &opts)?;
    if single {
        dressed_populations(&mut series, &dressed_basis())?;
    }
    if !cfg.output.emit_rho_snapshots {
        series.snapshots = None;
    }
    Ok(series)
}

fn heisenberg_options(cfg: &RunConfig) -> HeisenbergOptions {
    HeisenbergOptions {
        intraband_ratio: cfg.flags.intraband_ratio,
        ablate_sigma23: cfg.flags.ablate_sigma23,
    }
}

fn run_heisenberg(cfg: &RunConfig) -> Result<TimeSeries> {
    let kgrid = build_kgrid(&cfg.bath, cfg.numerics.n_k)?;
    let model = build_single(cfg.drive_spec(), PolaronDressing::bare());
    let run = HeisenbergRun {
        t_end: cfg.t_end(),
        dt: cfg.dt(),
        sample_every: cfg.sample_every(),
        horizon: HEISENBERG_HORIZON,
    };
    evolve_heisenberg(&model, &kgrid, &HeisenbergState::ground(kgrid.len()), &run, &heisenberg_options(cfg))
}

fn run_spectrum(cfg: &RunConfig) -> Result<(Spectrum, Spectrum, CorrelationTables)> {
    let t_end = cfg.t_end();
    let dt = cfg.dt();
    let n_tau = (t_end / dt).round() as usize + 1;
    let tables = build_correlation_tables(&cfg.bath, t_end, n_tau, cfg.numerics.kernel_tol)?;
    // The phonon-dressed zero-phonon line sits at Δ − shift; moving the frame
    // by the shift puts it at the origin.
    let mut drive = cfg.drive_spec();
    if cfg.flags.apply_polaron_shift {
        drive.detuning2 += tables.polaron_shift;
        drive.detuning3 += tables.polaron_shift;
    }
    let kgrid = build_kgrid(&cfg.bath, cfg.numerics.n_k)?;
    let s = &cfg.spectrum;
    let scfg = SpectrumConfig {
        epsilon: s.epsilon,
        t_end,
        dt,
        n_omega: s.n_omega,
        omega_max: s.omega_max,
        window: s.window,
    };
    let v = absorption_spectrum(&drive, &kgrid, &scfg, &heisenberg_options(cfg))?;
    let ibm = ibm_reference_spectrum(&tables, &v.omega, s.window);
    Ok((v, ibm, tables))
}

fn argmax(y: &[f64]) -> usize {
    (0..y.len()).fold(0, |best, i| if y[i] > y[best] { i } else { best })
}

fn summarize_spectrum(v: &Spectrum, ibm: &Spectrum, rel: f64) -> SpectrumSummary {
    SpectrumSummary {
        maxima: significant_maxima(&v.alpha, rel).into_iter().map(|i| v.omega[i]).collect(),
        peak_omega: v.omega[argmax(&v.alpha)],
        ibm_maxima: significant_maxima(&ibm.alpha, rel).into_iter().map(|i| ibm.omega[i]).collect(),
        ibm_peak_omega: ibm.omega[argmax(&ibm.alpha)],
        resolution: v.omega[1] - v.omega[0],
    }
}

fn prefixed(series: &TimeSeries, prefix: &str) -> TimeSeries {
    let mut out = series.clone();
    out.channels = series.channels.iter().map(|c| format!("{prefix}{c}")).collect();
    out.snapshots = None;
    out
}

/// Joins two series sampled on the same grid column-wise.
fn join(a: TimeSeries, b: &TimeSeries) -> Result<TimeSeries> {
    if a.t.len() != b.t.len() || a.t.iter().zip(&b.t).any(|(x, y)| (x - y).abs() > 1e-9) {
        return Err(Error::Internal("engine series are sampled on different grids".into()));
    }
    let mut out = a;
    for (name, col) in b.channels.iter().zip(&b.values) {
        out.add_channel(name.clone(), col.clone());
    }
    Ok(out)
}

/// Chain-level flags derived from the steady state.
fn chain_flags(steady: &SteadyState, n_sites: usize) -> (bool, bool) {
    let get = |l: usize, i: usize| steady.values.get(&occupation_channel(l, i)).copied().unwrap_or(f64::NAN);
    let grounds: Vec<f64> = (0..n_sites).map(|l| get(l, 1)).collect();
    let no_current = steady.reached && (0..n_sites).all(|l| get(l, 1) > get(l, 2) && get(l, 1) > get(l, 3));
    let lo = grounds.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grounds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (no_current, hi - lo <= GROUND_EQUAL_TOL)
}

/// Runs the configured scenario in memory.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput> {
    let scenario = cfg.effective_scenario();
    let engine = cfg.engine();
    let mut diagnostics = BTreeMap::new();
    let summary_bath;
    let mut steady_state = None;
    let mut transfer = None;
    let mut flags = (None, None);
    let mut comparison = None;
    let mut spectrum_summary = None;
    let mut spectrum = None;

    let series = match (scenario, engine) {
        (Scenario::Spectrum, _) => {
            let (v, ibm, tables) = run_spectrum(cfg)?;
            summary_bath = bath_summary(&tables);
            spectrum_summary = Some(summarize_spectrum(&v, &ibm, cfg.spectrum.peak_rel_height));
            spectrum = Some((v, ibm));
            None
        }
        (Scenario::CompareEngines, _) => {
            let tables = polaron_tables(cfg)?;
            summary_bath = bath_summary(&tables);
            let p = run_polaron(cfg, &tables)?;
            let h = run_heisenberg(cfg)?;
            let occ: Vec<String> = (1..=3).map(|i| occupation_channel(0, i)).collect();
            let names: Vec<&str> = occ.iter().map(String::as_str).collect();
            let cmp = compare_engines(&p, &h, &names)?;
            comparison = Some(
                cmp.channels
                    .iter()
                    .map(|c| ChannelDiffSummary {
                        channel: c.channel.clone(),
                        max_abs_diff: c.max_abs_diff,
                        t_at_max: c.t_at_max,
                    })
                    .collect(),
            );
            diagnostics.insert("polaron".to_string(), p.diagnostics);
            diagnostics.insert("heisenberg".to_string(), h.diagnostics);
            steady_state = Some(find_steady_state(&p, cfg.steady_window(), cfg.numerics.steady_tol));
            Some(join(prefixed(&p, "polaron_"), &prefixed(&h, "heisenberg_"))?)
        }
        (_, Engine::Heisenberg) => {
            let tables = polaron_tables(cfg)?;
            summary_bath = bath_summary(&tables);
            let h = run_heisenberg(cfg)?;
            diagnostics.insert("heisenberg".to_string(), h.diagnostics);
            steady_state = Some(find_steady_state(&h, cfg.steady_window(), cfg.numerics.steady_tol));
            Some(h)
        }
        (_, _) => {
            let tables = polaron_tables(cfg)?;
            summary_bath = bath_summary(&tables);
            let p = run_polaron(cfg, &tables)?;
            diagnostics.insert("polaron".to_string(), p.diagnostics);
            let steady = find_steady_state(&p, cfg.steady_window(), cfg.numerics.steady_tol);
            if scenario.is_chain() {
                let model = polaron_model(cfg, PolaronDressing::bare())?;
                transfer = Some(transfer_metrics(
                    &p,
                    &model.scheme,
                    cfg.numerics.transfer_threshold,
                    cfg.steady_window(),
                )?);
                let (a, b) = chain_flags(&steady, cfg.chain.n_sites);
                flags = (Some(a), Some(b));
            }
            steady_state = Some(steady);
            Some(p)
        }
    };

    let summary = Summary {
        config_sha256: cfg.hash(),
        scenario,
        engine,
        config: cfg.clone(),
        bath: summary_bath,
        channels: series.as_ref().map(|s| s.channels.clone()).unwrap_or_default(),
        steady_state,
        transfer,
        diagnostics,
        no_steady_current: flags.0,
        ground_occupations_equal: flags.1,
        comparison,
        spectrum: spectrum_summary,
    };
    Ok(RunOutput {
        summary,
        series,
        spectrum,
    })
}

/// Runs the scenario and writes its artifacts into `out_dir` (or the
/// config's output directory). Nothing is written if the run fails.
pub fn run_scenario(cfg: &RunConfig, out_dir: Option<&Path>) -> Result<(PathBuf, Summary)> {
    let dir = out_dir
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
    let out = execute(cfg)?;
    write_outputs(&dir, cfg, &out)?;
    Ok((dir, out.summary))
}

pub(crate) fn write_outputs(dir: &Path, cfg: &RunConfig, out: &RunOutput) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let hash = &out.summary.config_sha256;
    if let Some(series) = &out.series {
        write_timeseries_csv(&dir.join("timeseries.csv"), series, hash)?;
        if cfg.output.emit_rho_snapshots {
            if let Some(snaps) = &series.snapshots {
                write_snapshots(&dir.join("rho_snapshots.json"), &series.t, snaps, hash)?;
            }
        }
        if cfg.output.emit_svg {
            let lines: Vec<Line> = series
                .channels
                .iter()
                .zip(&series.values)
                .filter(|(name, _)| name.contains("occ_") || name.starts_with("dressed_"))
                .map(|(name, col)| Line {
                    label: name.clone(),
                    x: &series.t,
                    y: col,
                })
                .collect();
            let svg = line_plot(&lines, "t (ps)", "occupation", hash);
            write_atomic(&dir.join("plot.svg"), svg.as_bytes())?;
        }
    }
    if let Some((v, ibm)) = &out.spectrum {
        write_spectrum_csv(&dir.join("spectrum.csv"), v, ibm, hash)?;
        if cfg.output.emit_svg {
            let (nv, ni) = (normalized(&v.alpha), normalized(&ibm.alpha));
            let lines = [
                Line {
                    label: "v_emitter".into(),
                    x: &v.omega,
                    y: &nv,
                },
                Line {
                    label: "ibm".into(),
                    x: &ibm.omega,
                    y: &ni,
                },
            ];
            let svg = line_plot(&lines, "ω (1/ps)", "absorption (normalized)", hash);
            write_atomic(&dir.join("plot.svg"), svg.as_bytes())?;
        }
    }
    let json = serde_json::to_string_pretty(&out.summary)?;
    write_atomic(&dir.join("summary.json"), json.as_bytes())?;
    Ok(())
}

pub(crate) fn normalized(y: &[f64]) -> Vec<f64> {
    let top = y.iter().copied().fold(0.0_f64, |a, b| a.max(b.abs()));
    if top > 0.0 {
        y.iter().map(|v| v / top).collect()
    } else {
        y.to_vec()
    }
}
