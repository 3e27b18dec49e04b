use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::bath::BathSpec;
use crate::error::{Error, Result};
use crate::system::{DriveSpec, FOERSTER_MAX_SITES};
use crate::units::mev_to_per_ps;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Single,
    ChainDexterSingle,
    ChainDexterAll,
    ChainFoerster,
    Spectrum,
    CompareEngines,
    Sweep,
}

impl Scenario {
    pub fn is_chain(self) -> bool {
        matches!(
            self,
            Scenario::ChainDexterSingle | Scenario::ChainDexterAll | Scenario::ChainFoerster
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Polaron,
    Heisenberg,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DriveConfig {
    /// Ω, ps⁻¹
    pub rabi: f64,
    /// Laser detuning from |2⟩, ps⁻¹.
    pub detuning2: f64,
    /// Energy offset of |3⟩ relative to |2⟩, meV.
    pub delta_eps: f64,
}

impl Default for DriveConfig {
    fn default() -> Self {
        Self {
            rabi: 0.1,
            detuning2: 0.0,
            delta_eps: -1.0,
        }
    }
}

impl DriveConfig {
    pub fn drive_spec(&self) -> DriveSpec {
        DriveSpec {
            rabi: self.rabi,
            detuning2: self.detuning2,
            detuning3: self.detuning2 + mev_to_per_ps(self.delta_eps),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainConfig {
    pub n_sites: usize,
    /// Interdot coupling, ps⁻¹.
    pub f: f64,
    pub allow_large_foerster: bool,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            n_sites: 4,
            f: 0.1,
            allow_large_foerster: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayConfig {
    /// Radiative rate γ_r, ns⁻¹.
    pub gamma_r: f64,
}

/// Options left as `None` are filled from the scenario by [`RunConfig::resolve`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub n_tau: usize,
    pub tau_max: f64,
    pub n_k: usize,
    pub sample_every: Option<usize>,
    pub kernel_tol: f64,
    pub steady_window: Option<f64>,
    pub steady_tol: f64,
    /// Occupation at which a detuned level counts as transferred.
    pub transfer_threshold: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            dt: None,
            t_end: None,
            n_tau: 10001,
            tau_max: 20.0,
            n_k: 1000,
            sample_every: None,
            kernel_tol: 1e-8,
            steady_window: None,
            steady_tol: 1e-3,
            transfer_threshold: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Flags {
    pub apply_polaron_shift: bool,
    pub site_diagonal_bath: bool,
    pub ablate_sigma23: bool,
    pub intraband_ratio: f64,
}

impl Default for Flags {
    fn default() -> Self {
        Self {
            apply_polaron_shift: true,
            site_diagonal_bath: true,
            ablate_sigma23: false,
            intraband_ratio: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: String,
    pub emit_svg: bool,
    pub emit_rho_snapshots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: "out".into(),
            emit_svg: false,
            emit_rho_snapshots: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSettings {
    pub epsilon: f64,
    pub n_omega: usize,
    /// Half-width of the ω-grid, ps⁻¹.
    pub omega_max: f64,
    pub window: bool,
    /// Local maxima below this fraction of the global maximum are ignored.
    pub peak_rel_height: f64,
}

impl Default for SpectrumSettings {
    fn default() -> Self {
        Self {
            epsilon: 1e-3,
            n_omega: 1601,
            omega_max: 4.0,
            window: true,
            peak_rel_height: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    /// Dotted path into the config document, e.g. `bath.coupling_scale`.
    pub path: String,
    pub values: Vec<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Scenario run at every grid point.
    #[serde(default = "default_sweep_scenario")]
    pub scenario: Scenario,
    pub axes: Vec<SweepAxis>,
}

fn default_sweep_scenario() -> Scenario {
    Scenario::Single
}

pub const MAX_SWEEP_AXES: usize = 3;

/// Longest Heisenberg trajectory accepted, ps.
pub const HEISENBERG_HORIZON: f64 = 200.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub bath: BathSpec,
    pub drive: DriveConfig,
    pub chain: ChainConfig,
    pub decay: DecayConfig,
    pub engine: Option<Engine>,
    pub numerics: Numerics,
    pub flags: Flags,
    pub output: OutputConfig,
    pub spectrum: SpectrumSettings,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario::Single,
            bath: BathSpec::default(),
            drive: DriveConfig::default(),
            chain: ChainConfig::default(),
            decay: DecayConfig::default(),
            engine: None,
            numerics: Numerics::default(),
            flags: Flags::default(),
            output: OutputConfig::default(),
            spectrum: SpectrumSettings::default(),
            sweep: None,
        }
    }
}

/// Parses a JSON document into a validated, fully resolved config.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    parse_config_value(value)
}

pub fn parse_config_value(value: serde_json::Value) -> Result<RunConfig> {
    let raw: RunConfig = serde_json::from_value(value).map_err(json_to_config)?;
    let cfg = raw.resolve();
    cfg.validate()?;
    Ok(cfg)
}

/// serde reports unknown keys and type mismatches without a structured
/// path; pull the offending field name out of the message where possible.
fn json_to_config(e: serde_json::Error) -> Error {
    let msg = e.to_string();
    let path = msg
        .split('`')
        .nth(1)
        .filter(|_| msg.starts_with("unknown field") || msg.starts_with("missing field"))
        .unwrap_or("$")
        .to_string();
    Error::config(path, msg)
}

impl RunConfig {
    pub fn engine(&self) -> Engine {
        self.engine.expect("config not resolved")
    }

    pub fn dt(&self) -> f64 {
        self.numerics.dt.expect("config not resolved")
    }

    pub fn t_end(&self) -> f64 {
        self.numerics.t_end.expect("config not resolved")
    }

    pub fn sample_every(&self) -> usize {
        self.numerics.sample_every.expect("config not resolved")
    }

    pub fn steady_window(&self) -> f64 {
        self.numerics.steady_window.expect("config not resolved")
    }

    /// Scenario actually integrated (sweeps delegate to their point scenario).
    pub fn effective_scenario(&self) -> Scenario {
        match (&self.scenario, &self.sweep) {
            (Scenario::Sweep, Some(s)) => s.scenario,
            (s, _) => *s,
        }
    }

    /// Fills every scenario-dependent default. Idempotent.
    pub fn resolve(mut self) -> Self {
        let scenario = self.effective_scenario();
        self.bath = self.bath.resolved();
        let engine = *self.engine.get_or_insert(match scenario {
            Scenario::Spectrum => Engine::Heisenberg,
            Scenario::CompareEngines => Engine::Both,
            _ => Engine::Polaron,
        });
        let n = &mut self.numerics;
        let dt = *n.dt.get_or_insert(match (scenario, engine) {
            (Scenario::Spectrum, _) => 0.005,
            (_, Engine::Polaron) => 0.01,
            _ => 0.002,
        });
        let t_end = *n.t_end.get_or_insert(match (scenario, engine) {
            (Scenario::Spectrum, _) => 100.0,
            (_, Engine::Heisenberg | Engine::Both) => HEISENBERG_HORIZON,
            (s, _) if s.is_chain() => 1.0e6,
            _ => 2.0e5,
        });
        n.sample_every
            .get_or_insert(((t_end / dt / 2000.0).round() as usize).max(1));
        n.steady_window.get_or_insert(t_end / 10.0);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenario == Scenario::Sweep {
            let sweep = self
                .sweep
                .as_ref()
                .ok_or_else(|| Error::config("sweep", "required when scenario = sweep"))?;
            if sweep.scenario == Scenario::Sweep {
                return Err(Error::config("sweep.scenario", "sweeps cannot be nested"));
            }
            if sweep.axes.is_empty() || sweep.axes.len() > MAX_SWEEP_AXES {
                return Err(Error::config(
                    "sweep.axes",
                    format!("between 1 and {MAX_SWEEP_AXES} axes are supported"),
                ));
            }
            for (i, axis) in sweep.axes.iter().enumerate() {
                if axis.values.is_empty() {
                    return Err(Error::config(format!("sweep.axes[{i}].values"), "must not be empty"));
                }
                if axis.path.is_empty() || axis.path.starts_with("sweep") || axis.path == "scenario" {
                    return Err(Error::config(format!("sweep.axes[{i}].path"), "not a sweepable path"));
                }
            }
        }
        let scenario = self.effective_scenario();
        self.bath.validate()?;
        let d = &self.drive;
        nonneg("drive.rabi", d.rabi)?;
        finite("drive.detuning2", d.detuning2)?;
        finite("drive.delta_eps", d.delta_eps)?;
        self.drive_spec().validate()?;

        if scenario.is_chain() {
            if self.chain.n_sites < 2 {
                return Err(Error::config("chain.n_sites", "chain scenarios need at least 2 sites"));
            }
            if scenario == Scenario::ChainFoerster
                && self.chain.n_sites > FOERSTER_MAX_SITES
                && !self.chain.allow_large_foerster
            {
                return Err(Error::config(
                    "chain.n_sites",
                    format!("Förster chains above {FOERSTER_MAX_SITES} sites need chain.allow_large_foerster"),
                ));
            }
            nonneg("chain.f", self.chain.f)?;
        }
        nonneg("decay.gamma_r", self.decay.gamma_r)?;

        let engine = self.engine();
        match (scenario, engine) {
            (Scenario::Spectrum, Engine::Heisenberg) => {}
            (Scenario::Spectrum, _) => {
                return Err(Error::config("engine", "spectra are computed with the heisenberg engine"))
            }
            (Scenario::CompareEngines, Engine::Both) => {}
            (Scenario::CompareEngines, _) => {
                return Err(Error::config("engine", "compare_engines runs both engines"))
            }
            (Scenario::Single, _) => {}
            (_, Engine::Polaron) => {}
            (_, _) => {
                return Err(Error::config(
                    "engine",
                    "the heisenberg engine covers only single-emitter scenarios",
                ))
            }
        }
        if engine != Engine::Polaron && self.decay.gamma_r > 0.0 {
            return Err(Error::config("decay.gamma_r", "radiative decay is only modelled by the polaron engine"));
        }

        let n = &self.numerics;
        positive("numerics.dt", self.dt())?;
        positive("numerics.t_end", self.t_end())?;
        positive("numerics.tau_max", n.tau_max)?;
        positive("numerics.steady_window", self.steady_window())?;
        positive("numerics.steady_tol", n.steady_tol)?;
        if n.n_tau < 3 {
            return Err(Error::config("numerics.n_tau", "need at least 3 τ nodes"));
        }
        if n.n_k < 8 {
            return Err(Error::config("numerics.n_k", "need at least 8 k-nodes"));
        }
        if self.sample_every() == 0 {
            return Err(Error::config("numerics.sample_every", "must be at least 1"));
        }
        if !(n.kernel_tol > 0.0 && n.kernel_tol < 1.0) {
            return Err(Error::config("numerics.kernel_tol", "must lie in (0, 1)"));
        }
        if !(n.transfer_threshold > 0.0 && n.transfer_threshold < 1.0) {
            return Err(Error::config("numerics.transfer_threshold", "must lie in (0, 1)"));
        }
        if engine != Engine::Polaron && self.t_end() > HEISENBERG_HORIZON {
            return Err(Error::config(
                "numerics.t_end",
                format!("the heisenberg engine is limited to {HEISENBERG_HORIZON} ps"),
            ));
        }
        nonneg("flags.intraband_ratio", self.flags.intraband_ratio)?;
        if engine == Engine::Polaron && (self.flags.ablate_sigma23 || self.flags.intraband_ratio > 0.0) {
            return Err(Error::config(
                "flags",
                "ablate_sigma23 and intraband_ratio apply to the heisenberg engine only",
            ));
        }

        let s = &self.spectrum;
        if !(s.epsilon > 0.0 && s.epsilon < 0.1) {
            return Err(Error::config("spectrum.epsilon", "must lie in (0, 0.1)"));
        }
        if s.n_omega < 3 {
            return Err(Error::config("spectrum.n_omega", "need at least 3 points"));
        }
        positive("spectrum.omega_max", s.omega_max)?;
        if !(s.peak_rel_height > 0.0 && s.peak_rel_height < 1.0) {
            return Err(Error::config("spectrum.peak_rel_height", "must lie in (0, 1)"));
        }
        if self.output.directory.is_empty() {
            return Err(Error::config("output.directory", "must not be empty"));
        }
        Ok(())
    }

    pub fn drive_spec(&self) -> DriveSpec {
        self.drive.drive_spec()
    }

    /// Canonical JSON of the resolved config.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of [`RunConfig::canonical_json`], hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn finite(path: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(path, format!("must be finite, got {v}")))
    }
}

fn nonneg(path: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::config(path, format!("must be finite and non-negative, got {v}")))
    }
}

fn positive(path: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(path, format!("must be finite and positive, got {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_resolves_to_single_emitter_defaults() {
        let cfg = parse_config("{}").unwrap();
        assert_eq!(cfg.scenario, Scenario::Single);
        assert_eq!(cfg.engine(), Engine::Polaron);
        assert_eq!(cfg.bath.temperature, 4.0);
        assert_eq!(cfg.drive.delta_eps, -1.0);
        assert_eq!(cfg.drive.rabi, 0.1);
        assert!((cfg.drive_spec().detuning3 + 1.0 / 0.6582).abs() < 1e-3);
        assert!(cfg.bath.microscopic.is_some());
    }

    #[test]
    fn negative_temperature_names_its_path() {
        let err = parse_config(r#"{"bath": {"temperature": -1}}"#).unwrap_err();
        match err {
            Error::Config { path, .. } => assert_eq!(path, "bath.temperature"),
            e => panic!("unexpected {e}"),
        }
        assert_eq!(parse_config(r#"{"bath": {"temperature": -1}}"#).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for doc in [r#"{"bogus": 1}"#, r#"{"drive": {"omega": 1}}"#, r#"{"numerics": {"dtt": 1}}"#] {
            let err = parse_config(doc).unwrap_err();
            assert!(matches!(err, Error::Config { .. }), "{doc}: {err}");
        }
        match parse_config(r#"{"drive": {"omega": 1}}"#).unwrap_err() {
            Error::Config { path, .. } => assert_eq!(path, "omega"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn resolved_config_round_trips() {
        for doc in [
            "{}",
            r#"{"scenario": "chain_dexter_all", "chain": {"n_sites": 3}}"#,
            r#"{"scenario": "spectrum", "bath": {"kind": "gaussian"}}"#,
            r#"{"scenario": "sweep", "sweep": {"axes": [{"path": "drive.rabi", "values": [0.1, 0.2]}]}}"#,
        ] {
            let a = parse_config(doc).unwrap();
            let b = parse_config(&a.canonical_json()).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.hash(), b.hash());
            assert_eq!(a.clone().resolve(), a);
        }
    }

    #[test]
    fn scenario_requirements_are_checked() {
        let path = |doc: &str| match parse_config(doc).unwrap_err() {
            Error::Config { path, .. } => path,
            e => panic!("unexpected {e}"),
        };
        assert_eq!(path(r#"{"scenario": "chain_dexter_single", "chain": {"n_sites": 1}}"#), "chain.n_sites");
        assert_eq!(path(r#"{"scenario": "chain_foerster", "chain": {"n_sites": 3}}"#), "chain.n_sites");
        assert!(parse_config(
            r#"{"scenario": "chain_foerster", "chain": {"n_sites": 3, "allow_large_foerster": true}}"#
        )
        .is_ok());
        assert_eq!(path(r#"{"scenario": "chain_dexter_all", "engine": "heisenberg"}"#), "engine");
        assert_eq!(path(r#"{"scenario": "spectrum", "engine": "polaron"}"#), "engine");
        assert_eq!(path(r#"{"engine": "heisenberg", "numerics": {"t_end": 500}}"#), "numerics.t_end");
        assert_eq!(path(r#"{"engine": "heisenberg", "decay": {"gamma_r": 0.1}}"#), "decay.gamma_r");
        assert_eq!(path(r#"{"scenario": "sweep"}"#), "sweep");
        assert_eq!(
            path(r#"{"scenario": "sweep", "sweep": {"axes": [{"path": "a", "values": [1]}, {"path": "b", "values": [1]}, {"path": "c", "values": [1]}, {"path": "d", "values": [1]}]}}"#),
            "sweep.axes"
        );
        assert_eq!(path(r#"{"numerics": {"dt": 0}}"#), "numerics.dt");
    }

    #[test]
    fn defaults_depend_on_scenario() {
        let single = parse_config("{}").unwrap();
        let chain = parse_config(r#"{"scenario": "chain_dexter_single"}"#).unwrap();
        let heis = parse_config(r#"{"engine": "heisenberg"}"#).unwrap();
        assert!(chain.t_end() > single.t_end());
        assert_eq!(heis.t_end(), HEISENBERG_HORIZON);
        assert_eq!(heis.dt(), 0.002);
        assert_eq!(single.steady_window(), single.t_end() / 10.0);
    }

    #[test]
    fn parametric_kind_gets_parametric_block() {
        let cfg = parse_config(r#"{"bath": {"kind": "lorentzian"}}"#).unwrap();
        assert!(cfg.bath.parametric.is_some() && cfg.bath.microscopic.is_none());
        let err = parse_config(r#"{"bath": {"kind": "gaussian", "microscopic": {}}}"#).unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }
}
