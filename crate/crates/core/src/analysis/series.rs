use serde::Serialize;

use crate::linalg::CMat;
use crate::system::LevelScheme;

/// Worst invariant values seen over a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub min_population: f64,
    pub max_population: f64,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Self {
            max_trace_error: 0.0,
            max_hermiticity_error: 0.0,
            min_eigenvalue: f64::INFINITY,
            min_population: f64::INFINITY,
            max_population: f64::NEG_INFINITY,
        }
    }
}

/// Sampled real observables on a common time grid.
#[derive(Debug, Clone, Default)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    pub channels: Vec<String>,
    /// `values[c][n]` is channel `c` at sample `n`.
    pub values: Vec<Vec<f64>>,
    /// Full density matrices at each sample, when retained.
    pub snapshots: Option<Vec<CMat>>,
    pub diagnostics: Diagnostics,
    pub metadata: serde_json::Value,
}

impl TimeSeries {
    pub fn new(channels: Vec<String>) -> Self {
        let values = vec![Vec::new(); channels.len()];
        Self {
            channels,
            values,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn push(&mut self, t: f64, sample: &[f64]) {
        assert_eq!(sample.len(), self.channels.len(), "sample width mismatch");
        self.t.push(t);
        for (col, &v) in self.values.iter_mut().zip(sample) {
            col.push(v);
        }
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels
            .iter()
            .position(|c| c == name)
            .map(|i| self.values[i].as_slice())
    }

    pub fn add_channel(&mut self, name: impl Into<String>, data: Vec<f64>) {
        assert_eq!(data.len(), self.t.len(), "channel length mismatch");
        self.channels.push(name.into());
        self.values.push(data);
    }

    pub fn last(&self, name: &str) -> Option<f64> {
        self.channel(name).and_then(|c| c.last().copied())
    }

    /// Linear interpolation of a channel at time `t` (clamped to the range).
    pub fn interpolate(&self, name: &str, t: f64) -> Option<f64> {
        let y = self.channel(name)?;
        interpolate(&self.t, y, t)
    }
}

pub(crate) fn interpolate(ts: &[f64], y: &[f64], t: f64) -> Option<f64> {
    if ts.is_empty() {
        return None;
    }
    if t <= ts[0] {
        return Some(y[0]);
    }
    if t >= ts[ts.len() - 1] {
        return Some(y[y.len() - 1]);
    }
    let k = ts.partition_point(|&s| s <= t);
    let (t0, t1) = (ts[k - 1], ts[k]);
    let w = (t - t0) / (t1 - t0);
    Some(y[k - 1] * (1.0 - w) + y[k] * w)
}

pub fn occupation_channel(site: usize, level: usize) -> String {
    format!("occ_s{}_l{}", site + 1, level)
}

/// Occupation channels followed by site-local coherence channels.
pub fn density_channels(scheme: &LevelScheme) -> Vec<String> {
    let mut names = Vec::new();
    for l in 0..scheme.n_sites {
        for i in scheme.min_level()..=3 {
            names.push(occupation_channel(l, i));
        }
    }
    for l in 0..scheme.n_sites {
        for (a, b) in [(1, 2), (1, 3), (2, 3)] {
            names.push(format!("re_rho{a}{b}_s{}", l + 1));
            names.push(format!("im_rho{a}{b}_s{}", l + 1));
        }
    }
    names
}

/// Reduced single-site element ⟨a|ρ_l|b⟩.
pub fn site_element(scheme: &LevelScheme, rho: &CMat, site: usize, a: usize, b: usize) -> num_complex::Complex64 {
    scheme
        .site_transition_pairs(site, a, b)
        .into_iter()
        .map(|(r, c)| rho[(r, c)])
        .sum()
}

/// Observables in the order of [`density_channels`].
pub fn observe_density(scheme: &LevelScheme, rho: &CMat) -> Vec<f64> {
    let mut out = Vec::new();
    for l in 0..scheme.n_sites {
        for i in scheme.min_level()..=3 {
            out.push(site_element(scheme, rho, l, i, i).re);
        }
    }
    for l in 0..scheme.n_sites {
        for (a, b) in [(1, 2), (1, 3), (2, 3)] {
            let z = site_element(scheme, rho, l, a, b);
            out.push(z.re);
            out.push(z.im);
        }
    }
    out
}
