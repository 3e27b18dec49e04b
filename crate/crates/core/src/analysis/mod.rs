//! Observable extraction and post-processing of sampled trajectories.

mod series;

pub use series::{
    density_channels, observe_density, occupation_channel, site_element, Diagnostics, TimeSeries,
};

use std::collections::BTreeMap;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::system::LevelScheme;

pub const DRESSED_CHANNELS: [&str; 3] = ["dressed_minus", "dressed_plus", "dressed_dark"];

/// Appends ⟨v|ρ|v⟩ for each dressed state, computed from retained snapshots.
pub fn dressed_populations(series: &mut TimeSeries, basis: &[DVector<Complex64>; 3]) -> Result<()> {
    let snaps = series.snapshots.as_ref().ok_or_else(|| {
        Error::config(
            "output.emit_rho_snapshots",
            "dressed populations need density-matrix snapshots",
        )
    })?;
    let mut cols = vec![Vec::with_capacity(snaps.len()); 3];
    for rho in snaps {
        if rho.nrows() != 3 {
            return Err(Error::config("scenario", "dressed populations are defined for a single emitter"));
        }
        for (col, v) in cols.iter_mut().zip(basis) {
            col.push((v.adjoint() * rho * v)[(0, 0)].re);
        }
    }
    for (name, col) in DRESSED_CHANNELS.iter().zip(cols) {
        series.add_channel(*name, col);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyState {
    pub reached: bool,
    /// Earliest sample from which every channel stays within `tol` to the end.
    pub t_reached: Option<f64>,
    /// Means over the trailing window.
    pub values: BTreeMap<String, f64>,
}

/// A run is steady when every channel's peak-to-peak variation over the
/// trailing `window` is below `tol`.
pub fn find_steady_state(series: &TimeSeries, window: f64, tol: f64) -> SteadyState {
    let n = series.len();
    let mut values = BTreeMap::new();
    if n < 2 {
        return SteadyState {
            reached: false,
            t_reached: None,
            values,
        };
    }
    let t_end = series.t[n - 1];
    let start = series.t.partition_point(|&t| t < t_end - window);
    for (name, col) in series.channels.iter().zip(&series.values) {
        let tail = &col[start..];
        values.insert(name.clone(), tail.iter().sum::<f64>() / tail.len() as f64);
    }
    let long_enough = t_end - series.t[0] >= 2.0 * window;

    // Walk backwards while all running ranges stay below tol.
    let mut lo: Vec<f64> = series.values.iter().map(|c| c[n - 1]).collect();
    let mut hi = lo.clone();
    let mut first_ok = n - 1;
    for k in (0..n).rev() {
        let mut ok = true;
        for (c, col) in series.values.iter().enumerate() {
            lo[c] = lo[c].min(col[k]);
            hi[c] = hi[c].max(col[k]);
            if hi[c] - lo[c] >= tol {
                ok = false;
            }
        }
        if !ok {
            break;
        }
        first_ok = k;
    }
    let t_reached = series.t[first_ok];
    let reached = long_enough && t_reached <= t_end - window;
    SteadyState {
        reached,
        t_reached: reached.then_some(t_reached),
        values,
    }
}

/// First time a channel reaches `threshold`, interpolated between samples.
pub fn crossing_time(t: &[f64], y: &[f64], threshold: f64) -> Option<f64> {
    if y.first().is_some_and(|&v| v >= threshold) {
        return Some(t[0]);
    }
    t.windows(2).zip(y.windows(2)).find_map(|(ts, ys)| {
        (ys[0] < threshold && ys[1] >= threshold)
            .then(|| ts[0] + (threshold - ys[0]) / (ys[1] - ys[0]) * (ts[1] - ts[0]))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferMetrics {
    pub threshold: f64,
    /// Per site, first time the detuned level |3⟩ reaches the threshold.
    pub t_half: Vec<Option<f64>>,
    pub final_occupations: BTreeMap<String, f64>,
    /// Trailing-window mean of the last site's detuned level.
    pub last_site_inversion: f64,
}

pub fn transfer_metrics(
    series: &TimeSeries,
    scheme: &LevelScheme,
    threshold: f64,
    window: f64,
) -> Result<TransferMetrics> {
    let steady = find_steady_state(series, window, f64::INFINITY);
    let mut t_half = Vec::with_capacity(scheme.n_sites);
    let mut final_occupations = BTreeMap::new();
    for l in 0..scheme.n_sites {
        let name = occupation_channel(l, 3);
        let y = series
            .channel(&name)
            .ok_or_else(|| Error::config("scenario", format!("series lacks channel {name}")))?;
        t_half.push(crossing_time(&series.t, y, threshold));
        for i in scheme.min_level()..=3 {
            let name = occupation_channel(l, i);
            if let Some(v) = series.last(&name) {
                final_occupations.insert(name, v);
            }
        }
    }
    let last = occupation_channel(scheme.n_sites - 1, 3);
    Ok(TransferMetrics {
        threshold,
        t_half,
        final_occupations,
        last_site_inversion: steady.values.get(&last).copied().unwrap_or(f64::NAN),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelDiff {
    pub channel: String,
    pub max_abs_diff: f64,
    pub t_at_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineComparison {
    pub channels: Vec<ChannelDiff>,
    /// Sample times the comparison was evaluated on.
    pub grid: Vec<f64>,
}

impl EngineComparison {
    pub fn max_abs_diff(&self) -> f64 {
        self.channels.iter().map(|c| c.max_abs_diff).fold(0.0, f64::max)
    }
}

/// Max abs difference per channel, evaluated on the coarser of the two grids
/// restricted to the overlap, with the finer series interpolated linearly.
pub fn compare_engines(a: &TimeSeries, b: &TimeSeries, channels: &[&str]) -> Result<EngineComparison> {
    let (Some(&a0), Some(&a1), Some(&b0), Some(&b1)) = (a.t.first(), a.t.last(), b.t.first(), b.t.last())
    else {
        return Err(Error::Domain("cannot compare empty series".into()));
    };
    let (lo, hi) = (a0.max(b0), a1.min(b1));
    if lo > hi {
        return Err(Error::Domain(format!(
            "time ranges [{a0}, {a1}] and [{b0}, {b1}] do not overlap"
        )));
    }
    let inside = |s: &TimeSeries| -> Vec<f64> {
        s.t.iter().copied().filter(|&t| t >= lo && t <= hi).collect()
    };
    let (ga, gb) = (inside(a), inside(b));
    // Coarser grid wins; ties are broken on the grid values so the choice
    // does not depend on argument order.
    let grid = match ga.len().cmp(&gb.len()) {
        std::cmp::Ordering::Less => ga,
        std::cmp::Ordering::Greater => gb,
        std::cmp::Ordering::Equal => {
            if ga.iter().zip(&gb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne())
                == Some(std::cmp::Ordering::Greater)
            {
                gb
            } else {
                ga
            }
        }
    };
    let mut out = Vec::with_capacity(channels.len());
    for &name in channels {
        let (Some(ya), Some(yb)) = (a.channel(name), b.channel(name)) else {
            return Err(Error::Domain(format!("channel {name} missing from one of the series")));
        };
        let mut best = ChannelDiff {
            channel: name.to_string(),
            max_abs_diff: 0.0,
            t_at_max: grid.first().copied().unwrap_or(lo),
        };
        for &t in &grid {
            let va = series::interpolate(&a.t, ya, t).unwrap();
            let vb = series::interpolate(&b.t, yb, t).unwrap();
            let d = (va - vb).abs();
            if d > best.max_abs_diff {
                best.max_abs_diff = d;
                best.t_at_max = t;
            }
        }
        out.push(best);
    }
    Ok(EngineComparison {
        channels: out,
        grid,
    })
}
