use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::analysis::{compare_engines, EngineComparison, TimeSeries};
use crate::error::{Error, Result};
use crate::heisenberg::Spectrum;
use crate::linalg::CMat;

/// Writes through a temporary sibling and renames it into place, so readers
/// never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Internal(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// 12 significant digits.
fn num(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn timeseries_csv(series: &TimeSeries, hash: &str) -> String {
    let mut s = String::new();
    writeln!(s, "# config_sha256={hash}").unwrap();
    s.push_str("t_ps");
    for c in &series.channels {
        s.push(',');
        s.push_str(c);
    }
    s.push('\n');
    for (n, t) in series.t.iter().enumerate() {
        s.push_str(&num(*t));
        for col in &series.values {
            s.push(',');
            s.push_str(&num(col[n]));
        }
        s.push('\n');
    }
    s
}

pub fn write_timeseries_csv(path: &Path, series: &TimeSeries, hash: &str) -> Result<()> {
    write_atomic(path, timeseries_csv(series, hash).as_bytes())
}

/// Reads a CSV written by [`write_timeseries_csv`].
pub fn read_timeseries_csv(path: &Path) -> Result<TimeSeries> {
    let text = std::fs::read_to_string(path)?;
    let bad = |line: usize, msg: &str| Error::Domain(format!("{}:{line}: {msg}", path.display()));
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.starts_with('#') && !l.is_empty());
    let (_, header) = lines.next().ok_or_else(|| bad(1, "missing header"))?;
    let mut cols = header.split(',');
    if cols.next() != Some("t_ps") {
        return Err(bad(1, "first column must be t_ps"));
    }
    let mut series = TimeSeries::new(cols.map(str::to_string).collect());
    for (i, line) in lines {
        let vals: std::result::Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
        let vals = vals.map_err(|_| bad(i + 1, "unparsable number"))?;
        if vals.len() != series.channels.len() + 1 {
            return Err(bad(i + 1, "wrong number of columns"));
        }
        series.push(vals[0], &vals[1..]);
    }
    Ok(series)
}

pub fn write_spectrum_csv(path: &Path, v: &Spectrum, ibm: &Spectrum, hash: &str) -> Result<()> {
    let mut s = String::new();
    writeln!(s, "# config_sha256={hash}").unwrap();
    s.push_str("omega_per_ps,alpha,alpha_ibm\n");
    for ((w, a), b) in v.omega.iter().zip(&v.alpha).zip(&ibm.alpha) {
        writeln!(s, "{},{},{}", num(*w), num(*a), num(*b)).unwrap();
    }
    write_atomic(path, s.as_bytes())
}

#[derive(Serialize)]
struct Snapshot {
    t: f64,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct Snapshots<'a> {
    config_sha256: &'a str,
    snapshots: Vec<Snapshot>,
}

pub fn write_snapshots(path: &Path, t: &[f64], rho: &[CMat], hash: &str) -> Result<()> {
    let part = |m: &CMat, f: fn(&num_complex::Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| f(&m[(r, c)])).collect()).collect()
    };
    let doc = Snapshots {
        config_sha256: hash,
        snapshots: t
            .iter()
            .zip(rho)
            .map(|(&t, m)| Snapshot {
                t,
                re: part(m, |z| z.re),
                im: part(m, |z| z.im),
            })
            .collect(),
    };
    write_atomic(path, serde_json::to_string(&doc)?.as_bytes())
}

/// Compares the occupation channels two run directories have in common.
pub fn compare_dirs(a: &Path, b: &Path) -> Result<EngineComparison> {
    let sa = read_timeseries_csv(&a.join("timeseries.csv"))?;
    let sb = read_timeseries_csv(&b.join("timeseries.csv"))?;
    let common: Vec<&str> = sa
        .channels
        .iter()
        .filter(|c| c.contains("occ_") && sb.channels.contains(c))
        .map(String::as_str)
        .collect();
    if common.is_empty() {
        return Err(Error::Domain("the two runs share no occupation channels".into()));
    }
    compare_engines(&sa, &sb, &common)
}
