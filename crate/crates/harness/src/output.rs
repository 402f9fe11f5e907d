//! Result files.
//!
//! A study directory holds `power.csv` (one row per series, dimension and
//! kind), `timings.csv` (test seconds for the same rows, kept apart so
//! `power.csv` is byte-for-byte reproducible) and `plots/<series>.dat`
//! (whitespace-separated, `log2(d)` then one power column per kind).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use balldiv::DistanceKind;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::study::PowerCurve;

#[derive(Serialize)]
struct PowerRow<'a> {
    scenario: &'a str,
    d: usize,
    n: usize,
    m: usize,
    kind: DistanceKind,
    reps: usize,
    rejections: usize,
    power: f64,
    se: f64,
    #[serde(rename = "meanP")]
    mean_p: f64,
}

#[derive(Serialize)]
struct TimingRow<'a> {
    scenario: &'a str,
    d: usize,
    kind: DistanceKind,
    seconds: f64,
}

fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).map_err(|source| Error::Csv {
            path: PathBuf::from("<memory>"),
            source,
        })?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::io("<memory>", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn power_table(curves: &[PowerCurve]) -> Result<String> {
    to_csv(curves.iter().map(|c| PowerRow {
        scenario: &c.scenario,
        d: c.d,
        n: c.n,
        m: c.m,
        kind: c.kind,
        reps: c.reps,
        rejections: c.rejections,
        power: c.power,
        se: c.se,
        mean_p: c.mean_p,
    }))
}

pub fn timing_table(curves: &[PowerCurve]) -> Result<String> {
    to_csv(curves.iter().map(|c| TimingRow {
        scenario: &c.scenario,
        d: c.d,
        kind: c.kind,
        seconds: c.seconds,
    }))
}

fn file_stem(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "-_.=".contains(c) { c } else { '_' })
        .collect();
    s.trim_matches('_').to_string()
}

fn first_seen<T: PartialEq + Clone>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for item in items {
        if !out.contains(&item) {
            out.push(item);
        }
    }
    out
}

/// One `(file name, contents)` per series.
pub fn plot_panels(curves: &[PowerCurve]) -> Vec<(String, String)> {
    first_seen(curves.iter().map(|c| c.scenario.clone()))
        .into_iter()
        .map(|label| {
            let rows: Vec<&PowerCurve> = curves.iter().filter(|c| c.scenario == label).collect();
            let kinds = first_seen(rows.iter().map(|c| c.kind));
            let dims = first_seen(rows.iter().map(|c| (c.d, c.n, c.m)));
            let mut text = format!("# power of {label}; x = log2(d), one column per distance kind\n# log2_d d n m");
            for k in &kinds {
                let _ = write!(text, " {k}");
            }
            text.push('\n');
            for (d, n, m) in dims {
                let _ = write!(text, "{} {d} {n} {m}", (d as f64).log2());
                for k in &kinds {
                    match rows.iter().find(|c| c.d == d && c.kind == *k) {
                        Some(c) => {
                            let _ = write!(text, " {}", c.power);
                        }
                        None => text.push_str(" NaN"),
                    }
                }
                text.push('\n');
            }
            (format!("{}.dat", file_stem(&label)), text)
        })
        .collect()
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes all study files under `dir` and returns their paths.
pub fn write_study(dir: &Path, curves: &[PowerCurve]) -> Result<Vec<PathBuf>> {
    let plots = dir.join("plots");
    std::fs::create_dir_all(&plots).map_err(|e| Error::io(&plots, e))?;
    let mut written = Vec::new();
    for (name, contents) in [("power.csv", power_table(curves)?), ("timings.csv", timing_table(curves)?)] {
        let path = dir.join(name);
        write_file(&path, &contents)?;
        written.push(path);
    }
    for (name, contents) in plot_panels(curves) {
        let path = plots.join(name);
        write_file(&path, &contents)?;
        written.push(path);
    }
    Ok(written)
}

/// Writes `value` as pretty JSON to `dir/name`.
pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(&path, &text)?;
    Ok(path)
}
