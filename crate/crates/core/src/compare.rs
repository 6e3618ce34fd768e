//! Classical against quantum traces on a common grid.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::series::{interpolate, TimeSeries};

/// Linear interpolation of `(x, y)` onto `grid`; `None` outside `x`.
pub fn resample(x: &[f64], y: &[f64], grid: &[f64]) -> Vec<Option<f64>> {
    grid.iter().map(|t| interpolate(x, y, *t)).collect()
}

/// Largest `|a − b|` over grid points inside `[lo, hi]` where both exist.
pub fn max_deviation(
    grid: &[f64],
    a: &[Option<f64>],
    b: &[Option<f64>],
    lo: f64,
    hi: f64,
) -> Option<f64> {
    grid.iter()
        .zip(a.iter().zip(b))
        .filter(|(t, _)| **t >= lo - 1e-12 && **t <= hi + 1e-12)
        .filter_map(|(_, (x, y))| Some((x.as_ref()? - y.as_ref()?).abs()))
        .reduce(f64::max)
}

/// From `start` to the first local minimum after the first local maximum
/// of `name`.
pub fn first_oscillation(series: &TimeSeries, name: &str, start: f64) -> Option<(f64, f64)> {
    let y = series.channel(name)?;
    let g = &series.grid;
    let i0 = g.iter().position(|t| *t >= start - 1e-12)?;
    let mut seen_max = false;
    for i in (i0 + 1)..y.len().saturating_sub(1) {
        if !seen_max && y[i] > y[i - 1] && y[i] >= y[i + 1] {
            seen_max = true;
        } else if seen_max && y[i] < y[i - 1] && y[i] <= y[i + 1] {
            return Some((g[i0], g[i]));
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// Quantum grid with `classical_<c>`, `quantum_<c>` and `delta_<c>`
    /// columns; `delta` is quantum minus classical.
    pub series: TimeSeries,
    pub window: (f64, f64),
    pub max_deviation: BTreeMap<String, f64>,
}

impl Comparison {
    pub fn summary_line(&self) -> String {
        let parts: Vec<String> = self
            .max_deviation
            .iter()
            .map(|(k, v)| format!("{k}={v:.6e}"))
            .collect();
        format!(
            "max |quantum - classical| over [{:.6}, {:.6}] T_rev: {}",
            self.window.0,
            self.window.1,
            parts.join(" ")
        )
    }
}

/// Resamples the classical channels onto the quantum grid and measures
/// the deviation of each listed channel over `window`.
pub fn compare(
    classical: &TimeSeries,
    quantum: &TimeSeries,
    channels: &[&str],
    window: (f64, f64),
) -> Result<Comparison> {
    if !(window.0 <= window.1) {
        return param("comparison window must satisfy lo <= hi");
    }
    let grid = quantum.grid.clone();
    let mut out = TimeSeries::new(grid.clone());
    let mut devs = BTreeMap::new();
    for name in channels {
        let (Some(c), Some(q)) = (classical.channel(name), quantum.channel(name)) else {
            return param(format!("channel {name} missing from one of the runs"));
        };
        let c = resample(&classical.grid, c, &grid);
        let q: Vec<Option<f64>> = q.iter().map(|v| Some(*v)).collect();
        if let Some(d) = max_deviation(&grid, &c, &q, window.0, window.1) {
            devs.insert(name.to_string(), d);
        }
        let nan = |v: &Option<f64>| v.unwrap_or(f64::NAN);
        out.push(&format!("classical_{name}"), c.iter().map(nan).collect())?;
        out.push(&format!("quantum_{name}"), q.iter().map(nan).collect())?;
        out.push(
            &format!("delta_{name}"),
            q.iter().zip(&c).map(|(a, b)| nan(a) - nan(b)).collect(),
        )?;
    }
    out.set_meta("window", vec![window.0, window.1]);
    out.set_meta(
        "max_deviation",
        serde_json::to_value(&devs).expect("map serializes"),
    );
    Ok(Comparison {
        series: out,
        window,
        max_deviation: devs,
    })
}
