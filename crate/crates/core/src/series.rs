//! Named observable channels on a common time grid, with CSV/JSON output.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Standard channel names.
pub mod channel {
    pub const COS2_THETA: &str = "cos2_theta";
    pub const COS2_PHI: &str = "cos2_phi";
    pub const LX: &str = "lx";
    pub const LY: &str = "ly";
    pub const LZ: &str = "lz";
    pub const L2: &str = "l2";
    /// `⟨L_y⟩/√⟨L²⟩`
    pub const LY_NORM: &str = "ly_norm";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    /// Times in revival units.
    pub grid: Vec<f64>,
    pub channels: Vec<Channel>,
    #[serde(default)]
    pub meta: Map<String, Value>,
}

/// Uniform grid `0, dt, 2dt, …` up to and including `t_max` (within 1e-9 dt).
pub fn uniform_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(Error::Parameter(format!(
            "output grid needs dt > 0 and t_max >= 0 (got dt = {dt}, t_max = {t_max})"
        )));
    }
    let n = (t_max / dt + 1e-9).floor() as usize;
    Ok((0..=n).map(|j| j as f64 * dt).collect())
}

impl TimeSeries {
    pub fn new(grid: Vec<f64>) -> Self {
        Self {
            grid,
            channels: Vec::new(),
            meta: Map::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Adds or replaces a channel.
    pub fn push(&mut self, name: &str, values: Vec<f64>) -> Result<()> {
        if values.len() != self.grid.len() {
            return Err(Error::Dimension {
                expected: self.grid.len(),
                found: values.len(),
            });
        }
        match self.channels.iter_mut().find(|c| c.name == name) {
            Some(c) => c.values = values,
            None => self.channels.push(Channel {
                name: name.to_string(),
                values,
            }),
        }
        Ok(())
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.channels.iter().map(|c| c.name.as_str())
    }

    pub fn set_meta(&mut self, key: &str, value: impl Into<Value>) {
        self.meta.insert(key.to_string(), value.into());
    }

    /// Linear interpolation; `None` outside the grid or for an unknown channel.
    pub fn interpolate(&self, name: &str, t: f64) -> Option<f64> {
        interpolate(&self.grid, self.channel(name)?, t)
    }

    /// Trapezoid mean of a channel over the grid points inside `[a, b]`.
    pub fn window_mean(&self, name: &str, a: f64, b: f64) -> Option<f64> {
        let y = self.channel(name)?;
        let pts: Vec<(f64, f64)> = self
            .grid
            .iter()
            .zip(y)
            .filter(|(t, _)| **t >= a - 1e-12 && **t <= b + 1e-12)
            .map(|(t, v)| (*t, *v))
            .collect();
        match pts.len() {
            0 => None,
            1 => Some(pts[0].1),
            _ => {
                let area: f64 = pts
                    .windows(2)
                    .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
                    .sum();
                Some(area / (pts[pts.len() - 1].0 - pts[0].0))
            }
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# propeller-sim v{}", env!("CARGO_PKG_VERSION"))?;
        let mut header = String::from("t_rev");
        for c in &self.channels {
            header.push(',');
            header.push_str(&c.name);
        }
        writeln!(w, "{header}")?;
        for (i, t) in self.grid.iter().enumerate() {
            let mut line = fmt_e10(*t);
            for c in &self.channels {
                line.push(',');
                line.push_str(&fmt_e10(c.values[i]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("series serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let ts: Self = serde_json::from_str(s)
            .map_err(|e| Error::Parameter(format!("malformed time series: {e}")))?;
        for c in &ts.channels {
            if c.values.len() != ts.grid.len() {
                return Err(Error::Dimension {
                    expected: ts.grid.len(),
                    found: c.values.len(),
                });
            }
        }
        Ok(ts)
    }
}

pub fn interpolate(x: &[f64], y: &[f64], t: f64) -> Option<f64> {
    if x.is_empty() || t < x[0] - 1e-12 || t > x[x.len() - 1] + 1e-12 {
        return None;
    }
    let i = x.partition_point(|v| *v <= t);
    if i == 0 {
        return Some(y[0]);
    }
    if i >= x.len() {
        return Some(y[x.len() - 1]);
    }
    let (x0, x1) = (x[i - 1], x[i]);
    let w = (t - x0) / (x1 - x0);
    Some(y[i - 1] * (1.0 - w) + y[i] * w)
}

/// C-style `%.10e`: signed exponent with at least two digits.
pub fn fmt_e10(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.10e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let (sign, digits) = match exp.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', exp),
    };
    format!("{mant}e{sign}{digits:0>2}")
}
