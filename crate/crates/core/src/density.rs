//! Angular distributions on the unit sphere: instantaneous kernel estimates,
//! long-time "belt" averages and the zero-temperature closed form.

use std::f64::consts::PI;
use std::io::{self, Write};

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{FinalEnsemble, Rotor};
use crate::error::{param, Result};
use crate::linear::{UnitSphereState, REST_SPEED};
use crate::quadrature::gauss_legendre;
use crate::series::fmt_e10;
use crate::symtop::{SymTopState, REST_MOMENTUM};

pub const DEFAULT_SIGMA: f64 = 0.1;

/// Node counts of a density grid: Gauss–Legendre in `cos θ`, uniform in `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_theta: 181,
            n_phi: 360,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    /// Polar nodes, ascending.
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
    /// Quadrature weights in `cos θ` matching `theta`.
    pub cos_weights: Vec<f64>,
    /// Row-major values, `rho[i * n_phi + j]` at `(theta[i], phi[j])`.
    pub rho: Vec<f64>,
    pub sigma: f64,
    pub n_points: usize,
    pub seed: Option<u64>,
    /// `"snapshot"`, `"belt"` or `"analytic"`.
    pub kind: String,
}

impl DensityGrid {
    pub(crate) fn empty(spec: GridSpec, sigma: f64, n_points: usize, kind: &str) -> Self {
        let (x, w) = gauss_legendre(spec.n_theta);
        // ascending θ means descending cos θ
        let theta: Vec<f64> = x.iter().rev().map(|c| c.acos()).collect();
        let cos_weights: Vec<f64> = w.into_iter().rev().collect();
        let phi = (0..spec.n_phi)
            .map(|j| 2.0 * PI * j as f64 / spec.n_phi as f64)
            .collect();
        Self {
            theta,
            phi,
            cos_weights,
            rho: vec![0.0; spec.n_theta * spec.n_phi],
            sigma,
            n_points,
            seed: None,
            kind: kind.into(),
        }
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            n_theta: self.theta.len(),
            n_phi: self.phi.len(),
        }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.rho[i * self.phi.len() + j]
    }

    pub fn direction(&self, i: usize, j: usize) -> Vector3<f64> {
        let (st, ct) = self.theta[i].sin_cos();
        let (sp, cp) = self.phi[j].sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }

    /// `∮ f ρ dΩ` by the grid quadrature.
    pub fn integrate(&self, f: impl Fn(&Vector3<f64>) -> f64) -> f64 {
        let dphi = 2.0 * PI / self.phi.len() as f64;
        let mut total = 0.0;
        for (i, w) in self.cos_weights.iter().enumerate() {
            let row: f64 = (0..self.phi.len())
                .map(|j| self.at(i, j) * f(&self.direction(i, j)))
                .sum();
            total += w * row * dphi;
        }
        total
    }

    pub fn integral(&self) -> f64 {
        self.integrate(|_| 1.0)
    }

    /// `(⟨x²⟩, ⟨y²⟩, ⟨z²⟩)` of the gridded density.
    pub fn second_moments(&self) -> [f64; 3] {
        [
            self.integrate(|r| r.x * r.x),
            self.integrate(|r| r.y * r.y),
            self.integrate(|r| r.z * r.z),
        ]
    }

    /// `φ`-averaged density for each polar node.
    pub fn theta_profile(&self) -> Vec<f64> {
        let n = self.phi.len();
        self.rho
            .chunks(n)
            .map(|row| row.iter().sum::<f64>() / n as f64)
            .collect()
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    /// Plain-text table with an eight-line header.
    pub fn write_table<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "# propeller-sim v{} density grid",
            env!("CARGO_PKG_VERSION")
        )?;
        writeln!(w, "# kind: {}", self.kind)?;
        writeln!(w, "# n_theta: {}", self.theta.len())?;
        writeln!(w, "# n_phi: {}", self.phi.len())?;
        writeln!(w, "# sigma: {}", fmt_e10(self.sigma))?;
        writeln!(w, "# n_points: {}", self.n_points)?;
        match self.seed {
            Some(s) => writeln!(w, "# seed: {s}")?,
            None => writeln!(w, "# seed: none")?,
        }
        writeln!(w, "theta,phi,rho")?;
        for (i, th) in self.theta.iter().enumerate() {
            for (j, ph) in self.phi.iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{}",
                    fmt_e10(*th),
                    fmt_e10(*ph),
                    fmt_e10(self.at(i, j))
                )?;
            }
        }
        Ok(())
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma <= 0.5) {
        return param(format!("kernel width must lie in (0, 0.5], got {sigma}"));
    }
    Ok(())
}

fn check_spec(spec: GridSpec) -> Result<()> {
    if spec.n_theta < 2 || spec.n_phi < 3 {
        return param("density grid needs at least 2 polar and 3 azimuthal nodes");
    }
    Ok(())
}

/// Fills the grid row by row; `kernel(r)` returns the summed contribution of
/// all inputs at direction `r`.
fn fill(grid: &mut DensityGrid, kernel: impl Fn(&Vector3<f64>) -> f64 + Sync) {
    let n_phi = grid.phi.len();
    let trig: Vec<(f64, f64)> = grid.phi.iter().map(|p| p.sin_cos()).collect();
    let theta = grid.theta.clone();
    grid.rho
        .par_chunks_mut(n_phi)
        .zip(theta.par_iter())
        .for_each(|(row, th)| {
            let (st, ct) = th.sin_cos();
            for (v, (sp, cp)) in row.iter_mut().zip(&trig) {
                *v = kernel(&Vector3::new(st * cp, st * sp, ct));
            }
        });
}

/// `ρ(r) = (1/N) Σ (1/2πσ²) exp[−(1 − r·rᵢ)/σ²]`.
pub fn kde_snapshot(points: &[Vector3<f64>], sigma: f64, spec: GridSpec) -> Result<DensityGrid> {
    check_sigma(sigma)?;
    check_spec(spec)?;
    if points.is_empty() {
        return param("kernel estimate needs at least one point");
    }
    let mut g = DensityGrid::empty(spec, sigma, points.len(), "snapshot");
    let norm = 1.0 / (2.0 * PI * sigma * sigma * points.len() as f64);
    let inv = 1.0 / (sigma * sigma);
    let cutoff = 750.0 * sigma * sigma;
    fill(&mut g, |r| {
        let mut s = 0.0;
        for p in points {
            let d = 1.0 - r.dot(p);
            if d < cutoff {
                s += (-d * inv).exp();
            }
        }
        s * norm
    });
    Ok(g)
}

/// Support of one molecule's long-time-averaged distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Belt {
    /// Great circle normal to the unit vector `normal`.
    Circle { normal: Vector3<f64> },
    /// Precession cone `axis·r = cos_half_angle`.
    Cone {
        axis: Vector3<f64>,
        cos_half_angle: f64,
    },
    /// Molecule at rest.
    Point { r: Vector3<f64> },
}

impl Belt {
    pub fn of_linear(s: &UnitSphereState) -> Self {
        let speed = s.speed();
        if speed < REST_SPEED {
            Belt::Point { r: s.r }
        } else {
            Belt::Circle {
                normal: s.r.cross(&s.v) / speed,
            }
        }
    }

    pub fn of_symtop(s: &SymTopState) -> Self {
        let l = s.l.norm();
        if l < REST_MOMENTUM {
            Belt::Point { r: s.r }
        } else {
            let axis = s.l / l;
            Belt::Cone {
                axis,
                cos_half_angle: axis.dot(&s.r).clamp(-1.0, 1.0),
            }
        }
    }

    /// Time average of `r rᵀ` along the trajectory (diagonal only).
    pub fn second_moments(&self) -> [f64; 3] {
        match self {
            Belt::Circle { normal: n } => [0, 1, 2].map(|k| 0.5 * (1.0 - n[k] * n[k])),
            Belt::Cone {
                axis: e,
                cos_half_angle: c,
            } => [0, 1, 2].map(|k| c * c * e[k] * e[k] + 0.5 * (1.0 - c * c) * (1.0 - e[k] * e[k])),
            Belt::Point { r } => [0, 1, 2].map(|k| r[k] * r[k]),
        }
    }
}

pub fn belts(ensemble: &FinalEnsemble) -> Vec<Belt> {
    match ensemble {
        FinalEnsemble::Linear(v) => v.iter().map(Belt::of_linear).collect(),
        FinalEnsemble::Symtop(v) => v.iter().map(Belt::of_symtop).collect(),
    }
}

/// `ρ_ta = (1/N) Σ (2π√(2π)σ)⁻¹ exp[−(ê_L·r)²/2σ²]` for circles; cones use
/// `exp[−(ê_L·r − cos θ_pr)²/2σ²]` normalized over the sphere, and resting
/// molecules the snapshot kernel.
pub fn belt_average(belts: &[Belt], sigma: f64, spec: GridSpec) -> Result<DensityGrid> {
    check_sigma(sigma)?;
    check_spec(spec)?;
    if belts.is_empty() {
        return param("belt average needs at least one molecule");
    }
    let n = belts.len() as f64;
    let circle_norm = 1.0 / (2.0 * PI * (2.0 * PI).sqrt() * sigma);
    let point_norm = 1.0 / (2.0 * PI * sigma * sigma);
    let half_inv = 0.5 / (sigma * sigma);
    let cone_norms: Vec<f64> = belts
        .iter()
        .map(|b| match b {
            Belt::Cone {
                cos_half_angle: c, ..
            } => {
                let s2 = std::f64::consts::SQRT_2 * sigma;
                let band = sigma
                    * (PI / 2.0).sqrt()
                    * (libm::erf((1.0 - c) / s2) + libm::erf((1.0 + c) / s2));
                1.0 / (2.0 * PI * band)
            }
            _ => 0.0,
        })
        .collect();
    let mut g = DensityGrid::empty(spec, sigma, belts.len(), "belt");
    fill(&mut g, |r| {
        let mut s = 0.0;
        for (b, cn) in belts.iter().zip(&cone_norms) {
            s += match b {
                Belt::Circle { normal } => {
                    let u = normal.dot(r);
                    circle_norm * (-u * u * half_inv).exp()
                }
                Belt::Cone {
                    axis,
                    cos_half_angle,
                } => {
                    let u = axis.dot(r) - cos_half_angle;
                    cn * (-u * u * half_inv).exp()
                }
                Belt::Point { r: p } => point_norm * (-(1.0 - r.dot(p)) * 2.0 * half_inv).exp(),
            };
        }
        s / n
    });
    Ok(g)
}

/// `1/(2π² sin θ)`: long-time density after one sudden pulse at zero
/// temperature.
pub fn analytic_zero_temp(theta: f64) -> f64 {
    1.0 / (2.0 * PI * PI * theta.sin())
}

/// [`analytic_zero_temp`] on a grid.
pub fn analytic_grid(spec: GridSpec) -> Result<DensityGrid> {
    check_spec(spec)?;
    let mut g = DensityGrid::empty(spec, 0.0, 0, "analytic");
    let n_phi = spec.n_phi;
    for (i, th) in g.theta.clone().iter().enumerate() {
        let v = analytic_zero_temp(*th);
        g.rho[i * n_phi..(i + 1) * n_phi].fill(v);
    }
    Ok(g)
}

/// Molecular axes a dimensionless time `dt` after the last pulse.
pub fn axes_after(ensemble: &FinalEnsemble, dt: f64) -> Vec<Vector3<f64>> {
    match ensemble {
        FinalEnsemble::Linear(m) => m.par_iter().map(|s| s.advance(dt).axis()).collect(),
        FinalEnsemble::Symtop(m) => m.par_iter().map(|s| s.advance(dt).axis()).collect(),
    }
}

/// Ensemble mean of the per-molecule time-averaged `(x², y², z²)`.
pub fn second_moments(belts: &[Belt]) -> [f64; 3] {
    let mut acc = [0.0; 3];
    for b in belts {
        let m = b.second_moments();
        for k in 0..3 {
            acc[k] += m[k];
        }
    }
    acc.map(|v| v / belts.len() as f64)
}
