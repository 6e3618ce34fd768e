//! Linear rotor wave packets in the `|l m⟩` basis, lab frame with `z`
//! along the first pulse.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::{Basis, RotState};
use super::fourier::Trace;
use super::harmonics::theta_column;
use super::operator::{
    azimuth_cos2, cos2_along, j_squared, j_x, j_y, j_z, quadratic_form, SparseOp,
};
use super::pulse::{check_headroom, evolve_in_place, Coupling};
use super::thermal::{linear_initial_states, SpinWeights};
use crate::density::{DensityGrid, GridSpec};
use crate::ensemble::{bracket, PulseTime, ScheduledPulse, SCAN_STEP};
use crate::error::{param, Error, Result};
use crate::quadrature::gauss_legendre;
use crate::series::{channel, uniform_grid, TimeSeries};
use crate::units::{rev_to_dimless, sigma_th, MoleculeKind, MoleculeParams, PulseSpec};

type C = Complex64;

#[derive(Debug, Clone)]
pub struct WavePacket {
    pub basis: Arc<Basis>,
    pub coeffs: Vec<C>,
    /// Reference time in revival units.
    pub time: f64,
}

impl WavePacket {
    pub fn basis_state(basis: Arc<Basis>, l: i32, m: i32) -> Result<Self> {
        let Some(i) = basis.find(RotState::new(l, 0, m)) else {
            return param(format!("|{l},{m}> is not in the basis"));
        };
        let mut coeffs = vec![C::new(0.0, 0.0); basis.len()];
        coeffs[i] = C::new(1.0, 0.0);
        Ok(Self {
            basis,
            coeffs,
            time: 0.0,
        })
    }

    pub fn from_coeffs(basis: Arc<Basis>, coeffs: Vec<C>, time: f64) -> Result<Self> {
        if coeffs.len() != basis.len() {
            return Err(Error::Dimension {
                expected: basis.len(),
                found: coeffs.len(),
            });
        }
        Ok(Self {
            basis,
            coeffs,
            time,
        })
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn l_max(&self) -> i32 {
        self.basis.j_max()
    }
}

/// Free evolution by `dt` revival units.
pub fn free_evolve(wp: &WavePacket, dt: f64) -> WavePacket {
    let mut out = wp.clone();
    evolve_in_place(&wp.basis, &mut out.coeffs, rev_to_dimless(dt));
    out.time += dt;
    out
}

/// Sudden pulse `exp(iP cos²β)`.
pub fn sudden_kick(wp: &WavePacket, pulse: &PulseSpec) -> Result<WavePacket> {
    if !pulse.is_impulsive() {
        return param("sudden_kick needs a zero-duration pulse");
    }
    apply(wp, pulse)
}

/// Gaussian pulse of the given intensity FWHM, integrated to relative
/// tolerance 1e-8 and referred to its centre.
pub fn finite_pulse(wp: &WavePacket, pulse: &PulseSpec) -> Result<WavePacket> {
    if pulse.is_impulsive() {
        return param("finite_pulse needs a positive duration");
    }
    apply(wp, pulse)
}

fn apply(wp: &WavePacket, pulse: &PulseSpec) -> Result<WavePacket> {
    pulse.validate()?;
    let coupling = Coupling::new(&wp.basis, &pulse.pol());
    let coeffs = coupling.gaussian(&wp.basis, &wp.coeffs, pulse.strength, pulse.duration)?;
    check_headroom(&wp.basis, &coeffs)?;
    Ok(WavePacket {
        basis: wp.basis.clone(),
        coeffs,
        time: wp.time,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// `z²`, the alignment factor with respect to the first pulse.
    Cos2Theta,
    Cos2Phi,
    Jx,
    Jy,
    Jz,
    J2,
    X2,
    Y2,
    Z2,
}

impl Observable {
    pub const ALL: [Observable; 9] = [
        Observable::Cos2Theta,
        Observable::Cos2Phi,
        Observable::Jx,
        Observable::Jy,
        Observable::Jz,
        Observable::J2,
        Observable::X2,
        Observable::Y2,
        Observable::Z2,
    ];

    pub fn channel_name(&self) -> &'static str {
        match self {
            Observable::Cos2Theta => channel::COS2_THETA,
            Observable::Cos2Phi => channel::COS2_PHI,
            Observable::Jx => channel::LX,
            Observable::Jy => channel::LY,
            Observable::Jz => channel::LZ,
            Observable::J2 => channel::L2,
            Observable::X2 => "x2",
            Observable::Y2 => "y2",
            Observable::Z2 => "z2",
        }
    }

    pub fn operator(&self, basis: &Basis) -> SparseOp {
        let diag = |v: [f64; 3]| quadratic_form(basis, &Matrix3::from_diagonal(&Vector3::from(v)));
        match self {
            Observable::Cos2Theta | Observable::Z2 => cos2_along(basis, &Vector3::z()),
            Observable::Cos2Phi => azimuth_cos2(basis),
            Observable::Jx => j_x(basis),
            Observable::Jy => j_y(basis),
            Observable::Jz => j_z(basis),
            Observable::J2 => j_squared(basis),
            Observable::X2 => diag([1.0, 0.0, 0.0]),
            Observable::Y2 => diag([0.0, 1.0, 0.0]),
        }
    }
}

/// Expectation value from matrix elements.
pub fn observe(wp: &WavePacket, obs: Observable) -> f64 {
    obs.operator(&wp.basis).expectation(&wp.coeffs).re
}

/// `∮ f(θ, φ) |Ψ(θ, φ)|² dΩ` on a Gauss–Legendre × uniform grid.
pub fn observe_grid(
    wp: &WavePacket,
    f: impl Fn(f64, f64) -> f64,
    n_theta: usize,
    n_phi: usize,
) -> f64 {
    let l_max = wp.l_max();
    let (x, w) = gauss_legendre(n_theta);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut total = 0.0;
    for (xi, wi) in x.iter().zip(&w) {
        // ψ_m(x) = Σ_l c_lm Θ_lm(x)
        let psi_m: Vec<(i32, C)> = (-l_max..=l_max)
            .map(|m| {
                let col = theta_column(l_max, m, *xi);
                let mut s = C::new(0.0, 0.0);
                for (k, t) in col.iter().enumerate() {
                    let l = m.abs() + k as i32;
                    if let Some(i) = wp.basis.find(RotState::new(l, 0, m)) {
                        s += wp.coeffs[i] * t;
                    }
                }
                (m, s)
            })
            .collect();
        let th = xi.acos();
        for j in 0..n_phi {
            let ph = j as f64 * dphi;
            let psi: C = psi_m
                .iter()
                .map(|(m, s)| s * C::from_polar(1.0, *m as f64 * ph))
                .sum::<C>()
                / (2.0 * PI).sqrt();
            total += wi * dphi * psi.norm_sqr() * f(th, ph);
        }
    }
    total
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantumLinearConfig {
    pub molecule: MoleculeParams,
    pub temperature_k: f64,
    pub pulses: Vec<ScheduledPulse>,
    /// Intensity FWHM of every pulse in revival units; 0 is sudden.
    #[serde(default)]
    pub fwhm: f64,
    /// Basis cutoff; `None` picks `8 + ⌈4 Σ|P|⌉ + l₀,max`.
    pub l_max: Option<i32>,
    pub t_max: f64,
    pub dt_out: f64,
    #[serde(skip)]
    pub spin: SpinWeights,
}

impl QuantumLinearConfig {
    pub fn new(molecule: MoleculeParams, temperature_k: f64) -> Self {
        Self {
            molecule,
            temperature_k,
            pulses: Vec::new(),
            fwhm: 0.0,
            l_max: None,
            t_max: 1.0,
            dt_out: 1e-3,
            spin: SpinWeights::Uniform,
        }
    }

    pub fn with_pulse(mut self, p: ScheduledPulse) -> Self {
        self.pulses.push(p);
        self
    }

    pub fn with_grid(mut self, t_max: f64, dt_out: f64) -> Self {
        self.t_max = t_max;
        self.dt_out = dt_out;
        self
    }
}

/// Truncation and thermal bookkeeping of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub cutoff: i32,
    pub basis_size: usize,
    pub initial_states: usize,
    pub captured_weight: f64,
    /// Largest population found within the headroom window after any pulse.
    pub edge_population: f64,
    pub pulse_times: Vec<f64>,
    pub auto_delay: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct QuantumRun {
    pub series: TimeSeries,
    pub report: RunReport,
    /// Mean of each channel over one revival after the last pulse.
    pub revival_means: BTreeMap<String, f64>,
}

pub fn default_l_max(pulses: &[ScheduledPulse], thermal_l_max: i32) -> i32 {
    let total: f64 = pulses.iter().map(|p| p.strength.abs()).sum();
    8 + (4.0 * total).ceil() as i32 + thermal_l_max
}

struct Stage {
    t: f64,
    traces: Vec<Trace>,
}

const CHUNK: usize = 8;

fn accumulate(basis: &Basis, ops: &[SparseOp], packets: &[Vec<C>], weights: &[f64]) -> Vec<Trace> {
    let parts: Vec<Vec<Trace>> = packets
        .par_chunks(CHUNK)
        .zip(weights.par_chunks(CHUNK))
        .map(|(ps, ws)| {
            let mut tr: Vec<Trace> = ops.iter().map(|_| Trace::new(basis.max_key())).collect();
            for (p, w) in ps.iter().zip(ws) {
                for (t, op) in tr.iter_mut().zip(ops) {
                    t.add(basis, op, p, *w);
                }
            }
            tr
        })
        .collect();
    let mut total: Vec<Trace> = ops.iter().map(|_| Trace::new(basis.max_key())).collect();
    for part in parts {
        for (t, p) in total.iter_mut().zip(&part) {
            t.merge(p);
        }
    }
    total
}

/// Scans `trace` from its reference time for the first extremum.
pub(crate) fn trace_extremum(trace: &Trace, t0: f64, horizon: f64, maximum: bool) -> Result<f64> {
    let n = ((horizon - t0) / SCAN_STEP).floor() as usize;
    let ts: Vec<f64> = (0..=n)
        .map(|k| rev_to_dimless(k as f64 * SCAN_STEP))
        .collect();
    let f = trace.eval_many(&ts);
    for k in 1..f.len().saturating_sub(1) {
        if let Some(s) = bracket(f[k - 1], f[k], f[k + 1], maximum) {
            return Ok(t0 + (k as f64 + s) * SCAN_STEP);
        }
    }
    Err(Error::Protocol(format!(
        "no alignment {} found in the scan window [{t0:.6}, {horizon:.6}] T_rev",
        if maximum { "maximum" } else { "minimum" }
    )))
}

/// Thermally averaged traces of every observable through the pulse
/// sequence.
pub fn thermal_run(cfg: &QuantumLinearConfig) -> Result<QuantumRun> {
    if cfg.molecule.kind != MoleculeKind::Linear {
        return param("the linear quantum model needs a linear molecule");
    }
    let sigma = sigma_th(&cfg.molecule, cfg.temperature_k)?.perpendicular;
    let grid = uniform_grid(cfg.t_max, cfg.dt_out)?;
    if !(cfg.fwhm >= 0.0) {
        return param("pulse FWHM must be >= 0");
    }
    for (i, p) in cfg.pulses.iter().enumerate() {
        p.resolve(0.0)?;
        if matches!(p.time, PulseTime::AutoExtremum) && i != 1 {
            return param("an automatic time is only allowed for the second pulse");
        }
    }
    let thermal = linear_initial_states(sigma, &cfg.spin)?;
    let l_max = cfg
        .l_max
        .unwrap_or_else(|| default_l_max(&cfg.pulses, thermal.j_max));
    if l_max < thermal.j_max + 4 {
        return Err(Error::Truncation {
            cutoff: l_max.max(0) as u32,
            population: 1.0 - thermal.captured,
        });
    }
    let basis = Arc::new(Basis::linear(l_max));
    let p1 = cfg
        .pulses
        .first()
        .map(|p| Vector3::from(p.polarization))
        .unwrap_or_else(Vector3::z);

    let observables = Observable::ALL;
    let ops: Vec<SparseOp> = observables
        .iter()
        .map(|o| match o {
            Observable::Cos2Theta => cos2_along(&basis, &p1),
            _ => o.operator(&basis),
        })
        .collect();

    let weights: Vec<f64> = thermal.states.iter().map(|s| s.weight).collect();
    let mut packets: Vec<Vec<C>> = thermal
        .states
        .iter()
        .map(|s| {
            let mut c = vec![C::new(0.0, 0.0); basis.len()];
            c[basis.find(s.state).expect("thermal state inside basis")] = C::new(1.0, 0.0);
            c
        })
        .collect();

    let mut stages = vec![Stage {
        t: 0.0,
        traces: accumulate(&basis, &ops, &packets, &weights),
    }];
    let mut times = Vec::new();
    let mut auto_delay = None;
    let mut edge: f64 = 0.0;
    for sp in &cfg.pulses {
        let prev_t = stages.last().expect("stage").t;
        let t = match sp.time {
            PulseTime::At(t) => {
                if t < prev_t {
                    return param("pulses must be sorted by time");
                }
                t
            }
            PulseTime::AutoExtremum => {
                let strength = cfg.pulses[0].strength;
                if strength == 0.0 {
                    return Err(Error::Protocol(
                        "automatic timing needs a first pulse with P != 0".into(),
                    ));
                }
                let trace = &stages.last().expect("stage").traces[0];
                let t = trace_extremum(trace, prev_t, cfg.t_max.max(prev_t + 1.0), strength > 0.0)?;
                auto_delay = Some(t - prev_t);
                t
            }
        };
        let pulse = sp.resolve(t)?;
        let coupling = Coupling::new(&basis, &pulse.pol());
        let dt = rev_to_dimless(t - prev_t);
        let results: Vec<Result<(Vec<C>, f64)>> = packets
            .par_iter()
            .map(|c| {
                let mut c = c.clone();
                evolve_in_place(&basis, &mut c, dt);
                let out = coupling.gaussian(&basis, &c, pulse.strength, cfg.fwhm)?;
                let e = check_headroom(&basis, &out)?;
                Ok((out, e))
            })
            .collect();
        packets = Vec::with_capacity(results.len());
        for r in results {
            let (c, e) = r?;
            edge = edge.max(e);
            packets.push(c);
        }
        stages.push(Stage {
            t,
            traces: accumulate(&basis, &ops, &packets, &weights),
        });
        times.push(t);
    }

    let mut columns: Vec<Vec<f64>> = vec![vec![0.0; grid.len()]; ops.len()];
    for (si, st) in stages.iter().enumerate() {
        let end = stages.get(si + 1).map(|s| s.t).unwrap_or(f64::INFINITY);
        let idx: Vec<usize> = (0..grid.len())
            .filter(|&i| grid[i] >= st.t && grid[i] < end)
            .collect();
        let ts: Vec<f64> = idx
            .iter()
            .map(|&i| rev_to_dimless(grid[i] - st.t))
            .collect();
        for (k, tr) in st.traces.iter().enumerate() {
            for (v, &i) in tr.eval_many(&ts).into_iter().zip(&idx) {
                columns[k][i] = v;
            }
        }
    }
    let mut series = TimeSeries::new(grid);
    for (o, col) in observables.iter().zip(&columns) {
        series.push(o.channel_name(), col.clone())?;
    }
    let ly = series.channel(channel::LY).expect("ly").to_vec();
    let l2 = series.channel(channel::L2).expect("l2").to_vec();
    series.push(
        channel::LY_NORM,
        ly.iter()
            .zip(&l2)
            .map(|(a, b)| if *b > 0.0 { a / b.sqrt() } else { 0.0 })
            .collect(),
    )?;

    let last = stages.last().expect("stage");
    let mut revival_means = BTreeMap::new();
    for (o, tr) in observables.iter().zip(&last.traces) {
        revival_means.insert(o.channel_name().to_string(), tr.mean());
    }
    let report = RunReport {
        cutoff: l_max,
        basis_size: basis.len(),
        initial_states: thermal.states.len(),
        captured_weight: thermal.captured,
        edge_population: edge,
        pulse_times: times,
        auto_delay,
    };
    series.set_meta("source", "quantum");
    series.set_meta("spin_weights", cfg.spin.label());
    series.set_meta(
        "report",
        serde_json::to_value(&report).expect("report serializes"),
    );
    if let Some(d) = auto_delay {
        series.set_meta("auto_delay", d);
    }
    Ok(QuantumRun {
        series,
        report,
        revival_means,
    })
}

/// Packets right after the last pulse, with pulses fired at `times`.
fn final_packets(
    cfg: &QuantumLinearConfig,
    times: &[f64],
) -> Result<(Arc<Basis>, Vec<Vec<C>>, Vec<f64>)> {
    let sigma = sigma_th(&cfg.molecule, cfg.temperature_k)?.perpendicular;
    let thermal = linear_initial_states(sigma, &cfg.spin)?;
    let l_max = cfg
        .l_max
        .unwrap_or_else(|| default_l_max(&cfg.pulses, thermal.j_max));
    let basis = Arc::new(Basis::linear(l_max));
    let weights = thermal.states.iter().map(|s| s.weight).collect();
    let mut packets: Vec<Vec<C>> = thermal
        .states
        .iter()
        .map(|s| {
            let mut c = vec![C::new(0.0, 0.0); basis.len()];
            c[basis.find(s.state).expect("thermal state inside basis")] = C::new(1.0, 0.0);
            c
        })
        .collect();
    let mut prev = 0.0;
    for (sp, &t) in cfg.pulses.iter().zip(times) {
        let coupling = Coupling::new(&basis, &Vector3::from(sp.polarization).normalize());
        let dt = rev_to_dimless(t - prev);
        packets = packets
            .par_iter()
            .map(|c| {
                let mut c = c.clone();
                evolve_in_place(&basis, &mut c, dt);
                let out = coupling.gaussian(&basis, &c, sp.strength, cfg.fwhm)?;
                check_headroom(&basis, &out)?;
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        prev = t;
    }
    Ok((basis, packets, weights))
}

/// Angular density averaged over one revival period after the last pulse.
/// Only the diagonal-in-`l` part of `|Ψ|²` survives the average.
pub fn revival_density(cfg: &QuantumLinearConfig, spec: GridSpec) -> Result<DensityGrid> {
    let mut probe = cfg.clone();
    probe.dt_out = probe.t_max.max(1e-3);
    let times = thermal_run(&probe)?.report.pulse_times;
    let (basis, packets, weights) = final_packets(cfg, &times)?;
    let l_max = basis.j_max();
    let width = (2 * l_max + 1) as usize;
    // per-l density matrices in m, summed over the thermal set
    let mut dm: Vec<Vec<C>> = (0..=l_max)
        .map(|_| vec![C::new(0.0, 0.0); width * width])
        .collect();
    for (p, w) in packets.iter().zip(&weights) {
        for (i, a) in p.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let si = basis.state(i);
            for m2 in -si.j..=si.j {
                let b = p[basis.find(RotState::new(si.j, 0, m2)).expect("same l")];
                dm[si.j as usize][(si.m + l_max) as usize * width + (m2 + l_max) as usize] +=
                    a * b.conj() * w;
            }
        }
    }
    let mut grid = DensityGrid::empty(spec, 0.0, packets.len(), "quantum");
    let n_phi = spec.n_phi;
    let phis = grid.phi.clone();
    let thetas = grid.theta.clone();
    grid.rho
        .par_chunks_mut(n_phi)
        .zip(thetas.par_iter())
        .for_each(|(row, th)| {
            let x = th.cos();
            let cols: Vec<Vec<f64>> = (-l_max..=l_max)
                .map(|m| theta_column(l_max, m, x))
                .collect();
            let theta = |l: i32, m: i32| cols[(m + l_max) as usize][(l - m.abs()) as usize];
            // Fourier coefficients in Δm = m − m'
            let mut f = vec![C::new(0.0, 0.0); 2 * width - 1];
            for l in 0..=l_max {
                for m in -l..=l {
                    for m2 in -l..=l {
                        let d =
                            dm[l as usize][(m + l_max) as usize * width + (m2 + l_max) as usize];
                        if d.norm_sqr() == 0.0 {
                            continue;
                        }
                        f[(m - m2 + 2 * l_max) as usize] += d * theta(l, m) * theta(l, m2);
                    }
                }
            }
            for (v, ph) in row.iter_mut().zip(&phis) {
                let s: C = f
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.norm_sqr() > 0.0)
                    .map(|(k, c)| c * C::from_polar(1.0, (k as i32 - 2 * l_max) as f64 * ph))
                    .sum();
                *v = s.re / (2.0 * PI);
            }
        });
    Ok(grid)
}
