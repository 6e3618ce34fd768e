//! Symmetric-top wave packets in the propagation frame: light travels
//! along `z'`, pulse polarizations lie in the `x'`–`y'` plane and the
//! first pulse defines `x'`.
//!
//! `K` is conserved and an in-plane pulse changes `M` by 0 or ±2, so the
//! `|J K M⟩` space splits into independent blocks of fixed `K` and fixed
//! parity of `M`. Only `K ≥ 0` is propagated; the thermal weights of
//! `K > 0` carry the `±K` pair.

use std::sync::Arc;

use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::{Basis, RotState};
use super::fourier::Trace;
use super::linear::{trace_extremum, QuantumRun, RunReport};
use super::operator::{cos2_along, j2_commutator, j_squared, j_z, SparseOp};
use super::pulse::{check_headroom, evolve_in_place, Coupling};
use super::thermal::{symtop_initial_states, InitialState, SpinWeights, ThermalSet};
use crate::ensemble::{DelayScan, PulseTime, ScheduledPulse};
use crate::error::{param, Error, Result};
use crate::series::{channel, uniform_grid, TimeSeries};
use crate::units::{
    classical_to_propagation, rev_to_dimless, sigma_th, MoleculeKind, MoleculeParams,
};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

#[derive(Debug, Clone)]
pub struct Block {
    pub k: i32,
    pub m_parity: i32,
    pub basis: Arc<Basis>,
}

/// `|J K M⟩` up to `j_max` for `0 ≤ K ≤ k_max`, split into blocks.
#[derive(Debug, Clone)]
pub struct SymTopBasis {
    pub j_max: i32,
    pub inertia_ratio: f64,
    pub blocks: Vec<Block>,
}

impl SymTopBasis {
    pub fn new(j_max: i32, k_max: i32, inertia_ratio: f64) -> Self {
        let blocks = (0..=k_max.min(j_max))
            .flat_map(|k| {
                (0..2).map(move |par| Block {
                    k,
                    m_parity: par,
                    basis: Arc::new(Basis::symtop_block(j_max, k, par, inertia_ratio)),
                })
            })
            .collect();
        Self {
            j_max,
            inertia_ratio,
            blocks,
        }
    }

    pub fn block_of(&self, s: RotState) -> Option<usize> {
        self.blocks
            .iter()
            .position(|b| b.k == s.k && (s.m - b.m_parity).rem_euclid(2) == 0)
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.basis.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Azimuth of a classical-frame polarization about the propagation axis.
/// The classical `y` component must vanish.
pub fn propagation_angle(p_classical: &Vector3<f64>) -> Result<f64> {
    let [x, y, z] = classical_to_propagation([p_classical.x, p_classical.y, p_classical.z]);
    let n = (x * x + y * y + z * z).sqrt();
    if !(n > 0.0) || z.abs() > 1e-12 * n {
        return param("quantum symmetric-top pulses must be polarized perpendicular to the propagation axis (classical y)");
    }
    Ok(y.atan2(x))
}

/// `cos²β` with `β` the angle between the figure axis and the in-plane
/// polarization `(cos φ, sin φ, 0)`.
pub fn coupling_matrix(basis: &Basis, phi: f64) -> SparseOp {
    cos2_along(basis, &Vector3::new(phi.cos(), phi.sin(), 0.0))
}

/// `i[J_z, A]`
fn jz_commutator(basis: &Basis, a: &SparseOp) -> SparseOp {
    a.map(|r, c, v| v * C::new(0.0, (basis.state(r).m - basis.state(c).m) as f64))
}

/// Rows of coefficients for the thermal initial states of one block,
/// referred to the time of the first pulse.
#[derive(Debug, Clone)]
pub struct BlockAmplitudes {
    pub block: usize,
    pub initial: Vec<RotState>,
    pub weights: Vec<f64>,
    pub rows: Vec<Vec<C>>,
}

#[derive(Debug, Clone)]
pub struct AmplitudeMatrix {
    pub basis: Arc<SymTopBasis>,
    pub blocks: Vec<BlockAmplitudes>,
}

impl AmplitudeMatrix {
    /// Unit rows for the given initial states.
    pub fn initial(basis: Arc<SymTopBasis>, thermal: &[InitialState]) -> Result<Self> {
        let mut blocks: Vec<BlockAmplitudes> = Vec::new();
        for s in thermal {
            let Some(b) = basis.block_of(s.state) else {
                return param(format!("initial state {:?} has no block", s.state));
            };
            let bb = &basis.blocks[b].basis;
            let Some(i) = bb.find(s.state) else {
                return param(format!("initial state {:?} is above the cutoff", s.state));
            };
            let mut row = vec![ZERO; bb.len()];
            row[i] = C::new(1.0, 0.0);
            let slot = match blocks.iter().position(|x| x.block == b) {
                Some(p) => p,
                None => {
                    blocks.push(BlockAmplitudes {
                        block: b,
                        initial: Vec::new(),
                        weights: Vec::new(),
                        rows: Vec::new(),
                    });
                    blocks.len() - 1
                }
            };
            blocks[slot].initial.push(s.state);
            blocks[slot].weights.push(s.weight);
            blocks[slot].rows.push(row);
        }
        blocks.sort_by_key(|x| x.block);
        Ok(Self { basis, blocks })
    }

    fn block_basis(&self, b: &BlockAmplitudes) -> &Arc<Basis> {
        &self.basis.blocks[b.block].basis
    }

    /// Largest `|1 − ‖row‖²|`.
    pub fn unitarity_error(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| &b.rows)
            .map(|r| (1.0 - r.iter().map(|c| c.norm_sqr()).sum::<f64>()).abs())
            .fold(0.0, f64::max)
    }

    pub fn edge_population(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| {
                let basis = self.block_basis(b).clone();
                b.rows
                    .iter()
                    .map(move |r| basis.edge_population(r, super::pulse::HEADROOM))
            })
            .fold(0.0, f64::max)
    }

    fn map_rows(&self, f: impl Fn(&Basis, &[C]) -> Result<Vec<C>> + Sync) -> Result<Self> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let basis = self.block_basis(b);
                let rows = b
                    .rows
                    .par_iter()
                    .map(|r| f(basis, r))
                    .collect::<Result<Vec<_>>>()?;
                Ok(BlockAmplitudes { rows, ..b.clone() })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            basis: self.basis.clone(),
            blocks,
        })
    }

    /// Free evolution by `dt` revival units.
    pub fn evolve(&self, dt: f64) -> Self {
        let t = rev_to_dimless(dt);
        self.map_rows(|basis, r| {
            let mut r = r.to_vec();
            evolve_in_place(basis, &mut r, t);
            Ok(r)
        })
        .expect("free evolution cannot fail")
    }

    /// Thermal trace of a block operator, referred to the time of the rows.
    pub fn trace(&self, op: impl Fn(&Basis) -> SparseOp + Sync) -> Trace {
        let parts: Vec<Trace> = self
            .blocks
            .par_iter()
            .map(|b| {
                let basis = self.block_basis(b);
                let a = op(basis);
                let mut t = Trace::new(basis.max_key());
                for (r, w) in b.rows.iter().zip(&b.weights) {
                    t.add(basis, &a, r, *w);
                }
                t
            })
            .collect();
        let mut total = Trace::new(0);
        for p in &parts {
            total.merge(p);
        }
        total
    }
}

/// Applies one pulse polarized at azimuth `phi` to every row.
pub fn solve_pulse(
    amps: &AmplitudeMatrix,
    strength: f64,
    phi: f64,
    fwhm: f64,
) -> Result<AmplitudeMatrix> {
    if !(fwhm >= 0.0) {
        return param("pulse FWHM must be >= 0");
    }
    let couplings: Vec<Coupling> = amps
        .basis
        .blocks
        .iter()
        .map(|b| Coupling::new(&b.basis, &Vector3::new(phi.cos(), phi.sin(), 0.0)))
        .collect();
    let out = AmplitudeMatrix {
        basis: amps.basis.clone(),
        blocks: amps
            .blocks
            .iter()
            .map(|b| {
                let basis = &amps.basis.blocks[b.block].basis;
                let c = &couplings[b.block];
                let rows = b
                    .rows
                    .par_iter()
                    .map(|r| {
                        let out = c.gaussian(basis, r, strength, fwhm)?;
                        check_headroom(basis, &out)?;
                        Ok(out)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(BlockAmplitudes { rows, ..b.clone() })
            })
            .collect::<Result<Vec<_>>>()?,
    };
    Ok(out)
}

/// Dense single-pulse propagator with polarization along `x'`, one matrix
/// per block. Intended for small cutoffs.
#[derive(Debug, Clone)]
pub struct PulsePropagator {
    pub basis: Arc<SymTopBasis>,
    /// `columns[b][c]` is the image of basis state `c` of block `b`.
    pub columns: Vec<Vec<Vec<C>>>,
}

impl PulsePropagator {
    pub fn new(basis: Arc<SymTopBasis>, strength: f64, fwhm: f64) -> Result<Self> {
        let columns = basis
            .blocks
            .iter()
            .map(|b| {
                let c = Coupling::new(&b.basis, &Vector3::x());
                (0..b.basis.len())
                    .into_par_iter()
                    .map(|i| {
                        let mut e = vec![ZERO; b.basis.len()];
                        e[i] = C::new(1.0, 0.0);
                        c.gaussian(&b.basis, &e, strength, fwhm)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { basis, columns })
    }
}

/// Two-pulse amplitudes `B(τ)` from the first-pulse amplitudes and the
/// second-pulse propagator, with the second pulse rotated by `dphi` about
/// the propagation axis and fired `tau` revival units after the first.
/// The result is referred to the time of the first pulse:
/// `B_r = Σ_{r'} C_{r'} C'_{r'→r} e^{−i(E_{r'} − E_r)τ} e^{i(M' − M)Δφ}`.
pub fn compose_two_pulses(
    first: &AmplitudeMatrix,
    second: &PulsePropagator,
    tau: f64,
    dphi: f64,
) -> Result<AmplitudeMatrix> {
    if first.basis.blocks.len() != second.columns.len() {
        return Err(Error::Dimension {
            expected: second.columns.len(),
            found: first.basis.blocks.len(),
        });
    }
    let t = rev_to_dimless(tau);
    let out = first.map_rows_indexed(|b, basis, row| {
        let cols = &second.columns[b];
        if cols.len() != row.len() {
            return Err(Error::Dimension {
                expected: cols.len(),
                found: row.len(),
            });
        }
        let mut out = vec![ZERO; row.len()];
        for (rp, (c, col)) in row.iter().zip(cols).enumerate() {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let s = basis.state(rp);
            let y = c * C::from_polar(1.0, -basis.energy(rp) * t + s.m as f64 * dphi);
            for (o, u) in out.iter_mut().zip(col) {
                *o += u * y;
            }
        }
        for (r, o) in out.iter_mut().enumerate() {
            *o *= C::from_polar(1.0, basis.energy(r) * t - basis.state(r).m as f64 * dphi);
        }
        Ok(out)
    })?;
    Ok(out)
}

impl AmplitudeMatrix {
    fn map_rows_indexed(
        &self,
        f: impl Fn(usize, &Basis, &[C]) -> Result<Vec<C>> + Sync,
    ) -> Result<Self> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let basis = self.block_basis(b);
                let rows = b
                    .rows
                    .par_iter()
                    .map(|r| f(b.block, basis, r))
                    .collect::<Result<Vec<_>>>()?;
                Ok(BlockAmplitudes { rows, ..b.clone() })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            basis: self.basis.clone(),
            blocks,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopObservable {
    /// `cos²β` relative to the first pulse (`x'`).
    Cos2Theta,
    J2,
    /// Propagation-axis component, the classical `L_y`.
    Jz,
}

impl TopObservable {
    pub fn operator(&self, basis: &Basis) -> SparseOp {
        match self {
            TopObservable::Cos2Theta => coupling_matrix(basis, 0.0),
            TopObservable::J2 => j_squared(basis),
            TopObservable::Jz => j_z(basis),
        }
    }
}

/// Thermal `⟨A⟩` at the given times (revival units after the reference
/// time of the rows).
pub fn thermal_expectation(amps: &AmplitudeMatrix, obs: TopObservable, times: &[f64]) -> Vec<f64> {
    let tr = amps.trace(|b| obs.operator(b));
    let ts: Vec<f64> = times.iter().map(|t| rev_to_dimless(*t)).collect();
    tr.eval_many(&ts)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantumSymtopConfig {
    pub molecule: MoleculeParams,
    pub temperature_k: f64,
    /// Classical-frame polarizations, perpendicular to `y`.
    pub pulses: Vec<ScheduledPulse>,
    #[serde(default)]
    pub fwhm: f64,
    /// `None` picks `8 + ⌈4|P₁| + 4|P₂|⌉ + J_th`.
    pub j_max: Option<i32>,
    pub t_max: f64,
    pub dt_out: f64,
    #[serde(skip)]
    pub spin: SpinWeights,
}

impl QuantumSymtopConfig {
    pub fn new(molecule: MoleculeParams, temperature_k: f64) -> Self {
        Self {
            molecule,
            temperature_k,
            pulses: Vec::new(),
            fwhm: 0.0,
            j_max: None,
            t_max: 0.5,
            dt_out: 5e-4,
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

pub fn default_j_max(pulses: &[ScheduledPulse], thermal_j_max: i32) -> i32 {
    let total: f64 = pulses.iter().map(|p| 4.0 * p.strength.abs()).sum();
    8 + total.ceil() as i32 + thermal_j_max
}

struct Prepared {
    thermal: ThermalSet,
    basis: Arc<SymTopBasis>,
    /// Azimuths relative to the first pulse.
    angles: Vec<f64>,
}

fn prepare(cfg: &QuantumSymtopConfig) -> Result<Prepared> {
    if cfg.molecule.kind != MoleculeKind::OblateSymtop {
        return param("the symmetric-top quantum model needs a symmetric-top molecule");
    }
    if cfg.pulses.len() > 2 {
        return param("at most two pulses are supported");
    }
    if !(cfg.fwhm >= 0.0) {
        return param("pulse FWHM must be >= 0");
    }
    let ratio = cfg.molecule.inertia_ratio();
    let sigma = sigma_th(&cfg.molecule, cfg.temperature_k)?.perpendicular;
    let thermal = symtop_initial_states(sigma, ratio, &cfg.spin)?;
    let mut angles = Vec::new();
    for (i, p) in cfg.pulses.iter().enumerate() {
        p.resolve(0.0)?;
        if matches!(p.time, PulseTime::AutoExtremum) && i != 1 {
            return param("an automatic time is only allowed for the second pulse");
        }
        angles.push(propagation_angle(&Vector3::from(p.polarization))?);
    }
    if let Some(&a0) = angles.first() {
        for a in &mut angles {
            *a -= a0;
        }
    }
    let j_max = cfg
        .j_max
        .unwrap_or_else(|| default_j_max(&cfg.pulses, thermal.j_max));
    if j_max < thermal.j_max + 4 {
        return Err(Error::Truncation {
            cutoff: j_max.max(0) as u32,
            population: 1.0 - thermal.captured,
        });
    }
    let k_max = thermal.states.iter().map(|s| s.state.k).max().unwrap_or(0);
    let basis = Arc::new(SymTopBasis::new(j_max, k_max, ratio));
    Ok(Prepared {
        thermal,
        basis,
        angles,
    })
}

const RUN_OBSERVABLES: [TopObservable; 3] = [
    TopObservable::Cos2Theta,
    TopObservable::Jz,
    TopObservable::J2,
];

/// Thermally averaged `⟨cos²θ⟩`, `⟨L_y⟩`, `⟨L²⟩` and `⟨L_y⟩/√⟨L²⟩` through
/// the pulse sequence.
pub fn thermal_run(cfg: &QuantumSymtopConfig) -> Result<QuantumRun> {
    let prep = prepare(cfg)?;
    let grid = uniform_grid(cfg.t_max, cfg.dt_out)?;
    let mut amps = AmplitudeMatrix::initial(prep.basis.clone(), &prep.thermal.states)?;
    let traces = |a: &AmplitudeMatrix| -> Vec<Trace> {
        RUN_OBSERVABLES
            .iter()
            .map(|o| a.trace(|b| o.operator(b)))
            .collect()
    };
    let mut stages: Vec<(f64, Vec<Trace>)> = vec![(0.0, traces(&amps))];
    let mut times = Vec::new();
    let mut auto_delay = None;
    let mut edge: f64 = 0.0;
    for (sp, phi) in cfg.pulses.iter().zip(&prep.angles) {
        let prev_t = stages.last().expect("stage").0;
        let t = match sp.time {
            PulseTime::At(t) => {
                if t < prev_t {
                    return param("pulses must be sorted by time");
                }
                t
            }
            PulseTime::AutoExtremum => {
                let p1 = cfg.pulses[0].strength;
                if p1 == 0.0 {
                    return Err(Error::Protocol(
                        "automatic timing needs a first pulse with P != 0".into(),
                    ));
                }
                let tr = &stages.last().expect("stage").1[0];
                let t = trace_extremum(tr, prev_t, cfg.t_max.max(prev_t + 1.0), p1 > 0.0)?;
                auto_delay = Some(t - prev_t);
                t
            }
        };
        amps = solve_pulse(&amps.evolve(t - prev_t), sp.strength, *phi, cfg.fwhm)?;
        edge = edge.max(amps.edge_population());
        stages.push((t, traces(&amps)));
        times.push(t);
    }

    let mut cols = vec![vec![0.0; grid.len()]; RUN_OBSERVABLES.len()];
    for (si, (t0, trs)) in stages.iter().enumerate() {
        let end = stages.get(si + 1).map(|s| s.0).unwrap_or(f64::INFINITY);
        let idx: Vec<usize> = (0..grid.len())
            .filter(|&i| grid[i] >= *t0 && grid[i] < end)
            .collect();
        let ts: Vec<f64> = idx.iter().map(|&i| rev_to_dimless(grid[i] - t0)).collect();
        for (k, tr) in trs.iter().enumerate() {
            for (v, &i) in tr.eval_many(&ts).into_iter().zip(&idx) {
                cols[k][i] = v;
            }
        }
    }
    let norm: Vec<f64> = cols[1]
        .iter()
        .zip(&cols[2])
        .map(|(a, b)| if *b > 0.0 { a / b.sqrt() } else { 0.0 })
        .collect();
    let last = &stages.last().expect("stage").1;
    let mut series = TimeSeries::new(grid);
    let names = [channel::COS2_THETA, channel::LY, channel::L2];
    let mut revival_means = std::collections::BTreeMap::new();
    for ((name, col), tr) in names.iter().zip(cols).zip(last) {
        series.push(name, col)?;
        revival_means.insert(name.to_string(), tr.mean());
    }
    series.push(channel::LY_NORM, norm)?;
    let report = RunReport {
        cutoff: prep.basis.j_max,
        basis_size: prep.basis.len(),
        initial_states: prep.thermal.states.len(),
        captured_weight: prep.thermal.captured,
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

/// Angular momentum right after the second pulse as a function of the
/// delay, for sudden pulses. The second pulse `exp(iP₂A)` acts on `J_z`
/// and `J²` through commutators that close after one and two orders:
/// `J_z → J_z + P₂ i[J_z, A]`,
/// `J² → J² + P₂ i[J², A] + P₂² (4A − 4A²)`,
/// so every delay follows from traces of the first-pulse packet.
/// The time setting of the second pulse is ignored.
pub fn delay_scan(cfg: &QuantumSymtopConfig, delays: &[f64]) -> Result<DelayScan> {
    if cfg.pulses.len() != 2 {
        return param("a delay scan needs two pulses");
    }
    if delays.iter().any(|d| !(*d >= 0.0)) {
        return param("delays must be >= 0");
    }
    let prep = prepare(cfg)?;
    let amps = AmplitudeMatrix::initial(prep.basis.clone(), &prep.thermal.states)?;
    let amps = solve_pulse(&amps, cfg.pulses[0].strength, 0.0, cfg.fwhm)?;
    let (p2, phi) = (cfg.pulses[1].strength, prep.angles[1]);
    if cfg.fwhm > 0.0 {
        return scan_explicit(&amps, p2, phi, cfg.fwhm, delays);
    }
    let jz = amps.trace(j_z);
    let j2 = amps.trace(j_squared);
    let g = amps.trace(|b| jz_commutator(b, &coupling_matrix(b, phi)));
    let h1 = amps.trace(|b| j2_commutator(b, &coupling_matrix(b, phi)));
    let h2 = amps.trace(|b| {
        let a = coupling_matrix(b, phi);
        a.scale(C::new(4.0, 0.0))
            .add(&a.product(&a).scale(C::new(-4.0, 0.0)))
    });
    let ts: Vec<f64> = delays.iter().map(|d| rev_to_dimless(*d)).collect();
    let [jz, j2, g, h1, h2] = [jz, j2, g, h1, h2].map(|t| t.eval_many(&ts));
    let ly: Vec<f64> = (0..ts.len()).map(|i| jz[i] + p2 * g[i]).collect();
    let l2: Vec<f64> = (0..ts.len())
        .map(|i| j2[i] + p2 * h1[i] + p2 * p2 * h2[i])
        .collect();
    Ok(finish_scan(delays, ly, l2))
}

fn finish_scan(delays: &[f64], ly: Vec<f64>, l2: Vec<f64>) -> DelayScan {
    let ly_norm = ly
        .iter()
        .zip(&l2)
        .map(|(a, b)| if *b > 0.0 { a / b.sqrt() } else { 0.0 })
        .collect();
    DelayScan {
        delays: delays.to_vec(),
        // in-plane pulses never couple opposite M parities, so the
        // transverse components vanish identically
        lx: vec![0.0; delays.len()],
        lz: vec![0.0; delays.len()],
        ly,
        l2,
        ly_norm,
    }
}

/// Delay scan by explicit propagation through the second pulse.
pub fn scan_explicit(
    after_first: &AmplitudeMatrix,
    strength: f64,
    phi: f64,
    fwhm: f64,
    delays: &[f64],
) -> Result<DelayScan> {
    let mut ly = Vec::with_capacity(delays.len());
    let mut l2 = Vec::with_capacity(delays.len());
    for &d in delays {
        let b = solve_pulse(&after_first.evolve(d), strength, phi, fwhm)?;
        ly.push(b.trace(j_z).mean());
        l2.push(b.trace(j_squared).mean());
    }
    Ok(finish_scan(delays, ly, l2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::wigner::d_conj_element;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

    fn small_set(sigma: f64) -> ThermalSet {
        symtop_initial_states(sigma, 2.0, &SpinWeights::Uniform).unwrap()
    }

    fn setup(j_max: i32, sigma: f64) -> AmplitudeMatrix {
        let th = small_set(sigma);
        let k_max = th.states.iter().map(|s| s.state.k).max().unwrap();
        let basis = Arc::new(SymTopBasis::new(j_max, k_max, 2.0));
        AmplitudeMatrix::initial(basis, &th.states).unwrap()
    }

    #[test]
    fn full_basis_count_and_energies() {
        let b = Basis::symtop_full(5, 2.0);
        assert_eq!(
            b.len(),
            (0..=5).map(|j| (2 * j + 1) * (2 * j + 1)).sum::<i32>() as usize
        );
        for (i, s) in b.states().iter().enumerate() {
            let e = 0.5 * (s.j * (s.j + 1)) as f64 - 0.25 * (s.k * s.k) as f64;
            assert_abs_diff_eq!(b.energy(i), e, epsilon = 1e-14);
            let mirror = b.find(RotState::new(s.j, -s.k, s.m)).unwrap();
            assert_eq!(b.energy(mirror), b.energy(i));
        }
    }

    #[test]
    fn coupling_selection_rules() {
        let b = Basis::symtop_full(5, 2.0);
        for phi in [0.0, 0.3, -FRAC_PI_4] {
            let a = coupling_matrix(&b, phi);
            assert!(a.hermiticity_error() < 1e-12);
            for (r, c, v) in a.entries() {
                let (sr, sc) = (b.state(r), b.state(c));
                assert_eq!(sr.k, sc.k, "ΔK = 0");
                let dm = (sr.m - sc.m).abs();
                assert!(dm == 0 || dm == 2, "{sr:?} {sc:?} {v}");
                assert!((sr.j - sc.j).abs() <= 2);
                if sr.k * sr.m == 0 && sc.k * sc.m == 0 && dm == 0 {
                    assert!((sr.j - sc.j) % 2 == 0, "ΔJ even for KM = 0");
                }
            }
        }
        // ⟨2,0,0|D²*₀₀|0,0,0⟩ = 1/√5 and ⟨000|D²|000⟩ = 0
        let e = d_conj_element(2, 0, 0, 2, 0, 0, 0, 0);
        assert_abs_diff_eq!(e, 1.0 / 5f64.sqrt(), epsilon = 1e-14);
        assert_eq!(d_conj_element(0, 0, 0, 2, 0, 0, 0, 0), 0.0);
    }

    #[test]
    fn blocks_partition_the_basis() {
        let b = SymTopBasis::new(6, 6, 2.0);
        let full = Basis::symtop_full(6, 2.0);
        let k_nonneg = full.states().iter().filter(|s| s.k >= 0).count();
        assert_eq!(b.len(), k_nonneg);
        for blk in &b.blocks {
            assert!(blk
                .basis
                .states()
                .iter()
                .all(|s| s.k == blk.k && (s.m - blk.m_parity) % 2 == 0));
        }
    }

    #[test]
    fn single_pulse_rows_are_unit_and_selection_respected() {
        let amps = setup(26, 1.0);
        let one = solve_pulse(&amps, -3.0, 0.0, 0.0).unwrap();
        assert!(one.unitarity_error() < 1e-10);
        let zero = solve_pulse(&amps, 0.0, 0.3, 0.0).unwrap();
        for (a, b) in zero.blocks.iter().zip(&amps.blocks) {
            assert_eq!(a.rows, b.rows);
        }
        // from |000⟩ only K = 0, even M and even J are reached
        let g = AmplitudeMatrix::initial(
            amps.basis.clone(),
            &[InitialState {
                state: RotState::new(0, 0, 0),
                weight: 1.0,
            }],
        )
        .unwrap();
        let k = solve_pulse(&g, 3.0, 0.0, 0.0).unwrap();
        let basis = &k.basis.blocks[k.blocks[0].block].basis;
        for (i, c) in k.blocks[0].rows[0].iter().enumerate() {
            let s = basis.state(i);
            if s.j % 2 == 1 || s.m % 2 != 0 {
                assert!(c.norm() < 1e-14);
            }
        }
    }

    #[test]
    fn finite_pulse_converges_to_sudden() {
        let amps = setup(22, 0.6);
        let s = solve_pulse(&amps, -2.0, 0.0, 0.0).unwrap();
        let f = solve_pulse(&amps, -2.0, 0.0, 1e-5).unwrap();
        let mut worst: f64 = 0.0;
        for (a, b) in s.blocks.iter().zip(&f.blocks) {
            for (x, y) in a.rows.iter().zip(&b.rows) {
                for (u, v) in x.iter().zip(y) {
                    worst = worst.max((u - v).norm());
                }
            }
        }
        assert!(worst < 1e-4, "{worst}");
        assert!(f.unitarity_error() < 1e-8);
    }

    fn max_row_diff(a: &AmplitudeMatrix, b: &AmplitudeMatrix) -> f64 {
        a.blocks
            .iter()
            .zip(&b.blocks)
            .flat_map(|(x, y)| x.rows.iter().zip(&y.rows))
            .flat_map(|(u, v)| u.iter().zip(v).map(|(p, q)| (p - q).norm()))
            .fold(0.0, f64::max)
    }

    #[test]
    fn composition_matches_explicit_propagation() {
        let amps = setup(20, 0.8);
        let (p1, p2) = (-1.5, -1.0);
        let first = solve_pulse(&amps, p1, 0.0, 0.0).unwrap();
        let prop = PulsePropagator::new(first.basis.clone(), p2, 0.0).unwrap();
        let mut rng = 0.123_f64;
        for _ in 0..5 {
            rng = (rng * 9301.0 + 0.4927).fract();
            let tau = 0.3 * rng;
            for dphi in [FRAC_PI_4, -FRAC_PI_4, 1.1] {
                let composed = compose_two_pulses(&first, &prop, tau, dphi).unwrap();
                // explicit: evolve, kick at the rotated polarization, refer back to t = 0
                let explicit = solve_pulse(&first.evolve(tau), p2, dphi, 0.0)
                    .unwrap()
                    .evolve(-tau);
                assert!(max_row_diff(&composed, &explicit) < 1e-8);
            }
        }
        // τ = 0, Δφ = 0 adds the strengths
        let both = compose_two_pulses(&first, &prop, 0.0, 0.0).unwrap();
        let once = solve_pulse(&amps, p1 + p2, 0.0, 0.0).unwrap();
        assert!(max_row_diff(&both, &once) < 1e-10);
        // P₂ = 0 leaves the rows alone
        let none = PulsePropagator::new(first.basis.clone(), 0.0, 0.0).unwrap();
        let same = compose_two_pulses(&first, &none, 0.17, 0.9).unwrap();
        assert!(max_row_diff(&same, &first) < 1e-12);
    }

    #[test]
    fn angular_momentum_sign_follows_the_angle() {
        let amps = setup(28, 0.8);
        let first = solve_pulse(&amps, -1.5, 0.0, 0.0).unwrap();
        for tau in [0.01, 0.05, 0.13] {
            let a = solve_pulse(&first.evolve(tau), -1.5, FRAC_PI_4, 0.0).unwrap();
            let b = solve_pulse(&first.evolve(tau), -1.5, -FRAC_PI_4, 0.0).unwrap();
            let (ja, jb) = (a.trace(j_z).mean(), b.trace(j_z).mean());
            assert!(ja.abs() > 1e-4);
            assert_abs_diff_eq!(ja, -jb, epsilon = 1e-10);
        }
    }

    #[test]
    fn plus_and_minus_k_give_the_same_observables() {
        let basis = Arc::new(SymTopBasis::new(22, 3, 2.0));
        let full = Basis::symtop_full(22, 2.0);
        for (j, k, m) in [(3, 2, 1), (2, 1, -2), (3, 3, 0)] {
            let init = AmplitudeMatrix::initial(
                basis.clone(),
                &[InitialState {
                    state: RotState::new(j, k, m),
                    weight: 1.0,
                }],
            )
            .unwrap();
            let kicked = solve_pulse(&init, -2.0, 0.4, 0.0).unwrap();
            let t = kicked.trace(|b| coupling_matrix(b, 0.0));
            let lz = kicked.trace(j_z).mean();
            // mirror state −K in the full basis
            let c = Coupling::new(&full, &Vector3::new(0.4f64.cos(), 0.4f64.sin(), 0.0));
            let mut e = vec![ZERO; full.len()];
            e[full.find(RotState::new(j, -k, m)).unwrap()] = C::new(1.0, 0.0);
            let psi = c.sudden(&e, -2.0);
            let mut tr = Trace::new(full.max_key());
            tr.add(&full, &cos2_along(&full, &Vector3::x()), &psi, 1.0);
            for s in [0.0, 0.3, 1.7] {
                assert_abs_diff_eq!(t.eval(s), tr.eval(s), epsilon = 1e-10);
            }
            assert_abs_diff_eq!(lz, j_z(&full).expectation(&psi).re, epsilon = 1e-10);
        }
    }

    fn benzene(p1: f64, p2: Option<f64>) -> QuantumSymtopConfig {
        let mut cfg = QuantumSymtopConfig::new(MoleculeParams::benzene(), 0.9)
            .with_pulse(ScheduledPulse::at(p1, Vector3::z(), 0.0))
            .with_grid(0.2, 0.002);
        if let Some(p2) = p2 {
            cfg = cfg.with_pulse(ScheduledPulse::auto(
                p2,
                Vector3::new(-FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2),
            ));
        }
        cfg
    }

    #[test]
    fn heisenberg_scan_matches_explicit_scan() {
        let mut cfg = benzene(-1.0, Some(-1.0));
        cfg.temperature_k = 0.3;
        cfg.j_max = Some(24);
        let delays = [0.0, 0.013, 0.04, 0.11, 0.37];
        let fast = delay_scan(&cfg, &delays).unwrap();
        let prep = prepare(&cfg).unwrap();
        let amps = AmplitudeMatrix::initial(prep.basis.clone(), &prep.thermal.states).unwrap();
        let first = solve_pulse(&amps, -1.0, 0.0, 0.0).unwrap();
        let slow = scan_explicit(&first, -1.0, prep.angles[1], 0.0, &delays).unwrap();
        for i in 0..delays.len() {
            assert_abs_diff_eq!(fast.ly[i], slow.ly[i], epsilon = 1e-8);
            assert_abs_diff_eq!(fast.l2[i], slow.l2[i], epsilon = 1e-8);
        }
        assert!(fast.ly.iter().skip(1).any(|v| v.abs() > 1e-3));
        // flipping the second polarization flips the momentum
        cfg.pulses[1].polarization = [FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2];
        let flip = delay_scan(&cfg, &delays).unwrap();
        for i in 0..delays.len() {
            assert_abs_diff_eq!(fast.ly[i], -flip.ly[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn no_pulses_stay_isotropic() {
        let cfg = QuantumSymtopConfig::new(MoleculeParams::benzene(), 0.9).with_grid(0.1, 0.05);
        let run = thermal_run(&cfg).unwrap();
        for v in run.series.channel(channel::COS2_THETA).unwrap() {
            assert_abs_diff_eq!(*v, 1.0 / 3.0, epsilon = 1e-12);
        }
        for v in run.series.channel(channel::LY).unwrap() {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn anti_alignment_and_revival() {
        let run = thermal_run(&benzene(-3.0, None).with_grid(0.1, 0.002)).unwrap();
        let c = run.series.channel(channel::COS2_THETA).unwrap();
        assert_abs_diff_eq!(c[0], 1.0 / 3.0, epsilon = 1e-10);
        assert!(c.iter().cloned().fold(1.0, f64::min) < 0.2);
        // autocovariance peaks at the full revival
        let prep = prepare(&benzene(-3.0, None)).unwrap();
        let amps = AmplitudeMatrix::initial(prep.basis.clone(), &prep.thermal.states).unwrap();
        let tr = solve_pulse(&amps, -3.0, 0.0, 0.0)
            .unwrap()
            .trace(|b| coupling_matrix(b, 0.0));
        let s: Vec<f64> = (0..=400)
            .map(|i| 2.0 * PI * (0.9 + 0.2 * i as f64 / 400.0))
            .collect();
        let ac: Vec<f64> = s.iter().map(|x| tr.autocorrelation(*x)).collect();
        let peaks: Vec<f64> = (1..ac.len() - 1)
            .filter(|&i| ac[i] > ac[i - 1] && ac[i] >= ac[i + 1])
            .map(|i| s[i])
            .collect();
        assert!(
            peaks.iter().any(|p| (p / (2.0 * PI) - 1.0).abs() < 0.01),
            "{peaks:?}"
        );
        assert_abs_diff_eq!(tr.eval(0.37), tr.eval(0.37 + 2.0 * PI), epsilon = 1e-8);
    }

    #[test]
    fn truncation_doubling() {
        let mut cfg = benzene(-1.0, Some(-1.0)).with_grid(0.1, 0.005);
        cfg.temperature_k = 0.3;
        let a = thermal_run(&cfg).unwrap();
        cfg.j_max = Some(2 * a.report.cutoff);
        let b = thermal_run(&cfg).unwrap();
        for name in a.series.names() {
            let (x, y) = (
                a.series.channel(name).unwrap(),
                b.series.channel(name).unwrap(),
            );
            let worst = x
                .iter()
                .zip(y)
                .map(|(u, v)| (u - v).abs())
                .fold(0.0, f64::max);
            assert!(worst < 1e-6, "{name} {worst}");
        }
    }

    #[test]
    fn rejects_out_of_plane_polarization() {
        let cfg = QuantumSymtopConfig::new(MoleculeParams::benzene(), 0.9)
            .with_pulse(ScheduledPulse::at(-1.0, Vector3::y(), 0.0));
        assert!(matches!(thermal_run(&cfg), Err(Error::Parameter(_))));
        assert!(propagation_angle(&Vector3::z()).unwrap().abs() < 1e-15);
        assert_abs_diff_eq!(
            propagation_angle(&Vector3::new(-FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2)).unwrap(),
            -FRAC_PI_4,
            epsilon = 1e-15
        );
    }
}
