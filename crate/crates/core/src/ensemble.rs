//! Monte Carlo protocol engine: thermal sampling, kicks at fixed or
//! automatically located times, free propagation and ensemble averages.
//!
//! Sums over molecules always run in molecule-index order, with the two
//! members of a pair added together first. Parallelism is over output times
//! (or delays), so the results do not depend on the number of threads.

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::linear::{cos2_phi, kick_linear, propagate_linear, UnitSphereState};
use crate::sampling::{molecule_rng, sample_linear, sample_symtop};
use crate::series::{channel, uniform_grid, TimeSeries};
use crate::symtop::{kick_symtop, propagate_symtop, SymTopState};
use crate::units::{rev_to_dimless, sigma_th, MoleculeKind, MoleculeParams, PulseSpec};

/// Step of the alignment-extremum scan, in revival units.
pub const SCAN_STEP: f64 = 1.0 / 2000.0;

/// Classical rotor that can be kicked and propagated freely.
pub trait Rotor: Copy + Send + Sync {
    fn kick(&self, pulse: &PulseSpec) -> Self;
    /// Free motion over a dimensionless time.
    fn advance(&self, dt: f64) -> Self;
    fn axis(&self) -> Vector3<f64>;
    fn momentum(&self) -> Vector3<f64>;
    /// Image under a half turn about the lab `z` axis.
    fn half_turn_z(&self) -> Self;
}

fn c2z(v: Vector3<f64>) -> Vector3<f64> {
    Vector3::new(-v.x, -v.y, v.z)
}

impl Rotor for UnitSphereState {
    fn kick(&self, pulse: &PulseSpec) -> Self {
        kick_linear(self, pulse)
    }
    fn advance(&self, dt: f64) -> Self {
        propagate_linear(self, dt)
    }
    fn axis(&self) -> Vector3<f64> {
        self.r
    }
    fn momentum(&self) -> Vector3<f64> {
        self.angular_momentum()
    }
    fn half_turn_z(&self) -> Self {
        Self {
            r: c2z(self.r),
            v: c2z(self.v),
        }
    }
}

impl Rotor for SymTopState {
    fn kick(&self, pulse: &PulseSpec) -> Self {
        kick_symtop(self, pulse)
    }
    fn advance(&self, dt: f64) -> Self {
        propagate_symtop(self, dt)
    }
    fn axis(&self) -> Vector3<f64> {
        self.r
    }
    fn momentum(&self) -> Vector3<f64> {
        self.l
    }
    fn half_turn_z(&self) -> Self {
        Self {
            r: c2z(self.r),
            l: c2z(self.l),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseTime {
    /// Fixed time in revival units.
    At(f64),
    /// First extremum of `⟨cos²θ⟩` after the previous pulse: a maximum for
    /// `P₁ > 0`, a minimum for `P₁ < 0`.
    AutoExtremum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduledPulse {
    pub strength: f64,
    pub polarization: [f64; 3],
    pub time: PulseTime,
}

impl ScheduledPulse {
    pub fn at(strength: f64, polarization: Vector3<f64>, t: f64) -> Self {
        Self {
            strength,
            polarization: polarization.into(),
            time: PulseTime::At(t),
        }
    }

    pub fn auto(strength: f64, polarization: Vector3<f64>) -> Self {
        Self {
            strength,
            polarization: polarization.into(),
            time: PulseTime::AutoExtremum,
        }
    }

    pub fn resolve(&self, t: f64) -> Result<PulseSpec> {
        PulseSpec::new(self.strength, Vector3::from(self.polarization), t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub molecule: MoleculeParams,
    pub temperature_k: f64,
    pub n_traj: usize,
    pub seed: u64,
    pub pulses: Vec<ScheduledPulse>,
    /// Output grid end, revival units.
    pub t_max: f64,
    /// Output grid step, revival units.
    pub dt_out: f64,
    /// Sample molecules in pairs related by a half turn about `z`. This makes
    /// `⟨L_y⟩` vanish exactly after a `z` pulse and flip sign exactly when the
    /// second polarization is mirrored through the `y`–`z` plane.
    #[serde(default = "default_true")]
    pub symmetrize: bool,
}

fn default_true() -> bool {
    true
}

impl EnsembleConfig {
    pub fn new(molecule: MoleculeParams, temperature_k: f64, n_traj: usize, seed: u64) -> Self {
        Self {
            molecule,
            temperature_k,
            n_traj,
            seed,
            pulses: Vec::new(),
            t_max: 1.0,
            dt_out: 1e-3,
            symmetrize: true,
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

    pub fn validate(&self) -> Result<()> {
        self.molecule.validate()?;
        sigma_th(&self.molecule, self.temperature_k)?;
        if self.n_traj == 0 {
            return param("n_traj must be at least 1");
        }
        uniform_grid(self.t_max, self.dt_out)?;
        let mut last = f64::NEG_INFINITY;
        for (i, p) in self.pulses.iter().enumerate() {
            p.resolve(0.0)?;
            match p.time {
                PulseTime::At(t) => {
                    if !(t >= 0.0) || !t.is_finite() {
                        return param(format!("pulse {} time must be >= 0", i + 1));
                    }
                    if t < last {
                        return param("pulses must be sorted by time");
                    }
                    last = t;
                }
                PulseTime::AutoExtremum => {
                    if i != 1 {
                        return param("an automatic time is only allowed for the second pulse");
                    }
                }
            }
        }
        Ok(())
    }

    fn polarization_1(&self) -> Vector3<f64> {
        self.pulses
            .first()
            .map(|p| Vector3::from(p.polarization))
            .unwrap_or_else(Vector3::z)
    }
}

/// Molecules after the last pulse, with the resolved pulse times.
#[derive(Debug, Clone)]
pub enum FinalEnsemble {
    Linear(Vec<UnitSphereState>),
    Symtop(Vec<SymTopState>),
}

impl FinalEnsemble {
    pub fn len(&self) -> usize {
        match self {
            FinalEnsemble::Linear(v) => v.len(),
            FinalEnsemble::Symtop(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Per-molecule sample; odd members of a symmetrized pair are the half-turn
/// image of their partner.
fn sample_all<R: Rotor>(cfg: &EnsembleConfig, draw: impl Fn(u64) -> R + Sync) -> Vec<R> {
    (0..cfg.n_traj)
        .into_par_iter()
        .map(|i| {
            if cfg.symmetrize {
                let base = draw((i / 2) as u64);
                if i % 2 == 1 {
                    base.half_turn_z()
                } else {
                    base
                }
            } else {
                draw(i as u64)
            }
        })
        .collect()
}

/// Sum of `f` over molecules in index order, pairs added together first.
fn pair_sum<R, const N: usize>(mols: &[R], f: impl Fn(&R) -> [f64; N]) -> [f64; N] {
    let mut acc = [0.0; N];
    for pair in mols.chunks(2) {
        let a = f(&pair[0]);
        let s = match pair.get(1) {
            Some(m) => {
                let b = f(m);
                std::array::from_fn(|k| a[k] + b[k])
            }
            None => a,
        };
        for k in 0..N {
            acc[k] += s[k];
        }
    }
    acc
}

struct Stage<R> {
    t: f64,
    mols: Vec<R>,
}

struct Protocol<R> {
    stages: Vec<Stage<R>>,
    pulses: Vec<PulseSpec>,
    auto_delay: Option<f64>,
}

fn alignment_sum<R: Rotor>(mols: &[R], p: &Vector3<f64>, dt: f64) -> f64 {
    pair_sum(mols, |m| {
        let c = m.advance(dt).axis().dot(p);
        [c * c]
    })[0]
}

/// Parabolic vertex offset (in steps, within ±1) when `b` is a local
/// maximum (or minimum) of three equally spaced samples.
pub fn bracket(a: f64, b: f64, c: f64, maximum: bool) -> Option<f64> {
    let hit = if maximum {
        a < b && b >= c
    } else {
        a > b && b <= c
    };
    if !hit {
        return None;
    }
    let curv = a - 2.0 * b + c;
    let shift = if curv != 0.0 {
        0.5 * (a - c) / curv
    } else {
        0.0
    };
    Some(shift.clamp(-1.0, 1.0))
}

/// First extremum of `⟨(p·r)²⟩` after `t0`, parabolically refined.
fn find_extremum<R: Rotor>(
    mols: &[R],
    p: &Vector3<f64>,
    maximum: bool,
    t0: f64,
    t_end: f64,
) -> Result<f64> {
    const BLOCK: usize = 256;
    let n_steps = ((t_end - t0) / SCAN_STEP).floor() as usize;
    let mut f: Vec<f64> = Vec::new();
    let mut start = 0;
    while start <= n_steps {
        let stop = (start + BLOCK).min(n_steps + 1);
        let block: Vec<f64> = (start..stop)
            .into_par_iter()
            .map(|k| alignment_sum(mols, p, rev_to_dimless(k as f64 * SCAN_STEP)))
            .collect();
        f.extend(block);
        for k in start.max(1)..stop.saturating_sub(1) {
            if let Some(shift) = bracket(f[k - 1], f[k], f[k + 1], maximum) {
                return Ok(t0 + (k as f64 + shift) * SCAN_STEP);
            }
        }
        // keep the last point to bracket across blocks
        start = stop - 1;
        if stop == n_steps + 1 {
            break;
        }
    }
    Err(Error::Protocol(format!(
        "no alignment {} found in the scan window [{t0:.6}, {t_end:.6}] T_rev",
        if maximum { "maximum" } else { "minimum" }
    )))
}

fn build_protocol<R: Rotor>(cfg: &EnsembleConfig, initial: Vec<R>) -> Result<Protocol<R>> {
    let mut stages = vec![Stage {
        t: 0.0,
        mols: initial,
    }];
    let mut pulses = Vec::new();
    let mut auto_delay = None;
    for sp in &cfg.pulses {
        let prev = stages.last().expect("initial stage");
        let t = match sp.time {
            PulseTime::At(t) => t,
            PulseTime::AutoExtremum => {
                let p1 = pulses
                    .first()
                    .map(PulseSpec::pol)
                    .unwrap_or_else(Vector3::z);
                let p1_strength = cfg.pulses[0].strength;
                if p1_strength == 0.0 {
                    return Err(Error::Protocol(
                        "automatic timing needs a first pulse with P != 0".into(),
                    ));
                }
                let maximum = p1_strength > 0.0;
                let horizon = cfg.t_max.max(prev.t + 1.0);
                let t = find_extremum(&prev.mols, &p1, maximum, prev.t, horizon)?;
                auto_delay = Some(t - prev.t);
                t
            }
        };
        let pulse = sp.resolve(t)?;
        let dt = rev_to_dimless(t - prev.t);
        let mols = prev
            .mols
            .par_iter()
            .map(|m| m.advance(dt).kick(&pulse))
            .collect();
        stages.push(Stage { t, mols });
        pulses.push(pulse);
    }
    Ok(Protocol {
        stages,
        pulses,
        auto_delay,
    })
}

/// Channel sums: z², cos²φ, cos²φ count, Lx, Ly, Lz, L².
fn observe<R: Rotor>(m: &R, p1: &Vector3<f64>) -> [f64; 7] {
    let r = m.axis();
    let c = r.dot(p1);
    let l = m.momentum();
    let (cp, n) = match cos2_phi(&r) {
        Some(v) => (v, 1.0),
        None => (0.0, 0.0),
    };
    [c * c, cp, n, l.x, l.y, l.z, l.norm_squared()]
}

fn record<R: Rotor>(cfg: &EnsembleConfig, proto: &Protocol<R>) -> Result<TimeSeries> {
    let grid = uniform_grid(cfg.t_max, cfg.dt_out)?;
    let p1 = cfg.polarization_1();
    let n = cfg.n_traj as f64;
    let sums: Vec<[f64; 7]> = grid
        .par_iter()
        .map(|&t| {
            let stage = proto
                .stages
                .iter()
                .rev()
                .find(|s| s.t <= t)
                .expect("stage at t = 0");
            let dt = rev_to_dimless(t - stage.t);
            pair_sum(&stage.mols, |m| observe(&m.advance(dt), &p1))
        })
        .collect();

    let mut ts = TimeSeries::new(grid);
    let col = |k: usize| sums.iter().map(|s| s[k] / n).collect::<Vec<_>>();
    ts.push(channel::COS2_THETA, col(0))?;
    ts.push(
        channel::COS2_PHI,
        sums.iter()
            .map(|s| if s[2] > 0.0 { s[1] / s[2] } else { 0.5 })
            .collect(),
    )?;
    ts.push(channel::LX, col(3))?;
    ts.push(channel::LY, col(4))?;
    ts.push(channel::LZ, col(5))?;
    ts.push(channel::L2, col(6))?;
    ts.push(
        channel::LY_NORM,
        sums.iter().map(|s| ratio(s[4], s[6], n)).collect(),
    )?;
    ts.set_meta(
        "config",
        serde_json::to_value(cfg).expect("config serializes"),
    );
    ts.set_meta("seed", cfg.seed);
    ts.set_meta(
        "pulse_times",
        proto.pulses.iter().map(|p| p.t_apply).collect::<Vec<_>>(),
    );
    if let Some(d) = proto.auto_delay {
        ts.set_meta("auto_delay", d);
    }
    ts.set_meta("source", "classical");
    Ok(ts)
}

fn ratio(ly_sum: f64, l2_sum: f64, n: f64) -> f64 {
    if l2_sum > 0.0 {
        (ly_sum / n) / (l2_sum / n).sqrt()
    } else {
        0.0
    }
}

fn linear_initial(cfg: &EnsembleConfig) -> Result<Vec<UnitSphereState>> {
    let sigma = sigma_th(&cfg.molecule, cfg.temperature_k)?.perpendicular;
    Ok(sample_all(cfg, |i| {
        sample_linear(sigma, &mut molecule_rng(cfg.seed, i))
    }))
}

fn symtop_initial(cfg: &EnsembleConfig) -> Result<Vec<SymTopState>> {
    let w = sigma_th(&cfg.molecule, cfg.temperature_k)?;
    let s3 = w.axial.unwrap_or(0.0);
    Ok(sample_all(cfg, |i| {
        sample_symtop(w.perpendicular, s3, &mut molecule_rng(cfg.seed, i))
    }))
}

/// Runs the full pulse protocol and records every channel on the output grid.
pub fn run_protocol(cfg: &EnsembleConfig) -> Result<TimeSeries> {
    cfg.validate()?;
    match cfg.molecule.kind {
        MoleculeKind::Linear => record(cfg, &build_protocol(cfg, linear_initial(cfg)?)?),
        MoleculeKind::OblateSymtop => record(cfg, &build_protocol(cfg, symtop_initial(cfg)?)?),
    }
}

/// Ensemble right after the last pulse, and the resolved pulse times.
pub fn final_ensemble(cfg: &EnsembleConfig) -> Result<(FinalEnsemble, Vec<f64>)> {
    cfg.validate()?;
    fn finish<R: Rotor>(p: Protocol<R>) -> (Vec<R>, Vec<f64>) {
        let times = p.pulses.iter().map(|p| p.t_apply).collect();
        (p.stages.into_iter().last().expect("stage").mols, times)
    }
    Ok(match cfg.molecule.kind {
        MoleculeKind::Linear => {
            let (m, t) = finish(build_protocol(cfg, linear_initial(cfg)?)?);
            (FinalEnsemble::Linear(m), t)
        }
        MoleculeKind::OblateSymtop => {
            let (m, t) = finish(build_protocol(cfg, symtop_initial(cfg)?)?);
            (FinalEnsemble::Symtop(m), t)
        }
    })
}

/// Stationary angular momentum after the second pulse, for each delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayScan {
    /// Delays after the first pulse, revival units.
    pub delays: Vec<f64>,
    pub lx: Vec<f64>,
    pub ly: Vec<f64>,
    pub lz: Vec<f64>,
    pub l2: Vec<f64>,
    pub ly_norm: Vec<f64>,
}

impl DelayScan {
    /// Delay of the largest `|⟨L_y⟩|/√⟨L²⟩`.
    pub fn best_delay(&self) -> Option<f64> {
        self.ly_norm
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(i, _)| self.delays[i])
    }

    /// Delay of the largest `|⟨L_y⟩|/√⟨L²⟩` before `⟨L_y⟩` first changes
    /// sign. Values below 1% of the overall peak do not set the sign.
    pub fn best_delay_first_lobe(&self) -> Option<f64> {
        let peak = self.ly_norm.iter().fold(0.0, |a: f64, b| a.max(b.abs()));
        let start = self.ly_norm.iter().position(|v| v.abs() > 0.01 * peak)?;
        let sign = self.ly_norm[start].signum();
        let mut best = start;
        for (i, v) in self.ly_norm.iter().enumerate().skip(start) {
            if v.signum() != sign && v.abs() > 0.01 * peak {
                break;
            }
            if v.abs() > self.ly_norm[best].abs() {
                best = i;
            }
        }
        Some(self.delays[best])
    }

    pub fn to_series(&self) -> TimeSeries {
        let mut ts = TimeSeries::new(self.delays.clone());
        for (name, v) in [
            (channel::LX, &self.lx),
            (channel::LY, &self.ly),
            (channel::LZ, &self.lz),
            (channel::L2, &self.l2),
            (channel::LY_NORM, &self.ly_norm),
        ] {
            ts.push(name, v.clone()).expect("same length");
        }
        ts
    }
}

fn scan_delays<R: Rotor>(
    after_first: &[R],
    second: &ScheduledPulse,
    delays: &[f64],
) -> Result<DelayScan> {
    let pulse = second.resolve(0.0)?;
    let n = after_first.len() as f64;
    let sums: Vec<[f64; 4]> = delays
        .par_iter()
        .map(|&d| {
            let dt = rev_to_dimless(d);
            pair_sum(after_first, |m| {
                let l = m.advance(dt).kick(&pulse).momentum();
                [l.x, l.y, l.z, l.norm_squared()]
            })
        })
        .collect();
    Ok(DelayScan {
        delays: delays.to_vec(),
        lx: sums.iter().map(|s| s[0] / n).collect(),
        ly: sums.iter().map(|s| s[1] / n).collect(),
        lz: sums.iter().map(|s| s[2] / n).collect(),
        l2: sums.iter().map(|s| s[3] / n).collect(),
        ly_norm: sums.iter().map(|s| ratio(s[1], s[3], n)).collect(),
    })
}

/// Two-pulse protocol for each delay with the same molecules throughout.
/// The first pulse keeps its configured time; the time setting of the
/// second pulse is ignored.
pub fn delay_scan(cfg: &EnsembleConfig, delays: &[f64]) -> Result<DelayScan> {
    if cfg.pulses.len() < 2 {
        return param("a delay scan needs two pulses");
    }
    let mut one = cfg.clone();
    one.pulses.truncate(1);
    one.validate()?;
    if delays.iter().any(|d| !(*d >= 0.0)) {
        return param("delays must be >= 0");
    }
    match cfg.molecule.kind {
        MoleculeKind::Linear => {
            let p = build_protocol(&one, linear_initial(&one)?)?;
            scan_delays(&p.stages[1].mols, &cfg.pulses[1], delays)
        }
        MoleculeKind::OblateSymtop => {
            let p = build_protocol(&one, symtop_initial(&one)?)?;
            scan_delays(&p.stages[1].mols, &cfg.pulses[1], delays)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn n2(p1: f64, p2: f64, n: usize) -> EnsembleConfig {
        EnsembleConfig::new(MoleculeParams::nitrogen(), 50.0, n, 1)
            .with_pulse(ScheduledPulse::at(p1, Vector3::z(), 0.0))
            .with_pulse(ScheduledPulse::auto(
                p2,
                Vector3::new(FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2),
            ))
            .with_grid(0.3, 0.01)
    }

    #[test]
    fn no_pulses_stay_isotropic() {
        let cfg =
            EnsembleConfig::new(MoleculeParams::nitrogen(), 50.0, 20000, 3).with_grid(1.0, 0.1);
        let ts = run_protocol(&cfg).unwrap();
        for v in ts.channel(channel::COS2_THETA).unwrap() {
            // SE of z² for isotropic directions is sqrt(4/45 / N)
            assert!((v - 1.0 / 3.0).abs() < 4.0 * (4.0 / 45.0 / 20000.0f64).sqrt());
        }
        for v in ts.channel(channel::COS2_PHI).unwrap() {
            assert!((v - 0.5).abs() < 4.0 * (0.125 / 20000.0f64).sqrt());
        }
        for v in ts.channel(channel::LY).unwrap() {
            assert_eq!(*v, 0.0);
        }
    }

    #[test]
    fn bit_identical_reruns() {
        let cfg = n2(5.0, 5.0, 500);
        let a = run_protocol(&cfg).unwrap();
        let b = run_protocol(&cfg).unwrap();
        assert_eq!(a.to_csv_string(), b.to_csv_string());
        assert!(a.meta.contains_key("auto_delay"));
    }

    #[test]
    fn thread_count_does_not_matter() {
        let cfg = n2(5.0, 5.0, 300);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let three = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let a = one.install(|| run_protocol(&cfg)).unwrap();
        let b = three.install(|| run_protocol(&cfg)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn auto_delay_is_an_alignment_maximum() {
        let mut cfg = n2(5.0, 5.0, 2000);
        let ts = run_protocol(&cfg).unwrap();
        let d = ts.meta["auto_delay"].as_f64().unwrap();
        cfg.pulses.truncate(1);
        cfg.dt_out = SCAN_STEP;
        let one = run_protocol(&cfg).unwrap();
        let c = one.channel(channel::COS2_THETA).unwrap();
        let k = (d / SCAN_STEP).round() as usize;
        assert!(c[k] >= c[k - 1] && c[k] >= c[k + 1]);
        assert!((1..k - 1).all(|j| !(c[j] > c[j - 1] && c[j] >= c[j + 1])));
    }

    #[test]
    fn mirrored_second_pulse_flips_ly_exactly() {
        let plus = n2(5.0, 5.0, 400);
        let mut minus = plus.clone();
        minus.pulses[1].polarization = [-FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2];
        let a = run_protocol(&plus).unwrap();
        let b = run_protocol(&minus).unwrap();
        let (la, lb) = (
            a.channel(channel::LY).unwrap(),
            b.channel(channel::LY).unwrap(),
        );
        assert!(la.iter().zip(lb).all(|(x, y)| *x == -*y));
        assert!(la.last().unwrap().abs() > 0.1);
    }

    #[test]
    fn momentum_is_stationary_after_last_kick() {
        let cfg = n2(5.0, 5.0, 300);
        let ts = run_protocol(&cfg).unwrap();
        let t2 = ts.meta["pulse_times"][1].as_f64().unwrap();
        let ly = ts.channel(channel::LY).unwrap();
        let l2 = ts.channel(channel::L2).unwrap();
        let after: Vec<usize> = (0..ts.len()).filter(|&i| ts.grid[i] >= t2).collect();
        for &i in &after {
            assert!((ly[i] - ly[after[0]]).abs() < 1e-12);
            assert!((l2[i] - l2[after[0]]).abs() < 1e-9 * l2[after[0]]);
        }
    }

    #[test]
    fn single_z_pulse_gives_no_ly() {
        let mut cfg = n2(5.0, 0.0, 100);
        let scan = delay_scan(&cfg, &[0.05]).unwrap();
        assert_eq!(scan.ly[0], 0.0);
        cfg.pulses[1].time = PulseTime::At(0.0);
        cfg.pulses.swap(0, 1);
        cfg.pulses[1].time = PulseTime::AutoExtremum;
        cfg.pulses[0].time = PulseTime::AutoExtremum;
        assert!(run_protocol(&cfg).is_err());
    }

    #[test]
    fn missing_extremum_is_a_protocol_error() {
        let cfg = n2(0.0, 5.0, 10);
        assert!(matches!(run_protocol(&cfg), Err(Error::Protocol(_))));
    }
}
