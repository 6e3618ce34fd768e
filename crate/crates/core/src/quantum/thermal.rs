//! Boltzmann-weighted initial states and nuclear-spin weights.

use std::fmt;
use std::sync::Arc;

use super::basis::RotState;
use crate::error::{param, Result};

/// Nuclear-spin statistical weights `g(J, K)`.
#[derive(Clone, Default)]
pub enum SpinWeights {
    #[default]
    Uniform,
    /// By parity of `J` (homonuclear diatomics).
    EvenOdd {
        even: f64,
        odd: f64,
    },
    /// Indexed by `|K|`; missing entries weigh 1.
    PerK(Vec<f64>),
    Custom(Arc<dyn Fn(i32, i32) -> f64 + Send + Sync>),
}

impl SpinWeights {
    /// `¹⁴N₂`: even `J` twice as likely as odd.
    pub fn nitrogen() -> Self {
        SpinWeights::EvenOdd {
            even: 2.0,
            odd: 1.0,
        }
    }

    pub fn weight(&self, j: i32, k: i32) -> f64 {
        match self {
            SpinWeights::Uniform => 1.0,
            SpinWeights::EvenOdd { even, odd } => {
                if j % 2 == 0 {
                    *even
                } else {
                    *odd
                }
            }
            SpinWeights::PerK(w) => w.get(k.unsigned_abs() as usize).copied().unwrap_or(1.0),
            SpinWeights::Custom(f) => f(j, k),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SpinWeights::Uniform => "uniform".into(),
            SpinWeights::EvenOdd { even, odd } => format!("even:odd = {even}:{odd}"),
            SpinWeights::PerK(w) => format!("per |K| {w:?}"),
            SpinWeights::Custom(_) => "custom".into(),
        }
    }
}

impl fmt::Debug for SpinWeights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// One initial state and its normalized weight. For symmetric tops only
/// `K ≥ 0` is listed; `±K` give identical traces and the weight covers both.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub state: RotState,
    pub weight: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ThermalSet {
    pub states: Vec<InitialState>,
    /// Fraction of the partition function carried by `states`.
    pub captured: f64,
    pub j_max: i32,
}

pub const CAPTURE: f64 = 0.9999;

/// `(J, |K|, energy', degeneracy)` levels, lowest energy first.
fn collect(
    sigma: f64,
    energy: impl Fn(i32, i32) -> f64,
    k_levels: impl Fn(i32) -> Vec<i32>,
    spin: &SpinWeights,
    degeneracy: impl Fn(i32, i32) -> f64,
) -> Result<ThermalSet> {
    if !(sigma >= 0.0) {
        return param("thermal width must be >= 0");
    }
    if sigma == 0.0 {
        return Ok(ThermalSet {
            states: vec![InitialState {
                state: RotState::new(0, 0, 0),
                weight: 1.0,
            }],
            captured: 1.0,
            j_max: 0,
        });
    }
    let mut levels = Vec::new();
    let mut j = 0;
    loop {
        let mut any = false;
        for k in k_levels(j) {
            let e = energy(j, k);
            let w = spin.weight(j, k) * degeneracy(j, k) * (-e / (sigma * sigma)).exp();
            if (-e / (sigma * sigma)).exp() > 1e-18 {
                any = true;
            }
            if w > 0.0 {
                levels.push((j, k, e, w));
            }
        }
        if !any || j > 1000 {
            break;
        }
        j += 1;
    }
    let z: f64 = levels.iter().map(|l| l.3).sum();
    if !(z > 0.0) {
        return param("spin weights leave no populated level");
    }
    levels.sort_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)));
    let mut kept = Vec::new();
    let mut acc = 0.0;
    for l in levels {
        if acc >= CAPTURE * z {
            break;
        }
        acc += l.3;
        kept.push(l);
    }
    let mut states = Vec::new();
    for (j, k, _, w) in &kept {
        let per = w / degeneracy(*j, *k) * if *k > 0 { 2.0 } else { 1.0 } / acc;
        for m in -j..=*j {
            states.push(InitialState {
                state: RotState::new(*j, *k, m),
                weight: per,
            });
        }
    }
    Ok(ThermalSet {
        j_max: kept.iter().map(|l| l.0).max().unwrap_or(0),
        states,
        captured: acc / z,
    })
}

/// `|l₀ m₀⟩` with `W ∝ g(l₀) exp[−l₀(l₀+1)/(2σ²)]`.
pub fn linear_initial_states(sigma: f64, spin: &SpinWeights) -> Result<ThermalSet> {
    collect(
        sigma,
        |j, _| 0.5 * (j * (j + 1)) as f64,
        |_| vec![0],
        spin,
        |j, _| (2 * j + 1) as f64,
    )
}

/// `|J K M⟩`, `K ≥ 0`, with `W ∝ g exp[−E'(J,K)/σ₁²]`; `inertia_ratio = I₃/I₁`.
pub fn symtop_initial_states(
    sigma_1: f64,
    inertia_ratio: f64,
    spin: &SpinWeights,
) -> Result<ThermalSet> {
    let kf = 1.0 / inertia_ratio - 1.0;
    collect(
        sigma_1,
        |j, k| 0.5 * (j * (j + 1)) as f64 + 0.5 * kf * (k * k) as f64,
        |j| (0..=j).collect(),
        spin,
        |j, k| (2 * j + 1) as f64 * if k > 0 { 2.0 } else { 1.0 },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_temperature_is_the_ground_state() {
        let s = linear_initial_states(0.0, &SpinWeights::Uniform).unwrap();
        assert_eq!(s.states.len(), 1);
        assert_eq!(s.states[0].state, RotState::new(0, 0, 0));
    }

    #[test]
    fn weights_are_normalized_and_capture_enough() {
        for sigma in [0.5, 2.9475] {
            let s = linear_initial_states(sigma, &SpinWeights::nitrogen()).unwrap();
            assert_abs_diff_eq!(
                s.states.iter().map(|x| x.weight).sum::<f64>(),
                1.0,
                epsilon = 1e-12
            );
            assert!(s.captured >= CAPTURE);
        }
        let s = symtop_initial_states(1.283, 2.0, &SpinWeights::Uniform).unwrap();
        assert_abs_diff_eq!(
            s.states.iter().map(|x| x.weight).sum::<f64>(),
            1.0,
            epsilon = 1e-12
        );
        assert!(s.states.iter().all(|x| x.state.k >= 0));
    }

    #[test]
    fn thermal_mean_energy_of_linear_rotor() {
        // classical limit ⟨E'⟩ → σ² for σ ≫ 1
        let sigma: f64 = 8.0;
        let s = linear_initial_states(sigma, &SpinWeights::Uniform).unwrap();
        let e: f64 = s
            .states
            .iter()
            .map(|x| x.weight * 0.5 * (x.state.j * (x.state.j + 1)) as f64)
            .sum();
        assert!((e / (sigma * sigma) - 1.0).abs() < 0.01);
    }
}
