//! Truncated rotational bases `|J K M⟩` (`K = 0` for linear rotors).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RotState {
    pub j: i32,
    pub k: i32,
    pub m: i32,
}

impl RotState {
    pub const fn new(j: i32, k: i32, m: i32) -> Self {
        Self { j, k, m }
    }

    /// `J(J+1)/2`, an integer; differences of rotational energies within a
    /// fixed `K` are differences of this key.
    pub fn key(&self) -> i64 {
        (self.j as i64) * (self.j as i64 + 1) / 2
    }
}

#[derive(Debug, Clone)]
pub struct Basis {
    states: Vec<RotState>,
    index: HashMap<RotState, usize>,
    /// `I₁/I₃ − 1`; zero for a linear rotor.
    k_factor: f64,
    j_max: i32,
}

impl Basis {
    fn from_states(states: Vec<RotState>, k_factor: f64, j_max: i32) -> Self {
        let index = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        Self {
            states,
            index,
            k_factor,
            j_max,
        }
    }

    /// `|l m⟩`, `0 ≤ l ≤ l_max`.
    pub fn linear(l_max: i32) -> Self {
        let mut s = Vec::new();
        for l in 0..=l_max {
            for m in -l..=l {
                s.push(RotState::new(l, 0, m));
            }
        }
        Self::from_states(s, 0.0, l_max)
    }

    /// Fixed `K` and `M ≡ parity (mod 2)`; `inertia_ratio = I₃/I₁`.
    pub fn symtop_block(j_max: i32, k: i32, m_parity: i32, inertia_ratio: f64) -> Self {
        let mut s = Vec::new();
        for j in k.abs()..=j_max {
            for m in -j..=j {
                if (m - m_parity).rem_euclid(2) == 0 {
                    s.push(RotState::new(j, k, m));
                }
            }
        }
        Self::from_states(s, 1.0 / inertia_ratio - 1.0, j_max)
    }

    /// All `|J K M⟩` up to `j_max`.
    pub fn symtop_full(j_max: i32, inertia_ratio: f64) -> Self {
        let mut s = Vec::new();
        for j in 0..=j_max {
            for k in -j..=j {
                for m in -j..=j {
                    s.push(RotState::new(j, k, m));
                }
            }
        }
        Self::from_states(s, 1.0 / inertia_ratio - 1.0, j_max)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn states(&self) -> &[RotState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> RotState {
        self.states[i]
    }

    pub fn find(&self, s: RotState) -> Option<usize> {
        self.index.get(&s).copied()
    }

    /// `E' = J(J+1)/2 + (I₁/I₃ − 1) K²/2` in units of `ħ²/I₁`.
    pub fn energy(&self, i: usize) -> f64 {
        let s = self.states[i];
        0.5 * (s.j * (s.j + 1)) as f64 + 0.5 * self.k_factor * (s.k * s.k) as f64
    }

    /// Largest `J(J+1)/2` in the basis.
    pub fn max_key(&self) -> i64 {
        self.states.iter().map(RotState::key).max().unwrap_or(0)
    }

    /// Total population in states with `J > j_max − window`.
    pub fn edge_population(&self, c: &[num_complex::Complex64], window: i32) -> f64 {
        self.states
            .iter()
            .zip(c)
            .filter(|(s, _)| s.j > self.j_max - window)
            .map(|(_, v)| v.norm_sqr())
            .sum()
    }
}
