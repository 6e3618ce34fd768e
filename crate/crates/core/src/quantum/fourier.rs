//! Expectation traces as finite Fourier series in dimensionless time.
//!
//! Within a fixed `K` every Bohr frequency is an integer, so
//! `⟨A⟩(t) = Re Σ_ω a_ω e^{iωt}` is exactly `2π`-periodic and its mean over
//! one revival is `a₀`.

use num_complex::Complex64;

use super::basis::Basis;
use super::operator::SparseOp;

type C = Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    offset: i64,
    coeffs: Vec<C>,
}

impl Trace {
    pub fn new(max_key: i64) -> Self {
        Self {
            offset: max_key,
            coeffs: vec![C::new(0.0, 0.0); (2 * max_key + 1) as usize],
        }
    }

    /// Adds `weight · ⟨ψ(t)|A|ψ(t)⟩` for `ψ` freely evolving from the
    /// reference time.
    pub fn add(&mut self, basis: &Basis, a: &SparseOp, psi: &[C], weight: f64) {
        for (r, c, v) in a.entries() {
            let (sr, sc) = (basis.state(r), basis.state(c));
            let w = psi[r].conj() * v * psi[c];
            if w == C::new(0.0, 0.0) {
                continue;
            }
            debug_assert_eq!(sr.k, sc.k, "frequencies are integers only within a fixed K");
            let idx = (sr.key() - sc.key() + self.offset) as usize;
            self.coeffs[idx] += w * weight;
        }
    }

    pub fn merge(&mut self, other: &Trace) {
        if other.offset > self.offset {
            let mut grown = Trace::new(other.offset);
            grown.merge(self);
            *self = grown;
        }
        for (i, v) in other.coeffs.iter().enumerate() {
            let idx = (i as i64 - other.offset + self.offset) as usize;
            self.coeffs[idx] += v;
        }
    }

    /// Value at dimensionless time `t` after the reference.
    pub fn eval(&self, t: f64) -> f64 {
        let mut s = 0.0;
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            let w = (i as i64 - self.offset) as f64;
            let (sn, cs) = (w * t).sin_cos();
            s += a.re * cs - a.im * sn;
        }
        s
    }

    /// Values at many times; sparse coefficients are gathered once.
    pub fn eval_many(&self, ts: &[f64]) -> Vec<f64> {
        let nz: Vec<(f64, C)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(i, a)| ((i as i64 - self.offset) as f64, *a))
            .collect();
        ts.iter()
            .map(|t| {
                nz.iter()
                    .map(|(w, a)| {
                        let (sn, cs) = (w * t).sin_cos();
                        a.re * cs - a.im * sn
                    })
                    .sum()
            })
            .collect()
    }

    /// Autocovariance `(1/2π)∮ (f(t) − f̄)(f(t+s) − f̄) dt`.
    pub fn autocorrelation(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| *i as i64 != self.offset)
            .map(|(i, a)| a.norm_sqr() * ((i as i64 - self.offset) as f64 * s).cos())
            .sum()
    }

    /// Mean over one revival period.
    pub fn mean(&self) -> f64 {
        self.coeffs[self.offset as usize].re
    }
}
