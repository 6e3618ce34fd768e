//! Action of one pulse on a packet: the sudden phase operator
//! `exp(iP cos²β)` or a Gaussian envelope integrated in the interaction
//! picture about the pulse centre.

use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;

use super::basis::Basis;
use super::expm::expi_apply;
use super::ode::{integrate, Tolerance};
use super::operator::{cos2_along, SparseOp};
use crate::error::{Error, Result};

type C = Complex64;

/// Population allowed within `HEADROOM` of the basis cutoff.
pub const HEADROOM: i32 = 4;
pub const HEADROOM_TOL: f64 = 1e-10;

/// `cos²β` for one polarization, with cached spectral bounds.
#[derive(Debug, Clone)]
pub struct Coupling {
    pub op: SparseOp,
    lo: f64,
    hi: f64,
}

impl Coupling {
    pub fn new(basis: &Basis, polarization: &Vector3<f64>) -> Self {
        Self::from_op(cos2_along(basis, polarization))
    }

    pub fn from_op(op: SparseOp) -> Self {
        let (lo, hi) = op.spectral_bounds();
        // cos²β is bounded by [0, 1] even when truncated
        Self {
            lo: lo.max(-0.5),
            hi: hi.min(1.5),
            op,
        }
    }

    pub fn sudden(&self, c: &[C], strength: f64) -> Vec<C> {
        expi_apply(&self.op, self.lo, self.hi, strength, c)
    }

    /// Gaussian pulse with intensity FWHM `fwhm_rev` (revival units) and
    /// unit area scaled to `strength`, centred at the reference time.
    pub fn gaussian(&self, basis: &Basis, c: &[C], strength: f64, fwhm_rev: f64) -> Result<Vec<C>> {
        if fwhm_rev == 0.0 {
            return Ok(self.sudden(c, strength));
        }
        if strength == 0.0 {
            return Ok(c.to_vec());
        }
        let sigma = 2.0 * PI * fwhm_rev / (8.0 * 2f64.ln()).sqrt();
        let norm = 1.0 / ((2.0 * PI).sqrt() * sigma);
        let energy: Vec<f64> = (0..basis.len()).map(|i| basis.energy(i)).collect();
        let n = c.len();
        let mut w = vec![C::new(0.0, 0.0); n];
        let mut aw = vec![C::new(0.0, 0.0); n];
        let rhs = |s: f64, y: &[C], dy: &mut [C]| {
            let g = strength * norm * (-0.5 * (s / sigma).powi(2)).exp();
            for i in 0..n {
                w[i] = y[i] * C::from_polar(1.0, -energy[i] * s);
            }
            self.op.apply_into(&w, &mut aw);
            for i in 0..n {
                dy[i] = C::new(0.0, g) * aw[i] * C::from_polar(1.0, energy[i] * s);
            }
        };
        let span = 8.0 * sigma;
        // interaction-picture coefficients, referred to the pulse centre
        integrate(rhs, -span, span, c, Tolerance::default(), sigma / 20.0)
    }
}

pub fn check_headroom(basis: &Basis, c: &[C]) -> Result<f64> {
    let edge = basis.edge_population(c, HEADROOM);
    if edge > HEADROOM_TOL {
        return Err(Error::Truncation {
            cutoff: basis.j_max() as u32,
            population: edge,
        });
    }
    Ok(edge)
}

/// `c_r ← c_r exp(−iE_r t)` for a dimensionless `t`.
pub fn evolve_in_place(basis: &Basis, c: &mut [C], t: f64) {
    if t == 0.0 {
        return;
    }
    for (i, v) in c.iter_mut().enumerate() {
        *v *= C::from_polar(1.0, -basis.energy(i) * t);
    }
}
