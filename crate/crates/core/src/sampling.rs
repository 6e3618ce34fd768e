//! Thermal initial conditions by the transformation method.
//!
//! Every molecule draws from its own ChaCha stream keyed by
//! `(seed, stream index)`, so a sample does not depend on how many other
//! molecules are drawn or on which thread draws it.

use std::f64::consts::PI;

use nalgebra::{Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linear::{spherical_frame, UnitSphereState};
use crate::symtop::{SymTopState, REST_MOMENTUM};

pub type MoleculeRng = ChaCha8Rng;

pub fn molecule_rng(seed: u64, stream: u64) -> MoleculeRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `φ = 2π w_φ`, `θ = 2 arcsin √w_θ` for uniform deviates in `[0, 1)`.
pub fn orientation_from_uniform(w_theta: f64, w_phi: f64) -> (f64, f64) {
    (2.0 * w_theta.sqrt().asin(), 2.0 * PI * w_phi)
}

/// Uniformly distributed direction as `(θ₀, φ₀)`.
pub fn sample_orientation<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let w_phi: f64 = rng.random();
    let w_theta: f64 = rng.random();
    orientation_from_uniform(w_theta, w_phi)
}

pub fn sample_direction<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    let (th, ph) = sample_orientation(rng);
    spherical_frame(th, ph).0
}

/// Thermal `(v'_θ, v'_φ)`, two independent normals of width `σ_th`.
pub fn sample_linear_velocity<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> (f64, f64) {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    (sigma * a, sigma * b)
}

/// Isotropic orientation with a Boltzmann tangential velocity.
pub fn sample_linear<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> UnitSphereState {
    let (th, ph) = sample_orientation(rng);
    let (vt, vp) = sample_linear_velocity(sigma, rng);
    UnitSphereState::from_spherical(th, ph, vt, vp)
}

/// Thermal symmetric top: Rayleigh `L∥'`, normal `L₃'`, isotropic `ê_L`, and
/// the axis placed on the precession cone at a uniform phase.
pub fn sample_symtop<R: Rng + ?Sized>(sigma_1: f64, sigma_3: f64, rng: &mut R) -> SymTopState {
    let w_par: f64 = rng.random();
    let n3: f64 = rng.sample(StandardNormal);
    let l_par = 2f64.sqrt() * sigma_1 * (1.0 / (1.0 - w_par)).ln().sqrt();
    let l3 = sigma_3 * n3;
    let l = l_par.hypot(l3);

    let (th_l, ph_l) = sample_orientation(rng);
    let phase = 2.0 * PI * rng.random::<f64>();

    // degenerate: no cone, the axis is the (isotropic) ê_L itself
    let cos_pr = if l < REST_MOMENTUM { 1.0 } else { l3 / l };
    let sin_pr = (1.0 - cos_pr * cos_pr).max(0.0).sqrt();
    let in_l_frame = Vector3::new(sin_pr * phase.cos(), sin_pr * phase.sin(), cos_pr);
    let to_lab = Rotation3::from_axis_angle(&Vector3::z_axis(), ph_l)
        * Rotation3::from_axis_angle(&Vector3::y_axis(), th_l);
    let r0 = to_lab * in_l_frame;
    let e_l = to_lab * Vector3::z();
    SymTopState::new(r0, e_l * l)
}
