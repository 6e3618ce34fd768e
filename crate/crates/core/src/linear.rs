//! Kicked linear rigid rotor on the unit sphere.
//!
//! The state is the Cartesian orientation `r` and the tangential velocity
//! `v` (dimensionless, units `ħ/I`). Angles are derived on demand only.

use nalgebra::Vector3;

use crate::units::PulseSpec;

/// Speeds below this are treated as rest.
pub const REST_SPEED: f64 = 1e-14;
/// `sin²θ` below this makes the azimuth undefined.
pub const POLE_SIN2: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSphereState {
    pub r: Vector3<f64>,
    pub v: Vector3<f64>,
}

impl UnitSphereState {
    /// Builds a state, projecting `v` onto the tangent plane of the
    /// normalized `r`.
    pub fn new(r: Vector3<f64>, v: Vector3<f64>) -> Self {
        let r = r.normalize();
        let v = v - r * r.dot(&v);
        Self { r, v }
    }

    pub fn at_rest(r: Vector3<f64>) -> Self {
        Self::new(r, Vector3::zeros())
    }

    /// State from spherical angles and the spherical velocity components
    /// `v_θ`, `v_φ`.
    pub fn from_spherical(theta: f64, phi: f64, v_theta: f64, v_phi: f64) -> Self {
        let (e_r, e_th, e_ph) = spherical_frame(theta, phi);
        Self {
            r: e_r,
            v: e_th * v_theta + e_ph * v_phi,
        }
    }

    pub fn speed(&self) -> f64 {
        self.v.norm()
    }

    /// Dimensionless angular momentum `L' = r × v'`.
    pub fn angular_momentum(&self) -> Vector3<f64> {
        self.r.cross(&self.v)
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.v.norm_squared()
    }

    /// `(θ, φ)` of the orientation.
    pub fn angles(&self) -> (f64, f64) {
        let th = self.r.z.clamp(-1.0, 1.0).acos();
        let ph = self.r.y.atan2(self.r.x);
        (th, ph)
    }

    /// `(v_θ, v_φ)`, the velocity in the local spherical basis.
    pub fn spherical_velocity(&self) -> (f64, f64) {
        let (th, ph) = self.angles();
        let (_, e_th, e_ph) = spherical_frame(th, ph);
        (self.v.dot(&e_th), self.v.dot(&e_ph))
    }
}

/// `(ê_r, ê_θ, ê_φ)` at the given angles.
pub fn spherical_frame(theta: f64, phi: f64) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    (
        Vector3::new(st * cp, st * sp, ct),
        Vector3::new(ct * cp, ct * sp, -st),
        Vector3::new(-sp, cp, 0.0),
    )
}

/// Impulsive kick: `Δv = 2P cosβ₀ (p − cosβ₀ r)` with `cosβ₀ = p·r`.
pub fn kick_linear(state: &UnitSphereState, pulse: &PulseSpec) -> UnitSphereState {
    let p = pulse.pol();
    let cb = p.dot(&state.r);
    let dv = (p - state.r * cb) * (2.0 * pulse.strength * cb);
    UnitSphereState {
        r: state.r,
        v: state.v + dv,
    }
}

/// Free rotation along the great circle through `r` tangent to `v`.
pub fn propagate_linear(state: &UnitSphereState, dt: f64) -> UnitSphereState {
    let v0 = state.v.norm();
    if v0 < REST_SPEED {
        return *state;
    }
    let (s, c) = (v0 * dt).sin_cos();
    let r = state.r * c + state.v * (s / v0);
    let v = state.v * c - state.r * (v0 * s);
    let n = r.norm();
    UnitSphereState { r: r / n, v }
}

/// Instantaneous single-molecule observables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearObservables {
    pub cos2_theta: f64,
    /// `x²/(x²+y²)`, `None` at the poles.
    pub cos2_phi: Option<f64>,
    pub angular_momentum: Vector3<f64>,
    pub kinetic_energy: f64,
}

pub fn cos2_phi(r: &Vector3<f64>) -> Option<f64> {
    let s2 = r.x * r.x + r.y * r.y;
    (s2 >= POLE_SIN2).then(|| r.x * r.x / s2)
}

pub fn observables_linear(state: &UnitSphereState) -> LinearObservables {
    LinearObservables {
        cos2_theta: state.r.z * state.r.z,
        cos2_phi: cos2_phi(&state.r),
        angular_momentum: state.angular_momentum(),
        kinetic_energy: state.kinetic_energy(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn zpulse(p: f64) -> PulseSpec {
        PulseSpec::new(p, Vector3::z(), 0.0).unwrap()
    }

    #[test]
    fn no_torque_on_axis_or_equator() {
        for p in [-3.0, 0.5, 7.0] {
            let s = UnitSphereState::at_rest(Vector3::z());
            assert_eq!(kick_linear(&s, &zpulse(p)).v, Vector3::zeros());
            let s = UnitSphereState::at_rest(Vector3::x());
            assert_eq!(kick_linear(&s, &zpulse(p)).v.norm(), 0.0);
        }
    }

    #[test]
    fn kick_at_45_degrees() {
        let s = UnitSphereState::at_rest(Vector3::new(FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2));
        let k = kick_linear(&s, &zpulse(5.0));
        assert_abs_diff_eq!(k.v.x, -3.5355339, epsilon = 1e-6);
        assert_abs_diff_eq!(k.v.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(k.v.z, 3.5355339, epsilon = 1e-6);
        assert_abs_diff_eq!(k.v.norm(), 5.0, epsilon = 1e-12);
        assert_eq!(k.r, s.r);
    }

    #[test]
    fn kick_matches_spherical_form() {
        // Δv_θ = −P sin 2θ₀, Δv_φ = 0 for a z-polarized pulse
        let p = 2.7;
        for i in 0..100 {
            let th = PI * (i as f64 + 0.5) / 100.0;
            let phi = 0.37 * i as f64;
            let s = UnitSphereState::from_spherical(th, phi, 0.0, 0.0);
            let k = kick_linear(&s, &zpulse(p));
            let (_, e_th, e_ph) = spherical_frame(th, phi);
            assert_abs_diff_eq!(k.v.dot(&e_th), -p * (2.0 * th).sin(), epsilon = 1e-12);
            assert_abs_diff_eq!(k.v.dot(&e_ph), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn rest_is_stationary() {
        let s = UnitSphereState::at_rest(Vector3::new(0.3, -0.2, 0.9));
        for dt in [0.0, 1.0, 1e6] {
            assert_eq!(propagate_linear(&s, dt), s);
        }
    }

    #[test]
    fn quarter_turn() {
        let s = UnitSphereState::new(Vector3::z(), Vector3::x());
        let t = propagate_linear(&s, PI / 2.0);
        assert_abs_diff_eq!((t.r - Vector3::x()).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((t.v + Vector3::z()).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn observable_examples() {
        let o = observables_linear(&UnitSphereState::at_rest(Vector3::z()));
        assert_eq!(o.cos2_theta, 1.0);
        assert!(o.cos2_phi.is_none());
        let o = observables_linear(&UnitSphereState::new(Vector3::x(), -Vector3::z()));
        assert_abs_diff_eq!(
            (o.angular_momentum - Vector3::y()).norm(),
            0.0,
            epsilon = 1e-15
        );
        assert_eq!(o.cos2_phi, Some(1.0));
        let o = observables_linear(&UnitSphereState::at_rest(Vector3::new(
            FRAC_1_SQRT_2,
            FRAC_1_SQRT_2,
            0.0,
        )));
        assert_eq!(o.cos2_theta, 0.0);
        assert_abs_diff_eq!(o.cos2_phi.unwrap(), 0.5, epsilon = 1e-15);
    }

    fn arb_state() -> impl Strategy<Value = UnitSphereState> {
        (0.0..PI, 0.0..2.0 * PI, -8.0..8.0f64, -8.0..8.0f64)
            .prop_map(|(t, p, a, b)| UnitSphereState::from_spherical(t, p, a, b))
    }

    proptest! {
        #[test]
        fn full_circle_returns(s in arb_state()) {
            prop_assume!(s.speed() > 1e-3);
            let t = propagate_linear(&s, 2.0 * PI / s.speed());
            prop_assert!((t.r - s.r).norm() < 1e-10);
            prop_assert!((t.v - s.v).norm() < 1e-10 * s.speed().max(1.0));
        }

        #[test]
        fn free_motion_conserves(s in arb_state(), steps in 1usize..200, dt in 0.001..0.5f64) {
            let mut t = s;
            for _ in 0..steps { t = propagate_linear(&t, dt); }
            prop_assert!((t.r.norm() - 1.0).abs() < 1e-10);
            prop_assert!(t.r.dot(&t.v).abs() < 1e-10 * s.speed().max(1.0));
            prop_assert!((t.speed() - s.speed()).abs() < 1e-10 * s.speed().max(1.0));
            prop_assert!((t.angular_momentum() - s.angular_momentum()).norm() < 1e-10 * s.speed().max(1.0));
        }

        #[test]
        fn propagation_composes(s in arb_state(), a in 0.0..3.0f64, b in 0.0..3.0f64) {
            let x = propagate_linear(&propagate_linear(&s, a), b);
            let y = propagate_linear(&s, a + b);
            prop_assert!((x.r - y.r).norm() < 1e-9);
            prop_assert!((x.v - y.v).norm() < 1e-9);
        }

        #[test]
        fn reverse_kick_restores(s in arb_state(), p in -10.0..10.0f64,
                                 th in 0.0..PI, ph in 0.0..2.0*PI) {
            let dir = spherical_frame(th, ph).0;
            let fwd = PulseSpec::new(p, dir, 0.0).unwrap();
            let back = PulseSpec::new(-p, dir, 0.0).unwrap();
            let k = kick_linear(&kick_linear(&s, &fwd), &back);
            prop_assert!((k.v - s.v).norm() < 1e-12);
            let d = kick_linear(&s, &fwd).v - s.v;
            prop_assert!(d.dot(&s.r).abs() < 1e-12);
            let beta = dir.dot(&s.r).clamp(-1.0, 1.0).acos();
            prop_assert!((d.norm() - (p * (2.0 * beta).sin()).abs()).abs() < 1e-12);
        }
    }
}
