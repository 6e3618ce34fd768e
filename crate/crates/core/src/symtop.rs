//! Kicked oblate symmetric top.
//!
//! Only the symmetry-axis direction `r` and the lab-frame angular momentum
//! `L'` are tracked; spin about the symmetry axis neither changes the
//! orientation of `r` nor couples to a linearly polarized pulse. Time is in
//! units of `I₁/ħ`, so the precession rate is `Ω_pr = |L'|`.

use nalgebra::Vector3;

use crate::units::PulseSpec;

/// `|L'|` below this is treated as a molecule at rest.
pub const REST_MOMENTUM: f64 = 1e-14;
/// `sin θ_pr` below this means the axis sits on the precession axis.
pub const ON_AXIS_SIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymTopState {
    pub r: Vector3<f64>,
    pub l: Vector3<f64>,
}

/// Precession geometry derived from `(r, L')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Precession {
    pub e_l: Vector3<f64>,
    pub cos_pr: f64,
    pub sin_pr: f64,
    pub omega: f64,
    /// In-plane unit vector `r₀∥` towards the initial axis position.
    pub r_par: Vector3<f64>,
    /// `v₀/|v₀|`, the direction of motion on the precession circle.
    pub v_dir: Vector3<f64>,
}

impl SymTopState {
    pub fn new(r: Vector3<f64>, l: Vector3<f64>) -> Self {
        Self {
            r: r.normalize(),
            l,
        }
    }

    /// `None` for a molecule at rest or with its axis along `L'`.
    pub fn precession(&self) -> Option<Precession> {
        let omega = self.l.norm();
        if omega < REST_MOMENTUM {
            return None;
        }
        let e_l = self.l / omega;
        let cos_pr = e_l.dot(&self.r).clamp(-1.0, 1.0);
        let perp = self.r - e_l * cos_pr;
        let sin_pr = perp.norm();
        if sin_pr < ON_AXIS_SIN {
            return None;
        }
        let r_par = perp / sin_pr;
        Some(Precession {
            e_l,
            cos_pr,
            sin_pr,
            omega,
            r_par,
            v_dir: e_l.cross(&r_par),
        })
    }

    /// Projection of `L'` on the symmetry axis, `L₃'`.
    pub fn l_axial(&self) -> f64 {
        self.l.dot(&self.r)
    }

    /// `E' = L∥'²/2 + L₃'²/(2 I₃/I₁)`.
    pub fn kinetic_energy(&self, inertia_ratio: f64) -> f64 {
        let l3 = self.l_axial();
        let lpar2 = (self.l.norm_squared() - l3 * l3).max(0.0);
        0.5 * lpar2 + 0.5 * l3 * l3 / inertia_ratio
    }

    /// Velocity of the axis tip, `Ω_pr × r`.
    pub fn axis_velocity(&self) -> Vector3<f64> {
        self.l.cross(&self.r)
    }
}

pub fn propagate_symtop(state: &SymTopState, dt: f64) -> SymTopState {
    let Some(pr) = state.precession() else {
        return *state;
    };
    let (s, c) = (pr.omega * dt).sin_cos();
    let r = pr.e_l * pr.cos_pr + (pr.r_par * c + pr.v_dir * s) * pr.sin_pr;
    SymTopState {
        r: r / r.norm(),
        l: state.l,
    }
}

/// `ΔL' = −P sin 2β₀ ê_{p×r}`, written as `−2P cosβ₀ (p × r)`.
pub fn kick_symtop(state: &SymTopState, pulse: &PulseSpec) -> SymTopState {
    let p = pulse.pol();
    let pxr = p.cross(&state.r);
    if pxr.norm() < ON_AXIS_SIN {
        return *state;
    }
    let dl = pxr * (-2.0 * pulse.strength * p.dot(&state.r));
    SymTopState {
        r: state.r,
        l: state.l + dl,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    use crate::linear::{propagate_linear, spherical_frame, UnitSphereState};

    #[test]
    fn axis_along_l_is_fixed() {
        let s = SymTopState::new(Vector3::new(0.0, 0.6, 0.8), Vector3::new(0.0, 1.2, 1.6));
        for t in [0.1, 3.0, 100.0] {
            assert_eq!(propagate_symtop(&s, t).r, s.r);
        }
    }

    #[test]
    fn perpendicular_l_is_a_great_circle() {
        let r = Vector3::new(0.3, -0.4, 0.0).normalize();
        let l = Vector3::new(0.0, 0.0, 2.5);
        let s = SymTopState::new(r, l);
        let lin = UnitSphereState::new(r, s.axis_velocity());
        for t in [0.05, 0.7, 2.3] {
            let a = propagate_symtop(&s, t);
            let b = propagate_linear(&lin, t);
            assert_abs_diff_eq!((a.r - b.r).norm(), 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn quarter_precession_example() {
        // v = L' × r = (0,2,0) × (0,0,1) = (2,0,0), Ω_pr = 2
        let s = SymTopState::new(Vector3::z(), Vector3::new(0.0, 2.0, 0.0));
        let t = propagate_symtop(&s, PI / 4.0);
        assert_abs_diff_eq!((t.r - Vector3::x()).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn kick_examples() {
        let z = PulseSpec::new(-3.0, Vector3::z(), 0.0).unwrap();
        let s = SymTopState::new(
            Vector3::new(FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2),
            Vector3::zeros(),
        );
        let k = kick_symtop(&s, &z);
        assert_abs_diff_eq!(
            (k.l - Vector3::new(0.0, 3.0, 0.0)).norm(),
            0.0,
            epsilon = 1e-14
        );
        for r in [Vector3::z(), Vector3::x(), -Vector3::z()] {
            let s = SymTopState::new(r, Vector3::zeros());
            assert!(kick_symtop(&s, &z).l.norm() < 1e-15);
        }
    }

    #[test]
    fn frozen_when_at_rest() {
        let s = SymTopState::new(Vector3::x(), Vector3::zeros());
        assert!(s.precession().is_none());
        assert_eq!(propagate_symtop(&s, 5.0), s);
    }

    fn arb_state() -> impl Strategy<Value = SymTopState> {
        (
            0.0..PI,
            0.0..2.0 * PI,
            -5.0..5.0f64,
            -5.0..5.0f64,
            -5.0..5.0f64,
        )
            .prop_map(|(t, p, a, b, c)| {
                SymTopState::new(spherical_frame(t, p).0, Vector3::new(a, b, c))
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn kick_has_no_axial_torque(s in arb_state(), p in -10.0..10.0f64,
                                    th in 0.0..PI, ph in 0.0..2.0*PI) {
            let pulse = PulseSpec::new(p, spherical_frame(th, ph).0, 0.0).unwrap();
            let k = kick_symtop(&s, &pulse);
            prop_assert!((k.l - s.l).dot(&s.r).abs() < 1e-12);
            prop_assert!((k.l_axial() - s.l_axial()).abs() < 1e-11);
            let beta = pulse.pol().dot(&s.r).clamp(-1.0, 1.0).acos();
            prop_assert!(((k.l - s.l).norm() - (p * (2.0 * beta).sin()).abs()).abs() < 1e-11);
            let back = PulseSpec::new(-p, pulse.pol(), 0.0).unwrap();
            prop_assert!((kick_symtop(&k, &back).l - s.l).norm() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn free_precession_invariants(s in arb_state(), t in 0.0..20.0f64) {
            let e = s.kinetic_energy(2.0);
            let a = propagate_symtop(&s, t);
            prop_assert_eq!(a.l, s.l);
            prop_assert!((a.r.norm() - 1.0).abs() < 1e-10);
            prop_assert!((a.l_axial() - s.l_axial()).abs() < 1e-10 * s.l.norm().max(1.0));
            prop_assert!((a.kinetic_energy(2.0) - e).abs() < 1e-10 * e.max(1.0));
        }
    }
}
