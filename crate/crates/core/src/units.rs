//! Molecule parameters, pulses, unit conventions and frames.
//!
//! All dynamics run in dimensionless units: time `t' = ħt/I` (with `I = I₁`
//! for symmetric tops), velocity `v' = Iv/ħ` and angular momentum `L' = L/ħ`.
//! In these units one quantum revival period `T_rev = 2πI/ħ` is `t' = 2π`.
//! Times at the API boundary are given in units of `T_rev`.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// Planck constant, J s (exact).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Boltzmann constant, J/K (exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Converts a time in revival units to dimensionless time.
#[inline]
pub fn rev_to_dimless(t_rev: f64) -> f64 {
    2.0 * PI * t_rev
}

/// Converts a dimensionless time to revival units.
#[inline]
pub fn dimless_to_rev(t: f64) -> f64 {
    t / (2.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoleculeKind {
    Linear,
    OblateSymtop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }
}

/// Rigid-rotor parameters of a molecule.
///
/// `b_cm1` is `h/(8π²Ic)` for a linear rotor and `h/(8π²I₁c)` for a
/// symmetric top; `c_cm1` is `h/(8π²I₃c)` and only exists for tops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoleculeParams {
    pub kind: MoleculeKind,
    pub b_cm1: f64,
    pub c_cm1: Option<f64>,
    pub delta_alpha_sign: Sign,
}

impl MoleculeParams {
    pub fn linear(b_cm1: f64) -> Result<Self> {
        let m = Self {
            kind: MoleculeKind::Linear,
            b_cm1,
            c_cm1: None,
            delta_alpha_sign: Sign::Positive,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn oblate_symtop(b_cm1: f64, c_cm1: f64, delta_alpha_sign: Sign) -> Result<Self> {
        let m = Self {
            kind: MoleculeKind::OblateSymtop,
            b_cm1,
            c_cm1: Some(c_cm1),
            delta_alpha_sign,
        };
        m.validate()?;
        Ok(m)
    }

    /// N₂, B = 2.00 cm⁻¹.
    pub fn nitrogen() -> Self {
        Self {
            kind: MoleculeKind::Linear,
            b_cm1: 2.00,
            c_cm1: None,
            delta_alpha_sign: Sign::Positive,
        }
    }

    /// Benzene as a planar oblate top: B = 0.190 cm⁻¹, C = B/2, Δα < 0.
    pub fn benzene() -> Self {
        Self {
            kind: MoleculeKind::OblateSymtop,
            b_cm1: 0.190,
            c_cm1: Some(0.095),
            delta_alpha_sign: Sign::Negative,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b_cm1 > 0.0 && self.b_cm1.is_finite()) {
            return param(format!(
                "rotational constant B must be positive, got {}",
                self.b_cm1
            ));
        }
        match (self.kind, self.c_cm1) {
            (MoleculeKind::Linear, None) => Ok(()),
            (MoleculeKind::Linear, Some(_)) => param("a linear rotor has no C constant"),
            (MoleculeKind::OblateSymtop, None) => param("an oblate top needs the C constant"),
            (MoleculeKind::OblateSymtop, Some(c)) => {
                // oblate: I₁ < I₃ ≤ 2I₁  ⇔  B/2 ≤ C < B
                let ratio = self.b_cm1 / c;
                if c > 0.0 && ratio > 1.0 && ratio <= 2.0 + 1e-12 {
                    Ok(())
                } else {
                    param(format!(
                        "oblate top requires 1 < B/C ≤ 2, got B/C = {ratio}"
                    ))
                }
            }
        }
    }

    /// `I₃/I₁ = B/C` for tops, 1 for linear rotors.
    pub fn inertia_ratio(&self) -> f64 {
        self.c_cm1.map_or(1.0, |c| self.b_cm1 / c)
    }
}

/// Quantum revival period and the time-unit conversion it defines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevivalTime {
    /// `T_rev = 2πI/ħ = 1/(2Bc)` in seconds.
    pub seconds: f64,
}

impl RevivalTime {
    /// Physical seconds of a dimensionless time `t' = ħt/I`.
    pub fn dimless_to_seconds(&self, t: f64) -> f64 {
        self.seconds * dimless_to_rev(t)
    }

    pub fn seconds_to_dimless(&self, s: f64) -> f64 {
        rev_to_dimless(s / self.seconds)
    }
}

pub fn revival_time(mol: &MoleculeParams) -> Result<RevivalTime> {
    if !(mol.b_cm1 > 0.0) {
        return param(format!(
            "rotational constant B must be positive, got {}",
            mol.b_cm1
        ));
    }
    let b_per_m = mol.b_cm1 * 100.0;
    Ok(RevivalTime {
        seconds: 1.0 / (2.0 * b_per_m * SPEED_OF_LIGHT),
    })
}

/// Dimensionless thermal widths of the rotational velocity / momentum
/// distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalWidths {
    /// `σ_th` (linear) or `σ_th,1` (top): `√(I₁ k_B T)/ħ`.
    pub perpendicular: f64,
    /// `σ_th,3 = √(I₃ k_B T)/ħ`, tops only.
    pub axial: Option<f64>,
}

pub fn sigma_th(mol: &MoleculeParams, temperature_k: f64) -> Result<ThermalWidths> {
    if !(temperature_k >= 0.0) || !temperature_k.is_finite() {
        return param(format!(
            "temperature must be non-negative, got {temperature_k}"
        ));
    }
    mol.validate()?;
    let b_per_m = mol.b_cm1 * 100.0;
    // σ² = I k_B T / ħ² = k_B T / (2 h c B)
    let s2 = BOLTZMANN * temperature_k / (2.0 * PLANCK * SPEED_OF_LIGHT * b_per_m);
    let perp = s2.sqrt();
    let axial = match mol.kind {
        MoleculeKind::Linear => None,
        MoleculeKind::OblateSymtop => Some(perp * mol.inertia_ratio().sqrt()),
    };
    Ok(ThermalWidths {
        perpendicular: perp,
        axial,
    })
}

/// One linearly polarized pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    /// Signed kick strength `P = Δα/(4ħ) ∫ E² dt`.
    pub strength: f64,
    /// Unit polarization vector.
    pub polarization: [f64; 3],
    /// Application time in revival units.
    pub t_apply: f64,
    /// FWHM of the intensity envelope in revival units; 0 is impulsive.
    pub duration: f64,
}

impl PulseSpec {
    pub fn new(strength: f64, polarization: Vector3<f64>, t_apply: f64) -> Result<Self> {
        let p = Self {
            strength,
            polarization: [polarization.x, polarization.y, polarization.z],
            t_apply,
            duration: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Pulse along an arbitrary (non-zero) direction, normalized here.
    pub fn along(strength: f64, direction: Vector3<f64>, t_apply: f64) -> Result<Self> {
        let n = direction.norm();
        if !(n > 0.0) {
            return param("polarization direction must be non-zero");
        }
        Self::new(strength, direction / n, t_apply)
    }

    pub fn with_duration(mut self, fwhm: f64) -> Result<Self> {
        self.duration = fwhm;
        self.validate()?;
        Ok(self)
    }

    pub fn pol(&self) -> Vector3<f64> {
        Vector3::from(self.polarization)
    }

    pub fn is_impulsive(&self) -> bool {
        self.duration == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !self.strength.is_finite() {
            return param("kick strength must be finite");
        }
        let n = self.pol().norm();
        if (n - 1.0).abs() > 1e-12 {
            return param(format!("polarization must be a unit vector, |p| = {n}"));
        }
        if !(self.duration >= 0.0) {
            return param(format!(
                "pulse duration must be >= 0, got {}",
                self.duration
            ));
        }
        Ok(())
    }
}

/// Lab-frame conventions.
///
/// In the classical frame the first pulse is along `z`, the second lies in
/// the `x`–`z` plane and light propagates along `y`. In the propagation
/// frame `z'` is the propagation axis and the first pulse is along `x'`.
/// Classical `(x, y, z)` equals propagation `(y', z', x')`; this is a cyclic
/// permutation, hence a proper rotation, and pseudovectors map the same way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameConvention {
    ClassicalFrame,
    PropagationFrame,
}

impl FrameConvention {
    /// Re-expresses a vector given in `self` coordinates in `target` coordinates.
    pub fn convert(self, target: FrameConvention, v: [f64; 3]) -> [f64; 3] {
        match (self, target) {
            (a, b) if a == b => v,
            (FrameConvention::ClassicalFrame, _) => classical_to_propagation(v),
            (FrameConvention::PropagationFrame, _) => propagation_to_classical(v),
        }
    }
}

#[inline]
pub fn classical_to_propagation([x, y, z]: [f64; 3]) -> [f64; 3] {
    [z, x, y]
}

#[inline]
pub fn propagation_to_classical([xp, yp, zp]: [f64; 3]) -> [f64; 3] {
    [yp, zp, xp]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn revival_times_of_presets() {
        // T_rev = 2πI/ħ with I = h/(8π²Bc): 2π·h/(8π²Bc)·2π/h = 1/(2Bc)
        let n2 = revival_time(&MoleculeParams::nitrogen()).unwrap();
        let i = PLANCK / (8.0 * PI * PI * 200.0 * SPEED_OF_LIGHT);
        let hbar = PLANCK / (2.0 * PI);
        assert_relative_eq!(n2.seconds, 2.0 * PI * i / hbar, max_relative = 1e-12);
        assert!((n2.seconds * 1e12 - 8.34).abs() < 0.01);
        let bz = revival_time(&MoleculeParams::benzene()).unwrap();
        assert!((bz.seconds * 1e12 - 87.8).abs() < 0.1);
    }

    #[test]
    fn revival_time_scales_inversely_with_b() {
        let a = revival_time(&MoleculeParams::linear(1.0).unwrap()).unwrap();
        let b = revival_time(&MoleculeParams::linear(2.0).unwrap()).unwrap();
        assert_relative_eq!(a.seconds, 2.0 * b.seconds, max_relative = 1e-14);
        assert_relative_eq!(
            a.dimless_to_seconds(2.0 * PI),
            a.seconds,
            max_relative = 1e-14
        );
    }

    #[test]
    fn non_positive_b_rejected() {
        let mut m = MoleculeParams::nitrogen();
        m.b_cm1 = 0.0;
        assert!(revival_time(&m).is_err());
        assert!(MoleculeParams::linear(-1.0).is_err());
    }

    #[test]
    fn thermal_widths_match_quoted_values() {
        let n2 = sigma_th(&MoleculeParams::nitrogen(), 50.0).unwrap();
        assert!(
            (n2.perpendicular - 2.94).abs() < 0.01,
            "{}",
            n2.perpendicular
        );
        assert!(n2.axial.is_none());
        let bz = sigma_th(&MoleculeParams::benzene(), 0.9).unwrap();
        assert!(
            (bz.perpendicular - 1.29).abs() < 0.01,
            "{}",
            bz.perpendicular
        );
        let ax = bz.axial.unwrap();
        assert!((ax - 1.82).abs() < 0.01, "{ax}");
        assert_relative_eq!(ax, 2f64.sqrt() * bz.perpendicular, max_relative = 1e-12);
    }

    #[test]
    fn zero_and_negative_temperature() {
        let w = sigma_th(&MoleculeParams::benzene(), 0.0).unwrap();
        assert_eq!(w.perpendicular, 0.0);
        assert_eq!(w.axial, Some(0.0));
        assert!(sigma_th(&MoleculeParams::nitrogen(), -1.0).is_err());
    }

    #[test]
    fn sigma_scales_as_sqrt_t() {
        for t in [0.3, 1.0, 17.0, 300.0] {
            let a = sigma_th(&MoleculeParams::nitrogen(), t)
                .unwrap()
                .perpendicular;
            let b = sigma_th(&MoleculeParams::nitrogen(), 4.0 * t)
                .unwrap()
                .perpendicular;
            assert_relative_eq!(b, 2.0 * a, max_relative = 1e-12);
        }
    }

    #[test]
    fn frame_round_trip_is_exact() {
        let v = [0.123456789, -9.87654321e-3, 4.5e7];
        let p = classical_to_propagation(v);
        assert_eq!(propagation_to_classical(p), v);
        let c = FrameConvention::ClassicalFrame;
        let q = FrameConvention::PropagationFrame;
        assert_eq!(q.convert(c, c.convert(q, v)), v);
        // first pulse: classical z → propagation x'
        assert_eq!(classical_to_propagation([0.0, 0.0, 1.0]), [1.0, 0.0, 0.0]);
        // classical L_y is the propagation-axis component
        assert_eq!(classical_to_propagation([0.0, 1.0, 0.0]), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn pulse_validation() {
        assert!(PulseSpec::new(1.0, Vector3::new(0.0, 0.0, 2.0), 0.0).is_err());
        let p = PulseSpec::along(1.0, Vector3::new(1.0, 0.0, 1.0), 0.0).unwrap();
        assert!((p.pol().norm() - 1.0).abs() < 1e-15);
        assert!(p.with_duration(-1.0).is_err());
    }
}
