//! Dormand–Prince 5(4) for complex vector ODEs.

use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
        }
    }
}

const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const CN: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1`; `f` writes into its last
/// argument.
pub fn integrate(
    mut f: impl FnMut(f64, &[C], &mut [C]),
    t0: f64,
    t1: f64,
    y0: &[C],
    tol: Tolerance,
    h0: f64,
) -> Result<Vec<C>> {
    let n = y0.len();
    let mut y = y0.to_vec();
    if t1 == t0 {
        return Ok(y);
    }
    let dir = (t1 - t0).signum();
    let mut t = t0;
    let mut h = h0.abs().min((t1 - t0).abs()) * dir;
    let mut k: Vec<Vec<C>> = vec![vec![C::new(0.0, 0.0); n]; 7];
    let mut tmp = vec![C::new(0.0, 0.0); n];
    f(t, &y, &mut k[0]);
    let mut last_ok = h;
    for _ in 0..2_000_000 {
        if (t1 - t) * dir <= 0.0 {
            return Ok(y);
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for j in 0..s {
                    let a = A[s - 1][j];
                    if a != 0.0 {
                        acc += k[j][i] * (h * a);
                    }
                }
                tmp[i] = acc;
            }
            let (head, tail) = k.split_at_mut(s);
            let _ = head;
            f(t + CN[s] * h, &tmp, &mut tail[0]);
        }
        // tmp holds the 5th-order solution (last stage argument)
        let mut err = 0.0;
        for i in 0..n {
            let mut e = C::new(0.0, 0.0);
            for j in 0..7 {
                if E[j] != 0.0 {
                    e += k[j][i] * E[j];
                }
            }
            let sc = tol.atol + tol.rtol * y[i].norm().max(tmp[i].norm());
            let r = (e * h).norm() / sc;
            err += r * r;
        }
        err = (err / n.max(1) as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::Integrator {
                t,
                step: last_ok,
                reason: "non-finite error estimate".into(),
            });
        }
        if err <= 1.0 {
            t += h;
            y.copy_from_slice(&tmp);
            k.swap(0, 6);
            last_ok = h;
        }
        let fac = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= fac;
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(Error::Integrator {
                t,
                step: last_ok,
                reason: "step size underflow".into(),
            });
        }
    }
    Err(Error::Integrator {
        t,
        step: last_ok,
        reason: "too many steps".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_phase() {
        let y = integrate(
            |_, y, d| {
                for i in 0..y.len() {
                    d[i] = y[i] * C::new(0.0, (i + 1) as f64);
                }
            },
            0.0,
            3.0,
            &[C::new(1.0, 0.0), C::new(0.0, 1.0)],
            Tolerance::default(),
            0.01,
        )
        .unwrap();
        assert!((y[0] - C::from_polar(1.0, 3.0)).norm() < 1e-7);
        assert!((y[1] - C::new(0.0, 1.0) * C::from_polar(1.0, 6.0)).norm() < 1e-7);
    }

    #[test]
    fn time_dependent_rate() {
        // y' = 2t y → y = exp(t²)
        let y = integrate(
            |t, y, d| d[0] = y[0] * (2.0 * t),
            0.0,
            1.5,
            &[C::new(1.0, 0.0)],
            Tolerance::default(),
            0.1,
        )
        .unwrap();
        assert!((y[0].re - 1.5f64.powi(2).exp()).abs() < 1e-6 * 9.5);
    }
}
