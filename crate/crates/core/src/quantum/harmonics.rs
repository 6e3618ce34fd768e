//! Orthonormal associated Legendre functions and spherical harmonics.

use num_complex::Complex64;

/// `Θ_{l,m}(x)` for `l = |m| ..= l_max`, normalized so `∫₋₁¹ Θ² dx = 1`,
/// Condon–Shortley phase included. `Y_lm = Θ_lm(cos θ) e^{imφ}/√(2π)`.
pub fn theta_column(l_max: i32, m: i32, x: f64) -> Vec<f64> {
    let ma = m.abs();
    if ma > l_max {
        return Vec::new();
    }
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = std::f64::consts::FRAC_1_SQRT_2;
    for k in 1..=ma {
        let kf = k as f64;
        pmm *= -((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * s;
    }
    let mut out = Vec::with_capacity((l_max - ma + 1) as usize);
    out.push(pmm);
    if ma < l_max {
        let mut prev = pmm;
        let mut cur = (2.0 * ma as f64 + 3.0).sqrt() * x * pmm;
        out.push(cur);
        for l in (ma + 2)..=l_max {
            let (lf, mf) = (l as f64, ma as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0))
                .sqrt();
            let next = a * (x * cur - b * prev);
            prev = cur;
            cur = next;
            out.push(cur);
        }
    }
    if m < 0 && ma % 2 == 1 {
        for v in &mut out {
            *v = -*v;
        }
    }
    out
}

pub fn sph_harm(l: i32, m: i32, theta: f64, phi: f64) -> Complex64 {
    if m.abs() > l {
        return Complex64::new(0.0, 0.0);
    }
    let t = theta_column(l, m, theta.cos())[(l - m.abs()) as usize];
    Complex64::from_polar(t / (2.0 * std::f64::consts::PI).sqrt(), m as f64 * phi)
}
