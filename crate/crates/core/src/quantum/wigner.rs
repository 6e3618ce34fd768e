//! Wigner 3j symbols (Racah formula) and matrix elements of
//! `D^{k*}_{q0}` between symmetric-top states.

use std::sync::OnceLock;

const TABLE: usize = 2048;

fn ln_fact_table() -> &'static [f64] {
    static T: OnceLock<Vec<f64>> = OnceLock::new();
    T.get_or_init(|| {
        let mut t = vec![0.0; TABLE];
        for n in 1..TABLE {
            t[n] = t[n - 1] + (n as f64).ln();
        }
        t
    })
}

pub fn ln_factorial(n: i32) -> f64 {
    assert!(
        n >= 0 && (n as usize) < TABLE,
        "factorial argument {n} out of range"
    );
    ln_fact_table()[n as usize]
}

fn triangle(a: i32, b: i32, c: i32) -> bool {
    c >= (a - b).abs() && c <= a + b
}

/// `(j1 j2 j3; m1 m2 m3)` for integer arguments.
pub fn wigner_3j(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> f64 {
    if m1 + m2 + m3 != 0 || !triangle(j1, j2, j3) || m1.abs() > j1 || m2.abs() > j2 || m3.abs() > j3
    {
        return 0.0;
    }
    if m1 == 0 && m2 == 0 && (j1 + j2 + j3) % 2 == 1 {
        return 0.0;
    }
    let lf = ln_factorial;
    let ln_pre = 0.5
        * (lf(j1 + j2 - j3) + lf(j1 - j2 + j3) + lf(-j1 + j2 + j3) - lf(j1 + j2 + j3 + 1)
            + lf(j1 + m1)
            + lf(j1 - m1)
            + lf(j2 + m2)
            + lf(j2 - m2)
            + lf(j3 + m3)
            + lf(j3 - m3));
    let k_min = 0.max(j2 - j3 - m1).max(j1 - j3 + m2);
    let k_max = (j1 + j2 - j3).min(j1 - m1).min(j2 + m2);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let den = lf(k)
            + lf(j1 + j2 - j3 - k)
            + lf(j1 - m1 - k)
            + lf(j2 + m2 - k)
            + lf(j3 - j2 + m1 + k)
            + lf(j3 - j1 - m2 + k);
        let term = (ln_pre - den).exp();
        sum += if k % 2 == 0 { term } else { -term };
    }
    if (j1 - j2 - m3).rem_euclid(2) == 1 {
        -sum
    } else {
        sum
    }
}

/// `⟨J'K'M'| D^{k*}_{q0} |JKM⟩` with the normalized symmetric-top
/// functions `√((2J+1)/8π²) D^{J*}_{MK}`.
pub fn d_conj_element(jp: i32, kp: i32, mp: i32, k: i32, q: i32, j: i32, kk: i32, m: i32) -> f64 {
    if kp != kk || mp != m + q {
        return 0.0;
    }
    let a = wigner_3j(jp, k, j, mp, -q, -m);
    if a == 0.0 {
        return 0.0;
    }
    let b = wigner_3j(jp, k, j, kp, 0, -kk);
    let phase = if (q + m - kk).rem_euclid(2) == 1 {
        -1.0
    } else {
        1.0
    };
    phase * (((2 * j + 1) * (2 * jp + 1)) as f64).sqrt() * a * b
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    use crate::quadrature::gauss_legendre;

    #[test]
    fn known_values() {
        assert_abs_diff_eq!(
            wigner_3j(1, 1, 0, 0, 0, 0),
            -1.0 / 3f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            wigner_3j(2, 2, 0, 0, 0, 0),
            1.0 / 5f64.sqrt(),
            epsilon = 1e-15
        );
        // (1 1 2; 1 -1 0) = 1/√30
        assert_abs_diff_eq!(
            wigner_3j(1, 1, 2, 1, -1, 0),
            1.0 / 30f64.sqrt(),
            epsilon = 1e-15
        );
        assert_eq!(wigner_3j(1, 1, 3, 0, 0, 0), 0.0);
        assert_eq!(wigner_3j(1, 1, 1, 0, 0, 0), 0.0);
    }

    #[test]
    fn orthogonality() {
        for (j1, j2) in [(2_i32, 3_i32), (4, 2), (5, 5)] {
            for j3 in (j1 - j2).abs()..=(j1 + j2) {
                for jj in (j1 - j2 as i32).abs()..=(j1 + j2) {
                    let m3 = 1.min(j3).min(jj);
                    let mut s = 0.0;
                    for m1 in -j1..=j1 {
                        let m2 = -m3 - m1;
                        s += wigner_3j(j1, j2, j3, m1, m2, m3) * wigner_3j(j1, j2, jj, m1, m2, m3);
                    }
                    let want = if j3 == jj {
                        1.0 / (2 * j3 + 1) as f64
                    } else {
                        0.0
                    };
                    assert_abs_diff_eq!(s, want, epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn ground_to_j2_element() {
        assert_abs_diff_eq!(
            d_conj_element(2, 0, 0, 2, 0, 0, 0, 0),
            1.0 / 5f64.sqrt(),
            epsilon = 1e-15
        );
        assert_eq!(d_conj_element(0, 0, 0, 2, 0, 0, 0, 0), 0.0);
        assert_eq!(d_conj_element(2, 1, 0, 2, 0, 2, 0, 0), 0.0);
    }

    /// Small Wigner d by the explicit sum, independent of the 3j code.
    fn small_d(j: i32, mp: i32, m: i32, beta: f64) -> f64 {
        let lf = |n: i32| ln_factorial(n);
        let pre = 0.5 * (lf(j + mp) + lf(j - mp) + lf(j + m) + lf(j - m));
        let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
        let mut sum = 0.0;
        for k in 0.max(m - mp)..=(j + m).min(j - mp) {
            let den = lf(j + m - k) + lf(k) + lf(j - mp - k) + lf(mp - m + k);
            let sign = if (mp - m + k) % 2 == 0 { 1.0 } else { -1.0 };
            sum +=
                sign * (pre - den).exp() * c.powi(2 * j + m - mp - 2 * k) * s.powi(mp - m + 2 * k);
        }
        sum
    }

    fn big_d(j: i32, m: i32, k: i32, a: f64, b: f64, g: f64) -> Complex64 {
        Complex64::from_polar(1.0, -(m as f64) * a - (k as f64) * g) * small_d(j, m, k, b)
    }

    fn psi(j: i32, k: i32, m: i32, a: f64, b: f64, g: f64) -> Complex64 {
        big_d(j, m, k, a, b, g).conj() * (((2 * j + 1) as f64) / (8.0 * PI * PI)).sqrt()
    }

    fn quadrature_element(
        s1: (i32, i32, i32),
        rank: i32,
        q: i32,
        s2: (i32, i32, i32),
        n: usize,
    ) -> Complex64 {
        let (x, w) = gauss_legendre(n);
        let h = 2.0 * PI / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (xb, wb) in x.iter().zip(&w) {
            let b = xb.acos();
            for ia in 0..n {
                let a = ia as f64 * h;
                for ig in 0..n {
                    let g = ig as f64 * h;
                    let f = psi(s1.0, s1.1, s1.2, a, b, g).conj()
                        * big_d(rank, q, 0, a, b, g).conj()
                        * psi(s2.0, s2.1, s2.2, a, b, g);
                    acc += f * wb * h * h;
                }
            }
        }
        acc
    }

    #[test]
    fn euler_angle_quadrature_oracle() {
        // full 64³ product grid on a spread of elements
        let cases = [
            ((2, 0, 0), 0, (0, 0, 0)),
            ((2, 1, 1), 0, (1, 1, 1)),
            ((3, -2, 2), 2, (2, -2, 0)),
            ((4, 1, -3), -2, (3, 1, -1)),
            ((1, 1, -1), -1, (2, 1, 0)),
            ((2, 2, 2), 2, (4, 2, 0)),
            ((3, 0, 1), 1, (3, 1, 0)),
        ];
        for (a, q, b) in cases {
            let num = quadrature_element(a, 2, q, b, 64);
            let ana = d_conj_element(a.0, a.1, a.2, 2, q, b.0, b.1, b.2);
            assert!(
                (num.re - ana).abs() < 1e-8 && num.im.abs() < 1e-8,
                "{a:?} {q} {b:?}: {num} vs {ana}"
            );
        }
    }

    #[test]
    fn all_low_elements_match_beta_quadrature() {
        // α and γ integrals are 4π² δ(M') δ(K'); the β part is checked for
        // every element with J, J' <= 4
        let (x, w) = gauss_legendre(64);
        for j in 0..=4i32 {
            for jp in 0..=4i32 {
                for k in -j.min(jp)..=j.min(jp) {
                    for m in -j..=j {
                        for q in -2..=2 {
                            let mp = m + q;
                            if mp.abs() > jp {
                                continue;
                            }
                            let norm =
                                (((2 * j + 1) * (2 * jp + 1)) as f64).sqrt() / (8.0 * PI * PI);
                            let mut s = 0.0;
                            for (xb, wb) in x.iter().zip(&w) {
                                let b = xb.acos();
                                s += wb
                                    * small_d(jp, mp, k, b)
                                    * small_d(2, q, 0, b)
                                    * small_d(j, m, k, b);
                            }
                            let num = norm * 4.0 * PI * PI * s;
                            let ana = d_conj_element(jp, k, mp, 2, q, j, k, m);
                            assert!(
                                (num - ana).abs() < 1e-8,
                                "{jp} {k} {mp} | {q} | {j} {k} {m}: {num} vs {ana}"
                            );
                        }
                    }
                }
            }
        }
    }
}
