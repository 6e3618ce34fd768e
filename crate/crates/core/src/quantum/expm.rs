//! `exp(iPA)·x` for Hermitian `A` by Chebyshev expansion.

use num_complex::Complex64;

use super::operator::SparseOp;

type C = Complex64;

/// `J_0(a) ..= J_n(a)` by Miller's backward recurrence.
pub fn bessel_j_sequence(a: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    if a == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let x = a.abs();
    let start = n.max(x as usize) + 30 + (x.sqrt() * 10.0) as usize;
    let mut vals = vec![0.0; start + 2];
    vals[start] = 1e-300;
    for k in (1..=start).rev() {
        vals[k - 1] = 2.0 * k as f64 / x * vals[k] - vals[k + 1];
        if vals[k - 1].abs() > 1e250 {
            for v in vals.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
        }
    }
    // 1 = J₀ + 2 Σ J₂ₖ
    let norm: f64 = vals[0] + 2.0 * vals.iter().skip(2).step_by(2).sum::<f64>();
    for k in 0..=n {
        let v = vals[k] / norm;
        out[k] = if a < 0.0 && k % 2 == 1 { -v } else { v };
    }
    out
}

/// `exp(i·strength·A)·x`, where the spectrum of `A` lies in `[lo, hi]`.
pub fn expi_apply(a: &SparseOp, lo: f64, hi: f64, strength: f64, x: &[C]) -> Vec<C> {
    if strength == 0.0 {
        return x.to_vec();
    }
    let center = 0.5 * (lo + hi);
    let half = (0.5 * (hi - lo)).max(1e-300);
    let arg = strength * half;
    let n_terms = (arg.abs() * 1.5) as usize + 40;
    let jn = bessel_j_sequence(arg, n_terms);
    // number of terms needed
    let mut last = n_terms;
    while last > arg.abs() as usize + 1 && jn[last].abs() < 1e-18 {
        last -= 1;
    }

    // X = (A − center)/half maps the spectrum into [−1, 1]
    let apply_x = |v: &[C], out: &mut [C]| {
        a.apply_into(v, out);
        for (o, vi) in out.iter_mut().zip(v) {
            *o = (*o - vi * center) / half;
        }
    };
    let n = x.len();
    let mut t_prev = x.to_vec();
    let mut t_cur = vec![C::new(0.0, 0.0); n];
    apply_x(&t_prev, &mut t_cur);
    let mut acc: Vec<C> = t_prev.iter().map(|v| v * jn[0]).collect();
    let mut ik = C::new(0.0, 1.0);
    for (o, v) in acc.iter_mut().zip(&t_cur) {
        *o += v * ik * (2.0 * jn[1]);
    }
    let mut tmp = vec![C::new(0.0, 0.0); n];
    for k in 2..=last {
        apply_x(&t_cur, &mut tmp);
        for i in 0..n {
            tmp[i] = tmp[i] * 2.0 - t_prev[i];
        }
        std::mem::swap(&mut t_prev, &mut t_cur);
        std::mem::swap(&mut t_cur, &mut tmp);
        ik *= C::new(0.0, 1.0);
        let c = ik * (2.0 * jn[k]);
        for (o, v) in acc.iter_mut().zip(&t_cur) {
            *o += v * c;
        }
    }
    let phase = C::from_polar(1.0, strength * center);
    acc.iter().map(|v| v * phase).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    #[test]
    fn bessel_values() {
        let j = bessel_j_sequence(2.5, 5);
        assert_abs_diff_eq!(j[0], -0.048_383_776_468_197_99, epsilon = 1e-14);
        assert_abs_diff_eq!(j[1], 0.497_094_102_464_274_4, epsilon = 1e-14);
        assert_abs_diff_eq!(j[5], 0.019_501_625_134_503_22, epsilon = 1e-14);
        let big = bessel_j_sequence(40.0, 60);
        assert_abs_diff_eq!(big[0], 0.007_366_890_584_237_29, epsilon = 1e-13);
        let neg = bessel_j_sequence(-2.5, 3);
        assert_abs_diff_eq!(neg[1], -j[1], epsilon = 1e-15);
    }

    #[test]
    fn matches_dense_exponential() {
        // small random Hermitian matrix; dense reference via eigendecomposition
        let n = 12;
        let mut t = Vec::new();
        let mut dense = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = ((i * 7 + j * 3) % 11) as f64 / 11.0 - 0.3;
                dense[(i, j)] = v;
                dense[(j, i)] = v;
                t.push((i, j, C::new(v, 0.0)));
                if i != j {
                    t.push((j, i, C::new(v, 0.0)));
                }
            }
        }
        let op = SparseOp::from_triplets(n, t);
        let (lo, hi) = op.spectral_bounds();
        let eig = dense.symmetric_eigen();
        let x: Vec<C> = (0..n)
            .map(|i| C::new(1.0 / (i + 1) as f64, 0.1 * i as f64))
            .collect();
        for p in [0.3, -4.0, 17.0] {
            let got = expi_apply(&op, lo, hi, p, &x);
            let v = &eig.eigenvectors;
            for r in 0..n {
                let mut want = C::new(0.0, 0.0);
                for k in 0..n {
                    let mut proj = C::new(0.0, 0.0);
                    for c in 0..n {
                        proj += x[c] * v[(c, k)];
                    }
                    want += v[(r, k)] * C::from_polar(1.0, p * eig.eigenvalues[k]) * proj;
                }
                assert!((got[r] - want).norm() < 1e-12, "p = {p}");
            }
        }
    }
}
