//! Sparse complex operators (CSR) and builders for the rotational
//! observables and pulse couplings.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64;

use super::basis::Basis;
use super::harmonics::{sph_harm, theta_column};
use super::wigner::d_conj_element;
use crate::quadrature::gauss_legendre;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C>,
}

impl SparseOp {
    /// Sums duplicates and drops exact zeros.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, C)>) -> Self {
        t.sort_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<C> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *vals.last_mut().expect("previous entry") += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut op = Self {
            n,
            row_ptr,
            cols,
            vals,
        };
        op.prune();
        op
    }

    fn prune(&mut self) {
        let mut row_ptr = vec![0; self.n + 1];
        let mut cols = Vec::with_capacity(self.cols.len());
        let mut vals = Vec::with_capacity(self.vals.len());
        for r in 0..self.n {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.vals[p] != ZERO {
                    cols.push(self.cols[p]);
                    vals.push(self.vals[p]);
                }
            }
            row_ptr[r + 1] = cols.len();
        }
        self.row_ptr = row_ptr;
        self.cols = cols;
        self.vals = vals;
    }

    pub fn diagonal(d: impl IntoIterator<Item = C>) -> Self {
        let t: Vec<_> = d.into_iter().enumerate().map(|(i, v)| (i, i, v)).collect();
        let n = t.len();
        Self::from_triplets(n, t)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(std::iter::repeat_n(C::new(1.0, 0.0), n))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// `(row, col, value)` for every stored entry.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C)> + '_ {
        (0..self.n).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |p| (r, self.cols[p], self.vals[p]))
        })
    }

    pub fn get(&self, r: usize, c: usize) -> C {
        let row = &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]];
        match row.binary_search(&c) {
            Ok(p) => self.vals[self.row_ptr[r] + p],
            Err(_) => ZERO,
        }
    }

    pub fn apply_into(&self, x: &[C], y: &mut [C]) {
        for r in 0..self.n {
            let mut s = ZERO;
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[p] * x[self.cols[p]];
            }
            y[r] = s;
        }
    }

    pub fn apply(&self, x: &[C]) -> Vec<C> {
        let mut y = vec![ZERO; self.n];
        self.apply_into(x, &mut y);
        y
    }

    /// `⟨x|A|x⟩`
    pub fn expectation(&self, x: &[C]) -> C {
        let mut s = ZERO;
        for r in 0..self.n {
            let mut row = ZERO;
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                row += self.vals[p] * x[self.cols[p]];
            }
            s += x[r].conj() * row;
        }
        s
    }

    pub fn map(&self, f: impl Fn(usize, usize, C) -> C) -> Self {
        Self::from_triplets(
            self.n,
            self.entries().map(|(r, c, v)| (r, c, f(r, c, v))).collect(),
        )
    }

    pub fn scale(&self, a: C) -> Self {
        self.map(|_, _, v| v * a)
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "operator dimensions differ");
        Self::from_triplets(self.n, self.entries().chain(other.entries()).collect())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(
            self.n,
            self.entries().map(|(r, c, v)| (c, r, v.conj())).collect(),
        )
    }

    /// Matrix product `self · other`.
    pub fn product(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "operator dimensions differ");
        let mut t = Vec::new();
        let mut acc = vec![ZERO; self.n];
        let mut touched = Vec::new();
        for r in 0..self.n {
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                let (k, a) = (self.cols[p], self.vals[p]);
                for q in other.row_ptr[k]..other.row_ptr[k + 1] {
                    let c = other.cols[q];
                    if acc[c] == ZERO {
                        touched.push(c);
                    }
                    acc[c] += a * other.vals[q];
                }
            }
            for &c in &touched {
                t.push((r, c, acc[c]));
                acc[c] = ZERO;
            }
            touched.clear();
        }
        Self::from_triplets(self.n, t)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.add(&other.scale(C::new(-1.0, 0.0)))
            .vals
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.max_abs_diff(&self.adjoint())
    }

    /// Gershgorin bounds on the spectrum of a Hermitian operator.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for r in 0..self.n {
            let mut d = 0.0;
            let mut off = 0.0;
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.cols[p] == r {
                    d = self.vals[p].re;
                } else {
                    off += self.vals[p].norm();
                }
            }
            lo = lo.min(d - off);
            hi = hi.max(d + off);
        }
        if self.n == 0 {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }
}

/// `Σ_q c_q D^{2*}_{q0}` for `q = −2..=2` (index `q + 2`).
pub fn rank2(basis: &Basis, coeffs: [C; 5]) -> SparseOp {
    let mut t = Vec::new();
    for (c, s) in basis.states().iter().enumerate() {
        for q in -2..=2 {
            let a = coeffs[(q + 2) as usize];
            if a == ZERO {
                continue;
            }
            for jp in (s.j - 2).max(0)..=(s.j + 2) {
                let Some(r) = basis.find(super::basis::RotState::new(jp, s.k, s.m + q)) else {
                    continue;
                };
                let v = d_conj_element(jp, s.k, s.m + q, 2, q, s.j, s.k, s.m);
                if v != 0.0 {
                    t.push((r, c, a * v));
                }
            }
        }
    }
    SparseOp::from_triplets(basis.len(), t)
}

/// `(p·n)² = 1/3 + Σ_q c_q D^{2*}_{q0}(n)` for a unit vector `p`.
pub fn cos2_coefficients(p: &Vector3<f64>) -> [C; 5] {
    let th = p.z.clamp(-1.0, 1.0).acos();
    let ph = p.y.atan2(p.x);
    let f = 2.0 / 3.0 * (4.0 * std::f64::consts::PI / 5.0).sqrt();
    std::array::from_fn(|i| {
        let c = sph_harm(2, i as i32 - 2, th, ph).conj() * f;
        // keep in-plane polarizations exactly block diagonal
        let clean = |v: f64| if v.abs() < 1e-15 { 0.0 } else { v };
        C::new(clean(c.re), clean(c.im))
    })
}

/// Operator of `(p·n)²` with `n` the molecular axis.
pub fn cos2_along(basis: &Basis, p: &Vector3<f64>) -> SparseOp {
    let p = p.normalize();
    let third = SparseOp::identity(basis.len()).scale(C::new(1.0 / 3.0, 0.0));
    rank2(basis, cos2_coefficients(&p)).add(&third)
}

/// Operator of `nᵀ Q n` for a symmetric `Q`.
pub fn quadratic_form(basis: &Basis, q: &Matrix3<f64>) -> SparseOp {
    let sym = (q + q.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let trace = sym.trace();
    let mut coeffs = [ZERO; 5];
    for k in 0..3 {
        let c = cos2_coefficients(&eig.eigenvectors.column(k).into_owned());
        for i in 0..5 {
            coeffs[i] += c[i] * eig.eigenvalues[k];
        }
    }
    let iso = SparseOp::identity(basis.len()).scale(C::new(trace / 3.0, 0.0));
    rank2(basis, coeffs).add(&iso)
}

/// `(a·n)(b·n)` for unit vectors `a ⊥ b` and the like.
pub fn bilinear(basis: &Basis, a: &Vector3<f64>, b: &Vector3<f64>) -> SparseOp {
    quadratic_form(basis, &(a * b.transpose()))
}

pub fn j_squared(basis: &Basis) -> SparseOp {
    SparseOp::diagonal(
        basis
            .states()
            .iter()
            .map(|s| C::new((s.j * (s.j + 1)) as f64, 0.0)),
    )
}

/// Space-fixed `J_z`.
pub fn j_z(basis: &Basis) -> SparseOp {
    SparseOp::diagonal(basis.states().iter().map(|s| C::new(s.m as f64, 0.0)))
}

fn ladder(basis: &Basis, up: bool) -> SparseOp {
    let d = if up { 1 } else { -1 };
    let mut t = Vec::new();
    for (c, s) in basis.states().iter().enumerate() {
        let mp = s.m + d;
        if let Some(r) = basis.find(super::basis::RotState::new(s.j, s.k, mp)) {
            let v = (((s.j * (s.j + 1)) - s.m * mp) as f64).sqrt();
            t.push((r, c, C::new(v, 0.0)));
        }
    }
    SparseOp::from_triplets(basis.len(), t)
}

/// Space-fixed `J_x`; needs a basis with every `M`.
pub fn j_x(basis: &Basis) -> SparseOp {
    ladder(basis, true)
        .add(&ladder(basis, false))
        .scale(C::new(0.5, 0.0))
}

/// Space-fixed `J_y`; needs a basis with every `M`.
pub fn j_y(basis: &Basis) -> SparseOp {
    ladder(basis, true)
        .add(&ladder(basis, false).scale(C::new(-1.0, 0.0)))
        .scale(C::new(0.0, -0.5))
}

/// `i[J², A]`
pub fn j2_commutator(basis: &Basis, a: &SparseOp) -> SparseOp {
    a.map(|r, c, v| {
        let (sr, sc) = (basis.state(r), basis.state(c));
        v * C::new(0.0, ((sr.j * (sr.j + 1)) - (sc.j * (sc.j + 1))) as f64)
    })
}

/// `cos²φ` of the axis azimuth for a linear-rotor basis, from exact
/// Gauss–Legendre overlaps of the Legendre functions.
pub fn azimuth_cos2(basis: &Basis) -> SparseOp {
    let l_max = basis.j_max();
    let (x, w) = gauss_legendre(l_max as usize + 3);
    let cols: Vec<Vec<Vec<f64>>> = (-l_max..=l_max)
        .map(|m| x.iter().map(|xi| theta_column(l_max, m, *xi)).collect())
        .collect();
    let theta = |l: i32, m: i32, i: usize| cols[(m + l_max) as usize][i][(l - m.abs()) as usize];
    let mut t = Vec::new();
    for (c, s) in basis.states().iter().enumerate() {
        t.push((c, c, C::new(0.5, 0.0)));
        for dm in [-2, 2] {
            let mp = s.m + dm;
            for lp in mp.abs()..=l_max {
                if (lp + s.j) % 2 != 0 {
                    continue;
                }
                let Some(r) = basis.find(super::basis::RotState::new(lp, 0, mp)) else {
                    continue;
                };
                let o: f64 = (0..x.len())
                    .map(|i| w[i] * theta(lp, mp, i) * theta(s.j, s.m, i))
                    .sum();
                if o.abs() > 1e-15 {
                    t.push((r, c, C::new(0.25 * o, 0.0)));
                }
            }
        }
    }
    SparseOp::from_triplets(basis.len(), t)
}
