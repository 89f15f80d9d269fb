//! Dense complex matrices and a one-sided Jacobi SVD.
//!
//! Only what the spectrum computations need: singular values with good
//! absolute accuracy near zero, right singular vectors for kernels, and a
//! sparsifying pass over a kernel basis.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use num_traits::Zero;
use crate::math;

/// Column-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = CMatrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        let mut out = vec![Complex64::zero(); self.rows];
        for (j, xj) in x.iter().enumerate() {
            if xj.is_zero() {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.column(j)) {
                *o += a * xj;
            }
        }
        out
    }

    /// Sub-matrix made of the listed columns.
    pub fn select_columns(&self, cols: &[usize]) -> CMatrix {
        let mut m = CMatrix::zeros(self.rows, cols.len());
        for (k, &j) in cols.iter().enumerate() {
            m.data[k * self.rows..(k + 1) * self.rows].copy_from_slice(self.column(j));
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl core::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[j * self.rows + i]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[j * self.rows + i]
    }
}

/// Singular values (ascending) and matching right singular vectors.
#[derive(Debug, Clone)]
pub struct Svd {
    pub singular_values: Vec<f64>,
    /// `v[k]` is the right singular vector for `singular_values[k]`.
    pub v: Vec<Vec<Complex64>>,
}

impl Svd {
    pub fn smallest(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Right singular vectors whose singular value is at most `tol`.
    pub fn null_space(&self, tol: f64) -> Vec<Vec<Complex64>> {
        self.singular_values
            .iter()
            .zip(&self.v)
            .take_while(|(s, _)| **s <= tol)
            .map(|(_, v)| v.clone())
            .collect()
    }
}

const JACOBI_EPS: f64 = 1e-15;
const MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD. Works for any shape; when there are
/// fewer rows than columns the surplus singular values come out as zero.
pub fn svd(a: &CMatrix) -> Svd {
    let m = a.rows;
    let n = a.cols;
    let mut w = a.data.clone();
    let mut v = vec![Complex64::zero(); n * n];
    for j in 0..n {
        v[j * n + j] = Complex64::new(1.0, 0.0);
    }
    let frob: f64 = w.iter().map(|z| z.norm_sqr()).sum();
    let negligible = frob * (f64::EPSILON * f64::EPSILON * 1e-4);
    if m > 0 {
        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in (p + 1)..n {
                    let (alpha, beta, gamma) = {
                        let cp = &w[p * m..(p + 1) * m];
                        let cq = &w[q * m..(q + 1) * m];
                        let mut al = 0.0;
                        let mut be = 0.0;
                        let mut ga = Complex64::zero();
                        for (x, y) in cp.iter().zip(cq) {
                            al += x.norm_sqr();
                            be += y.norm_sqr();
                            ga += x.conj() * y;
                        }
                        (al, be, ga)
                    };
                    let g = math::modulus(gamma);
                    if alpha <= negligible
                        || beta <= negligible
                        || g <= JACOBI_EPS * alpha.sqrt() * beta.sqrt()
                    {
                        continue;
                    }
                    rotated = true;
                    let phase = (gamma / g).conj();
                    let phase = phase / math::modulus(phase);
                    let zeta = (beta - alpha) / (2.0 * g);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    rotate_columns(&mut w, m, p, q, phase, c, s);
                    rotate_columns(&mut v, n, p, q, phase, c, s);
                }
            }
            if !rotated {
                break;
            }
        }
    }
    let mut order: Vec<(f64, usize)> = (0..n)
        .map(|j| {
            let s = if m == 0 {
                0.0
            } else {
                w[j * m..(j + 1) * m]
                    .iter()
                    .map(|z| z.norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            };
            (s, j)
        })
        .collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    Svd {
        singular_values: order.iter().map(|(s, _)| *s).collect(),
        v: order
            .iter()
            .map(|(_, j)| v[j * n..(j + 1) * n].to_vec())
            .collect(),
    }
}

fn rotate_columns(
    data: &mut [Complex64],
    len: usize,
    p: usize,
    q: usize,
    phase: Complex64,
    c: f64,
    s: f64,
) {
    let (lo, hi) = data.split_at_mut(q * len);
    let cp = &mut lo[p * len..(p + 1) * len];
    let cq = &mut hi[..len];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let yt = *y * phase;
        let nx = *x * c - yt * s;
        let ny = *x * s + yt * c;
        *x = nx;
        *y = ny;
    }
}

/// Smallest singular value, taken as zero when there are fewer rows than
/// columns.
pub fn sigma_min(a: &CMatrix) -> f64 {
    if a.rows < a.cols {
        return 0.0;
    }
    svd(a).smallest()
}

pub fn vec_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(x: &[Complex64]) -> f64 {
    x.iter().map(|z| math::modulus(*z)).fold(0.0, f64::max)
}

/// Scales `x` so that its largest entry has modulus one and is real positive.
pub fn normalize_max(x: &mut [Complex64]) {
    let (idx, m) = x
        .iter()
        .enumerate()
        .map(|(i, z)| (i, math::modulus(*z)))
        .fold((0, 0.0), |acc, e| if e.1 > acc.1 * (1.0 + 1e-12) { e } else { acc });
    if m == 0.0 {
        return;
    }
    let scale = x[idx].conj() / (m * m);
    for z in x.iter_mut() {
        *z *= scale;
    }
}

/// Eliminates pivots across a kernel basis so that each vector vanishes on
/// the pivots of the others, and returns the one with the smallest support.
pub fn sparsest_in_span(basis: &[Vec<Complex64>], zero_tol: f64) -> Option<Vec<Complex64>> {
    if basis.is_empty() {
        return None;
    }
    let mut vs: Vec<Vec<Complex64>> = basis.to_vec();
    let k = vs.len();
    let mut used: Vec<usize> = Vec::new();
    for i in 0..k {
        let (piv, mag) = vs[i]
            .iter()
            .enumerate()
            .filter(|(j, _)| !used.contains(j))
            .map(|(j, z)| (j, math::modulus(*z)))
            .fold((usize::MAX, 0.0), |acc, e| if e.1 > acc.1 { e } else { acc });
        if piv == usize::MAX || mag <= zero_tol {
            continue;
        }
        used.push(piv);
        let pv = vs[i][piv];
        for z in vs[i].iter_mut() {
            *z /= pv;
        }
        let pivot_row = vs[i].clone();
        for (l, other) in vs.iter_mut().enumerate() {
            if l == i {
                continue;
            }
            let f = other[piv];
            if f.is_zero() {
                continue;
            }
            for (o, p) in other.iter_mut().zip(&pivot_row) {
                *o -= f * p;
            }
        }
    }
    vs.into_iter()
        .filter(|v| max_abs(v) > zero_tol)
        .map(|mut v| {
            let scale = max_abs(&v);
            for z in v.iter_mut() {
                if math::modulus(*z) <= zero_tol * scale {
                    *z = Complex64::zero();
                }
            }
            v
        })
        .min_by_key(|v| v.iter().filter(|z| !z.is_zero()).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Reference singular values from nalgebra's bidiagonal SVD.
    fn reference_singular_values(a: &CMatrix) -> Vec<f64> {
        let m = nalgebra::DMatrix::<nalgebra::Complex<f64>>::from_fn(a.rows(), a.cols(), |i, j| {
            let z = a[(i, j)];
            nalgebra::Complex::new(z.re, z.im)
        });
        let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
        // pad with zeros when rows < cols
        while s.len() < a.cols() {
            s.push(0.0);
        }
        s.sort_by(|a, b| a.partial_cmp(b).unwrap());
        s
    }

    #[test]
    fn diagonal_matrix() {
        let a = CMatrix::from_rows(&[
            vec![c(3.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, -2.0)],
        ]);
        let s = svd(&a);
        assert!((s.singular_values[0] - 2.0).abs() < 1e-14);
        assert!((s.singular_values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn exact_kernel_is_tiny() {
        // rank one 3x3
        let u = [c(1.0, 0.5), c(-2.0, 0.0), c(0.0, 1.0)];
        let w = [c(0.3, 0.0), c(1.0, -1.0), c(2.0, 0.0)];
        let rows: Vec<Vec<Complex64>> = u
            .iter()
            .map(|ui| w.iter().map(|wj| ui * wj.conj()).collect())
            .collect();
        let a = CMatrix::from_rows(&rows);
        let s = svd(&a);
        assert!(s.singular_values[0] < 1e-14);
        assert!(s.singular_values[1] < 1e-14);
        for k in s.null_space(1e-12) {
            assert!(vec_norm(&a.mul_vec(&k)) < 1e-13);
        }
    }

    #[test]
    fn wide_matrix_has_zero_sigma_min() {
        let a = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0), c(0.0, 1.0)]]);
        assert_eq!(sigma_min(&a), 0.0);
        let s = svd(&a);
        assert_eq!(s.null_space(1e-12).len(), 2);
    }

    #[test]
    fn sparsest_combination_isolates_a_coordinate() {
        // span of e0 + e1 and e1 + e2 contains e0 - e2 (support 2)
        let b = vec![
            vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
        ];
        let v = sparsest_in_span(&b, 1e-12).unwrap();
        assert_eq!(v.iter().filter(|z| !z.is_zero()).count(), 2);
    }

    fn arb_matrix() -> impl Strategy<Value = CMatrix> {
        (1usize..7, 1usize..7).prop_flat_map(|(r, cl)| {
            proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), r * cl).prop_map(move |vals| {
                let rows: Vec<Vec<Complex64>> = (0..r)
                    .map(|i| (0..cl).map(|j| c(vals[i * cl + j].0, vals[i * cl + j].1)).collect())
                    .collect();
                CMatrix::from_rows(&rows)
            })
        })
    }

    proptest! {
        #[test]
        fn matches_reference_svd(a in arb_matrix()) {
            let ours = svd(&a).singular_values;
            let reference = reference_singular_values(&a);
            let scale = a.frobenius_norm().max(1.0);
            for (x, y) in ours.iter().zip(&reference) {
                prop_assert!((x - y).abs() < 1e-10 * scale, "{:?} vs {:?}", ours, reference);
            }
        }

        #[test]
        fn right_vectors_are_orthonormal(a in arb_matrix()) {
            let s = svd(&a);
            for (i, vi) in s.v.iter().enumerate() {
                for (j, vj) in s.v.iter().enumerate() {
                    let ip: Complex64 = vi.iter().zip(vj).map(|(x, y)| x.conj() * y).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    prop_assert!((ip - c(expect, 0.0)).norm() < 1e-10);
                }
                // |A v_i| = sigma_i
                let av = vec_norm(&a.mul_vec(vi));
                prop_assert!((av - s.singular_values[i]).abs() < 1e-10 * a.frobenius_norm().max(1.0));
            }
        }
    }
}
