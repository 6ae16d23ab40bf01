//! Minimal dense symmetric linear algebra: storage, Cholesky, Jacobi
//! eigenvalues. Sized for hierarchy blocks (a few hundred rows at most), so
//! everything is plain dense arithmetic with deterministic loop order.

use crate::scalar::{Real, Scalar};

/// Dense symmetric matrix, full row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMat<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMat<T> {
    pub fn zeros(n: usize) -> Self {
        SymMat {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.n + c]
    }

    /// Sets both `(r, c)` and `(c, r)`.
    pub fn set_sym(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.n + c] = v.clone();
        self.data[c * self.n + r] = v;
    }

    /// Adds `v` at `(r, c)` and, when off-diagonal, mirrors it at `(c, r)`.
    pub fn add_sym(&mut self, r: usize, c: usize, v: T) {
        if r == c {
            let cur = self.data[r * self.n + c].clone();
            self.data[r * self.n + c] = cur + v;
        } else {
            let cur = self.data[r * self.n + c].clone();
            let updated = cur + v;
            self.data[r * self.n + c] = updated.clone();
            self.data[c * self.n + r] = updated;
        }
    }

    pub fn scale_in_place(&mut self, factor: &T) {
        for v in &mut self.data {
            *v = v.clone() * factor.clone();
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = a.clone() + b.clone();
        }
    }

    pub fn shift_diagonal(&mut self, v: &T) {
        for i in 0..self.n {
            let cur = self.data[i * self.n + i].clone();
            self.data[i * self.n + i] = cur + v.clone();
        }
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &Self) -> T {
        assert_eq!(self.n, other.n);
        let mut acc = T::zero();
        for (a, b) in self.data.iter().zip(&other.data) {
            acc = acc + a.clone() * b.clone();
        }
        acc
    }

    pub fn trace(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.n {
            acc = acc + self.data[i * self.n + i].clone();
        }
        acc
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.n..(r + 1) * self.n]
    }
}

impl<T: Real> SymMat<T> {
    /// Largest absolute entry, as a scale reference.
    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |m, v| if v.abs() > m { v.abs() } else { m })
    }

    /// Frobenius pairing with a sparse symmetric coefficient set stored as
    /// upper-triangle `(r, c, f)` entries: `Σ f · (r == c ? A_rr : 2 A_rc)`.
    pub fn frob_entries(&self, entries: &[(usize, usize, T)]) -> T {
        let mut acc = T::zero();
        let two = T::one() + T::one();
        for &(r, c, f) in entries {
            let v = *self.get(r, c);
            acc = acc + if r == c { f * v } else { two * f * v };
        }
        acc
    }

    /// `W F W` for a sparse symmetric `F` given as upper-triangle entries,
    /// with `W = self` symmetric.
    pub fn sandwich(&self, entries: &[(usize, usize, T)]) -> SymMat<T> {
        let n = self.n;
        let mut y = SymMat::zeros(n);
        for &(r, c, f) in entries {
            let wr = self.row(r);
            let wc = self.row(c);
            if r == c {
                for i in 0..n {
                    let fi = f * wr[i];
                    for j in i..n {
                        y.data[i * n + j] = y.data[i * n + j] + fi * wr[j];
                    }
                }
            } else {
                for i in 0..n {
                    let fri = f * wr[i];
                    let fci = f * wc[i];
                    for j in i..n {
                        y.data[i * n + j] = y.data[i * n + j] + fri * wc[j] + fci * wr[j];
                    }
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                y.data[j * n + i] = y.data[i * n + j];
            }
        }
        y
    }

    /// Plain Cholesky `A = L L^T`; `None` when a pivot is not strictly
    /// positive, which doubles as the PD test.
    pub fn cholesky(&self) -> Option<Cholesky<T>> {
        let n = self.n;
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let mut d = *self.get(j, j);
            for k in 0..j {
                d = d - l[j * n + k] * l[j * n + k];
            }
            if !(d > T::zero()) || !d.is_finite() {
                return None;
            }
            let dj = d.sqrt();
            l[j * n + j] = dj;
            for i in (j + 1)..n {
                let mut s = *self.get(i, j);
                for k in 0..j {
                    s = s - l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / dj;
            }
        }
        Some(Cholesky { n, l })
    }

    /// All eigenvalues by cyclic Jacobi, ascending. Deterministic sweep
    /// order, no eigenvectors.
    pub fn eigenvalues(&self) -> Vec<T> {
        let n = self.n;
        if n == 0 {
            return vec![];
        }
        if n == 1 {
            return vec![*self.get(0, 0)];
        }
        let mut a = self.data.clone();
        let scale = self.max_abs();
        if scale == T::zero() {
            return vec![T::zero(); n];
        }
        let tol = T::epsilon() * scale;
        let max_sweeps = 64;
        for _ in 0..max_sweeps {
            let mut off = T::zero();
            for p in 0..n {
                for q in (p + 1)..n {
                    off = off + a[p * n + q] * a[p * n + q];
                }
            }
            if off.sqrt() <= tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p * n + q];
                    if apq.abs() <= tol * T::from_f64(1e-3).unwrap() {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[q * n + q];
                    let theta = (aqq - app) / (T::from_f64(2.0).unwrap() * apq);
                    let t = {
                        let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                        sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                    };
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut eig: Vec<T> = (0..n).map(|i| a[i * n + i]).collect();
        eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eig
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues()[0]
    }

    pub fn max_eigenvalue(&self) -> T {
        *self.eigenvalues().last().unwrap()
    }
}

/// Lower-triangular Cholesky factor.
pub struct Cholesky<T> {
    n: usize,
    l: Vec<T>,
}

impl<T: Real> Cholesky<T> {
    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let n = self.n;
        assert_eq!(rhs.len(), n);
        let mut y = rhs.to_vec();
        for i in 0..n {
            for k in 0..i {
                let lik = self.l[i * n + k];
                y[i] = y[i] - lik * y[k];
            }
            y[i] = y[i] / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let lki = self.l[k * n + i];
                y[i] = y[i] - lki * y[k];
            }
            y[i] = y[i] / self.l[i * n + i];
        }
        y
    }

    /// Inverse of the factored matrix, assembled column by column.
    pub fn inverse(&self) -> SymMat<T> {
        let n = self.n;
        let mut inv = SymMat::zeros(n);
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e[j] = T::one();
            let col = self.solve(&e);
            e[j] = T::zero();
            for i in 0..n {
                inv.data[i * n + j] = col[i];
            }
        }
        // symmetrize against roundoff drift
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = (inv.data[i * n + j] + inv.data[j * n + i])
                    / T::from_f64(2.0).unwrap();
                inv.data[i * n + j] = avg;
                inv.data[j * n + i] = avg;
            }
        }
        inv
    }

    pub fn log_det(&self) -> T {
        let mut acc = T::zero();
        for i in 0..self.n {
            acc = acc + self.l[i * self.n + i].ln();
        }
        acc + acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_rows(rows: &[&[f64]]) -> SymMat<f64> {
        let n = rows.len();
        let mut m = SymMat::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.data[i * n + j] = v;
            }
        }
        m
    }

    #[test]
    fn cholesky_solve_roundtrip() {
        let a = from_rows(&[&[4.0, 2.0, 0.6], &[2.0, 5.0, 1.0], &[0.6, 1.0, 3.0]]);
        let chol = a.cholesky().expect("PD");
        let x = chol.solve(&[1.0, -2.0, 0.5]);
        // residual A x - b
        for i in 0..3 {
            let mut r = 0.0;
            for j in 0..3 {
                r += a.get(i, j) * x[j];
            }
            let b = [1.0, -2.0, 0.5][i];
            assert!((r - b).abs() < 1e-12, "row {i}: {r} vs {b}");
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(a.cholesky().is_none());
    }

    #[test]
    fn jacobi_eigenvalues_2x2() {
        let a = from_rows(&[&[1.0, 2.0], &[2.0, 1.0]]);
        let eig = a.eigenvalues();
        assert!((eig[0] + 1.0).abs() < 1e-12);
        assert!((eig[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_eigenvalues_hilbert_4() {
        // reference values computed with numpy.linalg.eigvalsh
        let mut h = SymMat::zeros(4);
        for i in 0..4 {
            for j in 0..4 {
                h.data[i * 4 + j] = 1.0 / ((i + j + 1) as f64);
            }
        }
        let eig = h.eigenvalues();
        let expected = [
            9.670230402260876e-5,
            6.738273605760613e-3,
            1.6914122022145006e-1,
            1.5002142800592426e0,
        ];
        for (got, want) in eig.iter().zip(expected) {
            assert!((got - want).abs() < 1e-10 * want.max(1e-4), "{got} vs {want}");
        }
    }

    #[test]
    fn inverse_matches_identity() {
        let a = from_rows(&[&[4.0, 2.0, 0.6], &[2.0, 5.0, 1.0], &[0.6, 1.0, 3.0]]);
        let inv = a.cholesky().unwrap().inverse();
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += a.get(i, k) * inv.get(k, j);
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((s - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn log_det_consistent() {
        let a = from_rows(&[&[2.0, 0.0], &[0.0, 8.0]]);
        let ld = a.cholesky().unwrap().log_det();
        assert!((ld - 16.0f64.ln()).abs() < 1e-12);
    }
}
