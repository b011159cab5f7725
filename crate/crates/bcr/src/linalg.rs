//! Small dense linear algebra: determinants with rank detection, solves and
//! oriented tangent frames of spheres.
//!
//! The elimination only ever compares absolute values and combines rows
//! linearly, so negating rows or columns of the input negates the outputs
//! bit for bit. The cycle-reversal symmetry relies on this.

use std::fmt;

use crate::Scalar;

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Matrix { rows: rows.len(), cols, data: rows.concat() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(T::zero(), |acc, l| acc + self[(i, l)] * other[(l, j)])
        })
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// Columns reordered: column `j` of the result is column `order[j]` of `self`.
    pub fn select_columns(&self, order: &[usize]) -> Self {
        Self::from_fn(self.rows, order.len(), |i, j| self[(i, order[j])])
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Determinant by full-pivot elimination after scaling every row and column
    /// to unit max-norm. A pivot below `tol` (relative to the scaled matrix)
    /// marks the matrix as numerically singular and the determinant is exactly 0.
    pub fn det_with_rank_check(&self, tol: T) -> Determinant<T> {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Determinant { value: T::one(), singular: false, min_pivot: T::one() };
        }
        let mut a = self.clone();
        let mut scale = T::one();
        for i in 0..n {
            let s = a.row(i).iter().fold(T::zero(), |m, x| m.max(x.abs()));
            if s == T::zero() || !s.is_finite() {
                return Determinant::singular();
            }
            for j in 0..n {
                a[(i, j)] = a[(i, j)] / s;
            }
            scale = scale * s;
        }
        for j in 0..n {
            let s = (0..n).fold(T::zero(), |m, i| m.max(a[(i, j)].abs()));
            if s == T::zero() {
                return Determinant::singular();
            }
            for i in 0..n {
                a[(i, j)] = a[(i, j)] / s;
            }
            scale = scale * s;
        }
        let mut det = T::one();
        let mut min_pivot = T::infinity();
        let mut rp: Vec<usize> = (0..n).collect();
        let mut cp: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (mut pi, mut pj, mut best) = (k, k, -T::one());
            for i in k..n {
                for j in k..n {
                    let v = a[(rp[i], cp[j])].abs();
                    if v > best {
                        best = v;
                        pi = i;
                        pj = j;
                    }
                }
            }
            if !(best > tol) {
                return Determinant { value: T::zero(), singular: true, min_pivot: best.max(T::zero()) };
            }
            min_pivot = min_pivot.min(best);
            if pi != k {
                rp.swap(pi, k);
                det = -det;
            }
            if pj != k {
                cp.swap(pj, k);
                det = -det;
            }
            let piv = a[(rp[k], cp[k])];
            det = det * piv;
            for i in k + 1..n {
                let f = a[(rp[i], cp[k])] / piv;
                if f == T::zero() {
                    continue;
                }
                for j in k + 1..n {
                    let upd = a[(rp[i], cp[j])] - f * a[(rp[k], cp[j])];
                    a[(rp[i], cp[j])] = upd;
                }
            }
        }
        Determinant { value: det * scale, singular: false, min_pivot }
    }

    /// Plain determinant (no singularity snapping).
    pub fn det(&self) -> T {
        self.det_with_rank_check(T::zero()).value
    }

    /// Numerical rank with the same scaling and relative tolerance as
    /// [`Matrix::det_with_rank_check`].
    pub fn rank(&self, tol: T) -> usize {
        let mut a = self.clone();
        let (r, c) = (self.rows, self.cols);
        let m = a.max_abs();
        if m == T::zero() {
            return 0;
        }
        for x in a.data.iter_mut() {
            *x = *x / m;
        }
        let mut rank = 0;
        let mut rows_left: Vec<usize> = (0..r).collect();
        let mut cols_left: Vec<usize> = (0..c).collect();
        while !rows_left.is_empty() && !cols_left.is_empty() {
            let mut best = (0, 0, T::zero());
            for (ii, &i) in rows_left.iter().enumerate() {
                for (jj, &j) in cols_left.iter().enumerate() {
                    if a[(i, j)].abs() > best.2 {
                        best = (ii, jj, a[(i, j)].abs());
                    }
                }
            }
            if !(best.2 > tol) {
                break;
            }
            let pi = rows_left.swap_remove(best.0);
            let pj = cols_left.swap_remove(best.1);
            let piv = a[(pi, pj)];
            for &i in &rows_left {
                let f = a[(i, pj)] / piv;
                for &j in &cols_left {
                    let upd = a[(i, j)] - f * a[(pi, j)];
                    a[(i, j)] = upd;
                }
            }
            rank += 1;
        }
        rank
    }

    /// Solves `self · x = b` by full-pivot elimination; `None` when a scaled
    /// pivot falls below `tol`.
    pub fn solve(&self, b: &[T], tol: T) -> Option<Vec<T>> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(b.len(), self.rows);
        let n = self.rows;
        let mut a = self.clone();
        let mut rhs = b.to_vec();
        for i in 0..n {
            let s = a.row(i).iter().fold(T::zero(), |m, x| m.max(x.abs()));
            if !(s > T::zero()) || !s.is_finite() {
                return None;
            }
            for j in 0..n {
                a[(i, j)] = a[(i, j)] / s;
            }
            rhs[i] = rhs[i] / s;
        }
        let mut cp: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (mut pi, mut pj, mut best) = (k, k, -T::one());
            for i in k..n {
                for j in k..n {
                    let v = a[(i, cp[j])].abs();
                    if v > best {
                        best = v;
                        pi = i;
                        pj = j;
                    }
                }
            }
            if !(best > tol) {
                return None;
            }
            if pi != k {
                for j in 0..n {
                    a.data.swap(pi * n + j, k * n + j);
                }
                rhs.swap(pi, k);
            }
            cp.swap(pj, k);
            let piv = a[(k, cp[k])];
            for i in k + 1..n {
                let f = a[(i, cp[k])] / piv;
                if f == T::zero() {
                    continue;
                }
                for j in k..n {
                    let upd = a[(i, cp[j])] - f * a[(k, cp[j])];
                    a[(i, cp[j])] = upd;
                }
                rhs[i] = rhs[i] - f * rhs[k];
            }
        }
        let mut x = vec![T::zero(); n];
        for k in (0..n).rev() {
            let mut s = rhs[k];
            for j in k + 1..n {
                s = s - a[(k, cp[j])] * x[cp[j]];
            }
            x[cp[k]] = s / a[(k, cp[k])];
        }
        x.iter().all(|v| v.is_finite()).then_some(x)
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", &self.data[i * self.cols..(i + 1) * self.cols])?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Determinant<T> {
    pub value: T,
    /// Set when a scaled pivot fell below the tolerance; `value` is then 0.
    pub singular: bool,
    /// Smallest scaled pivot met before stopping.
    pub min_pivot: T,
}

impl<T: Scalar> Determinant<T> {
    fn singular() -> Self {
        Determinant { value: T::zero(), singular: true, min_pivot: T::zero() }
    }
}

/// Default relative pivot tolerance: about `1e-11` in double precision.
pub fn default_pivot_tol<T: Scalar>() -> T {
    T::epsilon() * T::lit(5.0e4)
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Orthonormal basis of the tangent space of the unit sphere at `d`, as the
/// columns of an `m × (m-1)` matrix.
///
/// Coordinate axes are orthogonalised against `d` in increasing index order,
/// skipping the axis with the largest `|d_i|` (first one on ties). The last
/// vector is flipped if needed so that `det[d, T] > 0`.
pub fn tangent_frame<T: Scalar>(d: &[T]) -> Matrix<T> {
    let m = d.len();
    let skip = (0..m).fold(0, |best, i| if d[i].abs() > d[best].abs() { i } else { best });
    let mut basis: Vec<Vec<T>> = vec![d.to_vec()];
    for axis in (0..m).filter(|&i| i != skip) {
        let mut v = vec![T::zero(); m];
        v[axis] = T::one();
        for b in &basis {
            let c = dot(&v, b);
            for (vi, &bi) in v.iter_mut().zip(b) {
                *vi = *vi - c * bi;
            }
        }
        let nv = norm(&v);
        for vi in v.iter_mut() {
            *vi = *vi / nv;
        }
        basis.push(v);
    }
    let full = Matrix::from_fn(m, m, |i, j| basis[j][i]);
    let flip = full.det() < T::zero();
    Matrix::from_fn(m, m - 1, |i, j| {
        let x = basis[j + 1][i];
        if flip && j == m - 2 {
            -x
        } else {
            x
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn det_of_known_matrix() {
        let m = Matrix::from_rows(&[vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]]);
        assert_relative_eq!(m.det(), 18.0, max_relative = 1e-14);
    }

    #[test]
    fn singular_matrix_snaps_to_zero() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![0.1, 0.2]]);
        let d = m.det_with_rank_check(default_pivot_tol::<f64>());
        assert!(d.singular);
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn row_negation_is_exact() {
        let m = Matrix::from_rows(&[
            vec![0.3f64, -1.7, 2.2, 0.1],
            vec![1.1, 0.4, -0.9, 3.3],
            vec![-2.5, 0.8, 0.05, 1.0],
            vec![0.7, 0.7, 1.9, -0.2],
        ]);
        let mut n = m.clone();
        for j in 0..4 {
            n[(2, j)] = -n[(2, j)];
        }
        assert_eq!(n.det().to_bits(), (-m.det()).to_bits());
    }

    #[test]
    fn solve_recovers_solution() {
        let m = Matrix::from_rows(&[vec![4.0, 1.0, 2.0], vec![1.0, 5.0, 1.0], vec![2.0, 1.0, 6.0]]);
        let x = [1.0, -2.0, 0.5];
        let b = m.mul_vec(&x);
        let y = m.solve(&b, 1e-12).unwrap();
        for i in 0..3 {
            assert_relative_eq!(x[i], y[i], max_relative = 1e-12);
        }
    }

    #[test]
    fn rank_of_product() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]);
        let p = a.mul(&a.transpose());
        assert_eq!(p.rank(1e-10), 2);
    }

    #[test]
    fn frames_are_oriented_and_orthonormal() {
        let d = [0.6f64, -0.0, 0.8];
        let t = tangent_frame(&d);
        let full = Matrix::from_fn(3, 3, |i, j| if j == 0 { d[i] } else { t[(i, j - 1)] });
        assert_relative_eq!(full.det(), 1.0, max_relative = 1e-12);
        let g = full.transpose().mul(&full);
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(g[(i, j)], if i == j { 1.0 } else { 0.0 }, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn antipodal_frames_share_all_but_last_vector() {
        let d = [0.2f64, 0.3, -0.5, 0.1, 0.7];
        let nd = norm(&d);
        let d: Vec<f64> = d.iter().map(|x| x / nd).collect();
        let m: Vec<f64> = d.iter().map(|x| -x).collect();
        let (a, b) = (tangent_frame(&d), tangent_frame(&m));
        for i in 0..5 {
            for j in 0..3 {
                assert_eq!(a[(i, j)].to_bits(), b[(i, j)].to_bits());
            }
            assert_eq!(a[(i, 3)].to_bits(), (-b[(i, 3)]).to_bits());
        }
    }

    #[test]
    fn works_in_single_precision() {
        let m = Matrix::from_rows(&[vec![2.0f32, 1.0], vec![1.0, 3.0]]);
        assert!((m.det() - 5.0).abs() < 1e-5);
    }
}
