//! Dense complex matrices and vectors.
//!
//! Row-major storage, sized for the small systems a massive-MIMO detector
//! sees (U users by B antennas, U ≤ 16, B ≤ 256). Besides plain arithmetic
//! this module forms the Gramian and matched filter and provides the exact
//! Cholesky solve used as the MMSE/ZF reference.

use crate::error::{Error, Result};
use crate::scalar::{norm_sqr, Cx, Real};
use num_traits::Zero;
use std::ops::{Index, IndexMut};

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector<T> {
    data: Vec<Cx<T>>,
}

impl<T: Real> ComplexVector<T> {
    pub fn zeros(len: usize) -> Self {
        Self {
            data: vec![Cx::zero(); len],
        }
    }

    pub fn from_vec(data: Vec<Cx<T>>) -> Self {
        Self { data }
    }

    /// Builds a vector with zero imaginary parts.
    pub fn from_real(values: &[T]) -> Self {
        Self {
            data: values.iter().map(|&v| Cx::new(v, T::zero())).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Cx<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Cx<T>] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Cx<T>> {
        self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Cx<T>> {
        self.data.iter()
    }

    pub fn norm(&self) -> T {
        self.data.iter().map(|&z| norm_sqr(z)).sum::<T>().sqrt()
    }

    /// Inner product `self^H · other`.
    pub fn dot_h(&self, other: &Self) -> Result<Cx<T>> {
        check_len(self.len(), other.len(), "dot_h")?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(Cx::zero(), |acc, (a, b)| acc + a.conj() * b))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_len(self.len(), other.len(), "add")?;
        Ok(Self::from_vec(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_len(self.len(), other.len(), "sub")?;
        Ok(Self::from_vec(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_vec(self.data.iter().map(|z| z * s).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        check_len(self.len(), other.len(), "max_abs_diff")?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max))
    }
}

impl<T> Index<usize> for ComplexVector<T> {
    type Output = Cx<T>;
    fn index(&self, i: usize) -> &Cx<T> {
        &self.data[i]
    }
}

impl<T> IndexMut<usize> for ComplexVector<T> {
    fn index_mut(&mut self, i: usize) -> &mut Cx<T> {
        &mut self.data[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Cx<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Cx::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Cx::new(T::one(), T::zero());
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Cx<T>>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real_rows(rows: &[&[T]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::Dimension("ragged rows".into()));
            }
            data.extend(row.iter().map(|&v| Cx::new(v, T::zero())));
        }
        Self::from_row_major(r, c, data)
    }

    pub fn from_diag(diag: &[Cx<T>]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Cx<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Cx<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn hermitian_transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "matmul {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &ComplexVector<T>) -> Result<ComplexVector<T>> {
        if self.cols != v.len() {
            return Err(Error::Dimension(format!(
                "matvec {}x{} by length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok(ComplexVector::from_vec(
            (0..self.rows)
                .map(|i| {
                    self.row(i)
                        .iter()
                        .zip(v.iter())
                        .fold(Cx::zero(), |acc, (a, b)| acc + a * b)
                })
                .collect(),
        ))
    }

    /// Largest entry-wise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("max_abs_diff shape mismatch".into()));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max))
    }

    /// Largest `|A[i][j] - conj(A[j][i])|`; zero for an exactly Hermitian matrix.
    pub fn hermitian_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.rows.min(self.cols) {
            for j in 0..self.rows.min(self.cols) {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn diag(&self) -> Vec<Cx<T>> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Cx<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Cx<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cx<T> {
        &mut self.data[i * self.cols + j]
    }
}

fn check_len(a: usize, b: usize, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(format!("{what}: lengths {a} and {b}")));
    }
    Ok(())
}

/// `H^H·H + sigma2·I`. With `sigma2 = 0` this is the zero-forcing Gramian.
pub fn gramian<T: Real>(h: &ComplexMatrix<T>, sigma2: T) -> Result<ComplexMatrix<T>> {
    if h.rows() < h.cols() {
        return Err(Error::Dimension(format!(
            "gramian needs B >= U, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    if sigma2.is_nan() || sigma2 < T::zero() {
        return Err(Error::InvalidArgument(format!("sigma2 = {sigma2}")));
    }
    let u = h.cols();
    let mut g = ComplexMatrix::zeros(u, u);
    for i in 0..u {
        // Diagonal is a sum of squared magnitudes, real by construction.
        let d: T = (0..h.rows()).map(|b| norm_sqr(h[(b, i)])).sum();
        g[(i, i)] = Cx::new(d + sigma2, T::zero());
        for j in i + 1..u {
            let v = (0..h.rows()).fold(Cx::zero(), |acc, b| acc + h[(b, i)].conj() * h[(b, j)]);
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
    }
    Ok(g)
}

/// `H^H·y`.
pub fn matched_filter<T: Real>(
    h: &ComplexMatrix<T>,
    y: &ComplexVector<T>,
) -> Result<ComplexVector<T>> {
    if h.rows() != y.len() {
        return Err(Error::Dimension(format!(
            "matched filter: H has {} rows, y has length {}",
            h.rows(),
            y.len()
        )));
    }
    Ok(ComplexVector::from_vec(
        (0..h.cols())
            .map(|j| (0..h.rows()).fold(Cx::zero(), |acc, b| acc + h[(b, j)].conj() * y[b]))
            .collect(),
    ))
}

/// Lower-triangular Cholesky factor `L` with `G = L·L^H`.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    l: ComplexMatrix<T>,
}

impl<T: Real> Cholesky<T> {
    pub fn factor(g: &ComplexMatrix<T>) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::Dimension(format!(
                "cholesky of {}x{}",
                g.rows(),
                g.cols()
            )));
        }
        let n = g.rows();
        let scale = (0..n).map(|i| g[(i, i)].re.abs()).fold(T::zero(), T::max);
        let tol = T::epsilon() * T::lit(n as f64) * scale;
        let mut l = ComplexMatrix::zeros(n, n);
        for j in 0..n {
            let mut pivot = g[(j, j)].re;
            for k in 0..j {
                pivot -= norm_sqr(l[(j, k)]);
            }
            if pivot.is_nan() || pivot <= tol {
                return Err(Error::NotPositiveDefinite {
                    index: j,
                    pivot: pivot.to_f64_lossy(),
                });
            }
            let ljj = pivot.sqrt();
            l[(j, j)] = Cx::new(ljj, T::zero());
            for i in j + 1..n {
                let mut s = g[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Self { l })
    }

    pub fn solve(&self, b: &ComplexVector<T>) -> Result<ComplexVector<T>> {
        let n = self.l.rows();
        if b.len() != n {
            return Err(Error::Dimension(format!(
                "solve: system is {n}, rhs has length {}",
                b.len()
            )));
        }
        // L·z = b
        let mut z = vec![Cx::zero(); n];
        for i in 0..n {
            let mut s = b[i];
            for (k, &zk) in z.iter().enumerate().take(i) {
                s -= self.l[(i, k)] * zk;
            }
            z[i] = s / self.l[(i, i)].re;
        }
        // L^H·x = z
        let mut x = vec![Cx::zero(); n];
        for i in (0..n).rev() {
            let mut s = z[i];
            for (k, &xk) in x.iter().enumerate().skip(i + 1) {
                s -= self.l[(k, i)].conj() * xk;
            }
            x[i] = s / self.l[(i, i)].re;
        }
        Ok(ComplexVector::from_vec(x))
    }

    pub fn factor_l(&self) -> &ComplexMatrix<T> {
        &self.l
    }
}

/// Solves `G·x = b` for Hermitian positive-definite `G`.
pub fn solve_hermitian<T: Real>(
    g: &ComplexMatrix<T>,
    b: &ComplexVector<T>,
) -> Result<ComplexVector<T>> {
    Cholesky::factor(g)?.solve(b)
}

/// Dense inverse of a Hermitian positive-definite matrix, column by column.
pub fn inverse_hermitian<T: Real>(g: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let chol = Cholesky::factor(g)?;
    let n = g.rows();
    let mut inv = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = ComplexVector::zeros(n);
        e[j] = Cx::new(T::one(), T::zero());
        let col = chol.solve(&e)?;
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    Ok(inv)
}

/// Dense inverse of an arbitrary nonsingular square matrix by Gauss-Jordan
/// elimination with partial pivoting.
pub fn inverse_general<T: Real>(a: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    if !a.is_square() {
        return Err(Error::Dimension("inverse of non-square matrix".into()));
    }
    let n = a.rows();
    let mut m = a.clone();
    let mut inv = ComplexMatrix::identity(n);
    for col in 0..n {
        let p = (col..n)
            .max_by(|&x, &y| {
                m[(x, col)]
                    .norm()
                    .partial_cmp(&m[(y, col)].norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if m[(p, col)].is_zero() {
            return Err(Error::ZeroDiagonal { index: col });
        }
        if p != col {
            for j in 0..n {
                let (x, y) = (m[(p, j)], m[(col, j)]);
                m[(p, j)] = y;
                m[(col, j)] = x;
                let (x, y) = (inv[(p, j)], inv[(col, j)]);
                inv[(p, j)] = y;
                inv[(col, j)] = x;
            }
        }
        let pivot = m[(col, col)];
        for j in 0..n {
            m[(col, j)] /= pivot;
            inv[(col, j)] /= pivot;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = m[(i, col)];
            if f.is_zero() {
                continue;
            }
            for j in 0..n {
                let (mc, ic) = (m[(col, j)], inv[(col, j)]);
                m[(i, j)] -= f * mc;
                inv[(i, j)] -= f * ic;
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Cx<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    #[test]
    fn gramian_identity_and_column() {
        let g = gramian(&ComplexMatrix::<f64>::identity(2), 0.0).unwrap();
        assert_eq!(g, ComplexMatrix::identity(2));

        let h = ComplexMatrix::from_real_rows(&[&[1.0], &[1.0]]).unwrap();
        let g = gramian(&h, 0.5).unwrap();
        assert_eq!(g[(0, 0)], c(2.5, 0.0));
    }

    #[test]
    fn gramian_rejects_wide_channel() {
        let h = ComplexMatrix::<f64>::zeros(2, 3);
        assert!(matches!(gramian(&h, 0.0), Err(Error::Dimension(_))));
    }

    #[test]
    fn matched_filter_cases() {
        let y = ComplexVector::from_vec(vec![c(1.0, 2.0), c(3.0, 0.0)]);
        let out = matched_filter(&ComplexMatrix::identity(2), &y).unwrap();
        assert_eq!(out, y);

        let h = ComplexMatrix::from_row_major(2, 1, vec![c(0.0, 1.0), c(0.0, 0.0)]).unwrap();
        let y = ComplexVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)]);
        let out = matched_filter(&h, &y).unwrap();
        assert_eq!(out[0], c(0.0, -1.0));

        let short = ComplexVector::<f64>::zeros(1);
        assert!(matched_filter(&h, &short).is_err());
    }

    #[test]
    fn solve_trivial_systems() {
        let b = ComplexVector::from_vec(vec![c(2.0, -1.0), c(4.0, 3.0)]);
        assert_eq!(solve_hermitian(&ComplexMatrix::identity(2), &b).unwrap(), b);

        let g = ComplexMatrix::from_diag(&[c(2.0, 0.0), c(4.0, 0.0)]);
        let b = ComplexVector::from_real(&[2.0, 4.0]);
        let x = solve_hermitian(&g, &b).unwrap();
        let ones = ComplexVector::from_real(&[1.0, 1.0]);
        assert!(x.max_abs_diff(&ones).unwrap() < 1e-15);
    }

    #[test]
    fn solve_rejects_indefinite() {
        let g = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 1.0]]).unwrap();
        let b = ComplexVector::from_real(&[1.0, 1.0]);
        assert!(matches!(
            solve_hermitian(&g, &b),
            Err(Error::NotPositiveDefinite { index: 1, .. })
        ));
    }

    #[test]
    fn general_inverse_of_permutation() {
        let p = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert_eq!(inverse_general(&p).unwrap(), p);
    }

    #[test]
    fn works_in_single_precision() {
        let g = ComplexMatrix::<f32>::from_real_rows(&[&[4.0, 1.0], &[1.0, 3.0]]).unwrap();
        let b = ComplexVector::from_real(&[1.0f32, 2.0]);
        let x = solve_hermitian(&g, &b).unwrap();
        let r = g.matvec(&x).unwrap().sub(&b).unwrap();
        assert!(r.norm() < 1e-6);
    }
}
