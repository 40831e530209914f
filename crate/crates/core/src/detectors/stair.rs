//! Stair-matrix detection.
//!
//! A stair matrix is tridiagonal with off-diagonal entries on alternate
//! rows only. With the off-diagonals on the even rows (1-based) the odd
//! rows are pure diagonal, so `S = D + E` with `E·D⁻¹·E = 0` and the
//! inverse is `D⁻¹ - D⁻¹·E·D⁻¹`: same sparsity, one reciprocal per
//! diagonal and two multiplies per off-diagonal.
//!
//! Indices in this module are 0-based; "even rows" in 1-based terms are the
//! odd 0-based rows `1, 3, 5, ...`.

use super::tally::{CostBreakdown, Tally};
use crate::cxmat::{ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};
use crate::scalar::{Cx, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StairEntry<T> {
    pub row: usize,
    pub col: usize,
    pub value: Cx<T>,
}

/// Positions of the stair off-diagonals for dimension `u`, row-major.
pub fn stair_support(u: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(u.saturating_sub(1));
    for r in (1..u).step_by(2) {
        out.push((r, r - 1));
        if r + 1 < u {
            out.push((r, r + 1));
        }
    }
    out
}

/// True when `(i, j)` is on the diagonal or the stair support.
#[inline]
pub fn on_stair(i: usize, j: usize) -> bool {
    i == j || (i % 2 == 1 && (j + 1 == i || j == i + 1))
}

/// Stair part of a Hermitian Gramian. The diagonal of a Gramian is real,
/// so it is kept as real numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct StairMatrix<T> {
    diag: Vec<T>,
    off: Vec<StairEntry<T>>,
}

impl<T: Real> StairMatrix<T> {
    /// `off` must list values for [`stair_support`] positions, in order.
    pub fn new(diag: Vec<T>, off: Vec<Cx<T>>) -> Result<Self> {
        let support = stair_support(diag.len());
        if off.len() != support.len() {
            return Err(Error::Dimension(format!(
                "stair matrix of size {} has {} off-diagonals, got {}",
                diag.len(),
                support.len(),
                off.len()
            )));
        }
        let off = support
            .into_iter()
            .zip(off)
            .map(|((row, col), value)| StairEntry { row, col, value })
            .collect();
        Ok(Self { diag, off })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn off_diagonals(&self) -> &[StairEntry<T>] {
        &self.off
    }

    pub fn to_dense(&self) -> ComplexMatrix<T> {
        let mut m = ComplexMatrix::zeros(self.dim(), self.dim());
        for (i, &d) in self.diag.iter().enumerate() {
            m[(i, i)] = Cx::new(d, T::zero());
        }
        for e in &self.off {
            m[(e.row, e.col)] = e.value;
        }
        m
    }
}

/// Extracts the stair pattern (diagonal plus even-row neighbours) of `g`.
pub fn extract_stair<T: Real>(g: &ComplexMatrix<T>) -> Result<StairMatrix<T>> {
    if !g.is_square() || g.rows() == 0 {
        return Err(Error::Dimension(format!(
            "stair extraction needs a non-empty square matrix, got {}x{}",
            g.rows(),
            g.cols()
        )));
    }
    let u = g.rows();
    let diag = (0..u).map(|i| g[(i, i)].re).collect();
    let off = stair_support(u)
        .into_iter()
        .map(|(r, c)| g[(r, c)])
        .collect();
    StairMatrix::new(diag, off)
}

/// Inverse of a stair matrix; shares the stair sparsity.
#[derive(Debug, Clone, PartialEq)]
pub struct StairInverse<T> {
    pub(crate) diag: Vec<T>,
    pub(crate) off: Vec<StairEntry<T>>,
}

impl<T: Real> StairInverse<T> {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn off_diagonals(&self) -> &[StairEntry<T>] {
        &self.off
    }

    pub fn to_dense(&self) -> ComplexMatrix<T> {
        let mut m = ComplexMatrix::zeros(self.dim(), self.dim());
        for (i, &d) in self.diag.iter().enumerate() {
            m[(i, i)] = Cx::new(d, T::zero());
        }
        for e in &self.off {
            m[(e.row, e.col)] = e.value;
        }
        m
    }

    /// `S⁻¹·v`.
    pub fn apply(&self, v: &ComplexVector<T>) -> ComplexVector<T> {
        self.apply_counted(v, &mut Tally::default())
    }

    fn apply_counted(&self, v: &ComplexVector<T>, tally: &mut Tally) -> ComplexVector<T> {
        let mut out: Vec<Cx<T>> = self
            .diag
            .iter()
            .zip(v.iter())
            .map(|(&d, &x)| x * d)
            .collect();
        tally.complex_real_mults += self.dim() as u64;
        for e in &self.off {
            out[e.row] += e.value * v[e.col];
        }
        tally.complex_mults += self.off.len() as u64;
        ComplexVector::from_vec(out)
    }
}

/// Closed-form stair inverse: reciprocal diagonal, then
/// `S⁻¹(i,j) = -S(i,j)·S⁻¹(i,i)·S⁻¹(j,j)` for each stair off-diagonal.
pub fn invert_stair<T: Real>(s: &StairMatrix<T>) -> Result<StairInverse<T>> {
    invert_stair_counted(s, &mut Tally::default())
}

pub(crate) fn invert_stair_counted<T: Real>(
    s: &StairMatrix<T>,
    tally: &mut Tally,
) -> Result<StairInverse<T>> {
    let diag = s
        .diag
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if d.is_zero() || !d.is_finite() {
                Err(Error::ZeroDiagonal { index: i })
            } else {
                Ok(d.recip())
            }
        })
        .collect::<Result<Vec<T>>>()?;
    tally.divisions += diag.len() as u64;
    let off = s
        .off
        .iter()
        .map(|e| StairEntry {
            row: e.row,
            col: e.col,
            value: -(e.value * (diag[e.row] * diag[e.col])),
        })
        .collect::<Vec<_>>();
    tally.real_mults += off.len() as u64;
    tally.complex_real_mults += off.len() as u64;
    Ok(StairInverse { diag, off })
}

/// `S - G`: zero on the stair support, `-G` elsewhere. No subtraction is
/// needed since the stair entries are copied straight from `G`.
pub fn stair_residual<T: Real>(g: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let u = g.rows();
    let mut r = ComplexMatrix::zeros(u, u);
    for i in 0..u {
        for j in 0..u {
            if !on_stair(i, j) {
                r[(i, j)] = -g[(i, j)];
            }
        }
    }
    r
}

/// Stair-matrix iterative detection:
/// `x₀ = S⁻¹·x_mf`, then `t` times `x ← S⁻¹·((S - G)·x + x_mf)`.
pub fn detect_stair<T: Real>(
    g: &ComplexMatrix<T>,
    xmf: &ComplexVector<T>,
    t: usize,
) -> Result<ComplexVector<T>> {
    detect_stair_counted(g, xmf, t, &mut CostBreakdown::default())
}

pub(crate) fn detect_stair_counted<T: Real>(
    g: &ComplexMatrix<T>,
    xmf: &ComplexVector<T>,
    t: usize,
    cost: &mut CostBreakdown,
) -> Result<ComplexVector<T>> {
    super::check_system(g, xmf)?;
    let u = g.rows();
    let s = extract_stair(g)?;
    let sinv = invert_stair_counted(&s, &mut cost.setup)?;
    let residual = stair_residual(g);

    let mut x = sinv.apply_counted(xmf, &mut cost.init);
    for _ in 0..t {
        let mut v = xmf.clone();
        for i in 0..u {
            let row = residual.row(i);
            for j in (0..u).filter(|&j| !on_stair(i, j)) {
                v[i] += row[j] * x[j];
            }
        }
        cost.iterations.complex_mults += (u * u - u - s.off_diagonals().len()) as u64;
        x = sinv.apply_counted(&v, &mut cost.iterations);
    }
    Ok(x)
}
