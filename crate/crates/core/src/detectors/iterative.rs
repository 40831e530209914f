//! Diagonal-based iterative solvers for `G·x = x_mf`: Gauss–Seidel,
//! truncated Neumann series, conjugate gradient and Richardson, plus the
//! exact Cholesky solve.

use super::tally::{CostBreakdown, Tally};
use crate::cxmat::{solve_hermitian, ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};
use crate::scalar::{norm_sqr, Cx, Real};
use num_traits::Zero;

fn diag_reciprocals<T: Real>(g: &ComplexMatrix<T>, tally: &mut Tally) -> Result<Vec<T>> {
    let inv = (0..g.rows())
        .map(|i| {
            let d = g[(i, i)].re;
            if d.is_zero() || !d.is_finite() {
                Err(Error::ZeroDiagonal { index: i })
            } else {
                Ok(d.recip())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    tally.divisions += inv.len() as u64;
    Ok(inv)
}

fn scale_entries<T: Real>(d: &[T], v: &ComplexVector<T>, tally: &mut Tally) -> ComplexVector<T> {
    tally.complex_real_mults += d.len() as u64;
    ComplexVector::from_vec(d.iter().zip(v.iter()).map(|(&s, &z)| z * s).collect())
}

/// Gauss–Seidel: `x₀ = D⁻¹·x_mf`, then `t` forward-substitution sweeps of
/// `(D + L)·x_t = x_mf - R·x_{t-1}`.
pub fn detect_gs<T: Real>(
    g: &ComplexMatrix<T>,
    xmf: &ComplexVector<T>,
    t: usize,
) -> Result<ComplexVector<T>> {
    detect_gs_counted(g, xmf, t, &mut CostBreakdown::default())
}

pub(crate) fn detect_gs_counted<T: Real>(
    g: &ComplexMatrix<T>,
    xmf: &ComplexVector<T>,
    t: usize,
    cost: &mut CostBreakdown,
) -> Result<ComplexVector<T>> {
    super::check_system(g, xmf)?;
    let u = g.rows();
    let dinv = diag_reciprocals(g, &mut cost.setup)?;
    let mut x = scale_entries(&dinv, xmf, &mut cost.init);
    for _ in 0..t {
        for i in 0..u {
            let row = g.row(i);
            // Entries j < i already hold this sweep's values.
            let mut acc = xmf[i];
            for j in (0..u).filter(|&j| j != i) {
                acc -= row[j] * x[j];
            }
            x[i] = acc * dinv[i];
        }
        cost.iterations.complex_mults += (u * (u - 1)) as u64;
        cost.iterations.complex_real_mults += u as u64;
    }
    Ok(x)
}

/// Truncated Neumann series with `k` terms:
/// `x = Σ_{n<k} (-D⁻¹E)ⁿ·D⁻¹·x_mf`, `E = G - D`, via matrix-vector recurrences.
pub fn detect_nsa<T: Real>(
    g: &ComplexMatrix<T>,
    xmf: &ComplexVector<T>,
    k: usize,
) -> Result<ComplexVector<T>> {
    detect_nsa_counted(g, xmf, k, &mut CostBreakdown::default())
}

pub(crate) fn detect_nsa_counted<T: Real>(
    g: &ComplexMatrix<T>,
    xmf: &ComplexVector<T>,
    k: usize,
    cost: &mut CostBreakdown,
) -> Result<ComplexVector<T>> {
    super::check_system(g, xmf)?;
    if k == 0 {
        return Err(Error::InvalidArgument("NSA needs at least one term".into()));
    }
    let u = g.rows();
    let dinv = diag_reciprocals(g, &mut cost.setup)?;
    let mut term = scale_entries(&dinv, xmf, &mut cost.init);
    let mut x = term.clone();
    for _ in 1..k {
        let mut next = ComplexVector::zeros(u);
        for i in 0..u {
            let row = g.row(i);
            let mut acc = Cx::zero();
            for j in (0..u).filter(|&j| j != i) {
                acc += row[j] * term[j];
            }
            next[i] = -acc * dinv[i];
        }
        cost.iterations.complex_mults += (u * (u - 1)) as u64;
        cost.iterations.complex_real_mults += u as u64;
        term = next;
        x = x.add(&term)?;
    }
    Ok(x)
}

/// Conjugate gradient on the Hermitian system, `k` steps from `x₀ = 0`.
/// Stops early only if the residual vanishes.
pub fn detect_cg<T: Real>(
    g: &ComplexMatrix<T>,
    xmf: &ComplexVector<T>,
    k: usize,
) -> Result<ComplexVector<T>> {
    detect_cg_counted(g, xmf, k, &mut CostBreakdown::default()).map(|(x, _)| x)
}

/// As [`detect_cg`], also returning the residual norm after every step.
pub fn detect_cg_with_history<T: Real>(
    g: &ComplexMatrix<T>,
    xmf: &ComplexVector<T>,
    k: usize,
) -> Result<(ComplexVector<T>, Vec<T>)> {
    detect_cg_counted(g, xmf, k, &mut CostBreakdown::default())
}

pub(crate) fn detect_cg_counted<T: Real>(
    g: &ComplexMatrix<T>,
    xmf: &ComplexVector<T>,
    k: usize,
    cost: &mut CostBreakdown,
) -> Result<(ComplexVector<T>, Vec<T>)> {
    super::check_system(g, xmf)?;
    let u = g.rows() as u64;
    let it = &mut cost.iterations;
    let mut x = ComplexVector::zeros(g.rows());
    let mut r = xmf.clone();
    let mut p = r.clone();
    let mut rs: T = r.iter().map(|&z| norm_sqr(z)).sum();
    it.real_mults += 2 * u;
    let stop = rs * T::epsilon() * T::epsilon();
    let mut history = Vec::with_capacity(k);
    for iteration in 0..k {
        if rs <= stop {
            break;
        }
        let ap = g.matvec(&p)?;
        it.complex_mults += u * u;
        // Re(p^H·A·p); the imaginary part vanishes for Hermitian A.
        let curvature: T = p
            .iter()
            .zip(ap.iter())
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum();
        it.real_mults += 2 * u;
        if curvature.is_nan() || curvature <= T::zero() {
            return Err(Error::Breakdown {
                iteration,
                curvature: curvature.to_f64_lossy(),
            });
        }
        let alpha = rs / curvature;
        it.divisions += 1;
        for i in 0..g.rows() {
            x[i] += p[i] * alpha;
            r[i] -= ap[i] * alpha;
        }
        it.complex_real_mults += 2 * u;
        let rs_new: T = r.iter().map(|&z| norm_sqr(z)).sum();
        it.real_mults += 2 * u;
        let beta = rs_new / rs;
        it.divisions += 1;
        for i in 0..g.rows() {
            p[i] = r[i] + p[i] * beta;
        }
        it.complex_real_mults += u;
        rs = rs_new;
        history.push(rs.sqrt());
    }
    Ok((x, history))
}

/// Richardson iteration `x ← x + ω·(x_mf - G·x)` from `x₀ = ω·x_mf`.
pub fn detect_richardson<T: Real>(
    g: &ComplexMatrix<T>,
    xmf: &ComplexVector<T>,
    k: usize,
    omega: T,
) -> Result<ComplexVector<T>> {
    detect_richardson_counted(g, xmf, k, omega, &mut CostBreakdown::default())
}

pub(crate) fn detect_richardson_counted<T: Real>(
    g: &ComplexMatrix<T>,
    xmf: &ComplexVector<T>,
    k: usize,
    omega: T,
    cost: &mut CostBreakdown,
) -> Result<ComplexVector<T>> {
    super::check_system(g, xmf)?;
    if !omega.is_finite() || omega <= T::zero() {
        return Err(Error::InvalidArgument(format!(
            "Richardson relaxation must be positive, got {omega}"
        )));
    }
    let u = g.rows() as u64;
    let mut x = xmf.scale(omega);
    cost.init.complex_real_mults += u;
    for _ in 0..k {
        let gx = g.matvec(&x)?;
        for i in 0..g.rows() {
            x[i] += (xmf[i] - gx[i]) * omega;
        }
        cost.iterations.complex_mults += u * u;
        cost.iterations.complex_real_mults += u;
    }
    Ok(x)
}

/// Exact MMSE (or ZF, given the unregularised Gramian) solution.
pub fn detect_exact<T: Real>(
    g: &ComplexMatrix<T>,
    xmf: &ComplexVector<T>,
) -> Result<ComplexVector<T>> {
    super::check_system(g, xmf)?;
    solve_hermitian(g, xmf)
}
