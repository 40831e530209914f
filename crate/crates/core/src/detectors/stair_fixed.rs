//! Fixed-point model of the stair detector datapath.
//!
//! The Gramian and matched filter arrive from floating-point
//! preprocessing and are quantized at the detector boundary. Both are first
//! scaled by a common power of two so the Gramian diagonal lands in
//! `[1, 2)`; the solution of `G·x = x_mf` is unchanged by that scaling.
//!
//! Stage word lengths come from [`FxpProfile`]: `gram` for `G`, `mf` for
//! `x_mf`, `sinv` for every entry of `S⁻¹` (including the intermediate
//! diagonal product), `prod` for the multiplier outputs and adder trees,
//! `xhat` for each estimate.

use super::stair::{on_stair, stair_support};
use crate::cxmat::{ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};
use crate::fxp::{
    fx_add, fx_mul, quantize_matrix, quantize_vector, FxComplex, FxMatrix, FxScalar, FxpProfile,
    QFormat, ReciprocalUnit,
};
use crate::scalar::Cx;

/// Quantized stair inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FxStairInverse {
    pub diag: Vec<FxScalar>,
    /// `(row, col, value)` on the stair support.
    pub off: Vec<(usize, usize, FxComplex)>,
}

impl FxStairInverse {
    pub fn to_float(&self) -> ComplexMatrix<f64> {
        let u = self.diag.len();
        let mut m = ComplexMatrix::zeros(u, u);
        for (i, d) in self.diag.iter().enumerate() {
            m[(i, i)] = Cx::new(d.value(), 0.0);
        }
        for &(r, c, v) in &self.off {
            m[(r, c)] = v.value();
        }
        m
    }

    /// `S⁻¹·v`: products and sums in `prod`, result rounded into `out`.
    pub fn apply(&self, v: &[FxComplex], prod: QFormat, out: QFormat) -> Vec<FxComplex> {
        let mut acc: Vec<FxComplex> = self
            .diag
            .iter()
            .zip(v)
            .map(|(&d, &x)| x.scale(d, prod))
            .collect();
        for &(r, c, s) in &self.off {
            acc[r] = fx_add(acc[r], fx_mul(s, v[c], prod), prod);
        }
        acc.into_iter().map(|z| z.requantize(out)).collect()
    }
}

#[derive(Debug, Clone)]
pub struct FixedStairDetector {
    profile: FxpProfile,
    recip: ReciprocalUnit,
}

impl FixedStairDetector {
    pub fn new(profile: FxpProfile) -> Result<Self> {
        Ok(Self {
            recip: profile.reciprocal_unit()?,
            profile,
        })
    }

    pub fn profile(&self) -> &FxpProfile {
        &self.profile
    }

    /// Power-of-two normalisation putting the mean Gramian diagonal in `[1, 2)`.
    pub fn input_scale(g: &ComplexMatrix<f64>) -> f64 {
        let u = g.rows().max(1);
        let mean = (0..g.rows()).map(|i| g[(i, i)].re).sum::<f64>() / u as f64;
        if mean > 0.0 && mean.is_finite() {
            (-mean.log2().floor()).exp2()
        } else {
            1.0
        }
    }

    /// Stair inverse of a quantized Gramian: Newton–Raphson reciprocals on
    /// the diagonal, then two multiplies per off-diagonal.
    pub fn invert(&self, gq: &FxMatrix) -> Result<FxStairInverse> {
        let sinv = self.profile.sinv;
        let diag = (0..gq.rows())
            .map(|i| {
                self.recip
                    .reciprocal(gq.get(i, i).real_part(), sinv)
                    .map_err(|_| Error::ZeroDiagonal { index: i })
            })
            .collect::<Result<Vec<_>>>()?;
        let off = stair_support(gq.rows())
            .into_iter()
            .map(|(r, c)| {
                let dd = diag[r].mul(diag[c], sinv);
                (r, c, -gq.get(r, c).scale(dd, sinv))
            })
            .collect();
        Ok(FxStairInverse { diag, off })
    }

    /// Runs `t` stair iterations on quantized inputs and returns the
    /// estimate as floating-point values of the `xhat` words.
    pub fn detect(
        &self,
        g: &ComplexMatrix<f64>,
        xmf: &ComplexVector<f64>,
        t: usize,
    ) -> Result<ComplexVector<f64>> {
        super::check_system(g, xmf)?;
        let p = &self.profile;
        let scale = Self::input_scale(g);
        let mut gs = g.clone();
        for i in 0..g.rows() {
            for j in 0..g.cols() {
                gs[(i, j)] = g[(i, j)] * scale;
            }
        }
        let gq = quantize_matrix(&gs, p.gram);
        let xmfq = quantize_vector(&xmf.scale(scale), p.mf);
        Ok(crate::fxp::vector_value(&self.iterate(&gq, &xmfq, t)?))
    }

    /// The datapath proper, on already-quantized `G` and `x_mf`.
    pub fn iterate(&self, gq: &FxMatrix, xmfq: &[FxComplex], t: usize) -> Result<Vec<FxComplex>> {
        let p = &self.profile;
        let u = gq.rows();
        if gq.cols() != u || xmfq.len() != u {
            return Err(Error::Dimension(format!(
                "fixed stair detector: G is {}x{}, x_mf has length {}",
                gq.rows(),
                gq.cols(),
                xmfq.len()
            )));
        }
        let sinv = self.invert(gq)?;
        // S - G: negated Gramian words off the stair support.
        let residual: Vec<Vec<(usize, FxComplex)>> = (0..u)
            .map(|i| {
                (0..u)
                    .filter(|&j| !on_stair(i, j))
                    .map(|j| (j, -gq.get(i, j)))
                    .collect()
            })
            .collect();

        let mut x = sinv.apply(xmfq, p.prod, p.xhat);
        for _ in 0..t {
            let v: Vec<FxComplex> = residual
                .iter()
                .zip(xmfq)
                .map(|(row, &mf)| {
                    row.iter().fold(mf.requantize(p.prod), |acc, &(j, r)| {
                        fx_add(acc, fx_mul(r, x[j], p.prod), p.prod)
                    })
                })
                .collect();
            x = sinv.apply(&v, p.prod, p.xhat);
        }
        Ok(x)
    }
}
