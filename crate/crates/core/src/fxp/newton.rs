//! Newton–Raphson reciprocal unit.
//!
//! The operand is shifted into `[1/2, 1)`, a seed is read from a small
//! table indexed by the bits below the leading one, and the iteration
//! `r <- 2r - m*r^2` is run in fixed precision before shifting back.

use super::{rescale, round_shift_right, FxScalar, QFormat};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReciprocalUnit {
    bits: u32,
    lut_bits: u32,
    iters: u32,
    lut: Vec<u64>,
}

impl ReciprocalUnit {
    /// `bits`: datapath width. The normalized operand is an unsigned
    /// `bits`-bit fraction; the reciprocal estimate carries `bits - 2`
    /// fraction bits so that values up to 2 fit.
    pub fn new(bits: u32, lut_bits: u32, iters: u32) -> Result<Self> {
        if !(8..=30).contains(&bits) || lut_bits == 0 || lut_bits + 2 > bits {
            return Err(Error::InvalidArgument(format!(
                "reciprocal unit: need 8 <= bits <= 30 and 1 <= lut_bits <= bits-2, got {bits}/{lut_bits}"
            )));
        }
        let rf = bits - 2;
        // Reciprocal of each interval midpoint, rounded to nearest:
        // midpoint = (2^(L+1) + 2i + 1) / 2^(L+2).
        let lut = (0..1u64 << lut_bits)
            .map(|i| {
                let den = (1u64 << (lut_bits + 1)) + 2 * i + 1;
                let num = 1u64 << (lut_bits + 2 + rf);
                (2 * num + den) / (2 * den)
            })
            .collect();
        Ok(Self {
            bits,
            lut_bits,
            iters,
            lut,
        })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn iterations(&self) -> u32 {
        self.iters
    }

    pub fn lut(&self) -> &[u64] {
        &self.lut
    }

    /// Fraction bits of the normalized reciprocal.
    pub fn recip_frac_bits(&self) -> u32 {
        self.bits - 2
    }

    /// Table seed for a normalized operand.
    pub fn seed(&self, m_raw: u64) -> u64 {
        let idx = (m_raw >> (self.bits - 1 - self.lut_bits)) & ((1 << self.lut_bits) - 1);
        self.lut[idx as usize]
    }

    /// Reciprocal of `m = m_raw / 2^bits`, `m` in `[1/2, 1)`. The result has
    /// [`recip_frac_bits`](Self::recip_frac_bits) fraction bits.
    pub fn reciprocal_normalized(&self, m_raw: u64) -> u64 {
        debug_assert!(m_raw >> (self.bits - 1) == 1, "operand not normalized");
        let rf = self.recip_frac_bits();
        let mut r = self.seed(m_raw);
        for _ in 0..self.iters {
            let sq = round_shift_right((r as i128) * (r as i128), rf);
            let p = round_shift_right((m_raw as i128) * sq, self.bits);
            r = (2 * r as i128 - p) as u64;
        }
        r
    }

    /// Splits a positive raw value with `frac` fraction bits into a
    /// normalized mantissa and the exponent `e` with `x = m * 2^e`.
    fn normalize(&self, raw: u64, frac: u32) -> (u64, i32) {
        let n = 64 - raw.leading_zeros();
        let mut e = n as i32 - frac as i32;
        let m = if n <= self.bits {
            raw << (self.bits - n)
        } else {
            round_shift_right(raw as i128, n - self.bits) as u64
        };
        if m >> self.bits != 0 {
            // Rounded up to 1.0.
            e += 1;
            (m >> 1, e)
        } else {
            (m, e)
        }
    }

    /// `1/x` for a positive fixed-point `x`, delivered in `out`.
    pub fn reciprocal(&self, x: FxScalar, out: QFormat) -> Result<FxScalar> {
        if x.raw <= 0 {
            return Err(Error::Domain(x.value()));
        }
        let (m, e) = self.normalize(x.raw as u64, x.fmt.frac_bits());
        let r = self.reciprocal_normalized(m);
        // 1/x = r * 2^-rf * 2^-e
        let from_frac = self.recip_frac_bits() as i32 + e;
        Ok(FxScalar {
            raw: rescale(r as i128, from_frac, out),
            fmt: out,
        })
    }
}

impl Default for ReciprocalUnit {
    fn default() -> Self {
        Self::new(18, 6, 2).expect("default reciprocal unit")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const OUT: QFormat = QFormat::q(18, 15);

    #[test]
    fn powers_of_two() {
        let unit = ReciprocalUnit::default();
        let one = FxScalar::quantize(1.0, QFormat::q(13, 9));
        let r = unit.reciprocal(one, OUT).unwrap();
        assert!((r.value() - 1.0).abs() <= 2f64.powi(-14));

        let half = FxScalar::quantize(0.5, QFormat::q(13, 9));
        let r = unit.reciprocal(half, OUT).unwrap();
        assert!((r.value() - 2.0).abs() <= 2f64.powi(-13));
    }

    #[test]
    fn rejects_non_positive() {
        let unit = ReciprocalUnit::default();
        let f = QFormat::q(13, 9);
        assert!(matches!(
            unit.reciprocal(FxScalar::quantize(0.0, f), OUT),
            Err(Error::Domain(_))
        ));
        assert!(unit.reciprocal(FxScalar::quantize(-1.0, f), OUT).is_err());
    }

    #[test]
    fn seed_satisfies_convergence_condition() {
        let unit = ReciprocalUnit::default();
        let rf = unit.recip_frac_bits();
        for m in (1u64 << 17)..(1u64 << 18) {
            // 0 < x0 < 2/m  <=>  0 < x0*m < 2
            let x0 = unit.seed(m) as u128;
            let prod = x0 * m as u128;
            assert!(prod > 0 && prod < 2u128 << (18 + rf));
        }
    }

    #[test]
    fn seed_error_is_below_two_to_minus_seven() {
        let unit = ReciprocalUnit::default();
        let rf = unit.recip_frac_bits() as i32;
        for m in ((1u64 << 17)..(1u64 << 18)).step_by(7) {
            let x0 = unit.seed(m) as f64 * 2f64.powi(-rf);
            let mv = m as f64 * 2f64.powi(-18);
            assert!((x0 * mv - 1.0).abs() <= 2f64.powi(-7), "m={mv}");
        }
    }

    #[test]
    fn general_operands() {
        let unit = ReciprocalUnit::default();
        let f = QFormat::q(13, 9);
        let out = QFormat::q(17, 14);
        for &x in &[0.75, 1.3, 2.2, 3.99, 0.3, 7.5] {
            let r = unit.reciprocal(FxScalar::quantize(x, f), out).unwrap();
            let xq = FxScalar::quantize(x, f).value();
            assert!((r.value() - 1.0 / xq).abs() <= out.resolution(), "x={x}");
        }
    }

    #[test]
    fn wide_operand_rounds_into_datapath() {
        let unit = ReciprocalUnit::default();
        // 30 significant bits, all ones: rounds up to the next power of two.
        let f = QFormat::q(32, 20);
        let x = FxScalar::from_raw((1 << 30) - 1, f);
        let r = unit.reciprocal(x, QFormat::q(24, 22)).unwrap();
        assert!((r.value() - 1.0 / 1024.0).abs() < 2f64.powi(-20));
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(ReciprocalUnit::new(6, 2, 2).is_err());
        assert!(ReciprocalUnit::new(18, 17, 2).is_err());
        assert!(ReciprocalUnit::new(18, 0, 2).is_err());
    }
}
