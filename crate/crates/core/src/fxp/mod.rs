//! Bit-exact emulation of two's-complement fixed-point datapaths.
//!
//! Values are carried as raw integers together with their [`QFormat`].
//! Every conversion into a format rounds the fraction half away from zero
//! and wraps the integer part modulo `2^W`; there is no saturation.

mod newton;

pub use newton::ReciprocalUnit;

use crate::cxmat::{ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};
use crate::scalar::Cx;
use std::fmt;
use std::ops::Neg;
use std::str::FromStr;

/// Signed Q-format: `total_bits` including sign, `frac_bits` of fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QFormat {
    total_bits: u32,
    frac_bits: u32,
}

impl QFormat {
    pub fn new(total_bits: u32, frac_bits: u32) -> Result<Self> {
        if !(2..=32).contains(&total_bits) || frac_bits >= total_bits {
            return Err(Error::InvalidArgument(format!(
                "Q({total_bits},{frac_bits}): need 2 <= W <= 32 and 0 <= F < W"
            )));
        }
        Ok(Self {
            total_bits,
            frac_bits,
        })
    }

    /// Panicking constructor for compile-time-known formats.
    pub const fn q(total_bits: u32, frac_bits: u32) -> Self {
        assert!(total_bits >= 2 && total_bits <= 32 && frac_bits < total_bits);
        Self {
            total_bits,
            frac_bits,
        }
    }

    pub fn total_bits(self) -> u32 {
        self.total_bits
    }

    pub fn frac_bits(self) -> u32 {
        self.frac_bits
    }

    pub fn resolution(self) -> f64 {
        (-(self.frac_bits as f64)).exp2()
    }

    pub fn min_raw(self) -> i64 {
        -(1i64 << (self.total_bits - 1))
    }

    pub fn max_raw(self) -> i64 {
        (1i64 << (self.total_bits - 1)) - 1
    }

    pub fn min_value(self) -> f64 {
        self.min_raw() as f64 * self.resolution()
    }

    pub fn max_value(self) -> f64 {
        self.max_raw() as f64 * self.resolution()
    }

    /// Two's-complement reduction of an integer into `W` bits.
    #[inline]
    pub fn wrap(self, v: i128) -> i64 {
        let w = self.total_bits;
        let m = 1i128 << w;
        let r = v.rem_euclid(m);
        (if r >= m >> 1 { r - m } else { r }) as i64
    }
}

impl fmt::Display for QFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.total_bits, self.frac_bits)
    }
}

impl FromStr for QFormat {
    type Err = Error;

    /// Parses `W.F`, e.g. `13.9`.
    fn from_str(s: &str) -> Result<Self> {
        let (w, f) = s
            .trim()
            .split_once('.')
            .ok_or_else(|| Error::InvalidArgument(format!("Q-format '{s}' is not W.F")))?;
        let parse = |t: &str| {
            t.parse::<u32>()
                .map_err(|_| Error::InvalidArgument(format!("Q-format '{s}' is not W.F")))
        };
        QFormat::new(parse(w)?, parse(f)?)
    }
}

/// Arithmetic shift right by `k` with round-half-away-from-zero.
#[inline]
pub fn round_shift_right(v: i128, k: u32) -> i128 {
    if k == 0 {
        return v;
    }
    if k >= 127 {
        return 0;
    }
    let half = 1i128 << (k - 1);
    if v >= 0 {
        (v + half) >> k
    } else {
        -((-v + half) >> k)
    }
}

/// Moves a raw value from `from_frac` fraction bits into `fmt`
/// (rounding, then wrapping). `from_frac` may be negative.
pub fn rescale(v: i128, from_frac: i32, fmt: QFormat) -> i64 {
    let to = fmt.frac_bits as i32;
    if from_frac >= to {
        fmt.wrap(round_shift_right(v, (from_frac - to) as u32))
    } else {
        let up = (to - from_frac) as u32;
        if up >= fmt.total_bits {
            0
        } else {
            // Bits above W vanish under the wrap anyway.
            let keep = v.rem_euclid(1i128 << fmt.total_bits);
            fmt.wrap(keep << up)
        }
    }
}

/// Quantizes a real number: `wrap_W(round(x * 2^F))`.
pub fn quantize_raw(x: f64, fmt: QFormat) -> i64 {
    assert!(x.is_finite(), "quantize of non-finite value {x}");
    let scaled = x * fmt.resolution().recip();
    if scaled.is_finite() && scaled.abs() < 9.0e15 {
        fmt.wrap(scaled.round() as i128)
    } else {
        // |x * 2^F| >= 2^53 is already an integer; reduce by the wrap
        // period before scaling so nothing overflows.
        let period = ((fmt.total_bits - fmt.frac_bits) as f64).exp2();
        let r = x.rem_euclid(period) * fmt.resolution().recip();
        fmt.wrap(r.round() as i128)
    }
}

/// Real fixed-point scalar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FxScalar {
    pub raw: i64,
    pub fmt: QFormat,
}

impl FxScalar {
    pub fn from_raw(raw: i64, fmt: QFormat) -> Self {
        Self {
            raw: fmt.wrap(raw as i128),
            fmt,
        }
    }

    pub fn quantize(x: f64, fmt: QFormat) -> Self {
        Self {
            raw: quantize_raw(x, fmt),
            fmt,
        }
    }

    pub fn value(self) -> f64 {
        self.raw as f64 * self.fmt.resolution()
    }

    pub fn requantize(self, fmt: QFormat) -> Self {
        Self {
            raw: rescale(self.raw as i128, self.fmt.frac_bits as i32, fmt),
            fmt,
        }
    }

    pub fn mul(self, other: FxScalar, out: QFormat) -> Self {
        let p = self.raw as i128 * other.raw as i128;
        Self {
            raw: rescale(p, (self.fmt.frac_bits + other.fmt.frac_bits) as i32, out),
            fmt: out,
        }
    }
}

impl Neg for FxScalar {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_raw(-self.raw, self.fmt)
    }
}

/// Complex fixed-point scalar; both parts share one format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FxComplex {
    pub re: i64,
    pub im: i64,
    pub fmt: QFormat,
}

impl FxComplex {
    pub fn zero(fmt: QFormat) -> Self {
        Self { re: 0, im: 0, fmt }
    }

    pub fn from_raw(re: i64, im: i64, fmt: QFormat) -> Self {
        Self {
            re: fmt.wrap(re as i128),
            im: fmt.wrap(im as i128),
            fmt,
        }
    }

    pub fn quantize(z: Cx<f64>, fmt: QFormat) -> Self {
        Self {
            re: quantize_raw(z.re, fmt),
            im: quantize_raw(z.im, fmt),
            fmt,
        }
    }

    pub fn value(self) -> Cx<f64> {
        let r = self.fmt.resolution();
        Cx::new(self.re as f64 * r, self.im as f64 * r)
    }

    pub fn real_part(self) -> FxScalar {
        FxScalar {
            raw: self.re,
            fmt: self.fmt,
        }
    }

    pub fn requantize(self, fmt: QFormat) -> Self {
        let f = self.fmt.frac_bits as i32;
        Self {
            re: rescale(self.re as i128, f, fmt),
            im: rescale(self.im as i128, f, fmt),
            fmt,
        }
    }

    /// Multiplication by a real fixed-point scalar (two real multiplies).
    pub fn scale(self, s: FxScalar, out: QFormat) -> Self {
        let f = (self.fmt.frac_bits + s.fmt.frac_bits) as i32;
        Self {
            re: rescale(self.re as i128 * s.raw as i128, f, out),
            im: rescale(self.im as i128 * s.raw as i128, f, out),
            fmt: out,
        }
    }
}

impl Neg for FxComplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_raw(-self.re, -self.im, self.fmt)
    }
}

/// Complex multiply in the four-multiplier form. The exact product is
/// formed in a wide accumulator and rounded/wrapped once into `out`.
pub fn fx_mul(a: FxComplex, b: FxComplex, out: QFormat) -> FxComplex {
    let (ar, ai, br, bi) = (a.re as i128, a.im as i128, b.re as i128, b.im as i128);
    let f = (a.fmt.frac_bits + b.fmt.frac_bits) as i32;
    FxComplex {
        re: rescale(ar * br - ai * bi, f, out),
        im: rescale(ar * bi + ai * br, f, out),
        fmt: out,
    }
}

/// Adds two complex values after aligning both to `out`.
pub fn fx_add(a: FxComplex, b: FxComplex, out: QFormat) -> FxComplex {
    let a = a.requantize(out);
    let b = b.requantize(out);
    FxComplex {
        re: out.wrap(a.re as i128 + b.re as i128),
        im: out.wrap(a.im as i128 + b.im as i128),
        fmt: out,
    }
}

pub fn quantize_vector(v: &ComplexVector<f64>, fmt: QFormat) -> Vec<FxComplex> {
    v.iter().map(|&z| FxComplex::quantize(z, fmt)).collect()
}

/// Row-major fixed-point matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FxMatrix {
    rows: usize,
    cols: usize,
    data: Vec<FxComplex>,
}

impl FxMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> FxComplex {
        self.data[i * self.cols + j]
    }

    pub fn to_float(&self) -> ComplexMatrix<f64> {
        ComplexMatrix::from_row_major(
            self.rows,
            self.cols,
            self.data.iter().map(|z| z.value()).collect(),
        )
        .expect("shape preserved")
    }
}

pub fn quantize_matrix(m: &ComplexMatrix<f64>, fmt: QFormat) -> FxMatrix {
    FxMatrix {
        rows: m.rows(),
        cols: m.cols(),
        data: m
            .as_slice()
            .iter()
            .map(|&z| FxComplex::quantize(z, fmt))
            .collect(),
    }
}

pub fn vector_value(v: &[FxComplex]) -> ComplexVector<f64> {
    ComplexVector::from_vec(v.iter().map(|z| z.value()).collect())
}

/// Word lengths of the fixed-point stair detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FxpProfile {
    /// Gramian entries.
    pub gram: QFormat,
    /// Matched-filter output.
    pub mf: QFormat,
    /// Entries of the stair inverse.
    pub sinv: QFormat,
    /// Products and their sums inside the matrix-vector products.
    pub prod: QFormat,
    /// Symbol estimates.
    pub xhat: QFormat,
    /// Width of the Newton-Raphson reciprocal datapath.
    pub recip_bits: u32,
    /// Address width of the reciprocal seed table.
    pub lut_bits: u32,
    pub newton_iters: u32,
}

impl FxpProfile {
    /// Hardware profile: 13-bit Gramian input.
    pub const HARDWARE: FxpProfile = FxpProfile {
        gram: QFormat::q(13, 9),
        mf: QFormat::q(15, 10),
        sinv: QFormat::q(17, 14),
        prod: QFormat::q(20, 16),
        xhat: QFormat::q(12, 8),
        recip_bits: 18,
        lut_bits: 6,
        newton_iters: 2,
    };

    /// Word-length study profile: 12-bit Gramian.
    pub const SIMULATION: FxpProfile = FxpProfile {
        gram: QFormat::q(12, 8),
        ..Self::HARDWARE
    };

    /// Applies `key=value` overrides separated by commas or newlines.
    pub fn with_overrides(mut self, text: &str) -> Result<Self> {
        for item in text
            .split([',', '\n'])
            .map(str::trim)
            .filter(|s| !s.is_empty())
        {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("'{item}' is not key=value")))?;
            let bits = || {
                value.trim().parse::<u32>().map_err(|_| {
                    Error::InvalidArgument(format!("'{key}' expects an integer, got '{value}'"))
                })
            };
            match key.trim() {
                "gram" => self.gram = value.parse()?,
                "mf" => self.mf = value.parse()?,
                "sinv" => self.sinv = value.parse()?,
                "prod" => self.prod = value.parse()?,
                "xhat" => self.xhat = value.parse()?,
                "recip" => self.recip_bits = bits()?,
                "lut" => self.lut_bits = bits()?,
                "newton" => self.newton_iters = bits()?,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "unknown fixed-point key '{other}'"
                    )))
                }
            }
        }
        ReciprocalUnit::new(self.recip_bits, self.lut_bits, self.newton_iters)?;
        Ok(self)
    }

    pub fn reciprocal_unit(&self) -> Result<ReciprocalUnit> {
        ReciprocalUnit::new(self.recip_bits, self.lut_bits, self.newton_iters)
    }
}

impl Default for FxpProfile {
    fn default() -> Self {
        Self::HARDWARE
    }
}

impl fmt::Display for FxpProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "gram={},mf={},sinv={},prod={},xhat={},recip={},lut={},newton={}",
            self.gram,
            self.mf,
            self.sinv,
            self.prod,
            self.xhat,
            self.recip_bits,
            self.lut_bits,
            self.newton_iters
        )
    }
}

impl FromStr for FxpProfile {
    type Err = Error;

    /// Parses a full or partial `key=value` block on top of the defaults.
    fn from_str(s: &str) -> Result<Self> {
        FxpProfile::default().with_overrides(s)
    }
}
