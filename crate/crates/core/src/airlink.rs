//! Uplink air interface: Gray-mapped square QAM, i.i.d. Rayleigh channels,
//! AWGN and the seeded random source that drives them.
//!
//! Randomness comes from [`SimRng`], a ChaCha8 stream whose 256-bit key is
//! expanded from a 64-bit seed with SplitMix64. Gaussian samples use the
//! Box–Muller transform evaluated with the `libm` port of musl's math
//! routines, so streams are reproducible bit-for-bit on every platform.

use crate::cxmat::{ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};
use crate::scalar::{norm_sqr, Cx, Real};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed from `master` and a path of stream
/// indices (e.g. `[snr_index, trial_index]`).
pub fn split_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(master), |s, &v| {
        mix64(s ^ mix64(v.wrapping_add(GOLDEN_GAMMA)))
    })
}

/// Seeded generator for every random draw in the simulator.
#[derive(Debug, Clone)]
pub struct SimRng {
    inner: ChaCha8Rng,
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = seed;
        for chunk in key.chunks_exact_mut(8) {
            state = state.wrapping_add(GOLDEN_GAMMA);
            chunk.copy_from_slice(&mix64(state).to_le_bytes());
        }
        Self {
            inner: ChaCha8Rng::from_seed(key),
        }
    }

    /// Generator for one Monte-Carlo trial.
    pub fn for_trial(master: u64, snr_index: usize, trial_index: u64) -> Self {
        Self::new(split_seed(master, &[snr_index as u64, trial_index]))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`.
    #[inline]
    fn uniform_open_low(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Two independent standard normal samples (Box–Muller).
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = self.uniform_open_low();
        let u2 = self.uniform();
        let r = (-2.0 * libm::log(u1)).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        (r * libm::cos(theta), r * libm::sin(theta))
    }

    /// Circularly-symmetric complex Gaussian with `E|z|^2 = variance`.
    pub fn complex_gaussian(&mut self, variance: f64) -> Cx<f64> {
        let (a, b) = self.normal_pair();
        let s = (variance / 2.0).sqrt();
        Cx::new(a * s, b * s)
    }

    /// `n` uniform bits, consumed 64 at a time from the least significant end.
    pub fn bits(&mut self, n: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let word = self.next_u64();
            let take = (n - out.len()).min(64);
            out.extend((0..take).map(|k| ((word >> k) & 1) as u8));
        }
        out
    }
}

/// Square QAM constellation with per-axis Gray labelling and unit average
/// energy. The first half of a symbol's bit label selects the in-phase
/// level, the second half the quadrature level; label 0 on an axis is the
/// most positive level, so the all-zero label sits in the upper-right
/// corner.
#[derive(Debug, Clone)]
pub struct Constellation<T> {
    order: usize,
    bits_per_symbol: usize,
    levels_per_axis: usize,
    scale: T,
    /// Points indexed by the integer value of their bit label (MSB first).
    points: Vec<Cx<T>>,
}

impl<T: Real> Constellation<T> {
    pub fn new(order: usize) -> Result<Self> {
        if !matches!(order, 4 | 16 | 64 | 256) {
            return Err(Error::InvalidArgument(format!(
                "unsupported QAM order {order}; expected 4, 16, 64 or 256"
            )));
        }
        let bits_per_symbol = order.trailing_zeros() as usize;
        let levels = 1usize << (bits_per_symbol / 2);
        let scale = T::lit((3.0 / (2.0 * (order as f64 - 1.0))).sqrt());
        let mut c = Self {
            order,
            bits_per_symbol,
            levels_per_axis: levels,
            scale,
            points: Vec::new(),
        };
        let half = bits_per_symbol / 2;
        c.points = (0..order)
            .map(|label| {
                let gi = label >> half;
                let gq = label & (levels - 1);
                Cx::new(
                    c.level_value(gray_decode(gi)),
                    c.level_value(gray_decode(gq)),
                )
            })
            .collect();
        Ok(c)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Cx<T>] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Cx<T> {
        self.points[label]
    }

    /// Amplitude of the axis level with position `l` (0 = most positive).
    fn level_value(&self, l: usize) -> T {
        T::lit((self.levels_per_axis as f64) - 1.0 - 2.0 * l as f64) * self.scale
    }

    fn slice_axis(&self, v: T) -> usize {
        let top = T::lit(self.levels_per_axis as f64 - 1.0);
        let pos = ((top - v / self.scale) / T::lit(2.0)).round();
        let pos = pos.max(T::zero()).min(top);
        pos.to_usize().unwrap_or(0)
    }

    /// Label of the nearest constellation point.
    pub fn decide(&self, z: Cx<T>) -> usize {
        let half = self.bits_per_symbol / 2;
        let gi = gray_encode(self.slice_axis(z.re));
        let gq = gray_encode(self.slice_axis(z.im));
        (gi << half) | gq
    }

    /// Label of the nearest point by exhaustive search; reference for
    /// [`Constellation::decide`].
    pub fn decide_exhaustive(&self, z: Cx<T>) -> usize {
        let mut best = 0;
        let mut best_d = T::infinity();
        for (label, &p) in self.points.iter().enumerate() {
            let d = norm_sqr(z - p);
            if d < best_d {
                best_d = d;
                best = label;
            }
        }
        best
    }
}

#[inline]
fn gray_encode(l: usize) -> usize {
    l ^ (l >> 1)
}

#[inline]
fn gray_decode(mut g: usize) -> usize {
    let mut l = g;
    while g > 1 {
        g >>= 1;
        l ^= g;
    }
    l
}

/// Maps `users * bits_per_symbol` bits (MSB first per symbol) onto symbols.
pub fn modulate<T: Real>(
    bits: &[u8],
    c: &Constellation<T>,
    users: usize,
) -> Result<ComplexVector<T>> {
    let k = c.bits_per_symbol();
    if bits.len() != users * k {
        return Err(Error::Dimension(format!(
            "modulate: {} bits for {users} symbols of {k} bits",
            bits.len()
        )));
    }
    bits.chunks_exact(k)
        .map(|chunk| {
            chunk
                .iter()
                .try_fold(0usize, |acc, &b| match b {
                    0 | 1 => Ok((acc << 1) | b as usize),
                    other => Err(Error::InvalidArgument(format!("bit value {other}"))),
                })
                .map(|label| c.point(label))
        })
        .collect::<Result<Vec<_>>>()
        .map(ComplexVector::from_vec)
}

/// Hard nearest-point decisions, returned as bits (MSB first per symbol).
pub fn demodulate_hard<T: Real>(xhat: &ComplexVector<T>, c: &Constellation<T>) -> Vec<u8> {
    let k = c.bits_per_symbol();
    let mut out = Vec::with_capacity(xhat.len() * k);
    for &z in xhat.iter() {
        let label = c.decide(z);
        out.extend((0..k).rev().map(|s| ((label >> s) & 1) as u8));
    }
    out
}

/// `B x U` matrix of i.i.d. CN(0, 1) entries, drawn row-major.
pub fn draw_channel<T: Real>(b: usize, u: usize, rng: &mut SimRng) -> Result<ComplexMatrix<T>> {
    if u == 0 || b < u {
        return Err(Error::InvalidArgument(format!(
            "channel needs B >= U >= 1, got B={b}, U={u}"
        )));
    }
    let data = (0..b * u)
        .map(|_| {
            let z = rng.complex_gaussian(1.0);
            Cx::new(T::lit(z.re), T::lit(z.im))
        })
        .collect();
    ComplexMatrix::from_row_major(b, u, data)
}

/// Noise variance for a per-receive-antenna SNR of `snr_db`, assuming
/// unit-energy symbols and unit-variance channel taps: `U / 10^(snr/10)`.
pub fn noise_variance_for_snr(snr_db: f64, users: usize) -> f64 {
    users as f64 / 10f64.powf(snr_db / 10.0)
}

/// `y = H·x + n` with `n ~ CN(0, sigma2·I)`.
pub fn transmit<T: Real>(
    x: &ComplexVector<T>,
    h: &ComplexMatrix<T>,
    sigma2: f64,
    rng: &mut SimRng,
) -> Result<ComplexVector<T>> {
    let mut y = h.matvec(x)?;
    if sigma2 > 0.0 {
        for v in y.as_mut_slice() {
            let n = rng.complex_gaussian(sigma2);
            *v += Cx::new(T::lit(n.re), T::lit(n.im));
        }
    }
    Ok(y)
}
