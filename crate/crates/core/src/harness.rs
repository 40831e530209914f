//! Monte-Carlo BER/SER simulation.
//!
//! Every trial draws its own generator from `(master_seed, snr_index,
//! trial_index)`, so results do not depend on worker count or scheduling,
//! and a longer run reproduces the trials of a shorter one exactly. Within
//! a trial all detectors see the same bits, channel and noise.

use crate::airlink::{
    demodulate_hard, draw_channel, modulate, noise_variance_for_snr, transmit, Constellation,
    SimRng,
};
use crate::cxmat::{gramian, matched_filter, ComplexMatrix, ComplexVector};
use crate::detectors::{
    detect_float, Algorithm, CostBreakdown, DetectorConfig, FixedStairDetector, NumericMode,
};
use crate::error::{Error, Result};
use rayon::prelude::*;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub bs_antennas: usize,
    pub users: usize,
    pub modulation: usize,
    pub detectors: Vec<DetectorConfig>,
    pub snr_db: Vec<f64>,
    pub trials: u64,
    pub master_seed: u64,
    pub workers: usize,
}

impl SimConfig {
    /// 128 antennas, 8 users, 256-QAM, 8–20 dB in 2 dB steps, 2000 trials.
    pub fn reference(detectors: Vec<DetectorConfig>) -> Self {
        Self {
            bs_antennas: 128,
            users: 8,
            modulation: 256,
            detectors,
            snr_db: (0..7).map(|i| 8.0 + 2.0 * i as f64).collect(),
            trials: 2000,
            master_seed: 7,
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.users == 0 || self.bs_antennas < self.users {
            return Err(Error::InvalidArgument(format!(
                "need B >= U >= 1, got B={}, U={}",
                self.bs_antennas, self.users
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidArgument(
                "SNR list must be non-empty and finite".into(),
            ));
        }
        if self.detectors.is_empty() {
            return Err(Error::InvalidArgument("no detectors configured".into()));
        }
        Constellation::<f64>::new(self.modulation)?;
        for d in &self.detectors {
            d.validate()?;
        }
        Ok(())
    }
}

/// Error counts for one detector, additive across trials.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct ErrorCounts {
    pub bit_errors: u64,
    pub symbol_errors: u64,
    pub failures: u64,
}

impl ErrorCounts {
    fn add(self, o: ErrorCounts) -> ErrorCounts {
        ErrorCounts {
            bit_errors: self.bit_errors + o.bit_errors,
            symbol_errors: self.symbol_errors + o.symbol_errors,
            failures: self.failures + o.failures,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialOutcome {
    /// Hash of the transmitted bits, channel and received vector.
    pub realization_checksum: u64,
    pub per_detector: Vec<ErrorCounts>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub trials: u64,
    pub bit_errors: u64,
    pub bits_total: u64,
    pub symbol_errors: u64,
    pub symbols_total: u64,
    pub failures: u64,
}

impl BerPoint {
    pub fn ber(&self) -> f64 {
        self.bit_errors as f64 / self.bits_total as f64
    }

    pub fn ser(&self) -> f64 {
        self.symbol_errors as f64 / self.symbols_total as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub label: String,
    pub points: Vec<BerPoint>,
}

impl BerCurve {
    /// Index of the first point whose BER is below `threshold`.
    pub fn first_below(&self, threshold: f64) -> Option<usize> {
        self.points.iter().position(|p| p.ber() < threshold)
    }

    /// SNR at which the curve crosses `target`, interpolating linearly in
    /// `log10(BER)` between the bracketing points.
    pub fn snr_at_ber(&self, target: f64) -> Option<f64> {
        self.points.windows(2).find_map(|w| {
            let (a, b) = (&w[0], &w[1]);
            let (ya, yb) = (a.ber(), b.ber());
            if ya >= target && yb < target && yb > 0.0 {
                let (la, lb, lt) = (ya.log10(), yb.log10(), target.log10());
                Some(a.snr_db + (b.snr_db - a.snr_db) * (la - lt) / (la - lb))
            } else {
                None
            }
        })
    }
}

/// A configured simulation, with per-run state (constellation, fixed-point
/// units) built once.
#[derive(Debug)]
pub struct Simulator {
    cfg: SimConfig,
    constellation: Constellation<f64>,
    runners: Vec<Runner>,
    needs_zf: bool,
}

#[derive(Debug)]
enum Runner {
    Float(DetectorConfig),
    Fixed(FixedStairDetector, usize),
}

impl Simulator {
    pub fn new(mut cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let omega = DetectorConfig::default_omega(cfg.bs_antennas, cfg.users);
        for d in &mut cfg.detectors {
            if d.algorithm == Algorithm::Richardson && d.richardson_omega.is_none() {
                d.richardson_omega = Some(omega);
            }
        }
        let runners = cfg
            .detectors
            .iter()
            .map(|d| match d.numeric_mode {
                NumericMode::Float64 => Ok(Runner::Float(d.clone())),
                NumericMode::Fixed(p) => {
                    Ok(Runner::Fixed(FixedStairDetector::new(p)?, d.iterations))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let needs_zf = cfg.detectors.iter().any(|d| d.algorithm.uses_zf_gramian());
        Ok(Self {
            constellation: Constellation::new(cfg.modulation)?,
            cfg,
            runners,
            needs_zf,
        })
    }

    /// Configuration with defaults (e.g. the Richardson relaxation) resolved.
    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn labels(&self) -> Vec<String> {
        self.cfg
            .detectors
            .iter()
            .map(DetectorConfig::label)
            .collect()
    }

    pub fn run_trial(&self, snr_index: usize, trial_index: u64) -> Result<TrialOutcome> {
        let cfg = &self.cfg;
        let snr_db = *cfg
            .snr_db
            .get(snr_index)
            .ok_or_else(|| Error::InvalidArgument(format!("SNR index {snr_index}")))?;
        let (u, k) = (cfg.users, self.constellation.bits_per_symbol());
        let mut rng = SimRng::for_trial(cfg.master_seed, snr_index, trial_index);

        let bits = rng.bits(u * k);
        let x = modulate(&bits, &self.constellation, u)?;
        let h: ComplexMatrix<f64> = draw_channel(cfg.bs_antennas, u, &mut rng)?;
        let sigma2 = noise_variance_for_snr(snr_db, u);
        let y = transmit(&x, &h, sigma2, &mut rng)?;

        let g_mmse = gramian(&h, sigma2)?;
        let g_zf = if self.needs_zf {
            Some(gramian(&h, 0.0)?)
        } else {
            None
        };
        let xmf = matched_filter(&h, &y)?;

        let per_detector = self
            .runners
            .iter()
            .zip(&cfg.detectors)
            .map(|(runner, d)| {
                let g = match (&g_zf, d.algorithm.uses_zf_gramian()) {
                    (Some(gz), true) => gz,
                    _ => &g_mmse,
                };
                let xhat = match runner {
                    Runner::Float(c) => detect_float(c, g, &xmf, &mut CostBreakdown::default()),
                    Runner::Fixed(det, t) => det.detect(g, &xmf, *t),
                };
                match xhat {
                    Ok(xhat) if xhat.is_finite() => count_errors(&xhat, &bits, &self.constellation),
                    _ => ErrorCounts {
                        bit_errors: (u * k) as u64,
                        symbol_errors: u as u64,
                        failures: 1,
                    },
                }
            })
            .collect();

        Ok(TrialOutcome {
            realization_checksum: checksum(&bits, &h, &y),
            per_detector,
        })
    }

    /// Summed counts over trials `0..trials` at one SNR index.
    pub fn run_point(&self, snr_index: usize, trials: u64) -> Result<Vec<ErrorCounts>> {
        let zero = vec![ErrorCounts::default(); self.runners.len()];
        let sum = |a: Vec<ErrorCounts>, b: Vec<ErrorCounts>| {
            a.into_iter()
                .zip(b)
                .map(|(x, y)| x.add(y))
                .collect::<Vec<_>>()
        };
        (0..trials)
            .into_par_iter()
            .map(|t| self.run_trial(snr_index, t).map(|o| o.per_detector))
            .try_reduce(|| zero.clone(), |a, b| Ok(sum(a, b)))
    }

    pub fn run_sweep(&self) -> Result<Vec<BerCurve>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.cfg.workers.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("worker pool: {e}")))?;
        let per_snr = pool.install(|| {
            (0..self.cfg.snr_db.len())
                .map(|s| self.run_point(s, self.cfg.trials))
                .collect::<Result<Vec<_>>>()
        })?;
        let (u, k) = (
            self.cfg.users as u64,
            self.constellation.bits_per_symbol() as u64,
        );
        let trials = self.cfg.trials;
        Ok(self
            .labels()
            .into_iter()
            .enumerate()
            .map(|(d, label)| BerCurve {
                label,
                points: per_snr
                    .iter()
                    .zip(&self.cfg.snr_db)
                    .map(|(counts, &snr_db)| BerPoint {
                        snr_db,
                        trials,
                        bit_errors: counts[d].bit_errors,
                        bits_total: trials * u * k,
                        symbol_errors: counts[d].symbol_errors,
                        symbols_total: trials * u,
                        failures: counts[d].failures,
                    })
                    .collect(),
            })
            .collect())
    }
}

/// Convenience wrapper around [`Simulator`].
pub fn run_sweep(cfg: SimConfig) -> Result<Vec<BerCurve>> {
    Simulator::new(cfg)?.run_sweep()
}

fn count_errors(xhat: &ComplexVector<f64>, bits: &[u8], c: &Constellation<f64>) -> ErrorCounts {
    let decided = demodulate_hard(xhat, c);
    let k = c.bits_per_symbol();
    let mut counts = ErrorCounts::default();
    for (got, want) in decided.chunks_exact(k).zip(bits.chunks_exact(k)) {
        let wrong = got.iter().zip(want).filter(|(a, b)| a != b).count() as u64;
        counts.bit_errors += wrong;
        counts.symbol_errors += u64::from(wrong > 0);
    }
    counts
}

/// FNV-1a over the bits, channel and received samples.
fn checksum(bits: &[u8], h: &ComplexMatrix<f64>, y: &ComplexVector<f64>) -> u64 {
    const PRIME: u64 = 0x0000_0100_0000_01B3;
    let mut state = 0xCBF2_9CE4_8422_2325u64;
    let mut feed = |v: u64| {
        for byte in v.to_le_bytes() {
            state = (state ^ byte as u64).wrapping_mul(PRIME);
        }
    };
    bits.iter().for_each(|&b| feed(b as u64));
    for z in h.as_slice().iter().chain(y.iter()) {
        feed(z.re.to_bits());
        feed(z.im.to_bits());
    }
    state
}

pub const BER_CSV_HEADER: &str =
    "detector,snr_db,trials,bit_errors,bits_total,ber,symbol_errors,symbols_total,ser,failures";

/// One row per (detector, SNR), detectors in configuration order.
pub fn curves_to_csv(curves: &[BerCurve]) -> String {
    let mut out = String::from(BER_CSV_HEADER);
    out.push('\n');
    for c in curves {
        for p in &c.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                c.label,
                p.snr_db,
                p.trials,
                p.bit_errors,
                p.bits_total,
                p.ber(),
                p.symbol_errors,
                p.symbols_total,
                p.ser(),
                p.failures
            );
        }
    }
    out
}

/// Human-readable BER table, one column per detector.
pub fn curves_to_table(curves: &[BerCurve]) -> String {
    let mut out = format!("{:>8}", "snr_db");
    for c in curves {
        let _ = write!(out, " {:>12}", c.label);
    }
    out.push('\n');
    let n = curves.first().map_or(0, |c| c.points.len());
    for i in 0..n {
        let _ = write!(out, "{:>8}", curves[0].points[i].snr_db);
        for c in curves {
            let _ = write!(out, " {:>12.4e}", c.points[i].ber());
        }
        out.push('\n');
    }
    let failed: Vec<_> = curves
        .iter()
        .map(|c| {
            (
                c.label.as_str(),
                c.points.iter().map(|p| p.failures).sum::<u64>(),
            )
        })
        .filter(|&(_, f)| f > 0)
        .collect();
    for (label, f) in failed {
        let _ = writeln!(out, "{label}: {f} trial(s) failed numerically");
    }
    out
}
