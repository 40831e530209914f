//! Analytical cost model: closed-form real-multiplication counts, counts
//! instrumented from actual detector runs, and the cycle/throughput model
//! of the time-shared stair detector architecture.

use crate::airlink::{draw_channel, SimRng};
use crate::cxmat::{gramian, ComplexVector};
use crate::detectors::{detect_float, Algorithm, CostBreakdown, DetectorConfig};
use crate::error::{Error, Result};
use std::fmt::Write as _;

/// Closed-form real-multiplication count for `k` iterations on `u` users.
/// Only the four approximate-inversion detectors have one.
pub fn formula_mults(algorithm: Algorithm, u: u64, k: u64) -> Result<u64> {
    if u == 0 || k == 0 {
        return Err(Error::InvalidArgument(format!(
            "complexity needs U >= 1 and K >= 1, got U={u}, K={k}"
        )));
    }
    match algorithm {
        Algorithm::Cg => Ok((k + 1) * (4 * u * u + 20 * u)),
        Algorithm::Nsa => Ok((k - 1) * (2 * u * u * u + 2 * u * u - 2 * u)),
        Algorithm::Gs => Ok(6 * k * u * u),
        Algorithm::Stair => Ok(k * (4 * u * u - 2 * u)),
        other => Err(Error::NoFormula(other.name().to_string())),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport {
    pub algorithm: Algorithm,
    pub users: usize,
    pub iterations: usize,
    pub formula_mults: Option<u64>,
    pub instrumented_mults: Option<u64>,
    pub divisions: Option<u64>,
    pub breakdown: Option<CostBreakdown>,
    pub throughput_bps: Option<f64>,
}

impl ComplexityReport {
    pub fn formula_only(algorithm: Algorithm, users: usize, iterations: usize) -> Result<Self> {
        Ok(Self {
            algorithm,
            users,
            iterations,
            formula_mults: Some(formula_mults(algorithm, users as u64, iterations as u64)?),
            instrumented_mults: None,
            divisions: None,
            breakdown: None,
            throughput_bps: None,
        })
    }
}

/// Runs the detector on a seeded `16U x U` Rayleigh instance with counting
/// enabled. Counts depend only on the dimensions, not on the values.
pub fn instrument(algorithm: Algorithm, u: usize, k: usize, seed: u64) -> Result<ComplexityReport> {
    if u == 0 {
        return Err(Error::InvalidArgument(
            "instrumentation needs U >= 1".into(),
        ));
    }
    let b = 16 * u;
    let mut rng = SimRng::new(seed);
    let h = draw_channel::<f64>(b, u, &mut rng)?;
    let sigma2 = if algorithm.uses_zf_gramian() {
        0.0
    } else {
        1.0
    };
    let g = gramian(&h, sigma2)?;
    let xmf = ComplexVector::from_vec((0..u).map(|_| rng.complex_gaussian(b as f64)).collect());
    let cfg = DetectorConfig::new(algorithm, k).with_omega(DetectorConfig::default_omega(b, u));
    let mut cost = CostBreakdown::default();
    detect_float(&cfg, &g, &xmf, &mut cost)?;
    let total = cost.total();
    let exact = !algorithm.is_iterative();
    Ok(ComplexityReport {
        algorithm,
        users: u,
        iterations: k,
        formula_mults: formula_mults(algorithm, u as u64, k as u64).ok(),
        // The exact solver is not instrumented.
        instrumented_mults: (!exact).then(|| total.real_multiplications()),
        divisions: (!exact).then_some(total.divisions),
        breakdown: (!exact).then_some(cost),
        throughput_bps: None,
    })
}

/// Cycle model of the time-shared stair detector:
/// `total(t) = load + overhead + per_iteration·t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimingModel {
    pub clock_hz: f64,
    /// Cycles to fill the `S - G` memory (one entry per cycle).
    pub load_cycles: u64,
    pub per_iteration_cycles: u64,
    pub overhead_cycles: u64,
    pub users: usize,
    pub bits_per_symbol: usize,
}

impl Default for TimingModel {
    /// 8 users, 256-QAM at 258 MHz: 64 load cycles, 25 per iteration and
    /// 2 cycles of pipeline overhead.
    fn default() -> Self {
        Self {
            clock_hz: 258e6,
            load_cycles: 64,
            per_iteration_cycles: 25,
            overhead_cycles: 2,
            users: 8,
            bits_per_symbol: 8,
        }
    }
}

impl TimingModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.clock_hz > 0.0 && self.clock_hz.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "clock must be positive, got {} Hz",
                self.clock_hz
            )));
        }
        if self.users == 0 || self.bits_per_symbol == 0 {
            return Err(Error::InvalidArgument(
                "users and bits per symbol must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn total_cycles(&self, t: u64) -> u64 {
        self.load_cycles + self.overhead_cycles + self.per_iteration_cycles * t
    }

    /// Detected bits per second: one symbol vector per `total_cycles(t)`.
    pub fn throughput_bps(&self, t: u64) -> Result<f64> {
        self.validate()?;
        if t == 0 {
            return Err(Error::InvalidArgument("throughput needs t >= 1".into()));
        }
        let cycles = self.total_cycles(t);
        if cycles == 0 {
            return Err(Error::InvalidArgument(
                "cycle model yields zero cycles".into(),
            ));
        }
        Ok((self.users * self.bits_per_symbol) as f64 * self.clock_hz / cycles as f64)
    }
}

pub const REPORT_CSV_HEADER: &str =
    "algorithm,U,K,formula_mults,instrumented_mults,divisions,throughput_bps";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn render_csv(reports: &[ComplexityReport]) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.algorithm,
            r.users,
            r.iterations,
            opt(r.formula_mults),
            opt(r.instrumented_mults),
            opt(r.divisions),
            opt(r.throughput_bps)
        );
    }
    out
}

pub fn render_text(reports: &[ComplexityReport]) -> String {
    let mut out = format!(
        "{:<11} {:>3} {:>3} {:>14} {:>18} {:>9} {:>16}\n",
        "algorithm",
        "U",
        "K",
        "formula_mults",
        "instrumented_mults",
        "divisions",
        "throughput_Mbps"
    );
    for r in reports {
        let _ = writeln!(
            out,
            "{:<11} {:>3} {:>3} {:>14} {:>18} {:>9} {:>16}",
            r.algorithm.name(),
            r.users,
            r.iterations,
            opt(r.formula_mults),
            opt(r.instrumented_mults),
            opt(r.divisions),
            r.throughput_bps
                .map(|t| format!("{:.2}", t / 1e6))
                .unwrap_or_default()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_formulas() {
        assert_eq!(formula_mults(Algorithm::Stair, 8, 2).unwrap(), 480);
        assert_eq!(formula_mults(Algorithm::Gs, 8, 2).unwrap(), 768);
        assert_eq!(formula_mults(Algorithm::Nsa, 8, 3).unwrap(), 2272);
        assert_eq!(formula_mults(Algorithm::Cg, 8, 2).unwrap(), 1248);
        assert_eq!(formula_mults(Algorithm::Nsa, 8, 1).unwrap(), 0);
        assert!(matches!(
            formula_mults(Algorithm::Richardson, 8, 2),
            Err(Error::NoFormula(_))
        ));
        assert!(formula_mults(Algorithm::Stair, 0, 2).is_err());
    }

    #[test]
    fn table_orderings() {
        for u in [4u64, 8, 16] {
            for k in 3..8 {
                let s = formula_mults(Algorithm::Stair, u, k).unwrap();
                let g = formula_mults(Algorithm::Gs, u, k).unwrap();
                let n = formula_mults(Algorithm::Nsa, u, k).unwrap();
                assert!(s < g && g < n, "U={u} K={k}");
            }
        }
    }

    #[test]
    fn stair_instrumentation() {
        let r = instrument(Algorithm::Stair, 8, 2, 1).unwrap();
        let b = r.breakdown.unwrap();
        assert_eq!(r.divisions, Some(8));
        // the iteration phase is exactly the closed form
        assert_eq!(b.iterations.real_multiplications(), 480);
        // stair inverse: one real and one complex-by-real multiply per off-diagonal
        assert_eq!(b.setup.real_multiplications(), 3 * 7);
        // initial estimate S⁻¹·x_mf
        assert_eq!(b.init.real_multiplications(), 2 * 8 + 4 * 7);
        assert_eq!(r.instrumented_mults, Some(545));
    }

    #[test]
    fn counts_are_structural() {
        for a in [
            Algorithm::Stair,
            Algorithm::Gs,
            Algorithm::Nsa,
            Algorithm::Richardson,
            Algorithm::Cg,
        ] {
            let x = instrument(a, 6, 3, 1).unwrap();
            let y = instrument(a, 6, 3, 99).unwrap();
            assert_eq!(x.instrumented_mults, y.instrumented_mults, "{a}");
            assert_eq!(x.divisions, y.divisions, "{a}");
        }
    }

    #[test]
    fn throughput_cases() {
        let tm = TimingModel::default();
        assert_eq!(tm.total_cycles(2), 116);
        let t = tm.throughput_bps(2).unwrap();
        assert!((t / 1e6 - 142.34).abs() < 0.01);
        assert!((tm.throughput_bps(1).unwrap() / 1e6 - 181.45).abs() < 0.01);

        let unit = TimingModel {
            clock_hz: 116.0,
            ..tm
        };
        assert!((unit.throughput_bps(2).unwrap() - 64.0).abs() < 1e-12);

        let doubled = TimingModel {
            clock_hz: 2.0 * tm.clock_hz,
            ..tm
        };
        assert!((doubled.throughput_bps(2).unwrap() - 2.0 * t).abs() < 1e-6);

        let dead = TimingModel {
            clock_hz: 0.0,
            ..tm
        };
        assert!(dead.throughput_bps(2).is_err());
        assert!(tm.throughput_bps(0).is_err());
    }

    #[test]
    fn csv_rendering() {
        let r = ComplexityReport::formula_only(Algorithm::Stair, 8, 2).unwrap();
        assert_eq!(
            render_csv(&[r]),
            format!("{REPORT_CSV_HEADER}\nstair,8,2,480,,,\n")
        );
    }
}
