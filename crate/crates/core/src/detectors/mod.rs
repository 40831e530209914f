//! Linear massive-MIMO detectors.
//!
//! Every detector solves (exactly or approximately) `G·x = x_mf` where `G`
//! is the (regularised) Gramian and `x_mf = H^H·y`.
//!
//! | algorithm  | iteration count means                         |
//! |------------|-----------------------------------------------|
//! | stair      | updates after the `S⁻¹·x_mf` initial estimate |
//! | gs         | sweeps after the `D⁻¹·x_mf` initial estimate  |
//! | nsa        | series terms, including the zeroth            |
//! | cg         | CG steps from `x₀ = 0`                        |
//! | richardson | updates after `x₀ = ω·x_mf`                   |

mod iterative;
mod stair;
mod stair_fixed;
mod tally;

pub use iterative::{
    detect_cg, detect_cg_with_history, detect_exact, detect_gs, detect_nsa, detect_richardson,
};
pub use stair::{
    detect_stair, extract_stair, invert_stair, on_stair, stair_residual, stair_support, StairEntry,
    StairInverse, StairMatrix,
};
pub use stair_fixed::{FixedStairDetector, FxStairInverse};
pub use tally::{CostBreakdown, Tally};

use crate::cxmat::{ComplexMatrix, ComplexVector};
use crate::error::{Error, Result};
use crate::fxp::FxpProfile;
use crate::scalar::Real;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    MmseExact,
    ZfExact,
    Nsa,
    Gs,
    Cg,
    Richardson,
    Stair,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::MmseExact,
        Algorithm::ZfExact,
        Algorithm::Nsa,
        Algorithm::Gs,
        Algorithm::Cg,
        Algorithm::Richardson,
        Algorithm::Stair,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::MmseExact => "mmse",
            Algorithm::ZfExact => "zf",
            Algorithm::Nsa => "nsa",
            Algorithm::Gs => "gs",
            Algorithm::Cg => "cg",
            Algorithm::Richardson => "richardson",
            Algorithm::Stair => "stair",
        }
    }

    /// Zero-forcing works on `H^H·H`; everything else on the MMSE Gramian.
    pub fn uses_zf_gramian(self) -> bool {
        self == Algorithm::ZfExact
    }

    pub fn is_iterative(self) -> bool {
        !matches!(self, Algorithm::MmseExact | Algorithm::ZfExact)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mmse" => Ok(Algorithm::MmseExact),
            "zf" => Ok(Algorithm::ZfExact),
            "nsa" | "neumann" => Ok(Algorithm::Nsa),
            "gs" | "gauss-seidel" => Ok(Algorithm::Gs),
            "cg" => Ok(Algorithm::Cg),
            "richardson" | "ri" => Ok(Algorithm::Richardson),
            "stair" => Ok(Algorithm::Stair),
            other => Err(Error::InvalidArgument(format!(
                "unknown algorithm '{other}'"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NumericMode {
    #[default]
    Float64,
    Fixed(FxpProfile),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    pub algorithm: Algorithm,
    pub iterations: usize,
    pub numeric_mode: NumericMode,
    /// Richardson relaxation; required for [`Algorithm::Richardson`].
    pub richardson_omega: Option<f64>,
}

impl DetectorConfig {
    pub fn new(algorithm: Algorithm, iterations: usize) -> Self {
        Self {
            algorithm,
            iterations,
            numeric_mode: NumericMode::Float64,
            richardson_omega: None,
        }
    }

    pub fn fixed(mut self, profile: FxpProfile) -> Self {
        self.numeric_mode = NumericMode::Fixed(profile);
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.richardson_omega = Some(omega);
        self
    }

    /// `2 / (λ_min + λ_max)` for the Marchenko–Pastur edges of an i.i.d.
    /// `B x U` Gramian, which is `1 / (B + U)`.
    pub fn default_omega(b: usize, u: usize) -> f64 {
        1.0 / (b + u) as f64
    }

    pub fn validate(&self) -> Result<()> {
        if matches!(self.numeric_mode, NumericMode::Fixed(_)) && self.algorithm != Algorithm::Stair
        {
            return Err(Error::InvalidArgument(format!(
                "fixed-point mode is only available for the stair detector, not {}",
                self.algorithm
            )));
        }
        if matches!(
            self.algorithm,
            Algorithm::Nsa | Algorithm::Cg | Algorithm::Gs
        ) && self.iterations == 0
        {
            return Err(Error::InvalidArgument(format!(
                "{} needs at least one iteration",
                self.algorithm
            )));
        }
        if let Some(w) = self.richardson_omega {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "Richardson relaxation must be positive, got {w}"
                )));
            }
        }
        Ok(())
    }

    /// Short name used in reports, e.g. `stair` or `stair-fxp`.
    pub fn label(&self) -> String {
        match self.numeric_mode {
            NumericMode::Float64 => self.algorithm.name().to_string(),
            NumericMode::Fixed(_) => format!("{}-fxp", self.algorithm.name()),
        }
    }
}

/// Runs one configured detector in double precision.
pub fn detect(
    cfg: &DetectorConfig,
    g: &ComplexMatrix<f64>,
    xmf: &ComplexVector<f64>,
) -> Result<ComplexVector<f64>> {
    cfg.validate()?;
    match cfg.numeric_mode {
        NumericMode::Fixed(profile) => {
            FixedStairDetector::new(profile)?.detect(g, xmf, cfg.iterations)
        }
        NumericMode::Float64 => detect_float(cfg, g, xmf, &mut CostBreakdown::default()),
    }
}

/// Float detectors for any scalar type, recording operation counts.
pub fn detect_float<T: Real>(
    cfg: &DetectorConfig,
    g: &ComplexMatrix<T>,
    xmf: &ComplexVector<T>,
    cost: &mut CostBreakdown,
) -> Result<ComplexVector<T>> {
    let k = cfg.iterations;
    match cfg.algorithm {
        Algorithm::MmseExact | Algorithm::ZfExact => detect_exact(g, xmf),
        Algorithm::Stair => stair::detect_stair_counted(g, xmf, k, cost),
        Algorithm::Gs => iterative::detect_gs_counted(g, xmf, k, cost),
        Algorithm::Nsa => iterative::detect_nsa_counted(g, xmf, k, cost),
        Algorithm::Cg => iterative::detect_cg_counted(g, xmf, k, cost).map(|(x, _)| x),
        Algorithm::Richardson => {
            let omega = cfg.richardson_omega.ok_or_else(|| {
                Error::InvalidArgument("Richardson detector needs a relaxation factor".into())
            })?;
            iterative::detect_richardson_counted(g, xmf, k, T::lit(omega), cost)
        }
    }
}

pub(crate) fn check_system<T: Real>(g: &ComplexMatrix<T>, xmf: &ComplexVector<T>) -> Result<()> {
    if !g.is_square() || g.rows() != xmf.len() || g.rows() == 0 {
        return Err(Error::Dimension(format!(
            "detector needs square G matching x_mf: G is {}x{}, x_mf has length {}",
            g.rows(),
            g.cols(),
            xmf.len()
        )));
    }
    Ok(())
}
