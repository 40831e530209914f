//! Stair-matrix iterative detection for massive-MIMO uplinks.
//!
//! - [`cxmat`]: dense complex linear algebra and the exact Cholesky solve.
//! - [`airlink`]: Gray-mapped QAM, Rayleigh channel, AWGN, seeded RNG.
//! - [`detectors`]: exact MMSE/ZF, Neumann series, Gauss–Seidel, CG,
//!   Richardson and the stair-matrix detector (float and fixed point).
//! - [`fxp`]: bit-exact Q-format emulation and the Newton–Raphson reciprocal.
//! - [`hwmodel`]: multiplication counts and the cycle/throughput model.
//! - [`harness`]: Monte-Carlo BER/SER sweeps.
//! - [`cli`]: the `stairmimo` command line.
//!
//! The floating-point numerics are generic over [`Real`] (`f32`/`f64`);
//! the aliases below fix the double-precision types the simulator uses.

pub mod airlink;
pub mod cli;
pub mod cxmat;
pub mod detectors;
mod error;
pub mod fxp;
pub mod harness;
pub mod hwmodel;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

pub type CMatrix = cxmat::ComplexMatrix<f64>;
pub type CVector = cxmat::ComplexVector<f64>;
pub type CMatrix32 = cxmat::ComplexMatrix<f32>;
pub type CVector32 = cxmat::ComplexVector<f32>;
pub type Constellation = airlink::Constellation<f64>;
pub type StairMatrix = detectors::StairMatrix<f64>;
pub type StairInverse = detectors::StairInverse<f64>;
