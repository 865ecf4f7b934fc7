//! Valuation of drawdown insurance contracts for spectrally negative Lévy models.
//!
//! * [`levy`]: Brownian motion with drift and the Cramér–Lundberg model, with `psi`, `psi'`, `Phi`.
//! * [`scale`]: closed-form scale functions `W`, `Z`, `W'`.
//! * [`exit`]: two-sided exits, drawdown exit laws and the drawup joint transform.
//! * [`drawdown`], [`drawup`]: contract values, fair premiums and optimal cancellation.
//! * [`mc`]: an independent Monte Carlo oracle.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod drawdown;
pub mod drawup;
pub mod error;
pub mod exit;
pub mod levy;
pub mod mc;
pub mod optimize;
pub mod quad;
pub mod scale;

pub use drawdown::{CancellableValue, DrawdownContract, DrawdownState, ThetaStar};
pub use drawup::{DrawupContract, DrawupState, Regime};
pub use error::{Error, Result};
pub use levy::LevyModel;
pub use scale::ScaleFn;
