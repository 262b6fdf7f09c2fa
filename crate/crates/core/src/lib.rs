//! Triangular arbitrage detection over currency exchange networks.
//!
//! Three detectors share one set of domain types:
//!
//! * [`lp`]: the arbitrage linear program solved by a dense two-phase simplex,
//!   with a brute-force vertex enumeration oracle for small instances.
//! * [`cycle`]: Bellman-Ford negative-cycle detection on `-ln(rate)` weights,
//!   plus exhaustive cycle enumeration and single-cycle circulation profits.
//! * [`gnn`]: a message-passing network trained on a penalised profit
//!   objective, with a feasibility repair step so its plans are executable.
//!
//! [`bench`] runs any of them over a dataset produced by [`exchange`] and
//! reports mean yield and per-network wall time.
//!
//! With the default `parallel` feature, batch work (dataset generation,
//! benchmark sweeps, gradient accumulation) runs on rayon. Without it every
//! [`par::Execution`] falls back to a sequential loop. Results are identical
//! either way.

pub mod bench;
pub mod cycle;
pub mod error;
pub mod exchange;
pub mod format;
pub mod gnn;
pub mod lp;
pub mod par;

pub use error::{Error, Result};
pub use exchange::{ExchangeNetwork, GeneratorConfig, NetworkDataset};
pub use lp::{InvestmentMode, TradePlan};

/// Numerical tolerances shared by every module.
pub mod tol {
    /// Smallest pivot magnitude the simplex will divide by.
    pub const PIVOT: f64 = 1e-10;
    /// Absolute slack allowed on constraint rows and bounds.
    pub const FEASIBILITY: f64 = 1e-9;
    /// Reduced-cost threshold for declaring optimality.
    pub const OPTIMALITY: f64 = 1e-9;
    /// Summed log-weight below which a cycle counts as an arbitrage.
    pub const NEGATIVE_CYCLE: f64 = -1e-12;
}
