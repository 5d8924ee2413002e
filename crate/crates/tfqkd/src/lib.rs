//! Finite-key secret key rates for the two-decoy twin-field QKD protocol.
//!
//! The pipeline for one channel-loss point:
//!
//! 1. [`channel`] simulates the sifting-step observables (`s_Z`, the four
//!    `s_AB^X` decoy-pair counts, the Z-basis error rate) from a linear
//!    channel-loss model.
//! 2. [`concentration`] turns each observed count into an interval on its
//!    expectation under a selectable fluctuation model (Hoeffding,
//!    multiplicative Chernoff, improved Chernoff, or Azuma for dependent
//!    events).
//! 3. [`decoy`] rescales the intervals into Poisson-mixture bounds and
//!    produces closed-form bounds on the low-order photon-pair yields.
//! 4. [`phase_error`] assembles the X-basis bit-error bound from the yields
//!    and lifts it to the phase error rate by random sampling without
//!    replacement.
//! 5. [`keyrate`] deducts error-correction leakage and the composable
//!    security terms and floors the result into a key length.
//!
//! [`fluctuation`] wraps the chain in a worst-case minimization over source
//! intensity candidates, and [`mc`] holds the Monte Carlo oracles that
//! falsify or confirm the coverage of every concentration bound and the
//! sandwich property of the decoy estimates.

pub mod channel;
pub mod concentration;
pub mod config;
pub mod decoy;
pub mod error;
pub mod fluctuation;
pub mod keyrate;
pub mod mc;
pub mod phase_error;

pub use channel::{bessel_i0, simulate_observables, Observables};
pub use concentration::{BoundModel, ExpectationInterval};
pub use config::{parse_config, AzumaTrialCount, ProtocolConfig, RunConfig};
pub use error::{Error, Result};
pub use fluctuation::{intensity_grid, worst_case_rate, IntensityCandidate, WorstCaseResult};
pub use keyrate::{
    binary_entropy, epsilon_budget, evaluate_point, key_length, optimize_point, plob_bound,
    KeyRateResult, OptimizerGrid, PointStatus, SecurityBudget, ZeroRateReason,
};
pub use mc::{bernoulli_coverage, decoy_sandwich_check, CoverageReport, SandwichReport};
