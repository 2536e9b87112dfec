//! Solvers for a price formation free boundary problem between buyers and vendors.
//!
//! The price `p(t)` separating buyers (`f > 0`) from vendors (`f < 0`) is
//! computed two independent ways:
//!
//! * [`transform`] + [`heatflow`] + [`pricepath`]: the density is mapped to a
//!   heat-equation solution `F` whose zero level set is the price. `F` is
//!   evaluated in closed form at any `(x, t)`, so no time marching is needed.
//! * [`refsolver`]: a finite-difference solver of the original problem with
//!   moving point sources.
//!
//! [`asymptotics`] gives the long-time laws both methods are checked against.
//!
//! The crate is `no_std` and needs only `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod asymptotics;
pub mod datum;
pub mod heatflow;
pub mod pricepath;
pub mod refsolver;
pub mod transform;

pub use asymptotics::{
    fit_sqrt_coefficient, kernel_tail, sqrt_drift_coefficient, zero_mass_limit, AsymptoticError, AsymptoticLaw,
    SqrtFit,
};
pub use datum::{Datum, DatumError, MassPair, Preset, MASS_BALANCE_TOLERANCE};
pub use heatflow::{heat_kernel, segment_integrals, HeatError, HeatField};
pub use pricepath::{
    certify_single_crossing, find_price, find_price_near, lambda_at, trajectory, trajectory_cold, Method,
    PriceError, PricePoint, PriceTrajectory, SearchOptions,
};
pub use refsolver::{FdError, FdGrid, FdRun, FdSolver, FdState, Scheme, Snapshot};
pub use transform::{reconstruct_density, TransformedField};
