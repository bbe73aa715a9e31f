//! Simulation of RIS-assisted secure mm-Wave wiretap links.
//!
//! A multi-antenna transmitter (Alice) reaches a legitimate receiver (Bob) and
//! an eavesdropper (Eve) only through a passive reconfigurable intelligent
//! surface. The crate builds the line-of-sight channels, configures the
//! surface for Bob, evaluates the achievable secrecy rate per realization and
//! in expectation, and maps the region where Bob can be served securely.
//!
//! Module layout, bottom-up:
//!
//! - [`channel`]: steering vectors, path loss, noise power, cascade channels.
//! - [`reflection`]: surface phase profiles, MRT precoding, array gains.
//! - [`metrics`]: received SNRs and secrecy rates.
//! - [`bounds`]: Bessel `J0`, the `eta(N)` expectation and the ergodic bounds.
//! - [`simulation`]: seeded Monte Carlo estimates and parameter sweeps.
//! - [`secrecy_map`]: polar secrecy-rate grids and contour extraction.
//! - [`cli`]: configuration files, CSV output and run manifests.

pub mod bounds;
pub mod channel;
pub mod cli;
pub mod error;
pub mod metrics;
pub mod reflection;
pub mod secrecy_map;
pub mod simulation;

pub use error::{Error, Result};
