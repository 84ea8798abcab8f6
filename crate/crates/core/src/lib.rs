//! Capacitive force sensing read through RFID backscatter phase.
//!
//! A compressible parallel-plate capacitor terminating the tag's antenna
//! line shifts the phase of the reflected carrier. This crate models that
//! chain end to end:
//!
//! - [`sensor`]: force → dielectric compression → capacitance curve
//! - [`transduction`]: capacitance → reflection coefficient and phase
//! - [`link`]: synthetic reader traces with channel hopping, per-channel
//!   offsets, 180° reporting artifacts, multipath and noise
//! - [`estimator`]: the reader-side pipeline that recovers force from
//!   per-channel differential phase
//! - [`design`]: sensor geometry/material exploration
//! - [`harness`]: scenario files, trace import, case studies and the
//!   functions behind the `tagforce` command-line tool
//!
//! Runnable walkthroughs for each capability live under `examples/`.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod design;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod link;
pub mod sensor;
pub mod transduction;

pub mod angle;

pub use error::{Error, Result};
