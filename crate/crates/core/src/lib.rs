//! Max-min fair resource allocation for STAR-RIS assisted cooperative rate
//! splitting (CRS) with user relaying.
//!
//! The crate is `no_std` (with `alloc`) by default-off features; the `std`
//! feature adds wall-clock timing and the `clarabel` feature provides the
//! interior-point back end used by the SCA optimizers.
//!
//! Module map:
//!
//! - [`model`]: system configuration, transmission modes, design points.
//! - [`channel`]: geometry, path loss and seeded fading realizations.
//! - [`rates`]: exact SINR / rate evaluation for every mode and baseline.
//! - [`feasibility`]: constraint residuals of a design point.
//! - [`conic`]: real conic programs and the solver contract.
//! - [`sca`]: surrogate bounds, passive/active SCA steps and the AO driver.
//! - [`fast`]: closed-form passive beamforming and the low-complexity optimizer.
//! - [`baselines`]: comparison schemes as constrained specializations.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod baselines;
pub mod channel;
pub mod conic;
pub mod fast;
pub mod feasibility;
pub mod linalg;
pub mod model;
pub mod rates;
pub mod record;
pub mod sca;

mod error;

pub use error::{Error, Result};
pub use model::{DesignPoint, Mode, SystemConfig};
