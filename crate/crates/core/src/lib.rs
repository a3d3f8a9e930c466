//! Rate analysis and phase-shift optimization for an IRS-aided link with
//! transceiver and surface hardware impairments.

pub mod channels;
pub mod cli;
pub mod closed_form;
pub mod config;
pub mod df_relay;
pub mod error;
pub mod hwi;
pub mod monte_carlo;
pub mod optimizer;
pub mod robustness;
pub mod scenario;
pub mod sdp;

pub use error::{Error, Result};
