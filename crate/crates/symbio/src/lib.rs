//! Rate analysis and receive-beamforming design for a symbiotic radio
//! system: a multi-antenna primary receiver serving one direct link while a
//! set of backscatter devices (BDs) ride on the same carrier with much
//! longer symbols.
//!
//! The crate provides:
//! - channel sampling for the direct, forward and backscatter links
//!   ([`channel`]);
//! - the expected primary rate (Monte Carlo and semi-closed form) and the
//!   BD sum rate under MMSE-SIC ([`rates`]);
//! - three beamformer designs — direct-link MRC, correlation-matrix
//!   eigenvector, and a semidefinite-relaxation search ([`beamforming`]);
//! - a small dense SDP solver used by the relaxation ([`sdp`]);
//! - massive-BD asymptotics and experiment drivers behind the `symbio`
//!   command-line tool ([`experiments`]).
//!
//! # Example
//!
//! Sample one channel, design a beamformer and evaluate the primary rate:
//!
//! ```
//! use symbio::beamforming::{design, BeamformerMethod};
//! use symbio::channel::{sample_channels, SystemParams};
//! use symbio::rates::primary_rate_mc;
//!
//! let params = SystemParams::defaults_with(4);
//! let real = sample_channels(&params, 42)?;
//! let bf = design(BeamformerMethod::CorrelationEig, &real, &params, 0)?;
//! let rate = primary_rate_mc(&bf.wd, &real, &params, 10_000, 7)?;
//! assert!(rate.mean > 0.0);
//! # Ok::<(), symbio::Error>(())
//! ```

pub mod beamforming;
pub mod channel;
pub mod config;
mod error;
pub mod experiments;
pub mod numerics;
pub mod rates;
pub mod sdp;
pub mod test_util;

pub use error::{Error, Result};

// The guide's code samples and the README example run as doc-tests so
// they cannot drift out of sync with the library.
#[cfg(doctest)]
mod guide_doctests {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/system-model.md")]
    mod system_model {}
    #[doc = include_str!("../../../book/src/rates.md")]
    mod rates {}
    #[doc = include_str!("../../../book/src/beamforming.md")]
    mod beamforming {}
    #[doc = include_str!("../../../book/src/sdp-solver.md")]
    mod sdp_solver {}
    #[doc = include_str!("../../../book/src/configuration.md")]
    mod configuration {}
}
