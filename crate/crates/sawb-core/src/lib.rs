//! Sea state estimation using a small vessel as a wave buoy.
//!
//! The crate simulates a small USV's heave, pitch, and roll responses to
//! parametric seas, extracts spectral features from the response series, and
//! trains branch/trunk MLP regressors that recover significant wave height,
//! mean wave period, and relative wave heading from those features.
//!
//! Pipeline: [`wave`] builds Pierson-Moskowitz spectra and realizes wave
//! fields, [`vessel`] provides closed-form frequency response functions,
//! [`simulate`] synthesizes noisy response time series, [`spectral`] runs
//! Welch PSD estimation and feature extraction, [`neural`] trains the
//! estimators, and [`experiment`] orchestrates the dataset campaign,
//! cross-validation, and evaluation.

pub mod dataset;
pub mod experiment;
pub mod neural;
pub mod simulate;
pub mod spectral;
pub mod vessel;
pub mod wave;

/// Gravitational acceleration (m/s²).
pub const GRAVITY: f64 = 9.81;

/// Sea water density (kg/m³).
pub const RHO_SEA: f64 = 1025.0;

/// Errors produced by the simulation and estimation pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input violated an operation's domain (non-positive period,
    /// out-of-range heading, mismatched lengths, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Training produced a non-finite loss.
    #[error("training diverged at epoch {epoch}, batch {batch}: loss is not finite")]
    Diverged { epoch: usize, batch: usize },

    /// A file did not match the expected binary format.
    #[error("format error in {path}: {reason}")]
    Format { path: String, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Splitmix64-style mixer used to derive stage seeds from a base seed.
///
/// Every stochastic stage (wave phases, per-DOF sensor noise, batch
/// shuffling, per-cell training) derives its generator from a base seed and
/// fixed offsets through this function, so each stage can be reproduced in
/// isolation.
pub fn mix_seed(base: u64, offset: u64) -> u64 {
    let mut z = base ^ offset.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mix_seed_is_deterministic_and_spreads() {
        assert_eq!(mix_seed(7, 1), mix_seed(7, 1));
        assert_ne!(mix_seed(7, 1), mix_seed(7, 2));
        assert_ne!(mix_seed(7, 1), mix_seed(8, 1));
    }
}
