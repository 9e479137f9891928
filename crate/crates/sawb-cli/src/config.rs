//! Run configuration: defaults, config-file parsing, flag overrides.

use sawb_core::dataset::Manifest;
use sawb_core::simulate::NoiseSigmas;
use sawb_core::spectral::{K_HEADING, K_HEIGHT_PERIOD};
use sawb_core::vessel::VesselParams;
use sawb_core::{Error, Result};
use std::path::Path;

/// Environment variable holding the default worker count.
pub const PARALLELISM_ENV: &str = "SAWB_PARALLELISM";

/// Campaign size that reproduces the full published run.
pub const DEFAULT_CAMPAIGN_N: usize = 48_000;

/// Resolved run configuration.
///
/// Defaults reproduce the published campaign: 48000 scenarios, the standard
/// vessel, sensor noise on. A plain-text `key=value` config file can adjust
/// any field; command-line flags override the file.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub n: usize,
    pub seed: u64,
    pub parallelism: usize,
    pub noise: bool,
    pub csv: bool,
    pub vessel: VesselParams,
    pub k_height_period: usize,
    pub k_heading: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n: DEFAULT_CAMPAIGN_N,
            seed: 1,
            parallelism: default_parallelism(),
            noise: true,
            csv: false,
            vessel: VesselParams::default(),
            k_height_period: K_HEIGHT_PERIOD,
            k_heading: K_HEADING,
        }
    }
}

fn default_parallelism() -> usize {
    if let Ok(v) = std::env::var(PARALLELISM_ENV) {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                return n;
            }
        }
    }
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl RunConfig {
    /// Applies a config file on top of the defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut config = RunConfig::default();
        config.apply_file(path)?;
        Ok(config)
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let manifest = Manifest::load(path)?;
        for (key, value) in manifest.entries() {
            self.apply_entry(key, value)
                .map_err(|e| Error::domain(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }

    fn apply_entry(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || Error::domain(format!("invalid value '{value}' for key '{key}'"));
        match key {
            "n" => self.n = value.parse().map_err(|_| bad())?,
            "seed" => self.seed = value.parse().map_err(|_| bad())?,
            "parallelism" => self.parallelism = value.parse().map_err(|_| bad())?,
            "noise" => self.noise = parse_bool(value).ok_or_else(bad)?,
            "csv" => self.csv = parse_bool(value).ok_or_else(bad)?,
            "k_height_period" => self.k_height_period = value.parse().map_err(|_| bad())?,
            "k_heading" => self.k_heading = value.parse().map_err(|_| bad())?,
            "vessel.length" => self.vessel.length = value.parse().map_err(|_| bad())?,
            "vessel.breadth" => self.vessel.breadth = value.parse().map_err(|_| bad())?,
            "vessel.draught" => self.vessel.draught = value.parse().map_err(|_| bad())?,
            "vessel.c_wp" => self.vessel.c_wp = value.parse().map_err(|_| bad())?,
            "vessel.c_b" => self.vessel.c_b = value.parse().map_err(|_| bad())?,
            "vessel.displacement" => self.vessel.displacement = value.parse().map_err(|_| bad())?,
            "vessel.gm_t" => self.vessel.gm_t = value.parse().map_err(|_| bad())?,
            other => return Err(Error::domain(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Validates cross-field constraints.
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain("campaign size must be at least 1"));
        }
        if self.parallelism == 0 {
            return Err(Error::domain("parallelism must be at least 1"));
        }
        if self.k_height_period != K_HEIGHT_PERIOD || self.k_heading != K_HEADING {
            return Err(Error::domain(format!(
                "this build extracts K = {K_HEIGHT_PERIOD} and {K_HEADING} ordinates; \
                 other values ({}, {}) are not supported",
                self.k_height_period, self.k_heading
            )));
        }
        Ok(())
    }

    pub fn noise_sigmas(&self) -> NoiseSigmas {
        if self.noise {
            NoiseSigmas::imu()
        } else {
            NoiseSigmas::zero()
        }
    }
}

fn parse_bool(value: &str) -> Option<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "on" | "1" | "yes" => Some(true),
        "false" | "off" | "0" | "no" => Some(false),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_reproduce_campaign_settings() {
        let c = RunConfig::default();
        assert_eq!(c.n, 48_000);
        assert!(c.noise);
        assert_eq!(c.vessel, VesselParams::default());
        assert!(c.validate().is_ok());
    }

    #[test]
    fn config_file_overrides_defaults() {
        let dir = std::env::temp_dir().join("sawb_config_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        std::fs::write(&path, "n=500\nseed=9\nnoise=off\nvessel.length=3.0\n").unwrap();
        let c = RunConfig::from_file(&path).unwrap();
        assert_eq!(c.n, 500);
        assert_eq!(c.seed, 9);
        assert!(!c.noise);
        assert_eq!(c.vessel.length, 3.0);
        assert_eq!(c.noise_sigmas(), NoiseSigmas::zero());
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn unknown_keys_and_bad_values_are_usage_errors() {
        let dir = std::env::temp_dir().join("sawb_config_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.conf");
        std::fs::write(&path, "bogus=1\n").unwrap();
        assert!(RunConfig::from_file(&path).is_err());
        std::fs::write(&path, "n=not_a_number\n").unwrap();
        assert!(RunConfig::from_file(&path).is_err());
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn nonstandard_k_values_are_rejected() {
        let mut c = RunConfig::default();
        c.k_heading = 40;
        assert!(c.validate().is_err());
    }
}
