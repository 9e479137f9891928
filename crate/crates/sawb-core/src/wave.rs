//! Modified Pierson-Moskowitz spectra and uni-directional wave realizations.
//!
//! A sea state is parameterized by significant wave height `h_s` and mean
//! wave period `t_1`. The spectrum is discretized on a frequency grid,
//! component amplitudes follow `A = sqrt(2 S(w) dw)`, and phases are drawn
//! uniformly on `[0, 2pi)` from a seeded generator so realizations are
//! reproducible.

use crate::{Error, Result, GRAVITY};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// Ratio of zero-crossing period to mean wave period.
pub const T_Z_OVER_T_1: f64 = 0.9212;

/// Number of wave components in the campaign grid.
pub const GRID_COMPONENTS: usize = 500;

/// Campaign grid frequency bounds (rad/s).
pub const GRID_OMEGA_MIN: f64 = 0.05;
pub const GRID_OMEGA_MAX: f64 = 2.0;

/// Discretized wave frequency axis with per-component bin widths (rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    omegas: Vec<f64>,
    d_omega: Vec<f64>,
}

impl FrequencyGrid {
    /// Builds a grid from explicit frequencies and bin widths.
    pub fn new(omegas: Vec<f64>, d_omega: Vec<f64>) -> Result<Self> {
        if omegas.is_empty() {
            return Err(Error::domain("frequency grid must be non-empty"));
        }
        if omegas.len() != d_omega.len() {
            return Err(Error::domain("bin width count must match frequency count"));
        }
        if omegas[0] <= 0.0 {
            return Err(Error::domain("frequencies must be strictly positive"));
        }
        if omegas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::domain("frequencies must be strictly increasing"));
        }
        if d_omega.iter().any(|&d| d <= 0.0) {
            return Err(Error::domain("bin widths must be positive"));
        }
        Ok(FrequencyGrid { omegas, d_omega })
    }

    /// Uniformly spaced grid over `[lo, hi]` inclusive, rectangle-rule widths.
    pub fn uniform(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 || lo <= 0.0 || hi <= lo {
            return Err(Error::domain("uniform grid needs 0 < lo < hi and n >= 2"));
        }
        let h = (hi - lo) / (n - 1) as f64;
        let omegas: Vec<f64> = (0..n).map(|i| lo + i as f64 * h).collect();
        let d_omega = vec![h; n];
        Ok(FrequencyGrid { omegas, d_omega })
    }

    /// The 500-component campaign grid spanning 0.05 to 2.0 rad/s.
    pub fn campaign() -> Self {
        Self::uniform(GRID_OMEGA_MIN, GRID_OMEGA_MAX, GRID_COMPONENTS)
            .expect("campaign grid constants are valid")
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn d_omega(&self) -> &[f64] {
        &self.d_omega
    }
}

/// A Modified Pierson-Moskowitz spectrum discretized on a grid.
#[derive(Debug, Clone)]
pub struct WaveSpectrum {
    grid: FrequencyGrid,
    ordinates: Vec<f64>,
    h_s: f64,
    t_1: f64,
}

impl WaveSpectrum {
    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    /// Spectral density per component (m²·s/rad).
    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    pub fn h_s(&self) -> f64 {
        self.h_s
    }

    pub fn t_1(&self) -> f64 {
        self.t_1
    }

    /// Zeroth spectral moment by the grid's rectangle rule (m²).
    pub fn m0(&self) -> f64 {
        self.ordinates
            .iter()
            .zip(self.grid.d_omega())
            .map(|(s, d)| s * d)
            .sum()
    }
}

/// One realized wave field: amplitudes, random phases, and wavenumbers.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveRealization {
    grid: FrequencyGrid,
    amplitudes: Vec<f64>,
    phases: Vec<f64>,
    wavenumbers: Vec<f64>,
}

impl WaveRealization {
    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Scales every component amplitude by `c` (used by linearity tests).
    pub fn scale_amplitudes(&mut self, c: f64) {
        for a in &mut self.amplitudes {
            *a *= c;
        }
    }
}

/// Zero-crossing period from the mean wave period: `T_z = 0.9212 T_1`.
pub fn zero_crossing_period(t_1: f64) -> Result<f64> {
    if !(t_1 > 0.0) {
        return Err(Error::domain(format!(
            "mean wave period must be positive, got {t_1}"
        )));
    }
    Ok(T_Z_OVER_T_1 * t_1)
}

/// MPM spectrum coefficients for a sea state: `(A_pm, B_pm)`.
///
/// `A = H_s²/(4π)·(2π/T_z)⁴`, `B = (1/π)·(2π/T_z)⁴`.
pub fn mpm_coefficients(h_s: f64, t_1: f64) -> Result<(f64, f64)> {
    if !(h_s > 0.0) {
        return Err(Error::domain(format!(
            "significant wave height must be positive, got {h_s}"
        )));
    }
    let t_z = zero_crossing_period(t_1)?;
    let base = (TAU / t_z).powi(4);
    let a_pm = h_s * h_s / (4.0 * std::f64::consts::PI) * base;
    let b_pm = base / std::f64::consts::PI;
    Ok((a_pm, b_pm))
}

/// Evaluates the Modified Pierson-Moskowitz spectrum on a grid.
///
/// Ordinate at each frequency is `(A/ω⁵)·exp(−B/ω⁴)`.
pub fn mpm_spectrum(h_s: f64, t_1: f64, grid: FrequencyGrid) -> Result<WaveSpectrum> {
    let (a_pm, b_pm) = mpm_coefficients(h_s, t_1)?;
    let ordinates = grid
        .omegas()
        .iter()
        .map(|&w| a_pm / w.powi(5) * (-b_pm / w.powi(4)).exp())
        .collect();
    Ok(WaveSpectrum {
        grid,
        ordinates,
        h_s,
        t_1,
    })
}

/// Realizes a wave field from a spectrum with seeded random phases.
///
/// Amplitudes are `sqrt(2 S(ω) dω)`, phases i.i.d. uniform on `[0, 2π)`,
/// wavenumbers from the deep-water dispersion relation `k = ω²/g`.
pub fn realize_wave(spectrum: &WaveSpectrum, seed: u64) -> WaveRealization {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amplitudes = spectrum
        .ordinates()
        .iter()
        .zip(spectrum.grid().d_omega())
        .map(|(s, d)| (2.0 * s * d).sqrt())
        .collect();
    let phases = (0..spectrum.grid().len())
        .map(|_| rng.gen_range(0.0..TAU))
        .collect();
    let wavenumbers = spectrum
        .grid()
        .omegas()
        .iter()
        .map(|&w| w * w / GRAVITY)
        .collect();
    WaveRealization {
        grid: spectrum.grid().clone(),
        amplitudes,
        phases,
        wavenumbers,
    }
}

/// Wave elevation at position `x_w` (m) and time `t` (s).
///
/// `ζ(x, t) = Σ A·sin(k·x − ω·t + ε)` over all components.
pub fn wave_elevation(realization: &WaveRealization, x_w: f64, t: f64) -> f64 {
    realization
        .amplitudes()
        .iter()
        .zip(realization.wavenumbers())
        .zip(realization.grid().omegas())
        .zip(realization.phases())
        .map(|(((a, k), w), e)| a * (k * x_w - w * t + e).sin())
        .sum()
}
