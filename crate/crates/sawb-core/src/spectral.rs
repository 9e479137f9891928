//! Welch PSD estimation, total power, and top-energy feature extraction.
//!
//! Response series are transformed with per-DOF windowing policies: 15
//! Hann-windowed segments at 50% overlap for heave and roll, 13 segments at
//! a finer frequency resolution for pitch. The highest-energy ordinates and
//! their frequencies, the total power, and the vessel speed form the
//! fixed-order feature vector consumed by the estimators.

use crate::simulate::SIM_SAMPLES;
use crate::vessel::Dof;
use crate::{Error, Result};
use rustfft::{num_complex::Complex, FftPlanner};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

/// Number of top PSD ordinates for wave height and period estimators.
pub const K_HEIGHT_PERIOD: usize = 30;

/// Number of top PSD ordinates for heading estimators.
pub const K_HEADING: usize = 80;

/// Segmenting policy for Welch's method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WelchPolicy {
    pub segment_len: usize,
    pub hop: usize,
}

impl WelchPolicy {
    /// Policy for one DOF over the 8192-sample simulation record.
    ///
    /// Heave and roll use 1024-sample segments with 50% overlap (15
    /// segments). Pitch uses 2048-sample segments with hop 512 (13 segments,
    /// 75% overlap in samples; an exact 80% overlap is unreachable with 13
    /// integer-sized windows over 8192 samples).
    pub fn for_dof(dof: Dof) -> Self {
        match dof {
            Dof::Heave | Dof::Roll => WelchPolicy {
                segment_len: 1024,
                hop: 512,
            },
            Dof::Pitch => WelchPolicy {
                segment_len: 2048,
                hop: 512,
            },
        }
    }

    pub fn segments(&self, series_len: usize) -> usize {
        if series_len < self.segment_len {
            0
        } else {
            (series_len - self.segment_len) / self.hop + 1
        }
    }

    pub fn overlap_fraction(&self) -> f64 {
        (self.segment_len - self.hop) as f64 / self.segment_len as f64
    }
}

/// One-sided power spectral density on an angular-frequency axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    freqs: Vec<f64>,
    ordinates: Vec<f64>,
    m0: f64,
}

impl Psd {
    /// Frequencies (rad/s), non-negative and increasing.
    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    /// PSD values (unit²·s/rad).
    pub fn ordinates(&self) -> &[f64] {
        &self.ordinates
    }

    /// Total power: rectangle-rule integral of the ordinates (unit²).
    pub fn m0(&self) -> f64 {
        self.m0
    }

    pub fn len(&self) -> usize {
        self.ordinates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ordinates.is_empty()
    }
}

fn hann(len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| 0.5 * (1.0 - (TAU * i as f64 / len as f64).cos()))
        .collect()
}

/// Welch PSD with an explicit policy. The series must hold a whole number of
/// hops: `(len − segment_len) % hop == 0`.
pub fn welch_with_policy(series: &[f64], dt: f64, policy: WelchPolicy) -> Result<Psd> {
    if !(dt > 0.0) {
        return Err(Error::domain(format!("dt must be positive, got {dt}")));
    }
    let len = series.len();
    if len < policy.segment_len || (len - policy.segment_len) % policy.hop != 0 {
        return Err(Error::domain(format!(
            "series length {len} does not tile into {}-sample segments with hop {}",
            policy.segment_len, policy.hop
        )));
    }
    let seg_len = policy.segment_len;
    let n_seg = policy.segments(len);
    let window = hann(seg_len);
    let window_power: f64 = window.iter().map(|w| w * w).sum();
    let fs = 1.0 / dt;

    let fft = FftPlanner::new().plan_fft_forward(seg_len);
    let bins = seg_len / 2 + 1;
    let mut acc = vec![0.0f64; bins];
    let mut buf = vec![Complex::new(0.0, 0.0); seg_len];
    for s in 0..n_seg {
        let start = s * policy.hop;
        let segment = &series[start..start + seg_len];
        // Mean removal per segment keeps sensor-noise offsets out of the DC
        // bin before windowing.
        let mean = segment.iter().sum::<f64>() / seg_len as f64;
        for (slot, (&x, w)) in buf.iter_mut().zip(segment.iter().zip(&window)) {
            *slot = Complex::new((x - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            *a += buf[k].norm_sqr();
        }
    }

    // One-sided density in unit²/Hz, then converted to unit²·s/rad.
    let scale = 1.0 / (fs * window_power * n_seg as f64);
    let mut ordinates = Vec::with_capacity(bins);
    for (k, &a) in acc.iter().enumerate() {
        let onesided = if k == 0 || k == seg_len / 2 { 1.0 } else { 2.0 };
        ordinates.push(a * scale * onesided / TAU);
    }
    let d_omega = TAU * fs / seg_len as f64;
    let freqs: Vec<f64> = (0..bins).map(|k| k as f64 * d_omega).collect();
    let m0 = ordinates.iter().map(|o| o * d_omega).sum();
    Ok(Psd {
        freqs,
        ordinates,
        m0,
    })
}

/// Welch PSD of a full simulation record with the DOF's windowing policy.
pub fn welch_psd(series: &[f64], dt: f64, dof: Dof) -> Result<Psd> {
    if series.len() != SIM_SAMPLES {
        return Err(Error::domain(format!(
            "expected a {SIM_SAMPLES}-sample record, got {}",
            series.len()
        )));
    }
    welch_with_policy(series, dt, WelchPolicy::for_dof(dof))
}

/// The `k` largest ordinates in descending order with their frequencies.
/// Ties break toward the lower frequency.
pub fn top_components(psd: &Psd, k: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if k == 0 || k > psd.len() {
        return Err(Error::domain(format!(
            "k must be in [1, {}], got {k}",
            psd.len()
        )));
    }
    let mut idx: Vec<usize> = (0..psd.len()).collect();
    idx.sort_by(|&a, &b| {
        psd.ordinates[b]
            .total_cmp(&psd.ordinates[a])
            .then(psd.freqs[a].total_cmp(&psd.freqs[b]))
    });
    idx.truncate(k);
    let ords = idx.iter().map(|&i| psd.ordinates[i]).collect();
    let freqs = idx.iter().map(|&i| psd.freqs[i]).collect();
    Ok((ords, freqs))
}

/// A set of vessel DOFs, iterated in the fixed heave, pitch, roll order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DofMask(u8);

impl DofMask {
    pub const HEAVE: DofMask = DofMask(1);
    pub const PITCH: DofMask = DofMask(2);
    pub const ROLL: DofMask = DofMask(4);
    pub const ALL: DofMask = DofMask(7);

    /// The seven non-empty combinations, single DOFs first.
    pub const COMBINATIONS: [DofMask; 7] = [
        DofMask(1),
        DofMask(2),
        DofMask(4),
        DofMask(3),
        DofMask(5),
        DofMask(6),
        DofMask(7),
    ];

    pub fn contains(self, dof: Dof) -> bool {
        self.0 & Self::bit(dof) != 0
    }

    pub fn is_subset_of(self, other: DofMask) -> bool {
        self.0 & other.0 == self.0
    }

    pub fn count(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn dofs(self) -> impl Iterator<Item = Dof> {
        Dof::ALL.into_iter().filter(move |&d| self.contains(d))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn from_bits(bits: u8) -> Result<Self> {
        if bits == 0 || bits > 7 {
            return Err(Error::domain(format!("invalid DOF mask bits {bits}")));
        }
        Ok(DofMask(bits))
    }

    fn bit(dof: Dof) -> u8 {
        match dof {
            Dof::Heave => 1,
            Dof::Pitch => 2,
            Dof::Roll => 4,
        }
    }

    /// Short name used in CLI cell identifiers and report rows.
    pub fn name(self) -> String {
        if self == Self::ALL {
            return "3dof".to_string();
        }
        self.dofs().map(Dof::name).collect::<Vec<_>>().join("+")
    }

    pub fn parse(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("3dof") {
            return Ok(Self::ALL);
        }
        let mut bits = 0u8;
        for part in s.split('+') {
            bits |= match part.trim().to_ascii_lowercase().as_str() {
                "heave" => 1,
                "pitch" => 2,
                "roll" => 4,
                other => {
                    return Err(Error::domain(format!("unknown DOF '{other}' in mask '{s}'")))
                }
            };
        }
        Self::from_bits(bits)
    }
}

/// Concatenation-ready feature bundle for one scenario.
///
/// Layout: for each DOF in the mask (heave, pitch, roll order) a block of
/// `k` ordinates (descending), `k` index-aligned frequencies, and the DOF's
/// total power; the shared vessel speed sits last. The ordering is part of
/// the model contract — estimators are trained against exactly this layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    mask: DofMask,
    k: usize,
    values: Vec<f64>,
}

impl FeatureVector {
    pub fn mask(&self) -> DofMask {
        self.mask
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Expected width for a mask and ordinate count.
    pub fn width(mask: DofMask, k: usize) -> usize {
        mask.count() * (2 * k + 1) + 1
    }

    fn block_len(&self) -> usize {
        2 * self.k + 1
    }

    /// Total power of one DOF, if the DOF is present.
    pub fn m0_of(&self, dof: Dof) -> Option<f64> {
        let pos = self.mask.dofs().position(|d| d == dof)?;
        Some(self.values[pos * self.block_len() + 2 * self.k])
    }

    pub fn speed(&self) -> f64 {
        *self.values.last().expect("feature vector is never empty")
    }

    /// Rebuilds from raw parts (used by dataset deserialization).
    pub fn from_parts(mask: DofMask, k: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != Self::width(mask, k) {
            return Err(Error::domain(format!(
                "feature width {} does not match mask {:?} with k {k}",
                values.len(),
                mask
            )));
        }
        Ok(FeatureVector { mask, k, values })
    }

    /// Extracts the feature vector of a sub-mask, preserving block order.
    pub fn select(&self, mask: DofMask) -> Result<FeatureVector> {
        if !mask.is_subset_of(self.mask) {
            return Err(Error::domain(format!(
                "mask {} is not contained in {}",
                mask.name(),
                self.mask.name()
            )));
        }
        let block = self.block_len();
        let mut values = Vec::with_capacity(Self::width(mask, self.k));
        for (pos, dof) in self.mask.dofs().enumerate() {
            if mask.contains(dof) {
                values.extend_from_slice(&self.values[pos * block..(pos + 1) * block]);
            }
        }
        values.push(self.speed());
        Ok(FeatureVector {
            mask,
            k: self.k,
            values,
        })
    }
}

/// Assembles the feature vector from per-DOF PSDs, vessel speed, a DOF mask,
/// and an ordinate count.
pub fn build_features(
    psds: &BTreeMap<Dof, Psd>,
    speed: f64,
    mask: DofMask,
    k: usize,
) -> Result<FeatureVector> {
    let mut values = Vec::with_capacity(FeatureVector::width(mask, k));
    for dof in mask.dofs() {
        let psd = psds
            .get(&dof)
            .ok_or_else(|| Error::domain(format!("missing {} PSD for feature mask", dof.name())))?;
        let (ords, freqs) = top_components(psd, k)?;
        values.extend_from_slice(&ords);
        values.extend_from_slice(&freqs);
        values.push(psd.m0());
    }
    values.push(speed);
    Ok(FeatureVector { mask, k, values })
}
