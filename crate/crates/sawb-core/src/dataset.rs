//! Dataset records, binary persistence, CSV export, and run manifests.
//!
//! A dataset row carries the generating scenario (which doubles as the
//! regression targets) and the full 3-DOF feature bundles at both ordinate
//! counts; estimator-specific sub-masks are sliced out at training time.
//! The binary format is versioned, little-endian, and record-aligned so
//! partial reads can stream. Manifests are plain `key=value` text capturing
//! everything needed to regenerate a dataset bit for bit.

use crate::neural::Target;
use crate::simulate::{Scenario, SeaState};
use crate::spectral::{DofMask, FeatureVector, K_HEADING, K_HEIGHT_PERIOD};
use crate::vessel::Dof;
use crate::{Error, Result};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

const DATASET_MAGIC: &[u8; 4] = b"SAWD";
const DATASET_VERSION: u32 = 1;

/// One simulated scenario with its extracted features.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRecord {
    pub scenario: Scenario,
    /// 3-DOF features with 30 ordinates per DOF (height/period estimators).
    pub features_k30: FeatureVector,
    /// 3-DOF features with 80 ordinates per DOF (heading estimators).
    pub features_k80: FeatureVector,
}

impl DatasetRecord {
    /// The regression target value for one wave property.
    pub fn target(&self, target: Target) -> f64 {
        match target {
            Target::WaveHeight => self.scenario.sea.h_s,
            Target::WavePeriod => self.scenario.sea.t_1,
            Target::WaveHeading => self.scenario.sea.mu_h_deg,
        }
    }

    /// The feature bundle matching a target's ordinate count.
    pub fn features_for(&self, target: Target) -> &FeatureVector {
        match target.k() {
            K_HEADING => &self.features_k80,
            _ => &self.features_k30,
        }
    }

    /// Total response power of one DOF (present in both bundles).
    pub fn m0_of(&self, dof: Dof) -> f64 {
        self.features_k30
            .m0_of(dof)
            .expect("dataset records carry all three DOFs")
    }
}

/// The generated campaign: records plus the manifest that regenerates them.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<DatasetRecord>,
    pub manifest: Manifest,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

/// Writes the records to a versioned binary file.
pub fn save_records(records: &[DatasetRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut w = BufWriter::new(file);
    let mut header = Vec::with_capacity(24);
    header.extend_from_slice(DATASET_MAGIC);
    header.extend_from_slice(&DATASET_VERSION.to_le_bytes());
    header.extend_from_slice(&(records.len() as u64).to_le_bytes());
    header.extend_from_slice(&(K_HEIGHT_PERIOD as u32).to_le_bytes());
    header.extend_from_slice(&(K_HEADING as u32).to_le_bytes());
    w.write_all(&header)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    for r in records {
        let mut buf = Vec::with_capacity(8 + 8 * (4 + r.features_k30.len() + r.features_k80.len()));
        buf.extend_from_slice(&r.scenario.seed.to_le_bytes());
        put_f64(&mut buf, r.scenario.sea.h_s);
        put_f64(&mut buf, r.scenario.sea.t_1);
        put_f64(&mut buf, r.scenario.sea.mu_h_deg);
        put_f64(&mut buf, r.scenario.speed);
        for &v in r.features_k30.values() {
            put_f64(&mut buf, v);
        }
        for &v in r.features_k80.values() {
            put_f64(&mut buf, v);
        }
        w.write_all(&buf)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
    }
    w.flush().map_err(|e| Error::io(path.display().to_string(), e))
}

/// Reads a binary dataset file written by [`save_records`].
pub fn load_records(path: &Path) -> Result<Vec<DatasetRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut r = BufReader::new(file);
    let fail = |reason: &str| Error::Format {
        path: path.display().to_string(),
        reason: reason.to_string(),
    };
    let mut header = [0u8; 24];
    r.read_exact(&mut header)
        .map_err(|_| fail("file too short for header"))?;
    if &header[0..4] != DATASET_MAGIC {
        return Err(fail("bad magic bytes, not a dataset file"));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != DATASET_VERSION {
        return Err(fail(&format!("unsupported dataset version {version}")));
    }
    let count = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
    let k30 = u32::from_le_bytes(header[16..20].try_into().unwrap()) as usize;
    let k80 = u32::from_le_bytes(header[20..24].try_into().unwrap()) as usize;
    if k30 != K_HEIGHT_PERIOD || k80 != K_HEADING {
        return Err(fail(&format!(
            "dataset ordinate counts ({k30}, {k80}) do not match this build"
        )));
    }
    let w30 = FeatureVector::width(DofMask::ALL, k30);
    let w80 = FeatureVector::width(DofMask::ALL, k80);
    let record_len = 8 + 8 * (4 + w30 + w80);
    let mut buf = vec![0u8; record_len];
    let mut records = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut buf)
            .map_err(|_| fail("file truncated inside a record"))?;
        let mut pos = 0usize;
        let seed = u64::from_le_bytes(buf[pos..pos + 8].try_into().unwrap());
        pos += 8;
        let take_f64 = |pos: &mut usize| {
            let v = f64::from_le_bytes(buf[*pos..*pos + 8].try_into().unwrap());
            *pos += 8;
            v
        };
        let h_s = take_f64(&mut pos);
        let t_1 = take_f64(&mut pos);
        let mu_h_deg = take_f64(&mut pos);
        let speed = take_f64(&mut pos);
        let v30: Vec<f64> = (0..w30).map(|_| take_f64(&mut pos)).collect();
        let v80: Vec<f64> = (0..w80).map(|_| take_f64(&mut pos)).collect();
        records.push(DatasetRecord {
            scenario: Scenario {
                sea: SeaState { h_s, t_1, mu_h_deg },
                speed,
                seed,
            },
            features_k30: FeatureVector::from_parts(DofMask::ALL, k30, v30)?,
            features_k80: FeatureVector::from_parts(DofMask::ALL, k80, v80)?,
        });
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    if !rest.is_empty() {
        return Err(fail("trailing bytes after the last record"));
    }
    Ok(records)
}

/// Writes a human-readable CSV variant of the dataset.
pub fn export_csv(records: &[DatasetRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut w = BufWriter::new(file);
    let mut header = vec![
        "seed".to_string(),
        "h_s".to_string(),
        "t_1".to_string(),
        "mu_h".to_string(),
        "speed".to_string(),
    ];
    for (label, k) in [("k30", K_HEIGHT_PERIOD), ("k80", K_HEADING)] {
        for dof in Dof::ALL {
            for i in 0..k {
                header.push(format!("{label}_{}_ord{i}", dof.name()));
            }
            for i in 0..k {
                header.push(format!("{label}_{}_freq{i}", dof.name()));
            }
            header.push(format!("{label}_{}_m0", dof.name()));
        }
        header.push(format!("{label}_speed"));
    }
    let io_err = |e| Error::io(path.display().to_string(), e);
    writeln!(w, "{}", header.join(",")).map_err(io_err)?;
    for r in records {
        let mut row = vec![
            r.scenario.seed.to_string(),
            r.scenario.sea.h_s.to_string(),
            r.scenario.sea.t_1.to_string(),
            r.scenario.sea.mu_h_deg.to_string(),
            r.scenario.speed.to_string(),
        ];
        row.extend(r.features_k30.values().iter().map(|v| v.to_string()));
        row.extend(r.features_k80.values().iter().map(|v| v.to_string()));
        writeln!(w, "{}", row.join(",")).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Ordered `key=value` text manifest.
///
/// Insertion order is preserved so serialized manifests are deterministic.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Manifest::default()
    }

    pub fn set(&mut self, key: &str, value: impl std::fmt::Display) {
        let value = value.to_string();
        if let Some(slot) = self.entries.iter_mut().find(|(k, _)| k == key) {
            slot.1 = value;
        } else {
            self.entries.push((key.to_string(), value));
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_parsed<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self
            .get(key)
            .ok_or_else(|| Error::domain(format!("manifest is missing key '{key}'")))?;
        raw.parse().map_err(|_| {
            Error::domain(format!("manifest key '{key}' has unparsable value '{raw}'"))
        })
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut manifest = Manifest::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::domain(format!("manifest line {} lacks '=': '{line}'", lineno + 1))
            })?;
            manifest.set(k.trim(), v.trim());
        }
        Ok(manifest)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(seed: u64) -> DatasetRecord {
        let w30 = FeatureVector::width(DofMask::ALL, K_HEIGHT_PERIOD);
        let w80 = FeatureVector::width(DofMask::ALL, K_HEADING);
        DatasetRecord {
            scenario: Scenario {
                sea: SeaState {
                    h_s: 1.25,
                    t_1: 7.5,
                    mu_h_deg: 135.0,
                },
                speed: 2.5,
                seed,
            },
            features_k30: FeatureVector::from_parts(
                DofMask::ALL,
                K_HEIGHT_PERIOD,
                (0..w30).map(|i| i as f64 * 0.5 + seed as f64).collect(),
            )
            .unwrap(),
            features_k80: FeatureVector::from_parts(
                DofMask::ALL,
                K_HEADING,
                (0..w80).map(|i| i as f64 * 0.25 - seed as f64).collect(),
            )
            .unwrap(),
        }
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let dir = std::env::temp_dir().join("sawb_dataset_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("data.bin");
        let records = vec![record(1), record(2), record(3)];
        save_records(&records, &path).unwrap();
        let loaded = load_records(&path).unwrap();
        assert_eq!(records, loaded);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn corrupted_magic_is_rejected() {
        let dir = std::env::temp_dir().join("sawb_dataset_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.bin");
        save_records(&[record(1)], &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'Z';
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_records(&path), Err(Error::Format { .. })));
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn truncated_file_is_rejected() {
        let dir = std::env::temp_dir().join("sawb_dataset_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("short.bin");
        save_records(&[record(1), record(2)], &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 10]).unwrap();
        assert!(load_records(&path).is_err());
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn target_accessors() {
        let r = record(9);
        assert_eq!(r.target(Target::WaveHeight), 1.25);
        assert_eq!(r.target(Target::WavePeriod), 7.5);
        assert_eq!(r.target(Target::WaveHeading), 135.0);
        assert_eq!(r.features_for(Target::WaveHeading).k(), K_HEADING);
        assert_eq!(r.features_for(Target::WaveHeight).k(), K_HEIGHT_PERIOD);
    }

    #[test]
    fn csv_export_has_header_and_rows() {
        let dir = std::env::temp_dir().join("sawb_dataset_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("data.csv");
        export_csv(&[record(1), record(2)], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        let cols = lines[0].split(',').count();
        assert_eq!(
            cols,
            5 + FeatureVector::width(DofMask::ALL, K_HEIGHT_PERIOD)
                + FeatureVector::width(DofMask::ALL, K_HEADING)
        );
        assert_eq!(lines[1].split(',').count(), cols);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn manifest_round_trip_preserves_order() {
        let mut m = Manifest::new();
        m.set("n", 100);
        m.set("master_seed", 7u64);
        m.set("grid_omega_min", 0.05);
        m.set("n", 200); // overwrite keeps position
        let text = m.to_text();
        assert!(text.starts_with("n=200\n"));
        let parsed = Manifest::parse(&text).unwrap();
        assert_eq!(parsed, m);
        assert_eq!(parsed.get_parsed::<u64>("master_seed").unwrap(), 7);
    }

    #[test]
    fn manifest_rejects_malformed_lines() {
        assert!(Manifest::parse("valid=1\nnot a pair\n").is_err());
        let with_comments = Manifest::parse("# comment\n\nkey=v\n").unwrap();
        assert_eq!(with_comments.get("key"), Some("v"));
    }
}
