use std::path::{Path, PathBuf};
use std::time::Duration;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{Method, SampleSet, Termination};
use crate::error::{Error, Result};
use crate::format::{csv_to_rows, read_text, rows_to_csv, write_text};

/// Sidecar metadata written next to a sample CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleMetadata {
    pub method: Method,
    pub beta: Option<f64>,
    pub dof: usize,
    pub count: usize,
    pub label_dim: usize,
    pub sampling_time_ms: f64,
    pub mean_residual_norm: f64,
    pub termination: Option<Termination>,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SampleSet {
    pub fn csv_header(dof: usize, label_dim: usize) -> Vec<String> {
        (0..dof)
            .map(|i| format!("q{i}"))
            .chain(std::iter::once("residual_norm".to_string()))
            .chain((0..label_dim).map(|i| format!("family_{i}")))
            .collect()
    }

    /// CSV text: `q0,...,q{n-1},residual_norm[,family_0,...]`.
    pub fn to_csv(&self) -> String {
        let dof = self.dof().unwrap_or(0);
        let rows: Vec<Vec<f64>> = self
            .samples
            .iter()
            .zip(&self.residual_norms)
            .zip(&self.labels)
            .map(|((q, r), l)| q.iter().copied().chain(std::iter::once(*r)).chain(l.iter().copied()).collect())
            .collect();
        rows_to_csv(&Self::csv_header(dof, self.label_dim()), rows.iter().map(Vec::as_slice))
    }

    /// Parses sample CSV text; method and β default to Newton / unknown.
    pub fn from_csv(text: &str, origin: &Path) -> Result<SampleSet> {
        let (header, rows) = csv_to_rows(text, origin)?;
        let dof = header.iter().take_while(|h| h.starts_with('q')).count();
        if dof == 0 || header.get(dof).map(String::as_str) != Some("residual_norm") {
            return Err(Error::parse(origin, "header must be q0,...,q{n-1},residual_norm[,family_*]"));
        }
        if header.iter().enumerate().take(dof).any(|(i, h)| *h != format!("q{i}")) {
            return Err(Error::parse(origin, "joint columns must be named q0, q1, ..."));
        }
        let label_dim = header.len() - dof - 1;
        if header[dof + 1..].iter().enumerate().any(|(i, h)| *h != format!("family_{i}")) {
            return Err(Error::parse(origin, "trailing columns must be family_0, family_1, ..."));
        }
        let mut set = SampleSet::empty(Method::Newton, None);
        for row in rows {
            set.samples.push(DVector::from_column_slice(&row[..dof]));
            set.residual_norms.push(row[dof]);
            set.labels.push(row[dof + 1..dof + 1 + label_dim].to_vec());
        }
        Ok(set)
    }

    pub fn metadata(&self, seed: Option<u64>) -> SampleMetadata {
        SampleMetadata {
            method: self.method,
            beta: self.beta,
            dof: self.dof().unwrap_or(0),
            count: self.len(),
            label_dim: self.label_dim(),
            sampling_time_ms: self.sampling_time.as_secs_f64() * 1e3,
            mean_residual_norm: self.mean_residual_norm(),
            termination: self.termination,
            warnings: self.warnings.clone(),
            seed,
        }
    }

    /// `samples.csv` → `samples.meta.json`.
    pub fn metadata_path(csv_path: &Path) -> PathBuf {
        csv_path.with_extension("meta.json")
    }

    /// Writes the CSV and its sidecar metadata.
    pub fn save(&self, csv_path: &Path, seed: Option<u64>) -> Result<()> {
        write_text(csv_path, &self.to_csv())?;
        let meta = serde_json::to_string_pretty(&self.metadata(seed)).expect("metadata serializes");
        write_text(&Self::metadata_path(csv_path), &(meta + "\n"))
    }

    /// Reads a sample CSV, picking up the sidecar metadata when present.
    pub fn load(csv_path: &Path) -> Result<SampleSet> {
        let mut set = SampleSet::from_csv(&read_text(csv_path)?, csv_path)?;
        let meta_path = Self::metadata_path(csv_path);
        if meta_path.exists() {
            let meta: SampleMetadata =
                serde_json::from_str(&read_text(&meta_path)?).map_err(|e| Error::parse(&meta_path, e))?;
            set.method = meta.method;
            set.beta = meta.beta;
            set.termination = meta.termination;
            set.warnings = meta.warnings;
            set.sampling_time = Duration::from_secs_f64(meta.sampling_time_ms.max(0.0) / 1e3);
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SampleSet {
        let mut s = SampleSet::empty(Method::Zigzag, Some(0.5));
        s.push(DVector::from_vec(vec![0.1, -0.2, 3.0]), 1e-7);
        s.push(DVector::from_vec(vec![0.3, 0.25, -1.0]), 2e-9);
        s
    }

    #[test]
    fn header_layout() {
        let mut s = sample();
        s.label_all(&[0.5, 0.6, 0.3]);
        let text = s.to_csv();
        assert!(text.starts_with("q0,q1,q2,residual_norm,family_0,family_1,family_2\r\n"));
    }

    #[test]
    fn save_load_round_trip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let mut s = sample();
        s.label_all(&[2.0]);
        s.save(&path, Some(42)).unwrap();
        let first = std::fs::read(&path).unwrap();
        let back = SampleSet::load(&path).unwrap();
        assert_eq!(back.samples, s.samples);
        assert_eq!(back.method, Method::Zigzag);
        assert_eq!(back.beta, Some(0.5));
        back.save(&path, Some(42)).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), first);
    }

    #[test]
    fn rejects_bad_headers() {
        let p = Path::new("x.csv");
        assert!(SampleSet::from_csv("a,b\r\n1,2\r\n", p).is_err());
        assert!(SampleSet::from_csv("q0,q1,residual_norm,extra\r\n1,2,3,4\r\n", p).is_err());
        assert!(SampleSet::from_csv("q0,residual_norm\r\n1,x\r\n", p).is_err());
        assert!(SampleSet::from_csv("", p).is_err());
        let empty = SampleSet::from_csv("q0,q1,residual_norm\r\n", p).unwrap();
        assert!(empty.is_empty());
    }
}
