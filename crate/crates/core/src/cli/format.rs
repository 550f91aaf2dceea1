//! On-disk JSON forms: single matrices and named multi-matrix instances.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{c64, ComplexMatrix};

/// `{"rows": r, "cols": c, "data": [[[re, im], ...], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<[f64; 2]>>,
}

impl MatrixFile {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Parameter(format!(
                "matrix file must be non-empty, got {}x{}",
                self.rows, self.cols
            )));
        }
        if self.data.len() != self.rows {
            return Err(Error::Parameter(format!(
                "expected {} rows, found {}",
                self.rows,
                self.data.len()
            )));
        }
        for (i, row) in self.data.iter().enumerate() {
            if row.len() != self.cols {
                return Err(Error::Parameter(format!(
                    "row {i} has {} entries, expected {}",
                    row.len(),
                    self.cols
                )));
            }
            for (j, z) in row.iter().enumerate() {
                if !z[0].is_finite() || !z[1].is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: MatrixFile =
            serde_json::from_str(text).map_err(|e| Error::Parameter(format!("bad matrix file: {e}")))?;
        file.validate()?;
        Ok(file)
    }

    /// Compact JSON with fixed field order and shortest round-trip floats.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("matrix file serializes")
    }
}

impl From<ComplexMatrix> for MatrixFile {
    fn from(m: ComplexMatrix) -> Self {
        let (rows, cols) = m.shape();
        let data = (0..rows)
            .map(|i| {
                (0..cols)
                    .map(|j| {
                        let z = m.get(i, j);
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        MatrixFile { rows, cols, data }
    }
}

impl TryFrom<MatrixFile> for ComplexMatrix {
    type Error = Error;

    fn try_from(f: MatrixFile) -> Result<Self> {
        f.validate()?;
        let entries = f
            .data
            .iter()
            .flat_map(|row| row.iter().map(|z| c64(z[0], z[1])))
            .collect();
        ComplexMatrix::new(f.rows, f.cols, entries)
    }
}

/// Reads one matrix from JSON text.
pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    ComplexMatrix::try_from(MatrixFile::parse(text)?)
}

/// Named matrices of a multi-matrix instance plus optional integer fields
/// (`split` for the block-triangular converse).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Instance {
    pub matrices: BTreeMap<String, ComplexMatrix>,
    pub split: Option<usize>,
}

const SYMBOLS: [&str; 8] = ["a", "b", "d", "A", "B", "C", "D", "x"];

impl Instance {
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Parameter(format!("bad instance file: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Parameter("instance file must be a JSON object".into()))?;
        let mut inst = Instance::default();
        for (key, v) in obj {
            if key == "split" {
                let s = v
                    .as_u64()
                    .ok_or_else(|| Error::Parameter("split must be a nonnegative integer".into()))?;
                inst.split = Some(s as usize);
            } else if SYMBOLS.contains(&key.as_str()) {
                let file: MatrixFile = serde_json::from_value(v.clone())
                    .map_err(|e| Error::Parameter(format!("matrix {key}: {e}")))?;
                let m = ComplexMatrix::try_from(file)
                    .map_err(|e| Error::Parameter(format!("matrix {key}: {e}")))?;
                inst.matrices.insert(key.clone(), m);
            } else {
                return Err(Error::Parameter(format!("unknown instance key {key:?}")));
            }
        }
        Ok(inst)
    }

    pub fn get(&self, key: &str) -> Result<&ComplexMatrix> {
        self.matrices
            .get(key)
            .ok_or_else(|| Error::Parameter(format!("instance is missing matrix {key:?}")))
    }

    pub fn to_json(&self) -> String {
        let mut obj = serde_json::Map::new();
        for (k, m) in &self.matrices {
            obj.insert(
                k.clone(),
                serde_json::to_value(MatrixFile::from(m.clone())).expect("serializes"),
            );
        }
        if let Some(s) = self.split {
            obj.insert("split".into(), s.into());
        }
        serde_json::to_string(&serde_json::Value::Object(obj)).expect("serializes")
    }

    pub fn with(mut self, key: &str, m: ComplexMatrix) -> Self {
        self.matrices.insert(key.to_string(), m);
        self
    }
}
