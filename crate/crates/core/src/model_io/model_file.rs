//! Versioned JSON envelope for trained models.
//!
//! Every floating-point number is stored as the 16 hex digits of its IEEE-754
//! binary64 bit pattern, so saving and loading reproduces each value exactly.
//! Layout (version 1):
//!
//! ```text
//! {
//!   "format": "qpca-model",
//!   "format_version": 1,
//!   "encoding": "direct-sum/k=s+2",
//!   "n": 2, "s": 1, "k": 3,
//!   "singular_values": ["3ff0000000000000"],
//!   "components": [["3fe3333333333333", "3fe999999999999a"]],
//!   "metadata": { "sample_count": 1, "selection": {"count": 1},
//!                 "centered": false, "created_unix": 0 }
//! }
//! ```

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classifier::{ClassifierModel, ModelMetadata, ENCODING_ID};
use crate::error::{Error, Result};
use crate::pca::PrincipalComponents;

pub const FORMAT_TAG: &str = "qpca-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub format_version: u32,
    pub encoding: String,
    pub n: usize,
    pub s: usize,
    pub k: usize,
    pub singular_values: Vec<String>,
    pub components: Vec<Vec<String>>,
    pub metadata: ModelMetadata,
}

pub fn encode_f64(v: f64) -> String {
    format!("{:016x}", v.to_bits())
}

pub fn decode_f64(s: &str) -> Option<f64> {
    if s.len() != 16 || !s.bytes().all(|b| b.is_ascii_hexdigit()) {
        return None;
    }
    u64::from_str_radix(s, 16).ok().map(f64::from_bits)
}

impl ModelFile {
    pub fn from_model(model: &ClassifierModel) -> Self {
        let pcs = model.components();
        ModelFile {
            format: FORMAT_TAG.to_owned(),
            format_version: FORMAT_VERSION,
            encoding: ENCODING_ID.to_owned(),
            n: model.pixel_count(),
            s: model.component_count(),
            k: model.block_dim(),
            singular_values: pcs
                .singular_values()
                .iter()
                .map(|&v| encode_f64(v))
                .collect(),
            components: pcs
                .components()
                .iter()
                .map(|c| c.iter().map(|&v| encode_f64(v)).collect())
                .collect(),
            metadata: model.metadata().clone(),
        }
    }

    /// Decodes the payload and rebuilds the model, re-running its integrity checks.
    pub fn into_model(self, text: &str) -> Result<ClassifierModel> {
        if self.format != FORMAT_TAG {
            return Err(Error::parse(
                0,
                format!("unknown format tag {:?}", self.format),
            ));
        }
        if self.encoding != ENCODING_ID {
            return Err(Error::Format(format!(
                "unsupported encoding {:?}",
                self.encoding
            )));
        }
        if self.s == 0 || self.n == 0 {
            return Err(Error::ModelIntegrity(
                "model must have n >= 1 and s >= 1".into(),
            ));
        }
        if self.k != self.s + 2 {
            return Err(Error::ModelIntegrity(format!(
                "block dimension {} does not equal s + 2 = {}",
                self.k,
                self.s + 2
            )));
        }
        if self.components.len() != self.s || self.singular_values.len() != self.s {
            return Err(Error::ModelIntegrity(format!(
                "declared s = {} but found {} components and {} singular values",
                self.s,
                self.components.len(),
                self.singular_values.len()
            )));
        }
        if let Some(row) = self.components.iter().position(|c| c.len() != self.n) {
            return Err(Error::ModelIntegrity(format!(
                "component {row} does not have n = {} entries",
                self.n
            )));
        }
        let decode = |s: &String| {
            decode_f64(s).ok_or_else(|| {
                let offset = text.find(&format!("\"{s}\"")).map_or(0, |p| p + 1);
                Error::parse(offset, format!("invalid binary64 hex value {s:?}"))
            })
        };
        let singular_values = self
            .singular_values
            .iter()
            .map(decode)
            .collect::<Result<Vec<_>>>()?;
        let components = self
            .components
            .iter()
            .map(|c| c.iter().map(decode).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        if components.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::ModelIntegrity("non-finite component entry".into()));
        }
        if singular_values
            .iter()
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(Error::ModelIntegrity(
                "singular values must be finite and non-negative".into(),
            ));
        }
        let pcs = PrincipalComponents::new(components, singular_values)
            .map_err(|e| Error::ModelIntegrity(e.to_string()))?;
        ClassifierModel::from_components(pcs, self.metadata)
    }
}

pub fn model_to_string(model: &ClassifierModel) -> String {
    let mut s =
        serde_json::to_string_pretty(&ModelFile::from_model(model)).expect("model file serializes");
    s.push('\n');
    s
}

pub fn save_model(model: &ClassifierModel, mut sink: impl Write) -> std::io::Result<()> {
    sink.write_all(model_to_string(model).as_bytes())
}

pub fn save_model_file(model: &ClassifierModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, model_to_string(model)).map_err(|e| Error::io(path, e))
}

fn json_offset(text: &str, err: &serde_json::Error) -> usize {
    let (line, column) = (err.line(), err.column());
    if line == 0 {
        return 0;
    }
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

pub fn model_from_str(text: &str) -> Result<ClassifierModel> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::parse(json_offset(text, &e), e.to_string()))?;
    let version = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::parse(0, "missing format_version"))?;
    if version != FORMAT_VERSION as u64 {
        return Err(Error::Version {
            found: u32::try_from(version).unwrap_or(u32::MAX),
            expected: FORMAT_VERSION,
        });
    }
    let file: ModelFile =
        serde_json::from_value(value).map_err(|e| Error::parse(0, e.to_string()))?;
    file.into_model(text)
}

pub fn load_model(mut source: impl Read) -> Result<ClassifierModel> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| Error::parse(0, format!("unreadable model: {e}")))?;
    model_from_str(&text)
}

pub fn load_model_file(path: impl AsRef<Path>) -> Result<ClassifierModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_str(&text)
}
