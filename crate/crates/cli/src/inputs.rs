//! Reading, digesting and parsing declared inputs.

use std::collections::BTreeMap;
use std::path::Path;

use forensic_core::ingest::{
    parse_annotation, parse_matrix, parse_roster, parse_sample_meta, parse_sensitivity, parse_signature,
};
use forensic_core::model::{AnnotationIndex, LabelRoster, LabeledMatrix, SampleMeta, SensitivityRecord, SignatureList};
use sha2::{Digest, Sha256};

use crate::manifest::{InputKind, InputSpec};

#[derive(Debug, Clone)]
pub enum Loaded {
    Matrix(LabeledMatrix),
    Roster(LabelRoster),
    Signature(SignatureList),
    Annotation(AnnotationIndex),
    Sensitivity(Vec<SensitivityRecord>),
    Meta(Vec<SampleMeta>),
}

/// Parsed inputs by name. Inputs that could not be read or parsed carry
/// the reason instead.
#[derive(Debug, Default)]
pub struct Inputs {
    pub loaded: BTreeMap<String, std::result::Result<Loaded, String>>,
    /// Lowercase hex SHA-256 of each readable input's bytes.
    pub digests: BTreeMap<String, String>,
    /// Raw text of each readable input.
    pub texts: BTreeMap<String, String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn parse(spec: &InputSpec, text: &str) -> forensic_core::Result<Loaded> {
    Ok(match spec.kind {
        InputKind::Matrix => Loaded::Matrix(parse_matrix(text, &spec.matrix_format())?),
        InputKind::Roster => Loaded::Roster(parse_roster(text)?),
        InputKind::Signature => Loaded::Signature(parse_signature(text)?),
        InputKind::Annotation => Loaded::Annotation(parse_annotation(text)?),
        InputKind::Sensitivity => Loaded::Sensitivity(parse_sensitivity(text)?),
        InputKind::Meta => Loaded::Meta(parse_sample_meta(text)?),
    })
}

impl Inputs {
    /// Loads every declared input, resolving relative paths against `base`.
    pub fn load(specs: &BTreeMap<String, InputSpec>, base: &Path) -> Self {
        let mut out = Inputs::default();
        for (name, spec) in specs {
            let path = base.join(&spec.path);
            let result = match std::fs::read(&path) {
                Err(e) => Err(format!("cannot read {}: {e}", spec.path)),
                Ok(bytes) => {
                    out.digests.insert(name.clone(), sha256_hex(&bytes));
                    match String::from_utf8(bytes) {
                        Err(_) => Err(format!("{} is not UTF-8", spec.path)),
                        Ok(text) => {
                            let parsed = parse(spec, &text).map_err(|e| format!("{}: {e}", spec.path));
                            out.texts.insert(name.clone(), text);
                            parsed
                        }
                    }
                }
            };
            out.loaded.insert(name.clone(), result);
        }
        out
    }

    pub fn failures(&self) -> Vec<(&str, &str)> {
        self.loaded
            .iter()
            .filter_map(|(n, r)| r.as_ref().err().map(|e| (n.as_str(), e.as_str())))
            .collect()
    }

    pub fn get(&self, name: &str) -> std::result::Result<&Loaded, String> {
        match self.loaded.get(name) {
            None => Err(format!("input {name:?} is not declared")),
            Some(Err(e)) => Err(format!("input {name:?} unavailable: {e}")),
            Some(Ok(l)) => Ok(l),
        }
    }
}

macro_rules! accessor {
    ($fn:ident, $variant:ident, $ty:ty) => {
        impl Inputs {
            pub fn $fn(&self, name: &str) -> std::result::Result<&$ty, String> {
                match self.get(name)? {
                    Loaded::$variant(v) => Ok(v),
                    _ => Err(format!("input {name:?} is not a {}", stringify!($variant).to_lowercase())),
                }
            }
        }
    };
}

accessor!(matrix, Matrix, LabeledMatrix);
accessor!(roster, Roster, LabelRoster);
accessor!(signature, Signature, SignatureList);
accessor!(annotation, Annotation, AnnotationIndex);
accessor!(sensitivity, Sensitivity, Vec<SensitivityRecord>);
accessor!(meta, Meta, Vec<SampleMeta>);
