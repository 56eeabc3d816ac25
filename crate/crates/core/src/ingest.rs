//! Delimited-text readers and writers for the core types.
//!
//! All coordinates in errors are 1-based. Numbers use a period as decimal
//! separator regardless of locale; thousands separators are rejected.
//! Lines may end in LF or CRLF and blank lines are ignored.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{
    AnnotationIndex, Direction, GroupLabel, LabelRoster, LabeledMatrix, Measure, RosterEntry,
    SampleMeta, SensitivityRecord, SignatureList,
};

const DEFAULT_SYNONYMS: &str = include_str!("label_synonyms.toml");

/// Token table mapping source vocabularies onto [`GroupLabel`].
#[derive(Debug, Clone)]
pub struct LabelSynonyms {
    map: HashMap<String, GroupLabel>,
}

#[derive(Deserialize)]
struct SynonymFile {
    synonyms: BTreeMap<String, GroupLabel>,
}

impl LabelSynonyms {
    /// Loads a table in the format of the shipped `label_synonyms.toml`.
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: SynonymFile = toml::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("label synonym table: {e}")))?;
        Ok(LabelSynonyms {
            map: file
                .synonyms
                .into_iter()
                .map(|(k, v)| (k.trim().to_uppercase(), v))
                .collect(),
        })
    }

    pub fn normalize(&self, token: &str) -> Option<GroupLabel> {
        self.map.get(&token.trim().to_uppercase()).copied()
    }

    /// Adds or overrides one token.
    pub fn insert(&mut self, token: &str, label: GroupLabel) {
        self.map.insert(token.trim().to_uppercase(), label);
    }
}

impl Default for LabelSynonyms {
    fn default() -> Self {
        Self::from_toml(DEFAULT_SYNONYMS).expect("shipped synonym table parses")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delimiter {
    Tab,
    Comma,
}

impl Delimiter {
    pub fn as_char(self) -> char {
        match self {
            Delimiter::Tab => '\t',
            Delimiter::Comma => ',',
        }
    }
}

/// Layout of a matrix file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixFormat {
    pub delimiter: Delimiter,
    pub has_label_row: bool,
    pub label_row_key: String,
    pub missing_token: String,
}

impl Default for MatrixFormat {
    fn default() -> Self {
        MatrixFormat {
            delimiter: Delimiter::Tab,
            has_label_row: false,
            label_row_key: "label".into(),
            missing_token: "NA".into(),
        }
    }
}

impl MatrixFormat {
    pub fn tsv() -> Self {
        Self::default()
    }

    pub fn csv() -> Self {
        MatrixFormat {
            delimiter: Delimiter::Comma,
            ..Self::default()
        }
    }

    pub fn with_labels(mut self) -> Self {
        self.has_label_row = true;
        self
    }
}

/// Nonblank lines with their 1-based line numbers, CR stripped.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty())
}

/// Tab if the first line has one, comma otherwise.
fn sniff(text: &str) -> char {
    match lines(text).next() {
        Some((_, l)) if l.contains('\t') => '\t',
        _ => ',',
    }
}

fn parse_number(token: &str, line: usize, column: usize) -> Result<f64> {
    let bad = || Error::BadNumber {
        line,
        column,
        token: token.to_string(),
    };
    let t = token.trim();
    // Rust's float grammar also accepts "inf" and "NaN"; values must be finite.
    if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit() || b"+-.eE".contains(&b)) {
        return Err(bad());
    }
    let v: f64 = t.parse().map_err(|_| bad())?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

fn label_token(syn: &LabelSynonyms, token: &str, line: usize) -> Result<GroupLabel> {
    syn.normalize(token).ok_or_else(|| Error::UnknownLabel {
        line,
        token: token.to_string(),
    })
}

/// Reads a matrix file using the shipped synonym table.
pub fn parse_matrix(text: &str, fmt: &MatrixFormat) -> Result<LabeledMatrix> {
    parse_matrix_with(text, fmt, &LabelSynonyms::default())
}

pub fn parse_matrix_with(
    text: &str,
    fmt: &MatrixFormat,
    syn: &LabelSynonyms,
) -> Result<LabeledMatrix> {
    let delim = fmt.delimiter.as_char();
    let mut it = lines(text);
    let (_, header) = it.next().ok_or(Error::Empty("matrix file"))?;
    let sample_ids: Vec<String> = header.split(delim).skip(1).map(|s| s.trim().to_string()).collect();
    if sample_ids.is_empty() {
        return Err(Error::Schema {
            line: 1,
            message: "header has no sample columns".into(),
        });
    }
    let mut seen = BTreeSet::new();
    for s in &sample_ids {
        if !seen.insert(s.as_str()) {
            return Err(Error::DuplicateId {
                kind: "sample",
                id: s.clone(),
            });
        }
    }
    let width = sample_ids.len() + 1;

    let mut labels = None;
    let mut feature_ids = Vec::new();
    let mut values = Vec::new();
    let mut seen_features = BTreeSet::new();
    let mut first_body = true;
    for (line, l) in it {
        let cells: Vec<&str> = l.split(delim).collect();
        if cells.len() != width {
            return Err(Error::Ragged {
                line,
                expected: width,
                found: cells.len(),
            });
        }
        if first_body && fmt.has_label_row {
            first_body = false;
            if cells[0].trim() != fmt.label_row_key {
                return Err(Error::Schema {
                    line,
                    message: format!("expected label row keyed {:?}", fmt.label_row_key),
                });
            }
            let mut map = BTreeMap::new();
            for (s, tok) in sample_ids.iter().zip(&cells[1..]) {
                map.insert(s.clone(), label_token(syn, tok, line)?);
            }
            labels = Some(map);
            continue;
        }
        first_body = false;
        let fid = cells[0].trim().to_string();
        if !seen_features.insert(fid.clone()) {
            return Err(Error::DuplicateId {
                kind: "feature",
                id: fid,
            });
        }
        for (j, tok) in cells[1..].iter().enumerate() {
            if tok.trim() == fmt.missing_token {
                values.push(f64::NAN);
            } else {
                values.push(parse_number(tok, line, j + 2)?);
            }
        }
        feature_ids.push(fid);
    }
    Ok(LabeledMatrix::new(feature_ids, sample_ids, values, labels))
}

/// Shortest decimal form that reads back to the same `f64`
/// (at most 17 significant digits).
pub fn format_value(v: f64) -> String {
    format!("{v:?}")
}

/// Writes a matrix in `fmt`. Labels are written with canonical names;
/// the corner cell is always `feature_id`.
pub fn write_matrix(m: &LabeledMatrix, fmt: &MatrixFormat) -> String {
    let d = fmt.delimiter.as_char();
    let mut out = String::from("feature_id");
    for s in m.sample_ids() {
        out.push(d);
        out.push_str(s);
    }
    out.push('\n');
    if fmt.has_label_row {
        out.push_str(&fmt.label_row_key);
        for s in m.sample_ids() {
            out.push(d);
            out.push_str(m.label(s).as_str());
        }
        out.push('\n');
    }
    for r in 0..m.n_features() {
        out.push_str(&m.feature_ids()[r]);
        for &v in m.row(r) {
            out.push(d);
            if v.is_nan() {
                out.push_str(&fmt.missing_token);
            } else {
                out.push_str(&format_value(v));
            }
        }
        out.push('\n');
    }
    out
}

fn split_cells(l: &str, delim: char) -> Vec<&str> {
    l.split(delim).map(str::trim).collect()
}

fn is_header(first_cell: &str, key: &str) -> bool {
    first_cell.eq_ignore_ascii_case(key)
}

/// Reads `sample_id,label[,source[,note]]` rows (comma or tab).
/// A header row starting with `sample_id` is skipped.
pub fn parse_roster(text: &str) -> Result<LabelRoster> {
    parse_roster_with(text, &LabelSynonyms::default())
}

pub fn parse_roster_with(text: &str, syn: &LabelSynonyms) -> Result<LabelRoster> {
    let delim = sniff(text);
    let mut entries = Vec::new();
    for (line, l) in lines(text) {
        let cells = split_cells(l, delim);
        if entries.is_empty() && is_header(cells[0], "sample_id") {
            continue;
        }
        if !(2..=4).contains(&cells.len()) {
            return Err(Error::Schema {
                line,
                message: format!("expected 2 to 4 columns, found {}", cells.len()),
            });
        }
        if cells[0].is_empty() {
            return Err(Error::Schema {
                line,
                message: "empty sample id".into(),
            });
        }
        entries.push(RosterEntry {
            sample_id: cells[0].to_string(),
            label: label_token(syn, cells[1], line)?,
            source_id: cells
                .get(2)
                .filter(|s| !s.is_empty())
                .map_or_else(|| "default".to_string(), |s| s.to_string()),
            note: cells.get(3).filter(|s| !s.is_empty()).map(|s| s.to_string()),
        });
    }
    LabelRoster::new(entries)
}

pub fn write_roster(r: &LabelRoster) -> String {
    let mut out = String::from("sample_id,label,source,note\n");
    for e in r.entries() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            e.sample_id,
            e.label,
            e.source_id,
            e.note.as_deref().unwrap_or("")
        );
    }
    out
}

fn parse_direction(token: &str, syn: &LabelSynonyms, line: usize) -> Result<Option<Direction>> {
    let t = token.trim();
    if t.is_empty() {
        return Ok(None);
    }
    let compact: String = t
        .chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_ascii_uppercase();
    match compact.as_str() {
        "UPINRESISTANT" | "HIGHERINRESISTANT" => return Ok(Some(Direction::UpInResistant)),
        "UPINSENSITIVE" | "HIGHERINSENSITIVE" => return Ok(Some(Direction::UpInSensitive)),
        _ => {}
    }
    match syn.normalize(t) {
        Some(GroupLabel::Resistant) => Ok(Some(Direction::UpInResistant)),
        Some(GroupLabel::Sensitive) => Ok(Some(Direction::UpInSensitive)),
        _ => Err(Error::Schema {
            line,
            message: format!("unknown direction {t:?}"),
        }),
    }
}

/// Reads a gene list: one `feature_id[,direction]` per line.
///
/// Repeated ids are kept once in list order; each occurrence's direction
/// is retained so conflicts stay visible.
pub fn parse_signature(text: &str) -> Result<SignatureList> {
    let syn = LabelSynonyms::default();
    let delim = sniff(text);
    let mut ids: Vec<String> = Vec::new();
    let mut seen = BTreeSet::new();
    let mut directions = Vec::new();
    let mut first = true;
    for (line, l) in lines(text) {
        let cells = split_cells(l, delim);
        if first && is_header(cells[0], "feature_id") {
            first = false;
            continue;
        }
        first = false;
        if cells.len() > 2 {
            return Err(Error::Schema {
                line,
                message: format!("expected 1 or 2 columns, found {}", cells.len()),
            });
        }
        let id = cells[0].to_string();
        if id.is_empty() {
            return Err(Error::Schema {
                line,
                message: "empty feature id".into(),
            });
        }
        if let Some(d) = cells.get(1).map(|t| parse_direction(t, &syn, line)).transpose()?.flatten() {
            directions.push((id.clone(), d));
        }
        if seen.insert(id.clone()) {
            ids.push(id);
        }
    }
    SignatureList::new(ids)?.with_directions(directions)
}

pub fn write_signature(sig: &SignatureList) -> String {
    let mut out = String::new();
    let mut dirs: HashMap<&str, Vec<Direction>> = HashMap::new();
    for (id, d) in sig.directions() {
        dirs.entry(id.as_str()).or_default().push(*d);
    }
    for id in sig.feature_ids() {
        match dirs.get(id.as_str()) {
            None => {
                let _ = writeln!(out, "{id}");
            }
            Some(ds) => {
                for d in ds {
                    let _ = writeln!(out, "{id},{d:?}");
                }
            }
        }
    }
    out
}

/// Reads a platform annotation: the platform id on the first line, then
/// one feature id per line in row order.
pub fn parse_annotation(text: &str) -> Result<AnnotationIndex> {
    let mut it = lines(text);
    let (_, platform) = it.next().ok_or(Error::Empty("annotation file"))?;
    let mut ids = Vec::new();
    for (line, l) in it {
        let id = l.trim();
        if id.contains(['\t', ',']) {
            return Err(Error::Schema {
                line,
                message: "annotation rows hold a single feature id".into(),
            });
        }
        ids.push(id.to_string());
    }
    AnnotationIndex::new(platform.trim(), ids)
}

pub fn write_annotation(ann: &AnnotationIndex) -> String {
    let mut out = format!("{}\n", ann.platform_id());
    for id in ann.feature_ids() {
        out.push_str(id);
        out.push('\n');
    }
    out
}

/// Units of the value column in a sensitivity table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PotencyScale {
    /// Already -log10(molar): larger is more potent.
    #[default]
    NegLog10Molar,
    /// Raw molar concentration; converted with -log10.
    Molar,
}

/// Reads `cell_line,drug_id,measure,value` rows.
pub fn parse_sensitivity(text: &str) -> Result<Vec<SensitivityRecord>> {
    parse_sensitivity_scaled(text, PotencyScale::NegLog10Molar)
}

pub fn parse_sensitivity_scaled(text: &str, scale: PotencyScale) -> Result<Vec<SensitivityRecord>> {
    let delim = sniff(text);
    let mut out = Vec::new();
    let mut first = true;
    for (line, l) in lines(text) {
        let cells = split_cells(l, delim);
        if first && is_header(cells[0], "cell_line") {
            first = false;
            continue;
        }
        first = false;
        if cells.len() != 4 {
            return Err(Error::Ragged {
                line,
                expected: 4,
                found: cells.len(),
            });
        }
        let measure: Measure = cells[2].parse().map_err(|_| Error::Schema {
            line,
            message: format!("unknown measure {:?}", cells[2]),
        })?;
        let raw = parse_number(cells[3], line, 4)?;
        let value = match scale {
            PotencyScale::NegLog10Molar => raw,
            PotencyScale::Molar if raw > 0.0 => -raw.log10(),
            PotencyScale::Molar => {
                return Err(Error::Schema {
                    line,
                    message: format!("molar concentration {raw} must be positive"),
                })
            }
        };
        out.push(SensitivityRecord {
            cell_line: cells[0].to_string(),
            drug_id: cells[1].to_string(),
            measure,
            value,
        });
    }
    if out.is_empty() {
        return Err(Error::Empty("sensitivity file"));
    }
    Ok(out)
}

pub fn write_sensitivity(records: &[SensitivityRecord]) -> String {
    let mut out = String::from("cell_line,drug_id,measure,value\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.cell_line,
            r.drug_id,
            r.measure,
            format_value(r.value)
        );
    }
    out
}

/// ISO-8601 timestamp; values without an offset are taken as UTC.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    for f in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, f) {
            return Some(t.and_utc());
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|t| t.and_utc())
}

/// Reads `sample_id,run_timestamp,scanner_id,treatment_arm,included` rows.
pub fn parse_sample_meta(text: &str) -> Result<Vec<SampleMeta>> {
    let delim = sniff(text);
    let mut out = Vec::new();
    let mut first = true;
    for (line, l) in lines(text) {
        let cells = split_cells(l, delim);
        if first && is_header(cells[0], "sample_id") {
            first = false;
            continue;
        }
        first = false;
        if cells.len() != 5 {
            return Err(Error::Ragged {
                line,
                expected: 5,
                found: cells.len(),
            });
        }
        if cells[0].is_empty() {
            return Err(Error::Schema {
                line,
                message: "empty sample id".into(),
            });
        }
        let run_timestamp = parse_timestamp(cells[1]).ok_or_else(|| Error::Schema {
            line,
            message: format!("bad timestamp {:?}", cells[1]),
        })?;
        let included = match cells[4] {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::Schema {
                    line,
                    message: format!("included must be 0 or 1, found {other:?}"),
                })
            }
        };
        out.push(SampleMeta {
            sample_id: cells[0].to_string(),
            run_timestamp,
            scanner_id: cells[2].to_string(),
            treatment_arm: cells[3].to_string(),
            included,
        });
    }
    if out.is_empty() {
        return Err(Error::Empty("sample metadata file"));
    }
    Ok(out)
}

pub fn write_sample_meta(metas: &[SampleMeta]) -> String {
    let mut out = String::from("sample_id,run_timestamp,scanner_id,treatment_arm,included\n");
    for m in metas {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            m.sample_id,
            m.run_timestamp.format("%Y-%m-%dT%H:%M:%SZ"),
            m.scanner_id,
            m.treatment_arm,
            u8::from(m.included)
        );
    }
    out
}
