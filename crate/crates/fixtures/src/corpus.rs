//! Writes the corrupted and clean corpora: data files plus a manifest.json
//! describing which checks to run over them.

use std::fs;
use std::io;
use std::path::Path;

use forensic_core::ingest::{
    write_annotation, write_matrix, write_roster, write_sample_meta, write_sensitivity, write_signature,
    MatrixFormat,
};
use forensic_core::model::SensitivityRecord;
use serde_json::{json, Map, Value};

use crate::{batches, cisplatin, dose, doxorubicin, labelings, roster};

pub const SEED: u64 = 2007;

struct Writer<'a> {
    dir: &'a Path,
    inputs: Map<String, Value>,
}

impl Writer<'_> {
    fn file(&mut self, name: &str, file: &str, kind: &str, extra: Value, body: String) -> io::Result<()> {
        fs::write(self.dir.join(file), body)?;
        let mut spec = json!({ "path": file, "kind": kind });
        if let Value::Object(m) = extra {
            spec.as_object_mut().unwrap().extend(m);
        }
        self.inputs.insert(name.to_string(), spec);
        Ok(())
    }
}

fn renamed(records: &[SensitivityRecord], drug: &str) -> Vec<SensitivityRecord> {
    records
        .iter()
        .cloned()
        .map(|mut r| {
            r.drug_id = drug.to_string();
            r
        })
        .collect()
}

/// Writes one corpus into `dir` (created if needed). `clean` selects the
/// counterpart datasets that should raise nothing above Info.
pub fn write_corpus(dir: &Path, clean: bool) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = Writer { dir, inputs: Map::new() };
    let labeled_tsv = json!({ "format": "tsv", "label_row": true });
    let tsv = json!({ "format": "tsv" });

    let dox = if clean { doxorubicin::doxorubicin_clean(SEED) } else { doxorubicin::doxorubicin(SEED) };
    w.file("dox_test", "dox_test.tsv", "matrix", labeled_tsv.clone(), write_matrix(&dox.test, &MatrixFormat::tsv().with_labels()))?;
    w.file("dox_training", "dox_training.csv", "roster", Value::Null, write_roster(&dox.training))?;

    let adria = if clean { roster::adria_clean(SEED) } else { roster::adria95(SEED) };
    w.file("adria_roster", "adria_roster.csv", "roster", Value::Null, write_roster(&adria.roster))?;
    w.file("adria_reference", "adria_reference.csv", "roster", Value::Null, write_roster(&adria.reference))?;
    w.file("adria_lc50", "adria_lc50.csv", "sensitivity", Value::Null, write_sensitivity(&adria.lc50))?;

    let cis = if clean { cisplatin::cisplatin_clean(SEED) } else { cisplatin::cisplatin(SEED) };
    w.file("cis_annotation", "cis_annotation.txt", "annotation", Value::Null, write_annotation(&cis.annotation))?;
    w.file("cis_reported", "cis_reported.csv", "signature", Value::Null, write_signature(&cis.reported))?;
    w.file("cis_generated", "cis_generated.csv", "signature", Value::Null, write_signature(&cis.generated))?;
    w.file("cis_heatmap", "cis_heatmap.tsv", "matrix", tsv.clone(), write_matrix(&cis.heatmap, &MatrixFormat::tsv()))?;

    let tmz = if clean { cisplatin::temozolomide_clean(SEED) } else { cisplatin::temozolomide(&cis) };
    w.file("tmz_heatmap", "tmz_heatmap.tsv", "matrix", labeled_tsv.clone(), write_matrix(&tmz.heatmap, &MatrixFormat::tsv().with_labels()))?;
    w.file("tmz_signature", "tmz_signature.csv", "signature", Value::Null, write_signature(&tmz.signature))?;

    let pem = dose::pemetrexed(SEED, !clean);
    w.file("pem_gi50", "pem_gi50.csv", "sensitivity", Value::Null, write_sensitivity(&pem.records))?;
    w.file("pem_labels", "pem_labels.csv", "roster", Value::Null, write_roster(&pem.labels))?;
    let cyc = if clean {
        renamed(&dose::pemetrexed(SEED + 1, false).records, "cyclophosphamide")
    } else {
        dose::cyclophosphamide(SEED).records
    };
    w.file("cyc_gi50", "cyc_gi50.csv", "sensitivity", Value::Null, write_sensitivity(&cyc))?;

    let trial = if clean { batches::balanced(SEED, 200) } else { batches::fec_tet(SEED) };
    w.file("trial_meta", "trial_meta.csv", "meta", Value::Null, write_sample_meta(&trial.meta))?;
    w.file("trial_expression", "trial_expression.tsv", "matrix", tsv.clone(), write_matrix(&trial.expression, &MatrixFormat::tsv()))?;

    let survey = labelings::survey(SEED, !clean);
    let mut drugs = Map::new();
    for (drug, r) in &survey {
        let name = format!("survey_{}", drug.to_lowercase());
        w.file(&name, &format!("{name}.csv"), "roster", Value::Null, write_roster(r))?;
        drugs.insert(drug.clone(), Value::String(name));
    }

    let checks = json!([
        { "detector": "dup_columns", "matrix": "dox_test" },
        { "detector": "sentinel", "labels": "dox_training", "sentinels": doxorubicin::sentinels().iter().map(|s| json!({
            "sample_id": s.sample_id, "expected": s.expected.as_str(), "reason": s.reason
        })).collect::<Vec<_>>() },
        { "detector": "roster", "roster": "adria_roster" },
        { "detector": "dose", "records": "adria_lc50", "labels": "adria_roster", "drug": "daunorubicin", "measure": "LC50" },
        { "detector": "offset", "reported": "cis_reported", "generated": "cis_generated", "annotation": "cis_annotation", "max_shift": 3 },
        { "detector": "reuse", "a": "cis_heatmap", "b": "tmz_heatmap", "digits": 2 },
        { "detector": "directions", "signature": "tmz_signature" },
        { "detector": "dose", "records": "pem_gi50", "labels": "pem_labels", "drug": "pemetrexed", "measure": "GI50" },
        { "detector": "flat_response", "records": "cyc_gi50", "drug": "cyclophosphamide", "measure": "GI50" },
        { "detector": "confound", "meta": "trial_meta", "gap_days": 7 },
        { "detector": "blocks", "matrix": "trial_expression" },
        { "detector": "labeling_flip", "drugs": drugs },
    ]);
    let manifest = json!({
        "inputs": w.inputs,
        "checks": checks,
        "output": "report.json",
    });
    let mut text = serde_json::to_string_pretty(&manifest).expect("json");
    text.push('\n');
    fs::write(dir.join("manifest.json"), text)
}
