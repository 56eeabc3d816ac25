use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use forensic_cli::{AuditManifest, MANIFEST_SCHEMA, REPORT_SCHEMA, REPORT_SCHEMA_VERSION};
use forensic_core::{FindingCode, FindingsReport};
use serde_json::Value;

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn forensic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forensic")).args(args).output().unwrap()
}

fn run_to(manifest: &Path, out: &Path) -> (i32, String) {
    let o = forensic(&["report", "run", "--quiet", "--manifest", manifest.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    (o.status.code().unwrap(), fs::read_to_string(out).unwrap_or_default())
}

fn validator(schema: &str) -> jsonschema::Validator {
    jsonschema::validator_for(&serde_json::from_str::<Value>(schema).unwrap()).unwrap()
}

#[test]
fn bundled_manifests_match_their_schema() {
    let v = validator(MANIFEST_SCHEMA);
    for name in ["corrupted", "clean"] {
        let text = fs::read_to_string(corpus(name).join("manifest.json")).unwrap();
        let doc: Value = serde_json::from_str(&text).unwrap();
        let errors: Vec<String> = v.iter_errors(&doc).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{name}: {errors:?}");
        assert!(AuditManifest::from_json(&text).unwrap().problems().is_empty());
    }
    let bad: Value = serde_json::json!({"inputs": {}, "checks": [{"detector": "roster"}]});
    assert!(!v.is_valid(&bad));
}

#[test]
fn corrupted_report_is_schema_valid_and_subjects_are_grounded() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, text) = run_to(&corpus("corrupted").join("manifest.json"), &tmp.path().join("r.json"));
    assert_eq!(code, 2);
    let doc: Value = serde_json::from_str(&text).unwrap();
    let errors: Vec<String> = validator(REPORT_SCHEMA).iter_errors(&doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");

    let report: FindingsReport = serde_json::from_str(&text).unwrap();
    assert_eq!(report.schema_version, REPORT_SCHEMA_VERSION);
    let manifest = AuditManifest::from_json(&fs::read_to_string(corpus("corrupted").join("manifest.json")).unwrap()).unwrap();
    assert_eq!(report.input_digests.len(), manifest.inputs.len());
    let texts: Vec<String> = manifest
        .inputs
        .values()
        .map(|s| fs::read_to_string(corpus("corrupted").join(&s.path)).unwrap())
        .collect();
    for f in &report.findings {
        for s in &f.subjects {
            assert!(
                manifest.inputs.contains_key(s) || texts.iter().any(|t| t.contains(s.as_str())),
                "{} names unknown subject {s}",
                f.code
            );
        }
    }
    let dup = report.findings.iter().find(|f| f.code == FindingCode::DupColumns).unwrap();
    assert_eq!(dup.metrics["n_distinct"], forensic_core::MetricValue::Int(84));
    assert_eq!(dup.metrics["n_samples"], forensic_core::MetricValue::Int(122));
}

#[test]
fn report_bytes_are_stable_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let m = corpus("corrupted").join("manifest.json");
    let (_, a) = run_to(&m, &tmp.path().join("a.json"));
    let (_, b) = run_to(&m, &tmp.path().join("b.json"));
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert!(a.ends_with("}\n") && !a.contains('\r'));
}

#[test]
fn clean_corpus_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let (code, text) = run_to(&corpus("clean").join("manifest.json"), &tmp.path().join("r.json"));
    assert_eq!(code, 0, "{text}");
    let report: FindingsReport = serde_json::from_str(&text).unwrap();
    assert!(report.findings.is_empty());
}

#[test]
fn missing_input_exits_one_with_partial_report() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("r.csv"), "sample_id,label,source,note\na,S,x,\na,R,x,\n").unwrap();
    let manifest = serde_json::json!({
        "inputs": {
            "r": {"path": "r.csv", "kind": "roster"},
            "gone": {"path": "gone.tsv", "kind": "matrix"}
        },
        "checks": [
            {"detector": "roster", "roster": "r"},
            {"detector": "dup_columns", "matrix": "gone"}
        ],
        "output": "out/report.json"
    });
    let mpath = tmp.path().join("manifest.json");
    fs::write(&mpath, manifest.to_string()).unwrap();
    let o = forensic(&["report", "run", "--quiet", "--manifest", mpath.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let report: FindingsReport =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("out/report.json")).unwrap()).unwrap();
    let codes: Vec<FindingCode> = report.findings.iter().map(|f| f.code).collect();
    assert!(codes.contains(&FindingCode::RosterConflict));
    assert_eq!(codes.iter().filter(|c| **c == FindingCode::DegenerateData).count(), 2);
    assert_eq!(report.input_digests.len(), 1);
}

#[test]
fn missing_manifest_and_bad_reference_exit_one() {
    let o = forensic(&["report", "run", "--manifest", "/nonexistent/manifest.json"]);
    assert_eq!(o.status.code(), Some(1));
    let tmp = tempfile::tempdir().unwrap();
    let mpath = tmp.path().join("m.json");
    fs::write(&mpath, r#"{"inputs": {}, "checks": [{"detector": "roster", "roster": "nope"}]}"#).unwrap();
    let o = forensic(&["report", "validate", "--manifest", mpath.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("undeclared input \"nope\""));
}

#[test]
fn explain_and_version() {
    let o = forensic(&["explain", "dup_columns"]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("Duplicate test samples"));
    assert_eq!(forensic(&["explain", "NOT_A_CODE"]).status.code(), Some(1));
    for code in FindingCode::ALL {
        let o = forensic(&["explain", code.as_str()]);
        assert!(o.status.success() && o.stdout.len() > 20, "{code}");
    }
    let v = String::from_utf8(forensic(&["--version"]).stdout).unwrap();
    assert!(v.contains(env!("CARGO_PKG_VERSION")));
    assert!(v.contains(&format!("report schema {REPORT_SCHEMA_VERSION}")));
    assert!(v.contains(&format!("manifest schema {}", forensic_cli::MANIFEST_SCHEMA_VERSION)));
}

#[test]
fn audit_subcommands_on_corpus_files() {
    let c = corpus("corrupted");
    let p = |f: &str| c.join(f).to_string_lossy().into_owned();
    let o = forensic(&["audit", "dup", "--matrix", &p("dox_test.tsv"), "--label-row"]);
    assert_eq!(o.status.code(), Some(2));
    let r: FindingsReport = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r.codes().contains(&FindingCode::DupInconsistentLabels));

    let o = forensic(&["audit", "roster", "--roster", &p("adria_roster.csv")]);
    assert_eq!(o.status.code(), Some(2));

    let o = forensic(&["audit", "crosstab", "--a", &p("adria_roster.csv"), "--b", &p("adria_reference.csv")]);
    assert!(o.status.success());
    let t: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(t["total"], 80);
    assert_eq!(t["counts"], serde_json::json!([[13, 0, 0], [29, 10, 22], [6, 0, 0]]));

    let o = forensic(&[
        "audit", "offset", "--reported", &p("cis_reported.csv"), "--generated", &p("cis_generated.csv"),
        "--annotation", &p("cis_annotation.txt"),
    ]);
    let r: FindingsReport = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r.codes().contains(&FindingCode::OffsetDetected));

    let o = forensic(&[
        "audit", "dose", "--records", &p("pem_gi50.csv"), "--labels", &p("pem_labels.csv"), "--sentinel", "K-562=Sensitive",
    ]);
    let r: FindingsReport = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r.codes().contains(&FindingCode::LabelReversal));
    assert!(r.codes().contains(&FindingCode::SentinelViolation));

    let o = forensic(&["audit", "confound", "--meta", &p("trial_meta.csv"), "--expression", &p("trial_expression.tsv")]);
    let r: FindingsReport = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r.codes().contains(&FindingCode::ConfoundPerfect));
    assert!(r.codes().contains(&FindingCode::BlockStructure));
}

#[test]
fn combo_and_schema_commands() {
    let o = forensic(&["combo", "--rule", "fec", "F=0.2", "E=0.4", "C=0.6"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["results"][0]["raw"], 0.5);
    let o = forensic(&["report", "schema", "report"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), REPORT_SCHEMA);
}
