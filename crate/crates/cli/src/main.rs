use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use forensic_cli::audit::{report_path, run_audit, write_report};
use forensic_cli::commands::{self, MatchAxis, SignatureModel};
use forensic_cli::manifest::{CheckSpec, InputKind, InputSpec, SentinelSpec, TableFormat};
use forensic_cli::{canonical_json, run_manifest, summary, AuditManifest, CliError, MANIFEST_SCHEMA, REPORT_SCHEMA};
use forensic_core::transform::TransformPipeline;

#[derive(Parser)]
#[command(
    name = "forensic",
    version = concat!(env!("CARGO_PKG_VERSION"), " (report schema 1.0, manifest schema 1.0)"),
    about = "Integrity audits for expression matrices, label rosters, gene lists and drug-response data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single detector and print its findings report.
    #[command(subcommand)]
    Audit(AuditCmd),
    /// Identify rows or columns of one matrix within another.
    #[command(subcommand, name = "match")]
    Match(MatchCmd),
    /// Search for the line grouping that reproduces a gene list.
    #[command(subcommand)]
    Search(SearchCmd),
    /// Fit or apply a metagene/probit signature.
    #[command(subcommand)]
    Signature(SignatureCmd),
    /// ROC curve and AUC of scores against Sensitive/Resistant labels.
    Roc {
        /// CSV with header sample_id,score,label.
        #[arg(long)]
        scores: PathBuf,
    },
    /// Combine per-drug probabilities with a fixed rule.
    Combo {
        /// tfac, tet or fec.
        #[arg(long)]
        rule: String,
        /// CSV with one column per drug key and one row per patient.
        #[arg(long, conflicts_with = "inputs")]
        batch: Option<PathBuf>,
        /// Rescale the batch as the rule prescribes.
        #[arg(long)]
        normalize: bool,
        /// KEY=VALUE probabilities, e.g. T=0.5.
        inputs: Vec<String>,
    },
    /// Manifest-driven audits.
    #[command(subcommand)]
    Report(ReportCmd),
    /// Describe a finding code.
    Explain { code: String },
}

#[derive(Args)]
struct MatrixArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// The matrix has a label row under the header.
    #[arg(long)]
    label_row: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Tsv,
    Csv,
}

impl From<Format> for TableFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Tsv => TableFormat::Tsv,
            Format::Csv => TableFormat::Csv,
        }
    }
}

#[derive(Args)]
struct ReportOut {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AuditCmd {
    /// Duplicated sample columns and their label consistency.
    Dup {
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        fmt: MatrixArgs,
        #[arg(long)]
        threshold: Option<f64>,
        #[command(flatten)]
        out: ReportOut,
    },
    /// Repeated and conflicting roster entries.
    Roster {
        #[arg(long)]
        roster: PathBuf,
        #[command(flatten)]
        out: ReportOut,
    },
    /// Cross-tabulate two labelings of the same samples.
    Crosstab {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Row offset between a reported gene list and a generated one.
    Offset {
        #[arg(long)]
        reported: PathBuf,
        #[arg(long)]
        generated: PathBuf,
        #[arg(long)]
        annotation: PathBuf,
        #[arg(long)]
        max_shift: Option<u32>,
        #[command(flatten)]
        out: ReportOut,
    },
    /// Label orientation and separation against dose-response data.
    Dose {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        drug: Option<String>,
        #[arg(long)]
        measure: Option<String>,
        #[arg(long)]
        margin: Option<f64>,
        /// Also test for a flat response with this IQR cutoff.
        #[arg(long)]
        flat_epsilon: Option<f64>,
        /// SAMPLE=LABEL pairs of known orientation.
        #[arg(long = "sentinel")]
        sentinels: Vec<String>,
        #[command(flatten)]
        out: ReportOut,
    },
    /// Treatment arm against run batch and scanner.
    Confound {
        #[arg(long)]
        meta: PathBuf,
        #[arg(long)]
        gap_days: Option<f64>,
        /// Expression matrix to scan for correlated sample blocks.
        #[arg(long)]
        expression: Option<PathBuf>,
        #[command(flatten)]
        out: ReportOut,
    },
}

#[derive(Subcommand)]
enum MatchCmd {
    /// Match query rows to reference rows (columns correspond).
    Rows(MatchArgs),
    /// Match query columns to reference columns (rows correspond).
    Columns(MatchArgs),
    /// Infer which grid pipeline turns the reference into the query.
    Pipeline {
        #[arg(long)]
        query: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[command(flatten)]
        fmt: MatrixArgs,
    },
}

#[derive(Args)]
struct MatchArgs {
    #[arg(long)]
    query: PathBuf,
    #[arg(long)]
    reference: PathBuf,
    /// Transform applied to the reference first, e.g. log:e|zscore:n-1|exp:e|round:2.
    #[arg(long, default_value = "identity")]
    pipeline: String,
    #[arg(long, default_value_t = 0.999)]
    min_corr: f64,
    #[command(flatten)]
    fmt: MatrixArgs,
}

#[derive(Subcommand)]
enum SearchCmd {
    /// Steepest ascent over Resistant/Sensitive/Unused line roles.
    Groups {
        /// Genes x lines.
        #[arg(long)]
        panel: PathBuf,
        /// The gene list to reproduce.
        #[arg(long)]
        target: PathBuf,
        /// Roster with the starting roles; unlisted lines start Unused.
        #[arg(long)]
        start: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        /// Include every move and the neighbor counts.
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        fmt: MatrixArgs,
    },
}

#[derive(Subcommand)]
enum SignatureCmd {
    /// Fit on a labeled training matrix and write the model as JSON.
    Derive {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Probability of sensitivity for each sample of a matrix.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        matrix: PathBuf,
        /// Predict even when the probit fit did not converge.
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        fmt: MatrixArgs,
    },
}

#[derive(Subcommand)]
enum ReportCmd {
    /// Run every check of a manifest.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        /// Report path; `-` for stdout. Defaults to the manifest's output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Suppress the text summary.
        #[arg(long)]
        quiet: bool,
    },
    /// Print a JSON schema.
    Schema {
        #[arg(value_enum)]
        which: SchemaKind,
    },
    /// Check a manifest without running it.
    Validate {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemaKind {
    Manifest,
    Report,
}

fn print_json(v: &impl serde::Serialize) -> Result<(), CliError> {
    let text = canonical_json(v)?;
    std::io::stdout()
        .write_all(text.as_bytes())
        .map_err(|source| CliError::Io { path: "<stdout>".into(), source })
}

fn input(path: &Path, kind: InputKind, fmt: Option<&MatrixArgs>) -> InputSpec {
    InputSpec {
        path: path.to_string_lossy().into_owned(),
        kind,
        format: fmt.and_then(|f| f.format).map(Into::into),
        label_row: fmt.is_some_and(|f| f.label_row),
    }
}

/// Runs an ad hoc manifest whose paths are taken as given.
fn adhoc(inputs: Vec<(&str, InputSpec)>, checks: Vec<CheckSpec>, out: &ReportOut) -> Result<u8, CliError> {
    let manifest = AuditManifest {
        inputs: inputs.into_iter().map(|(n, s)| (n.to_string(), s)).collect(),
        checks,
        output: None,
    };
    let outcome = run_audit(&manifest, Path::new(""));
    eprint!("{}", summary(&outcome.report));
    match &out.out {
        Some(p) => write_report(&outcome.report, p)?,
        None => print_json(&outcome.report)?,
    }
    Ok(outcome.exit_code as u8)
}

fn audit(cmd: AuditCmd) -> Result<u8, CliError> {
    match cmd {
        AuditCmd::Dup { matrix, fmt, threshold, out } => adhoc(
            vec![("matrix", input(&matrix, InputKind::Matrix, Some(&fmt)))],
            vec![CheckSpec::DupColumns { matrix: "matrix".into(), threshold }],
            &out,
        ),
        AuditCmd::Roster { roster, out } => adhoc(
            vec![("roster", input(&roster, InputKind::Roster, None))],
            vec![CheckSpec::Roster { roster: "roster".into() }],
            &out,
        ),
        AuditCmd::Crosstab { a, b } => {
            print_json(&commands::crosstab(&a, &b)?)?;
            Ok(0)
        }
        AuditCmd::Offset { reported, generated, annotation, max_shift, out } => adhoc(
            vec![
                ("reported", input(&reported, InputKind::Signature, None)),
                ("generated", input(&generated, InputKind::Signature, None)),
                ("annotation", input(&annotation, InputKind::Annotation, None)),
            ],
            vec![CheckSpec::Offset {
                reported: "reported".into(),
                generated: "generated".into(),
                annotation: "annotation".into(),
                max_shift,
            }],
            &out,
        ),
        AuditCmd::Dose { records, labels, drug, measure, margin, flat_epsilon, sentinels, out } => {
            let mut checks = vec![CheckSpec::Dose {
                records: "records".into(),
                labels: "labels".into(),
                drug: drug.clone(),
                measure: measure.clone(),
                margin,
            }];
            if let Some(eps) = flat_epsilon {
                checks.push(CheckSpec::FlatResponse {
                    records: "records".into(),
                    drug,
                    measure,
                    epsilon: Some(eps),
                });
            }
            if !sentinels.is_empty() {
                let specs = sentinels
                    .iter()
                    .map(|s| {
                        s.split_once('=')
                            .map(|(id, l)| SentinelSpec {
                                sample_id: id.to_string(),
                                expected: l.to_string(),
                                reason: "given on the command line".into(),
                            })
                            .ok_or_else(|| CliError::Usage(format!("expected SAMPLE=LABEL, got {s:?}")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                checks.push(CheckSpec::Sentinel { labels: "labels".into(), sentinels: specs });
            }
            adhoc(
                vec![
                    ("records", input(&records, InputKind::Sensitivity, None)),
                    ("labels", input(&labels, InputKind::Roster, None)),
                ],
                checks,
                &out,
            )
        }
        AuditCmd::Confound { meta, gap_days, expression, out } => {
            let mut inputs = vec![("meta", input(&meta, InputKind::Meta, None))];
            let mut checks = vec![CheckSpec::Confound { meta: "meta".into(), gap_days }];
            if let Some(e) = &expression {
                inputs.push(("expression", input(e, InputKind::Matrix, None)));
                checks.push(CheckSpec::Blocks { matrix: "expression".into(), threshold: None });
            }
            adhoc(inputs, checks, &out)
        }
    }
}

fn load(path: &Path, fmt: &MatrixArgs) -> Result<forensic_core::model::LabeledMatrix, CliError> {
    let f = commands::matrix_format(path, fmt.format.map(Into::into), fmt.label_row);
    commands::load_matrix(path, &f)
}

fn run_match(args: MatchArgs, axis: MatchAxis) -> Result<u8, CliError> {
    let pipeline: TransformPipeline = args.pipeline.parse()?;
    let q = load(&args.query, &args.fmt)?;
    let r = load(&args.reference, &args.fmt)?;
    print_json(&commands::match_items(&q, &r, &pipeline, axis, args.min_corr)?)?;
    Ok(0)
}

fn report(cmd: ReportCmd) -> Result<u8, CliError> {
    match cmd {
        ReportCmd::Run { manifest, out, quiet } => {
            let (m, outcome) = run_manifest(&manifest)?;
            let target = out.or_else(|| report_path(&m, &manifest));
            match target.as_deref() {
                Some(p) if p != Path::new("-") => {
                    write_report(&outcome.report, p)?;
                    if !quiet {
                        print!("{}", summary(&outcome.report));
                        println!("report written to {}", p.display());
                    }
                }
                _ => {
                    if !quiet {
                        eprint!("{}", summary(&outcome.report));
                    }
                    print_json(&outcome.report)?;
                }
            }
            Ok(outcome.exit_code as u8)
        }
        ReportCmd::Schema { which } => {
            print!(
                "{}",
                match which {
                    SchemaKind::Manifest => MANIFEST_SCHEMA,
                    SchemaKind::Report => REPORT_SCHEMA,
                }
            );
            Ok(0)
        }
        ReportCmd::Validate { manifest } => {
            let m = AuditManifest::load(&manifest)?;
            println!("{}: {} inputs, {} checks", manifest.display(), m.inputs.len(), m.checks.len());
            Ok(0)
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Audit(cmd) => audit(cmd),
        Command::Match(MatchCmd::Rows(a)) => run_match(a, MatchAxis::Rows),
        Command::Match(MatchCmd::Columns(a)) => run_match(a, MatchAxis::Columns),
        Command::Match(MatchCmd::Pipeline { query, reference, fmt }) => {
            print_json(&commands::infer(&load(&query, &fmt)?, &load(&reference, &fmt)?)?)?;
            Ok(0)
        }
        Command::Search(SearchCmd::Groups { panel, target, start, k, trace, fmt }) => {
            let panel = load(&panel, &fmt)?;
            let target = commands::load_signature(&target)?;
            let start = commands::load_labels(&start)?;
            print_json(&commands::search_groups(&panel, &target, &start, k, trace)?)?;
            Ok(0)
        }
        Command::Signature(SignatureCmd::Derive { matrix, k, out, format }) => {
            let m = load(&matrix, &MatrixArgs { format, label_row: true })?;
            let model = commands::derive_signature(&m, k)?;
            match out {
                Some(p) => std::fs::write(&p, canonical_json(&model)?).map_err(|source| CliError::Io { path: p, source })?,
                None => print_json(&model)?,
            }
            Ok(0)
        }
        Command::Signature(SignatureCmd::Predict { model, matrix, force, fmt }) => {
            let model: SignatureModel = serde_json::from_str(&commands::read_text(&model)?)?;
            let probs: BTreeMap<String, f64> = commands::predict_signature(&model, &load(&matrix, &fmt)?, force)?;
            print_json(&probs)?;
            Ok(0)
        }
        Command::Roc { scores } => {
            print_json(&commands::roc(&commands::read_text(&scores)?)?)?;
            Ok(0)
        }
        Command::Combo { rule, batch, normalize, inputs } => {
            let text = batch.as_deref().map(commands::read_text).transpose()?;
            print_json(&commands::combo(&rule, &inputs, text.as_deref(), normalize)?)?;
            Ok(0)
        }
        Command::Report(cmd) => report(cmd),
        Command::Explain { code } => {
            println!("{}", forensic_core::findings::explain(&code)?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("forensic: {e}");
            ExitCode::from(1)
        }
    }
}
