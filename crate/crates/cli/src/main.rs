//! Batch command-line surface over the ontology compiler: parse a document
//! to canonical triples, check consistency, emit the three views, or run
//! evolution operations and report which instances each view rejects.
//!
//! Exit codes are a stable contract: 0 success (no errors / agreement with
//! empty sets), 1 findings or inconsistencies, 2 backend disagreement,
//! 64 usage error, 65 input syntax or data error, 70 internal failure.
//! Identical invocations produce identical bytes in every artifact.

use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use onto_multirep_core::evolution::{detect, parse_ops, EvolutionError};
use onto_multirep_core::finding::{Finding, Severity};
use onto_multirep_core::model::{build_model, validate_tbox, ModelError, OntologyModel};
use onto_multirep_core::sql;
use onto_multirep_core::term::{Literal, Node, TripleSet};
use onto_multirep_core::turtle::{parse_document, serialize};
use onto_multirep_core::{check_abox, oo, typesys, CheckConfig};

const EXIT_FINDINGS: u8 = 1;
const EXIT_DISAGREEMENT: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_INPUT: u8 = 65;
const EXIT_INTERNAL: u8 = 70;

#[derive(Parser)]
#[command(name = "onto-multirep", version, about = "Ontology to types, objects and tables", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a Turtle document and print its canonical form
    Parse(ParseArgs),
    /// Validate the TBox and check the ABox; exit 1 on errors
    Check(CheckArgs),
    /// Write the selected view artifacts under the output directory
    Emit(EmitArgs),
    /// Apply evolution operations and report per-backend inconsistencies
    Evolve(EvolveArgs),
}

#[derive(Args)]
struct ParseArgs {
    /// Input .ttl/.n3 file
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct CheckArgs {
    input: PathBuf,
    /// Apply domain/range inference before checking (default is strict)
    #[arg(long)]
    infer: bool,
    /// Severity of unsatisfied someValuesFrom restrictions
    #[arg(long, value_enum, default_value_t = SeverityArg::Warning)]
    restriction_severity: SeverityArg,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct EmitArgs {
    input: PathBuf,
    /// Views to emit (comma separated): types, oo, sql
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    target: Vec<Target>,
    /// Output directory
    #[arg(long, default_value = "./out")]
    out: PathBuf,
}

#[derive(Args)]
struct EvolveArgs {
    input: PathBuf,
    /// Operations file (.evo)
    #[arg(long)]
    ops: PathBuf,
    #[arg(long, default_value = "./out")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SeverityArg {
    Warning,
    Error,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    Types,
    Oo,
    Sql,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version are not usage errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(code) => code,
        Err(_) => {
            eprintln!("internal invariant breached; this is a bug");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}

fn run(cli: Cli) -> ExitCode {
    let result = match cli.command {
        Command::Parse(args) => cmd_parse(args),
        Command::Check(args) => cmd_check(args),
        Command::Emit(args) => cmd_emit(args),
        Command::Evolve(args) => cmd_evolve(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", e.message);
            ExitCode::from(e.code)
        }
    }
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::input(format!("i/o error: {e}"))
    }
}

impl From<onto_multirep_core::ParseError> for CliError {
    fn from(e: onto_multirep_core::ParseError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<EvolutionError> for CliError {
    fn from(e: EvolutionError) -> Self {
        CliError::input(e.to_string())
    }
}

fn load(path: &Path) -> Result<TripleSet, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    Ok(parse_document(&text)?)
}

/// Build and TBox-validate; schema errors make the model unusable for the
/// backends, so they end the run.
fn build_valid(ts: &TripleSet) -> Result<(OntologyModel, Vec<Finding>), CliError> {
    let (model, mut findings) = build_model(ts)?;
    let schema_findings = validate_tbox(&model);
    let has_errors = schema_findings.iter().any(Finding::is_error);
    findings.extend(schema_findings);
    if has_errors {
        for f in &findings {
            eprintln!("{}", paint(f));
        }
        return Err(CliError { code: EXIT_FINDINGS, message: "schema validation failed".into() });
    }
    Ok((model, findings))
}

fn color_enabled() -> bool {
    if std::env::var("ONTO_MULTIREP_COLOR").as_deref() == Ok("0") {
        return false;
    }
    std::io::stdout().is_terminal()
}

fn paint(finding: &Finding) -> String {
    if color_enabled() {
        let color = match finding.severity {
            Severity::Error => "\x1b[31m",
            Severity::Warning => "\x1b[33m",
        };
        format!("{color}{finding}\x1b[0m")
    } else {
        finding.to_string()
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into())
}

fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

fn cmd_parse(args: ParseArgs) -> Result<u8, CliError> {
    let ts = load(&args.input)?;
    match args.format {
        Format::Text => print!("{}", serialize(&ts)),
        Format::Json => {
            let node = |n: &Node| -> serde_json::Value {
                match n {
                    Node::Iri(iri) => serde_json::json!({"type": "iri", "value": iri.full()}),
                    Node::Blank(id) => serde_json::json!({"type": "blank", "value": id}),
                    Node::Literal(Literal::String(s)) => {
                        serde_json::json!({"type": "string", "value": s})
                    }
                    Node::Literal(Literal::Integer(n)) => {
                        serde_json::json!({"type": "integer", "value": n})
                    }
                }
            };
            let triples: Vec<serde_json::Value> = ts
                .triples
                .iter()
                .map(|t| {
                    serde_json::json!({
                        "subject": node(&t.subject),
                        "predicate": t.predicate.full(),
                        "object": node(&t.object),
                    })
                })
                .collect();
            let doc = serde_json::json!({"prefixes": ts.prefixes, "triples": triples});
            println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
        }
    }
    Ok(0)
}

fn cmd_check(args: CheckArgs) -> Result<u8, CliError> {
    let ts = load(&args.input)?;
    let (model, mut findings) = build_valid(&ts)?;
    let cfg = CheckConfig {
        infer: args.infer,
        restriction_severity: match args.restriction_severity {
            SeverityArg::Warning => Severity::Warning,
            SeverityArg::Error => Severity::Error,
        },
    };
    findings.extend(check_abox(&model, &cfg));
    match args.format {
        Format::Text => {
            for f in &findings {
                println!("{}", paint(f));
            }
            if findings.is_empty() {
                println!("ok: no findings");
            }
        }
        Format::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(&findings).expect("findings serialize")
            );
        }
    }
    Ok(if findings.iter().any(Finding::is_error) { EXIT_FINDINGS } else { 0 })
}

fn cmd_emit(args: EmitArgs) -> Result<u8, CliError> {
    let ts = load(&args.input)?;
    let (model, findings) = build_valid(&ts)?;
    for f in &findings {
        eprintln!("{}", paint(f));
    }
    let stem = stem(&args.input);
    for target in &args.target {
        match target {
            Target::Types => {
                let (_, text) = typesys::emit_types(&model);
                write_artifact(&args.out, &format!("{stem}.types"), &text)?;
            }
            Target::Oo => {
                let (mut cm, warnings) = oo::emit_class_model(&model);
                for f in &warnings {
                    eprintln!("{}", paint(f));
                }
                let (instances, inst_warnings) =
                    oo::instantiate(&mut cm, &model).map_err(EvolutionError::from)?;
                for f in &inst_warnings {
                    eprintln!("{}", paint(f));
                }
                write_artifact(&args.out, &format!("{stem}.oo.json"), &oo::to_json(&cm, &instances))?;
                write_artifact(&args.out, &format!("{stem}.java.txt"), &oo::render_skeleton(&cm))?;
            }
            Target::Sql => {
                let (mut artifact, schemas) = sql::emit_ddl(&model);
                let db = sql::populate(&model, &schemas).map_err(EvolutionError::from)?;
                artifact.inserts = sql::render_inserts(&db, &schemas);
                write_artifact(&args.out, &format!("{stem}.sql"), &artifact.render())?;
            }
        }
    }
    Ok(0)
}

fn cmd_evolve(args: EvolveArgs) -> Result<u8, CliError> {
    let ts = load(&args.input)?;
    let (model, findings) = build_valid(&ts)?;
    for f in &findings {
        eprintln!("{}", paint(f));
    }
    let ops_text = std::fs::read_to_string(&args.ops)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", args.ops.display())))?;
    let ops = parse_ops(&ops_text, &ts.prefixes)?;
    let report = detect(&model, &ops)?;

    let stem = stem(&args.input);
    write_artifact(&args.out, &format!("{stem}.report.json"), &report.to_json())?;

    // the relational artifact with the per-operation sections attached
    let (mut artifact, schemas) = sql::emit_ddl(&model);
    let db = sql::populate(&model, &schemas).map_err(EvolutionError::from)?;
    artifact.inserts = sql::render_inserts(&db, &schemas);
    for op in &report.ops {
        artifact.queries.push((op.op.label(), op.sql_query.clone()));
        artifact.constraints.push((op.op.label(), op.sql_constraint.clone()));
    }
    write_artifact(&args.out, &format!("{stem}.sql"), &artifact.render())?;

    for op in &report.ops {
        let sets: Vec<String> = op.merged.iter().cloned().collect();
        println!(
            "{}: types={:?} oo={:?} sql={:?} agreement={} merged=[{}]",
            op.op.label(),
            op.types,
            op.oo,
            op.sql,
            op.agreement,
            sets.join(", ")
        );
    }

    if !report.all_agree() {
        Ok(EXIT_DISAGREEMENT)
    } else if report.any_inconsistency() {
        Ok(EXIT_FINDINGS)
    } else {
        Ok(0)
    }
}
