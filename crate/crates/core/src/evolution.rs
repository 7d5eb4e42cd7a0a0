//! Evolution operations, their application to the ontology model, and the
//! cross-representation detection driver: apply each operation in sequence,
//! ask every backend which instances the change leaves inconsistent, and
//! verify the three answers agree.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::finding::{Finding, FindingCode};
use crate::model::OntologyModel;
use crate::term::Iri;
use crate::{oo, sql, typesys};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvolutionOp {
    ChangeDomain { property: Iri, new_domain: Iri },
    DeleteClass { class: Iri },
}

impl EvolutionOp {
    /// The ops-file spelling of the operation.
    pub fn label(&self) -> String {
        match self {
            EvolutionOp::ChangeDomain { property, new_domain } => {
                format!("change-domain {} {}", property.local_name(), new_domain.local_name())
            }
            EvolutionOp::DeleteClass { class } => {
                format!("delete-class {}", class.local_name())
            }
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvolutionError {
    #[error("ops file syntax error at line {line}: {message}")]
    OpSyntax { line: usize, message: String },
    #[error("operation references unknown {kind} '{name}'")]
    UnknownEntity { kind: &'static str, name: String },
    #[error(transparent)]
    Oo(#[from] oo::OoError),
    #[error(transparent)]
    Sql(#[from] sql::SqlError),
}

/// Parse the line-based ops format: `change-domain <property> <class>` or
/// `delete-class <class>`, `#` comments, names as locals or QNames resolved
/// against the document's prefixes.
pub fn parse_ops(
    text: &str,
    prefixes: &std::collections::BTreeMap<String, String>,
) -> Result<Vec<EvolutionOp>, EvolutionError> {
    let resolve = |name: &str, line: usize| -> Result<Iri, EvolutionError> {
        let (prefix, local) = match name.split_once(':') {
            Some((p, l)) => (p, l),
            None => ("", name),
        };
        let ns = prefixes.get(prefix).ok_or(EvolutionError::OpSyntax {
            line,
            message: format!("unknown prefix '{prefix}:'"),
        })?;
        Ok(Iri::new(prefix, local, format!("{ns}{local}")))
    };

    let mut ops = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut words = content.split_whitespace();
        match (words.next(), words.next(), words.next(), words.next()) {
            (Some("change-domain"), Some(p), Some(c), None) => {
                ops.push(EvolutionOp::ChangeDomain {
                    property: resolve(p, line)?,
                    new_domain: resolve(c, line)?,
                });
            }
            (Some("delete-class"), Some(c), None, None) => {
                ops.push(EvolutionOp::DeleteClass { class: resolve(c, line)? });
            }
            (Some(other), ..) => {
                return Err(EvolutionError::OpSyntax {
                    line,
                    message: format!("unknown operation '{other}' or wrong arity"),
                })
            }
            (None, ..) => unreachable!("blank lines filtered above"),
        }
    }
    Ok(ops)
}

/// Apply one operation, producing the evolved model plus warnings about
/// references the change had to adjust. Type assertions on a deleted class
/// stay in the ABox: those stale instances are the detection signal.
pub fn apply_op(
    m: &OntologyModel,
    op: &EvolutionOp,
) -> Result<(OntologyModel, Vec<Finding>), EvolutionError> {
    let mut out = m.clone();
    let mut findings = Vec::new();
    match op {
        EvolutionOp::ChangeDomain { property, new_domain } => {
            if !out.properties.contains_key(property) {
                return Err(EvolutionError::UnknownEntity {
                    kind: "property",
                    name: property.local_name().to_string(),
                });
            }
            if !out.classes.contains_key(new_domain) {
                return Err(EvolutionError::UnknownEntity {
                    kind: "class",
                    name: new_domain.local_name().to_string(),
                });
            }
            out.properties.get_mut(property).expect("checked").domain = Some(new_domain.clone());
        }
        EvolutionOp::DeleteClass { class } => {
            let Some(deleted) = out.classes.shift_remove(class) else {
                return Err(EvolutionError::UnknownEntity {
                    kind: "class",
                    name: class.local_name().to_string(),
                });
            };
            // subclasses inherit all of the deleted class's supers, spliced
            // in place of the deleted edge
            for decl in out.classes.values_mut() {
                if let Some(pos) = decl.supers.iter().position(|s| s == class) {
                    decl.supers.remove(pos);
                    for (offset, sup) in deleted.supers.iter().enumerate() {
                        if !decl.supers.contains(sup) {
                            decl.supers.insert(pos + offset, sup.clone());
                        }
                    }
                }
                if let Some(pos) = decl.disjoint_with.iter().position(|d| d == class) {
                    decl.disjoint_with.remove(pos);
                    findings.push(Finding::warning(
                        FindingCode::DroppedReference,
                        vec![decl.name.clone()],
                        "evolution",
                        format!(
                            "disjointness of '{}' with deleted '{}' dropped",
                            decl.name.local_name(),
                            class.local_name()
                        ),
                    ));
                }
                let before = decl.restrictions.len();
                decl.restrictions.retain(|r| r.target() != class);
                if decl.restrictions.len() < before {
                    findings.push(Finding::warning(
                        FindingCode::DroppedReference,
                        vec![decl.name.clone()],
                        "evolution",
                        format!(
                            "restriction on '{}' targeting deleted '{}' dropped",
                            decl.name.local_name(),
                            class.local_name()
                        ),
                    ));
                }
            }
            let first_super = deleted.supers.iter().find(|s| out.classes.contains_key(*s)).cloned();
            for prop in out.properties.values_mut() {
                for (slot, what) in
                    [(&mut prop.domain, "domain"), (&mut prop.range, "range")]
                {
                    if slot.as_ref() == Some(class) {
                        *slot = first_super.clone();
                        findings.push(Finding::warning(
                            FindingCode::RetargetedProperty,
                            vec![prop.name.clone()],
                            "evolution",
                            match &first_super {
                                Some(s) => format!(
                                    "{what} of '{}' moved from deleted '{}' to '{}'",
                                    prop.name.local_name(),
                                    class.local_name(),
                                    s.local_name()
                                ),
                                None => format!(
                                    "{what} of '{}' referenced deleted root '{}'; now unset",
                                    prop.name.local_name(),
                                    class.local_name()
                                ),
                            },
                        ));
                    }
                }
            }
        }
    }
    Ok((out, findings))
}

/// Per-operation detection results across the three backends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpReport {
    pub op: EvolutionOp,
    pub types: BTreeSet<String>,
    pub oo: BTreeSet<String>,
    pub sql: BTreeSet<String>,
    pub merged: BTreeSet<String>,
    pub agreement: bool,
    pub sql_query: String,
    pub sql_constraint: String,
    /// Warnings gathered while applying the operation and running the
    /// backends.
    pub findings: Vec<Finding>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EvolutionReport {
    pub ops: Vec<OpReport>,
}

impl EvolutionReport {
    pub fn all_agree(&self) -> bool {
        self.ops.iter().all(|o| o.agreement)
    }

    pub fn any_inconsistency(&self) -> bool {
        self.ops.iter().any(|o| !o.merged.is_empty())
    }

    /// The `.report.json` rendering.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Backends<'a> {
            types: &'a BTreeSet<String>,
            oo: &'a BTreeSet<String>,
            sql: &'a BTreeSet<String>,
        }
        #[derive(Serialize)]
        struct Artifacts<'a> {
            sql_query: &'a str,
            sql_constraint: &'a str,
        }
        #[derive(Serialize)]
        struct Op<'a> {
            op: String,
            backends: Backends<'a>,
            merged: &'a BTreeSet<String>,
            agreement: bool,
            artifacts: Artifacts<'a>,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            schema: &'static str,
            ops: Vec<Op<'a>>,
        }
        let doc = Doc {
            schema: "1",
            ops: self
                .ops
                .iter()
                .map(|o| Op {
                    op: o.op.label(),
                    backends: Backends { types: &o.types, oo: &o.oo, sql: &o.sql },
                    merged: &o.merged,
                    agreement: o.agreement,
                    artifacts: Artifacts {
                        sql_query: &o.sql_query,
                        sql_constraint: &o.sql_constraint,
                    },
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("report serializes")
    }
}

/// Instances that newly fail type-checking when the program emitted from
/// the pre-operation model is checked against the post-operation model.
/// Errors already present before the operation are not re-attributed to it.
fn typesys_delta(m_pre: &OntologyModel, m_post: &OntologyModel) -> BTreeSet<String> {
    let (prog, _) = typesys::emit_types(m_pre);
    let before: BTreeSet<_> =
        typesys::typecheck(&prog, m_pre).iter().map(|e| e.key()).collect();
    typesys::typecheck(&prog, m_post)
        .into_iter()
        .filter(|e| !before.contains(&e.key()))
        .flat_map(|e| e.offenders)
        .collect()
}

/// Run the operations in sequence. After each one, every backend computes
/// its inconsistent-individual set against the instance data of the model
/// the operation was applied to.
pub fn detect(m_old: &OntologyModel, ops: &[EvolutionOp]) -> Result<EvolutionReport, EvolutionError> {
    let mut report = EvolutionReport::default();
    let mut current = m_old.clone();
    for op in ops {
        let (next, mut findings) = apply_op(&current, op)?;

        let types = typesys_delta(&current, &next);

        let (mut cm, oo_findings) = oo::emit_class_model(&current);
        findings.extend(oo_findings);
        let (instances, inst_findings) = oo::instantiate(&mut cm, &current)?;
        findings.extend(inst_findings);
        let evolved_cm = oo::evolve_class_model(&cm, &current, op);
        let oo_set = oo::find_inconsistent_objects(&instances, &evolved_cm, op);

        let (_, schemas) = sql::emit_ddl(&current);
        let db = sql::populate(&current, &schemas)?;
        let sql_set = sql::eval_inconsistency(&db, op, &current);
        let sql_query = sql::emit_inconsistency_query(op, &current).render();
        let sql_constraint = sql::emit_evolution_constraints(op, &current);

        let agreement = types == oo_set && oo_set == sql_set;
        let merged: BTreeSet<String> =
            types.union(&oo_set).chain(sql_set.iter()).cloned().collect();

        report.ops.push(OpReport {
            op: op.clone(),
            types,
            oo: oo_set,
            sql: sql_set,
            merged,
            agreement,
            sql_query,
            sql_constraint,
            findings,
        });
        current = next;
    }
    Ok(report)
}
