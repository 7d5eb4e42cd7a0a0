//! Type-system view: classes become nominal types, subclassing becomes
//! subtype inclusion (`<=`), properties become function signatures, the
//! ABox becomes constant declarations and applications. Consistency is then
//! ordinary type-checking of the rendered program against a (possibly
//! newer) model.

use std::fmt;
use std::fmt::Write as _;

use indexmap::{IndexMap, IndexSet};

use crate::model::{Fact, FactObject, OntologyModel};
use crate::term::{vocab, Iri, Literal};

/// Synthetic root type for properties lacking a declared domain or range.
pub const ROOT_TYPE: &str = "Thing";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub property: String,
    pub domain: String,
    pub range: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstantDecl {
    pub name: String,
    pub ty: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AppValue {
    Constant(String),
    Int(i64),
    Str(String),
}

impl fmt::Display for AppValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppValue::Constant(c) => f.write_str(c),
            AppValue::Int(n) => write!(f, "{n}"),
            AppValue::Str(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Application {
    pub property: String,
    pub subject: String,
    pub object: AppValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TypeProgram {
    pub type_decls: Vec<String>,
    pub subtype_decls: Vec<(String, String)>,
    pub signatures: Vec<Signature>,
    pub constant_decls: Vec<ConstantDecl>,
    pub applications: Vec<Application>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeErrorKind {
    UndeclaredType,
    SignatureMismatch,
    FunctionalViolation,
    DisjointViolation,
}

impl fmt::Display for TypeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TypeErrorKind::UndeclaredType => "undeclared-type",
            TypeErrorKind::SignatureMismatch => "signature-mismatch",
            TypeErrorKind::FunctionalViolation => "functional-violation",
            TypeErrorKind::DisjointViolation => "disjoint-violation",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Locus {
    Constant { name: String, ty: String },
    Application { property: String, subject: String, object: String },
}

impl fmt::Display for Locus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Locus::Constant { name, ty } => write!(f, "{name} : {ty}"),
            Locus::Application { property, subject, object } => {
                write!(f, "{property}({subject}, {object})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeError {
    pub kind: TypeErrorKind,
    pub locus: Locus,
    /// Constants that failed the check; these are the inconsistent
    /// individuals the error is attributed to.
    pub offenders: Vec<String>,
    pub message: String,
}

impl TypeError {
    /// Identity used when comparing error sets across model versions.
    pub fn key(&self) -> (TypeErrorKind, Locus, Vec<String>) {
        (self.kind, self.locus.clone(), self.offenders.clone())
    }
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ERROR {} at {}: {}", self.kind, self.locus, self.message)
    }
}

fn range_name(range: Option<&Iri>) -> String {
    match range {
        Some(r) if vocab::is_datatype(r.full()) => r.local_name().to_string(),
        Some(r) => r.local_name().to_string(),
        None => ROOT_TYPE.to_string(),
    }
}

/// Project the model onto a type program. Every class becomes a type, every
/// subclass edge a subtype declaration, every property a signature, every
/// individual a constant grouped by its asserted classes, every property
/// assertion an application. The rendering is line-oriented and
/// deterministic.
pub fn emit_types(m: &OntologyModel) -> (TypeProgram, String) {
    let mut prog = TypeProgram::default();

    let needs_root = m
        .properties
        .values()
        .any(|p| p.domain.is_none() || p.range.is_none());
    if needs_root {
        prog.type_decls.push(ROOT_TYPE.to_string());
    }
    for class in m.classes.keys() {
        prog.type_decls.push(class.local_name().to_string());
    }
    for class in m.classes.values() {
        for sup in &class.supers {
            prog.subtype_decls
                .push((class.name.local_name().to_string(), sup.local_name().to_string()));
        }
    }
    for prop in m.properties.values() {
        prog.signatures.push(Signature {
            property: prop.name.local_name().to_string(),
            domain: prop.domain.as_ref().map_or(ROOT_TYPE.to_string(), |d| d.local_name().to_string()),
            range: range_name(prop.range.as_ref()),
        });
    }
    for fact in &m.abox {
        match fact {
            Fact::TypeAssertion { individual, class } => {
                let decl = ConstantDecl {
                    name: individual.local_name().to_string(),
                    ty: class.local_name().to_string(),
                };
                if !prog.constant_decls.contains(&decl) {
                    prog.constant_decls.push(decl);
                }
            }
            Fact::PropAssertion { subject, property, object } => {
                prog.applications.push(Application {
                    property: property.local_name().to_string(),
                    subject: subject.local_name().to_string(),
                    object: match object {
                        FactObject::Individual(o) => AppValue::Constant(o.local_name().to_string()),
                        FactObject::Literal(Literal::Integer(n)) => AppValue::Int(*n),
                        FactObject::Literal(Literal::String(s)) => AppValue::Str(s.clone()),
                    },
                });
            }
        }
    }

    let text = render(&prog);
    (prog, text)
}

fn render(prog: &TypeProgram) -> String {
    let mut out = String::from("// type view\n");
    if !prog.type_decls.is_empty() {
        let _ = writeln!(out, "{} : type;", prog.type_decls.join(", "));
    }
    for (sub, sup) in &prog.subtype_decls {
        let _ = writeln!(out, "{sub} <= {sup};");
    }
    for sig in &prog.signatures {
        let _ = writeln!(out, "{} : {} -> {};", sig.property, sig.domain, sig.range);
    }
    if !prog.constant_decls.is_empty() {
        out.push_str("// constants\n");
        // group by type, keeping first-appearance order of the types
        let mut groups: IndexMap<&str, Vec<&str>> = IndexMap::new();
        for decl in &prog.constant_decls {
            groups.entry(decl.ty.as_str()).or_default().push(decl.name.as_str());
        }
        for (ty, names) in &groups {
            let _ = writeln!(out, "{} : {ty};", names.join(", "));
        }
    }
    if !prog.applications.is_empty() {
        out.push_str("// applications\n");
        for app in &prog.applications {
            let _ = writeln!(out, "{}({}, {});", app.property, app.subject, app.object);
        }
    }
    out
}

/// Type-check a program against a model that may be newer than the one the
/// program was emitted from; the mismatch is exactly what evolution
/// detection looks for.
pub fn typecheck(prog: &TypeProgram, m: &OntologyModel) -> Vec<TypeError> {
    let mut errors = Vec::new();

    let class_by_local = |local: &str| -> Option<&Iri> {
        m.classes.keys().find(|c| c.local_name() == local)
    };
    let prop_by_local = |local: &str| -> Option<&Iri> {
        m.properties.keys().find(|p| p.local_name() == local)
    };

    // declared types per constant, as written in the program
    let mut const_types: IndexMap<&str, Vec<&str>> = IndexMap::new();
    for decl in &prog.constant_decls {
        const_types.entry(decl.name.as_str()).or_default().push(decl.ty.as_str());
    }

    // a constant conforms to a required type when one of its declared types
    // exists in the model and is a subtype of it
    let conforms = |name: &str, required: &str| -> bool {
        let Some(types) = const_types.get(name) else { return false };
        types.iter().any(|ty| {
            let Some(class) = class_by_local(ty) else { return false };
            if required == ROOT_TYPE {
                return true;
            }
            let Some(req) = class_by_local(required) else { return false };
            m.ancestors(class).contains(req)
        })
    };

    for decl in &prog.constant_decls {
        if class_by_local(&decl.ty).is_none() {
            errors.push(TypeError {
                kind: TypeErrorKind::UndeclaredType,
                locus: Locus::Constant { name: decl.name.clone(), ty: decl.ty.clone() },
                offenders: vec![decl.name.clone()],
                message: format!("type '{}' is not declared", decl.ty),
            });
        }
    }

    for app in &prog.applications {
        let locus = Locus::Application {
            property: app.property.clone(),
            subject: app.subject.clone(),
            object: app.object.to_string(),
        };
        let Some(prop_iri) = prop_by_local(&app.property) else {
            errors.push(TypeError {
                kind: TypeErrorKind::UndeclaredType,
                locus,
                offenders: vec![app.subject.clone()],
                message: format!("function '{}' is not declared", app.property),
            });
            continue;
        };
        let prop = &m.properties[prop_iri];

        let domain = prop.domain.as_ref().map_or(ROOT_TYPE, |d| d.local_name());
        if !conforms(&app.subject, domain) {
            errors.push(TypeError {
                kind: TypeErrorKind::SignatureMismatch,
                locus: locus.clone(),
                offenders: vec![app.subject.clone()],
                message: format!(
                    "'{}' is not of type '{domain}', the domain of '{}'",
                    app.subject, app.property
                ),
            });
        }

        match &prop.range {
            None => {}
            Some(r) if vocab::is_datatype(r.full()) => {
                let ok = matches!(
                    (r.full(), &app.object),
                    (vocab::XSD_STRING, AppValue::Str(_)) | (vocab::XSD_INTEGER, AppValue::Int(_))
                );
                if !ok {
                    errors.push(TypeError {
                        kind: TypeErrorKind::SignatureMismatch,
                        locus: locus.clone(),
                        offenders: vec![app.subject.clone()],
                        message: format!(
                            "result of '{}' is not a {} literal",
                            app.property,
                            r.local_name()
                        ),
                    });
                }
            }
            Some(r) => match &app.object {
                AppValue::Constant(obj) => {
                    if !conforms(obj, r.local_name()) {
                        errors.push(TypeError {
                            kind: TypeErrorKind::SignatureMismatch,
                            locus: locus.clone(),
                            offenders: vec![obj.clone()],
                            message: format!(
                                "'{obj}' is not of type '{}', the range of '{}'",
                                r.local_name(),
                                app.property
                            ),
                        });
                    }
                }
                AppValue::Int(_) | AppValue::Str(_) => {
                    errors.push(TypeError {
                        kind: TypeErrorKind::SignatureMismatch,
                        locus: locus.clone(),
                        offenders: vec![app.subject.clone()],
                        message: format!(
                            "literal result of '{}' where type '{}' is required",
                            app.property,
                            r.local_name()
                        ),
                    });
                }
            },
        }

        // functional properties: duplicate applications with distinct results
        if prop.functional {
            let distinct: IndexSet<&AppValue> = prog
                .applications
                .iter()
                .filter(|a| a.property == app.property && a.subject == app.subject)
                .map(|a| &a.object)
                .collect();
            let first = prog
                .applications
                .iter()
                .position(|a| a.property == app.property && a.subject == app.subject);
            if distinct.len() > 1 && first == prog.applications.iter().position(|a| std::ptr::eq(a, app)) {
                errors.push(TypeError {
                    kind: TypeErrorKind::FunctionalViolation,
                    locus,
                    offenders: vec![app.subject.clone()],
                    message: format!(
                        "functional '{}' applied to '{}' with {} distinct results",
                        app.property,
                        app.subject,
                        distinct.len()
                    ),
                });
            }
        }
    }

    // disjointness: a constant declared in two disjoint types
    for (name, types) in &const_types {
        let mut reported = false;
        for (i, a) in types.iter().enumerate() {
            for b in &types[i + 1..] {
                if reported {
                    break;
                }
                let (Some(ca), Some(cb)) = (class_by_local(a), class_by_local(b)) else { continue };
                let up_a = m.ancestors(ca);
                let up_b = m.ancestors(cb);
                let clash = up_a.iter().any(|x| {
                    m.class(x)
                        .map(|d| d.disjoint_with.iter().any(|y| up_b.contains(y)))
                        .unwrap_or(false)
                });
                if clash {
                    errors.push(TypeError {
                        kind: TypeErrorKind::DisjointViolation,
                        locus: Locus::Constant { name: name.to_string(), ty: a.to_string() },
                        offenders: vec![name.to_string()],
                        message: format!("'{name}' is declared in disjoint types '{a}' and '{b}'"),
                    });
                    reported = true;
                }
            }
        }
    }

    errors
}

/// Render type errors one per line, the shape the CLI prints.
pub fn render_errors(errors: &[TypeError]) -> String {
    let mut out = String::new();
    for e in errors {
        let _ = writeln!(out, "{e}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_model;
    use crate::turtle::parse_document;

    fn model_of(doc: &str) -> OntologyModel {
        build_model(&parse_document(doc).unwrap()).unwrap().0
    }

    const DOC: &str = "\
:Person a owl:Class .\n\
:Manager a owl:Class ; rdfs:subClassOf :Person .\n\
:Researcher a owl:Class ; rdfs:subClassOf :Manager .\n\
:Department a owl:Class .\n\
:manage a rdf:Property , owl:FunctionalProperty ; rdfs:domain :Manager ; rdfs:range :Department .\n\
:r4 a :Manager .\n:r6 a :Researcher .\n:v4 a :Department .\n:v6 a :Department .\n\
:r4 :manage :v4 .\n:r6 :manage :v6 .\n";

    #[test]
    fn emitted_text_contains_expected_lines() {
        let m = model_of(DOC);
        let (_, text) = emit_types(&m);
        assert!(text.contains("Researcher <= Manager;"));
        assert!(text.contains("manage : Manager -> Department;"));
        assert!(text.contains("r4 : Manager;"));
        assert!(text.contains("manage(r4, v4);"));
    }

    #[test]
    fn empty_model_renders_header_only() {
        let (_, text) = emit_types(&OntologyModel::default());
        assert_eq!(text, "// type view\n");
    }

    #[test]
    fn emission_is_deterministic() {
        let m = model_of(DOC);
        assert_eq!(emit_types(&m).1, emit_types(&m).1);
    }

    #[test]
    fn clean_program_checks_clean() {
        let m = model_of(DOC);
        let (prog, _) = emit_types(&m);
        assert!(typecheck(&prog, &m).is_empty());
    }

    #[test]
    fn missing_domain_types_over_root() {
        let m = model_of(":p a rdf:Property .\n:x a :C .\n:C a owl:Class .\n:x :p :x .");
        let (prog, text) = emit_types(&m);
        assert!(text.contains("p : Thing -> Thing;"));
        assert!(typecheck(&prog, &m).is_empty());
    }

    #[test]
    fn domain_change_flags_nonconforming_applications() {
        let m = model_of(DOC);
        let (prog, _) = emit_types(&m);
        let mut evolved = m.clone();
        let director = Iri::local("Researcher");
        evolved.properties.get_mut(&Iri::local("manage")).unwrap().domain = Some(director);
        let errors = typecheck(&prog, &evolved);
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].kind, TypeErrorKind::SignatureMismatch);
        assert_eq!(errors[0].offenders, vec!["r4".to_string()]);
    }

    #[test]
    fn undeclared_constant_type_is_reported() {
        let m = model_of(DOC);
        let (prog, _) = emit_types(&m);
        let mut evolved = m.clone();
        evolved.classes.shift_remove(&Iri::local("Manager"));
        let errors = typecheck(&prog, &evolved);
        assert!(errors
            .iter()
            .any(|e| e.kind == TypeErrorKind::UndeclaredType && e.offenders == vec!["r4".to_string()]));
    }

    #[test]
    fn functional_duplicate_is_one_error() {
        let doc = format!("{DOC}:v5 a :Department .\n:r4 :manage :v5 .");
        let m = model_of(&doc);
        let (prog, _) = emit_types(&m);
        let errors = typecheck(&prog, &m);
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].kind, TypeErrorKind::FunctionalViolation);
        assert_eq!(errors[0].offenders, vec!["r4".to_string()]);
    }
}
