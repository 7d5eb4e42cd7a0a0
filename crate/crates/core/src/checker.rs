//! Closed-world conformance checking of the ABox against the TBox. This is
//! the semantics all three backends re-express; the type-system view in
//! particular must report the same subjects for the same codes.

use indexmap::IndexMap;

use crate::finding::{Finding, FindingCode, Severity};
use crate::model::{Fact, FactObject, OntologyModel};
use crate::term::{vocab, Iri, Literal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckConfig {
    /// Apply domain/range type inference before checking instead of the
    /// default strict declared-types-only reading.
    pub infer: bool,
    /// Severity of an unsatisfied someValuesFrom restriction under the
    /// closed world. OWL's open world would not flag it at all, so the
    /// default stays a warning; promote to error to make `check` fail.
    pub restriction_severity: Severity,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { infer: false, restriction_severity: Severity::Warning }
    }
}

/// Add `TypeAssertion(subject, domain(p))` and `TypeAssertion(object,
/// range(p))` for every property assertion whose property declares a
/// domain/range. Never removes facts; idempotent.
pub fn infer_domain_types(m: &OntologyModel) -> OntologyModel {
    let mut out = m.clone();
    for fact in &m.abox {
        let Fact::PropAssertion { subject, property, object } = fact else { continue };
        let Some(prop) = m.property(property) else { continue };
        if let Some(domain) = &prop.domain {
            add_type_assertion(&mut out, subject.clone(), domain.clone());
        }
        if let (Some(range), FactObject::Individual(o)) = (&prop.range, object) {
            if !vocab::is_datatype(range.full()) {
                add_type_assertion(&mut out, o.clone(), range.clone());
            }
        }
    }
    out
}

fn add_type_assertion(m: &mut OntologyModel, individual: Iri, class: Iri) {
    let fact = Fact::TypeAssertion { individual, class };
    if !m.abox.contains(&fact) {
        m.abox.push(fact);
    }
}

/// True when some declared class of the individual is a subtype of
/// `required`. Declared classes missing from the model confer nothing.
fn conforms_to(m: &OntologyModel, individual: &Iri, required: &Iri) -> bool {
    m.declared_classes(individual)
        .iter()
        .filter(|c| m.classes.contains_key(*c))
        .any(|c| m.ancestors(c).contains(required))
}

/// Closed-world conformance findings for every fact in the ABox.
///
/// Covers: type assertions on undeclared classes, domain/range signature
/// conformance, functional-property violations, disjointness violations and
/// unsatisfied someValuesFrom restrictions.
pub fn check_abox(m: &OntologyModel, cfg: &CheckConfig) -> Vec<Finding> {
    let inferred;
    let m = if cfg.infer {
        inferred = infer_domain_types(m);
        &inferred
    } else {
        m
    };

    let mut findings = Vec::new();

    // per-fact checks, in ABox order
    for fact in &m.abox {
        match fact {
            Fact::TypeAssertion { individual, class } => {
                if !m.classes.contains_key(class) {
                    findings.push(Finding::error(
                        FindingCode::UndeclaredType,
                        vec![individual.clone()],
                        "ir",
                        format!(
                            "'{}' is asserted in class '{}', which is not declared",
                            individual.local_name(),
                            class.local_name()
                        ),
                    ));
                }
            }
            Fact::PropAssertion { subject, property, object } => {
                let Some(prop) = m.property(property) else { continue };
                if let Some(domain) = &prop.domain {
                    if m.classes.contains_key(domain) && !conforms_to(m, subject, domain) {
                        findings.push(Finding::error(
                            FindingCode::SignatureMismatch,
                            vec![subject.clone()],
                            "ir",
                            format!(
                                "'{}' is not a '{}', the domain of '{}'",
                                subject.local_name(),
                                domain.local_name(),
                                property.local_name()
                            ),
                        ));
                    }
                }
                if let Some(range) = &prop.range {
                    check_range(m, &mut findings, subject, property, object, range);
                }
            }
        }
    }

    // functional properties: at most one distinct object per subject
    let mut values: IndexMap<(Iri, Iri), Vec<&FactObject>> = IndexMap::new();
    for fact in &m.abox {
        if let Fact::PropAssertion { subject, property, object } = fact {
            if m.property(property).is_some_and(|p| p.functional) {
                values.entry((subject.clone(), property.clone())).or_default().push(object);
            }
        }
    }
    for ((subject, property), objects) in &values {
        if objects.len() > 1 {
            findings.push(Finding::error(
                FindingCode::FunctionalViolation,
                vec![subject.clone()],
                "ir",
                format!(
                    "functional property '{}' has {} distinct values for '{}'",
                    property.local_name(),
                    objects.len(),
                    subject.local_name()
                ),
            ));
        }
    }

    // disjointness over effective types (declared classes and ancestors)
    for individual in m.individuals() {
        let declared: Vec<Iri> = m
            .declared_classes(&individual)
            .into_iter()
            .filter(|c| m.classes.contains_key(c))
            .collect();
        let mut reported = false;
        for (i, a) in declared.iter().enumerate() {
            for b in &declared[i + 1..] {
                if reported {
                    break;
                }
                let up_a = m.ancestors(a);
                let up_b = m.ancestors(b);
                let clash = up_a.iter().any(|x| {
                    m.class(x)
                        .map(|d| d.disjoint_with.iter().any(|y| up_b.contains(y)))
                        .unwrap_or(false)
                });
                if clash {
                    findings.push(Finding::error(
                        FindingCode::DisjointViolation,
                        vec![individual.clone()],
                        "ir",
                        format!(
                            "'{}' is asserted in disjoint classes '{}' and '{}'",
                            individual.local_name(),
                            a.local_name(),
                            b.local_name()
                        ),
                    ));
                    reported = true;
                }
            }
        }
    }

    // closed-world someValuesFrom: a required value must actually be there
    for individual in m.individuals() {
        let mut effective: Vec<Iri> = Vec::new();
        for c in m.declared_classes(&individual) {
            if m.classes.contains_key(&c) {
                for a in m.ancestors(&c) {
                    if !effective.contains(&a) {
                        effective.push(a);
                    }
                }
            }
        }
        for class in &effective {
            let Some(decl) = m.class(class) else { continue };
            for r in &decl.restrictions {
                let satisfied = m.abox.iter().any(|f| match f {
                    Fact::PropAssertion { subject, property, object } => {
                        subject == &individual
                            && property == &r.on_property
                            && object
                                .as_individual()
                                .is_some_and(|o| conforms_to(m, o, r.target()))
                    }
                    _ => false,
                });
                if !satisfied {
                    findings.push(Finding {
                        severity: cfg.restriction_severity,
                        code: FindingCode::RestrictionUnsatisfied,
                        subjects: vec![individual.clone()],
                        backend: "ir",
                        message: format!(
                            "'{}' is a '{}' but has no '{}' value of class '{}'",
                            individual.local_name(),
                            class.local_name(),
                            r.on_property.local_name(),
                            r.target().local_name()
                        ),
                    });
                }
            }
        }
    }

    findings
}

fn check_range(
    m: &OntologyModel,
    findings: &mut Vec<Finding>,
    subject: &Iri,
    property: &Iri,
    object: &FactObject,
    range: &Iri,
) {
    if vocab::is_datatype(range.full()) {
        let ok = matches!(
            (range.full(), object),
            (vocab::XSD_STRING, FactObject::Literal(Literal::String(_)))
                | (vocab::XSD_INTEGER, FactObject::Literal(Literal::Integer(_)))
        );
        if !ok {
            findings.push(Finding::error(
                FindingCode::SignatureMismatch,
                vec![subject.clone()],
                "ir",
                format!(
                    "value of '{}' on '{}' is not a {} literal",
                    property.local_name(),
                    subject.local_name(),
                    range.local_name()
                ),
            ));
        }
        return;
    }
    if !m.classes.contains_key(range) {
        return; // dangling range is a TBox finding, not an instance one
    }
    match object {
        FactObject::Individual(o) => {
            if !conforms_to(m, o, range) {
                findings.push(Finding::error(
                    FindingCode::SignatureMismatch,
                    vec![o.clone()],
                    "ir",
                    format!(
                        "'{}' is not a '{}', the range of '{}'",
                        o.local_name(),
                        range.local_name(),
                        property.local_name()
                    ),
                ));
            }
        }
        FactObject::Literal(_) => {
            findings.push(Finding::error(
                FindingCode::SignatureMismatch,
                vec![subject.clone()],
                "ir",
                format!(
                    "literal value of '{}' on '{}' where class '{}' is required",
                    property.local_name(),
                    subject.local_name(),
                    range.local_name()
                ),
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_model;
    use crate::turtle::parse_document;

    fn model_of(doc: &str) -> OntologyModel {
        build_model(&parse_document(doc).unwrap()).unwrap().0
    }

    const SCHEMA: &str = "\
:Person a owl:Class .\n\
:Manager a owl:Class ; rdfs:subClassOf :Person .\n\
:Trainee a owl:Class ; rdfs:subClassOf :Person .\n\
:Department a owl:Class .\n\
:work a rdf:Property , owl:FunctionalProperty ; rdfs:domain :Person ; rdfs:range :Department .\n";

    #[test]
    fn empty_abox_is_clean() {
        let m = model_of(SCHEMA);
        assert!(check_abox(&m, &CheckConfig::default()).is_empty());
    }

    #[test]
    fn disjoint_double_membership_is_one_error() {
        let doc = format!("{SCHEMA}:Manager owl:disjointWith :Trainee .\n:x a :Manager .\n:x a :Trainee .");
        let m = model_of(&doc);
        let findings = check_abox(&m, &CheckConfig::default());
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].code, FindingCode::DisjointViolation);
        assert_eq!(findings[0].subjects, vec![Iri::local("x")]);
    }

    #[test]
    fn functional_violation_is_one_error_per_subject_property() {
        let doc = format!("{SCHEMA}:x a :Person .\n:v1 a :Department .\n:v2 a :Department .\n:x :work :v1 .\n:x :work :v2 .");
        let m = model_of(&doc);
        let findings = check_abox(&m, &CheckConfig::default());
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].code, FindingCode::FunctionalViolation);
        assert_eq!(findings[0].subjects, vec![Iri::local("x")]);
    }

    #[test]
    fn domain_mismatch_names_the_subject() {
        let doc = format!("{SCHEMA}:v a :Department .\n:x a :Department .\n:x :work :v .");
        let m = model_of(&doc);
        let findings = check_abox(&m, &CheckConfig::default());
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].code, FindingCode::SignatureMismatch);
        assert_eq!(findings[0].subjects, vec![Iri::local("x")]);
    }

    #[test]
    fn undeclared_class_assertion_is_flagged() {
        let m = model_of(":x a :Ghost .");
        let findings = check_abox(&m, &CheckConfig::default());
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].code, FindingCode::UndeclaredType);
    }

    #[test]
    fn restriction_defaults_to_warning_and_can_be_promoted() {
        let doc = "\
:Computer a owl:Class .\n:Trainee a owl:Class .\n:Department a owl:Class .\n\
:studyAmong a rdf:Property ; rdfs:domain :Trainee ; rdfs:range :Department .\n\
:CT a owl:Class ; rdfs:subClassOf :Trainee ; rdfs:subClassOf [ a owl:Restriction ; owl:onProperty :studyAmong ; owl:someValuesFrom :Computer ] .\n\
:x a :CT .";
        let m = model_of(doc);
        let findings = check_abox(&m, &CheckConfig::default());
        assert_eq!(findings.len(), 1);
        assert_eq!(findings[0].code, FindingCode::RestrictionUnsatisfied);
        assert_eq!(findings[0].severity, Severity::Warning);
        let strict = CheckConfig { restriction_severity: Severity::Error, ..Default::default() };
        assert!(check_abox(&m, &strict)[0].is_error());
    }

    #[test]
    fn inference_adds_domain_types_and_is_idempotent() {
        let doc = "\
:Trainee a owl:Class .\n:Department a owl:Class .\n\
:studyAmong a rdf:Property ; rdfs:domain :Trainee ; rdfs:range :Department .\n\
:x :studyAmong :v .";
        let m = model_of(doc);
        let once = infer_domain_types(&m);
        assert!(once.abox.contains(&Fact::TypeAssertion {
            individual: Iri::local("x"),
            class: Iri::local("Trainee"),
        }));
        assert!(once.abox.contains(&Fact::TypeAssertion {
            individual: Iri::local("v"),
            class: Iri::local("Department"),
        }));
        let twice = infer_domain_types(&once);
        assert_eq!(once.abox, twice.abox);
        // strict mode flags the untyped subject; inferring mode accepts it
        assert!(!check_abox(&m, &CheckConfig::default()).is_empty());
        assert!(check_abox(&m, &CheckConfig { infer: true, ..Default::default() }).is_empty());
    }

    #[test]
    fn infer_on_model_without_prop_assertions_is_identity() {
        let m = model_of(":x a :Ghost .");
        assert_eq!(infer_domain_types(&m), m);
    }
}
