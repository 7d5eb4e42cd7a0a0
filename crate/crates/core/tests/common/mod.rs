//! Shared test support: the bundled example, independent oracles and a
//! generator for small random models.
//!
//! The oracles deliberately avoid the library's query paths. Subtyping is
//! recomputed as a Warshall closure over an adjacency matrix, conformance
//! as nested loops over facts and axioms.
#![allow(dead_code)] // each test target uses a different slice of this module

use std::collections::{BTreeMap, BTreeSet};

use onto_multirep_core::evolution::EvolutionOp;
use onto_multirep_core::finding::{Finding, Severity};
use onto_multirep_core::model::{
    build_model, ClassDecl, Fact, FactObject, OntologyModel, PropertyDecl, Restriction,
    RestrictionKind,
};
use onto_multirep_core::term::{vocab, Iri, Literal};
use onto_multirep_core::turtle::parse_document;
use onto_multirep_core::CheckConfig;

use proptest::prelude::*;

pub const EXAMPLE_TTL: &str =
    include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/personnel.ttl"));
pub const EXAMPLE_EVO: &str =
    include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/personnel.evo"));

pub fn example_model() -> OntologyModel {
    let ts = parse_document(EXAMPLE_TTL).expect("fixture parses");
    build_model(&ts).expect("fixture builds").0
}

/// Name in the bundled example's namespace.
pub fn ex(name: &str) -> Iri {
    Iri::new("", name, format!("http://example.org/personnel#{name}"))
}

// ---------------------------------------------------------------------
// reachability oracle: Warshall closure over the superclass adjacency
// ---------------------------------------------------------------------

/// `closure[a]` contains every class reachable from `a` through superclass
/// edges, including `a` itself.
pub fn reachability_closure(m: &OntologyModel) -> BTreeMap<String, BTreeSet<String>> {
    let names: Vec<String> = m.classes.keys().map(|c| c.local_name().to_string()).collect();
    let index: BTreeMap<&str, usize> =
        names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    let n = names.len();
    let mut reach = vec![vec![false; n]; n];
    for (i, _) in names.iter().enumerate() {
        reach[i][i] = true;
    }
    for class in m.classes.values() {
        let i = index[class.name.local_name()];
        for s in &class.supers {
            if let Some(&j) = index.get(s.local_name()) {
                reach[i][j] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if reach[i][k] && reach[k][j] {
                    reach[i][j] = true;
                }
            }
        }
    }
    names
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let set = names
                .iter()
                .enumerate()
                .filter(|(j, _)| reach[i][*j])
                .map(|(_, b)| b.clone())
                .collect();
            (a.clone(), set)
        })
        .collect()
}

// ---------------------------------------------------------------------
// brute-force conformance oracle
// ---------------------------------------------------------------------

/// Normal form for comparing finding sets: (severity, code string, sorted
/// subject locals), sorted.
pub fn normalize_findings(findings: &[Finding]) -> Vec<(Severity, String, Vec<String>)> {
    let mut out: Vec<(Severity, String, Vec<String>)> = findings
        .iter()
        .map(|f| {
            let mut subjects: Vec<String> =
                f.subjects.iter().map(|s| s.local_name().to_string()).collect();
            subjects.sort();
            (f.severity, f.code.to_string(), subjects)
        })
        .collect();
    out.sort();
    out
}

/// Re-derive the conformance findings by nested loops over facts and
/// axioms, using the Warshall closure for subtyping.
pub fn brute_force_check(
    m: &OntologyModel,
    cfg: &CheckConfig,
) -> Vec<(Severity, String, Vec<String>)> {
    let closure = reachability_closure(m);
    let class_names: BTreeSet<String> =
        m.classes.keys().map(|c| c.local_name().to_string()).collect();
    let reaches = |a: &str, b: &str| -> bool {
        closure.get(a).is_some_and(|s| s.contains(b))
    };
    let declared = |individual: &Iri| -> Vec<String> {
        let mut out = Vec::new();
        for fact in &m.abox {
            if let Fact::TypeAssertion { individual: i, class } = fact {
                if i == individual {
                    let name = class.local_name().to_string();
                    if !out.contains(&name) {
                        out.push(name);
                    }
                }
            }
        }
        out
    };
    let conforms = |individual: &Iri, required: &str| -> bool {
        declared(individual)
            .iter()
            .any(|c| class_names.contains(c) && reaches(c, required))
    };

    let mut out = Vec::new();
    let mut push = |sev: Severity, code: &str, subjects: Vec<String>| {
        let mut subjects = subjects;
        subjects.sort();
        out.push((sev, code.to_string(), subjects));
    };

    for fact in &m.abox {
        match fact {
            Fact::TypeAssertion { individual, class } => {
                if !class_names.contains(class.local_name()) {
                    push(
                        Severity::Error,
                        "undeclared-type",
                        vec![individual.local_name().to_string()],
                    );
                }
            }
            Fact::PropAssertion { subject, property, object } => {
                let Some(prop) = m.properties.get(property) else { continue };
                if let Some(domain) = &prop.domain {
                    if class_names.contains(domain.local_name())
                        && !conforms(subject, domain.local_name())
                    {
                        push(
                            Severity::Error,
                            "signature-mismatch",
                            vec![subject.local_name().to_string()],
                        );
                    }
                }
                if let Some(range) = &prop.range {
                    if vocab::is_datatype(range.full()) {
                        let ok = matches!(
                            (range.full(), object),
                            (vocab::XSD_STRING, FactObject::Literal(Literal::String(_)))
                                | (vocab::XSD_INTEGER, FactObject::Literal(Literal::Integer(_)))
                        );
                        if !ok {
                            push(
                                Severity::Error,
                                "signature-mismatch",
                                vec![subject.local_name().to_string()],
                            );
                        }
                    } else if class_names.contains(range.local_name()) {
                        match object {
                            FactObject::Individual(o) => {
                                if !conforms(o, range.local_name()) {
                                    push(
                                        Severity::Error,
                                        "signature-mismatch",
                                        vec![o.local_name().to_string()],
                                    );
                                }
                            }
                            FactObject::Literal(_) => push(
                                Severity::Error,
                                "signature-mismatch",
                                vec![subject.local_name().to_string()],
                            ),
                        }
                    }
                }
            }
        }
    }

    // functional violations: count distinct objects per (subject, property)
    let mut seen_pairs: Vec<(String, String)> = Vec::new();
    for fact in &m.abox {
        let Fact::PropAssertion { subject, property, .. } = fact else { continue };
        let Some(prop) = m.properties.get(property) else { continue };
        if !prop.functional {
            continue;
        }
        let pair = (subject.local_name().to_string(), property.local_name().to_string());
        if seen_pairs.contains(&pair) {
            continue;
        }
        seen_pairs.push(pair);
        let mut distinct: Vec<&FactObject> = Vec::new();
        for other in &m.abox {
            if let Fact::PropAssertion { subject: s2, property: p2, object: o2 } = other {
                if s2 == subject && p2 == property && !distinct.contains(&o2) {
                    distinct.push(o2);
                }
            }
        }
        if distinct.len() > 1 {
            push(
                Severity::Error,
                "functional-violation",
                vec![subject.local_name().to_string()],
            );
        }
    }

    // disjointness: first clashing pair per individual
    let disjoint_pairs: BTreeSet<(String, String)> = m
        .classes
        .values()
        .flat_map(|c| {
            c.disjoint_with
                .iter()
                .map(|d| (c.name.local_name().to_string(), d.local_name().to_string()))
        })
        .collect();
    for individual in ordered_individuals(m) {
        let declared = declared(&individual);
        let mut clash = false;
        'outer: for (i, a) in declared.iter().enumerate() {
            for b in &declared[i + 1..] {
                if !class_names.contains(a) || !class_names.contains(b) {
                    continue;
                }
                for x in &closure[a] {
                    for y in &closure[b] {
                        if disjoint_pairs.contains(&(x.clone(), y.clone())) {
                            clash = true;
                            break 'outer;
                        }
                    }
                }
            }
        }
        if clash {
            push(
                Severity::Error,
                "disjoint-violation",
                vec![individual.local_name().to_string()],
            );
        }
    }

    // closed-world someValuesFrom
    for individual in ordered_individuals(m) {
        let mut effective: Vec<String> = Vec::new();
        for c in declared(&individual) {
            if class_names.contains(&c) {
                for a in &closure[&c] {
                    if !effective.contains(a) {
                        effective.push(a.clone());
                    }
                }
            }
        }
        for class in &effective {
            let decl = m
                .classes
                .values()
                .find(|c| c.name.local_name() == class.as_str())
                .expect("effective classes are declared");
            for r in &decl.restrictions {
                let mut satisfied = false;
                for fact in &m.abox {
                    if let Fact::PropAssertion { subject, property, object } = fact {
                        if subject == &individual
                            && property == &r.on_property
                            && object
                                .as_individual()
                                .is_some_and(|o| conforms(o, r.target().local_name()))
                        {
                            satisfied = true;
                        }
                    }
                }
                if !satisfied {
                    push(
                        cfg.restriction_severity,
                        "restriction-unsatisfied",
                        vec![individual.local_name().to_string()],
                    );
                }
            }
        }
    }

    out.sort();
    out
}

fn ordered_individuals(m: &OntologyModel) -> Vec<Iri> {
    let mut out: Vec<Iri> = Vec::new();
    for fact in &m.abox {
        match fact {
            Fact::TypeAssertion { individual, .. } => {
                if !out.contains(individual) {
                    out.push(individual.clone());
                }
            }
            Fact::PropAssertion { subject, object, .. } => {
                if !out.contains(subject) {
                    out.push(subject.clone());
                }
                if let FactObject::Individual(o) = object {
                    if !out.contains(o) {
                        out.push(o.clone());
                    }
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------
// semantic oracle for evolution detection
// ---------------------------------------------------------------------

/// Which instances does one operation leave inconsistent, derived directly
/// from the evolution semantics: a class deletion strands every instance
/// asserted in that class; a domain change strands every subject of the
/// property whose class no longer reaches the new domain.
pub fn evolution_oracle(m: &OntologyModel, op: &EvolutionOp) -> BTreeSet<String> {
    let closure = reachability_closure(m);
    let mut out = BTreeSet::new();
    match op {
        EvolutionOp::DeleteClass { class } => {
            for fact in &m.abox {
                if let Fact::TypeAssertion { individual, class: c } = fact {
                    if c == class {
                        out.insert(individual.local_name().to_string());
                    }
                }
            }
        }
        EvolutionOp::ChangeDomain { property, new_domain } => {
            for fact in &m.abox {
                let Fact::PropAssertion { subject, property: p, .. } = fact else { continue };
                if p != property {
                    continue;
                }
                let reaches_new = m.abox.iter().any(|f| {
                    matches!(f, Fact::TypeAssertion { individual, class }
                        if individual == subject
                            && closure
                                .get(class.local_name())
                                .is_some_and(|s| s.contains(new_domain.local_name())))
                });
                if !reaches_new {
                    out.insert(subject.local_name().to_string());
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------
// random small models
// ---------------------------------------------------------------------

/// Blueprint for a small random model; all index fields are reduced modulo
/// the relevant list length when materialized.
#[derive(Debug, Clone)]
pub struct ModelSeed {
    pub n_classes: usize,
    /// one entry per class above the first: Some(parent index among
    /// earlier classes)
    pub parents: Vec<Option<usize>>,
    pub disjoint: Option<(usize, usize)>,
    /// (domain idx, range choice, functional); range choice 0..n = class,
    /// n = integer datatype
    pub props: Vec<(usize, usize, bool)>,
    /// one class index per individual
    pub individual_classes: Vec<usize>,
    /// (property idx, subject idx, object idx) — materialized only when a
    /// conforming choice exists
    pub prop_facts: Vec<(usize, usize, usize)>,
    /// extra, possibly non-conforming material for checker tests
    pub rogue_type_fact: bool,
    pub rogue_prop_fact: Option<(usize, usize, usize)>,
    pub extra_types: Vec<(usize, usize)>,
    pub restriction: Option<(usize, usize, usize)>,
}

pub fn seed_strategy(conforming: bool) -> impl Strategy<Value = ModelSeed> {
    let rogue = if conforming {
        (Just(false), proptest::option::of((0usize..3, 0usize..8, 0usize..8)).prop_map(|_| None))
            .boxed()
    } else {
        (any::<bool>(), proptest::option::of((0usize..3, 0usize..8, 0usize..8))).boxed()
    };
    let extra_types = if conforming {
        Just(Vec::new()).boxed()
    } else {
        proptest::collection::vec((0usize..8, 0usize..6), 0..3).boxed()
    };
    let restriction = if conforming {
        Just(None).boxed()
    } else {
        proptest::option::of((0usize..6, 0usize..3, 0usize..6)).boxed()
    };
    (
        1usize..=6,
        proptest::collection::vec(proptest::option::of(0usize..6), 0..6),
        proptest::option::of((0usize..6, 0usize..6)),
        proptest::collection::vec((0usize..6, 0usize..7, any::<bool>()), 0..=3),
        proptest::collection::vec(0usize..6, 1..=5),
        proptest::collection::vec((0usize..3, 0usize..8, 0usize..8), 0..=6),
        rogue,
        extra_types,
        restriction,
    )
        .prop_map(
            |(
                n_classes,
                parents,
                disjoint,
                props,
                individual_classes,
                prop_facts,
                (rogue_type_fact, rogue_prop_fact),
                extra_types,
                restriction,
            )| ModelSeed {
                n_classes,
                parents,
                disjoint,
                props,
                individual_classes,
                prop_facts,
                rogue_type_fact,
                rogue_prop_fact,
                extra_types,
                restriction,
            },
        )
}

fn class_iri(i: usize) -> Iri {
    Iri::local(&format!("C{i}"))
}

fn prop_iri(i: usize) -> Iri {
    Iri::local(&format!("p{i}"))
}

fn individual_iri(i: usize) -> Iri {
    Iri::local(&format!("x{i}"))
}

/// Materialize a seed into a model. With `conforming` the ABox respects
/// every axiom: individuals carry exactly one type, property subjects and
/// objects are drawn from the domain/range subtrees, functional properties
/// get at most one value per subject.
pub fn materialize(seed: &ModelSeed, conforming: bool) -> OntologyModel {
    let mut m = OntologyModel::default();
    let n = seed.n_classes;

    for i in 0..n {
        let name = class_iri(i);
        let supers = if i == 0 {
            Vec::new()
        } else {
            match seed.parents.get(i - 1).copied().flatten() {
                Some(p) => vec![class_iri(p % i)],
                None => Vec::new(),
            }
        };
        m.classes.insert(
            name.clone(),
            ClassDecl { name, supers, disjoint_with: Vec::new(), restrictions: Vec::new(), complete: false },
        );
    }

    // disjointness only between unrelated classes, symmetric
    if let Some((a, b)) = seed.disjoint {
        let (a, b) = (a % n, b % n);
        if a != b {
            let closure = reachability_closure(&m);
            let (ca, cb) = (class_iri(a), class_iri(b));
            let related = closure[ca.local_name()].contains(cb.local_name())
                || closure[cb.local_name()].contains(ca.local_name());
            if !related {
                m.classes.get_mut(&ca).unwrap().disjoint_with.push(cb.clone());
                m.classes.get_mut(&cb).unwrap().disjoint_with.push(ca);
            }
        }
    }

    for (i, (domain, range_choice, functional)) in seed.props.iter().enumerate() {
        let name = prop_iri(i);
        let range = if *range_choice >= n {
            Iri::new("xsd", "integer", vocab::XSD_INTEGER)
        } else {
            class_iri(*range_choice)
        };
        m.properties.insert(
            name.clone(),
            PropertyDecl {
                name,
                supers: Vec::new(),
                domain: Some(class_iri(domain % n)),
                range: Some(range),
                functional: *functional,
            },
        );
    }

    if let Some((class, prop, target)) = seed.restriction {
        if !seed.props.is_empty() {
            let class = class_iri(class % n);
            let r = Restriction {
                on_property: prop_iri(prop % seed.props.len()),
                kind: RestrictionKind::SomeValuesFrom(class_iri(target % n)),
            };
            m.classes.get_mut(&class).unwrap().restrictions.push(r);
        }
    }

    // one type assertion per individual
    for (i, class) in seed.individual_classes.iter().enumerate() {
        m.abox.push(Fact::TypeAssertion {
            individual: individual_iri(i),
            class: class_iri(class % n),
        });
    }
    if !conforming {
        for (ind, class) in &seed.extra_types {
            let fact = Fact::TypeAssertion {
                individual: individual_iri(ind % seed.individual_classes.len().max(1)),
                class: class_iri(class % n),
            };
            if !m.abox.contains(&fact) {
                m.abox.push(fact);
            }
        }
        if seed.rogue_type_fact {
            m.abox.push(Fact::TypeAssertion {
                individual: individual_iri(0),
                class: Iri::local("Ghost"),
            });
        }
    }

    let closure = reachability_closure(&m);
    let n_ind = seed.individual_classes.len();
    // snapshot of each individual's first asserted class; type assertions
    // are all in place before property facts are added
    let types_snapshot: Vec<Option<String>> = (0..n_ind)
        .map(|ind| {
            m.abox.iter().find_map(|f| match f {
                Fact::TypeAssertion { individual, class } => (individual == &individual_iri(ind))
                    .then(|| class.local_name().to_string()),
                _ => None,
            })
        })
        .collect();
    let class_of = |ind: usize| -> Option<String> { types_snapshot.get(ind).cloned().flatten() };

    for (prop, subj, obj) in &seed.prop_facts {
        if seed.props.is_empty() || n_ind == 0 {
            break;
        }
        let prop_idx = prop % seed.props.len();
        let prop_name = prop_iri(prop_idx);
        let decl = m.properties[&prop_name].clone();
        let (subject, object) = if conforming {
            // pick a conforming subject: an individual below the domain
            let domain = decl.domain.as_ref().unwrap().local_name();
            let candidates: Vec<usize> = (0..n_ind)
                .filter(|i| {
                    class_of(*i).is_some_and(|c| closure[&c].contains(domain))
                })
                .collect();
            if candidates.is_empty() {
                continue;
            }
            let subject = candidates[subj % candidates.len()];
            // at most one value per subject of a functional property
            if decl.functional {
                let already = m.abox.iter().any(|f| {
                    matches!(f, Fact::PropAssertion { subject: s, property: p, .. }
                        if s == &individual_iri(subject) && p == &prop_name)
                });
                if already {
                    continue;
                }
            }
            let object = match &decl.range {
                Some(r) if vocab::is_datatype(r.full()) => {
                    FactObject::Literal(Literal::Integer(*obj as i64))
                }
                Some(r) => {
                    let targets: Vec<usize> = (0..n_ind)
                        .filter(|i| {
                            class_of(*i)
                                .is_some_and(|c| closure[&c].contains(r.local_name()))
                        })
                        .collect();
                    if targets.is_empty() {
                        continue;
                    }
                    FactObject::Individual(individual_iri(targets[obj % targets.len()]))
                }
                None => continue,
            };
            (subject, object)
        } else {
            let object = match &decl.range {
                Some(r) if vocab::is_datatype(r.full()) => {
                    FactObject::Literal(Literal::Integer(*obj as i64))
                }
                _ => FactObject::Individual(individual_iri(obj % n_ind)),
            };
            (subj % n_ind, object)
        };
        let fact = Fact::PropAssertion {
            subject: individual_iri(subject),
            property: prop_name,
            object,
        };
        if !m.abox.contains(&fact) {
            m.abox.push(fact);
        }
    }

    if !conforming {
        if let Some((prop, subj, obj)) = seed.rogue_prop_fact {
            if !seed.props.is_empty() && n_ind > 0 {
                let fact = Fact::PropAssertion {
                    subject: individual_iri(subj % n_ind),
                    property: prop_iri(prop % seed.props.len()),
                    object: FactObject::Individual(individual_iri(obj % n_ind)),
                };
                if !m.abox.contains(&fact) {
                    m.abox.push(fact);
                }
            }
        }
    }

    m
}

/// A random operation valid on the materialized model.
pub fn op_for(seed: &ModelSeed, kind: bool, a: usize, b: usize) -> EvolutionOp {
    let n = seed.n_classes;
    if kind && !seed.props.is_empty() {
        EvolutionOp::ChangeDomain {
            property: prop_iri(a % seed.props.len()),
            new_domain: class_iri(b % n),
        }
    } else {
        EvolutionOp::DeleteClass { class: class_iri(a % n) }
    }
}
