//! Ontology model: validated TBox (classes, properties, restrictions,
//! disjointness) plus ABox (type and property assertions), with the
//! subsumption queries every backend shares.
//!
//! Declaration order is significant and preserved: it drives discriminator
//! column naming in the relational view and constant grouping in the type
//! view.

use indexmap::{IndexMap, IndexSet};
use thiserror::Error;

use crate::finding::{Finding, FindingCode};
use crate::term::{vocab, Iri, Literal, Node, TripleSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("restriction node {node} lacks owl:onProperty")]
    RestrictionWithoutProperty { node: String },
    #[error("restriction node {node} lacks owl:someValuesFrom")]
    RestrictionWithoutFiller { node: String },
    #[error("'{name}' is declared both as a class and as a property")]
    DuplicateDeclaration { name: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("class '{0}' is not declared")]
pub struct UnknownClass(pub String);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RestrictionKind {
    SomeValuesFrom(Iri),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restriction {
    pub on_property: Iri,
    pub kind: RestrictionKind,
}

impl Restriction {
    pub fn target(&self) -> &Iri {
        match &self.kind {
            RestrictionKind::SomeValuesFrom(t) => t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: Iri,
    pub supers: Vec<Iri>,
    pub disjoint_with: Vec<Iri>,
    pub restrictions: Vec<Restriction>,
    /// Declared complete via equivalence to an intersection of its supers.
    pub complete: bool,
}

impl ClassDecl {
    fn new(name: Iri) -> Self {
        ClassDecl {
            name,
            supers: Vec::new(),
            disjoint_with: Vec::new(),
            restrictions: Vec::new(),
            complete: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyDecl {
    pub name: Iri,
    pub supers: Vec<Iri>,
    pub domain: Option<Iri>,
    /// A class or one of the known datatypes (xsd:string, xsd:integer).
    pub range: Option<Iri>,
    pub functional: bool,
}

impl PropertyDecl {
    fn new(name: Iri) -> Self {
        PropertyDecl { name, supers: Vec::new(), domain: None, range: None, functional: false }
    }

    /// Object property: range is a class (or absent), not a datatype.
    pub fn is_object_property(&self) -> bool {
        self.range.as_ref().is_none_or(|r| !vocab::is_datatype(r.full()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum FactObject {
    Individual(Iri),
    Literal(Literal),
}

impl FactObject {
    pub fn as_individual(&self) -> Option<&Iri> {
        match self {
            FactObject::Individual(iri) => Some(iri),
            FactObject::Literal(_) => None,
        }
    }
}

impl std::fmt::Display for FactObject {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FactObject::Individual(iri) => f.write_str(iri.local_name()),
            FactObject::Literal(lit) => write!(f, "{lit}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Fact {
    TypeAssertion { individual: Iri, class: Iri },
    PropAssertion { subject: Iri, property: Iri, object: FactObject },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OntologyModel {
    pub classes: IndexMap<Iri, ClassDecl>,
    pub properties: IndexMap<Iri, PropertyDecl>,
    pub abox: Vec<Fact>,
}

impl OntologyModel {
    pub fn class(&self, name: &Iri) -> Option<&ClassDecl> {
        self.classes.get(name)
    }

    pub fn property(&self, name: &Iri) -> Option<&PropertyDecl> {
        self.properties.get(name)
    }

    /// Individuals in first-appearance order over the ABox.
    pub fn individuals(&self) -> IndexSet<Iri> {
        let mut out = IndexSet::new();
        for fact in &self.abox {
            match fact {
                Fact::TypeAssertion { individual, .. } => {
                    out.insert(individual.clone());
                }
                Fact::PropAssertion { subject, object, .. } => {
                    out.insert(subject.clone());
                    if let FactObject::Individual(o) = object {
                        out.insert(o.clone());
                    }
                }
            }
        }
        out
    }

    /// Classes an individual is directly asserted in, in fact order.
    pub fn declared_classes(&self, individual: &Iri) -> Vec<Iri> {
        let mut out = Vec::new();
        for fact in &self.abox {
            if let Fact::TypeAssertion { individual: i, class } = fact {
                if i == individual && !out.contains(class) {
                    out.push(class.clone());
                }
            }
        }
        out
    }

    /// Reflexive-transitive super closure of a declared class, in BFS order
    /// starting at the class itself. Undeclared supers are skipped.
    pub fn ancestors(&self, class: &Iri) -> IndexSet<Iri> {
        let mut seen = IndexSet::new();
        let mut queue = vec![class.clone()];
        while let Some(c) = queue.pop() {
            if !seen.insert(c.clone()) {
                continue;
            }
            if let Some(decl) = self.classes.get(&c) {
                for s in &decl.supers {
                    if self.classes.contains_key(s) && !seen.contains(s) {
                        queue.push(s.clone());
                    }
                }
            }
        }
        seen
    }

    /// Direct subclasses of a class, in declaration order.
    pub fn direct_subclasses(&self, class: &Iri) -> Vec<Iri> {
        self.classes
            .values()
            .filter(|c| c.supers.contains(class))
            .map(|c| c.name.clone())
            .collect()
    }

    /// The class plus all its descendants.
    pub fn subtree(&self, class: &Iri) -> IndexSet<Iri> {
        let mut seen = IndexSet::new();
        let mut queue = vec![class.clone()];
        while let Some(c) = queue.pop() {
            if !seen.insert(c.clone()) {
                continue;
            }
            for sub in self.direct_subclasses(&c) {
                if !seen.contains(&sub) {
                    queue.push(sub.clone());
                }
            }
        }
        seen
    }

    /// Classes with no declared (and still existing) superclass.
    pub fn root_classes(&self) -> Vec<Iri> {
        self.classes
            .values()
            .filter(|c| !c.supers.iter().any(|s| self.classes.contains_key(s)))
            .map(|c| c.name.clone())
            .collect()
    }

    /// Most specific declared class of an individual. Ties (two classes
    /// neither subsuming the other) are broken by fact declaration order;
    /// the bool is true when such a tie occurred. Undeclared classes are
    /// ignored; `None` when nothing usable is declared.
    pub fn most_specific_class(&self, individual: &Iri) -> Option<(Iri, bool)> {
        let declared: Vec<Iri> = self
            .declared_classes(individual)
            .into_iter()
            .filter(|c| self.classes.contains_key(c))
            .collect();
        let mut iter = declared.into_iter();
        let mut best = iter.next()?;
        let mut ambiguous = false;
        for cand in iter {
            if self.is_subtype_unchecked(&cand, &best) {
                best = cand;
            } else if !self.is_subtype_unchecked(&best, &cand) {
                ambiguous = true;
            }
        }
        Some((best, ambiguous))
    }

    /// Single-inheritance chain from the root down to `leaf`, following the
    /// first declared super at each step.
    pub fn primary_chain(&self, leaf: &Iri) -> Vec<Iri> {
        let mut chain = vec![leaf.clone()];
        let mut current = leaf.clone();
        let mut guard = 0;
        while let Some(decl) = self.classes.get(&current) {
            guard += 1;
            if guard > self.classes.len() + 1 {
                break; // cyclic TBox; validate_tbox reports it
            }
            match decl.supers.iter().find(|s| self.classes.contains_key(*s)) {
                Some(s) => {
                    current = s.clone();
                    chain.push(current.clone());
                }
                None => break,
            }
        }
        chain.reverse();
        chain
    }

    fn is_subtype_unchecked(&self, a: &Iri, b: &Iri) -> bool {
        self.ancestors(a).contains(b)
    }
}

/// True iff `b` is reachable from `a` through zero or more superclass edges.
pub fn is_subtype(m: &OntologyModel, a: &Iri, b: &Iri) -> Result<bool, UnknownClass> {
    for c in [a, b] {
        if !m.classes.contains_key(c) {
            return Err(UnknownClass(c.local_name().to_string()));
        }
    }
    Ok(m.is_subtype_unchecked(a, b))
}

/// Intermediate view of a `[ ... ]` node while folding restrictions.
#[derive(Default)]
struct BlankInfo {
    is_restriction: bool,
    on_property: Option<Iri>,
    some_values_from: Option<Iri>,
    intersection_members: Vec<Node>,
}

/// Extract classes, properties and facts from a parsed triple set.
///
/// Anonymous restriction nodes are folded into the class that declares them
/// as a super or as an equivalent-intersection member. Unknown predicates
/// and overridden duplicate declarations come back as warnings.
pub fn build_model(ts: &TripleSet) -> Result<(OntologyModel, Vec<Finding>), ModelError> {
    let mut model = OntologyModel::default();
    let mut findings = Vec::new();

    // declaration pass: entity tables in document order
    for t in &ts.triples {
        let p = t.predicate.full();
        if p == vocab::RDF_TYPE {
            if let (Node::Iri(s), Node::Iri(o)) = (&t.subject, &t.object) {
                match o.full() {
                    vocab::OWL_CLASS => declare_class(&mut model, s)?,
                    vocab::RDF_PROPERTY | vocab::OWL_FUNCTIONAL_PROPERTY => {
                        declare_property(&mut model, s)?;
                        if o.full() == vocab::OWL_FUNCTIONAL_PROPERTY {
                            model.properties.get_mut(s).expect("just declared").functional = true;
                        }
                    }
                    _ => {}
                }
            }
        } else if p == vocab::RDFS_SUBCLASSOF || p == vocab::OWL_EQUIVALENT_CLASS || vocab::is_disjoint_with(p) {
            if let Node::Iri(s) = &t.subject {
                declare_class(&mut model, s)?;
            }
        } else if p == vocab::RDFS_DOMAIN || p == vocab::RDFS_RANGE || p == vocab::RDFS_SUBPROPERTYOF {
            if let Node::Iri(s) = &t.subject {
                declare_property(&mut model, s)?;
            }
        }
    }

    // collect blank node structure (restrictions, intersections)
    let mut blanks: IndexMap<String, BlankInfo> = IndexMap::new();
    for t in &ts.triples {
        if let Node::Blank(id) = &t.subject {
            let info = blanks.entry(id.clone()).or_default();
            match (t.predicate.full(), &t.object) {
                (vocab::RDF_TYPE, Node::Iri(o)) if o.full() == vocab::OWL_RESTRICTION => {
                    info.is_restriction = true;
                }
                (vocab::OWL_ON_PROPERTY, Node::Iri(o)) => info.on_property = Some(o.clone()),
                (vocab::OWL_SOME_VALUES_FROM, Node::Iri(o)) => {
                    info.some_values_from = Some(o.clone())
                }
                (vocab::OWL_INTERSECTION_OF, o) => info.intersection_members.push(o.clone()),
                _ => {}
            }
        }
    }

    let fold_restriction = |blanks: &IndexMap<String, BlankInfo>,
                            id: &str|
     -> Result<Restriction, ModelError> {
        let info = blanks
            .get(id)
            .filter(|i| i.is_restriction)
            .ok_or_else(|| ModelError::RestrictionWithoutProperty { node: id.to_string() })?;
        let on_property = info
            .on_property
            .clone()
            .ok_or_else(|| ModelError::RestrictionWithoutProperty { node: id.to_string() })?;
        let target = info
            .some_values_from
            .clone()
            .ok_or_else(|| ModelError::RestrictionWithoutFiller { node: id.to_string() })?;
        Ok(Restriction { on_property, kind: RestrictionKind::SomeValuesFrom(target) })
    };

    // axiom pass: fill class and property declarations
    for t in &ts.triples {
        let Node::Iri(s) = &t.subject else { continue };
        let p = t.predicate.full();
        if p == vocab::RDFS_SUBCLASSOF {
            match &t.object {
                Node::Iri(o) => {
                    let decl = model.classes.get_mut(s).expect("declared in first pass");
                    if !decl.supers.contains(o) {
                        decl.supers.push(o.clone());
                    }
                }
                Node::Blank(id) => {
                    let r = fold_restriction(&blanks, id)?;
                    let decl = model.classes.get_mut(s).expect("declared in first pass");
                    if !decl.restrictions.contains(&r) {
                        decl.restrictions.push(r);
                    }
                }
                Node::Literal(_) => {
                    findings.push(Finding::warning(
                        FindingCode::UnknownPredicate,
                        vec![s.clone()],
                        "ir",
                        "literal object of rdfs:subClassOf ignored",
                    ));
                }
            }
        } else if vocab::is_disjoint_with(p) {
            if let Node::Iri(o) = &t.object {
                let decl = model.classes.get_mut(s).expect("declared in first pass");
                if !decl.disjoint_with.contains(o) {
                    decl.disjoint_with.push(o.clone());
                }
            }
        } else if p == vocab::OWL_EQUIVALENT_CLASS {
            match &t.object {
                Node::Blank(id) if !blanks.get(id).is_none_or(|b| b.intersection_members.is_empty()) => {
                    let members = blanks[id].intersection_members.clone();
                    for member in members {
                        match member {
                            Node::Iri(class_ref) => {
                                let decl = model.classes.get_mut(s).expect("declared");
                                if !decl.supers.contains(&class_ref) {
                                    decl.supers.push(class_ref);
                                }
                            }
                            Node::Blank(member_id) => {
                                let r = fold_restriction(&blanks, &member_id)?;
                                let decl = model.classes.get_mut(s).expect("declared");
                                if !decl.restrictions.contains(&r) {
                                    decl.restrictions.push(r);
                                }
                            }
                            Node::Literal(_) => {}
                        }
                    }
                    model.classes.get_mut(s).expect("declared").complete = true;
                }
                Node::Blank(id) if blanks.get(id).is_some_and(|b| b.is_restriction) => {
                    let r = fold_restriction(&blanks, id)?;
                    let decl = model.classes.get_mut(s).expect("declared");
                    if !decl.restrictions.contains(&r) {
                        decl.restrictions.push(r);
                    }
                    decl.complete = true;
                }
                other => {
                    findings.push(Finding::warning(
                        FindingCode::UnhandledEquivalence,
                        vec![s.clone()],
                        "ir",
                        format!("equivalence of '{}' to {:?} is stored nowhere; only intersection shapes are folded", s.local_name(), other),
                    ));
                }
            }
        } else if p == vocab::RDFS_DOMAIN {
            if let Node::Iri(o) = &t.object {
                let decl = model.properties.get_mut(s).expect("declared in first pass");
                if let Some(old) = &decl.domain {
                    if old != o {
                        findings.push(Finding::warning(
                            FindingCode::DuplicateDeclaration,
                            vec![s.clone()],
                            "ir",
                            format!(
                                "domain of '{}' redeclared from '{}' to '{}'; last wins",
                                s.local_name(),
                                old.local_name(),
                                o.local_name()
                            ),
                        ));
                    }
                }
                decl.domain = Some(o.clone());
            }
        } else if p == vocab::RDFS_RANGE {
            if let Node::Iri(o) = &t.object {
                let decl = model.properties.get_mut(s).expect("declared in first pass");
                if let Some(old) = &decl.range {
                    if old != o {
                        findings.push(Finding::warning(
                            FindingCode::DuplicateDeclaration,
                            vec![s.clone()],
                            "ir",
                            format!(
                                "range of '{}' redeclared from '{}' to '{}'; last wins",
                                s.local_name(),
                                old.local_name(),
                                o.local_name()
                            ),
                        ));
                    }
                }
                decl.range = Some(o.clone());
            }
        } else if p == vocab::RDFS_SUBPROPERTYOF {
            if let Node::Iri(o) = &t.object {
                let decl = model.properties.get_mut(s).expect("declared in first pass");
                if !decl.supers.contains(o) {
                    decl.supers.push(o.clone());
                }
            }
        }
    }

    // symmetric closure of disjointness
    let pairs: Vec<(Iri, Iri)> = model
        .classes
        .values()
        .flat_map(|c| c.disjoint_with.iter().map(move |d| (d.clone(), c.name.clone())))
        .collect();
    for (a, b) in pairs {
        if let Some(decl) = model.classes.get_mut(&a) {
            if !decl.disjoint_with.contains(&b) {
                decl.disjoint_with.push(b);
            }
        }
    }

    // fact pass
    for t in &ts.triples {
        let Node::Iri(s) = &t.subject else { continue };
        let p = t.predicate.full();
        if p == vocab::RDF_TYPE {
            let Node::Iri(o) = &t.object else { continue };
            if vocab::is_reserved(o.full())
                || model.classes.contains_key(s)
                || model.properties.contains_key(s)
            {
                continue; // a declaration, not a fact
            }
            push_fact(
                &mut model.abox,
                Fact::TypeAssertion { individual: s.clone(), class: o.clone() },
            );
        } else if !vocab::is_reserved(p) {
            let prop = t.predicate.clone();
            if !model.properties.contains_key(&prop) {
                findings.push(Finding::warning(
                    FindingCode::UnknownPredicate,
                    vec![s.clone()],
                    "ir",
                    format!("predicate '{}' is not a declared property; triple kept out of the model", prop.local_name()),
                ));
                continue;
            }
            let object = match &t.object {
                Node::Iri(o) => FactObject::Individual(o.clone()),
                Node::Literal(l) => FactObject::Literal(l.clone()),
                Node::Blank(_) => {
                    findings.push(Finding::warning(
                        FindingCode::UnknownPredicate,
                        vec![s.clone()],
                        "ir",
                        "blank node object in a fact is not supported; triple skipped",
                    ));
                    continue;
                }
            };
            push_fact(
                &mut model.abox,
                Fact::PropAssertion { subject: s.clone(), property: prop, object },
            );
        }
    }

    Ok((model, findings))
}

fn push_fact(abox: &mut Vec<Fact>, fact: Fact) {
    if !abox.contains(&fact) {
        abox.push(fact);
    }
}

fn declare_class(model: &mut OntologyModel, name: &Iri) -> Result<(), ModelError> {
    if model.properties.contains_key(name) {
        return Err(ModelError::DuplicateDeclaration { name: name.local_name().to_string() });
    }
    model.classes.entry(name.clone()).or_insert_with(|| ClassDecl::new(name.clone()));
    Ok(())
}

fn declare_property(model: &mut OntologyModel, name: &Iri) -> Result<(), ModelError> {
    if model.classes.contains_key(name) {
        return Err(ModelError::DuplicateDeclaration { name: name.local_name().to_string() });
    }
    model.properties.entry(name.clone()).or_insert_with(|| PropertyDecl::new(name.clone()));
    Ok(())
}

/// Well-formedness report for the TBox: subclass cycles, dangling
/// references, restrictions on undeclared properties. An empty list means
/// the model satisfies its structural invariants.
pub fn validate_tbox(m: &OntologyModel) -> Vec<Finding> {
    let mut findings = Vec::new();

    // cycles: one finding per strongly connected component of size > 1
    // (or with a self loop)
    let names: Vec<Iri> = m.classes.keys().cloned().collect();
    let mut visited: IndexSet<Iri> = IndexSet::new();
    for start in &names {
        if visited.contains(start) {
            continue;
        }
        // DFS with explicit stack tracking the current path
        let mut path: Vec<Iri> = Vec::new();
        let mut stack: Vec<(Iri, usize)> = vec![(start.clone(), 0)];
        while let Some((node, edge)) = stack.pop() {
            if edge == 0 {
                if path.contains(&node) {
                    let cycle: Vec<Iri> =
                        path[path.iter().position(|n| n == &node).unwrap()..].to_vec();
                    if !findings.iter().any(|f: &Finding| {
                        f.code == FindingCode::Cycle && cycle.iter().all(|c| f.subjects.contains(c))
                    }) {
                        let names: Vec<&str> = cycle.iter().map(|c| c.local_name()).collect();
                        findings.push(Finding::error(
                            FindingCode::Cycle,
                            cycle.clone(),
                            "ir",
                            format!("subclass cycle: {}", names.join(" <= ")),
                        ));
                    }
                    continue;
                }
                if visited.contains(&node) {
                    continue;
                }
                path.push(node.clone());
            }
            let supers: Vec<Iri> = m
                .classes
                .get(&node)
                .map(|c| c.supers.iter().filter(|s| m.classes.contains_key(*s)).cloned().collect())
                .unwrap_or_default();
            if edge < supers.len() {
                stack.push((node.clone(), edge + 1));
                stack.push((supers[edge].clone(), 0));
            } else {
                visited.insert(node.clone());
                path.pop();
            }
        }
    }

    let mut dangling = |owner: &Iri, what: &str, target: &Iri| {
        findings.push(Finding::error(
            FindingCode::DanglingRef,
            vec![owner.clone()],
            "ir",
            format!("{what} of '{}' references undeclared '{}'", owner.local_name(), target.local_name()),
        ));
    };

    for class in m.classes.values() {
        for s in &class.supers {
            if !m.classes.contains_key(s) {
                dangling(&class.name, "superclass", s);
            }
        }
        for d in &class.disjoint_with {
            if !m.classes.contains_key(d) {
                dangling(&class.name, "disjointness", d);
            }
        }
        for r in &class.restrictions {
            if !m.properties.contains_key(&r.on_property) {
                dangling(&class.name, "restriction property", &r.on_property);
            }
            if !m.classes.contains_key(r.target()) {
                dangling(&class.name, "restriction target", r.target());
            }
        }
    }
    for prop in m.properties.values() {
        if let Some(d) = &prop.domain {
            if !m.classes.contains_key(d) {
                dangling(&prop.name, "domain", d);
            }
        }
        if let Some(r) = &prop.range {
            if !m.classes.contains_key(r) && !vocab::is_datatype(r.full()) {
                dangling(&prop.name, "range", r);
            }
        }
        for s in &prop.supers {
            if !m.properties.contains_key(s) {
                dangling(&prop.name, "superproperty", s);
            }
        }
    }
    findings
}
