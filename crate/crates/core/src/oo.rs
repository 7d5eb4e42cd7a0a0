//! Object-oriented view: classes with fields and accessors under single
//! inheritance rooted at `Thing`, someValuesFrom restrictions as listener
//! entries, disjointness as interface pairs whose same-named operation
//! returns conflicting types, plus a per-class registry of created
//! instances. Instance checks read the closed world off the object graph.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::evolution::EvolutionOp;
use crate::finding::{Finding, FindingCode};
use crate::model::{Fact, FactObject, OntologyModel};
use crate::term::{vocab, Iri, Literal};

pub const ROOT_CLASS: &str = "Thing";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OoError {
    #[error("individual '{0}' has no type assertion; every instance needs a creating class")]
    NoClass(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Multiplicity {
    Single,
    Many,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OoField {
    pub name: String,
    /// Target class name or datatype rendering.
    pub target: String,
    pub multiplicity: Multiplicity,
    pub setter_removed: bool,
}

/// Closed-world stand-in for the runtime listener: the field must hold at
/// least one value of the required class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ListenerSpec {
    pub field: String,
    pub requires: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OoClass {
    pub name: String,
    /// `None` only for the root class.
    pub extends: Option<String>,
    pub implements: Vec<String>,
    pub fields: Vec<OoField>,
    pub listeners: Vec<ListenerSpec>,
    pub constructor_blocked: bool,
    /// Set accessors redefined to error in this class (field declared on an
    /// ancestor).
    pub removed_setters: Vec<String>,
    /// Ids of instances whose creating class is this class.
    pub registry: Vec<String>,
}

impl OoClass {
    fn new(name: impl Into<String>, extends: Option<String>) -> Self {
        OoClass {
            name: name.into(),
            extends,
            implements: Vec::new(),
            fields: Vec::new(),
            listeners: Vec::new(),
            constructor_blocked: false,
            removed_setters: Vec::new(),
            registry: Vec::new(),
        }
    }
}

/// One half of a disjointness encoding: the operation name is shared with
/// the partner interface while the result type differs, so no class can
/// implement both.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OoInterface {
    pub name: String,
    pub operation: String,
    pub result: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ClassModel {
    pub classes: Vec<OoClass>,
    pub interfaces: Vec<OoInterface>,
}

impl ClassModel {
    pub fn class(&self, name: &str) -> Option<&OoClass> {
        self.classes.iter().find(|c| c.name == name)
    }

    fn class_mut(&mut self, name: &str) -> Option<&mut OoClass> {
        self.classes.iter_mut().find(|c| c.name == name)
    }

    /// True when `sub` reaches `sup` through extends edges (or implements
    /// edges that name classes), reflexively.
    pub fn is_subclass(&self, sub: &str, sup: &str) -> bool {
        let mut queue = vec![sub.to_string()];
        let mut seen = BTreeSet::new();
        while let Some(name) = queue.pop() {
            if name == sup {
                return true;
            }
            if !seen.insert(name.clone()) {
                continue;
            }
            if let Some(class) = self.class(&name) {
                if let Some(parent) = &class.extends {
                    queue.push(parent.clone());
                }
                for i in &class.implements {
                    if self.class(i).is_some() {
                        queue.push(i.clone());
                    }
                }
            }
        }
        false
    }

    /// Whether the set accessor for `field` is unavailable in `class`,
    /// either removed where declared or redefined to error below.
    pub fn setter_removed_in(&self, class: &str, field: &str) -> bool {
        self.class(class).is_some_and(|c| {
            c.removed_setters.iter().any(|f| f == field)
                || c.fields.iter().any(|f| f.name == field && f.setter_removed)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum SlotValue {
    Individual(String),
    Int(i64),
    Str(String),
}

impl std::fmt::Display for SlotValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SlotValue::Individual(s) => f.write_str(s),
            SlotValue::Int(n) => write!(f, "{n}"),
            SlotValue::Str(s) => write!(f, "{s:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OoInstance {
    pub id: String,
    pub creating_class: String,
    /// field name -> values, in fact order; map in name order.
    pub slots: std::collections::BTreeMap<String, Vec<SlotValue>>,
}

/// Render the class model from a validated ontology.
pub fn emit_class_model(m: &OntologyModel) -> (ClassModel, Vec<Finding>) {
    let mut cm = ClassModel::default();
    let mut findings = Vec::new();

    let mut root = OoClass::new(ROOT_CLASS, None);
    root.fields.push(OoField {
        name: "objectURL".to_string(),
        target: "String".to_string(),
        multiplicity: Multiplicity::Single,
        setter_removed: false,
    });
    cm.classes.push(root);

    for class in m.classes.values() {
        let declared_supers: Vec<&Iri> =
            class.supers.iter().filter(|s| m.classes.contains_key(*s)).collect();
        let extends = declared_supers
            .first()
            .map(|s| s.local_name().to_string())
            .unwrap_or_else(|| ROOT_CLASS.to_string());
        let mut oo = OoClass::new(class.name.local_name(), Some(extends));
        if declared_supers.len() > 1 {
            for extra in &declared_supers[1..] {
                oo.implements.push(extra.local_name().to_string());
            }
            findings.push(Finding::warning(
                FindingCode::MultipleInheritance,
                vec![class.name.clone()],
                "oo",
                format!(
                    "'{}' has {} superclasses; extending the first, implementing the rest",
                    class.name.local_name(),
                    declared_supers.len()
                ),
            ));
        }
        for r in &class.restrictions {
            oo.listeners.push(ListenerSpec {
                field: r.on_property.local_name().to_string(),
                requires: r.target().local_name().to_string(),
            });
        }
        cm.classes.push(oo);
    }

    // properties become fields on their domain class (root when absent)
    for prop in m.properties.values() {
        let owner = prop
            .domain
            .as_ref()
            .filter(|d| m.classes.contains_key(*d))
            .map(|d| d.local_name().to_string())
            .unwrap_or_else(|| ROOT_CLASS.to_string());
        let target = match &prop.range {
            Some(r) if vocab::is_datatype(r.full()) => match r.full() {
                vocab::XSD_INTEGER => "int".to_string(),
                _ => "String".to_string(),
            },
            Some(r) => r.local_name().to_string(),
            None => ROOT_CLASS.to_string(),
        };
        let field = OoField {
            name: prop.name.local_name().to_string(),
            target,
            multiplicity: if prop.functional { Multiplicity::Single } else { Multiplicity::Many },
            setter_removed: false,
        };
        if let Some(class) = cm.class_mut(&owner) {
            if !class.fields.iter().any(|f| f.name == field.name) {
                class.fields.push(field);
            }
        }
    }

    // disjoint pairs become interface pairs with a conflicting operation
    let mut seen_pairs: BTreeSet<(String, String)> = BTreeSet::new();
    for class in m.classes.values() {
        for other in &class.disjoint_with {
            if !m.classes.contains_key(other) {
                continue;
            }
            let a = class.name.local_name().to_string();
            let b = other.local_name().to_string();
            let key = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
            if !seen_pairs.insert(key.clone()) {
                continue;
            }
            let (first, second) = key;
            let operation = format!("disjoint{first}{second}");
            cm.interfaces.push(OoInterface {
                name: format!("{first}Not{second}"),
                operation: operation.clone(),
                result: first.clone(),
            });
            cm.interfaces.push(OoInterface {
                name: format!("{second}Not{first}"),
                operation,
                result: second.clone(),
            });
            if let Some(c) = cm.class_mut(&first) {
                c.implements.push(format!("{first}Not{second}"));
            }
            if let Some(c) = cm.class_mut(&second) {
                c.implements.push(format!("{second}Not{first}"));
            }
        }
    }

    (cm, findings)
}

/// Create one instance per individual, filling slots from property
/// assertions and appending ids to the creating class's registry.
pub fn instantiate(
    cm: &mut ClassModel,
    m: &OntologyModel,
) -> Result<(Vec<OoInstance>, Vec<Finding>), OoError> {
    let mut instances = Vec::new();
    let mut findings = Vec::new();
    for individual in m.individuals() {
        let Some((creating, ambiguous)) = m.most_specific_class(&individual) else {
            return Err(OoError::NoClass(individual.local_name().to_string()));
        };
        if ambiguous {
            findings.push(Finding::warning(
                FindingCode::AmbiguousClass,
                vec![individual.clone()],
                "oo",
                format!(
                    "'{}' has several most-specific classes; using '{}' (declaration order)",
                    individual.local_name(),
                    creating.local_name()
                ),
            ));
        }
        let mut instance = OoInstance {
            id: individual.local_name().to_string(),
            creating_class: creating.local_name().to_string(),
            slots: Default::default(),
        };
        for fact in &m.abox {
            let Fact::PropAssertion { subject, property, object } = fact else { continue };
            if subject != &individual {
                continue;
            }
            let value = match object {
                FactObject::Individual(o) => SlotValue::Individual(o.local_name().to_string()),
                FactObject::Literal(Literal::Integer(n)) => SlotValue::Int(*n),
                FactObject::Literal(Literal::String(s)) => SlotValue::Str(s.clone()),
            };
            instance.slots.entry(property.local_name().to_string()).or_default().push(value);
        }
        if let Some(class) = cm.class_mut(creating.local_name()) {
            class.registry.push(instance.id.clone());
        }
        instances.push(instance);
    }
    Ok((instances, findings))
}

/// Apply an evolution operation to the class model: a domain change removes
/// set accessors on the classes that lost the field, a class deletion
/// blocks the constructor. Registries are preserved; detection reads them.
pub fn evolve_class_model(cm: &ClassModel, m_old: &OntologyModel, op: &EvolutionOp) -> ClassModel {
    let mut out = cm.clone();
    match op {
        EvolutionOp::ChangeDomain { property, new_domain } => {
            let field = property.local_name();
            let Some(prop) = m_old.property(property) else { return out };
            let Some(old_domain) = prop.domain.as_ref().filter(|d| m_old.classes.contains_key(*d))
            else {
                return out;
            };
            let lost: Vec<String> = m_old
                .subtree(old_domain)
                .iter()
                .filter(|c| !m_old.subtree(new_domain).contains(*c))
                .map(|c| c.local_name().to_string())
                .collect();
            for name in lost {
                if let Some(class) = out.class_mut(&name) {
                    let mut owned = false;
                    for f in &mut class.fields {
                        if f.name == field {
                            f.setter_removed = true;
                            owned = true;
                        }
                    }
                    if !owned && !class.removed_setters.iter().any(|f| f == field) {
                        class.removed_setters.push(field.to_string());
                    }
                }
            }
        }
        EvolutionOp::DeleteClass { class } => {
            if let Some(c) = out.class_mut(class.local_name()) {
                c.constructor_blocked = true;
            }
        }
    }
    out
}

/// Instances that the evolved class model rejects.
///
/// Domain change: instances holding a value in the moved field whose
/// creating class no longer reaches the new domain. Class deletion:
/// instances created by exactly that class, read off its registry.
pub fn find_inconsistent_objects(
    instances: &[OoInstance],
    evolved: &ClassModel,
    op: &EvolutionOp,
) -> BTreeSet<String> {
    match op {
        EvolutionOp::ChangeDomain { property, new_domain } => {
            let field = property.local_name();
            let target = new_domain.local_name();
            instances
                .iter()
                .filter(|i| i.slots.get(field).is_some_and(|vs| !vs.is_empty()))
                .filter(|i| !evolved.is_subclass(&i.creating_class, target))
                .map(|i| i.id.clone())
                .collect()
        }
        EvolutionOp::DeleteClass { class } => evolved
            .class(class.local_name())
            .map(|c| c.registry.iter().cloned().collect())
            .unwrap_or_default(),
    }
}

/// Java-like skeleton mirroring the class model; deterministic, not meant
/// to compile.
pub fn render_skeleton(cm: &ClassModel) -> String {
    let mut out = String::new();
    for class in &cm.classes {
        let mut header = format!("public class {}", class.name);
        if let Some(parent) = &class.extends {
            header.push_str(&format!(" extends {parent}"));
        }
        if !class.implements.is_empty() {
            header.push_str(&format!(" implements {}", class.implements.join(", ")));
        }
        let _ = writeln!(out, "{header} {{");
        let _ = writeln!(out, "    private static ArrayList tous = new ArrayList();");
        if class.constructor_blocked {
            let _ = writeln!(
                out,
                "    public {}() {{ throw new IllegalStateException(\"creation blocked\"); }}",
                class.name
            );
        } else {
            let _ = writeln!(out, "    public {}() {{ tous.add(this); }}", class.name);
        }
        for field in &class.fields {
            let ty = match field.multiplicity {
                Multiplicity::Single => field.target.clone(),
                Multiplicity::Many => "List".to_string(),
            };
            let _ = writeln!(out, "    protected {ty} {};", field.name);
            if field.setter_removed {
                let _ = writeln!(
                    out,
                    "    public void set{}({ty} v) {{ throw new UnsupportedOperationException(); }}",
                    field.name
                );
            } else {
                let _ = writeln!(out, "    public void set{}({ty} v) {{ this.{} = v; }}", field.name, field.name);
            }
            let _ = writeln!(out, "    public {ty} get{}() {{ return this.{}; }}", field.name, field.name);
        }
        for removed in &class.removed_setters {
            let _ = writeln!(
                out,
                "    public void set{removed}(Object v) {{ throw new UnsupportedOperationException(); }}"
            );
        }
        for listener in &class.listeners {
            let _ = writeln!(
                out,
                "    // listener on '{}' accessors: at least one value must be a {}",
                listener.field, listener.requires
            );
        }
        let _ = writeln!(out, "}}\n");
    }
    for iface in &cm.interfaces {
        let _ = writeln!(out, "public interface {} {{", iface.name);
        let _ = writeln!(out, "    {} {}();", iface.result, iface.operation);
        let _ = writeln!(out, "}}\n");
    }
    out
}

/// Machine-readable class model plus instances, the `.oo.json` artifact.
pub fn to_json(cm: &ClassModel, instances: &[OoInstance]) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        schema: &'static str,
        classes: &'a [OoClass],
        interfaces: &'a [OoInterface],
        instances: &'a [OoInstance],
    }
    let doc =
        Doc { schema: "1", classes: &cm.classes, interfaces: &cm.interfaces, instances };
    serde_json::to_string_pretty(&doc).expect("class model serializes")
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
:Trainee a owl:Class ; rdfs:subClassOf :Person .\n\
:Computer a owl:Class .\n\
:Department a owl:Class .\n\
:Manager owl:disjointWith :Trainee .\n\
:work a rdf:Property , owl:FunctionalProperty ; rdfs:domain :Person ; rdfs:range :Department .\n\
:studyAmong a rdf:Property ; rdfs:domain :Trainee ; rdfs:range :Department .\n\
:ComputerTrainee a owl:Class ; rdfs:subClassOf :Trainee ;\n\
    rdfs:subClassOf [ a owl:Restriction ; owl:onProperty :studyAmong ; owl:someValuesFrom :Computer ] .\n\
:r3 a :Manager .\n:v3 a :Department .\n:r3 :work :v3 .\n";

    #[test]
    fn person_gets_single_valued_work_field() {
        let m = model_of(DOC);
        let (cm, _) = emit_class_model(&m);
        let person = cm.class("Person").unwrap();
        assert_eq!(person.extends.as_deref(), Some(ROOT_CLASS));
        let work = person.fields.iter().find(|f| f.name == "work").unwrap();
        assert_eq!(work.target, "Department");
        assert_eq!(work.multiplicity, Multiplicity::Single);
    }

    #[test]
    fn restriction_becomes_listener() {
        let m = model_of(DOC);
        let (cm, _) = emit_class_model(&m);
        let ct = cm.class("ComputerTrainee").unwrap();
        assert_eq!(
            ct.listeners,
            vec![ListenerSpec { field: "studyAmong".into(), requires: "Computer".into() }]
        );
    }

    #[test]
    fn empty_model_contains_only_thing() {
        let (cm, _) = emit_class_model(&OntologyModel::default());
        assert_eq!(cm.classes.len(), 1);
        assert_eq!(cm.classes[0].name, ROOT_CLASS);
    }

    #[test]
    fn disjoint_pair_yields_conflicting_interfaces() {
        let m = model_of(DOC);
        let (cm, _) = emit_class_model(&m);
        assert_eq!(cm.interfaces.len(), 2);
        let (a, b) = (&cm.interfaces[0], &cm.interfaces[1]);
        assert_eq!(a.operation, b.operation);
        assert_ne!(a.result, b.result);
        assert!(cm.class("Manager").unwrap().implements.contains(&a.name));
        assert!(cm.class("Trainee").unwrap().implements.contains(&b.name));
    }

    #[test]
    fn instances_fill_slots_and_registry() {
        let m = model_of(DOC);
        let (mut cm, _) = emit_class_model(&m);
        let (instances, findings) = instantiate(&mut cm, &m).unwrap();
        assert!(findings.is_empty());
        let r3 = instances.iter().find(|i| i.id == "r3").unwrap();
        assert_eq!(r3.creating_class, "Manager");
        assert_eq!(r3.slots["work"], vec![SlotValue::Individual("v3".into())]);
        assert_eq!(cm.class("Manager").unwrap().registry, vec!["r3".to_string()]);
        let v3 = instances.iter().find(|i| i.id == "v3").unwrap();
        assert!(v3.slots.is_empty());
    }

    #[test]
    fn untyped_individual_is_rejected() {
        let m = model_of(":p a rdf:Property .\n:x :p :y .\n:x a :C .\n:C a owl:Class .");
        let (mut cm, _) = emit_class_model(&m);
        assert_eq!(instantiate(&mut cm, &m).unwrap_err(), OoError::NoClass("y".into()));
    }

    #[test]
    fn skeleton_contains_class_headers_and_accessors() {
        let m = model_of(DOC);
        let (cm, _) = emit_class_model(&m);
        let text = render_skeleton(&cm);
        assert!(text.contains("public class Manager extends Person"));
        assert!(text.contains("protected Department work;"));
        assert!(text.contains("protected String objectURL;"));
        assert!(text.contains("private static ArrayList tous = new ArrayList();"));
    }

    #[test]
    fn blocked_constructor_raises() {
        let m = model_of(DOC);
        let (cm, _) = emit_class_model(&m);
        let op = EvolutionOp::DeleteClass { class: Iri::local("Manager") };
        let evolved = evolve_class_model(&cm, &m, &op);
        assert!(evolved.class("Manager").unwrap().constructor_blocked);
        let text = render_skeleton(&evolved);
        assert!(text.contains("public Manager() { throw new IllegalStateException"));
    }

    #[test]
    fn change_domain_detection_and_setter_removal() {
        let doc = "\
:Person a owl:Class .\n\
:Manager a owl:Class ; rdfs:subClassOf :Person .\n\
:Researcher a owl:Class ; rdfs:subClassOf :Manager .\n\
:Director a owl:Class ; rdfs:subClassOf :Manager .\n\
:Department a owl:Class .\n\
:manage a rdf:Property , owl:FunctionalProperty ; rdfs:domain :Manager ; rdfs:range :Department .\n\
:r4 a :Manager .\n:r6 a :Researcher .\n:r8 a :Director .\n\
:v4 a :Department .\n:v6 a :Department .\n:v8 a :Department .\n\
:r4 :manage :v4 .\n:r6 :manage :v6 .\n:r8 :manage :v8 .\n";
        let m = model_of(doc);
        let (mut cm, _) = emit_class_model(&m);
        let (instances, _) = instantiate(&mut cm, &m).unwrap();
        let op = EvolutionOp::ChangeDomain {
            property: Iri::local("manage"),
            new_domain: Iri::local("Director"),
        };
        let evolved = evolve_class_model(&cm, &m, &op);
        let bad = find_inconsistent_objects(&instances, &evolved, &op);
        assert_eq!(bad, ["r4".to_string(), "r6".to_string()].into_iter().collect());
        // setters removed exactly on Manager and Researcher
        assert!(evolved.setter_removed_in("Manager", "manage"));
        assert!(evolved.setter_removed_in("Researcher", "manage"));
        assert!(!evolved.setter_removed_in("Director", "manage"));
        assert!(!evolved.setter_removed_in("Person", "manage"));
    }

    #[test]
    fn op_on_unused_property_detects_nothing() {
        let m = model_of(DOC);
        let (mut cm, _) = emit_class_model(&m);
        let (instances, _) = instantiate(&mut cm, &m).unwrap();
        let op = EvolutionOp::ChangeDomain {
            property: Iri::local("studyAmong"),
            new_domain: Iri::local("ComputerTrainee"),
        };
        let evolved = evolve_class_model(&cm, &m, &op);
        assert!(find_inconsistent_objects(&instances, &evolved, &op).is_empty());
    }
}
