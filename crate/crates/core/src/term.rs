//! RDF terms: IRIs, literals, nodes and triples.
//!
//! An [`Iri`] keeps the prefix/local split it was written with so
//! serialization can reproduce QNames, but equality, ordering and hashing
//! work on the expanded form only: two IRIs are the same resource iff their
//! full forms match.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

/// Well-known namespaces bound before any `@prefix` directive is seen.
pub const DEFAULT_NS: &str = "http://example.org/onto#";
pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS_NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const OWL_NS: &str = "http://www.w3.org/2002/07/owl#";
pub const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema#";

#[derive(Debug, Clone)]
pub struct Iri {
    prefix: String,
    local: String,
    full: String,
}

impl Iri {
    /// Build from a resolved QName. `full` must already be the expanded form.
    pub fn new(prefix: impl Into<String>, local: impl Into<String>, full: impl Into<String>) -> Self {
        let local = local.into();
        debug_assert!(!local.is_empty(), "IRI local part must be non-empty");
        Iri { prefix: prefix.into(), local, full: full.into() }
    }

    /// Build from an absolute IRI, splitting on the last `#` or `/`.
    pub fn from_full(full: impl Into<String>) -> Self {
        let full = full.into();
        let split = full.rfind(['#', '/']).map(|i| i + 1).unwrap_or(0);
        let local = full[split..].to_string();
        Iri { prefix: String::new(), local, full }
    }

    /// Shorthand for a name in the default `:` namespace.
    pub fn local(name: &str) -> Self {
        Iri::new("", name, format!("{DEFAULT_NS}{name}"))
    }

    pub fn prefix(&self) -> &str {
        &self.prefix
    }

    pub fn local_name(&self) -> &str {
        &self.local
    }

    pub fn full(&self) -> &str {
        &self.full
    }
}

impl PartialEq for Iri {
    fn eq(&self, other: &Self) -> bool {
        self.full == other.full
    }
}

impl Eq for Iri {}

impl PartialOrd for Iri {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Iri {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.full.cmp(&other.full)
    }
}

impl std::hash::Hash for Iri {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.full.hash(state);
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.prefix, self.local)
    }
}

impl Serialize for Iri {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.full)
    }
}

/// Plain string or integer literal. The supported subset has no language
/// tags or datatype facets, so the variant is the datatype.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(untagged)]
pub enum Literal {
    String(String),
    Integer(i64),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::String(s) => write!(f, "{s:?}"),
            Literal::Integer(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Iri(Iri),
    /// Synthetic or labelled blank node id, including the `_:` sigil.
    Blank(String),
    Literal(Literal),
}

impl Node {
    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Node::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_blank(&self) -> Option<&str> {
        match self {
            Node::Blank(id) => Some(id),
            _ => None,
        }
    }
}

/// subject is an IRI or blank node, predicate always an IRI.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Node,
    pub predicate: Iri,
    pub object: Node,
}

impl Triple {
    pub fn new(subject: Node, predicate: Iri, object: Node) -> Self {
        debug_assert!(!matches!(subject, Node::Literal(_)), "subject cannot be a literal");
        Triple { subject, predicate, object }
    }
}

/// Parsed document: prefix table plus triples in document order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TripleSet {
    pub prefixes: BTreeMap<String, String>,
    pub triples: Vec<Triple>,
}

impl TripleSet {
    /// Prefix table with the well-known bindings in place.
    pub fn with_default_prefixes() -> Self {
        let mut prefixes = BTreeMap::new();
        prefixes.insert(String::new(), DEFAULT_NS.to_string());
        prefixes.insert("rdf".to_string(), RDF_NS.to_string());
        prefixes.insert("rdfs".to_string(), RDFS_NS.to_string());
        prefixes.insert("owl".to_string(), OWL_NS.to_string());
        prefixes.insert("xsd".to_string(), XSD_NS.to_string());
        TripleSet { prefixes, triples: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Equality up to a consistent renaming of blank node ids.
    ///
    /// Blank ids are renumbered by first occurrence on both sides, then the
    /// triples are compared as sorted multisets.
    pub fn eq_modulo_blank_renaming(&self, other: &TripleSet) -> bool {
        fn canonical(ts: &TripleSet) -> Vec<Triple> {
            let mut rename: BTreeMap<String, String> = BTreeMap::new();
            let fresh = |id: &str, rename: &mut BTreeMap<String, String>| {
                let next = format!("_:c{}", rename.len() + 1);
                rename.entry(id.to_string()).or_insert(next).clone()
            };
            let mut out = Vec::with_capacity(ts.triples.len());
            for t in &ts.triples {
                let map_node = |n: &Node, rename: &mut BTreeMap<String, String>| match n {
                    Node::Blank(id) => Node::Blank(fresh(id, rename)),
                    other => other.clone(),
                };
                out.push(Triple {
                    subject: map_node(&t.subject, &mut rename),
                    predicate: t.predicate.clone(),
                    object: map_node(&t.object, &mut rename),
                });
            }
            out.sort();
            out
        }
        self.prefixes == other.prefixes && canonical(self) == canonical(other)
    }

    /// Render an IRI as a QName against this prefix table, longest namespace
    /// match first; falls back to `<full>`.
    pub fn qname<'a>(&self, iri: &'a Iri) -> Cow<'a, str> {
        let mut best: Option<(&str, &str)> = None;
        for (p, ns) in &self.prefixes {
            if let Some(rest) = iri.full().strip_prefix(ns.as_str()) {
                if !rest.is_empty() && best.is_none_or(|(_, b)| ns.len() > b.len()) {
                    best = Some((p, ns));
                }
            }
        }
        match best {
            Some((p, ns)) => Cow::Owned(format!("{p}:{}", &iri.full()[ns.len()..])),
            None => Cow::Owned(format!("<{}>", iri.full())),
        }
    }
}

/// Vocabulary IRIs understood by the model builder.
pub mod vocab {
    use super::{Iri, OWL_NS, RDFS_NS, RDF_NS, XSD_NS};

    pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const RDF_PROPERTY: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#Property";
    pub const RDFS_SUBCLASSOF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";
    pub const RDFS_DOMAIN: &str = "http://www.w3.org/2000/01/rdf-schema#domain";
    pub const RDFS_RANGE: &str = "http://www.w3.org/2000/01/rdf-schema#range";
    pub const RDFS_SUBPROPERTYOF: &str = "http://www.w3.org/2000/01/rdf-schema#subPropertyOf";
    pub const OWL_CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
    pub const OWL_RESTRICTION: &str = "http://www.w3.org/2002/07/owl#Restriction";
    pub const OWL_ON_PROPERTY: &str = "http://www.w3.org/2002/07/owl#onProperty";
    pub const OWL_SOME_VALUES_FROM: &str = "http://www.w3.org/2002/07/owl#someValuesFrom";
    pub const OWL_FUNCTIONAL_PROPERTY: &str = "http://www.w3.org/2002/07/owl#FunctionalProperty";
    // Both spellings circulate in hand-written files; they mean the same axiom.
    pub const OWL_DISJOINT_WITH: &str = "http://www.w3.org/2002/07/owl#disjointWith";
    pub const OWL_DISJOINT_WITH_UC: &str = "http://www.w3.org/2002/07/owl#DisjointWith";
    pub const OWL_EQUIVALENT_CLASS: &str = "http://www.w3.org/2002/07/owl#equivalentClass";
    pub const OWL_INTERSECTION_OF: &str = "http://www.w3.org/2002/07/owl#intersectionOf";
    pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
    pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";

    pub fn rdf_type() -> Iri {
        Iri::new("rdf", "type", RDF_TYPE)
    }

    pub fn is_disjoint_with(full: &str) -> bool {
        full == OWL_DISJOINT_WITH || full == OWL_DISJOINT_WITH_UC
    }

    /// Datatype IRIs usable as a property range.
    pub fn is_datatype(full: &str) -> bool {
        full == XSD_STRING || full == XSD_INTEGER
    }

    /// True when the IRI lives in one of the reserved vocabularies.
    pub fn is_reserved(full: &str) -> bool {
        [RDF_NS, RDFS_NS, OWL_NS, XSD_NS].iter().any(|ns| full.starts_with(ns))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iri_equality_is_by_full_form() {
        let a = Iri::new("", "Manager", "http://example.org/onto#Manager");
        let b = Iri::new("ex", "Manager", "http://example.org/onto#Manager");
        let c = Iri::new("", "Manager", "http://other.org/Manager");
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn qname_prefers_longest_namespace() {
        let mut ts = TripleSet::with_default_prefixes();
        ts.prefixes.insert("sub".into(), format!("{DEFAULT_NS}sub/"));
        let iri = Iri::from_full(format!("{DEFAULT_NS}sub/x"));
        assert_eq!(ts.qname(&iri), "sub:x");
    }

    #[test]
    fn blank_renaming_equality() {
        let t = |s: &str, o: &str| {
            Triple::new(Node::Blank(s.into()), vocab::rdf_type(), Node::Blank(o.into()))
        };
        let mut a = TripleSet::with_default_prefixes();
        a.triples.push(t("_:b1", "_:b2"));
        let mut b = TripleSet::with_default_prefixes();
        b.triples.push(t("_:x", "_:y"));
        assert!(a.eq_modulo_blank_renaming(&b));
        let mut c = TripleSet::with_default_prefixes();
        c.triples.push(t("_:x", "_:x"));
        assert!(!a.eq_modulo_blank_renaming(&c));
    }
}
