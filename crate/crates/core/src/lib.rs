//! Compiles a small OWL/N3 ontology (TBox + ABox) into three synchronized
//! representations — a type system, an object-oriented class model and a
//! relational schema — and, under evolution operations such as a property
//! domain change or a class deletion, detects the instances each
//! representation rejects and verifies that all three agree.

pub mod checker;
pub mod evolution;
pub mod finding;
pub mod model;
pub mod oo;
pub mod sql;
pub mod term;
pub mod turtle;
pub mod typesys;

pub use checker::{check_abox, infer_domain_types, CheckConfig};
pub use evolution::{apply_op, detect, parse_ops, EvolutionOp, EvolutionReport};
pub use finding::{Finding, FindingCode, Severity};
pub use model::{build_model, is_subtype, validate_tbox, OntologyModel};
pub use term::{Iri, Literal, Node, Triple, TripleSet};
pub use turtle::{parse_document, serialize, ParseError};
