//! Findings are the shared currency for every consistency report: the
//! TBox validator, the ABox checker, the backends and the evolution driver
//! all speak in terms of `(severity, code, subjects)`.

use std::fmt;

use serde::Serialize;

use crate::term::Iri;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

/// Closed list of finding codes; the symbolic names are part of the report
/// format and stay stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FindingCode {
    /// Subclass graph contains a cycle.
    Cycle,
    /// An axiom references a class or property that is not declared.
    DanglingRef,
    /// A type assertion names a class absent from the model.
    UndeclaredType,
    /// A property assertion does not conform to the property's signature.
    SignatureMismatch,
    /// A functional property carries two distinct values for one subject.
    FunctionalViolation,
    /// An individual is asserted in two disjoint classes.
    DisjointViolation,
    /// Closed-world reading of someValuesFrom: the required value is absent.
    RestrictionUnsatisfied,
    /// A later declaration overrode an earlier conflicting one.
    DuplicateDeclaration,
    /// A predicate outside the supported vocabulary was skipped.
    UnknownPredicate,
    /// Multiple superclasses were projected onto single inheritance.
    MultipleInheritance,
    /// No unique most-specific class; declaration order broke the tie.
    AmbiguousClass,
    /// An evolution step moved a property's domain or range.
    RetargetedProperty,
    /// An evolution step dropped a reference to a deleted class.
    DroppedReference,
    /// An equivalence axiom of an unsupported shape was ignored.
    UnhandledEquivalence,
}

impl fmt::Display for FindingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FindingCode::Cycle => "cycle",
            FindingCode::DanglingRef => "dangling-ref",
            FindingCode::UndeclaredType => "undeclared-type",
            FindingCode::SignatureMismatch => "signature-mismatch",
            FindingCode::FunctionalViolation => "functional-violation",
            FindingCode::DisjointViolation => "disjoint-violation",
            FindingCode::RestrictionUnsatisfied => "restriction-unsatisfied",
            FindingCode::DuplicateDeclaration => "duplicate-declaration",
            FindingCode::UnknownPredicate => "unknown-predicate",
            FindingCode::MultipleInheritance => "multiple-inheritance",
            FindingCode::AmbiguousClass => "ambiguous-class",
            FindingCode::RetargetedProperty => "retargeted-property",
            FindingCode::DroppedReference => "dropped-reference",
            FindingCode::UnhandledEquivalence => "unhandled-equivalence",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub code: FindingCode,
    /// Entities the finding is about; individuals for instance-level
    /// findings, classes/properties for schema-level ones.
    pub subjects: Vec<Iri>,
    /// Which stage produced the finding.
    pub backend: &'static str,
    pub message: String,
}

impl Finding {
    pub fn error(
        code: FindingCode,
        subjects: Vec<Iri>,
        backend: &'static str,
        message: impl Into<String>,
    ) -> Self {
        Finding { severity: Severity::Error, code, subjects, backend, message: message.into() }
    }

    pub fn warning(
        code: FindingCode,
        subjects: Vec<Iri>,
        backend: &'static str,
        message: impl Into<String>,
    ) -> Self {
        Finding { severity: Severity::Warning, code, subjects, backend, message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "ERROR",
            Severity::Warning => "warning",
        };
        let subjects: Vec<&str> = self.subjects.iter().map(|s| s.local_name()).collect();
        write!(f, "{tag} {} [{}] ({}): {}", self.code, subjects.join(", "), self.backend, self.message)
    }
}

/// True when no finding in the slice is an error.
pub fn no_errors(findings: &[Finding]) -> bool {
    findings.iter().all(|f| !f.is_error())
}
