//! Relational view: chained-subtable inheritance mapping with ID/SC/DIS/REF
//! columns, association tables for multi-valued properties, an in-memory
//! row store, inconsistency queries and their dual CHECK constraints.
//!
//! A row of a class table either ends the chain (SC and DIS null) or links
//! to its specialization row: SC holds the subtable row id, DIS names which
//! subtable continues the chain (lowercased class name). Synthetic chained
//! keys suffix the root id with `_1`, `_2`, ...

use std::collections::BTreeSet;
use std::fmt::Write as _;

use indexmap::IndexMap;
use thiserror::Error;

use crate::evolution::EvolutionOp;
use crate::model::{Fact, FactObject, OntologyModel, PropertyDecl};
use crate::term::{vocab, Iri, Literal};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SqlError {
    #[error("individual '{individual}' is declared in class '{class}', which has no table")]
    Population { individual: String, class: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnKind {
    Id,
    /// Link to the specialization row in the subtable named by the
    /// discriminator.
    SubclassLink,
    Discriminator { subclasses: Vec<String> },
    Reference { property: String, target_table: String },
    Data { property: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    pub nullable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableSchema {
    pub name: String,
    pub columns: Vec<Column>,
    pub primary_key: Vec<String>,
    pub foreign_keys: Vec<(String, String)>,
    /// Class the table stores, `None` for association tables.
    pub class: Option<Iri>,
    /// Owning property for association tables.
    pub property: Option<Iri>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Value {
    Id(String),
    Text(String),
    Int(i64),
    Null,
}

impl Value {
    fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    fn render(&self) -> String {
        match self {
            Value::Id(s) | Value::Text(s) => format!("'{}'", s.replace('\'', "''")),
            Value::Int(n) => n.to_string(),
            Value::Null => "NULL".to_string(),
        }
    }
}

pub type Row = IndexMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Database {
    /// table name -> rows, tables in schema order, rows in insertion order.
    pub tables: IndexMap<String, Vec<Row>>,
    /// root row id -> individual IRI.
    pub roots: IndexMap<String, Iri>,
}

impl Database {
    fn rows(&self, table: &str) -> &[Row] {
        self.tables.get(table).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Follow SC links upward until the root row id of the chain.
    fn root_of(&self, table: &str, id: &str) -> String {
        let mut current = (table.to_string(), id.to_string());
        loop {
            let mut parent = None;
            'search: for (tname, rows) in &self.tables {
                for row in rows {
                    let links = row.iter().any(|(col, v)| {
                        col.starts_with("SC") && matches!(v, Value::Id(x) if x == &current.1)
                    });
                    if links {
                        if let Some(Value::Id(pid)) = row.values().next() {
                            parent = Some((tname.clone(), pid.clone()));
                            break 'search;
                        }
                    }
                }
            }
            match parent {
                Some(p) => current = p,
                None => return current.1,
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SqlArtifact {
    pub ddl: String,
    pub inserts: String,
    /// (operation label, SELECT text) per evolution operation.
    pub queries: Vec<(String, String)>,
    /// (operation label, ALTER TABLE ... CHECK text) per operation.
    pub constraints: Vec<(String, String)>,
}

impl SqlArtifact {
    /// Full `.sql` artifact text in deterministic order.
    pub fn render(&self) -> String {
        let mut out = self.ddl.clone();
        if !self.inserts.is_empty() {
            out.push('\n');
            out.push_str(&self.inserts);
        }
        for (op, q) in &self.queries {
            let _ = write!(out, "\n-- inconsistency query for {op}\n{q};\n");
        }
        for (op, c) in &self.constraints {
            let _ = write!(out, "\n-- evolution constraint for {op}\n{c};\n");
        }
        out
    }
}

fn table_name(prop: &Iri) -> String {
    let local = prop.local_name();
    let mut chars = local.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().collect::<String>() + chars.as_str(),
        None => local.to_string(),
    }
}

fn dis_value(class: &Iri) -> String {
    class.local_name().to_lowercase()
}

fn dis_column_name(subclasses: &[Iri]) -> String {
    let mut name = String::from("DIS");
    for c in subclasses {
        name.push_str(c.local_name());
    }
    name
}

/// Functional object/data properties owned by a class (domain equals it).
fn owned_single_valued<'a>(m: &'a OntologyModel, class: &Iri) -> Vec<&'a PropertyDecl> {
    m.properties
        .values()
        .filter(|p| p.functional && p.domain.as_ref() == Some(class))
        .collect()
}

/// Table schemas for every class plus an association table per
/// non-functional property with a declared domain.
pub fn schemas(m: &OntologyModel) -> Vec<TableSchema> {
    let mut out = Vec::new();
    for class in m.classes.values() {
        let name = class.name.local_name().to_string();
        let mut columns = vec![Column {
            name: format!("ID{name}"),
            kind: ColumnKind::Id,
            nullable: false,
        }];
        let mut foreign_keys = Vec::new();
        let subclasses = m.direct_subclasses(&class.name);
        if !subclasses.is_empty() {
            columns.push(Column {
                name: format!("SC{name}"),
                kind: ColumnKind::SubclassLink,
                nullable: true,
            });
            columns.push(Column {
                name: dis_column_name(&subclasses),
                kind: ColumnKind::Discriminator {
                    subclasses: subclasses.iter().map(|c| c.local_name().to_string()).collect(),
                },
                nullable: true,
            });
        }
        for prop in owned_single_valued(m, &class.name) {
            match &prop.range {
                Some(r) if !vocab::is_datatype(r.full()) && m.classes.contains_key(r) => {
                    let col = format!("REF{}", prop.name.local_name());
                    foreign_keys.push((col.clone(), r.local_name().to_string()));
                    columns.push(Column {
                        name: col,
                        kind: ColumnKind::Reference {
                            property: prop.name.local_name().to_string(),
                            target_table: r.local_name().to_string(),
                        },
                        nullable: true,
                    });
                }
                _ => {
                    columns.push(Column {
                        name: prop.name.local_name().to_string(),
                        kind: ColumnKind::Data { property: prop.name.local_name().to_string() },
                        nullable: true,
                    });
                }
            }
        }
        out.push(TableSchema {
            primary_key: vec![format!("ID{name}")],
            name,
            columns,
            foreign_keys,
            class: Some(class.name.clone()),
            property: None,
        });
    }

    for prop in m.properties.values() {
        if prop.functional {
            continue;
        }
        let Some(domain) = prop.domain.as_ref().filter(|d| m.classes.contains_key(*d)) else {
            continue;
        };
        let name = table_name(&prop.name);
        let left = format!("ID{}", domain.local_name());
        let mut columns = vec![Column {
            name: left.clone(),
            kind: ColumnKind::Reference {
                property: prop.name.local_name().to_string(),
                target_table: domain.local_name().to_string(),
            },
            nullable: false,
        }];
        let mut foreign_keys = vec![(left.clone(), domain.local_name().to_string())];
        let right = match &prop.range {
            Some(r) if !vocab::is_datatype(r.full()) && m.classes.contains_key(r) => {
                // self-referencing association: keep the two columns apart
                let col = if r == domain {
                    format!("ID{}2", r.local_name())
                } else {
                    format!("ID{}", r.local_name())
                };
                foreign_keys.push((col.clone(), r.local_name().to_string()));
                columns.push(Column {
                    name: col.clone(),
                    kind: ColumnKind::Reference {
                        property: prop.name.local_name().to_string(),
                        target_table: r.local_name().to_string(),
                    },
                    nullable: false,
                });
                col
            }
            _ => {
                let col = prop.name.local_name().to_string();
                columns.push(Column {
                    name: col.clone(),
                    kind: ColumnKind::Data { property: prop.name.local_name().to_string() },
                    nullable: false,
                });
                col
            }
        };
        out.push(TableSchema {
            primary_key: vec![left, right],
            name,
            columns,
            foreign_keys,
            class: None,
            property: Some(prop.name.clone()),
        });
    }
    out
}

/// DDL plus schemas. Disjointness and restrictions ride along as trigger
/// comment stubs; the in-memory evaluator enforces those semantics instead
/// of a vendor trigger dialect.
pub fn emit_ddl(m: &OntologyModel) -> (SqlArtifact, Vec<TableSchema>) {
    let schemas = schemas(m);
    let mut ddl = String::new();
    for schema in &schemas {
        let _ = writeln!(ddl, "CREATE TABLE {} (", schema.name);
        let mut lines = Vec::new();
        for col in &schema.columns {
            let ty = match &col.kind {
                ColumnKind::Id | ColumnKind::SubclassLink | ColumnKind::Reference { .. } => "INTEGER",
                ColumnKind::Discriminator { .. } => "VARCHAR(64)",
                ColumnKind::Data { .. } => "VARCHAR(255)",
            };
            let mut line = format!("  {} {ty}", col.name);
            if schema.primary_key.len() == 1 && schema.primary_key[0] == col.name {
                line.push_str(" PRIMARY KEY");
            }
            if let ColumnKind::Reference { target_table, .. } = &col.kind {
                line.push_str(&format!(" REFERENCES {target_table}"));
            }
            lines.push(line);
        }
        if schema.primary_key.len() > 1 {
            lines.push(format!("  PRIMARY KEY ({})", schema.primary_key.join(", ")));
        }
        let _ = writeln!(ddl, "{}\n);", lines.join(",\n"));
    }

    for class in m.classes.values() {
        for other in &class.disjoint_with {
            if class.name.local_name() <= other.local_name() {
                let _ = writeln!(
                    ddl,
                    "-- trigger stub: BEFORE INSERT on {} and {} rejects membership in both (disjoint classes)",
                    class.name.local_name(),
                    other.local_name()
                );
            }
        }
        for r in &class.restrictions {
            let _ = writeln!(
                ddl,
                "-- trigger stub: BEFORE INSERT on {} checks '{}' has a value in {}",
                class.name.local_name(),
                r.on_property.local_name(),
                r.target().local_name()
            );
        }
        if class.complete {
            let _ = writeln!(
                ddl,
                "-- view stub: {} is a complete (defined) class; an intersection view with INSTEAD OF triggers could replace its table",
                class.name.local_name()
            );
        }
    }

    (SqlArtifact { ddl, ..Default::default() }, schemas)
}

fn chained_id(root: &str, level: usize) -> String {
    if level == 0 {
        root.to_string()
    } else {
        format!("{root}_{level}")
    }
}

/// Fill rows from the ABox: one row per chain level per individual, linked
/// root-to-leaf through SC values, REF and data columns at the level that
/// owns them, association tables from multi-valued assertions.
pub fn populate(m: &OntologyModel, schemas: &[TableSchema]) -> Result<Database, SqlError> {
    let mut db = Database::default();
    for schema in schemas {
        db.tables.insert(schema.name.clone(), Vec::new());
    }
    let schema_of = |name: &str| schemas.iter().find(|s| s.name == name);

    // target individual -> its id at the level of a given class
    let id_at_level = |m: &OntologyModel, individual: &Iri, class: &Iri| -> String {
        let Some((leaf, _)) = m.most_specific_class(individual) else {
            return individual.local_name().to_string();
        };
        let chain = m.primary_chain(&leaf);
        match chain.iter().position(|c| c == class) {
            Some(level) => chained_id(individual.local_name(), level),
            None => individual.local_name().to_string(),
        }
    };

    for individual in m.individuals() {
        let Some((leaf, _)) = m.most_specific_class(&individual) else {
            continue; // untyped individuals own no rows
        };
        if !m.classes.contains_key(&leaf) {
            return Err(SqlError::Population {
                individual: individual.local_name().to_string(),
                class: leaf.local_name().to_string(),
            });
        }
        let chain = m.primary_chain(&leaf);
        for (level, class) in chain.iter().enumerate() {
            let Some(schema) = schema_of(class.local_name()) else {
                return Err(SqlError::Population {
                    individual: individual.local_name().to_string(),
                    class: class.local_name().to_string(),
                });
            };
            let mut row = Row::new();
            let id = chained_id(individual.local_name(), level);
            for col in &schema.columns {
                let value = match &col.kind {
                    ColumnKind::Id => Value::Id(id.clone()),
                    ColumnKind::SubclassLink => match chain.get(level + 1) {
                        Some(_) => Value::Id(chained_id(individual.local_name(), level + 1)),
                        None => Value::Null,
                    },
                    ColumnKind::Discriminator { .. } => match chain.get(level + 1) {
                        Some(next) => Value::Text(dis_value(next)),
                        None => Value::Null,
                    },
                    ColumnKind::Reference { property, .. } | ColumnKind::Data { property } => {
                        let target = m
                            .properties
                            .keys()
                            .find(|p| p.local_name() == property.as_str())
                            .cloned();
                        let fact_value = target.and_then(|prop| {
                            m.abox.iter().find_map(|f| match f {
                                Fact::PropAssertion { subject, property: p, object }
                                    if subject == &individual && p == &prop =>
                                {
                                    Some(object.clone())
                                }
                                _ => None,
                            })
                        });
                        match (fact_value, &col.kind) {
                            (Some(FactObject::Individual(o)), ColumnKind::Reference { .. }) => {
                                let range = m
                                    .property(
                                        &m.properties
                                            .keys()
                                            .find(|p| {
                                                p.local_name() == property.as_str()
                                            })
                                            .cloned()
                                            .expect("property exists"),
                                    )
                                    .and_then(|p| p.range.clone());
                                match range {
                                    Some(r) => Value::Id(id_at_level(m, &o, &r)),
                                    None => Value::Id(o.local_name().to_string()),
                                }
                            }
                            (Some(FactObject::Literal(Literal::Integer(n))), _) => Value::Int(n),
                            (Some(FactObject::Literal(Literal::String(s))), _) => Value::Text(s),
                            (Some(FactObject::Individual(o)), ColumnKind::Data { .. }) => {
                                Value::Id(o.local_name().to_string())
                            }
                            (None, _) => Value::Null,
                            _ => Value::Null,
                        }
                    }
                };
                row.insert(col.name.clone(), value);
            }
            db.tables.get_mut(class.local_name()).expect("table exists").push(row);
        }
        db.roots.insert(individual.local_name().to_string(), individual.clone());
    }

    // association tables from non-functional assertions, in ABox order
    for fact in &m.abox {
        let Fact::PropAssertion { subject, property, object } = fact else { continue };
        let Some(prop) = m.property(property) else { continue };
        if prop.functional {
            continue;
        }
        let Some(schema) = schemas.iter().find(|s| s.property.as_ref() == Some(property)) else {
            continue;
        };
        let Some(domain) = &prop.domain else { continue };
        let mut row = Row::new();
        row.insert(
            schema.columns[0].name.clone(),
            Value::Id(id_at_level(m, subject, domain)),
        );
        let value = match object {
            FactObject::Individual(o) => match &prop.range {
                Some(r) if m.classes.contains_key(r) => Value::Id(id_at_level(m, o, r)),
                _ => Value::Id(o.local_name().to_string()),
            },
            FactObject::Literal(Literal::Integer(n)) => Value::Int(*n),
            FactObject::Literal(Literal::String(s)) => Value::Text(s.clone()),
        };
        row.insert(schema.columns[1].name.clone(), value);
        db.tables.get_mut(&schema.name).expect("table exists").push(row);
    }

    Ok(db)
}

/// Rebuild the ABox a database encodes: root ids and leaf classes from the
/// DIS chains, property assertions from REF/data columns and association
/// rows.
pub fn reconstruct_abox(db: &Database, m: &OntologyModel, schemas: &[TableSchema]) -> Vec<Fact> {
    let mut facts = Vec::new();
    let class_by_table = |name: &str| -> Option<&Iri> {
        schemas.iter().find(|s| s.name == name).and_then(|s| s.class.as_ref())
    };
    let class_by_dis = |tables: &[String], value: &str| -> Option<String> {
        tables.iter().find(|t| t.to_lowercase() == value).cloned()
    };

    // follow each root chain downward
    for (root_id, individual) in &db.roots {
        // root table = table of the first chain class
        let Some((leaf, _)) = m.most_specific_class(individual) else { continue };
        let chain = m.primary_chain(&leaf);
        let Some(root_class) = chain.first() else { continue };
        let mut table = root_class.local_name().to_string();
        let mut id = root_id.clone();
        let mut leaf_class = table.clone();
        while let Some(row) = db
            .rows(&table)
            .iter()
            .find(|r| matches!(r.values().next(), Some(Value::Id(x)) if x == &id))
        {
            leaf_class = table.clone();
            // property values owned at this level
            for (col, value) in row.iter() {
                if value.is_null() {
                    continue;
                }
                let Some(schema) = schemas.iter().find(|s| s.name == table) else { continue };
                let Some(column) = schema.columns.iter().find(|c| &c.name == col) else {
                    continue;
                };
                match (&column.kind, value) {
                    (ColumnKind::Reference { property, target_table }, Value::Id(v)) => {
                        let object = resolve_reference(db, target_table, v);
                        push_prop(&mut facts, m, individual, property, FactObject::Individual(object));
                    }
                    (ColumnKind::Data { property }, Value::Int(n)) => {
                        push_prop(
                            &mut facts,
                            m,
                            individual,
                            property,
                            FactObject::Literal(Literal::Integer(*n)),
                        );
                    }
                    (ColumnKind::Data { property }, Value::Text(s)) => {
                        push_prop(
                            &mut facts,
                            m,
                            individual,
                            property,
                            FactObject::Literal(Literal::String(s.clone())),
                        );
                    }
                    _ => {}
                }
            }
            // descend
            let sc = row.iter().find(|(c, _)| c.starts_with("SC")).map(|(_, v)| v.clone());
            let dis = row
                .iter()
                .find(|(c, _)| c.starts_with("DIS"))
                .map(|(_, v)| v.clone());
            match (sc, dis) {
                (Some(Value::Id(next_id)), Some(Value::Text(d))) => {
                    let tables: Vec<String> = db.tables.keys().cloned().collect();
                    match class_by_dis(&tables, &d) {
                        Some(next_table) => {
                            table = next_table;
                            id = next_id;
                        }
                        None => break,
                    }
                }
                _ => break,
            }
        }
        if let Some(class) = class_by_table(&leaf_class) {
            facts.push(Fact::TypeAssertion { individual: individual.clone(), class: class.clone() });
        }
    }

    // association tables
    for schema in schemas {
        let Some(property) = &schema.property else { continue };
        for row in db.rows(&schema.name) {
            let mut values = row.values();
            let Some(Value::Id(subj_id)) = values.next() else { continue };
            let subject_table = &schema.foreign_keys[0].1;
            let subject_root = db.root_of(subject_table, subj_id);
            let Some(subject) = db.roots.get(&subject_root) else { continue };
            let object = match values.next() {
                Some(Value::Id(v)) => {
                    let target_table =
                        schema.foreign_keys.get(1).map(|(_, t)| t.as_str()).unwrap_or("");
                    FactObject::Individual(resolve_reference(db, target_table, v))
                }
                Some(Value::Int(n)) => FactObject::Literal(Literal::Integer(*n)),
                Some(Value::Text(s)) => FactObject::Literal(Literal::String(s.clone())),
                _ => continue,
            };
            push_prop(&mut facts, m, subject, property.local_name(), object);
        }
    }
    facts
}

fn resolve_reference(db: &Database, target_table: &str, id: &str) -> Iri {
    let root = db.root_of(target_table, id);
    db.roots
        .get(&root)
        .cloned()
        .unwrap_or_else(|| Iri::local(&root))
}

fn push_prop(facts: &mut Vec<Fact>, m: &OntologyModel, subject: &Iri, property: &str, object: FactObject) {
    if let Some(prop) = m.properties.keys().find(|p| p.local_name() == property) {
        facts.push(Fact::PropAssertion { subject: subject.clone(), property: prop.clone(), object });
    }
}

/// Predicate over one row, with enough structure to render SQL text and to
/// negate into the dual CHECK constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SqlPred {
    IsNull(String),
    IsNotNull(String),
    /// Discriminator equality against a bare lowercase class name.
    Eq(String, String),
    Neq(String, String),
    /// The subject row in `via_table` specializes down to `class`. Rendered
    /// as an IN subquery built once from the schema; evaluated by following
    /// SC/DIS chains.
    Specializes { via_table: String, class: String, id_col: String, reach_sql: String },
    NotSpecializes { via_table: String, class: String, id_col: String, reach_sql: String },
    And(Box<SqlPred>, Box<SqlPred>),
    Or(Box<SqlPred>, Box<SqlPred>),
    Always(bool),
}

impl SqlPred {
    pub fn negate(&self) -> SqlPred {
        match self {
            SqlPred::IsNull(c) => SqlPred::IsNotNull(c.clone()),
            SqlPred::IsNotNull(c) => SqlPred::IsNull(c.clone()),
            SqlPred::Eq(c, v) => SqlPred::Neq(c.clone(), v.clone()),
            SqlPred::Neq(c, v) => SqlPred::Eq(c.clone(), v.clone()),
            SqlPred::Specializes { via_table, class, id_col, reach_sql } => SqlPred::NotSpecializes {
                via_table: via_table.clone(),
                class: class.clone(),
                id_col: id_col.clone(),
                reach_sql: reach_sql.clone(),
            },
            SqlPred::NotSpecializes { via_table, class, id_col, reach_sql } => SqlPred::Specializes {
                via_table: via_table.clone(),
                class: class.clone(),
                id_col: id_col.clone(),
                reach_sql: reach_sql.clone(),
            },
            SqlPred::And(a, b) => SqlPred::Or(Box::new(a.negate()), Box::new(b.negate())),
            SqlPred::Or(a, b) => SqlPred::And(Box::new(a.negate()), Box::new(b.negate())),
            SqlPred::Always(b) => SqlPred::Always(!b),
        }
    }

    /// Render with the keyword casing of the inconsistency listings
    /// (`IS NOT NULL`, lowercase `and`/`or`, bare discriminator values).
    fn render(&self) -> String {
        match self {
            SqlPred::IsNull(c) => format!("{c} IS NULL"),
            SqlPred::IsNotNull(c) => format!("{c} IS NOT NULL"),
            SqlPred::Eq(c, v) => format!("{c} = {v}"),
            SqlPred::Neq(c, v) => format!("{c} != {v}"),
            SqlPred::Specializes { via_table, id_col, reach_sql, .. } => {
                format!("{id_col} IN (SELECT {id_col} FROM {via_table} WHERE {reach_sql})")
            }
            SqlPred::NotSpecializes { via_table, id_col, reach_sql, .. } => {
                format!("{id_col} NOT IN (SELECT {id_col} FROM {via_table} WHERE {reach_sql})")
            }
            SqlPred::And(a, b) => format!("{} and {}", a.render(), b.render()),
            SqlPred::Or(a, b) => format!("{} or {}", a.render(), b.render()),
            SqlPred::Always(true) => "1 = 1".to_string(),
            SqlPred::Always(false) => "1 = 0".to_string(),
        }
    }
}

/// SQL condition on a row of `from`'s table that holds exactly when the
/// row's chain continues down to `target`.
fn reach_condition(m: &OntologyModel, from: &Iri, target: &Iri) -> String {
    if from == target {
        return "1 = 1".to_string();
    }
    let subclasses = m.direct_subclasses(from);
    let dis = dis_column_name(&subclasses);
    let next = subclasses
        .iter()
        .find(|c| m.subtree(c).contains(target))
        .cloned()
        .expect("target below from");
    if &next == target {
        format!("{dis} = {}", dis_value(target))
    } else {
        format!(
            "{dis} = {} and SC{} IN (SELECT ID{} FROM {} WHERE {})",
            dis_value(&next),
            from.local_name(),
            next.local_name(),
            next.local_name(),
            reach_condition(m, &next, target)
        )
    }
}

fn specializes_pred(m: &OntologyModel, via: &Iri, target: &Iri, negated: bool) -> SqlPred {
    let via_table = via.local_name().to_string();
    let class = target.local_name().to_string();
    let id_col = format!("ID{via_table}");
    let reach_sql = reach_condition(m, via, target);
    if negated {
        SqlPred::NotSpecializes { via_table, class, id_col, reach_sql }
    } else {
        SqlPred::Specializes { via_table, class, id_col, reach_sql }
    }
}

/// The query shapes this module emits; the evaluator supports exactly
/// these.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InconsistencyQuery {
    pub table: String,
    pub predicate: SqlPred,
    /// ChangeDomain on a multi-valued property scans the association table
    /// and tests the subject row's chain instead of local columns.
    pub association_subject_table: Option<String>,
    /// Keyword casing differs between the two listings; kept per operation.
    upper_from: bool,
}

impl InconsistencyQuery {
    pub fn render(&self) -> String {
        let from = if self.upper_from { "FROM" } else { "from" };
        format!("SELECT * {from} {} where {}", self.table, self.predicate.render())
    }
}

/// Build the inconsistency query for an operation against the
/// pre-evolution model.
pub fn emit_inconsistency_query(op: &EvolutionOp, m: &OntologyModel) -> InconsistencyQuery {
    match op {
        EvolutionOp::ChangeDomain { property, new_domain } => {
            let prop = m.property(property);
            let old_domain = prop.and_then(|p| p.domain.clone());
            let functional = prop.map(|p| p.functional).unwrap_or(true);
            match (old_domain, functional) {
                (Some(d), true) => {
                    let table = d.local_name().to_string();
                    // same naming rule as the schema: REF column for object
                    // ranges, plain data column otherwise
                    let is_ref = prop.is_some_and(|p| {
                        p.range
                            .as_ref()
                            .is_some_and(|r| !vocab::is_datatype(r.full()) && m.classes.contains_key(r))
                    });
                    let ref_col = if is_ref {
                        format!("REF{}", property.local_name())
                    } else {
                        property.local_name().to_string()
                    };
                    let pred = if m.subtree(new_domain).contains(&d) {
                        // widening: every owner row already reaches the new domain
                        SqlPred::Always(false)
                    } else if m.subtree(&d).contains(new_domain) {
                        SqlPred::And(
                            Box::new(SqlPred::IsNotNull(ref_col)),
                            Box::new(descend_pred(m, &d, new_domain)),
                        )
                    } else {
                        SqlPred::IsNotNull(ref_col)
                    };
                    InconsistencyQuery {
                        table,
                        predicate: pred,
                        association_subject_table: None,
                        upper_from: false,
                    }
                }
                (Some(d), false) => {
                    let assoc = m
                        .properties
                        .get(property)
                        .map(|p| table_name(&p.name))
                        .unwrap_or_default();
                    let pred = if m.subtree(new_domain).contains(&d) {
                        SqlPred::Always(false)
                    } else if m.subtree(&d).contains(new_domain) {
                        specializes_pred(m, &d, new_domain, true)
                    } else {
                        // the new domain is unrelated to the owner: no
                        // subject row can reach it
                        SqlPred::Always(true)
                    };
                    InconsistencyQuery {
                        table: assoc,
                        predicate: pred,
                        association_subject_table: Some(d.local_name().to_string()),
                        upper_from: false,
                    }
                }
                (None, _) => InconsistencyQuery {
                    table: String::new(),
                    predicate: SqlPred::Always(false),
                    association_subject_table: None,
                    upper_from: false,
                },
            }
        }
        EvolutionOp::DeleteClass { class } => {
            let table = class.local_name().to_string();
            let has_subclasses = !m.direct_subclasses(class).is_empty();
            let pred = if has_subclasses {
                SqlPred::IsNull(format!("SC{table}"))
            } else {
                SqlPred::Always(true)
            };
            InconsistencyQuery {
                table,
                predicate: pred,
                association_subject_table: None,
                upper_from: true,
            }
        }
    }
}

/// Condition for "this row does not specialize toward `target`", with
/// `target` strictly below `from`. One level away this is the plain
/// discriminator test of the listings; deeper chains need the subquery
/// form, a single-table filter cannot see the subtable.
fn descend_pred(m: &OntologyModel, from: &Iri, target: &Iri) -> SqlPred {
    let subclasses = m.direct_subclasses(from);
    let next = subclasses
        .iter()
        .find(|c| m.subtree(c).contains(target))
        .cloned()
        .expect("target below from");
    if &next == target {
        SqlPred::Neq(dis_column_name(&subclasses), dis_value(target))
    } else {
        specializes_pred(m, from, target, true)
    }
}

/// The dual CHECK constraint: a row violates it exactly when the
/// inconsistency query selects the row.
pub fn emit_evolution_constraints(op: &EvolutionOp, m: &OntologyModel) -> String {
    let query = emit_inconsistency_query(op, m);
    let dual = query.predicate.negate();
    format!("ALTER TABLE {} ADD CONSTRAINT CHECK({})", query.table, dual.render())
}

/// Does the chain starting at this row (in `table`) reach `class`?
fn row_specializes(db: &Database, m: &OntologyModel, table: &str, row: &Row, class: &str) -> bool {
    if table == class {
        return true;
    }
    let sc = row.iter().find(|(c, _)| c.starts_with("SC")).map(|(_, v)| v);
    let dis = row.iter().find(|(c, _)| c.starts_with("DIS")).map(|(_, v)| v);
    if let (Some(Value::Id(next_id)), Some(Value::Text(d))) = (sc, dis) {
        let next_table = m
            .classes
            .keys()
            .find(|c| c.local_name().to_lowercase() == *d)
            .map(|c| c.local_name().to_string());
        if let Some(next_table) = next_table {
            if let Some(next_row) = db
                .rows(&next_table)
                .iter()
                .find(|r| matches!(r.values().next(), Some(Value::Id(x)) if x == next_id))
            {
                return row_specializes(db, m, &next_table, next_row, class);
            }
        }
    }
    false
}

fn eval_pred(db: &Database, m: &OntologyModel, table: &str, row: &Row, pred: &SqlPred) -> bool {
    match pred {
        SqlPred::IsNull(c) => row.get(c).is_none_or(Value::is_null),
        SqlPred::IsNotNull(c) => row.get(c).is_some_and(|v| !v.is_null()),
        // the listings compare a possibly-null discriminator with a plain
        // value; absence counts as a mismatch rather than SQL's UNKNOWN
        SqlPred::Eq(c, v) => matches!(row.get(c), Some(Value::Text(x)) if x == v),
        SqlPred::Neq(c, v) => !matches!(row.get(c), Some(Value::Text(x)) if x == v),
        SqlPred::Specializes { via_table, class, .. } => {
            resolve_subject_row(db, table, row, via_table)
                .is_some_and(|r| row_specializes(db, m, via_table, r, class))
        }
        SqlPred::NotSpecializes { via_table, class, .. } => {
            !resolve_subject_row(db, table, row, via_table)
                .is_some_and(|r| row_specializes(db, m, via_table, r, class))
        }
        SqlPred::And(a, b) => {
            eval_pred(db, m, table, row, a) && eval_pred(db, m, table, row, b)
        }
        SqlPred::Or(a, b) => eval_pred(db, m, table, row, a) || eval_pred(db, m, table, row, b),
        SqlPred::Always(b) => *b,
    }
}

/// For association rows the chain test starts at the subject row in the
/// domain table; for entity rows it starts at the row itself.
fn resolve_subject_row<'a>(
    db: &'a Database,
    table: &str,
    row: &'a Row,
    via_table: &str,
) -> Option<&'a Row> {
    if table == via_table {
        return Some(row);
    }
    let subject_id = match row.values().next() {
        Some(Value::Id(id)) => id,
        _ => return None,
    };
    db.rows(via_table)
        .iter()
        .find(|r| matches!(r.values().next(), Some(Value::Id(x)) if x == subject_id))
}

/// Rows the query selects, mapped back to root individual ids.
pub fn eval_inconsistency(db: &Database, op: &EvolutionOp, m: &OntologyModel) -> BTreeSet<String> {
    let query = emit_inconsistency_query(op, m);
    let mut out = BTreeSet::new();
    for row in db.rows(&query.table) {
        if eval_pred(db, m, &query.table, row, &query.predicate) {
            out.insert(root_of_row(db, &query, row));
        }
    }
    out
}

/// Rows violating the dual CHECK constraint, mapped the same way; must be
/// exactly the rows the query selects.
pub fn eval_check_violations(db: &Database, op: &EvolutionOp, m: &OntologyModel) -> BTreeSet<String> {
    let query = emit_inconsistency_query(op, m);
    let dual = query.predicate.negate();
    let mut out = BTreeSet::new();
    for row in db.rows(&query.table) {
        if !eval_pred(db, m, &query.table, row, &dual) {
            out.insert(root_of_row(db, &query, row));
        }
    }
    out
}

fn root_of_row(db: &Database, query: &InconsistencyQuery, row: &Row) -> String {
    match &query.association_subject_table {
        Some(subject_table) => {
            let id = match row.values().next() {
                Some(Value::Id(id)) => id.clone(),
                _ => return String::new(),
            };
            db.root_of(subject_table, &id)
        }
        None => {
            let id = match row.values().next() {
                Some(Value::Id(id)) => id.clone(),
                _ => return String::new(),
            };
            db.root_of(&query.table, &id)
        }
    }
}

/// Deterministic INSERT statements for the whole database.
pub fn render_inserts(db: &Database, schemas: &[TableSchema]) -> String {
    let mut out = String::new();
    for schema in schemas {
        for row in db.rows(&schema.name) {
            let cols: Vec<&str> = row.keys().map(String::as_str).collect();
            let vals: Vec<String> = row.values().map(Value::render).collect();
            let _ = writeln!(
                out,
                "INSERT INTO {} ({}) VALUES ({});",
                schema.name,
                cols.join(", "),
                vals.join(", ")
            );
        }
    }
    out
}
