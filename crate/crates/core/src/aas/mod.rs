//! Typed Asset Administration Shell documents over a frozen JSON subset.
//!
//! A document holds shells and submodels; shells reference submodels by id,
//! submodels carry property elements. Parsing ([`parse_aas_json`]) rejects
//! structural errors with JSON paths; [`validate`] reports semantic
//! violations (dangling references, duplicate ids) as data rather than
//! errors. Element order inside a submodel is preserved here even though the
//! RDF mapping drops it. Schema reference: `docs/aas-json-subset.md`.

mod json;

pub use json::{parse_aas_json, to_json_string, to_json_value, ParseOutcome};

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AasError {
    #[error("JSON syntax error: {0}")]
    JsonSyntax(String),
    #[error("{path}: missing required field `{field}`")]
    MissingField { path: String, field: String },
    #[error("{path}: {message}")]
    TypeMismatch { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AASDocument {
    pub shells: Vec<Shell>,
    pub submodels: Vec<Submodel>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shell {
    pub id: String,
    pub id_short: String,
    pub asset_kind: AssetKind,
    /// Submodel ids this shell points at, in document order.
    pub submodel_refs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Submodel {
    pub id: String,
    pub id_short: String,
    pub semantic_id: Option<String>,
    pub elements: Vec<SubmodelElement>,
}

/// A property-style element: a named, typed, optionally valued leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubmodelElement {
    pub id_short: String,
    pub semantic_id: Option<String>,
    pub value_type: ValueType,
    pub value: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssetKind {
    Instance,
    Type,
}

impl AssetKind {
    pub fn name(self) -> &'static str {
        match self {
            AssetKind::Instance => "Instance",
            AssetKind::Type => "Type",
        }
    }

    pub fn parse_name(s: &str) -> Option<Self> {
        match s {
            "Instance" => Some(AssetKind::Instance),
            "Type" => Some(AssetKind::Type),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueType {
    String,
    Integer,
    Decimal,
    Boolean,
}

impl ValueType {
    pub fn name(self) -> &'static str {
        match self {
            ValueType::String => "string",
            ValueType::Integer => "integer",
            ValueType::Decimal => "decimal",
            ValueType::Boolean => "boolean",
        }
    }

    /// Accepts the canonical names plus the `xs:`-prefixed spellings found
    /// in AAS exports.
    pub fn parse_name(s: &str) -> Option<Self> {
        match s {
            "string" | "xs:string" => Some(ValueType::String),
            "integer" | "xs:int" | "xs:integer" | "xs:long" => Some(ValueType::Integer),
            "decimal" | "xs:decimal" | "xs:double" | "xs:float" => Some(ValueType::Decimal),
            "boolean" | "xs:boolean" => Some(ValueType::Boolean),
            _ => None,
        }
    }

    /// XSD datatype IRI used when the value becomes an RDF literal.
    pub fn datatype_iri(self) -> &'static str {
        match self {
            ValueType::String => "http://www.w3.org/2001/XMLSchema#string",
            ValueType::Integer => "http://www.w3.org/2001/XMLSchema#integer",
            ValueType::Decimal => "http://www.w3.org/2001/XMLSchema#decimal",
            ValueType::Boolean => "http://www.w3.org/2001/XMLSchema#boolean",
        }
    }

    /// Whether `lexical` is a well-formed value of this type.
    pub fn accepts(self, lexical: &str) -> bool {
        match self {
            ValueType::String => true,
            ValueType::Integer => lexical.parse::<i64>().is_ok(),
            ValueType::Decimal => lexical.parse::<f64>().map(f64::is_finite).unwrap_or(false),
            ValueType::Boolean => matches!(lexical, "true" | "false" | "1" | "0"),
        }
    }
}

impl AASDocument {
    pub fn submodel_by_id(&self, id: &str) -> Option<&Submodel> {
        self.submodels.iter().find(|sm| sm.id == id)
    }

    pub fn shell_by_id(&self, id: &str) -> Option<&Shell> {
        self.shells.iter().find(|sh| sh.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    DanglingReference,
    DuplicateId,
    DuplicateElementIdShort,
    EmptyField,
    BadLexicalValue,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ViolationKind::DanglingReference => "dangling-reference",
            ViolationKind::DuplicateId => "duplicate-id",
            ViolationKind::DuplicateElementIdShort => "duplicate-element-id-short",
            ViolationKind::EmptyField => "empty-field",
            ViolationKind::BadLexicalValue => "bad-lexical-value",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] at {}: {}", self.kind, self.path, self.message)
    }
}

/// Check document-level invariants. Empty result means the document is
/// consistent; violations carry the path of the offending field.
pub fn validate(doc: &AASDocument) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut seen_ids: HashSet<&str> = HashSet::new();
    let submodel_ids: HashSet<&str> = doc.submodels.iter().map(|sm| sm.id.as_str()).collect();

    for (i, shell) in doc.shells.iter().enumerate() {
        let path = format!("shells[{i}]");
        if shell.id.is_empty() {
            violations.push(empty_field(&path, "id"));
        }
        if shell.id_short.is_empty() {
            violations.push(empty_field(&path, "idShort"));
        }
        if !shell.id.is_empty() && !seen_ids.insert(&shell.id) {
            violations.push(duplicate_id(&path, &shell.id));
        }
        for (j, sm_ref) in shell.submodel_refs.iter().enumerate() {
            if !submodel_ids.contains(sm_ref.as_str()) {
                violations.push(Violation {
                    kind: ViolationKind::DanglingReference,
                    path: format!("{path}.submodelRefs[{j}]"),
                    message: format!("no submodel with id `{sm_ref}`"),
                });
            }
        }
    }

    for (i, sm) in doc.submodels.iter().enumerate() {
        let path = format!("submodels[{i}]");
        if sm.id.is_empty() {
            violations.push(empty_field(&path, "id"));
        }
        if !sm.id.is_empty() && !seen_ids.insert(&sm.id) {
            violations.push(duplicate_id(&path, &sm.id));
        }
        let mut elem_names: HashSet<&str> = HashSet::new();
        for (j, elem) in sm.elements.iter().enumerate() {
            let elem_path = format!("{path}.elements[{j}]");
            if !elem_names.insert(&elem.id_short) {
                violations.push(Violation {
                    kind: ViolationKind::DuplicateElementIdShort,
                    path: elem_path.clone(),
                    message: format!("idShort `{}` repeats within the submodel", elem.id_short),
                });
            }
            if let Some(value) = &elem.value {
                if !elem.value_type.accepts(value) {
                    violations.push(Violation {
                        kind: ViolationKind::BadLexicalValue,
                        path: elem_path,
                        message: format!(
                            "`{value}` is not a valid {} value",
                            elem.value_type.name()
                        ),
                    });
                }
            }
        }
    }

    violations
}

fn empty_field(path: &str, field: &str) -> Violation {
    Violation {
        kind: ViolationKind::EmptyField,
        path: format!("{path}.{field}"),
        message: format!("`{field}` must be non-empty"),
    }
}

fn duplicate_id(path: &str, id: &str) -> Violation {
    Violation {
        kind: ViolationKind::DuplicateId,
        path: path.to_string(),
        message: format!("id `{id}` already used"),
    }
}
