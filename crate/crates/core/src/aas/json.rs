//! JSON reader and writer for the supported AAS subset.
//!
//! The reader walks `serde_json::Value` by hand so every error carries the
//! JSON path of the offending field and unknown keys turn into warnings
//! instead of failures. The writer emits the canonical subset shape the
//! reader accepts, so write-then-read is the identity on documents.

use serde_json::{json, Map, Value};

use super::{AASDocument, AasError, AssetKind, Shell, Submodel, SubmodelElement, ValueType};

/// A parsed document plus non-fatal notes gathered along the way (unknown
/// keys, skipped unsupported elements).
#[derive(Debug, Clone)]
pub struct ParseOutcome {
    pub document: AASDocument,
    pub warnings: Vec<String>,
}

pub fn parse_aas_json(text: &[u8]) -> Result<ParseOutcome, AasError> {
    let value: Value =
        serde_json::from_slice(text).map_err(|e| AasError::JsonSyntax(e.to_string()))?;
    let mut warnings = Vec::new();
    let root = expect_object(&value, "$")?;
    warn_unknown(root, "$", &["assetAdministrationShells", "submodels"], &mut warnings);

    let mut shells = Vec::new();
    if let Some(list) = root.get("assetAdministrationShells") {
        let arr = expect_array(list, "$.assetAdministrationShells")?;
        for (i, item) in arr.iter().enumerate() {
            let path = format!("$.assetAdministrationShells[{i}]");
            shells.push(parse_shell(item, &path, &mut warnings)?);
        }
    }

    let mut submodels = Vec::new();
    if let Some(list) = root.get("submodels") {
        let arr = expect_array(list, "$.submodels")?;
        for (i, item) in arr.iter().enumerate() {
            let path = format!("$.submodels[{i}]");
            submodels.push(parse_submodel(item, &path, &mut warnings)?);
        }
    }

    Ok(ParseOutcome {
        document: AASDocument { shells, submodels },
        warnings,
    })
}

fn parse_shell(value: &Value, path: &str, warnings: &mut Vec<String>) -> Result<Shell, AasError> {
    let obj = expect_object(value, path)?;
    warn_unknown(
        obj,
        path,
        &["id", "idShort", "assetKind", "assetInformation", "submodels", "modelType"],
        warnings,
    );

    let id = required_string(obj, path, "id")?;
    let id_short = required_string(obj, path, "idShort")?;
    let asset_kind = parse_asset_kind(obj, path)?;

    let mut submodel_refs = Vec::new();
    if let Some(refs) = obj.get("submodels") {
        let arr = expect_array(refs, &format!("{path}.submodels"))?;
        for (j, item) in arr.iter().enumerate() {
            let ref_path = format!("{path}.submodels[{j}]");
            submodel_refs.push(parse_reference(item, &ref_path, warnings)?);
        }
    }

    Ok(Shell {
        id,
        id_short,
        asset_kind,
        submodel_refs,
    })
}

/// `assetKind` may sit on the shell itself (canonical subset form) or under
/// `assetInformation` (full AAS serialization); either spelling is accepted.
fn parse_asset_kind(obj: &Map<String, Value>, path: &str) -> Result<AssetKind, AasError> {
    let (raw, kind_path) = if let Some(v) = obj.get("assetKind") {
        (v, format!("{path}.assetKind"))
    } else if let Some(info) = obj.get("assetInformation") {
        let info_path = format!("{path}.assetInformation");
        let info_obj = expect_object(info, &info_path)?;
        match info_obj.get("assetKind") {
            Some(v) => (v, format!("{info_path}.assetKind")),
            None => {
                return Err(AasError::MissingField {
                    path: info_path,
                    field: "assetKind".into(),
                })
            }
        }
    } else {
        return Err(AasError::MissingField {
            path: path.to_string(),
            field: "assetKind".into(),
        });
    };
    let name = expect_string(raw, &kind_path)?;
    AssetKind::parse_name(name).ok_or_else(|| AasError::TypeMismatch {
        path: kind_path,
        message: format!("unknown asset kind `{name}` (expected Instance or Type)"),
    })
}

fn parse_submodel(
    value: &Value,
    path: &str,
    warnings: &mut Vec<String>,
) -> Result<Submodel, AasError> {
    let obj = expect_object(value, path)?;
    warn_unknown(
        obj,
        path,
        &["id", "idShort", "semanticId", "submodelElements", "modelType"],
        warnings,
    );

    let id = required_string(obj, path, "id")?;
    let id_short = required_string(obj, path, "idShort")?;
    let semantic_id = match obj.get("semanticId") {
        Some(v) => Some(parse_reference(v, &format!("{path}.semanticId"), warnings)?),
        None => None,
    };

    let mut elements = Vec::new();
    if let Some(list) = obj.get("submodelElements") {
        let arr = expect_array(list, &format!("{path}.submodelElements"))?;
        for (j, item) in arr.iter().enumerate() {
            let elem_path = format!("{path}.submodelElements[{j}]");
            if let Some(elem) = parse_element(item, &elem_path, warnings)? {
                elements.push(elem);
            }
        }
    }

    Ok(Submodel {
        id,
        id_short,
        semantic_id,
        elements,
    })
}

/// Returns `None` for unsupported element kinds (anything but a property),
/// which are skipped with a warning so richer exports still load.
fn parse_element(
    value: &Value,
    path: &str,
    warnings: &mut Vec<String>,
) -> Result<Option<SubmodelElement>, AasError> {
    let obj = expect_object(value, path)?;
    if let Some(model_type) = obj.get("modelType") {
        let name = expect_string(model_type, &format!("{path}.modelType"))?;
        if name != "Property" {
            warnings.push(format!("{path}: unsupported element type `{name}` skipped"));
            return Ok(None);
        }
    }
    warn_unknown(
        obj,
        path,
        &["modelType", "idShort", "semanticId", "valueType", "value"],
        warnings,
    );

    let id_short = required_string(obj, path, "idShort")?;
    let semantic_id = match obj.get("semanticId") {
        Some(v) => Some(parse_reference(v, &format!("{path}.semanticId"), warnings)?),
        None => None,
    };

    let vt_path = format!("{path}.valueType");
    let vt_raw = obj.get("valueType").ok_or_else(|| AasError::MissingField {
        path: path.to_string(),
        field: "valueType".into(),
    })?;
    let vt_name = expect_string(vt_raw, &vt_path)?;
    let value_type = ValueType::parse_name(vt_name).ok_or_else(|| AasError::TypeMismatch {
        path: vt_path,
        message: format!("unknown value type `{vt_name}`"),
    })?;

    let value = match obj.get("value") {
        Some(v) => {
            let value_path = format!("{path}.value");
            let lexical = expect_string(v, &value_path)?.to_string();
            if !value_type.accepts(&lexical) {
                return Err(AasError::TypeMismatch {
                    path: value_path,
                    message: format!(
                        "`{lexical}` is not a valid {} value",
                        value_type.name()
                    ),
                });
            }
            Some(lexical)
        }
        None => None,
    };

    Ok(Some(SubmodelElement {
        id_short,
        semantic_id,
        value_type,
        value,
    }))
}

/// A reference is either a bare identifier string or an AAS reference
/// object; for the object form the value of the last key is the target.
fn parse_reference(
    value: &Value,
    path: &str,
    warnings: &mut Vec<String>,
) -> Result<String, AasError> {
    match value {
        Value::String(s) => Ok(s.clone()),
        Value::Object(obj) => {
            warn_unknown(obj, path, &["type", "keys"], warnings);
            let keys_path = format!("{path}.keys");
            let keys = obj.get("keys").ok_or_else(|| AasError::MissingField {
                path: path.to_string(),
                field: "keys".into(),
            })?;
            let arr = expect_array(keys, &keys_path)?;
            let last = arr.last().ok_or_else(|| AasError::TypeMismatch {
                path: keys_path.clone(),
                message: "reference has no keys".into(),
            })?;
            let idx = arr.len() - 1;
            let key_path = format!("{keys_path}[{idx}]");
            let key_obj = expect_object(last, &key_path)?;
            warn_unknown(key_obj, &key_path, &["type", "value"], warnings);
            Ok(required_string(key_obj, &key_path, "value")?)
        }
        other => Err(AasError::TypeMismatch {
            path: path.to_string(),
            message: format!("expected a reference string or object, got {}", kind_of(other)),
        }),
    }
}

fn kind_of(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn expect_object<'a>(value: &'a Value, path: &str) -> Result<&'a Map<String, Value>, AasError> {
    value.as_object().ok_or_else(|| AasError::TypeMismatch {
        path: path.to_string(),
        message: format!("expected an object, got {}", kind_of(value)),
    })
}

fn expect_array<'a>(value: &'a Value, path: &str) -> Result<&'a Vec<Value>, AasError> {
    value.as_array().ok_or_else(|| AasError::TypeMismatch {
        path: path.to_string(),
        message: format!("expected an array, got {}", kind_of(value)),
    })
}

fn expect_string<'a>(value: &'a Value, path: &str) -> Result<&'a str, AasError> {
    value.as_str().ok_or_else(|| AasError::TypeMismatch {
        path: path.to_string(),
        message: format!("expected a string, got {}", kind_of(value)),
    })
}

fn required_string(
    obj: &Map<String, Value>,
    path: &str,
    field: &str,
) -> Result<String, AasError> {
    let value = obj.get(field).ok_or_else(|| AasError::MissingField {
        path: path.to_string(),
        field: field.to_string(),
    })?;
    Ok(expect_string(value, &format!("{path}.{field}"))?.to_string())
}

fn warn_unknown(obj: &Map<String, Value>, path: &str, known: &[&str], warnings: &mut Vec<String>) {
    for key in obj.keys() {
        if !known.contains(&key.as_str()) {
            warnings.push(format!("{path}: unknown key `{key}` ignored"));
        }
    }
}

/// Canonical JSON form of a document: the exact subset shape the parser
/// accepts, with references written as key objects.
pub fn to_json_value(doc: &AASDocument) -> Value {
    let shells: Vec<Value> = doc
        .shells
        .iter()
        .map(|shell| {
            json!({
                "id": shell.id,
                "idShort": shell.id_short,
                "assetKind": shell.asset_kind.name(),
                "submodels": shell
                    .submodel_refs
                    .iter()
                    .map(|id| model_reference("Submodel", id))
                    .collect::<Vec<Value>>(),
            })
        })
        .collect();
    let submodels: Vec<Value> = doc
        .submodels
        .iter()
        .map(|sm| {
            let mut obj = json!({
                "id": sm.id,
                "idShort": sm.id_short,
                "modelType": "Submodel",
                "submodelElements": sm
                    .elements
                    .iter()
                    .map(element_json)
                    .collect::<Vec<Value>>(),
            });
            if let Some(sem) = &sm.semantic_id {
                obj["semanticId"] = model_reference("GlobalReference", sem);
            }
            obj
        })
        .collect();
    json!({
        "assetAdministrationShells": shells,
        "submodels": submodels,
    })
}

fn element_json(elem: &SubmodelElement) -> Value {
    let mut obj = json!({
        "modelType": "Property",
        "idShort": elem.id_short,
        "valueType": elem.value_type.name(),
    });
    if let Some(sem) = &elem.semantic_id {
        obj["semanticId"] = model_reference("GlobalReference", sem);
    }
    if let Some(value) = &elem.value {
        obj["value"] = Value::String(value.clone());
    }
    obj
}

fn model_reference(key_type: &str, value: &str) -> Value {
    let ref_type = if key_type == "GlobalReference" {
        "ExternalReference"
    } else {
        "ModelReference"
    };
    json!({ "type": ref_type, "keys": [{ "type": key_type, "value": value }] })
}

/// Pretty-printed canonical JSON with a trailing newline.
pub fn to_json_string(doc: &AASDocument) -> String {
    let mut text = serde_json::to_string_pretty(&to_json_value(doc)).expect("value is plain JSON");
    text.push('\n');
    text
}
