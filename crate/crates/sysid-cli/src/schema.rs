//! Minimal JSON schema checker covering the subset used by the shipped
//! schemas: type, properties, required, additionalProperties (boolean),
//! items, enum, minimum, exclusiveMinimum, minItems, maxItems.
//!
//! Every artifact the tool emits is validated against its schema before
//! it reaches disk, so a schema drift is a test failure here rather than
//! a surprise for downstream consumers.

use serde_json::Value;

use crate::CliError;

/// Validate `value` against `schema`, returning all violations as
/// `path: message` strings. Empty means valid.
pub fn validate(schema: &Value, value: &Value) -> Vec<String> {
    let mut errors = Vec::new();
    check(schema, value, "$", &mut errors);
    errors
}

/// Validate and convert violations into a single `CliError::Data`.
pub fn require_valid(schema: &Value, value: &Value, what: &str) -> Result<(), CliError> {
    let errors = validate(schema, value);
    if errors.is_empty() {
        Ok(())
    } else {
        Err(CliError::Data(format!("{what} fails its schema: {}", errors.join("; "))))
    }
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn matches_type(v: &Value, t: &str) -> bool {
    match t {
        "integer" => v.as_i64().is_some() || v.as_u64().is_some(),
        "number" => v.is_number(),
        other => type_name(v) == other,
    }
}

fn check(schema: &Value, value: &Value, path: &str, errors: &mut Vec<String>) {
    let Some(obj) = schema.as_object() else {
        errors.push(format!("{path}: schema node is not an object"));
        return;
    };

    if let Some(t) = obj.get("type").and_then(Value::as_str) {
        if !matches_type(value, t) {
            errors.push(format!("{path}: expected {t}, got {}", type_name(value)));
            return;
        }
    }

    if let Some(allowed) = obj.get("enum").and_then(Value::as_array) {
        if !allowed.contains(value) {
            errors.push(format!("{path}: value {value} not in enum"));
        }
    }

    if let Some(n) = value.as_f64() {
        if let Some(min) = obj.get("minimum").and_then(Value::as_f64) {
            if n < min {
                errors.push(format!("{path}: {n} below minimum {min}"));
            }
        }
        if let Some(min) = obj.get("exclusiveMinimum").and_then(Value::as_f64) {
            if n <= min {
                errors.push(format!("{path}: {n} not above {min}"));
            }
        }
    }

    if let Some(arr) = value.as_array() {
        if let Some(min) = obj.get("minItems").and_then(Value::as_u64) {
            if (arr.len() as u64) < min {
                errors.push(format!("{path}: {} items, need at least {min}", arr.len()));
            }
        }
        if let Some(max) = obj.get("maxItems").and_then(Value::as_u64) {
            if (arr.len() as u64) > max {
                errors.push(format!("{path}: {} items, at most {max} allowed", arr.len()));
            }
        }
        if let Some(items) = obj.get("items") {
            for (i, item) in arr.iter().enumerate() {
                check(items, item, &format!("{path}[{i}]"), errors);
            }
        }
    }

    if let Some(map) = value.as_object() {
        let props = obj.get("properties").and_then(Value::as_object);
        if let Some(required) = obj.get("required").and_then(Value::as_array) {
            for name in required.iter().filter_map(Value::as_str) {
                if !map.contains_key(name) {
                    errors.push(format!("{path}: missing required key \"{name}\""));
                }
            }
        }
        if let Some(props) = props {
            for (name, sub) in props {
                if let Some(child) = map.get(name) {
                    check(sub, child, &format!("{path}.{name}"), errors);
                }
            }
        }
        if obj.get("additionalProperties").and_then(Value::as_bool) == Some(false) {
            for key in map.keys() {
                let known = props.map(|p| p.contains_key(key)).unwrap_or(false);
                if !known {
                    errors.push(format!("{path}: unexpected key \"{key}\""));
                }
            }
        }
    }
}
