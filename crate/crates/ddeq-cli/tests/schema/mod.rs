//! Minimal JSON-schema validator covering the subset used by
//! docs/report-schema.json: type/enum/required/properties/
//! additionalProperties/oneOf/$ref/definitions/items/min-max bounds.

use serde_json::Value;

pub fn validate(schema: &Value, value: &Value) -> Result<(), String> {
    validate_at(schema, schema, value, "$")
}

fn resolve<'a>(root: &'a Value, node: &'a Value) -> Result<&'a Value, String> {
    if let Some(reference) = node.get("$ref").and_then(Value::as_str) {
        let path = reference
            .strip_prefix("#/")
            .ok_or_else(|| format!("unsupported $ref {reference}"))?;
        let mut cursor = root;
        for part in path.split('/') {
            cursor = cursor.get(part).ok_or_else(|| format!("dangling $ref {reference}"))?;
        }
        Ok(cursor)
    } else {
        Ok(node)
    }
}

fn type_matches(ty: &str, value: &Value) -> bool {
    match ty {
        "object" => value.is_object(),
        "array" => value.is_array(),
        "string" => value.is_string(),
        "number" => value.is_number(),
        "integer" => value.as_i64().is_some() || value.as_u64().is_some(),
        "boolean" => value.is_boolean(),
        "null" => value.is_null(),
        other => panic!("unknown schema type {other}"),
    }
}

fn validate_at(root: &Value, schema: &Value, value: &Value, path: &str) -> Result<(), String> {
    let schema = resolve(root, schema)?;

    if let Some(one_of) = schema.get("oneOf").and_then(Value::as_array) {
        let matching = one_of
            .iter()
            .filter(|variant| validate_at(root, variant, value, path).is_ok())
            .count();
        if matching != 1 {
            return Err(format!("{path}: {matching} of {} oneOf variants match", one_of.len()));
        }
        return Ok(());
    }

    match schema.get("type") {
        Some(Value::String(ty)) => {
            if !type_matches(ty, value) {
                return Err(format!("{path}: expected {ty}, got {value}"));
            }
        }
        Some(Value::Array(types))
            if !types.iter().filter_map(Value::as_str).any(|ty| type_matches(ty, value)) => {
                return Err(format!("{path}: none of {types:?} match {value}"));
            }
        _ => {}
    }

    if let Some(allowed) = schema.get("enum").and_then(Value::as_array) {
        if !allowed.contains(value) {
            return Err(format!("{path}: {value} not in enum {allowed:?}"));
        }
    }

    if let Some(minimum) = schema.get("minimum").and_then(Value::as_f64) {
        if let Some(v) = value.as_f64() {
            if v < minimum {
                return Err(format!("{path}: {v} below minimum {minimum}"));
            }
        }
    }
    if let Some(maximum) = schema.get("maximum").and_then(Value::as_f64) {
        if let Some(v) = value.as_f64() {
            if v > maximum {
                return Err(format!("{path}: {v} above maximum {maximum}"));
            }
        }
    }

    if let Some(object) = value.as_object() {
        if let Some(required) = schema.get("required").and_then(Value::as_array) {
            for key in required.iter().filter_map(Value::as_str) {
                if !object.contains_key(key) {
                    return Err(format!("{path}: missing required key {key}"));
                }
            }
        }
        let properties = schema.get("properties").and_then(Value::as_object);
        if let Some(properties) = properties {
            for (key, subschema) in properties {
                if let Some(subvalue) = object.get(key) {
                    validate_at(root, subschema, subvalue, &format!("{path}.{key}"))?;
                }
            }
            if schema.get("additionalProperties") == Some(&Value::Bool(false)) {
                for key in object.keys() {
                    if !properties.contains_key(key) {
                        return Err(format!("{path}: unexpected key {key}"));
                    }
                }
            }
        }
    }

    if let Some(array) = value.as_array() {
        if let Some(min_items) = schema.get("minItems").and_then(Value::as_u64) {
            if (array.len() as u64) < min_items {
                return Err(format!("{path}: fewer than {min_items} items"));
            }
        }
        if let Some(max_items) = schema.get("maxItems").and_then(Value::as_u64) {
            if (array.len() as u64) > max_items {
                return Err(format!("{path}: more than {max_items} items"));
            }
        }
        if let Some(items) = schema.get("items") {
            for (i, item) in array.iter().enumerate() {
                validate_at(root, items, item, &format!("{path}[{i}]"))?;
            }
        }
    }

    Ok(())
}
