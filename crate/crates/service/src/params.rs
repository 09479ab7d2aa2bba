//! Request parameters are partial JSON objects laid over the configured
//! defaults, so a client only sends the sliders it moved.

use hybrid_miner::{DiscoveryParams, GraphParams};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{ApiError, FieldError};

/// Parses a request body into a JSON object; an empty body is `{}`.
pub fn body_object(bytes: &[u8]) -> Result<Map<String, Value>, ApiError> {
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Ok(Map::new());
    }
    match serde_json::from_slice::<Value>(bytes) {
        Ok(Value::Object(map)) => Ok(map),
        Ok(_) => Err(ApiError::field("body", "expected a JSON object")),
        Err(e) => Err(ApiError::BadRequest(format!("malformed JSON: {e}"))),
    }
}

/// `defaults` with the fields of `patch` replaced. Unknown or mistyped
/// fields are reported one by one.
pub fn overlay<T: Serialize + DeserializeOwned>(defaults: &T, patch: &Map<String, Value>) -> Result<T, ApiError> {
    let Value::Object(base) = serde_json::to_value(defaults).map_err(|e| ApiError::Internal(e.to_string()))? else {
        return Err(ApiError::Internal("parameters do not serialise to an object".into()));
    };
    let mut errors = Vec::new();
    for (key, value) in patch {
        if !base.contains_key(key) {
            errors.push(FieldError { field: key.clone(), message: "unknown parameter".into() });
            continue;
        }
        let mut single = base.clone();
        single.insert(key.clone(), value.clone());
        if let Err(e) = serde_json::from_value::<T>(Value::Object(single)) {
            errors.push(FieldError { field: key.clone(), message: e.to_string() });
        }
    }
    if !errors.is_empty() {
        return Err(ApiError::InvalidParams(errors));
    }
    let mut merged = base;
    merged.extend(patch.clone());
    serde_json::from_value(Value::Object(merged)).map_err(|e| ApiError::field("body", e.to_string()))
}

pub fn graph_params(defaults: &GraphParams, patch: &Map<String, Value>) -> Result<GraphParams, ApiError> {
    let params: GraphParams = overlay(defaults, patch)?;
    let errors = params.errors();
    if errors.is_empty() {
        Ok(params)
    } else {
        Err(ApiError::params(errors))
    }
}

pub fn discovery_params(defaults: &DiscoveryParams, patch: &Map<String, Value>) -> Result<DiscoveryParams, ApiError> {
    let params: DiscoveryParams = overlay(defaults, patch)?;
    let errors = params.errors();
    if errors.is_empty() {
        Ok(params)
    } else {
        Err(ApiError::params(errors))
    }
}

/// Query-string values are JSON when they parse as JSON, strings otherwise.
pub fn query_object<'a>(pairs: impl IntoIterator<Item = (&'a String, &'a String)>) -> Map<String, Value> {
    pairs
        .into_iter()
        .map(|(k, v)| (k.clone(), serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.clone()))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn obj(v: Value) -> Map<String, Value> {
        v.as_object().unwrap().clone()
    }

    #[test]
    fn missing_fields_take_defaults() {
        let d = DiscoveryParams::default();
        let p = discovery_params(&d, &obj(json!({"t_replay": 1.0, "t_freq": 5}))).unwrap();
        assert_eq!(p.t_replay, 1.0);
        assert_eq!(p.graph.t_freq, 5);
        assert_eq!(p.graph.t_rs, d.graph.t_rs);
    }

    #[test]
    fn field_errors_name_the_field() {
        let d = GraphParams::default();
        let Err(ApiError::InvalidParams(f)) = graph_params(&d, &obj(json!({"t_rs": 0.1, "t_rw": 0.5}))) else {
            panic!()
        };
        assert_eq!(f[0].field, "t_rs");
        let Err(ApiError::InvalidParams(f)) = graph_params(&d, &obj(json!({"w": "heavy", "bogus": 1}))) else {
            panic!()
        };
        let names: Vec<_> = f.iter().map(|e| e.field.as_str()).collect();
        assert_eq!(names, ["bogus", "w"]);
    }

    #[test]
    fn empty_body_and_bad_json() {
        assert!(body_object(b"  ").unwrap().is_empty());
        assert!(matches!(body_object(b"{"), Err(ApiError::BadRequest(_))));
        assert!(matches!(body_object(b"[1]"), Err(ApiError::InvalidParams(_))));
    }

    #[test]
    fn query_values_are_typed() {
        let (k1, v1, k2, v2) = ("t_rs".to_string(), "0.5".to_string(), "redundancy".to_string(), "all".to_string());
        let m = query_object([(&k1, &v1), (&k2, &v2)]);
        assert_eq!(m["t_rs"], json!(0.5));
        assert_eq!(m["redundancy"], json!("all"));
    }
}
