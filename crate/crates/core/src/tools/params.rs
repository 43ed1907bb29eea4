use serde_json::{json, Map, Value};

use super::manifest::{ParamType, ToolSpec};
use super::ToolError;

/// Parameters validated against a tool's schema, with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Params(Map<String, Value>);

fn field_error(field: &str, message: String) -> ToolError {
    ToolError::invalid_params(message).with_detail(json!({ "field": field }))
}

impl Params {
    pub fn validate(spec: &ToolSpec, raw: &Value) -> Result<Params, ToolError> {
        let obj = match raw {
            Value::Null => Map::new(),
            Value::Object(m) => m.clone(),
            _ => return Err(ToolError::invalid_params("params must be a JSON object")),
        };
        if let Some(unknown) = obj.keys().find(|k| spec.param(k).is_none()) {
            return Err(field_error(
                unknown,
                format!("unknown parameter '{unknown}' for {}", spec.name),
            ));
        }
        let mut out = Map::new();
        for p in &spec.params {
            let value = match obj.get(p.name) {
                Some(Value::Null) | None => {
                    if p.required {
                        return Err(field_error(p.name, format!("missing required parameter '{}'", p.name)));
                    }
                    match &p.default {
                        Some(d) => d.clone(),
                        None => continue,
                    }
                }
                Some(v) => v.clone(),
            };
            let type_ok = match p.ty {
                ParamType::String => value.is_string(),
                ParamType::Integer => value.is_u64(),
                ParamType::Boolean => value.is_boolean(),
                ParamType::Object => value.is_object(),
            };
            if !type_ok {
                let what = match p.ty {
                    ParamType::Integer => "a non-negative integer",
                    ParamType::String => "a string",
                    ParamType::Boolean => "a boolean",
                    ParamType::Object => "an object",
                };
                return Err(field_error(p.name, format!("parameter '{}' must be {what}", p.name)));
            }
            if let (Some(min), Some(n)) = (p.minimum, value.as_u64()) {
                if n < min {
                    return Err(field_error(
                        p.name,
                        format!("parameter '{}' must be at least {min}", p.name),
                    ));
                }
            }
            if !p.choices.is_empty() && !value.as_str().is_some_and(|v| p.choices.contains(&v)) {
                return Err(field_error(
                    p.name,
                    format!("parameter '{}' must be one of: {}", p.name, p.choices.join(", ")),
                ));
            }
            out.insert(p.name.to_string(), value);
        }
        Ok(Params(out))
    }

    pub fn str(&self, name: &str) -> Option<&str> {
        self.0.get(name).and_then(Value::as_str)
    }

    pub fn u64(&self, name: &str) -> Option<u64> {
        self.0.get(name).and_then(Value::as_u64)
    }

    pub fn u32(&self, name: &str) -> Option<u32> {
        self.u64(name).map(|v| v.min(u32::MAX as u64) as u32)
    }

    pub fn value(&self, name: &str) -> Option<&Value> {
        self.0.get(name)
    }

    /// A parameter the schema marks as required.
    pub fn req_str(&self, name: &str) -> &str {
        self.str(name).unwrap_or_default()
    }

    pub fn as_value(&self) -> Value {
        Value::Object(self.0.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::super::manifest::find_tool;
    use super::*;

    #[test]
    fn defaults_and_errors() {
        let spec = find_tool("get_data_dependencies").unwrap();
        let p = Params::validate(&spec, &json!({"file": "a.c", "line": 3})).unwrap();
        assert_eq!(p.str("direction"), Some("backward"));
        assert_eq!(p.u64("depth"), Some(1));
        assert!(p.value("variable").is_none());

        let err = Params::validate(&spec, &json!({"line": 3})).unwrap_err();
        assert_eq!(err.code, "invalid_params");
        assert_eq!(err.detail["field"], "file");
        assert!(err.message.contains("'file'"));

        for bad in [
            json!({"file": "a.c", "line": 0}),
            json!({"file": "a.c", "line": "3"}),
            json!({"file": "a.c", "line": 3, "direction": "sideways"}),
            json!({"file": "a.c", "line": 3, "extra": 1}),
            json!([1]),
        ] {
            assert_eq!(
                Params::validate(&spec, &bad).unwrap_err().code,
                "invalid_params",
                "{bad}"
            );
        }
    }
}
