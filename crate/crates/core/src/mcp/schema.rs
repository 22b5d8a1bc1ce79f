//! Tool descriptors and the flat object schemas they declare.
//!
//! Schemas are deliberately small: an object whose properties are strings,
//! integers or booleans, optionally restricted to an enumeration (or, for
//! integers, a minimum).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarType {
    String,
    Integer,
    Boolean,
}

impl ScalarType {
    fn accepts(&self, v: &Value) -> bool {
        match self {
            ScalarType::String => v.is_string(),
            ScalarType::Integer => v.is_i64() || v.is_u64(),
            ScalarType::Boolean => v.is_boolean(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertySchema {
    #[serde(rename = "type")]
    pub ty: ScalarType,
    #[serde(rename = "enum", default, skip_serializing_if = "Option::is_none")]
    pub allowed: Option<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimum: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

impl PropertySchema {
    pub fn new(ty: ScalarType) -> Self {
        Self {
            ty,
            allowed: None,
            minimum: None,
            description: None,
        }
    }

    pub fn string() -> Self {
        Self::new(ScalarType::String)
    }

    pub fn integer() -> Self {
        Self::new(ScalarType::Integer)
    }

    pub fn boolean() -> Self {
        Self::new(ScalarType::Boolean)
    }

    pub fn one_of<I: IntoIterator<Item = &'static str>>(mut self, values: I) -> Self {
        self.allowed = Some(values.into_iter().map(Value::from).collect());
        self
    }

    pub fn min(mut self, minimum: i64) -> Self {
        self.minimum = Some(minimum);
        self
    }

    pub fn describe(mut self, text: &str) -> Self {
        self.description = Some(text.to_string());
        self
    }

    fn check(&self, name: &str, v: &Value) -> Result<(), String> {
        if !self.ty.accepts(v) {
            let ty = serde_json::to_value(self.ty).unwrap_or_default();
            return Err(format!("field {name} must be of type {}", ty.as_str().unwrap_or("?")));
        }
        if let Some(allowed) = &self.allowed {
            if !allowed.contains(v) {
                let opts: Vec<String> = allowed.iter().map(|a| a.to_string()).collect();
                return Err(format!("field {name} must be one of [{}]", opts.join(", ")));
            }
        }
        if let (Some(min), Some(n)) = (self.minimum, v.as_i64()) {
            if n < min {
                return Err(format!("field {name} must be >= {min}"));
            }
        }
        // integers beyond i64::MAX satisfy any minimum
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectSchema {
    #[serde(rename = "type", default = "object_type")]
    pub ty: String,
    pub properties: BTreeMap<String, PropertySchema>,
    #[serde(default)]
    pub required: Vec<String>,
    /// Whether properties beyond `properties` are accepted. Absent means
    /// accepted, as in JSON Schema; catalog schemas are closed.
    #[serde(rename = "additionalProperties", default = "open")]
    pub additional_properties: bool,
}

fn object_type() -> String {
    "object".into()
}

fn open() -> bool {
    true
}

impl ObjectSchema {
    pub fn new() -> Self {
        Self {
            ty: object_type(),
            properties: BTreeMap::new(),
            required: Vec::new(),
            additional_properties: false,
        }
    }

    pub fn required(mut self, name: &str, prop: PropertySchema) -> Self {
        self.properties.insert(name.to_string(), prop);
        self.required.push(name.to_string());
        self
    }

    pub fn optional(mut self, name: &str, prop: PropertySchema) -> Self {
        self.properties.insert(name.to_string(), prop);
        self
    }

    /// Checks `value` against the schema.
    pub fn validate(&self, value: &Value) -> Result<(), Vec<String>> {
        let Some(obj) = value.as_object() else {
            return Err(vec!["arguments must be a JSON object".into()]);
        };
        let mut problems = Vec::new();
        for name in &self.required {
            if !obj.contains_key(name) {
                problems.push(format!("missing required field {name}"));
            }
        }
        for (k, v) in obj {
            match self.properties.get(k) {
                Some(p) => {
                    if let Err(e) = p.check(k, v) {
                        problems.push(e);
                    }
                }
                None if !self.additional_properties => problems.push(format!("unexpected field {k}")),
                None => {}
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems)
        }
    }

    /// Structural well-formedness of the schema itself.
    pub fn self_check(&self) -> Result<(), String> {
        if self.ty != "object" {
            return Err(format!("schema type must be object, got {}", self.ty));
        }
        for r in &self.required {
            if !self.properties.contains_key(r) {
                return Err(format!("required field {r} is not a declared property"));
            }
        }
        for (name, p) in &self.properties {
            if let Some(allowed) = &p.allowed {
                if allowed.is_empty() || !allowed.iter().all(|a| p.ty.accepts(a)) {
                    return Err(format!("enum of {name} does not match its type"));
                }
            }
            if p.minimum.is_some() && p.ty != ScalarType::Integer {
                return Err(format!("minimum on non-integer field {name}"));
            }
        }
        Ok(())
    }
}

impl Default for ObjectSchema {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ToolDescriptor {
    pub name: String,
    pub description: String,
    pub input_schema: ObjectSchema,
    pub output_schema: ObjectSchema,
}

impl ToolDescriptor {
    pub fn self_check(&self) -> Result<(), String> {
        if self.name.is_empty() {
            return Err("tool name is empty".into());
        }
        self.input_schema
            .self_check()
            .map_err(|e| format!("{}: input schema: {e}", self.name))?;
        self.output_schema
            .self_check()
            .map_err(|e| format!("{}: output schema: {e}", self.name))
    }
}

/// Outcome of `tools/call`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ToolResult {
    pub structured_content: Map<String, Value>,
    pub is_error: bool,
    #[serde(default)]
    pub content: Vec<TextContent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextContent {
    #[serde(rename = "type")]
    pub kind: String,
    pub text: String,
}

impl ToolResult {
    pub fn ok(structured: Map<String, Value>) -> Self {
        Self::build(structured, false)
    }

    /// An error result carrying only a diagnostic `result` string.
    pub fn error(diagnostic: impl Into<String>) -> Self {
        let mut m = Map::new();
        m.insert("result".into(), Value::String(diagnostic.into()));
        Self::build(m, true)
    }

    fn build(structured: Map<String, Value>, is_error: bool) -> Self {
        let text = structured
            .get("result")
            .and_then(Value::as_str)
            .map(str::to_string)
            .unwrap_or_else(|| Value::Object(structured.clone()).to_string());
        Self {
            structured_content: structured,
            is_error,
            content: vec![TextContent {
                kind: "text".into(),
                text,
            }],
        }
    }

    /// The `result` string of the structured content, if any.
    pub fn result_text(&self) -> &str {
        self.structured_content
            .get("result")
            .and_then(Value::as_str)
            .unwrap_or_default()
    }
}
