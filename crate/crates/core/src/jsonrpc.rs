//! JSON-RPC 2.0 envelopes shared by the MCP and A2A endpoints.

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const VERSION: &str = "2.0";

pub mod codes {
    pub const PARSE_ERROR: i64 = -32700;
    pub const INVALID_REQUEST: i64 = -32600;
    pub const METHOD_NOT_FOUND: i64 = -32601;
    pub const INVALID_PARAMS: i64 = -32602;
    pub const INTERNAL_ERROR: i64 = -32603;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub jsonrpc: String,
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<Value>,
    /// Number or string; absent for notifications.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<Value>,
}

impl Request {
    pub fn new(id: impl Into<Value>, method: &str, params: Option<Value>) -> Self {
        Self {
            jsonrpc: VERSION.into(),
            method: method.into(),
            params,
            id: Some(id.into()),
        }
    }

    pub fn is_notification(&self) -> bool {
        self.id.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorObject {
    pub code: i64,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub jsonrpc: String,
    pub id: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorObject>,
}

impl Response {
    pub fn success(id: Value, result: Value) -> Self {
        Self {
            jsonrpc: VERSION.into(),
            id,
            result: Some(result),
            error: None,
        }
    }

    pub fn failure(id: Value, code: i64, message: impl Into<String>) -> Self {
        Self {
            jsonrpc: VERSION.into(),
            id,
            result: None,
            error: Some(ErrorObject {
                code,
                message: message.into(),
                data: None,
            }),
        }
    }
}

fn valid_id(id: &Value) -> bool {
    matches!(id, Value::Number(_) | Value::String(_) | Value::Null)
}

/// Validates a raw request body. On failure returns the error response to
/// send back, echoing whatever id could be recovered.
#[allow(clippy::result_large_err)]
pub fn parse_request(body: &[u8]) -> Result<Request, Response> {
    let value: Value = serde_json::from_slice(body)
        .map_err(|e| Response::failure(Value::Null, codes::PARSE_ERROR, format!("parse error: {e}")))?;
    let Value::Object(obj) = &value else {
        return Err(Response::failure(
            Value::Null,
            codes::INVALID_REQUEST,
            "request must be a JSON object",
        ));
    };
    let id = obj.get("id").cloned();
    let echo = id.clone().filter(valid_id).unwrap_or(Value::Null);
    let invalid = |msg: &str| Response::failure(echo.clone(), codes::INVALID_REQUEST, msg);
    if obj.get("jsonrpc").and_then(Value::as_str) != Some(VERSION) {
        return Err(invalid("jsonrpc must be \"2.0\""));
    }
    if id.as_ref().is_some_and(|i| !valid_id(i)) {
        return Err(invalid("id must be a number or a string"));
    }
    let Some(method) = obj.get("method").and_then(Value::as_str) else {
        return Err(invalid("method must be a string"));
    };
    let params = obj.get("params").cloned();
    if params.as_ref().is_some_and(|p| !p.is_object() && !p.is_array()) {
        return Err(invalid("params must be an object or an array"));
    }
    Ok(Request {
        jsonrpc: VERSION.into(),
        method: method.to_string(),
        params,
        id,
    })
}

/// Frames one message as a server-sent event.
pub fn sse_frame(json: &str) -> String {
    format!("event: message\ndata: {json}\n\n")
}

/// Extracts the JSON payload from a body that is either plain JSON or a
/// single SSE event.
pub fn unframe(body: &str) -> String {
    let trimmed = body.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return body.to_string();
    }
    let mut data = Vec::new();
    for line in body.lines() {
        if line.is_empty() && !data.is_empty() {
            break;
        }
        if let Some(d) = line.strip_prefix("data:") {
            data.push(d.strip_prefix(' ').unwrap_or(d));
        }
    }
    data.join("\n")
}
