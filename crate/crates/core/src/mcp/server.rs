use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::State;
use axum::http::{header, HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::post;
use axum::Router;
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::schema::{ToolDescriptor, ToolResult};
use super::tools::{ServerKind, ToolExecutor};
use crate::jsonrpc::{self, codes, Request, Response as RpcResponse};
use crate::trace::{prefix, Hop, Interface, Tracer};

pub const SESSION_HEADER: &str = "mcp-session-id";
pub const SUPPORTED_VERSIONS: [&str; 3] = ["2025-06-18", "2025-03-26", "2024-11-05"];
pub const LATEST_VERSION: &str = SUPPORTED_VERSIONS[0];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct McpSession {
    pub session_id: String,
    pub protocol_version: String,
    pub client_name: String,
}

pub struct McpServer {
    kind: ServerKind,
    tools: Vec<ToolDescriptor>,
    executor: ToolExecutor,
    sessions: RwLock<HashMap<String, McpSession>>,
    tracer: Tracer,
    /// Frame responses as `text/event-stream` rather than plain JSON.
    sse: bool,
    endpoint: String,
}

/// What a dispatched request produced.
struct Dispatched {
    response: RpcResponse,
    note: String,
    session: Option<String>,
}

impl Dispatched {
    fn plain(response: RpcResponse, note: impl Into<String>) -> Self {
        Self {
            response,
            note: note.into(),
            session: None,
        }
    }
}

impl McpServer {
    pub fn new(kind: ServerKind, executor: ToolExecutor, tracer: Tracer, sse: bool, endpoint: String) -> Self {
        Self {
            kind,
            tools: kind.catalog(),
            executor,
            sessions: RwLock::new(HashMap::new()),
            tracer,
            sse,
            endpoint,
        }
    }

    pub fn kind(&self) -> ServerKind {
        self.kind
    }

    pub fn tools(&self) -> &[ToolDescriptor] {
        &self.tools
    }

    pub fn executor(&self) -> &ToolExecutor {
        &self.executor
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().len()
    }

    pub fn router(self: Arc<Self>) -> Router {
        Router::new()
            .route("/mcp", post(handle))
            .with_state(self)
    }

    fn reply(&self, response: &RpcResponse, session: Option<&str>) -> Response {
        let json = serde_json::to_string(response).unwrap_or_default();
        let (ctype, body) = if self.sse {
            ("text/event-stream", jsonrpc::sse_frame(&json))
        } else {
            ("application/json", json)
        };
        let mut resp = (StatusCode::OK, [(header::CONTENT_TYPE, ctype)], body).into_response();
        if let Some(s) = session.and_then(|s| HeaderValue::from_str(s).ok()) {
            resp.headers_mut().insert(SESSION_HEADER, s);
        }
        resp
    }

    fn initialize(&self, id: Value, params: &Value) -> Dispatched {
        let requested = params.get("protocolVersion").and_then(Value::as_str);
        let Some(version) = requested else {
            return Dispatched::plain(
                RpcResponse::failure(id, codes::INVALID_PARAMS, "missing protocolVersion"),
                "Reject session",
            );
        };
        if !SUPPORTED_VERSIONS.contains(&version) {
            let mut resp = RpcResponse::failure(id, codes::INVALID_PARAMS, "Unsupported protocol version");
            if let Some(e) = resp.error.as_mut() {
                e.data = Some(json!({ "supported": SUPPORTED_VERSIONS, "requested": version }));
            }
            return Dispatched::plain(resp, "Reject session (version mismatch)");
        }
        let session = McpSession {
            session_id: uuid::Uuid::new_v4().to_string(),
            protocol_version: version.to_string(),
            client_name: params
                .pointer("/clientInfo/name")
                .and_then(Value::as_str)
                .unwrap_or_default()
                .to_string(),
        };
        self.sessions
            .write()
            .insert(session.session_id.clone(), session.clone());
        let result = json!({
            "protocolVersion": version,
            "capabilities": { "tools": { "listChanged": false } },
            "serverInfo": {
                "name": format!("{}-tools", serde_json::to_value(self.kind).unwrap_or_default().as_str().unwrap_or("nf")),
                "version": env!("CARGO_PKG_VERSION"),
            },
        });
        Dispatched {
            response: RpcResponse::success(id, result),
            note: "Return session".into(),
            session: Some(session.session_id),
        }
    }

    async fn call(&self, id: Value, params: &Value) -> Dispatched {
        let Some(name) = params.get("name").and_then(Value::as_str) else {
            return Dispatched::plain(
                RpcResponse::failure(id, codes::INVALID_PARAMS, "missing tool name"),
                "Reject tool call",
            );
        };
        let Some(tool) = self.tools.iter().find(|t| t.name == name) else {
            return Dispatched::plain(
                RpcResponse::failure(id, codes::INVALID_PARAMS, format!("Unknown tool: {name}")),
                "Reject tool call (unknown tool)",
            );
        };
        let args = params.get("arguments").cloned().unwrap_or(Value::Object(Map::new()));
        let (result, note) = match tool.input_schema.validate(&args) {
            Err(problems) => (
                ToolResult::error(format!("invalid arguments for {name}: {}", problems.join("; "))),
                "Return argument validation failure".to_string(),
            ),
            Ok(()) => {
                let args = args.as_object().cloned().unwrap_or_default();
                let done = self.executor.execute(name, &args).await;
                (done.result, done.note)
            }
        };
        let value = serde_json::to_value(&result).unwrap_or_default();
        Dispatched::plain(RpcResponse::success(id, value), note)
    }

    async fn dispatch(&self, req: &Request, headers: &HeaderMap) -> Dispatched {
        let id = req.id.clone().unwrap_or(Value::Null);
        let params = req.params.clone().unwrap_or(Value::Null);
        if req.method == "initialize" {
            return self.initialize(id, &params);
        }
        if req.method == "ping" {
            return Dispatched::plain(RpcResponse::success(id, json!({})), "Return ping");
        }
        if !matches!(req.method.as_str(), "tools/list" | "tools/call") {
            return Dispatched::plain(
                RpcResponse::failure(id, codes::METHOD_NOT_FOUND, format!("Method not found: {}", req.method)),
                "Reject unknown method",
            );
        }
        let session_ok = headers
            .get(SESSION_HEADER)
            .and_then(|v| v.to_str().ok())
            .is_some_and(|s| self.sessions.read().contains_key(s));
        if !session_ok {
            return Dispatched::plain(
                RpcResponse::failure(id, codes::INVALID_REQUEST, "missing or unknown Mcp-Session-Id"),
                "Reject request without session",
            );
        }
        if req.method == "tools/list" {
            let result = json!({ "tools": self.tools });
            let note = match self.kind {
                ServerKind::Monitoring => "Return inspection tool catalog",
                ServerKind::Execution => "Return lifecycle control tool catalog",
            };
            return Dispatched::plain(RpcResponse::success(id, result), note);
        }
        self.call(id, &params).await
    }
}

async fn handle(State(srv): State<Arc<McpServer>>, headers: HeaderMap, body: Bytes) -> Response {
    let req = match jsonrpc::parse_request(&body) {
        Ok(r) => r,
        Err(resp) => return srv.reply(&resp, None),
    };
    if req.is_notification() {
        return StatusCode::ACCEPTED.into_response();
    }
    let is_tool = matches!(req.method.as_str(), "tools/list" | "tools/call");
    let label_prefix = if is_tool { prefix::TOOL } else { prefix::SESSION };
    let ctx = srv.tracer.inbound(
        &headers,
        label_prefix,
        Hop {
            interface: Interface::MCP,
            operation: &req.method,
            endpoint: &srv.endpoint,
            purpose: &req.method,
            tabulated: is_tool,
        },
    );
    let done = srv.dispatch(&req, &headers).await;
    srv.tracer.response(
        &ctx,
        Hop {
            interface: Interface::MCP,
            operation: &req.method,
            endpoint: &srv.endpoint,
            purpose: &done.note,
            tabulated: req.method == "tools/call",
        },
    );
    srv.reply(&done.response, done.session.as_deref())
}
