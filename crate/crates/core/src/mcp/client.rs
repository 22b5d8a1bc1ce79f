use std::sync::atomic::{AtomicU64, Ordering};

use parking_lot::Mutex;
use serde_json::{json, Value};
use thiserror::Error;

use super::schema::{ToolDescriptor, ToolResult};
use super::server::{LATEST_VERSION, SESSION_HEADER};
use crate::jsonrpc::{self, Request, Response as RpcResponse};
use crate::trace::{participants, prefix, Hop, Interface, Tracer};

#[derive(Debug, Error)]
pub enum McpError {
    #[error("MCP server {endpoint} unreachable: {detail}")]
    Transport { endpoint: String, detail: String },
    #[error("MCP server returned HTTP {0}")]
    Http(u16),
    #[error("MCP error {code}: {message}")]
    Rpc { code: i64, message: String },
    #[error("cannot decode MCP response: {0}")]
    Decode(String),
    #[error("response id {got} does not echo request id {sent}")]
    IdMismatch { sent: Value, got: Value },
    #[error("protocol version {requested} rejected by server")]
    VersionMismatch { requested: String },
}

/// Streamable-HTTP MCP client bound to one server.
pub struct McpClient {
    http: reqwest::Client,
    url: String,
    destination: String,
    tracer: Tracer,
    session: Mutex<Option<String>>,
    next_id: AtomicU64,
    protocol_version: String,
}

impl McpClient {
    /// `base` is `http://host:port`; the endpoint is `{base}/mcp`.
    pub fn new(base: &str, tracer: Tracer) -> Result<Self, McpError> {
        let base = base.trim_end_matches('/');
        let port = url::Url::parse(base)
            .ok()
            .and_then(|u| u.port_or_known_default())
            .unwrap_or_default();
        let http = reqwest::Client::builder()
            .no_proxy()
            .http1_only()
            .build()
            .map_err(|e| McpError::Transport {
                endpoint: base.to_string(),
                detail: e.to_string(),
            })?;
        Ok(Self {
            http,
            url: format!("{base}/mcp"),
            destination: participants::mcp_server(port),
            tracer,
            session: Mutex::new(None),
            next_id: AtomicU64::new(1),
            protocol_version: LATEST_VERSION.to_string(),
        })
    }

    pub fn with_protocol_version(mut self, version: &str) -> Self {
        self.protocol_version = version.to_string();
        self
    }

    pub fn url(&self) -> &str {
        &self.url
    }

    pub fn session_id(&self) -> Option<String> {
        self.session.lock().clone()
    }

    /// Sends one request and returns the raw response envelope plus any
    /// session id header. The request is traced under `label_prefix`.
    pub async fn raw(
        &self,
        req: &Request,
        label_prefix: &str,
        purpose: &str,
        tabulated: bool,
    ) -> Result<(RpcResponse, Option<String>), McpError> {
        let ctx = self.tracer.request(
            label_prefix,
            &self.destination,
            Hop {
                interface: Interface::MCP,
                operation: &req.method,
                endpoint: &self.url,
                purpose,
                tabulated,
            },
        );
        let mut builder = self
            .http
            .post(&self.url)
            .header("accept", "application/json, text/event-stream")
            .json(req);
        if let Some(s) = self.session.lock().clone() {
            builder = builder.header(SESSION_HEADER, s);
        }
        let resp = ctx
            .apply(builder)
            .send()
            .await
            .map_err(|e| McpError::Transport {
                endpoint: self.url.clone(),
                detail: e.to_string(),
            })?;
        let status = resp.status().as_u16();
        if status != 200 {
            return Err(McpError::Http(status));
        }
        let session = resp
            .headers()
            .get(SESSION_HEADER)
            .and_then(|v| v.to_str().ok())
            .map(str::to_string);
        let body = resp.text().await.map_err(|e| McpError::Decode(e.to_string()))?;
        let envelope: RpcResponse =
            serde_json::from_str(&jsonrpc::unframe(&body)).map_err(|e| McpError::Decode(e.to_string()))?;
        Ok((envelope, session))
    }

    async fn rpc(
        &self,
        method: &str,
        params: Value,
        label_prefix: &str,
        purpose: &str,
        tabulated: bool,
    ) -> Result<(Value, Option<String>), McpError> {
        let id = json!(self.next_id.fetch_add(1, Ordering::Relaxed));
        let req = Request::new(id.clone(), method, Some(params));
        let (resp, session) = self.raw(&req, label_prefix, purpose, tabulated).await?;
        if resp.id != id {
            return Err(McpError::IdMismatch { sent: id, got: resp.id });
        }
        if let Some(e) = resp.error {
            return Err(McpError::Rpc {
                code: e.code,
                message: e.message,
            });
        }
        Ok((resp.result.unwrap_or(Value::Null), session))
    }

    /// Opens a fresh session.
    pub async fn initialize(&self) -> Result<String, McpError> {
        let params = json!({
            "protocolVersion": self.protocol_version,
            "capabilities": {},
            "clientInfo": { "name": self.tracer.name(), "version": env!("CARGO_PKG_VERSION") },
        });
        let result = self
            .rpc("initialize", params, prefix::SESSION, "Open MCP session", false)
            .await;
        let (_, session) = match result {
            Err(McpError::Rpc { code, .. }) if code == jsonrpc::codes::INVALID_PARAMS => {
                return Err(McpError::VersionMismatch {
                    requested: self.protocol_version.clone(),
                })
            }
            other => other?,
        };
        let session = session.ok_or_else(|| McpError::Decode("initialize returned no session id".into()))?;
        *self.session.lock() = Some(session.clone());
        Ok(session)
    }

    pub async fn ensure_session(&self) -> Result<(), McpError> {
        if self.session.lock().is_none() {
            self.initialize().await?;
        }
        Ok(())
    }

    pub async fn list_tools(&self, purpose: &str) -> Result<Vec<ToolDescriptor>, McpError> {
        self.ensure_session().await?;
        let (result, _) = self
            .rpc("tools/list", json!({}), prefix::TOOL, purpose, true)
            .await?;
        serde_json::from_value(result.get("tools").cloned().unwrap_or(Value::Null))
            .map_err(|e| McpError::Decode(e.to_string()))
    }

    pub async fn call_tool(&self, name: &str, arguments: Value, purpose: &str) -> Result<ToolResult, McpError> {
        self.ensure_session().await?;
        let (result, _) = self
            .rpc(
                "tools/call",
                json!({ "name": name, "arguments": arguments }),
                prefix::TOOL,
                purpose,
                true,
            )
            .await?;
        serde_json::from_value(result).map_err(|e| McpError::Decode(e.to_string()))
    }
}
