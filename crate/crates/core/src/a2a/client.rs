use serde_json::{json, Value};
use thiserror::Error;

use super::server::CARD_PATH;
use super::types::{AgentCard, CardError, Message, Task, TaskState};
use crate::jsonrpc::Response as RpcResponse;
use crate::trace::{prefix, Hop, Interface, Tracer};

#[derive(Debug, Error)]
pub enum A2aError {
    #[error("agent at {endpoint} is unreachable: {detail}")]
    Unreachable { endpoint: String, detail: String },
    #[error("malformed agent card from {endpoint}: {detail}")]
    MalformedCard { endpoint: String, detail: String },
    #[error("A2A error {code}: {message}")]
    Rpc { code: i64, message: String },
    #[error("malformed A2A response: {0}")]
    Malformed(String),
    #[error("response id {got} does not echo request id {sent}")]
    IdMismatch { sent: Value, got: Value },
    #[error("remote task {task_id} failed: {diagnostic}")]
    TaskFailed { task_id: String, diagnostic: String },
}

/// An agent as seen by its caller: trace name and endpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Peer {
    pub name: String,
    pub url: String,
}

impl Peer {
    pub fn new(name: &str, url: &str) -> Self {
        Self {
            name: name.into(),
            url: url.trim_end_matches('/').into(),
        }
    }
}

#[derive(Clone)]
pub struct A2aClient {
    http: reqwest::Client,
    tracer: Tracer,
}

impl A2aClient {
    pub fn new(tracer: Tracer) -> Self {
        let http = reqwest::Client::builder()
            .no_proxy()
            .http1_only()
            .build()
            .expect("HTTP client configuration is static");
        Self { http, tracer }
    }

    pub fn tracer(&self) -> &Tracer {
        &self.tracer
    }

    fn unreachable(endpoint: &str, e: impl std::fmt::Display) -> A2aError {
        A2aError::Unreachable {
            endpoint: endpoint.to_string(),
            detail: e.to_string(),
        }
    }

    pub async fn fetch_agent_card(&self, peer: &Peer) -> Result<AgentCard, A2aError> {
        let url = format!("{}{CARD_PATH}", peer.url);
        let ctx = self.tracer.request(
            prefix::CARD,
            &peer.name,
            Hop {
                interface: Interface::A2A,
                operation: "agent-card",
                endpoint: &url,
                purpose: "Fetch agent card",
                tabulated: false,
            },
        );
        let resp = ctx
            .apply(self.http.get(&url))
            .send()
            .await
            .map_err(|e| Self::unreachable(&url, e))?;
        if !resp.status().is_success() {
            return Err(Self::unreachable(&url, format!("HTTP {}", resp.status().as_u16())));
        }
        let body = resp.text().await.map_err(|e| Self::unreachable(&url, e))?;
        let malformed = |detail: String| A2aError::MalformedCard {
            endpoint: url.clone(),
            detail,
        };
        let card: AgentCard = serde_json::from_str(&body).map_err(|e| malformed(e.to_string()))?;
        card.validate().map_err(|e: CardError| malformed(e.to_string()))?;
        Ok(card)
    }

    /// `message/send` with a fresh UUID request id. A failed remote task is
    /// reported as [`A2aError::TaskFailed`].
    pub async fn send_message(&self, peer: &Peer, text: &str, purpose: &str) -> Result<Task, A2aError> {
        let id = Value::String(uuid::Uuid::new_v4().to_string());
        let message = Message::user(text);
        self.send_raw(peer, id, &message, purpose).await
    }

    pub async fn send_raw(&self, peer: &Peer, id: Value, message: &Message, purpose: &str) -> Result<Task, A2aError> {
        let body = json!({
            "id": id,
            "jsonrpc": "2.0",
            "method": "message/send",
            "params": { "message": message },
        });
        let ctx = self.tracer.request(
            prefix::DELEGATION,
            &peer.name,
            Hop {
                interface: Interface::A2A,
                operation: "message/send",
                endpoint: &peer.url,
                purpose,
                tabulated: true,
            },
        );
        let endpoint = format!("{}/", peer.url);
        let resp = ctx
            .apply(self.http.post(&endpoint).json(&body))
            .send()
            .await
            .map_err(|e| Self::unreachable(&endpoint, e))?;
        let text = resp.text().await.map_err(|e| Self::unreachable(&endpoint, e))?;
        let envelope: RpcResponse =
            serde_json::from_str(&text).map_err(|e| A2aError::Malformed(e.to_string()))?;
        if envelope.id != id {
            return Err(A2aError::IdMismatch { sent: id, got: envelope.id });
        }
        if let Some(e) = envelope.error {
            return Err(A2aError::Rpc {
                code: e.code,
                message: e.message,
            });
        }
        let task: Task = serde_json::from_value(envelope.result.unwrap_or(Value::Null))
            .map_err(|e| A2aError::Malformed(e.to_string()))?;
        task.validate().map_err(A2aError::Malformed)?;
        if task.status.state == TaskState::Failed {
            return Err(A2aError::TaskFailed {
                task_id: task.id.clone(),
                diagnostic: task.text().to_string(),
            });
        }
        Ok(task)
    }
}
