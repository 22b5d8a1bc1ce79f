use std::sync::Arc;

use async_trait::async_trait;
use axum::body::Bytes;
use axum::extract::State;
use axum::http::HeaderMap;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::Value;

use super::types::{AgentCard, Message, Role, Task, TaskState};
use crate::delay::Delay;
use crate::jsonrpc::{self, codes, Response as RpcResponse};
use crate::trace::{prefix, Hop, Interface, Tracer};

pub const CARD_PATH: &str = "/.well-known/agent.json";

/// Turns an inbound message into the agent's outcome text.
#[async_trait]
pub trait A2aHandler: Send + Sync + 'static {
    async fn handle(&self, message: &Message) -> Result<String, String>;
}

/// One agent's A2A endpoint.
pub struct A2aServer {
    card: AgentCard,
    handler: Arc<dyn A2aHandler>,
    tracer: Tracer,
    /// Time taken to serve the agent card.
    card_delay: Delay,
    /// Trace purpose of `message/send` responses.
    reply_purpose: String,
    /// Trace purpose used when logging a request on behalf of an untraced
    /// caller.
    inbound_purpose: String,
}

impl A2aServer {
    pub fn new(card: AgentCard, handler: Arc<dyn A2aHandler>, tracer: Tracer, reply_purpose: &str) -> Self {
        Self {
            card,
            handler,
            tracer,
            card_delay: Delay::default(),
            reply_purpose: reply_purpose.into(),
            inbound_purpose: "Delegate task".into(),
        }
    }

    pub fn with_inbound_purpose(mut self, purpose: &str) -> Self {
        self.inbound_purpose = purpose.into();
        self
    }

    pub fn card(&self) -> &AgentCard {
        &self.card
    }

    pub fn card_delay(&self) -> &Delay {
        &self.card_delay
    }

    pub fn router(self: Arc<Self>) -> Router {
        Router::new()
            .route(CARD_PATH, get(serve_card))
            .route("/", post(serve_message))
            .with_state(self)
    }

    fn hop<'a>(&'a self, operation: &'a str, purpose: &'a str, tabulated: bool) -> Hop<'a> {
        Hop {
            interface: Interface::A2A,
            operation,
            endpoint: &self.card.url,
            purpose,
            tabulated,
        }
    }

    /// Runs `message/send`; handler failures become a failed task, not a
    /// JSON-RPC error.
    async fn send(&self, id: Value, params: Option<Value>) -> RpcResponse {
        let message = params
            .as_ref()
            .and_then(|p| p.get("message"))
            .cloned()
            .map(serde_json::from_value::<Message>);
        let message = match message {
            Some(Ok(m)) => m,
            Some(Err(e)) => {
                return RpcResponse::failure(id, codes::INVALID_PARAMS, format!("invalid message: {e}"))
            }
            None => return RpcResponse::failure(id, codes::INVALID_PARAMS, "missing params.message"),
        };
        if let Err(e) = message.validate(Role::User) {
            return RpcResponse::failure(id, codes::INVALID_PARAMS, e);
        }
        let task = match self.handler.handle(&message).await {
            Ok(text) => Task::terminal(TaskState::Completed, text),
            Err(diagnostic) => Task::terminal(TaskState::Failed, diagnostic),
        };
        RpcResponse::success(id, serde_json::to_value(&task).unwrap_or_default())
    }
}

async fn serve_card(State(srv): State<Arc<A2aServer>>, headers: HeaderMap) -> Response {
    let ctx = srv
        .tracer
        .inbound(&headers, prefix::CARD, srv.hop("agent-card", "Fetch agent card", false));
    srv.card_delay.wait().await;
    srv.tracer
        .response(&ctx, srv.hop("agent-card", "Return agent card", false));
    Json(srv.card.clone()).into_response()
}

async fn serve_message(State(srv): State<Arc<A2aServer>>, headers: HeaderMap, body: Bytes) -> Response {
    let req = match jsonrpc::parse_request(&body) {
        Ok(r) => r,
        Err(resp) => return Json(resp).into_response(),
    };
    if req.method != "message/send" {
        let id = req.id.unwrap_or(Value::Null);
        let resp = RpcResponse::failure(id, codes::METHOD_NOT_FOUND, format!("Method not found: {}", req.method));
        return Json(resp).into_response();
    }
    let id = req.id.clone().unwrap_or(Value::Null);
    let ctx = srv
        .tracer
        .inbound(&headers, prefix::DELEGATION, srv.hop("message/send", &srv.inbound_purpose, true));
    let resp = srv.send(id, req.params).await;
    srv.tracer
        .response(&ctx, srv.hop("message/send", &srv.reply_purpose, false));
    Json(resp).into_response()
}
