//! Reasoning backend that prompts an external model over an
//! Ollama-style `POST /api/generate` endpoint.
//!
//! Request: `{"model": M, "prompt": P, "stream": false}` plus
//! `"format": "json"` for structured replies. Reply: `{"response": "..."}`.
//! Plans are expected in the same JSON shape [`Plan`] serializes to.

use async_trait::async_trait;
use serde::Deserialize;
use serde_json::{json, Value};

use super::backend::{ReasoningBackend, ReasoningError, ToolChoice};
use super::plan::{Plan, PlanStep};
use crate::mcp::{ToolDescriptor, ToolResult};
use crate::nf::NfType;

pub const INTERPRET_TEMPLATE: &str = "You plan operations on a mobile core network.\n\
Deployed network functions: {nfs}.\n\
Translate the operator request into JSON of the form \
{\"steps\":[...]} where each step is one of \
{\"kind\":\"inspect\",\"nf_type\":NF}, {\"kind\":\"list_services\",\"nf_type\":NF}, \
{\"kind\":\"get_profile\",\"nf_type\":NF}, \
{\"kind\":\"control\",\"nf_type\":NF,\"action\":\"start\"|\"stop\"|\"restart\"}, \
{\"kind\":\"update_config\",\"nf_type\":NF,\"key\":K,\"value\":V}, \
{\"kind\":\"scale\",\"nf_type\":NF,\"replicas\":N}, \
{\"kind\":\"conditional\",\"predicate\":\"if_inactive\"|\"if_active\",\"inner\":STEP}.\n\
A conditional must follow an inspect step of the same NF.\n\
Request: {prompt}\n";

pub const SELECT_TEMPLATE: &str = "Choose one tool for the task and reply with JSON \
{\"name\":TOOL,\"arguments\":{...}} matching its inputSchema.\n\
Task: {step}\nTools: {tools}\n";

pub const SUMMARIZE_TEMPLATE: &str = "Summarize the tool result for the operator in one or two \
sentences. Quote the result string verbatim.\nTask: {step}\nResult: {result}\n";

#[derive(Deserialize)]
struct GenerateReply {
    response: String,
}

pub struct LlmBackend {
    http: reqwest::Client,
    endpoint: String,
    model: String,
}

impl LlmBackend {
    pub fn new(endpoint: &str, model: &str) -> Self {
        Self {
            http: reqwest::Client::builder()
                .no_proxy()
                .build()
                .expect("HTTP client configuration is static"),
            endpoint: endpoint.trim_end_matches('/').to_string(),
            model: model.to_string(),
        }
    }

    async fn generate(&self, prompt: String, structured: bool) -> Result<String, ReasoningError> {
        let mut body = json!({ "model": self.model, "prompt": prompt, "stream": false });
        if structured {
            body["format"] = json!("json");
        }
        let url = format!("{}/api/generate", self.endpoint);
        let resp = self
            .http
            .post(&url)
            .json(&body)
            .send()
            .await
            .map_err(|e| ReasoningError::BackendUnavailable(format!("{url}: {e}")))?;
        if !resp.status().is_success() {
            return Err(ReasoningError::BackendUnavailable(format!(
                "{url}: HTTP {}",
                resp.status().as_u16()
            )));
        }
        let reply: GenerateReply = resp
            .json()
            .await
            .map_err(|e| ReasoningError::MalformedModelReply(e.to_string()))?;
        Ok(reply.response)
    }
}

#[async_trait]
impl ReasoningBackend for LlmBackend {
    async fn interpret(&self, prompt: &str, deployed: &[NfType]) -> Result<Plan, ReasoningError> {
        let nfs: Vec<&str> = deployed.iter().map(|t| t.as_str()).collect();
        let text = INTERPRET_TEMPLATE
            .replace("{nfs}", &nfs.join(", "))
            .replace("{prompt}", prompt);
        let reply = self.generate(text, true).await?;
        let plan: Plan = parse_reply(&reply)?;
        plan.validate(deployed)?;
        Ok(plan)
    }

    async fn select_tool(&self, step: &PlanStep, tools: &[ToolDescriptor]) -> Result<ToolChoice, ReasoningError> {
        let text = SELECT_TEMPLATE
            .replace("{step}", &step.to_string())
            .replace("{tools}", &serde_json::to_string(tools).unwrap_or_default());
        let reply = self.generate(text, true).await?;
        let choice: ToolChoice = parse_reply(&reply)?;
        if !tools.iter().any(|t| t.name == choice.name) {
            return Err(ReasoningError::NoMatchingTool {
                step: step.to_string(),
                wanted: choice.name,
            });
        }
        Ok(choice)
    }

    async fn summarize(&self, step: &PlanStep, result: &ToolResult) -> Result<String, ReasoningError> {
        let text = SUMMARIZE_TEMPLATE
            .replace("{step}", &step.to_string())
            .replace("{result}", result.result_text());
        let reply = self.generate(text, false).await?;
        let reply = reply.trim();
        if reply.is_empty() {
            return Err(ReasoningError::MalformedModelReply("empty summary".into()));
        }
        Ok(reply.to_string())
    }
}

/// Parses a structured reply, tolerating prose around the JSON object.
fn parse_reply<T: serde::de::DeserializeOwned>(reply: &str) -> Result<T, ReasoningError> {
    let malformed = |e: String| ReasoningError::MalformedModelReply(e);
    let (Some(start), Some(end)) = (reply.find('{'), reply.rfind('}')) else {
        return Err(malformed(format!("no JSON object in {reply:?}")));
    };
    if end < start {
        return Err(malformed(format!("no JSON object in {reply:?}")));
    }
    let value: Value = serde_json::from_str(&reply[start..=end]).map_err(|e| malformed(e.to_string()))?;
    serde_json::from_value(value).map_err(|e| malformed(e.to_string()))
}
