//! Reasoning backends: the deterministic planner and a latency wrapper.

use std::sync::Arc;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::plan::{interpret_intent, IntentError, Plan, PlanStep};
use crate::delay::Delay;
use crate::mcp::tools::{
    CHECK_NF_STATUS, CONTROL_NF, GET_NF_PROFILE, LIST_NF_SERVICES, SCALE_NF, UPDATE_NF_CONFIG,
};
use crate::mcp::{ToolDescriptor, ToolResult};
use crate::nf::NfType;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReasoningError {
    #[error(transparent)]
    Intent(#[from] IntentError),
    #[error("no tool matches step {step} (wanted {wanted})")]
    NoMatchingTool { step: String, wanted: String },
    #[error("reasoning backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("malformed model reply: {0}")]
    MalformedModelReply(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolChoice {
    pub name: String,
    pub arguments: Value,
}

#[async_trait]
pub trait ReasoningBackend: Send + Sync {
    async fn interpret(&self, prompt: &str, deployed: &[NfType]) -> Result<Plan, ReasoningError>;

    async fn select_tool(&self, step: &PlanStep, tools: &[ToolDescriptor]) -> Result<ToolChoice, ReasoningError>;

    async fn summarize(&self, step: &PlanStep, result: &ToolResult) -> Result<String, ReasoningError>;
}

/// Name of the tool that carries out `step`.
pub fn tool_for(step: &PlanStep) -> &'static str {
    match step {
        PlanStep::Inspect { .. } => CHECK_NF_STATUS,
        PlanStep::ListServices { .. } => LIST_NF_SERVICES,
        PlanStep::GetProfile { .. } => GET_NF_PROFILE,
        PlanStep::Control { .. } => CONTROL_NF,
        PlanStep::UpdateConfig { .. } => UPDATE_NF_CONFIG,
        PlanStep::Scale { .. } => SCALE_NF,
        PlanStep::Conditional { inner, .. } => tool_for(inner),
    }
}

/// Tool arguments extracted from `step`.
pub fn arguments_for(step: &PlanStep) -> Value {
    match step {
        PlanStep::Inspect { nf_type } | PlanStep::ListServices { nf_type } | PlanStep::GetProfile { nf_type } => {
            json!({ "nf_type": nf_type })
        }
        PlanStep::Control { nf_type, action } => json!({ "nf_type": nf_type, "action": action }),
        PlanStep::UpdateConfig { nf_type, key, value } => {
            json!({ "nf_type": nf_type, "key": key, "value": value })
        }
        PlanStep::Scale { nf_type, replicas } => json!({ "nf_type": nf_type, "replicas": replicas }),
        PlanStep::Conditional { inner, .. } => arguments_for(inner),
    }
}

/// Grammar planner, exact-name tool selection and template summaries.
#[derive(Debug, Clone, Copy, Default)]
pub struct DeterministicBackend;

impl DeterministicBackend {
    pub fn summary(step: &PlanStep, result: &ToolResult) -> String {
        let text = result.result_text();
        match step {
            PlanStep::Inspect { nf_type } if text.contains("is not active") => {
                format!("It seems like the {nf_type} is currently inactive: {text}.")
            }
            PlanStep::Inspect { nf_type } => format!("The {nf_type} is currently active: {text}."),
            _ => format!("{text}."),
        }
    }
}

#[async_trait]
impl ReasoningBackend for DeterministicBackend {
    async fn interpret(&self, prompt: &str, deployed: &[NfType]) -> Result<Plan, ReasoningError> {
        Ok(interpret_intent(prompt, deployed)?)
    }

    async fn select_tool(&self, step: &PlanStep, tools: &[ToolDescriptor]) -> Result<ToolChoice, ReasoningError> {
        let wanted = tool_for(step);
        if !tools.iter().any(|t| t.name == wanted) {
            return Err(ReasoningError::NoMatchingTool {
                step: step.to_string(),
                wanted: wanted.into(),
            });
        }
        Ok(ToolChoice {
            name: wanted.into(),
            arguments: arguments_for(step),
        })
    }

    async fn summarize(&self, step: &PlanStep, result: &ToolResult) -> Result<String, ReasoningError> {
        Ok(Self::summary(step, result))
    }
}

/// Per-operation artificial latency.
#[derive(Debug, Clone, Default)]
pub struct OpDelays {
    pub interpret: Delay,
    pub select: Delay,
    pub summarize: Delay,
}

/// Adds [`OpDelays`] in front of every call of the wrapped backend.
pub struct Delayed {
    inner: Arc<dyn ReasoningBackend>,
    delays: OpDelays,
}

impl Delayed {
    pub fn new(inner: Arc<dyn ReasoningBackend>) -> Self {
        Self {
            inner,
            delays: OpDelays::default(),
        }
    }

    pub fn delays(&self) -> &OpDelays {
        &self.delays
    }
}

#[async_trait]
impl ReasoningBackend for Delayed {
    async fn interpret(&self, prompt: &str, deployed: &[NfType]) -> Result<Plan, ReasoningError> {
        self.delays.interpret.wait().await;
        self.inner.interpret(prompt, deployed).await
    }

    async fn select_tool(&self, step: &PlanStep, tools: &[ToolDescriptor]) -> Result<ToolChoice, ReasoningError> {
        self.delays.select.wait().await;
        self.inner.select_tool(step, tools).await
    }

    async fn summarize(&self, step: &PlanStep, result: &ToolResult) -> Result<String, ReasoningError> {
        self.delays.summarize.wait().await;
        self.inner.summarize(step, result).await
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcp::tools::{execution_catalog, monitoring_catalog};
    use crate::nf::LifecycleAction;

    #[tokio::test]
    async fn selection_is_exact_and_arguments_validate() {
        let b = DeterministicBackend;
        let step = PlanStep::inspect(NfType::Amf);
        let choice = b.select_tool(&step, &monitoring_catalog()).await.unwrap();
        assert_eq!(choice.name, "check_nf_status");
        assert_eq!(choice.arguments, json!({"nf_type": "AMF"}));
        let err = b.select_tool(&step, &execution_catalog()).await.unwrap_err();
        assert!(matches!(err, ReasoningError::NoMatchingTool { .. }));

        let step = PlanStep::control(NfType::Amf, LifecycleAction::Start);
        let choice = b.select_tool(&step, &execution_catalog()).await.unwrap();
        let tool = execution_catalog().into_iter().find(|t| t.name == choice.name).unwrap();
        tool.input_schema.validate(&choice.arguments).unwrap();
    }

    #[tokio::test]
    async fn delays_apply() {
        let d = Delayed::new(Arc::new(DeterministicBackend));
        d.delays().interpret.set_secs(0.05);
        let t = std::time::Instant::now();
        d.interpret("Restart the SMF", &NfType::ALL).await.unwrap();
        assert!(t.elapsed() >= std::time::Duration::from_millis(50));
    }
}
