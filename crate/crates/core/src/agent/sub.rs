//! Monitoring and Execution agents: MCP clients bound to one tool server.

use std::sync::Arc;

use async_trait::async_trait;
use thiserror::Error;

use super::backend::{ReasoningBackend, ReasoningError};
use super::plan::{Capability, PlanStep};
use crate::a2a::{A2aHandler, Message};
use crate::delay::Delay;
use crate::mcp::{McpClient, McpError};
use crate::nf::NfType;

#[derive(Debug, Error)]
pub enum SubAgentError {
    #[error(transparent)]
    Reasoning(#[from] ReasoningError),
    #[error("task contains no {0:?} step")]
    NothingToDo(Capability),
    #[error(transparent)]
    Mcp(#[from] McpError),
    #[error("arguments chosen for {tool} do not match its schema: {problems}")]
    InvalidArguments { tool: String, problems: String },
    #[error("tool {tool} failed: {diagnostic}")]
    ToolCallFailed { tool: String, diagnostic: String },
}

/// Trace purpose of the tool invocation for `step`.
pub fn call_purpose(step: &PlanStep) -> &'static str {
    match step {
        PlanStep::Inspect { .. } => "Invoke NF status inspection tool",
        PlanStep::ListServices { .. } => "Invoke NF service listing tool",
        PlanStep::GetProfile { .. } => "Invoke NF profile inspection tool",
        PlanStep::Control { .. } => "Invoke NF lifecycle control tool",
        PlanStep::UpdateConfig { .. } => "Invoke NF configuration tool",
        PlanStep::Scale { .. } => "Invoke NF scaling tool",
        PlanStep::Conditional { inner, .. } => call_purpose(inner),
    }
}

pub fn list_purpose(capability: Capability) -> &'static str {
    match capability {
        Capability::Monitoring => "Discover available inspection tools",
        Capability::Execution => "Discover lifecycle control tools",
    }
}

pub struct SubAgent {
    capability: Capability,
    backend: Arc<dyn ReasoningBackend>,
    mcp: McpClient,
    deployed: Vec<NfType>,
    /// Fixed per-task processing time outside tool selection and synthesis.
    task_overhead: Delay,
}

impl SubAgent {
    pub fn new(
        capability: Capability,
        backend: Arc<dyn ReasoningBackend>,
        mcp: McpClient,
        deployed: Vec<NfType>,
    ) -> Self {
        Self {
            capability,
            backend,
            mcp,
            deployed,
            task_overhead: Delay::default(),
        }
    }

    pub fn task_overhead(&self) -> &Delay {
        &self.task_overhead
    }

    pub fn capability(&self) -> Capability {
        self.capability
    }

    /// Carries out every unconditional step of `goal` within this agent's
    /// capability: list tools, pick one, call it, summarize the result.
    pub async fn execute(&self, goal: &str) -> Result<String, SubAgentError> {
        self.task_overhead.wait().await;
        let plan = self.backend.interpret(goal, &self.deployed).await?;
        let steps = plan.steps_for(self.capability);
        if steps.is_empty() {
            return Err(SubAgentError::NothingToDo(self.capability));
        }
        let mut outcomes = Vec::with_capacity(steps.len());
        for step in &steps {
            let tools = self.mcp.list_tools(list_purpose(self.capability)).await?;
            let choice = self.backend.select_tool(step, &tools).await?;
            let tool = tools
                .iter()
                .find(|t| t.name == choice.name)
                .ok_or_else(|| ReasoningError::NoMatchingTool {
                    step: step.to_string(),
                    wanted: choice.name.clone(),
                })?;
            if let Err(problems) = tool.input_schema.validate(&choice.arguments) {
                return Err(SubAgentError::InvalidArguments {
                    tool: choice.name,
                    problems: problems.join("; "),
                });
            }
            let result = self
                .mcp
                .call_tool(&choice.name, choice.arguments.clone(), call_purpose(step))
                .await?;
            if result.is_error {
                return Err(SubAgentError::ToolCallFailed {
                    tool: choice.name,
                    diagnostic: result.result_text().to_string(),
                });
            }
            outcomes.push(self.backend.summarize(step, &result).await?);
        }
        Ok(outcomes.join(" "))
    }
}

#[async_trait]
impl A2aHandler for SubAgent {
    async fn handle(&self, message: &Message) -> Result<String, String> {
        self.execute(message.text()).await.map_err(|e| e.to_string())
    }
}
