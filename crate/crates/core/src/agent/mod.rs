//! The three agents and their reasoning backends.

pub mod backend;
pub mod host;
pub mod llm;
pub mod plan;
pub mod sub;

pub use backend::{
    arguments_for, tool_for, Delayed, DeterministicBackend, OpDelays, ReasoningBackend, ReasoningError,
    ToolChoice,
};
pub use host::{delegation_purpose, reports_inactive, HostAgent, HostError};
pub use llm::LlmBackend;
pub use plan::{interpret_intent, Capability, IntentError, Plan, PlanStep, Predicate};
pub use sub::{call_purpose, list_purpose, SubAgent, SubAgentError};
