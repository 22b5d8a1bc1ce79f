//! The Host Agent: interprets the operator's intent and orchestrates the
//! sub-agents over A2A.

use std::collections::HashMap;
use std::sync::Arc;

use async_trait::async_trait;
use thiserror::Error;

use super::backend::{ReasoningBackend, ReasoningError};
use super::plan::{Capability, Plan, PlanStep, Predicate};
use crate::a2a::{A2aClient, A2aError, A2aHandler, AgentCard, Message, Peer};
use crate::delay::Delay;
use crate::nf::NfType;

#[derive(Debug, Error)]
pub enum HostError {
    #[error(transparent)]
    Reasoning(#[from] ReasoningError),
    #[error("delegation to {agent} failed: {source}")]
    Delegation {
        agent: String,
        #[source]
        source: A2aError,
    },
}

/// Trace purpose of the delegation carrying `step`.
pub fn delegation_purpose(step: &PlanStep) -> &'static str {
    match step {
        PlanStep::Inspect { .. } => "Delegate NF status inspection",
        PlanStep::ListServices { .. } => "Delegate NF service listing",
        PlanStep::GetProfile { .. } => "Delegate NF profile inspection",
        PlanStep::Control { .. } => "Delegate lifecycle control action",
        PlanStep::UpdateConfig { .. } => "Delegate NF configuration update",
        PlanStep::Scale { .. } => "Delegate NF scaling action",
        PlanStep::Conditional { inner, .. } => delegation_purpose(inner),
    }
}

/// Whether an inspection outcome reports `nf` as inactive.
pub fn reports_inactive(outcome: &str, nf: NfType) -> bool {
    outcome.contains(&format!("{nf} is not active"))
}

fn past_tense(step: &PlanStep) -> &'static str {
    match step {
        PlanStep::Control { action, .. } => match action {
            crate::nf::LifecycleAction::Start => "started",
            crate::nf::LifecycleAction::Stop => "stopped",
            crate::nf::LifecycleAction::Restart => "restarted",
        },
        PlanStep::UpdateConfig { .. } => "reconfigured",
        PlanStep::Scale { .. } => "scaled",
        _ => "handled",
    }
}

fn action_word(step: &PlanStep) -> String {
    match step {
        PlanStep::Control { action, .. } => action.as_str().to_string(),
        PlanStep::UpdateConfig { .. } => "configuration change".into(),
        PlanStep::Scale { .. } => "scaling".into(),
        _ => "action".into(),
    }
}

pub struct HostAgent {
    backend: Arc<dyn ReasoningBackend>,
    a2a: A2aClient,
    monitoring: Peer,
    execution: Peer,
    deployed: Vec<NfType>,
    /// Coordination time after each delegation returns.
    handover: Delay,
}

impl HostAgent {
    pub fn new(
        backend: Arc<dyn ReasoningBackend>,
        a2a: A2aClient,
        monitoring: Peer,
        execution: Peer,
        deployed: Vec<NfType>,
    ) -> Self {
        Self {
            backend,
            a2a,
            monitoring,
            execution,
            deployed,
            handover: Delay::default(),
        }
    }

    pub fn handover(&self) -> &Delay {
        &self.handover
    }

    fn peer(&self, capability: Capability) -> &Peer {
        match capability {
            Capability::Monitoring => &self.monitoring,
            Capability::Execution => &self.execution,
        }
    }

    /// Runs the whole intent and returns the final response text.
    pub async fn orchestrate(&self, prompt: &str) -> Result<String, HostError> {
        let mut cards: HashMap<Capability, Result<AgentCard, A2aError>> = HashMap::new();
        for cap in [Capability::Monitoring, Capability::Execution] {
            cards.insert(cap, self.a2a.fetch_agent_card(self.peer(cap)).await);
        }
        let plan = self.backend.interpret(prompt, &self.deployed).await?;

        let mut outcomes = Vec::new();
        let mut inspected: HashMap<NfType, String> = HashMap::new();
        for step in &plan.steps {
            match step {
                PlanStep::Conditional { predicate, inner } => {
                    let nf = inner.nf_type();
                    let inactive = inspected.get(&nf).is_some_and(|o| reports_inactive(o, nf));
                    let holds = match predicate {
                        Predicate::IfInactive => inactive,
                        Predicate::IfActive => !inactive,
                    };
                    if !holds {
                        let state = if inactive { "inactive" } else { "active" };
                        outcomes.push(format!("{nf} is {state}, so no {} was needed.", action_word(inner)));
                        continue;
                    }
                    let text = self.delegate(inner, prompt, &plan, &mut cards).await?;
                    let state = if inactive { "inactive" } else { "active" };
                    outcomes.push(format!("{nf} was {state} and has been {}. {text}", past_tense(inner)));
                }
                _ => {
                    let text = self.delegate(step, prompt, &plan, &mut cards).await?;
                    if let PlanStep::Inspect { nf_type } = step {
                        inspected.insert(*nf_type, text.clone());
                    }
                    outcomes.push(text);
                }
            }
        }
        Ok(outcomes.join(" "))
    }

    /// The operator's prompt is forwarded verbatim when the delegate would
    /// read exactly this step from it; otherwise the step is rendered as a
    /// directive.
    async fn delegate(
        &self,
        step: &PlanStep,
        prompt: &str,
        plan: &Plan,
        cards: &mut HashMap<Capability, Result<AgentCard, A2aError>>,
    ) -> Result<String, HostError> {
        let cap = step.capability();
        let peer = self.peer(cap);
        let failure = |source: A2aError| HostError::Delegation {
            agent: peer.name.clone(),
            source,
        };
        let card = match cards.remove(&cap) {
            Some(Ok(card)) => card,
            _ => self.a2a.fetch_agent_card(peer).await.map_err(failure)?,
        };
        let target = Peer::new(&peer.name, &card.url);
        cards.insert(cap, Ok(card));
        let text = if plan.steps_for(cap) == [step.clone()] {
            prompt.to_string()
        } else {
            step.directive()
        };
        let task = self
            .a2a
            .send_message(&target, &text, delegation_purpose(step))
            .await
            .map_err(failure)?;
        self.handover.wait().await;
        Ok(task.text().to_string())
    }
}

#[async_trait]
impl A2aHandler for HostAgent {
    async fn handle(&self, message: &Message) -> Result<String, String> {
        self.orchestrate(message.text()).await.map_err(|e| e.to_string())
    }
}
