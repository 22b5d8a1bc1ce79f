//! Agent cards, messages and tasks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentSkill {
    pub id: String,
    pub name: String,
    pub description: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<String>,
}

impl AgentSkill {
    pub fn new(id: &str, name: &str, description: &str) -> Self {
        Self {
            id: id.into(),
            name: name.into(),
            description: description.into(),
            tags: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AgentCard {
    pub name: String,
    pub description: String,
    pub url: String,
    #[serde(default = "default_version")]
    pub version: String,
    #[serde(default)]
    pub default_input_modes: Vec<String>,
    #[serde(default)]
    pub default_output_modes: Vec<String>,
    #[serde(default)]
    pub capabilities: Capabilities,
    pub skills: Vec<AgentSkill>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capabilities {
    #[serde(default)]
    pub streaming: bool,
}

fn default_version() -> String {
    "1.0.0".into()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CardError {
    #[error("agent card has an empty name")]
    EmptyName,
    #[error("agent card url {0:?} is not an http(s) endpoint")]
    BadUrl(String),
    #[error("agent card advertises no skills")]
    NoSkills,
}

impl AgentCard {
    pub fn new(name: &str, description: &str, url: &str, skills: Vec<AgentSkill>) -> Self {
        Self {
            name: name.into(),
            description: description.into(),
            url: url.into(),
            version: default_version(),
            default_input_modes: vec!["text".into()],
            default_output_modes: vec!["text".into()],
            capabilities: Capabilities::default(),
            skills,
        }
    }

    pub fn validate(&self) -> Result<(), CardError> {
        if self.name.trim().is_empty() {
            return Err(CardError::EmptyName);
        }
        let ok = url::Url::parse(&self.url)
            .map(|u| matches!(u.scheme(), "http" | "https") && u.host().is_some())
            .unwrap_or(false);
        if !ok {
            return Err(CardError::BadUrl(self.url.clone()));
        }
        if self.skills.is_empty() {
            return Err(CardError::NoSkills);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    User,
    Agent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Part {
    pub kind: String,
    pub text: String,
}

impl Part {
    pub fn text(text: impl Into<String>) -> Self {
        Self {
            kind: "text".into(),
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Message {
    pub kind: String,
    pub role: Role,
    pub parts: Vec<Part>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message_id: Option<String>,
}

impl Message {
    pub fn new(role: Role, text: impl Into<String>) -> Self {
        Self {
            kind: "message".into(),
            role,
            parts: vec![Part::text(text)],
            message_id: Some(uuid::Uuid::new_v4().to_string()),
        }
    }

    pub fn user(text: impl Into<String>) -> Self {
        Self::new(Role::User, text)
    }

    pub fn agent(text: impl Into<String>) -> Self {
        Self::new(Role::Agent, text)
    }

    /// Text of the first text part.
    pub fn text(&self) -> &str {
        self.parts
            .iter()
            .find(|p| p.kind == "text")
            .map(|p| p.text.as_str())
            .unwrap_or_default()
    }

    pub fn validate(&self, expected: Role) -> Result<(), String> {
        if self.kind != "message" {
            return Err(format!("message kind must be \"message\", got {:?}", self.kind));
        }
        if self.role != expected {
            return Err(format!("message role must be {expected:?}"));
        }
        if self.parts.is_empty() {
            return Err("message has no parts".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskState {
    Submitted,
    Working,
    Completed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskStatus {
    pub state: TaskState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<Message>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub kind: String,
    pub status: TaskStatus,
}

impl Task {
    pub fn terminal(state: TaskState, text: impl Into<String>) -> Self {
        Self {
            id: uuid::Uuid::new_v4().to_string(),
            kind: "task".into(),
            status: TaskStatus {
                state,
                message: Some(Message::agent(text)),
            },
        }
    }

    pub fn text(&self) -> &str {
        self.status.message.as_ref().map(Message::text).unwrap_or_default()
    }

    /// A terminal task must carry an agent-role status message.
    pub fn validate(&self) -> Result<(), String> {
        if self.kind != "task" {
            return Err(format!("task kind must be \"task\", got {:?}", self.kind));
        }
        if matches!(self.status.state, TaskState::Completed | TaskState::Failed) {
            match &self.status.message {
                Some(m) => m.validate(Role::Agent)?,
                None => return Err("terminal task has no status message".into()),
            }
        }
        Ok(())
    }
}
