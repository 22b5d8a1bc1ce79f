//! Agent-to-agent delegation: agent cards and synchronous `message/send`.

pub mod client;
pub mod server;
pub mod types;

pub use client::{A2aClient, A2aError, Peer};
pub use server::{A2aHandler, A2aServer, CARD_PATH};
pub use types::{AgentCard, AgentSkill, CardError, Message, Part, Role, Task, TaskState, TaskStatus};
