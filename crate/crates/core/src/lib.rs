pub mod a2a;
pub mod agent;
pub mod config;
pub mod control;
pub mod delay;
pub mod jsonrpc;
pub mod mcp;
pub mod net;
pub mod nf;
pub mod profile;
pub mod scenario;
pub mod stack;
pub mod trace;

pub use config::DeploymentConfig;
pub use profile::LatencyProfile;
pub use scenario::{run_scenario, ScenarioOutcome, ScenarioSpec};
pub use stack::{stack_up, Stack, StackError};
