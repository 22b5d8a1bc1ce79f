//! NF lifecycle runtime.
//!
//! Each deployed NF moves through `Stopped -> Starting -> Running -> Stopping
//! -> Stopped`. An NF registers one profile per replica with the NRF just
//! before it reaches `Running` and deregisters them on the way down.
//! Transitions for one NF are serialized; different NFs proceed in parallel.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use parking_lot::RwLock;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::Mutex;

use super::registry::NrfRegistry;
use super::types::{NfProfile, NfType};
use crate::trace::{participants, prefix, Hop, Interface, Tracer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RunState {
    Stopped,
    Starting,
    Running,
    Stopping,
}

impl fmt::Display for RunState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LifecycleAction {
    Start,
    Stop,
    Restart,
}

impl LifecycleAction {
    pub const ALL: [LifecycleAction; 3] = [
        LifecycleAction::Start,
        LifecycleAction::Stop,
        LifecycleAction::Restart,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            LifecycleAction::Start => "start",
            LifecycleAction::Stop => "stop",
            LifecycleAction::Restart => "restart",
        }
    }
}

impl fmt::Display for LifecycleAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LifecycleAction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LifecycleAction::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown lifecycle action {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NfRuntimeState {
    pub nf_type: NfType,
    pub state: RunState,
    pub backend_handle: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LifecycleOutcome {
    pub state: NfRuntimeState,
    /// The action found the NF already in the requested state and did nothing.
    pub already: bool,
    pub replicas: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{backend} backend failed: {message}")]
pub struct BackendError {
    pub backend: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LifecycleError {
    #[error("NF {0} is not deployed")]
    UnknownNf(String),
    #[error("NF {0} is not lifecycle-controllable")]
    NotControllable(NfType),
    #[error(transparent)]
    Backend(#[from] BackendError),
}

/// Something that can actually run NF instances.
#[async_trait]
pub trait NfBackend: Send + Sync {
    fn name(&self) -> &str;

    /// Starts one replica and returns its backend handle.
    async fn start(&self, nf: NfType, replica: usize) -> Result<String, BackendError>;

    async fn stop(&self, nf: NfType, handle: &str) -> Result<(), BackendError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NfDelays {
    pub start: Duration,
    pub stop: Duration,
}

/// In-process NF "processes": start and stop only wait for the configured delay.
#[derive(Default)]
pub struct SimulatedBackend {
    delays: RwLock<HashMap<NfType, NfDelays>>,
    default: RwLock<NfDelays>,
    failing: RwLock<Vec<NfType>>,
}

impl SimulatedBackend {
    pub fn new(default: NfDelays) -> Self {
        Self {
            default: RwLock::new(default),
            ..Default::default()
        }
    }

    pub fn set_default_delays(&self, delays: NfDelays) {
        *self.default.write() = delays;
    }

    pub fn set_delays(&self, nf: NfType, delays: NfDelays) {
        self.delays.write().insert(nf, delays);
    }

    pub fn clear_overrides(&self) {
        self.delays.write().clear();
    }

    /// Makes every subsequent start of `nf` fail.
    pub fn fail_starts(&self, nf: NfType, fail: bool) {
        let mut failing = self.failing.write();
        failing.retain(|t| *t != nf);
        if fail {
            failing.push(nf);
        }
    }

    fn delays(&self, nf: NfType) -> NfDelays {
        self.delays
            .read()
            .get(&nf)
            .copied()
            .unwrap_or(*self.default.read())
    }
}

#[async_trait]
impl NfBackend for SimulatedBackend {
    fn name(&self) -> &str {
        "simulated"
    }

    async fn start(&self, nf: NfType, replica: usize) -> Result<String, BackendError> {
        tokio::time::sleep(self.delays(nf).start).await;
        if self.failing.read().contains(&nf) {
            return Err(BackendError {
                backend: self.name().into(),
                message: format!("injected start failure for {nf}"),
            });
        }
        Ok(format!("sim-{}-{replica}", nf.as_str().to_lowercase()))
    }

    async fn stop(&self, nf: NfType, _handle: &str) -> Result<(), BackendError> {
        tokio::time::sleep(self.delays(nf).stop).await;
        Ok(())
    }
}

/// Drives real containers via a container CLI (`docker start oai-amf`, ...).
pub struct ContainerBackend {
    program: String,
    name_template: String,
}

impl ContainerBackend {
    /// `name_template` may contain `{nf}` (lower-case NF name) and `{replica}`.
    pub fn new(program: impl Into<String>, name_template: impl Into<String>) -> Self {
        Self {
            program: program.into(),
            name_template: name_template.into(),
        }
    }

    fn container(&self, nf: NfType, replica: usize) -> String {
        self.name_template
            .replace("{nf}", &nf.as_str().to_lowercase())
            .replace("{replica}", &replica.to_string())
    }

    async fn run(&self, verb: &str, container: &str) -> Result<(), BackendError> {
        let fail = |message: String| BackendError {
            backend: self.name().into(),
            message,
        };
        let out = tokio::process::Command::new(&self.program)
            .arg(verb)
            .arg(container)
            .output()
            .await
            .map_err(|e| fail(format!("{} {verb} {container}: {e}", self.program)))?;
        if !out.status.success() {
            return Err(fail(format!(
                "{} {verb} {container}: {}",
                self.program,
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        Ok(())
    }
}

#[async_trait]
impl NfBackend for ContainerBackend {
    fn name(&self) -> &str {
        "container"
    }

    async fn start(&self, nf: NfType, replica: usize) -> Result<String, BackendError> {
        let container = self.container(nf, replica);
        self.run("start", &container).await?;
        Ok(container)
    }

    async fn stop(&self, _nf: NfType, handle: &str) -> Result<(), BackendError> {
        self.run("stop", handle).await
    }
}

/// Per-NF deployment parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NfDeployment {
    pub nf_type: NfType,
    pub ipv4: Ipv4Addr,
    pub start_at_boot: bool,
}

impl NfDeployment {
    pub fn new(nf_type: NfType) -> Self {
        Self {
            nf_type,
            ipv4: nf_type.default_ipv4(),
            start_at_boot: true,
        }
    }
}

struct Replica {
    handle: String,
    instance_id: String,
}

struct NfSlot {
    ipv4: Ipv4Addr,
    desired: usize,
    replicas: Vec<Replica>,
    config: BTreeMap<String, String>,
}

pub struct NfRuntime {
    registry: Arc<NrfRegistry>,
    backend: Arc<dyn NfBackend>,
    slots: BTreeMap<NfType, Mutex<NfSlot>>,
    states: RwLock<HashMap<NfType, NfRuntimeState>>,
    tracer: RwLock<Option<Tracer>>,
}

impl NfRuntime {
    /// Creates the runtime with every deployed NF stopped. The NRF itself is
    /// always running and registers its own profile here.
    pub fn new(
        registry: Arc<NrfRegistry>,
        backend: Arc<dyn NfBackend>,
        deployment: &[NfDeployment],
        nrf_ipv4: Ipv4Addr,
    ) -> Self {
        let mut slots = BTreeMap::new();
        let mut states = HashMap::new();
        for d in deployment.iter().filter(|d| d.nf_type != NfType::Nrf) {
            slots.insert(
                d.nf_type,
                Mutex::new(NfSlot {
                    ipv4: d.ipv4,
                    desired: 1,
                    replicas: Vec::new(),
                    config: BTreeMap::new(),
                }),
            );
            states.insert(
                d.nf_type,
                NfRuntimeState {
                    nf_type: d.nf_type,
                    state: RunState::Stopped,
                    backend_handle: String::new(),
                },
            );
        }
        states.insert(
            NfType::Nrf,
            NfRuntimeState {
                nf_type: NfType::Nrf,
                state: RunState::Running,
                backend_handle: "nrf".into(),
            },
        );
        registry
            .register(NfProfile::new_registered(NfType::Nrf, nrf_ipv4))
            .expect("NRF self profile is valid");
        Self {
            registry,
            backend,
            slots,
            states: RwLock::new(states),
            tracer: RwLock::new(None),
        }
    }

    pub fn set_tracer(&self, tracer: Tracer) {
        *self.tracer.write() = Some(tracer);
    }

    pub fn registry(&self) -> &Arc<NrfRegistry> {
        &self.registry
    }

    pub fn deployed(&self) -> Vec<NfType> {
        let mut v: Vec<NfType> = self.slots.keys().copied().collect();
        v.push(NfType::Nrf);
        v
    }

    pub fn is_deployed(&self, nf: NfType) -> bool {
        nf == NfType::Nrf || self.slots.contains_key(&nf)
    }

    pub fn state(&self, nf: NfType) -> Option<NfRuntimeState> {
        self.states.read().get(&nf).cloned()
    }

    pub fn states(&self) -> Vec<NfRuntimeState> {
        let states = self.states.read();
        self.deployed()
            .into_iter()
            .filter_map(|t| states.get(&t).cloned())
            .collect()
    }

    fn slot(&self, nf: NfType) -> Result<&Mutex<NfSlot>, LifecycleError> {
        if nf == NfType::Nrf {
            return Err(LifecycleError::NotControllable(nf));
        }
        self.slots
            .get(&nf)
            .ok_or_else(|| LifecycleError::UnknownNf(nf.to_string()))
    }

    fn set_state(&self, nf: NfType, state: RunState, slot: &NfSlot) {
        let handle = slot
            .replicas
            .iter()
            .map(|r| r.handle.as_str())
            .collect::<Vec<_>>()
            .join(",");
        self.states.write().insert(
            nf,
            NfRuntimeState {
                nf_type: nf,
                state,
                backend_handle: handle,
            },
        );
    }

    fn sys_event(&self, nf: NfType, destination: &str, purpose: &str) {
        if let Some(t) = self.tracer.read().as_ref() {
            let hop = Hop {
                interface: Interface::SYS,
                operation: "lifecycle",
                endpoint: self.backend.name(),
                purpose,
                tabulated: false,
            };
            let ctx = t.request(prefix::SYSTEM, destination, hop.clone());
            t.renamed(nf.as_str()).response(&ctx, hop);
        }
    }

    async fn start_replica(&self, nf: NfType, slot: &mut NfSlot) -> Result<(), LifecycleError> {
        let idx = slot.replicas.len();
        self.sys_event(nf, nf.as_str(), &format!("Start {nf} instance {idx}"));
        let handle = self.backend.start(nf, idx).await?;
        let profile = NfProfile::new_registered(nf, slot.ipv4);
        let instance_id = profile.nf_instance_id.clone();
        self.registry
            .register(profile)
            .expect("generated profiles are valid");
        self.sys_event(nf, participants::NRF, &format!("Register {nf} with NRF"));
        slot.replicas.push(Replica {
            handle,
            instance_id,
        });
        Ok(())
    }

    async fn stop_replica(&self, nf: NfType, slot: &mut NfSlot) -> Result<(), LifecycleError> {
        let Some(replica) = slot.replicas.pop() else {
            return Ok(());
        };
        self.registry.deregister(&replica.instance_id);
        self.sys_event(nf, participants::NRF, &format!("Deregister {nf} from NRF"));
        self.sys_event(nf, nf.as_str(), &format!("Stop {nf} instance {}", slot.replicas.len()));
        self.backend.stop(nf, &replica.handle).await?;
        Ok(())
    }

    async fn bring_up(&self, nf: NfType, slot: &mut NfSlot) -> Result<(), LifecycleError> {
        self.set_state(nf, RunState::Starting, slot);
        while slot.replicas.len() < slot.desired {
            if let Err(e) = self.start_replica(nf, slot).await {
                // roll back to a clean Stopped state
                while !slot.replicas.is_empty() {
                    let _ = self.stop_replica(nf, slot).await;
                }
                self.set_state(nf, RunState::Stopped, slot);
                return Err(e);
            }
        }
        self.set_state(nf, RunState::Running, slot);
        Ok(())
    }

    async fn bring_down(&self, nf: NfType, slot: &mut NfSlot) -> Result<(), LifecycleError> {
        self.set_state(nf, RunState::Stopping, slot);
        let mut result = Ok(());
        while !slot.replicas.is_empty() {
            if let Err(e) = self.stop_replica(nf, slot).await {
                result = Err(e);
            }
        }
        self.set_state(nf, RunState::Stopped, slot);
        result
    }

    pub async fn lifecycle(
        &self,
        nf: NfType,
        action: LifecycleAction,
    ) -> Result<LifecycleOutcome, LifecycleError> {
        let mut slot = self.slot(nf)?.lock().await;
        let running = !slot.replicas.is_empty();
        let already = match (action, running) {
            (LifecycleAction::Start, true) | (LifecycleAction::Stop, false) => true,
            (LifecycleAction::Start, false) => {
                self.bring_up(nf, &mut slot).await?;
                false
            }
            (LifecycleAction::Stop, true) => {
                self.bring_down(nf, &mut slot).await?;
                false
            }
            (LifecycleAction::Restart, _) => {
                if running {
                    self.bring_down(nf, &mut slot).await?;
                }
                self.bring_up(nf, &mut slot).await?;
                false
            }
        };
        Ok(self.outcome(nf, &slot, already))
    }

    fn outcome(&self, nf: NfType, slot: &NfSlot, already: bool) -> LifecycleOutcome {
        LifecycleOutcome {
            state: self.state(nf).expect("deployed NF has a state"),
            already,
            replicas: slot.replicas.len(),
        }
    }

    /// Sets the replica count. Zero stops the NF (keeping the previous
    /// desired count for the next start); a positive count starts a stopped
    /// NF or adds/removes replicas of a running one.
    pub async fn scale(&self, nf: NfType, replicas: usize) -> Result<LifecycleOutcome, LifecycleError> {
        let mut slot = self.slot(nf)?.lock().await;
        if replicas == 0 {
            if !slot.replicas.is_empty() {
                self.bring_down(nf, &mut slot).await?;
            }
            return Ok(self.outcome(nf, &slot, false));
        }
        slot.desired = replicas;
        if slot.replicas.is_empty() {
            self.bring_up(nf, &mut slot).await?;
        } else {
            while slot.replicas.len() < replicas {
                self.start_replica(nf, &mut slot).await?;
            }
            while slot.replicas.len() > replicas {
                self.stop_replica(nf, &mut slot).await?;
            }
            self.set_state(nf, RunState::Running, &slot);
        }
        Ok(self.outcome(nf, &slot, false))
    }

    /// Applies a configuration override and returns the previous value.
    pub async fn update_config(
        &self,
        nf: NfType,
        key: &str,
        value: &str,
    ) -> Result<Option<String>, LifecycleError> {
        let mut slot = self.slot(nf)?.lock().await;
        Ok(slot.config.insert(key.to_string(), value.to_string()))
    }

    pub async fn config(&self, nf: NfType) -> Result<BTreeMap<String, String>, LifecycleError> {
        Ok(self.slot(nf)?.lock().await.config.clone())
    }

    pub async fn replicas(&self, nf: NfType) -> Result<usize, LifecycleError> {
        Ok(self.slot(nf)?.lock().await.replicas.len())
    }

    /// Starts every NF flagged `start_at_boot`.
    pub async fn boot(&self, deployment: &[NfDeployment]) -> Result<(), LifecycleError> {
        let starts = deployment
            .iter()
            .filter(|d| d.start_at_boot && d.nf_type != NfType::Nrf)
            .map(|d| self.lifecycle(d.nf_type, LifecycleAction::Start));
        for r in futures::future::join_all(starts).await {
            r?;
        }
        Ok(())
    }

    /// Stops everything; used on teardown.
    pub async fn shutdown(&self) {
        let stops = self
            .slots
            .keys()
            .map(|nf| self.lifecycle(*nf, LifecycleAction::Stop));
        futures::future::join_all(stops).await;
    }
}
