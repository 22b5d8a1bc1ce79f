//! The whole system in one process: NRF, NF runtime, both tool servers, the
//! three agents and the control endpoint.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Weak};
use std::time::{Duration, Instant};

use parking_lot::{Mutex, RwLock};
use serde::Serialize;
use thiserror::Error;
use tokio::net::TcpListener;
use tokio::sync::Notify;

use crate::a2a::{A2aClient, A2aServer, AgentCard, AgentSkill, Peer, TaskState};
use crate::agent::{Capability, Delayed, DeterministicBackend, HostAgent, LlmBackend, OpDelays, ReasoningBackend, SubAgent};
use crate::config::{BackendKind, ConfigError, DeploymentConfig, ReasoningKind};
use crate::delay::Delay;
use crate::mcp::{McpClient, McpServer, ServerKind, ToolBackend, ToolExecutor};
use crate::net::{bind, with_cors, BindError, ServerHandle};
use crate::nf::{
    ContainerBackend, LifecycleError, NfBackend, NfDelays, NfRuntime, NfRuntimeState, NfType, NrfRegistry,
    NrfService, SbiClient, SimulatedBackend,
};
use crate::profile::{LatencyProfile, ProfileError};
use crate::trace::{latency_breakdown, participants, LatencyReport, TraceCollector, TraceEvent, Tracer};

pub const HOST_PROMPT_PURPOSE: &str = "Submit user prompt to Host Agent";

#[derive(Debug, Error)]
pub enum StackError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Bind(#[from] BindError),
    #[error("cannot create SBI client: {0}")]
    Client(String),
    #[error("startup timed out after {after_s} s waiting for {what}")]
    StartupTimeout { what: String, after_s: f64 },
    #[error("NF boot failed: {0}")]
    Boot(#[from] LifecycleError),
}

/// Base URLs of every server in the stack.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Endpoints {
    pub nrf: String,
    pub monitoring_mcp: String,
    pub execution_mcp: String,
    pub host_agent: String,
    pub monitoring_agent: String,
    pub execution_agent: String,
    pub control: String,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NfStatusRow {
    pub nf_type: NfType,
    pub state: crate::nf::RunState,
    /// Profiles of this type currently in the NRF.
    pub registered: usize,
    pub backend_handle: String,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StackStatus {
    pub latency_profile: String,
    pub endpoints: Endpoints,
    pub nfs: Vec<NfStatusRow>,
    pub trace_events: usize,
}

/// Result of one prompt submitted to the Host Agent.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PromptOutcome {
    pub run: u64,
    pub text: Option<String>,
    pub error: Option<String>,
    pub elapsed_s: f64,
    pub events: Vec<TraceEvent>,
}

impl PromptOutcome {
    pub fn succeeded(&self) -> bool {
        self.error.is_none()
    }
}

/// Every adjustable delay in the stack.
#[derive(Default)]
struct Knobs {
    host: OpDelays,
    handover: Delay,
    cards: Vec<Delay>,
    monitoring: OpDelays,
    monitoring_task: Delay,
    monitoring_tool: Delay,
    execution: OpDelays,
    execution_task: Delay,
    execution_tool: Delay,
}

pub struct Stack {
    config: DeploymentConfig,
    endpoints: Endpoints,
    collector: Arc<TraceCollector>,
    runtime: Arc<NfRuntime>,
    simulated: Option<Arc<SimulatedBackend>>,
    knobs: Knobs,
    profile: RwLock<LatencyProfile>,
    user: A2aClient,
    servers: Mutex<Vec<ServerHandle>>,
    run_lock: tokio::sync::Mutex<()>,
    latest_report: RwLock<Option<LatencyReport>>,
    shutdown: Notify,
    stopped: AtomicBool,
}

fn backend(config: &DeploymentConfig) -> Arc<dyn ReasoningBackend> {
    match config.reasoning.kind {
        ReasoningKind::Deterministic => Arc::new(DeterministicBackend),
        ReasoningKind::Llm => Arc::new(LlmBackend::new(&config.reasoning.endpoint, &config.reasoning.model)),
    }
}

fn monitoring_card(url: &str) -> AgentCard {
    AgentCard::new(
        participants::MONITORING_AGENT,
        "Inspects network function status, services and profiles through the monitoring tool server",
        url,
        vec![
            AgentSkill::new("nf-status-inspection", "NF status inspection", "Reports whether an NF is active and registered in the NRF"),
            AgentSkill::new("nf-service-listing", "NF service listing", "Lists the services an NF exposes"),
            AgentSkill::new("nf-profile-inspection", "NF profile inspection", "Retrieves an NF's registered profile"),
        ],
    )
}

fn execution_card(url: &str) -> AgentCard {
    AgentCard::new(
        participants::EXECUTION_AGENT,
        "Starts, stops, restarts, reconfigures and scales network functions through the execution tool server",
        url,
        vec![
            AgentSkill::new("nf-lifecycle-control", "NF lifecycle control", "Starts, stops or restarts an NF"),
            AgentSkill::new("nf-configuration", "NF configuration", "Applies configuration overrides to an NF"),
            AgentSkill::new("nf-scaling", "NF scaling", "Sets an NF's replica count"),
        ],
    )
}

fn host_card(url: &str) -> AgentCard {
    AgentCard::new(
        participants::HOST_AGENT,
        "Interprets operator intents and orchestrates the monitoring and execution agents",
        url,
        vec![AgentSkill::new(
            "intent-orchestration",
            "Intent orchestration",
            "Turns a natural-language network management intent into delegated actions",
        )],
    )
}

async fn wait_listening(port: u16, host: &str, deadline: Instant) -> bool {
    loop {
        if tokio::net::TcpStream::connect((host, port)).await.is_ok() {
            return true;
        }
        if Instant::now() >= deadline {
            return false;
        }
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
}

/// Boots the full stack described by `config`.
///
/// Every listener is bound before anything starts, so a port conflict is
/// reported without side effects.
pub async fn stack_up(config: DeploymentConfig) -> Result<Arc<Stack>, StackError> {
    config.validate()?;
    let profile = LatencyProfile::select(&config.latency_profile)?;
    let timeout = Duration::from_secs_f64(config.startup_timeout_s);
    let deadline = Instant::now() + timeout;

    let host = config.bind_host.clone();
    let p = &config.ports;
    let mut listeners: Vec<TcpListener> = Vec::with_capacity(7);
    for port in [
        p.nrf,
        p.monitoring_mcp,
        p.execution_mcp,
        p.host_agent,
        p.monitoring_agent,
        p.execution_agent,
        p.control,
    ] {
        listeners.push(bind(&format!("{host}:{port}")).await?);
    }
    let ports: Vec<u16> = listeners
        .iter()
        .map(|l| l.local_addr().map(|a| a.port()).unwrap_or_default())
        .collect();
    let local = |port: u16| format!("http://{host}:{port}");
    let advertised = |port: u16| format!("http://{}:{port}", config.advertise_host);
    let endpoints = Endpoints {
        nrf: local(ports[0]),
        monitoring_mcp: local(ports[1]),
        execution_mcp: local(ports[2]),
        host_agent: advertised(ports[3]),
        monitoring_agent: advertised(ports[4]),
        execution_agent: advertised(ports[5]),
        control: local(ports[6]),
    };

    let collector = TraceCollector::new();
    let tracer = |name: &str| Tracer::new(collector.clone(), name);
    let registry = Arc::new(NrfRegistry::new());
    let simulated = match config.backend.kind {
        BackendKind::Simulated => Some(Arc::new(SimulatedBackend::default())),
        BackendKind::Container => None,
    };
    let nf_backend: Arc<dyn NfBackend> = match &simulated {
        Some(sim) => sim.clone(),
        None => Arc::new(ContainerBackend::new(
            config.backend.program.clone(),
            config.backend.name_template.clone(),
        )),
    };
    let deployments = config.deployments();
    let runtime = Arc::new(NfRuntime::new(
        registry.clone(),
        nf_backend,
        &deployments,
        NfType::Nrf.default_ipv4(),
    ));
    runtime.set_tracer(tracer(participants::LIFECYCLE_RUNTIME));

    let nrf = NrfService {
        registry: registry.clone(),
        api_root: endpoints.nrf.clone(),
        excerpt_exact: config.excerpt_exact,
        tracer: tracer(participants::NRF),
    };
    let sbi = SbiClient::new(&endpoints.nrf, config.sbi_http2, tracer(participants::MCP_TOOL))
        .map_err(|e| StackError::Client(e.to_string()))?;

    let mut knobs = Knobs::default();
    let mon_exec = ToolExecutor::new(ToolBackend::Sbi(sbi));
    knobs.monitoring_tool = mon_exec.overhead().clone();
    let mon_mcp = Arc::new(McpServer::new(
        ServerKind::Monitoring,
        mon_exec,
        tracer(&participants::mcp_server(ports[1])),
        config.mcp_sse,
        format!("{}/mcp", endpoints.monitoring_mcp),
    ));
    let exe_exec = ToolExecutor::new(ToolBackend::Runtime(runtime.clone()));
    knobs.execution_tool = exe_exec.overhead().clone();
    let exe_mcp = Arc::new(McpServer::new(
        ServerKind::Execution,
        exe_exec,
        tracer(&participants::mcp_server(ports[2])),
        config.mcp_sse,
        format!("{}/mcp", endpoints.execution_mcp),
    ));

    let deployed = config.deployed();
    let reasoning = backend(&config);
    let client_err = |e: crate::mcp::McpError| StackError::Client(e.to_string());

    let mon_backend = Arc::new(Delayed::new(reasoning.clone()));
    knobs.monitoring = mon_backend.delays().clone();
    let mon_agent = SubAgent::new(
        Capability::Monitoring,
        mon_backend,
        McpClient::new(&endpoints.monitoring_mcp, tracer(participants::MONITORING_AGENT)).map_err(client_err)?,
        deployed.clone(),
    );
    knobs.monitoring_task = mon_agent.task_overhead().clone();
    let mon_server = A2aServer::new(
        monitoring_card(&endpoints.monitoring_agent),
        Arc::new(mon_agent),
        tracer(participants::MONITORING_AGENT),
        "Return inspection outcome",
    );
    knobs.cards.push(mon_server.card_delay().clone());

    let exe_backend = Arc::new(Delayed::new(reasoning.clone()));
    knobs.execution = exe_backend.delays().clone();
    let exe_agent = SubAgent::new(
        Capability::Execution,
        exe_backend,
        McpClient::new(&endpoints.execution_mcp, tracer(participants::EXECUTION_AGENT)).map_err(client_err)?,
        deployed.clone(),
    );
    knobs.execution_task = exe_agent.task_overhead().clone();
    let exe_server = A2aServer::new(
        execution_card(&endpoints.execution_agent),
        Arc::new(exe_agent),
        tracer(participants::EXECUTION_AGENT),
        "Return lifecycle control outcome",
    );
    knobs.cards.push(exe_server.card_delay().clone());

    let host_backend = Arc::new(Delayed::new(reasoning));
    knobs.host = host_backend.delays().clone();
    let host_agent = HostAgent::new(
        host_backend,
        A2aClient::new(tracer(participants::HOST_AGENT)),
        Peer::new(participants::MONITORING_AGENT, &endpoints.monitoring_agent),
        Peer::new(participants::EXECUTION_AGENT, &endpoints.execution_agent),
        deployed,
    );
    knobs.handover = host_agent.handover().clone();
    let host_server = A2aServer::new(
        host_card(&endpoints.host_agent),
        Arc::new(host_agent),
        tracer(participants::HOST_AGENT),
        "Return final response to user",
    )
    .with_inbound_purpose(HOST_PROMPT_PURPOSE);

    let stack = Arc::new(Stack {
        user: A2aClient::new(tracer(participants::USER)),
        config,
        endpoints,
        collector: collector.clone(),
        runtime: runtime.clone(),
        simulated,
        knobs,
        profile: RwLock::new(profile.clone()),
        servers: Mutex::new(Vec::new()),
        run_lock: tokio::sync::Mutex::new(()),
        latest_report: RwLock::new(None),
        shutdown: Notify::new(),
        stopped: AtomicBool::new(false),
    });
    stack.apply_profile(&profile);

    let routers = [
        nrf.router(),
        mon_mcp.router(),
        exe_mcp.router(),
        Arc::new(host_server).router(),
        Arc::new(mon_server).router(),
        Arc::new(exe_server).router(),
        crate::control::router(Arc::downgrade(&stack)),
    ];
    {
        let mut servers = stack.servers.lock();
        for (listener, router) in listeners.into_iter().zip(routers) {
            servers.push(ServerHandle::spawn(listener, with_cors(router)));
        }
    }

    let up = async {
        for port in &ports {
            if !wait_listening(*port, &host, deadline).await {
                return Err(StackError::StartupTimeout {
                    what: format!("port {port}"),
                    after_s: timeout.as_secs_f64(),
                });
            }
        }
        runtime.boot(&deployments).await?;
        Ok(())
    };
    let booted = match tokio::time::timeout(timeout, up).await {
        Ok(r) => r,
        Err(_) => Err(StackError::StartupTimeout {
            what: "NF boot".into(),
            after_s: timeout.as_secs_f64(),
        }),
    };
    if let Err(e) = booted {
        stack.down().await;
        return Err(e);
    }
    Ok(stack)
}

impl Stack {
    pub fn config(&self) -> &DeploymentConfig {
        &self.config
    }

    pub fn endpoints(&self) -> &Endpoints {
        &self.endpoints
    }

    pub fn collector(&self) -> &Arc<TraceCollector> {
        &self.collector
    }

    pub fn runtime(&self) -> &Arc<NfRuntime> {
        &self.runtime
    }

    /// The simulated NF backend, when the stack uses one.
    pub fn simulated_backend(&self) -> Option<&Arc<SimulatedBackend>> {
        self.simulated.as_ref()
    }

    pub fn profile(&self) -> LatencyProfile {
        self.profile.read().clone()
    }

    /// Re-tunes every injected delay. Per-NF delays from the deployment
    /// config take precedence over the profile's NF start/stop delays.
    pub fn apply_profile(&self, p: &LatencyProfile) {
        let k = &self.knobs;
        k.host.interpret.set_secs(p.host_interpret_s);
        k.host.select.set_secs(0.0);
        k.host.summarize.set_secs(0.0);
        k.handover.set_secs(p.host_handover_s);
        for card in &k.cards {
            card.set_secs(p.card_fetch_s);
        }
        k.monitoring.interpret.set_secs(0.0);
        k.monitoring.select.set_secs(p.monitoring_select_s);
        k.monitoring.summarize.set_secs(p.monitoring_summarize_s);
        k.monitoring_task.set_secs(p.monitoring_task_overhead_s);
        k.monitoring_tool.set_secs(p.monitoring_tool_overhead_s);
        k.execution.interpret.set_secs(0.0);
        k.execution.select.set_secs(p.execution_select_s);
        k.execution.summarize.set_secs(p.execution_summarize_s);
        k.execution_task.set_secs(p.execution_task_overhead_s);
        k.execution_tool.set_secs(p.execution_tool_overhead_s);
        if let Some(sim) = &self.simulated {
            let default = NfDelays {
                start: Duration::from_secs_f64(p.nf_start_s),
                stop: Duration::from_secs_f64(p.nf_stop_s),
            };
            sim.set_default_delays(default);
            sim.clear_overrides();
            for nf in &self.config.nfs {
                if nf.start_delay_s.is_some() || nf.stop_delay_s.is_some() {
                    sim.set_delays(
                        nf.nf_type,
                        NfDelays {
                            start: nf.start_delay_s.map(Duration::from_secs_f64).unwrap_or(default.start),
                            stop: nf.stop_delay_s.map(Duration::from_secs_f64).unwrap_or(default.stop),
                        },
                    );
                }
            }
        }
        *self.profile.write() = p.clone();
    }

    /// Submits `text` to the Host Agent over A2A as the user, as one traced
    /// run. Prompts are serialized.
    pub async fn prompt(&self, text: &str) -> PromptOutcome {
        let _guard = self.run_lock.lock().await;
        let run = self.collector.begin_run();
        let started = Instant::now();
        let host = Peer::new(participants::HOST_AGENT, &self.endpoints.host_agent);
        let result = self.user.send_message(&host, text, HOST_PROMPT_PURPOSE).await;
        let elapsed_s = started.elapsed().as_secs_f64();
        let events = self.collector.run_events();
        let (text, error) = match result {
            Ok(task) if task.status.state == TaskState::Completed => (Some(task.text().to_string()), None),
            Ok(task) => (None, Some(format!("task ended {:?}: {}", task.status.state, task.text()))),
            Err(e) => (None, Some(e.to_string())),
        };
        if let Ok(report) = latency_breakdown(std::slice::from_ref(&events)) {
            *self.latest_report.write() = Some(report);
        }
        PromptOutcome {
            run,
            text,
            error,
            elapsed_s,
            events,
        }
    }

    pub fn latest_report(&self) -> Option<LatencyReport> {
        self.latest_report.read().clone()
    }

    pub fn set_latest_report(&self, report: LatencyReport) {
        *self.latest_report.write() = Some(report);
    }

    pub fn nf_states(&self) -> Vec<NfRuntimeState> {
        self.runtime.states()
    }

    pub fn status(&self) -> StackStatus {
        let registry = self.runtime.registry();
        StackStatus {
            latency_profile: self.profile.read().name.clone(),
            endpoints: self.endpoints.clone(),
            nfs: self
                .runtime
                .states()
                .into_iter()
                .map(|s| NfStatusRow {
                    nf_type: s.nf_type,
                    state: s.state,
                    registered: registry.registered(s.nf_type).len(),
                    backend_handle: s.backend_handle,
                })
                .collect(),
            trace_events: self.collector.len(),
        }
    }

    /// Asks whoever waits in [`wait_shutdown`](Self::wait_shutdown) to tear
    /// the stack down.
    pub fn request_shutdown(&self) {
        self.shutdown.notify_one();
    }

    pub async fn wait_shutdown(&self) {
        self.shutdown.notified().await;
    }

    pub fn is_stopped(&self) -> bool {
        self.stopped.load(Ordering::SeqCst)
    }

    /// Stops every server and NF. Safe to call more than once.
    pub async fn down(&self) {
        if self.stopped.swap(true, Ordering::SeqCst) {
            return;
        }
        let servers: Vec<ServerHandle> = std::mem::take(&mut *self.servers.lock());
        futures::future::join_all(servers.into_iter().map(ServerHandle::stop)).await;
        self.runtime.shutdown().await;
    }
}

/// Holder used by the control endpoint; it must not keep the stack alive.
pub type StackRef = Weak<Stack>;
