//! In-process message tracing across the A2A, MCP, SBI and system interfaces.
//!
//! Every message is logged once, by its sender, at the moment it is emitted.
//! Requests carry their label and correlation id to the receiver in HTTP
//! headers so the receiver can log the matching response under the primed
//! label (`M2` is answered by `M2'`).

pub mod latency;
pub mod table;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use parking_lot::Mutex;
use serde::{Deserialize, Serialize};
use tokio::sync::broadcast;

pub use latency::{latency_breakdown, Component, LatencyError, LatencyReport, Stats};
pub use table::{export_trace_table, render_table, TraceRow};

pub const HEADER_LABEL: &str = "x-trace-label";
pub const HEADER_CORRELATION: &str = "x-trace-correlation";
pub const HEADER_SOURCE: &str = "x-trace-source";

/// Participant names as they appear in trace tables.
pub mod participants {
    pub const USER: &str = "User";
    pub const HOST_AGENT: &str = "Host Agent";
    pub const MONITORING_AGENT: &str = "Monitoring Agent";
    pub const EXECUTION_AGENT: &str = "Execution Agent";
    pub const MCP_TOOL: &str = "MCP Tool";
    pub const NRF: &str = "NRF";
    pub const LIFECYCLE_RUNTIME: &str = "Lifecycle Runtime";

    pub fn mcp_server(port: u16) -> String {
        format!("MCP Server (Localhost: {port})")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Interface {
    A2A,
    MCP,
    SBI,
    SYS,
}

impl fmt::Display for Interface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Interface::A2A => "A2A",
            Interface::MCP => "MCP",
            Interface::SBI => "SBI",
            Interface::SYS => "SYS",
        })
    }
}

impl FromStr for Interface {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "A2A" => Ok(Interface::A2A),
            "MCP" => Ok(Interface::MCP),
            "SBI" => Ok(Interface::SBI),
            "SYS" => Ok(Interface::SYS),
            _ => Err(format!("unknown interface {s:?} (expected A2A, MCP, SBI or SYS)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Request,
    Response,
}

/// Label prefixes: one counter per prefix, reset at the start of every run.
pub mod prefix {
    /// A2A `message/send`.
    pub const DELEGATION: &str = "A";
    /// A2A agent card retrieval.
    pub const CARD: &str = "C";
    /// MCP `tools/list` and `tools/call`.
    pub const TOOL: &str = "M";
    /// MCP `initialize`.
    pub const SESSION: &str = "I";
    /// SBI requests.
    pub const SBI: &str = "S";
    /// System-level lifecycle operations.
    pub const SYSTEM: &str = "Y";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceEvent {
    pub label: String,
    pub timestamp_ns: u64,
    pub interface: Interface,
    pub source: String,
    pub destination: String,
    pub purpose: String,
    pub direction: Direction,
    pub correlation_id: String,
    /// Protocol operation, e.g. `tools/call` or `GET nf-instances`.
    pub operation: String,
    /// URL the request targeted.
    #[serde(default)]
    pub endpoint: String,
    /// Whether the event is a row of the packet-level trace table.
    #[serde(default)]
    pub tabulated: bool,
    #[serde(default)]
    pub run: u64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unmatched: bool,
}

impl TraceEvent {
    pub fn is_request(&self) -> bool {
        self.direction == Direction::Request
    }
}

#[derive(Default)]
struct CollectorState {
    events: Vec<TraceEvent>,
    counters: HashMap<String, u32>,
    open: HashSet<String>,
    run: u64,
    run_start: usize,
}

/// Append-only, thread-safe event log shared by every component of a stack.
pub struct TraceCollector {
    origin: Instant,
    state: Mutex<CollectorState>,
    tx: broadcast::Sender<TraceEvent>,
}

impl Default for TraceCollector {
    fn default() -> Self {
        let (tx, _) = broadcast::channel(4096);
        Self {
            origin: Instant::now(),
            state: Mutex::new(CollectorState::default()),
            tx,
        }
    }
}

impl TraceCollector {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    pub fn now_ns(&self) -> u64 {
        self.origin.elapsed().as_nanos() as u64
    }

    pub fn next_label(&self, prefix: &str) -> String {
        let mut st = self.state.lock();
        let n = st.counters.entry(prefix.to_string()).or_insert(0);
        *n += 1;
        format!("{prefix}{n}")
    }

    /// Appends an event, stamping it with the collector clock.
    ///
    /// Stamping happens under the log lock, so timestamps never decrease in
    /// append order.
    pub fn record(&self, mut event: TraceEvent) -> TraceEvent {
        let mut st = self.state.lock();
        event.timestamp_ns = self.now_ns();
        event.run = st.run;
        match event.direction {
            Direction::Request => {
                st.open.insert(event.correlation_id.clone());
            }
            Direction::Response => {
                event.unmatched = !st.open.remove(&event.correlation_id);
            }
        }
        st.events.push(event.clone());
        // broadcast under the lock so subscribers see log order
        let _ = self.tx.send(event.clone());
        event
    }

    /// Starts a new run: label counters restart at 1 and
    /// [`run_events`](Self::run_events) only returns events from here on.
    pub fn begin_run(&self) -> u64 {
        let mut st = self.state.lock();
        st.run += 1;
        st.counters.clear();
        st.run_start = st.events.len();
        st.run
    }

    pub fn run_events(&self) -> Vec<TraceEvent> {
        let st = self.state.lock();
        st.events[st.run_start..].to_vec()
    }

    pub fn snapshot(&self) -> Vec<TraceEvent> {
        self.state.lock().events.clone()
    }

    pub fn len(&self) -> usize {
        self.state.lock().events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn subscribe(&self) -> broadcast::Receiver<TraceEvent> {
        self.tx.subscribe()
    }

    /// Events logged so far plus a receiver for everything after them, with
    /// no gap or overlap between the two.
    pub fn subscribe_with_snapshot(&self) -> (Vec<TraceEvent>, broadcast::Receiver<TraceEvent>) {
        let st = self.state.lock();
        (st.events.clone(), self.tx.subscribe())
    }
}

/// Label and correlation id of one request/response exchange, as carried
/// between sender and receiver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceContext {
    pub label: String,
    pub correlation_id: String,
    pub source: String,
}

impl TraceContext {
    pub fn from_headers(headers: &axum::http::HeaderMap) -> Option<Self> {
        let get = |name: &str| {
            headers
                .get(name)
                .and_then(|v| v.to_str().ok())
                .map(str::to_string)
        };
        Some(Self {
            label: get(HEADER_LABEL)?,
            correlation_id: get(HEADER_CORRELATION)?,
            source: get(HEADER_SOURCE).unwrap_or_else(|| "Client".to_string()),
        })
    }

    pub fn apply(&self, req: reqwest::RequestBuilder) -> reqwest::RequestBuilder {
        req.header(HEADER_LABEL, &self.label)
            .header(HEADER_CORRELATION, &self.correlation_id)
            .header(HEADER_SOURCE, &self.source)
    }
}

/// What is being sent, minus the parts the tracer fills in.
#[derive(Debug, Clone)]
pub struct Hop<'a> {
    pub interface: Interface,
    pub operation: &'a str,
    pub endpoint: &'a str,
    pub purpose: &'a str,
    pub tabulated: bool,
}

/// A participant's handle on the shared collector.
#[derive(Clone)]
pub struct Tracer {
    collector: Arc<TraceCollector>,
    name: String,
}

impl Tracer {
    pub fn new(collector: Arc<TraceCollector>, name: impl Into<String>) -> Self {
        Self {
            collector,
            name: name.into(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn collector(&self) -> &Arc<TraceCollector> {
        &self.collector
    }

    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Self::new(self.collector.clone(), name)
    }

    /// Logs an outgoing request and returns the context to attach to it.
    pub fn request(&self, label_prefix: &str, destination: &str, hop: Hop<'_>) -> TraceContext {
        let ctx = TraceContext {
            label: self.collector.next_label(label_prefix),
            correlation_id: uuid::Uuid::new_v4().to_string(),
            source: self.name.clone(),
        };
        self.collector.record(TraceEvent {
            label: ctx.label.clone(),
            timestamp_ns: 0,
            interface: hop.interface,
            source: self.name.clone(),
            destination: destination.to_string(),
            purpose: hop.purpose.to_string(),
            direction: Direction::Request,
            correlation_id: ctx.correlation_id.clone(),
            operation: hop.operation.to_string(),
            endpoint: hop.endpoint.to_string(),
            tabulated: hop.tabulated,
            run: 0,
            unmatched: false,
        });
        ctx
    }

    /// Context for an inbound request. When the caller did not propagate one
    /// (an untraced client, or another process), the receiver logs the
    /// request on its behalf.
    pub fn inbound(
        &self,
        headers: &axum::http::HeaderMap,
        label_prefix: &str,
        hop: Hop<'_>,
    ) -> TraceContext {
        if let Some(ctx) = TraceContext::from_headers(headers) {
            return ctx;
        }
        let source = headers
            .get(HEADER_SOURCE)
            .and_then(|v| v.to_str().ok())
            .unwrap_or(participants::USER)
            .to_string();
        self.renamed(source).request(label_prefix, &self.name, hop)
    }

    /// Logs the response to `ctx`, labelled with a trailing prime.
    pub fn response(&self, ctx: &TraceContext, hop: Hop<'_>) {
        self.collector.record(TraceEvent {
            label: format!("{}'", ctx.label),
            timestamp_ns: 0,
            interface: hop.interface,
            source: self.name.clone(),
            destination: ctx.source.clone(),
            purpose: hop.purpose.to_string(),
            direction: Direction::Response,
            correlation_id: ctx.correlation_id.clone(),
            operation: hop.operation.to_string(),
            endpoint: hop.endpoint.to_string(),
            tabulated: hop.tabulated,
            run: 0,
            unmatched: false,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hop(purpose: &str) -> Hop<'_> {
        Hop {
            interface: Interface::A2A,
            operation: "message/send",
            endpoint: "http://localhost:8001",
            purpose,
            tabulated: true,
        }
    }

    #[test]
    fn append_order_is_preserved() {
        let c = TraceCollector::new();
        let user = Tracer::new(c.clone(), participants::USER);
        let host = Tracer::new(c.clone(), participants::HOST_AGENT);
        user.request(prefix::DELEGATION, "Host Agent", hop("Submit user prompt to Host Agent"));
        host.request(prefix::DELEGATION, "Monitoring Agent", hop("Delegate NF status inspection"));
        let events = c.snapshot();
        assert_eq!(events.len(), 2);
        assert_eq!(events[0].label, "A1");
        assert_eq!(events[1].label, "A2");
        assert!(events[0].timestamp_ns <= events[1].timestamp_ns);
    }

    #[test]
    fn unknown_correlation_is_flagged() {
        let c = TraceCollector::new();
        let t = Tracer::new(c.clone(), "X");
        let ctx = TraceContext {
            label: "A9".into(),
            correlation_id: "nope".into(),
            source: "Y".into(),
        };
        t.response(&ctx, hop("r"));
        let ev = &c.snapshot()[0];
        assert!(ev.unmatched);
        assert_eq!(ev.label, "A9'");
        assert_eq!(ev.destination, "Y");
    }

    #[test]
    fn matched_response_is_not_flagged() {
        let c = TraceCollector::new();
        let t = Tracer::new(c.clone(), "X");
        let ctx = t.request(prefix::TOOL, "S", hop("q"));
        Tracer::new(c.clone(), "S").response(&ctx, hop("r"));
        let events = c.snapshot();
        assert!(!events[1].unmatched);
        assert_eq!(events[1].correlation_id, events[0].correlation_id);
    }

    #[test]
    fn runs_restart_labels() {
        let c = TraceCollector::new();
        let t = Tracer::new(c.clone(), "X");
        t.request(prefix::SBI, "NRF", hop("q"));
        c.begin_run();
        let ctx = t.request(prefix::SBI, "NRF", hop("q"));
        assert_eq!(ctx.label, "S1");
        assert_eq!(c.run_events().len(), 1);
        assert_eq!(c.snapshot().len(), 2);
    }

    #[test]
    fn inbound_without_headers_logs_request() {
        let c = TraceCollector::new();
        let host = Tracer::new(c.clone(), participants::HOST_AGENT);
        let ctx = host.inbound(&axum::http::HeaderMap::new(), prefix::DELEGATION, hop("p"));
        let ev = &c.snapshot()[0];
        assert_eq!(ev.source, participants::USER);
        assert_eq!(ev.destination, participants::HOST_AGENT);
        assert_eq!(ctx.source, participants::USER);
    }

    #[test]
    fn concurrent_appends_keep_clock_monotone() {
        let c = TraceCollector::new();
        std::thread::scope(|s| {
            for i in 0..8 {
                let t = Tracer::new(c.clone(), format!("t{i}"));
                s.spawn(move || {
                    for _ in 0..200 {
                        t.request(prefix::TOOL, "S", hop("q"));
                    }
                });
            }
        });
        let events = c.snapshot();
        assert_eq!(events.len(), 1600);
        assert!(events.windows(2).all(|w| w[0].timestamp_ns <= w[1].timestamp_ns));
    }
}
