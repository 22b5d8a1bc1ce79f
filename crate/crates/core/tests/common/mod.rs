//! Generators and independent oracles shared by the integration tests and
//! the acceptance run.
#![allow(dead_code)]

use std::collections::BTreeMap;

use agentic_core::nf::{LifecycleAction, NfType};
use agentic_core::trace::{participants, Direction, Interface, TraceEvent};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;
use serde_json::{json, Map, Value};

/// Draws `n` values from `strategy`.
pub fn sample<S: Strategy>(strategy: S, n: usize) -> Vec<S::Value> {
    let mut runner = TestRunner::default();
    (0..n)
        .map(|_| strategy.new_tree(&mut runner).expect("strategy generates").current())
        .collect()
}

// ---------------------------------------------------------------------------
// JSON-RPC corpus

/// Ids that survive any JSON round trip exactly.
pub fn rpc_id() -> impl Strategy<Value = Value> {
    prop_oneof![
        any::<i64>().prop_map(Value::from),
        any::<u64>().prop_map(Value::from),
        (any::<i32>()).prop_map(|n| json!(n as f64 / 4.0)),
        ".{0,24}".prop_map(Value::from),
        "[0-9a-f]{8}-[0-9a-f]{4}".prop_map(Value::from),
    ]
}

fn scalar() -> impl Strategy<Value = Value> {
    prop_oneof![
        Just(Value::Null),
        any::<bool>().prop_map(Value::from),
        any::<i32>().prop_map(Value::from),
        "[a-zA-Z_]{0,8}".prop_map(Value::from),
        prop::sample::select(vec!["AMF", "SMF", "UPF", "NRF", "XYZ", "start", "stop", "restart"]).prop_map(Value::from),
    ]
}

/// Tool-call arguments: mostly plausible keys, arbitrary values.
pub fn loose_arguments() -> impl Strategy<Value = Value> {
    prop::collection::btree_map(
        prop::sample::select(vec!["nf_type", "action", "key", "value", "replicas", "extra"]),
        scalar(),
        0..4,
    )
    .prop_map(|m| Value::Object(m.into_iter().map(|(k, v)| (k.to_string(), v)).collect()))
}

fn mcp_params() -> impl Strategy<Value = Option<Value>> {
    prop_oneof![
        Just(None),
        Just(Some(json!({}))),
        Just(Some(json!([1, 2]))),
        Just(Some(json!({"protocolVersion": "2025-06-18", "capabilities": {}, "clientInfo": {"name": "fuzz"}}))),
        Just(Some(json!({"protocolVersion": "0.0"}))),
        (
            prop::sample::select(vec![
                "check_nf_status",
                "list_nf_services",
                "get_nf_profile",
                "control_nf",
                "update_nf_config",
                "scale_nf",
                "no_such_tool",
            ]),
            loose_arguments()
        )
            .prop_map(|(name, args)| Some(json!({"name": name, "arguments": args}))),
    ]
}

fn a2a_params() -> impl Strategy<Value = Option<Value>> {
    let text = prop_oneof![
        Just("Check the status of the SMF.".to_string()),
        Just("Inspect the AMF".to_string()),
        ".{0,32}",
    ];
    prop_oneof![
        Just(None),
        Just(Some(json!({}))),
        text.prop_map(|t| Some(json!({"message": {"kind": "message", "role": "user", "parts": [{"kind": "text", "text": t}]}}))),
        Just(Some(json!({"message": {"kind": "message", "role": "agent", "parts": [{"kind": "text", "text": "x"}]}}))),
        Just(Some(json!({"message": {"kind": "message", "role": "user", "parts": []}}))),
    ]
}

/// Which endpoint a fuzzed request goes to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    MonitoringMcp,
    ExecutionMcp,
    MonitoringAgent,
}

/// A request body plus where to send it and whether to attach a valid MCP
/// session.
#[derive(Debug, Clone)]
pub struct RpcCase {
    pub target: Target,
    pub id: Value,
    pub body: Value,
    pub with_session: bool,
}

pub fn rpc_case() -> impl Strategy<Value = RpcCase> {
    let version = prop_oneof![8 => Just(json!("2.0")), 1 => Just(json!("1.0")), 1 => Just(json!(2))];
    let mcp = (
        prop::sample::select(vec![Target::MonitoringMcp, Target::ExecutionMcp]),
        prop::sample::select(vec!["initialize", "tools/list", "tools/call", "ping", "tools/foo", "resources/list"]),
        mcp_params(),
        any::<bool>(),
    )
        .prop_map(|(t, m, p, s)| (t, m, p, s));
    let a2a = (
        prop::sample::select(vec!["message/send", "message/stream", "tasks/get"]),
        a2a_params(),
    )
        .prop_map(|(m, p)| (Target::MonitoringAgent, m, p, false));
    (prop_oneof![4 => mcp, 1 => a2a], rpc_id(), version).prop_map(|((target, method, params, with_session), id, version)| {
        let mut body = Map::new();
        body.insert("jsonrpc".into(), version);
        body.insert("id".into(), id.clone());
        body.insert("method".into(), Value::from(method));
        if let Some(p) = params {
            body.insert("params".into(), p);
        }
        RpcCase {
            target,
            id,
            body: Value::Object(body),
            with_session,
        }
    })
}

// ---------------------------------------------------------------------------
// Tool arguments and the hand-written validity oracle

pub const TOOLS: [&str; 6] = [
    "check_nf_status",
    "list_nf_services",
    "get_nf_profile",
    "control_nf",
    "update_nf_config",
    "scale_nf",
];

/// Argument objects built to be valid or near-valid for `tool`: every
/// field may be dropped, mistyped, out of range, or joined by an extra one.
pub fn tool_arguments(tool: &'static str) -> impl Strategy<Value = Value> {
    let nf = prop_oneof![
        6 => prop::sample::select(vec!["AMF", "SMF", "UPF", "UDM", "UDR", "AUSF", "amf"]).prop_map(Value::from),
        1 => Just(json!("XYZ")),
        1 => Just(json!(7)),
        1 => Just(json!(null)),
        1 => Just(json!(["AMF"])),
    ];
    let action = prop_oneof![
        6 => prop::sample::select(vec!["start", "stop", "restart"]).prop_map(Value::from),
        1 => Just(json!("START")),
        1 => Just(json!("boot")),
        1 => Just(json!(1)),
    ];
    let text = prop_oneof![4 => "[a-z_]{1,8}".prop_map(Value::from), 1 => Just(json!(3)), 1 => Just(json!(false))];
    let replicas = prop_oneof![
        6 => (0i64..3).prop_map(Value::from),
        1 => (-5i64..0).prop_map(Value::from),
        1 => Just(json!(1.5)),
        1 => Just(json!("2")),
    ];
    let fields: Vec<(&'static str, BoxedStrategy<Value>)> = match tool {
        "control_nf" => vec![("nf_type", nf.boxed()), ("action", action.boxed())],
        "update_nf_config" => vec![("nf_type", nf.boxed()), ("key", text.clone().boxed()), ("value", text.boxed())],
        "scale_nf" => vec![("nf_type", nf.boxed()), ("replicas", replicas.boxed())],
        _ => vec![("nf_type", nf.boxed())],
    };
    let n = fields.len();
    let values: Vec<BoxedStrategy<Value>> = fields.iter().map(|(_, s)| s.clone()).collect();
    let names: Vec<&'static str> = fields.iter().map(|(k, _)| *k).collect();
    let shape = prop_oneof![
        20 => (values, prop::collection::vec(prop::bool::weighted(0.9), n), prop::option::weighted(0.1, scalar()))
            .prop_map(move |(vals, keep, extra)| {
                let mut m = Map::new();
                for ((k, v), keep) in names.iter().zip(vals).zip(keep) {
                    if keep {
                        m.insert(k.to_string(), v);
                    }
                }
                if let Some(x) = extra {
                    m.insert("unexpected".into(), x);
                }
                Value::Object(m)
            }),
        1 => Just(json!([])),
        1 => Just(json!("AMF")),
        1 => Just(json!(null)),
    ];
    shape
}

/// Independent statement of each tool's argument contract.
pub fn arguments_valid(tool: &str, args: &Value) -> bool {
    let Some(obj) = args.as_object() else {
        return false;
    };
    let is_str = |k: &str| obj.get(k).is_some_and(Value::is_string);
    let allowed: &[&str] = match tool {
        "control_nf" => &["nf_type", "action"],
        "update_nf_config" => &["nf_type", "key", "value"],
        "scale_nf" => &["nf_type", "replicas"],
        _ => &["nf_type"],
    };
    if obj.keys().any(|k| !allowed.contains(&k.as_str())) {
        return false;
    }
    if !is_str("nf_type") {
        return false;
    }
    match tool {
        "control_nf" => obj
            .get("action")
            .and_then(Value::as_str)
            .is_some_and(|a| ["start", "stop", "restart"].contains(&a)),
        "update_nf_config" => is_str("key") && is_str("value"),
        "scale_nf" => obj.get("replicas").is_some_and(|r| r.is_u64()),
        _ => true,
    }
}

// ---------------------------------------------------------------------------
// Lifecycle state-machine oracle

/// Brute-force model: which NFs run. `apply` returns the expected
/// `(running_after, already)` pair.
#[derive(Debug, Clone, Default)]
pub struct LifecycleOracle {
    pub running: BTreeMap<NfType, bool>,
}

impl LifecycleOracle {
    pub fn new(initial: impl IntoIterator<Item = (NfType, bool)>) -> Self {
        Self {
            running: initial.into_iter().collect(),
        }
    }

    pub fn apply(&mut self, nf: NfType, action: LifecycleAction) -> (bool, bool) {
        let before = self.running[&nf];
        let (after, already) = match (action, before) {
            (LifecycleAction::Start, true) => (true, true),
            (LifecycleAction::Start, false) => (true, false),
            (LifecycleAction::Stop, true) => (false, false),
            (LifecycleAction::Stop, false) => (false, true),
            (LifecycleAction::Restart, _) => (true, false),
        };
        self.running.insert(nf, after);
        (after, already)
    }
}

pub fn lifecycle_action() -> impl Strategy<Value = (NfType, LifecycleAction)> {
    (
        prop::sample::select(NfType::CONTROLLABLE.to_vec()),
        prop::sample::select(LifecycleAction::ALL.to_vec()),
    )
}

// ---------------------------------------------------------------------------
// Synthetic traces

/// Durations (seconds) of one synthetic run. Everything not covered by the
/// named intervals is A2A transport: card fetches, hand-overs and the final
/// delivery.
#[derive(Debug, Clone, Copy)]
pub struct RunShape {
    pub host: f64,
    pub card: f64,
    pub mon_listing: f64,
    pub mon_call: f64,
    pub mon_rest: f64,
    pub exe_listing: f64,
    pub exe_call: f64,
    pub exe_rest: f64,
    pub handover: f64,
    pub delivery: f64,
}

impl RunShape {
    pub fn mon_total(&self) -> f64 {
        self.mon_listing + self.mon_call + self.mon_rest
    }
    pub fn exe_total(&self) -> f64 {
        self.exe_listing + self.exe_call + self.exe_rest
    }
    pub fn a2a(&self) -> f64 {
        2.0 * self.card + self.handover + self.delivery
    }
    pub fn end_to_end(&self) -> f64 {
        self.host + self.mon_total() + self.exe_total() + self.a2a()
    }
}

fn ns(s: f64) -> u64 {
    (s * 1e9).round() as u64
}

struct Builder {
    t: u64,
    events: Vec<TraceEvent>,
    next: u32,
}

impl Builder {
    #[allow(clippy::too_many_arguments)]
    fn event(&mut self, label: &str, at: u64, iface: Interface, src: &str, dst: &str, op: &str, dir: Direction, corr: &str) {
        self.events.push(TraceEvent {
            label: label.into(),
            timestamp_ns: at,
            interface: iface,
            source: src.into(),
            destination: dst.into(),
            purpose: String::new(),
            direction: dir,
            correlation_id: corr.into(),
            operation: op.into(),
            endpoint: String::new(),
            tabulated: true,
            run: 0,
            unmatched: false,
        });
    }

    /// A request at the cursor and its response `dur` later; advances the cursor.
    fn exchange(&mut self, label: &str, iface: Interface, src: &str, dst: &str, op: &str, dur: f64) {
        self.next += 1;
        let corr = format!("c{}", self.next);
        let start = self.t;
        self.t += ns(dur);
        self.event(label, start, iface, src, dst, op, Direction::Request, &corr);
        self.event(&format!("{label}'"), self.t, iface, dst, src, op, Direction::Response, &corr);
    }

    fn open(&mut self, label: &str, iface: Interface, src: &str, dst: &str, op: &str) -> (String, String, String, String, String) {
        self.next += 1;
        let corr = format!("c{}", self.next);
        self.event(label, self.t, iface, src, dst, op, Direction::Request, &corr);
        (label.into(), src.into(), dst.into(), op.into(), corr)
    }

    fn close(&mut self, open: (String, String, String, String, String), iface: Interface) {
        let (label, src, dst, op, corr) = open;
        self.event(&format!("{label}'"), self.t, iface, &dst, &src, &op, Direction::Response, &corr);
    }
}

/// Builds the event log of one representative run with the given shape.
/// Timestamps start at `origin_ns`.
pub fn synthetic_run(shape: &RunShape, origin_ns: u64) -> Vec<TraceEvent> {
    use participants::*;
    let mut b = Builder {
        t: origin_ns,
        events: Vec::new(),
        next: 0,
    };
    let mcp_mon = mcp_server(9000);
    let mcp_exe = mcp_server(9001);
    let a1 = b.open("A1", Interface::A2A, USER, HOST_AGENT, "message/send");
    // host reasoning is split around the monitoring card fetch
    b.t += ns(shape.host / 2.0);
    b.exchange("C1", Interface::A2A, HOST_AGENT, MONITORING_AGENT, "agent-card", shape.card);
    b.t += ns(shape.host / 2.0);

    let a2 = b.open("A2", Interface::A2A, HOST_AGENT, MONITORING_AGENT, "message/send");
    b.exchange("I1", Interface::MCP, MONITORING_AGENT, &mcp_mon, "initialize", 0.0);
    b.t += ns(shape.mon_rest / 2.0);
    b.exchange("M1", Interface::MCP, MONITORING_AGENT, &mcp_mon, "tools/list", shape.mon_listing);
    let m2 = b.open("M2", Interface::MCP, MONITORING_AGENT, &mcp_mon, "tools/call");
    let s1 = b.open("S1", Interface::SBI, MCP_TOOL, NRF, "GET nf-instances");
    b.t += ns(shape.mon_call);
    b.close(s1, Interface::SBI);
    b.close(m2, Interface::MCP);
    b.t += ns(shape.mon_rest / 2.0);
    b.close(a2, Interface::A2A);

    b.t += ns(shape.handover);
    b.exchange("C2", Interface::A2A, HOST_AGENT, EXECUTION_AGENT, "agent-card", shape.card);
    let a3 = b.open("A3", Interface::A2A, HOST_AGENT, EXECUTION_AGENT, "message/send");
    b.t += ns(shape.exe_rest / 2.0);
    b.exchange("M3", Interface::MCP, EXECUTION_AGENT, &mcp_exe, "tools/list", shape.exe_listing);
    b.exchange("M4", Interface::MCP, EXECUTION_AGENT, &mcp_exe, "tools/call", shape.exe_call);
    b.t += ns(shape.exe_rest / 2.0);
    b.close(a3, Interface::A2A);

    b.t += ns(shape.delivery);
    b.close(a1, Interface::A2A);
    b.events.sort_by_key(|e| e.timestamp_ns);
    b.events
}

/// Mean, sample standard deviation, min and max computed the long way:
/// sum of squares around zero rather than around the mean.
pub fn brute_stats(xs: &[f64]) -> (f64, f64, f64, f64) {
    let n = xs.len() as f64;
    let mut sum = 0.0;
    let mut sq = 0.0;
    let mut lo = xs[0];
    let mut hi = xs[0];
    for &x in xs {
        sum += x;
        sq += x * x;
        if x < lo {
            lo = x;
        }
        if x > hi {
            hi = x;
        }
    }
    let mean = sum / n;
    let std = if xs.len() < 2 {
        0.0
    } else {
        ((sq - n * mean * mean) / (n - 1.0)).max(0.0).sqrt()
    };
    (mean, std, lo, hi)
}

/// Labels of the tabulated request-side rows, in order.
pub fn table_labels(trace: &[TraceEvent]) -> Vec<String> {
    let mut rows: Vec<&TraceEvent> = trace.iter().filter(|e| e.tabulated).collect();
    rows.sort_by_key(|e| e.timestamp_ns);
    rows.iter().map(|e| e.label.clone()).collect()
}

pub const REFERENCE_SEQUENCE: [(&str, Interface); 10] = [
    ("A1", Interface::A2A),
    ("A2", Interface::A2A),
    ("M1", Interface::MCP),
    ("M2", Interface::MCP),
    ("S1", Interface::SBI),
    ("M2'", Interface::MCP),
    ("A3", Interface::A2A),
    ("M3", Interface::MCP),
    ("M4", Interface::MCP),
    ("M4'", Interface::MCP),
];

pub fn is_agent(name: &str) -> bool {
    [
        participants::HOST_AGENT,
        participants::MONITORING_AGENT,
        participants::EXECUTION_AGENT,
    ]
    .contains(&name)
}

// ---------------------------------------------------------------------------
// Checks against a running stack

use agentic_core::jsonrpc;
use agentic_core::mcp::{McpClient, McpError, ToolDescriptor};
use agentic_core::stack::Endpoints;
use agentic_core::trace::{TraceCollector, Tracer};

fn untraced(name: &str) -> Tracer {
    Tracer::new(TraceCollector::new(), name)
}

/// Sends every case as a raw HTTP request and checks the response envelope
/// echoes the id and carries `"jsonrpc":"2.0"`. Returns the failures.
pub async fn id_echo_failures(endpoints: &Endpoints, cases: &[RpcCase]) -> Vec<String> {
    let http = reqwest::Client::builder().no_proxy().build().unwrap();
    let mut sessions = BTreeMap::new();
    for (target, base) in [
        (0, &endpoints.monitoring_mcp),
        (1, &endpoints.execution_mcp),
    ] {
        let c = McpClient::new(base, untraced("fuzz")).unwrap();
        sessions.insert(target, c.initialize().await.unwrap());
    }
    let mut failures = Vec::new();
    for case in cases {
        let (url, session) = match case.target {
            Target::MonitoringMcp => (format!("{}/mcp", endpoints.monitoring_mcp), sessions.get(&0)),
            Target::ExecutionMcp => (format!("{}/mcp", endpoints.execution_mcp), sessions.get(&1)),
            Target::MonitoringAgent => (format!("{}/", endpoints.monitoring_agent), None),
        };
        let mut req = http
            .post(&url)
            .header("accept", "application/json, text/event-stream")
            .json(&case.body);
        if let (true, Some(s)) = (case.with_session, session) {
            req = req.header("mcp-session-id", s.as_str());
        }
        let body = match req.send().await {
            Ok(r) => r.text().await.unwrap_or_default(),
            Err(e) => {
                failures.push(format!("{}: transport {e}", case.body));
                continue;
            }
        };
        let envelope: Value = match serde_json::from_str(&jsonrpc::unframe(&body)) {
            Ok(v) => v,
            Err(e) => {
                failures.push(format!("{}: undecodable response {body:?}: {e}", case.body));
                continue;
            }
        };
        if envelope.get("jsonrpc") != Some(&json!("2.0")) || envelope.get("id") != Some(&case.id) {
            failures.push(format!("{} -> {}", case.body, envelope));
        }
    }
    failures
}

/// Outcome counts of a schema-closure run.
#[derive(Debug, Default, Clone, Copy)]
pub struct Closure {
    pub valid: usize,
    pub rejected: usize,
    pub violations: usize,
}

/// Calls `tool` with each argument value and classifies the result against
/// the hand-written contract: invalid arguments must come back as an
/// `isError` diagnostic, valid ones must never be rejected for their shape,
/// and a successful result must conform to the declared output schema.
pub async fn schema_closure(
    base: &str,
    tool: &ToolDescriptor,
    cases: &[Value],
    violations: &mut Vec<String>,
) -> Closure {
    let client = McpClient::new(base, untraced("fuzz")).unwrap();
    let mut c = Closure::default();
    let rejection = format!("invalid arguments for {}", tool.name);
    for args in cases {
        let before = violations.len();
        let valid = arguments_valid(&tool.name, args);
        match client.call_tool(&tool.name, args.clone(), "fuzz").await {
            Err(McpError::Rpc { code, message }) => {
                violations.push(format!("{} {args}: protocol error {code} {message}", tool.name))
            }
            Err(e) => violations.push(format!("{} {args}: {e}", tool.name)),
            Ok(r) if !valid => {
                if !(r.is_error && r.result_text().starts_with(&rejection)) {
                    violations.push(format!("{} {args}: invalid arguments accepted: {r:?}", tool.name));
                }
            }
            Ok(r) => {
                if r.is_error {
                    if r.result_text().starts_with(&rejection) || r.result_text().is_empty() {
                        violations.push(format!("{} {args}: valid arguments rejected: {r:?}", tool.name));
                    }
                } else if let Err(p) = tool.output_schema.validate(&Value::Object(r.structured_content.clone())) {
                    violations.push(format!("{} {args}: output does not conform: {p:?}", tool.name));
                }
            }
        }
        if violations.len() > before {
            c.violations += 1;
        } else if valid {
            c.valid += 1;
        } else {
            c.rejected += 1;
        }
    }
    c
}
