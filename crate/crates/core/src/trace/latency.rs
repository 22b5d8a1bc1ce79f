//! Per-component latency decomposition of traced runs.
//!
//! Interval boundaries, all taken from sender-side timestamps:
//!
//! - end-to-end: user prompt (`A1`) to the Host Agent's final response (`A1'`);
//! - host reasoning: `A1` to the first delegation request, excluding agent
//!   card retrievals that happen in between;
//! - agent total: delegation request to the agent's task response, summed
//!   over every delegation to that agent;
//! - tool listing / tool call: `tools/list` and `tools/call` exchanges whose
//!   request falls inside one of the agent's delegation windows;
//! - selection + synthesis: agent total minus tool listing minus tool call;
//! - A2A aggregate: end-to-end minus host reasoning minus both agent totals,
//!   i.e. card retrieval, delegation hand-over and final response delivery.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::participants::{EXECUTION_AGENT, MONITORING_AGENT};
use super::{Direction, TraceEvent};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    HostReasoning,
    MonitoringTotal,
    MonitoringToolListing,
    MonitoringToolCall,
    MonitoringSelectionSynthesis,
    ExecutionTotal,
    ExecutionToolListing,
    ExecutionToolCall,
    ExecutionSelectionSynthesis,
    A2aAggregate,
    EndToEnd,
}

impl Component {
    pub const ALL: [Component; 11] = [
        Component::HostReasoning,
        Component::MonitoringTotal,
        Component::MonitoringToolListing,
        Component::MonitoringToolCall,
        Component::MonitoringSelectionSynthesis,
        Component::ExecutionTotal,
        Component::ExecutionToolListing,
        Component::ExecutionToolCall,
        Component::ExecutionSelectionSynthesis,
        Component::A2aAggregate,
        Component::EndToEnd,
    ];

    pub fn title(&self) -> &'static str {
        match self {
            Component::HostReasoning => "Host Agent reasoning and delegation planning",
            Component::MonitoringTotal => "Monitoring Agent (total)",
            Component::MonitoringToolListing | Component::ExecutionToolListing => {
                "MCP tool listing"
            }
            Component::MonitoringToolCall => "MCP tool call + SBI execution",
            Component::ExecutionToolCall => "MCP tool call + system execution",
            Component::MonitoringSelectionSynthesis | Component::ExecutionSelectionSynthesis => {
                "Tool selection + result synthesis"
            }
            Component::ExecutionTotal => "Execution Agent (total)",
            Component::A2aAggregate => "Aggregate A2A agent card retrieval and delegation",
            Component::EndToEnd => "End-to-end latency",
        }
    }

    /// Name used in error messages.
    pub fn boundary_name(&self) -> String {
        match self {
            Component::MonitoringToolListing => "monitoring tool listing".into(),
            Component::MonitoringToolCall => "monitoring tool call".into(),
            Component::ExecutionToolListing => "execution tool listing".into(),
            Component::ExecutionToolCall => "execution tool call".into(),
            Component::MonitoringTotal => "monitoring total".into(),
            Component::ExecutionTotal => "execution total".into(),
            Component::HostReasoning => "host reasoning".into(),
            Component::EndToEnd => "end-to-end".into(),
            other => other.title().to_lowercase(),
        }
    }

    fn is_sub_row(&self) -> bool {
        matches!(
            self,
            Component::MonitoringToolListing
                | Component::MonitoringToolCall
                | Component::MonitoringSelectionSynthesis
                | Component::ExecutionToolListing
                | Component::ExecutionToolCall
                | Component::ExecutionSelectionSynthesis
        )
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.title())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatencyError {
    #[error("run {run}: missing boundary for {component}")]
    MissingBoundary { run: usize, component: String },
    #[error("no runs to analyse")]
    NoRuns,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean_s: f64,
    pub std_s: f64,
    pub min_s: f64,
    pub max_s: f64,
}

impl Stats {
    /// Mean, sample standard deviation (n - 1; zero for a single run), min, max.
    pub fn from_samples(samples: &[f64]) -> Stats {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let std = if samples.len() > 1 {
            (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Stats {
            mean_s: mean,
            std_s: std,
            min_s: samples.iter().copied().fold(f64::INFINITY, f64::min),
            max_s: samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

pub type RunBreakdown = BTreeMap<Component, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LatencyReport {
    pub run_count: usize,
    pub components: BTreeMap<Component, Stats>,
    /// Raw per-run intervals in seconds.
    pub runs: Vec<RunBreakdown>,
}

impl LatencyReport {
    pub fn mean(&self, c: Component) -> f64 {
        self.components[&c].mean_s
    }

    /// Text table laid out as component / mean / std / min / max.
    pub fn render(&self) -> String {
        let mut out = format!(
            "{:<52} {:>9} {:>9} {:>9} {:>9}\n",
            "Component", "Mean [s]", "Std [s]", "Min [s]", "Max [s]"
        );
        out.push_str(&"-".repeat(92));
        out.push('\n');
        for c in Component::ALL {
            let s = &self.components[&c];
            if c == Component::EndToEnd {
                out.push_str(&"-".repeat(92));
                out.push('\n');
            }
            let name = if c.is_sub_row() {
                format!("    {}", c.title())
            } else {
                c.title().to_string()
            };
            out.push_str(&format!(
                "{:<52} {:>9.3} {:>9.3} {:>9.3} {:>9.3}\n",
                name, s.mean_s, s.std_s, s.min_s, s.max_s
            ));
        }
        out.push_str(&format!("({} runs)\n", self.run_count));
        out
    }
}

struct Pair<'a> {
    request: &'a TraceEvent,
    response: Option<&'a TraceEvent>,
}

impl Pair<'_> {
    fn seconds(&self) -> Option<f64> {
        self.response
            .map(|r| r.timestamp_ns.saturating_sub(self.request.timestamp_ns) as f64 * 1e-9)
    }
}

fn pairs(trace: &[TraceEvent]) -> Vec<Pair<'_>> {
    let responses: HashMap<&str, &TraceEvent> = trace
        .iter()
        .filter(|e| e.direction == Direction::Response)
        .map(|e| (e.correlation_id.as_str(), e))
        .collect();
    trace
        .iter()
        .filter(|e| e.direction == Direction::Request)
        .map(|request| Pair {
            request,
            response: responses.get(request.correlation_id.as_str()).copied(),
        })
        .collect()
}

struct AgentTimes {
    total: f64,
    listing: f64,
    call: f64,
}

fn agent_times(
    run: usize,
    all: &[Pair<'_>],
    agent: &str,
    total: Component,
    listing: Component,
    call: Component,
) -> Result<AgentTimes, LatencyError> {
    let missing = |c: Component| LatencyError::MissingBoundary {
        run,
        component: c.boundary_name(),
    };
    let mut out = AgentTimes {
        total: 0.0,
        listing: 0.0,
        call: 0.0,
    };
    let delegations = all
        .iter()
        .filter(|p| p.request.operation == "message/send" && p.request.destination == agent);
    for d in delegations {
        let start = d.request.timestamp_ns;
        let end = d.response.ok_or_else(|| missing(total))?.timestamp_ns;
        out.total += d.seconds().unwrap_or_default();
        let inside = |p: &&Pair<'_>| {
            p.request.timestamp_ns >= start && p.request.timestamp_ns <= end
        };
        let sum = |op: &str, c: Component| -> Result<f64, LatencyError> {
            let mut found = false;
            let mut acc = 0.0;
            for p in all.iter().filter(inside).filter(|p| p.request.operation == op) {
                found = true;
                acc += p.seconds().ok_or_else(|| missing(c))?;
            }
            if found {
                Ok(acc)
            } else {
                Err(missing(c))
            }
        };
        out.listing += sum("tools/list", listing)?;
        out.call += sum("tools/call", call)?;
    }
    Ok(out)
}

/// Decomposes one run into its component intervals (seconds).
pub fn run_breakdown(run: usize, trace: &[TraceEvent]) -> Result<RunBreakdown, LatencyError> {
    let missing = |c: Component| LatencyError::MissingBoundary {
        run,
        component: c.boundary_name(),
    };
    let all = pairs(trace);
    let prompt = all
        .iter()
        .find(|p| p.request.label == "A1")
        .ok_or_else(|| missing(Component::EndToEnd))?;
    let end_to_end = prompt.seconds().ok_or_else(|| missing(Component::EndToEnd))?;
    let a1 = prompt.request.timestamp_ns;

    let first_delegation = all
        .iter()
        .filter(|p| p.request.operation == "message/send" && p.request.timestamp_ns >= a1)
        .filter(|p| p.request.correlation_id != prompt.request.correlation_id)
        .map(|p| p.request.timestamp_ns)
        .min()
        .ok_or_else(|| missing(Component::HostReasoning))?;
    let card_time: f64 = all
        .iter()
        .filter(|p| p.request.operation == "agent-card")
        .filter(|p| p.request.timestamp_ns >= a1)
        .filter(|p| p.response.is_some_and(|r| r.timestamp_ns <= first_delegation))
        .filter_map(|p| p.seconds())
        .sum();
    let host = (first_delegation - a1) as f64 * 1e-9 - card_time;

    let mon = agent_times(
        run,
        &all,
        MONITORING_AGENT,
        Component::MonitoringTotal,
        Component::MonitoringToolListing,
        Component::MonitoringToolCall,
    )?;
    let exe = agent_times(
        run,
        &all,
        EXECUTION_AGENT,
        Component::ExecutionTotal,
        Component::ExecutionToolListing,
        Component::ExecutionToolCall,
    )?;

    let mut b = RunBreakdown::new();
    b.insert(Component::HostReasoning, host);
    b.insert(Component::MonitoringTotal, mon.total);
    b.insert(Component::MonitoringToolListing, mon.listing);
    b.insert(Component::MonitoringToolCall, mon.call);
    b.insert(
        Component::MonitoringSelectionSynthesis,
        mon.total - mon.listing - mon.call,
    );
    b.insert(Component::ExecutionTotal, exe.total);
    b.insert(Component::ExecutionToolListing, exe.listing);
    b.insert(Component::ExecutionToolCall, exe.call);
    b.insert(
        Component::ExecutionSelectionSynthesis,
        exe.total - exe.listing - exe.call,
    );
    b.insert(
        Component::A2aAggregate,
        end_to_end - host - mon.total - exe.total,
    );
    b.insert(Component::EndToEnd, end_to_end);
    Ok(b)
}

pub fn latency_breakdown(traces: &[Vec<TraceEvent>]) -> Result<LatencyReport, LatencyError> {
    if traces.is_empty() {
        return Err(LatencyError::NoRuns);
    }
    let runs = traces
        .iter()
        .enumerate()
        .map(|(i, t)| run_breakdown(i, t))
        .collect::<Result<Vec<_>, _>>()?;
    let components = Component::ALL
        .into_iter()
        .map(|c| {
            let samples: Vec<f64> = runs.iter().map(|r| r[&c]).collect();
            (c, Stats::from_samples(&samples))
        })
        .collect();
    Ok(LatencyReport {
        run_count: runs.len(),
        components,
        runs,
    })
}
