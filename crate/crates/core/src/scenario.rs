//! Scripted scenarios: preconditions, a prompt, repetitions and the checks
//! each run must pass.
//!
//! ```toml
//! name = "amf-inspect-and-start"
//! prompt = "Check the operational status of the AMF and start it if it is inactive."
//! repetitions = 10
//! latency_profile = "fast"
//!
//! [[preconditions]]
//! nf_type = "AMF"
//! state = "stopped"
//!
//! [expect]
//! sequence = [{ label = "A1", interface = "A2A" }, { label = "A2", interface = "A2A" }]
//! final_states = { AMF = "running" }
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nf::{LifecycleAction, NfType, RunState};
use crate::profile::{LatencyProfile, ProfileError};
use crate::stack::Stack;
use crate::trace::{export_trace_table, latency_breakdown, render_table, Interface, LatencyReport, TraceEvent};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read scenario {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("unknown scenario {0:?} (not a file and not a built-in)")]
    Unknown(String),
    #[error("precondition failed: {0}")]
    PreconditionFailure(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesiredState {
    Running,
    Stopped,
}

impl DesiredState {
    fn matches(&self, s: RunState) -> bool {
        matches!(
            (self, s),
            (DesiredState::Running, RunState::Running) | (DesiredState::Stopped, RunState::Stopped)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Precondition {
    /// Kept as text so an unknown NF surfaces as a precondition failure.
    pub nf_type: String,
    pub state: DesiredState,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedRow {
    pub label: String,
    pub interface: Interface,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Expectations {
    /// Exact trace-table rows of every run, in order.
    pub sequence: Option<Vec<ExpectedRow>>,
    /// Labels that must not appear in any run.
    pub absent_labels: Vec<String>,
    pub final_states: BTreeMap<String, DesiredState>,
    /// The set of NRF registrations is the same before and after each run.
    pub registry_unchanged: bool,
    /// Upper bound on each run's end-to-end latency, seconds.
    pub max_end_to_end_s: Option<f64>,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub preconditions: Vec<Precondition>,
    pub prompt: String,
    #[serde(default = "one")]
    pub repetitions: u32,
    /// `fast`, `paper-calibrated` or a profile file; the stack's current
    /// profile when absent.
    #[serde(default)]
    pub latency_profile: Option<String>,
    #[serde(default)]
    pub expect: Expectations,
}

pub const REPRESENTATIVE_PROMPT: &str =
    "Check the operational status of the AMF and start it if it is inactive.";

fn rows(spec: &[(&str, Interface)]) -> Vec<ExpectedRow> {
    spec.iter()
        .map(|(label, interface)| ExpectedRow {
            label: (*label).into(),
            interface: *interface,
        })
        .collect()
}

/// The representative trace: inspection, then the conditional start.
pub fn inspect_and_start_sequence() -> Vec<ExpectedRow> {
    use Interface::*;
    rows(&[
        ("A1", A2A),
        ("A2", A2A),
        ("M1", MCP),
        ("M2", MCP),
        ("S1", SBI),
        ("M2'", MCP),
        ("A3", A2A),
        ("M3", MCP),
        ("M4", MCP),
        ("M4'", MCP),
    ])
}

impl ScenarioSpec {
    pub const BUILTINS: [&'static str; 3] = ["amf-inspect-and-start", "amf-already-running", "smf-restart"];

    pub fn builtin(name: &str) -> Option<Self> {
        use Interface::*;
        let pre = |nf: &str, state| Precondition {
            nf_type: nf.into(),
            state,
        };
        let finals = |nf: &str, state| BTreeMap::from([(nf.to_string(), state)]);
        match name {
            "amf-inspect-and-start" => Some(Self {
                name: name.into(),
                description: "AMF stopped beforehand; the agents detect it and start it".into(),
                preconditions: vec![pre("AMF", DesiredState::Stopped)],
                prompt: REPRESENTATIVE_PROMPT.into(),
                repetitions: 10,
                latency_profile: Some("fast".into()),
                expect: Expectations {
                    sequence: Some(inspect_and_start_sequence()),
                    final_states: finals("AMF", DesiredState::Running),
                    ..Default::default()
                },
            }),
            "amf-already-running" => Some(Self {
                name: name.into(),
                description: "AMF already running; the conditional start is skipped".into(),
                preconditions: vec![pre("AMF", DesiredState::Running)],
                prompt: REPRESENTATIVE_PROMPT.into(),
                repetitions: 1,
                latency_profile: Some("fast".into()),
                expect: Expectations {
                    sequence: Some(rows(&[
                        ("A1", A2A),
                        ("A2", A2A),
                        ("M1", MCP),
                        ("M2", MCP),
                        ("S1", SBI),
                        ("M2'", MCP),
                    ])),
                    absent_labels: vec!["A3".into(), "M3".into(), "M4".into()],
                    final_states: finals("AMF", DesiredState::Running),
                    registry_unchanged: true,
                    ..Default::default()
                },
            }),
            "smf-restart" => Some(Self {
                name: name.into(),
                description: "Unconditional restart of a running SMF".into(),
                preconditions: vec![pre("SMF", DesiredState::Running)],
                prompt: "Restart the SMF.".into(),
                repetitions: 1,
                latency_profile: Some("fast".into()),
                expect: Expectations {
                    sequence: Some(rows(&[("A1", A2A), ("A2", A2A), ("M1", MCP), ("M2", MCP), ("M2'", MCP)])),
                    final_states: finals("SMF", DesiredState::Running),
                    ..Default::default()
                },
            }),
            _ => None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let spec: Self = toml::from_str(text).map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    /// A built-in name or the path of a TOML scenario file.
    pub fn resolve(name_or_path: &str) -> Result<Self, ScenarioError> {
        let path = Path::new(name_or_path);
        if path.is_file() {
            let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
                path: name_or_path.into(),
                source,
            })?;
            return Self::from_toml(&text);
        }
        Self::builtin(name_or_path).ok_or_else(|| ScenarioError::Unknown(name_or_path.into()))
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.repetitions < 1 {
            return Err(ScenarioError::Invalid("repetitions must be at least 1".into()));
        }
        if self.prompt.trim().is_empty() {
            return Err(ScenarioError::Invalid("prompt is empty".into()));
        }
        if self.name.trim().is_empty() {
            return Err(ScenarioError::Invalid("name is empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Assertion {
    fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunRecord {
    pub index: u32,
    pub text: Option<String>,
    pub error: Option<String>,
    pub elapsed_s: f64,
    pub final_states: BTreeMap<NfType, RunState>,
    pub registry_before: Vec<String>,
    pub registry_after: Vec<String>,
    pub assertions: Vec<Assertion>,
    pub trace: Vec<TraceEvent>,
}

impl RunRecord {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.assertions.iter().all(|a| a.passed)
    }

    /// Labels of the trace-table rows, in order.
    pub fn labels(&self) -> Vec<String> {
        export_trace_table(&self.trace, None).into_iter().map(|r| r.label).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScenarioOutcome {
    pub scenario: String,
    pub latency_profile: String,
    pub runs: Vec<RunRecord>,
    pub report: Option<LatencyReport>,
    /// Why no report could be computed.
    pub report_error: Option<String>,
    pub wall_time_s: f64,
}

impl ScenarioOutcome {
    pub fn passed(&self) -> bool {
        !self.runs.is_empty() && self.runs.iter().all(RunRecord::passed)
    }

    pub fn traces(&self) -> Vec<Vec<TraceEvent>> {
        self.runs.iter().map(|r| r.trace.clone()).collect()
    }

    pub fn summary(&self) -> String {
        let passed = self.runs.iter().filter(|r| r.passed()).count();
        let mut out = format!(
            "scenario {} ({} profile): {passed}/{} runs passed in {:.2} s\n",
            self.scenario,
            self.latency_profile,
            self.runs.len(),
            self.wall_time_s
        );
        for run in &self.runs {
            let status = if run.passed() { "ok" } else { "FAILED" };
            out.push_str(&format!("  run {:>2}: {status} ({:.3} s)", run.index, run.elapsed_s));
            if let Some(e) = &run.error {
                out.push_str(&format!(" error: {e}"));
            }
            out.push('\n');
            for a in run.assertions.iter().filter(|a| !a.passed) {
                out.push_str(&format!("          {}: {}\n", a.name, a.detail));
            }
        }
        if let Some(e) = &self.report_error {
            out.push_str(&format!("  no latency report: {e}\n"));
        }
        out
    }

    /// Writes `trace.jsonl`, `trace.txt`, `latency.json`, `latency.txt` and
    /// `outcome.json` into `dir`.
    pub fn write_results(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut jsonl = String::new();
        let mut table = String::new();
        for run in &self.runs {
            for ev in &run.trace {
                jsonl.push_str(&serde_json::to_string(ev).map_err(std::io::Error::other)?);
                jsonl.push('\n');
            }
            table.push_str(&format!("# run {}\n", run.index));
            table.push_str(&render_table(&export_trace_table(&run.trace, None)));
            table.push('\n');
        }
        std::fs::write(dir.join("trace.jsonl"), jsonl)?;
        std::fs::write(dir.join("trace.txt"), table)?;
        match &self.report {
            Some(r) => {
                std::fs::write(
                    dir.join("latency.json"),
                    serde_json::to_string_pretty(r).map_err(std::io::Error::other)?,
                )?;
                std::fs::write(dir.join("latency.txt"), r.render())?;
            }
            None => {
                let _ = std::fs::remove_file(dir.join("latency.json"));
                let _ = std::fs::remove_file(dir.join("latency.txt"));
            }
        }
        std::fs::write(
            dir.join("outcome.json"),
            serde_json::to_string_pretty(self).map_err(std::io::Error::other)?,
        )?;
        Ok(())
    }
}

struct Resolved {
    nf: NfType,
    state: DesiredState,
}

fn resolve_nf(stack: &Stack, name: &str) -> Result<NfType, ScenarioError> {
    let nf: NfType = name
        .parse()
        .map_err(|_| ScenarioError::PreconditionFailure(format!("unknown NF type {name:?}")))?;
    if !stack.runtime().is_deployed(nf) {
        return Err(ScenarioError::PreconditionFailure(format!("{nf} is not deployed")));
    }
    Ok(nf)
}

async fn apply_preconditions(stack: &Stack, pre: &[Resolved]) -> Result<(), ScenarioError> {
    for p in pre {
        let action = match p.state {
            DesiredState::Running => LifecycleAction::Start,
            DesiredState::Stopped => LifecycleAction::Stop,
        };
        let out = stack
            .runtime()
            .lifecycle(p.nf, action)
            .await
            .map_err(|e| ScenarioError::PreconditionFailure(format!("{} {}: {e}", action, p.nf)))?;
        if !p.state.matches(out.state.state) {
            return Err(ScenarioError::PreconditionFailure(format!(
                "{} is {} instead of {:?}",
                p.nf, out.state.state, p.state
            )));
        }
    }
    Ok(())
}

fn registrations(stack: &Stack) -> Vec<String> {
    let mut ids: Vec<String> = stack
        .runtime()
        .registry()
        .all()
        .into_iter()
        .map(|p| format!("{}:{}", p.nf_type, p.nf_instance_id))
        .collect();
    ids.sort();
    ids
}

fn check_run(expect: &Expectations, run: &RunRecord, finals: &BTreeMap<NfType, DesiredState>) -> Vec<Assertion> {
    let mut out = vec![Assertion::check(
        "task completed",
        run.error.is_none(),
        run.error.clone().unwrap_or_default(),
    )];
    let table = export_trace_table(&run.trace, None);
    if let Some(seq) = &expect.sequence {
        let got: Vec<(String, Interface)> = table.iter().map(|r| (r.label.clone(), r.interface)).collect();
        let want: Vec<(String, Interface)> = seq.iter().map(|r| (r.label.clone(), r.interface)).collect();
        let show = |v: &[(String, Interface)]| {
            v.iter().map(|(l, i)| format!("{l}/{i}")).collect::<Vec<_>>().join(" ")
        };
        out.push(Assertion::check(
            "trace sequence",
            got == want,
            format!("expected [{}], got [{}]", show(&want), show(&got)),
        ));
    }
    if !expect.absent_labels.is_empty() {
        let present: Vec<&str> = run
            .trace
            .iter()
            .map(|e| e.label.as_str())
            .filter(|l| expect.absent_labels.iter().any(|a| a == l))
            .collect();
        out.push(Assertion::check(
            "absent labels",
            present.is_empty(),
            format!("unexpected {present:?}"),
        ));
    }
    for (nf, want) in finals {
        let got = run.final_states.get(nf).copied();
        out.push(Assertion::check(
            format!("final state {nf}"),
            got.is_some_and(|s| want.matches(s)),
            format!("expected {want:?}, got {got:?}"),
        ));
    }
    if expect.registry_unchanged {
        out.push(Assertion::check(
            "registry unchanged",
            run.registry_before == run.registry_after,
            format!("before {:?}, after {:?}", run.registry_before, run.registry_after),
        ));
    }
    if let Some(max) = expect.max_end_to_end_s {
        let e2e = crate::trace::latency::run_breakdown(run.index as usize, &run.trace)
            .ok()
            .and_then(|b| b.get(&crate::trace::Component::EndToEnd).copied());
        out.push(Assertion::check(
            "end-to-end bound",
            e2e.is_some_and(|v| v < max),
            format!("end-to-end {e2e:?} s, bound {max} s"),
        ));
    }
    out
}

/// Runs `spec` against a live stack. Preconditions are re-applied before
/// every repetition; a failing repetition is recorded and the rest still run.
/// The stack's latency profile is restored afterwards.
pub async fn run_scenario(stack: &Arc<Stack>, spec: &ScenarioSpec) -> Result<ScenarioOutcome, ScenarioError> {
    spec.validate()?;
    let pre = spec
        .preconditions
        .iter()
        .map(|p| {
            Ok(Resolved {
                nf: resolve_nf(stack, &p.nf_type)?,
                state: p.state,
            })
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;
    let finals = spec
        .expect
        .final_states
        .iter()
        .map(|(nf, s)| Ok((resolve_nf(stack, nf)?, *s)))
        .collect::<Result<BTreeMap<_, _>, ScenarioError>>()?;

    let previous = stack.profile();
    let profile = match &spec.latency_profile {
        Some(p) => LatencyProfile::select(p)?,
        None => previous.clone(),
    };
    stack.apply_profile(&profile);
    let started = std::time::Instant::now();
    let result = async {
        let mut runs = Vec::new();
        for index in 1..=spec.repetitions {
            apply_preconditions(stack, &pre).await?;
            let registry_before = registrations(stack);
            let outcome = stack.prompt(&spec.prompt).await;
            let final_states = stack
                .nf_states()
                .into_iter()
                .map(|s| (s.nf_type, s.state))
                .collect();
            let mut run = RunRecord {
                index,
                text: outcome.text,
                error: outcome.error,
                elapsed_s: outcome.elapsed_s,
                final_states,
                registry_before,
                registry_after: registrations(stack),
                assertions: Vec::new(),
                trace: outcome.events,
            };
            run.assertions = check_run(&spec.expect, &run, &finals);
            runs.push(run);
        }
        Ok::<_, ScenarioError>(runs)
    }
    .await;
    stack.apply_profile(&previous);
    let runs = result?;

    let completed: Vec<Vec<TraceEvent>> = runs
        .iter()
        .filter(|r| r.error.is_none())
        .map(|r| r.trace.clone())
        .collect();
    let (report, report_error) = match latency_breakdown(&completed) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    if let Some(r) = &report {
        stack.set_latest_report(r.clone());
    }
    Ok(ScenarioOutcome {
        scenario: spec.name.clone(),
        latency_profile: profile.name,
        runs,
        report,
        report_error,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}
