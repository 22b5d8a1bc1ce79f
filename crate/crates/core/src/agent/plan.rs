//! Plans and the deterministic intent grammar.
//!
//! A prompt is split into clauses at `,` `;` sentence ends and the words
//! "and"/"then". Within a clause:
//!
//! | words (case-insensitive)                         | step              |
//! |--------------------------------------------------|-------------------|
//! | `scale` … `<n>`                                  | `Scale`           |
//! | `set`/`update`/`configure` … `<key> to <value>`  | `UpdateConfig`    |
//! | `services`/`service`                             | `ListServices`    |
//! | `profile`                                        | `GetProfile`      |
//! | `restart`/`reboot`                               | `Control(restart)`|
//! | `start`/`launch`/`boot`                          | `Control(start)`  |
//! | `stop`/`halt`/`shutdown`                         | `Control(stop)`   |
//! | `check`/`inspect`/`status`/`verify`/`monitor`    | `Inspect`         |
//!
//! The first row that matches wins. NF names are matched case-insensitively
//! against the deployed set; a clause without one refers to the last NF
//! mentioned (so "start it" works), and a clause with an NF but no verb
//! repeats the previous clause's verb ("restart the AMF and the SMF").
//! `if … inactive`/`not …`/`down`/`stopped` and `if … active`/`running`/`up`
//! wrap the clause's step in a conditional; a conditional whose NF has not
//! been inspected earlier in the plan gets an implicit inspection first.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nf::{LifecycleAction, NfType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    IfInactive,
    IfActive,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanStep {
    Inspect {
        nf_type: NfType,
    },
    ListServices {
        nf_type: NfType,
    },
    GetProfile {
        nf_type: NfType,
    },
    Control {
        nf_type: NfType,
        action: LifecycleAction,
    },
    UpdateConfig {
        nf_type: NfType,
        key: String,
        value: String,
    },
    Scale {
        nf_type: NfType,
        replicas: u64,
    },
    Conditional {
        predicate: Predicate,
        inner: Box<PlanStep>,
    },
}

/// Which sub-agent carries out a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Capability {
    Monitoring,
    Execution,
}

impl PlanStep {
    pub fn inspect(nf_type: NfType) -> Self {
        PlanStep::Inspect { nf_type }
    }

    pub fn control(nf_type: NfType, action: LifecycleAction) -> Self {
        PlanStep::Control { nf_type, action }
    }

    pub fn conditional(predicate: Predicate, inner: PlanStep) -> Self {
        PlanStep::Conditional {
            predicate,
            inner: Box::new(inner),
        }
    }

    pub fn nf_type(&self) -> NfType {
        match self {
            PlanStep::Inspect { nf_type }
            | PlanStep::ListServices { nf_type }
            | PlanStep::GetProfile { nf_type }
            | PlanStep::Control { nf_type, .. }
            | PlanStep::UpdateConfig { nf_type, .. }
            | PlanStep::Scale { nf_type, .. } => *nf_type,
            PlanStep::Conditional { inner, .. } => inner.nf_type(),
        }
    }

    pub fn capability(&self) -> Capability {
        match self {
            PlanStep::Inspect { .. } | PlanStep::ListServices { .. } | PlanStep::GetProfile { .. } => {
                Capability::Monitoring
            }
            PlanStep::Control { .. } | PlanStep::UpdateConfig { .. } | PlanStep::Scale { .. } => {
                Capability::Execution
            }
            PlanStep::Conditional { inner, .. } => inner.capability(),
        }
    }

    /// An imperative sentence the grammar parses back into exactly this step.
    pub fn directive(&self) -> String {
        match self {
            PlanStep::Inspect { nf_type } => format!("Check the status of the {nf_type}."),
            PlanStep::ListServices { nf_type } => format!("List the services of the {nf_type}."),
            PlanStep::GetProfile { nf_type } => format!("Get the profile of the {nf_type}."),
            PlanStep::Control { nf_type, action } => {
                let verb = action.as_str();
                let mut cap = verb[..1].to_uppercase();
                cap.push_str(&verb[1..]);
                format!("{cap} the {nf_type}.")
            }
            PlanStep::UpdateConfig { nf_type, key, value } => {
                format!("Set {key} to {value} on the {nf_type}.")
            }
            PlanStep::Scale { nf_type, replicas } => format!("Scale the {nf_type} to {replicas} replicas."),
            PlanStep::Conditional { predicate, inner } => {
                let body = inner.directive();
                let body = body.trim_end_matches('.');
                let cond = match predicate {
                    Predicate::IfInactive => "inactive",
                    Predicate::IfActive => "active",
                };
                format!("{body} if it is {cond}.")
            }
        }
    }
}

impl fmt::Display for PlanStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlanStep::Inspect { nf_type } => write!(f, "Inspect({nf_type})"),
            PlanStep::ListServices { nf_type } => write!(f, "ListServices({nf_type})"),
            PlanStep::GetProfile { nf_type } => write!(f, "GetProfile({nf_type})"),
            PlanStep::Control { nf_type, action } => write!(f, "Control({nf_type}, {action})"),
            PlanStep::UpdateConfig { nf_type, key, value } => {
                write!(f, "UpdateConfig({nf_type}, {key}={value})")
            }
            PlanStep::Scale { nf_type, replicas } => write!(f, "Scale({nf_type}, {replicas})"),
            PlanStep::Conditional { predicate, inner } => {
                let p = match predicate {
                    Predicate::IfInactive => "if_inactive",
                    Predicate::IfActive => "if_active",
                };
                write!(f, "Conditional({p}, {inner})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<PlanStep>,
}

impl Plan {
    /// Steps a given sub-agent would carry out unconditionally.
    pub fn steps_for(&self, capability: Capability) -> Vec<PlanStep> {
        self.steps
            .iter()
            .filter(|s| !matches!(s, PlanStep::Conditional { .. }) && s.capability() == capability)
            .cloned()
            .collect()
    }

    /// Non-empty, every NF deployed, and every conditional preceded by an
    /// inspection of its NF.
    pub fn validate(&self, deployed: &[NfType]) -> Result<(), IntentError> {
        if self.steps.is_empty() {
            return Err(IntentError::UnrecognizedIntent("plan has no steps".into()));
        }
        for (i, s) in self.steps.iter().enumerate() {
            if !deployed.contains(&s.nf_type()) {
                return Err(IntentError::UnknownNf(s.nf_type().to_string()));
            }
            if let PlanStep::Conditional { inner, .. } = s {
                if matches!(**inner, PlanStep::Conditional { .. }) {
                    return Err(IntentError::UnrecognizedIntent("nested conditional".into()));
                }
                let inspected = self.steps[..i]
                    .iter()
                    .any(|p| *p == PlanStep::inspect(s.nf_type()));
                if !inspected {
                    return Err(IntentError::UnrecognizedIntent(format!(
                        "conditional on {} has no preceding inspection",
                        s.nf_type()
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.steps.iter().map(|s| s.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IntentError {
    #[error("empty intent")]
    EmptyIntent,
    #[error("unrecognized intent: {0}")]
    UnrecognizedIntent(String),
    #[error("unknown network function {0}")]
    UnknownNf(String),
}

fn split_clauses(prompt: &str) -> Vec<String> {
    let chars: Vec<char> = prompt.chars().collect();
    let mut pieces = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let sentence_end = matches!(c, '.' | '!' | '?')
            && chars.get(i + 1).is_none_or(|n| n.is_whitespace());
        if matches!(c, ',' | ';') || sentence_end {
            pieces.push(std::mem::take(&mut cur));
        } else {
            cur.push(c);
        }
    }
    pieces.push(cur);
    let mut clauses = Vec::new();
    for piece in pieces {
        let mut words = Vec::new();
        for w in piece.split_whitespace() {
            if matches!(w.to_ascii_lowercase().as_str(), "and" | "then") {
                clauses.push(words.join(" "));
                words.clear();
            } else {
                words.push(w);
            }
        }
        clauses.push(words.join(" "));
    }
    clauses.into_iter().filter(|c| !c.trim().is_empty()).collect()
}

fn clean(word: &str) -> &str {
    let w = word.trim_matches(|c: char| !(c.is_alphanumeric() || matches!(c, '_' | '-' | '=' | '.')));
    let w = w.trim_end_matches('.');
    w.strip_suffix("'s").unwrap_or(w)
}

const FILLER: [&str; 14] = [
    "the", "of", "on", "for", "in", "config", "configuration", "key", "set", "update", "configure",
    "nf", "a", "its",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Verb {
    Scale,
    Config,
    Services,
    Profile,
    Control(LifecycleAction),
    Inspect,
}

fn verb_of(word: &str) -> Option<Verb> {
    Some(match word {
        "scale" => Verb::Scale,
        "set" | "update" | "configure" => Verb::Config,
        "services" | "service" => Verb::Services,
        "profile" => Verb::Profile,
        "restart" | "reboot" => Verb::Control(LifecycleAction::Restart),
        "start" | "launch" | "boot" => Verb::Control(LifecycleAction::Start),
        "stop" | "halt" | "shutdown" => Verb::Control(LifecycleAction::Stop),
        "check" | "inspect" | "status" | "verify" | "monitor" => Verb::Inspect,
        _ => return None,
    })
}

fn rank(v: Verb) -> u8 {
    match v {
        Verb::Scale => 0,
        Verb::Config => 1,
        Verb::Services => 2,
        Verb::Profile => 3,
        Verb::Control(_) => 4,
        Verb::Inspect => 5,
    }
}

fn predicate_of(words: &[String]) -> Option<Predicate> {
    let has = |set: &[&str]| words.iter().any(|w| set.contains(&w.as_str()));
    if has(&INACTIVE_WORDS) {
        Some(Predicate::IfInactive)
    } else if has(&ACTIVE_WORDS) {
        Some(Predicate::IfActive)
    } else {
        None
    }
}

const INACTIVE_WORDS: [&str; 7] = ["not", "inactive", "down", "stopped", "offline", "unregistered", "isn't"];
const ACTIVE_WORDS: [&str; 5] = ["active", "running", "up", "online", "registered"];
const CONNECTIVES: [&str; 8] = ["and", "then", "if", "when", "it", "is", "to", "all"];

/// Words the grammar itself understands; never taken for an NF name even
/// when shouted.
fn is_vocabulary(word: &str) -> bool {
    verb_of(word).is_some()
        || FILLER.contains(&word)
        || INACTIVE_WORDS.contains(&word)
        || ACTIVE_WORDS.contains(&word)
        || CONNECTIVES.contains(&word)
}

/// NF mentions in `words` (original case), in order.
fn nf_mentions(words: &[&str], deployed: &[NfType]) -> Result<Vec<NfType>, IntentError> {
    let mut out = Vec::new();
    for w in words {
        let w = clean(w);
        match w.parse::<NfType>() {
            Ok(t) if deployed.contains(&t) => {
                if !out.contains(&t) {
                    out.push(t)
                }
            }
            Ok(_) => return Err(IntentError::UnknownNf(w.to_ascii_uppercase())),
            Err(_) => {
                let acronym = (3..=5).contains(&w.len()) && w.chars().all(|c| c.is_ascii_uppercase());
                if acronym && !is_vocabulary(&w.to_ascii_lowercase()) {
                    return Err(IntentError::UnknownNf(w.to_string()));
                }
            }
        }
    }
    Ok(out)
}

fn build_step(verb: Verb, nf: NfType, lower: &[String], clause: &str) -> Result<PlanStep, IntentError> {
    Ok(match verb {
        Verb::Inspect => PlanStep::Inspect { nf_type: nf },
        Verb::Services => PlanStep::ListServices { nf_type: nf },
        Verb::Profile => PlanStep::GetProfile { nf_type: nf },
        Verb::Control(action) => PlanStep::Control { nf_type: nf, action },
        Verb::Scale => {
            let replicas = lower
                .iter()
                .find_map(|w| w.parse::<u64>().ok())
                .ok_or_else(|| IntentError::UnrecognizedIntent(format!("no replica count in {clause:?}")))?;
            PlanStep::Scale { nf_type: nf, replicas }
        }
        Verb::Config => {
            let nf_name = nf.as_str().to_ascii_lowercase();
            let (key, value) = if let Some(kv) = lower.iter().find(|w| w.contains('=')) {
                let (k, v) = kv.split_once('=').unwrap_or_default();
                (k.to_string(), v.to_string())
            } else {
                let to = lower
                    .iter()
                    .position(|w| w == "to")
                    .ok_or_else(|| IntentError::UnrecognizedIntent(format!("no `<key> to <value>` in {clause:?}")))?;
                let key = lower[..to]
                    .iter()
                    .rev()
                    .find(|w| !FILLER.contains(&w.as_str()) && **w != nf_name)
                    .cloned()
                    .unwrap_or_default();
                let value = lower.get(to + 1).cloned().unwrap_or_default();
                (key, value)
            };
            if key.is_empty() || value.is_empty() {
                return Err(IntentError::UnrecognizedIntent(format!("incomplete setting in {clause:?}")));
            }
            PlanStep::UpdateConfig {
                nf_type: nf,
                key,
                value,
            }
        }
    })
}

/// Deterministic planner: a pure function of the prompt and deployed NF set.
pub fn interpret_intent(prompt: &str, deployed: &[NfType]) -> Result<Plan, IntentError> {
    if prompt.trim().is_empty() {
        return Err(IntentError::EmptyIntent);
    }
    let mut steps: Vec<PlanStep> = Vec::new();
    let mut last_nf: Option<NfType> = None;
    let mut last_verb: Option<Verb> = None;
    let mut pending: Option<(Predicate, Vec<NfType>)> = None;

    for clause in split_clauses(prompt) {
        let words: Vec<&str> = clause.split_whitespace().collect();
        let cond_at = words
            .iter()
            .position(|w| matches!(clean(w).to_ascii_lowercase().as_str(), "if" | "when"));
        let (action, condition) = match cond_at {
            Some(i) => (&words[..i], &words[i + 1..]),
            None => (&words[..], &words[..0]),
        };
        let lower: Vec<String> = action.iter().map(|w| clean(w).to_ascii_lowercase()).collect();
        let cond_lower: Vec<String> = condition.iter().map(|w| clean(w).to_ascii_lowercase()).collect();

        let cond_nfs = nf_mentions(condition, deployed)?;
        let mut predicate = None;
        if cond_at.is_some() {
            predicate = Some(predicate_of(&cond_lower).ok_or_else(|| {
                IntentError::UnrecognizedIntent(format!("cannot tell the condition in {clause:?}"))
            })?);
        }

        let nfs = nf_mentions(action, deployed)?;
        let verb = lower
            .iter()
            .filter_map(|w| verb_of(w))
            .min_by_key(|v| rank(*v));

        // A bare condition ("if the AMF is down") applies to the next clause.
        if verb.is_none() && nfs.is_empty() {
            if let Some(p) = predicate {
                if let Some(&nf) = cond_nfs.first() {
                    last_nf = Some(nf);
                }
                pending = Some((p, cond_nfs));
            }
            continue;
        }
        let verb = verb.or(last_verb).ok_or_else(|| {
            IntentError::UnrecognizedIntent(format!("no action recognised in {clause:?}"))
        })?;
        let targets = if !nfs.is_empty() {
            nfs
        } else if let Some(&nf) = cond_nfs.first() {
            vec![nf]
        } else {
            match last_nf {
                Some(nf) => vec![nf],
                None => {
                    return Err(IntentError::UnrecognizedIntent(format!(
                        "no network function named in {clause:?}"
                    )))
                }
            }
        };
        let (predicate, cond_nfs) = match predicate {
            Some(p) => (Some(p), cond_nfs),
            None => match pending.take() {
                Some((p, n)) => (Some(p), n),
                None => (None, Vec::new()),
            },
        };
        for nf in &targets {
            if cond_nfs.iter().any(|c| c != nf) {
                return Err(IntentError::UnrecognizedIntent(format!(
                    "a condition must refer to the network function it acts on ({clause:?})"
                )));
            }
            let step = build_step(verb, *nf, &lower, &clause)?;
            match predicate {
                Some(p) => {
                    if !steps.contains(&PlanStep::inspect(*nf)) {
                        steps.push(PlanStep::inspect(*nf));
                    }
                    steps.push(PlanStep::conditional(p, step));
                }
                None => steps.push(step),
            }
        }
        last_nf = targets.last().copied();
        last_verb = Some(verb);
    }
    if steps.is_empty() {
        return Err(IntentError::UnrecognizedIntent(prompt.trim().to_string()));
    }
    let plan = Plan { steps };
    plan.validate(deployed)?;
    Ok(plan)
}
