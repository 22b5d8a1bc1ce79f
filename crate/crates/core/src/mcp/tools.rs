//! The six NF tools and what each one does behind `tools/call`.
//!
//! Monitoring tools only talk to the NRF over the SBI; execution tools only
//! drive the lifecycle runtime.

use std::sync::Arc;

use serde_json::{json, Map, Value};

use super::schema::{ObjectSchema, PropertySchema, ToolDescriptor, ToolResult};
use crate::delay::Delay;
use crate::nf::{LifecycleAction, LifecycleOutcome, NfRuntime, NfType, RunState, SbiClient};

pub const CHECK_NF_STATUS: &str = "check_nf_status";
pub const LIST_NF_SERVICES: &str = "list_nf_services";
pub const GET_NF_PROFILE: &str = "get_nf_profile";
pub const CONTROL_NF: &str = "control_nf";
pub const UPDATE_NF_CONFIG: &str = "update_nf_config";
pub const SCALE_NF: &str = "scale_nf";

/// Status strings returned by `check_nf_status`.
pub fn status_active(nf: &str) -> String {
    format!("{nf} is active (registered in the NRF)")
}

pub fn status_inactive(nf: &str) -> String {
    format!("{nf} is not active or not registered in the NRF")
}

fn nf_type_prop() -> PropertySchema {
    PropertySchema::string().describe("Network function type, e.g. AMF")
}

fn result_only() -> ObjectSchema {
    ObjectSchema::new().required("result", PropertySchema::string())
}

fn run_state_prop() -> PropertySchema {
    PropertySchema::string().one_of(["Stopped", "Starting", "Running", "Stopping"])
}

pub fn monitoring_catalog() -> Vec<ToolDescriptor> {
    vec![
        ToolDescriptor {
            name: CHECK_NF_STATUS.into(),
            description:
                "Checks whether a core network function is currently active (registered in the NRF)"
                    .into(),
            input_schema: ObjectSchema::new().required("nf_type", PropertySchema::string()),
            output_schema: result_only(),
        },
        ToolDescriptor {
            name: LIST_NF_SERVICES.into(),
            description: "Lists the services (name and API version) a registered network function exposes"
                .into(),
            input_schema: ObjectSchema::new().required("nf_type", nf_type_prop()),
            output_schema: result_only().required("count", PropertySchema::integer().min(0)),
        },
        ToolDescriptor {
            name: GET_NF_PROFILE.into(),
            description: "Returns the NRF profile of a registered network function".into(),
            input_schema: ObjectSchema::new().required("nf_type", nf_type_prop()),
            output_schema: result_only()
                .optional("nfInstanceId", PropertySchema::string())
                .optional("nfType", PropertySchema::string())
                .optional(
                    "nfStatus",
                    PropertySchema::string().one_of(["REGISTERED", "SUSPENDED"]),
                )
                .optional("ipv4Address", PropertySchema::string())
                .optional("services", PropertySchema::string())
                .optional("instances", PropertySchema::integer().min(0)),
        },
    ]
}

pub fn execution_catalog() -> Vec<ToolDescriptor> {
    vec![
        ToolDescriptor {
            name: CONTROL_NF.into(),
            description: "Starts, stops or restarts a core network function".into(),
            input_schema: ObjectSchema::new().required("nf_type", nf_type_prop()).required(
                "action",
                PropertySchema::string()
                    .one_of(["start", "stop", "restart"])
                    .describe("Lifecycle action"),
            ),
            output_schema: result_only()
                .required("state", run_state_prop())
                .required("already", PropertySchema::boolean())
                .required("replicas", PropertySchema::integer().min(0)),
        },
        ToolDescriptor {
            name: UPDATE_NF_CONFIG.into(),
            description: "Sets a configuration key of a core network function".into(),
            input_schema: ObjectSchema::new()
                .required("nf_type", nf_type_prop())
                .required("key", PropertySchema::string())
                .required("value", PropertySchema::string()),
            output_schema: result_only()
                .required("key", PropertySchema::string())
                .required("old_value", PropertySchema::string())
                .required("new_value", PropertySchema::string()),
        },
        ToolDescriptor {
            name: SCALE_NF.into(),
            description: "Scales a core network function to the given number of instances".into(),
            input_schema: ObjectSchema::new()
                .required("nf_type", nf_type_prop())
                .required("replicas", PropertySchema::integer().min(0)),
            output_schema: result_only()
                .required("replicas", PropertySchema::integer().min(0))
                .required("state", run_state_prop()),
        },
    ]
}

/// Which of the two tool servers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ServerKind {
    Monitoring,
    Execution,
}

impl ServerKind {
    pub fn catalog(&self) -> Vec<ToolDescriptor> {
        match self {
            ServerKind::Monitoring => monitoring_catalog(),
            ServerKind::Execution => execution_catalog(),
        }
    }
}

/// What a tool server executes against.
#[derive(Clone)]
pub enum ToolBackend {
    Sbi(SbiClient),
    Runtime(Arc<NfRuntime>),
}

/// Outcome of one tool execution plus a short note for the trace log.
pub struct Executed {
    pub result: ToolResult,
    pub note: String,
}

pub struct ToolExecutor {
    backend: ToolBackend,
    /// Extra processing time added to every tool call.
    overhead: Delay,
}

fn obj(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn canonical(nf: &str) -> String {
    nf.parse::<NfType>()
        .map(|t| t.to_string())
        .unwrap_or_else(|_| nf.to_string())
}

impl ToolExecutor {
    pub fn new(backend: ToolBackend) -> Self {
        Self {
            backend,
            overhead: Delay::default(),
        }
    }

    pub fn overhead(&self) -> &Delay {
        &self.overhead
    }

    fn sbi(&self) -> Option<&SbiClient> {
        match &self.backend {
            ToolBackend::Sbi(c) => Some(c),
            ToolBackend::Runtime(_) => None,
        }
    }

    fn runtime(&self) -> Option<&Arc<NfRuntime>> {
        match &self.backend {
            ToolBackend::Runtime(r) => Some(r),
            ToolBackend::Sbi(_) => None,
        }
    }

    /// Runs an already-validated call.
    pub async fn execute(&self, tool: &str, args: &Map<String, Value>) -> Executed {
        self.overhead.wait().await;
        let nf = args.get("nf_type").and_then(Value::as_str).unwrap_or_default();
        let nf = canonical(nf);
        let outcome = match tool {
            CHECK_NF_STATUS => self.check_status(&nf).await,
            LIST_NF_SERVICES => self.list_services(&nf).await,
            GET_NF_PROFILE => self.profile(&nf).await,
            CONTROL_NF => {
                let action = args.get("action").and_then(Value::as_str).unwrap_or_default();
                self.control(&nf, action).await
            }
            UPDATE_NF_CONFIG => {
                let key = args.get("key").and_then(Value::as_str).unwrap_or_default();
                let value = args.get("value").and_then(Value::as_str).unwrap_or_default();
                self.update_config(&nf, key, value).await
            }
            SCALE_NF => {
                let n = args.get("replicas").and_then(Value::as_u64).unwrap_or_default();
                self.scale(&nf, n).await
            }
            other => Err(format!("tool {other} has no implementation on this server")),
        };
        match outcome {
            Ok(e) => e,
            Err(diagnostic) => Executed {
                note: format!("Return {tool} failure"),
                result: ToolResult::error(diagnostic),
            },
        }
    }

    async fn check_status(&self, nf: &str) -> Result<Executed, String> {
        let sbi = self.sbi().ok_or("no SBI backend")?;
        let resp = sbi.discover(nf).await.map_err(|e| e.to_string())?;
        let active = !resp.document.links.item.is_empty();
        let (text, word) = if active {
            (status_active(nf), "active")
        } else {
            (status_inactive(nf), "inactive")
        };
        Ok(Executed {
            result: ToolResult::ok(obj(json!({ "result": text }))),
            note: format!("Return inspection result ({nf} {word})"),
        })
    }

    async fn list_services(&self, nf: &str) -> Result<Executed, String> {
        let sbi = self.sbi().ok_or("no SBI backend")?;
        let resp = sbi.discover(nf).await.map_err(|e| e.to_string())?;
        let Some(first) = resp.document.links.item.first() else {
            return Ok(Executed {
                result: ToolResult::ok(obj(json!({ "result": status_inactive(nf), "count": 0 }))),
                note: format!("Return service list ({nf} inactive)"),
            });
        };
        let profile = sbi.profile(&first.href).await.map_err(|e| e.to_string())?;
        let services: Vec<String> = profile
            .services
            .iter()
            .map(|s| format!("{} ({})", s.service_name, s.api_version))
            .collect();
        let text = if services.is_empty() {
            format!("{nf} exposes no SBI services")
        } else {
            format!("{nf} services: {}", services.join(", "))
        };
        Ok(Executed {
            result: ToolResult::ok(obj(json!({ "result": text, "count": services.len() }))),
            note: format!("Return service list ({nf})"),
        })
    }

    async fn profile(&self, nf: &str) -> Result<Executed, String> {
        let sbi = self.sbi().ok_or("no SBI backend")?;
        let resp = sbi.discover(nf).await.map_err(|e| e.to_string())?;
        let items = &resp.document.links.item;
        let Some(first) = items.first() else {
            return Ok(Executed {
                result: ToolResult::ok(obj(json!({ "result": status_inactive(nf) }))),
                note: format!("Return NF profile ({nf} inactive)"),
            });
        };
        let p = sbi.profile(&first.href).await.map_err(|e| e.to_string())?;
        let services: Vec<String> = p
            .services
            .iter()
            .map(|s| format!("{}/{}", s.service_name, s.api_version))
            .collect();
        let status = serde_json::to_value(p.nf_status).unwrap_or_default();
        let text = format!(
            "{nf} instance {} at {} ({})",
            p.nf_instance_id,
            p.ipv4_address,
            status.as_str().unwrap_or_default()
        );
        Ok(Executed {
            result: ToolResult::ok(obj(json!({
                "result": text,
                "nfInstanceId": p.nf_instance_id,
                "nfType": p.nf_type.to_string(),
                "nfStatus": status,
                "ipv4Address": p.ipv4_address,
                "services": services.join(","),
                "instances": items.len(),
            }))),
            note: format!("Return NF profile ({nf})"),
        })
    }

    fn parse_nf(nf: &str) -> Result<NfType, String> {
        nf.parse::<NfType>().map_err(|e| e.to_string())
    }

    async fn control(&self, nf: &str, action: &str) -> Result<Executed, String> {
        let rt = self.runtime().ok_or("no lifecycle backend")?;
        let nf_type = Self::parse_nf(nf)?;
        let action: LifecycleAction = action.parse()?;
        let out = rt.lifecycle(nf_type, action).await.map_err(|e| e.to_string())?;
        let verb = lifecycle_verb(action, &out);
        let text = format!("{nf} {verb} (state: {})", out.state.state);
        Ok(Executed {
            result: ToolResult::ok(obj(json!({
                "result": text,
                "state": out.state.state.to_string(),
                "already": out.already,
                "replicas": out.replicas,
            }))),
            note: format!("Return lifecycle execution result ({nf} {verb})"),
        })
    }

    async fn update_config(&self, nf: &str, key: &str, value: &str) -> Result<Executed, String> {
        let rt = self.runtime().ok_or("no lifecycle backend")?;
        let nf_type = Self::parse_nf(nf)?;
        if key.is_empty() {
            return Err("configuration key must be non-empty".into());
        }
        let old = rt
            .update_config(nf_type, key, value)
            .await
            .map_err(|e| e.to_string())?
            .unwrap_or_default();
        let shown = if old.is_empty() { "<unset>" } else { old.as_str() };
        Ok(Executed {
            result: ToolResult::ok(obj(json!({
                "result": format!("{nf} config {key}: {shown} -> {value}"),
                "key": key,
                "old_value": old,
                "new_value": value,
            }))),
            note: format!("Return configuration result ({nf} {key})"),
        })
    }

    async fn scale(&self, nf: &str, replicas: u64) -> Result<Executed, String> {
        let rt = self.runtime().ok_or("no lifecycle backend")?;
        let nf_type = Self::parse_nf(nf)?;
        const MAX_REPLICAS: u64 = 16;
        if replicas > MAX_REPLICAS {
            return Err(format!("replicas must be at most {MAX_REPLICAS}"));
        }
        let out = rt
            .scale(nf_type, replicas as usize)
            .await
            .map_err(|e| e.to_string())?;
        Ok(Executed {
            result: ToolResult::ok(obj(json!({
                "result": format!("{nf} scaled to {} replicas (state: {})", out.replicas, out.state.state),
                "replicas": out.replicas,
                "state": out.state.state.to_string(),
            }))),
            note: format!("Return scaling result ({nf} x{})", out.replicas),
        })
    }
}

fn lifecycle_verb(action: LifecycleAction, out: &LifecycleOutcome) -> &'static str {
    match (action, out.already, out.state.state) {
        (LifecycleAction::Start, true, _) => "is already running",
        (LifecycleAction::Stop, true, _) => "is already stopped",
        (LifecycleAction::Start, false, _) => "started",
        (LifecycleAction::Stop, false, _) => "stopped",
        (LifecycleAction::Restart, _, RunState::Running) => "restarted",
        (LifecycleAction::Restart, _, _) => "restart incomplete",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogs_are_well_formed_and_unique() {
        for kind in [ServerKind::Monitoring, ServerKind::Execution] {
            let tools = kind.catalog();
            assert_eq!(tools.len(), 3);
            for t in &tools {
                t.self_check().unwrap();
            }
            let mut names: Vec<_> = tools.iter().map(|t| t.name.clone()).collect();
            names.dedup();
            assert_eq!(names.len(), 3);
        }
    }

    #[test]
    fn check_nf_status_descriptor_matches_reference() {
        let t = &monitoring_catalog()[0];
        let v = serde_json::to_value(t).unwrap();
        assert_eq!(v["name"], "check_nf_status");
        assert_eq!(
            v["description"],
            "Checks whether a core network function is currently active (registered in the NRF)"
        );
        assert_eq!(v["inputSchema"]["properties"]["nf_type"]["type"], "string");
        assert_eq!(v["inputSchema"]["required"], json!(["nf_type"]));
        assert_eq!(v["outputSchema"]["properties"]["result"]["type"], "string");
        assert_eq!(v["outputSchema"]["required"], json!(["result"]));
    }

    #[test]
    fn control_nf_schema() {
        let t = execution_catalog()
            .into_iter()
            .find(|t| t.name == CONTROL_NF)
            .unwrap();
        assert_eq!(t.input_schema.required, ["nf_type", "action"]);
        assert_eq!(
            t.input_schema.properties["action"].allowed,
            Some(vec![json!("start"), json!("stop"), json!("restart")])
        );
    }

    #[test]
    fn status_strings() {
        assert_eq!(status_inactive("AMF"), "AMF is not active or not registered in the NRF");
        assert_eq!(status_active("AMF"), "AMF is active (registered in the NRF)");
    }
}
