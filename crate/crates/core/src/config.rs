//! Deployment configuration (TOML).
//!
//! ```toml
//! excerpt_exact = true
//! latency_profile = "fast"
//!
//! [ports]
//! nrf = 8080
//! monitoring_mcp = 9000
//!
//! [[nfs]]
//! nf_type = "AMF"
//! start_at_boot = false
//! start_delay_s = 0.4
//!
//! [backend]
//! kind = "container"
//! program = "docker"
//! name_template = "oai-{nf}"
//! ```

use std::net::Ipv4Addr;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nf::{NfDeployment, NfType};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid deployment config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ports {
    pub nrf: u16,
    pub monitoring_mcp: u16,
    pub execution_mcp: u16,
    pub host_agent: u16,
    pub monitoring_agent: u16,
    pub execution_agent: u16,
    /// Control API and event stream.
    pub control: u16,
}

impl Default for Ports {
    fn default() -> Self {
        Self {
            nrf: 8080,
            monitoring_mcp: 9000,
            execution_mcp: 9001,
            host_agent: 8001,
            monitoring_agent: 8002,
            execution_agent: 8003,
            control: 7000,
        }
    }
}

impl Ports {
    /// Every port 0: the OS picks free ones.
    pub fn ephemeral() -> Self {
        Self {
            nrf: 0,
            monitoring_mcp: 0,
            execution_mcp: 0,
            host_agent: 0,
            monitoring_agent: 0,
            execution_agent: 0,
            control: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NfConfig {
    pub nf_type: NfType,
    #[serde(default = "yes")]
    pub start_at_boot: bool,
    #[serde(default)]
    pub ipv4: Option<Ipv4Addr>,
    /// Overrides the latency profile's NF start delay for this NF.
    #[serde(default)]
    pub start_delay_s: Option<f64>,
    #[serde(default)]
    pub stop_delay_s: Option<f64>,
}

fn yes() -> bool {
    true
}

impl NfConfig {
    pub fn new(nf_type: NfType) -> Self {
        Self {
            nf_type,
            start_at_boot: true,
            ipv4: None,
            start_delay_s: None,
            stop_delay_s: None,
        }
    }

    pub fn deployment(&self) -> NfDeployment {
        NfDeployment {
            nf_type: self.nf_type,
            ipv4: self.ipv4.unwrap_or_else(|| self.nf_type.default_ipv4()),
            start_at_boot: self.start_at_boot,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Simulated,
    Container,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    /// Container CLI, for the container backend.
    pub program: String,
    /// Container name; `{nf}` is the lower-case NF name, `{replica}` its index.
    pub name_template: String,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            kind: BackendKind::Simulated,
            program: "docker".into(),
            name_template: "oai-{nf}".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReasoningKind {
    Deterministic,
    Llm,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReasoningConfig {
    pub kind: ReasoningKind,
    pub endpoint: String,
    pub model: String,
}

impl Default for ReasoningConfig {
    fn default() -> Self {
        Self {
            kind: ReasoningKind::Deterministic,
            endpoint: "http://127.0.0.1:11434".into(),
            model: "mistral-nemo:latest".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeploymentConfig {
    /// Address every server binds to.
    pub bind_host: String,
    /// Host name used in agent card URLs.
    pub advertise_host: String,
    pub ports: Ports,
    pub nfs: Vec<NfConfig>,
    pub backend: BackendConfig,
    /// Emit `"self":""` in discovery responses.
    pub excerpt_exact: bool,
    /// SBI over HTTP/2 (prior knowledge); HTTP/1.1 when false.
    pub sbi_http2: bool,
    /// Frame MCP responses as server-sent events; plain JSON when false.
    pub mcp_sse: bool,
    pub reasoning: ReasoningConfig,
    /// `fast`, `paper-calibrated` or a profile file path.
    pub latency_profile: String,
    pub results_dir: String,
    /// Limit for booting NFs and bringing every endpoint up.
    pub startup_timeout_s: f64,
}

impl Default for DeploymentConfig {
    fn default() -> Self {
        Self {
            bind_host: "127.0.0.1".into(),
            advertise_host: "localhost".into(),
            ports: Ports::default(),
            nfs: NfType::CONTROLLABLE.iter().map(|t| NfConfig::new(*t)).collect(),
            backend: BackendConfig::default(),
            excerpt_exact: false,
            sbi_http2: true,
            mcp_sse: true,
            reasoning: ReasoningConfig::default(),
            latency_profile: "fast".into(),
            results_dir: "results".into(),
            startup_timeout_s: 30.0,
        }
    }
}

impl DeploymentConfig {
    /// Default deployment on OS-assigned ports.
    pub fn ephemeral() -> Self {
        Self {
            ports: Ports::ephemeral(),
            ..Self::default()
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut seen = Vec::new();
        for nf in &self.nfs {
            if nf.nf_type == NfType::Nrf {
                return Err(ConfigError::Invalid(
                    "the NRF is always deployed and must not be listed under nfs".into(),
                ));
            }
            if seen.contains(&nf.nf_type) {
                return Err(ConfigError::Invalid(format!("{} listed twice", nf.nf_type)));
            }
            seen.push(nf.nf_type);
            for d in [nf.start_delay_s, nf.stop_delay_s].into_iter().flatten() {
                if !d.is_finite() || d < 0.0 {
                    return Err(ConfigError::Invalid(format!("{}: delays must be >= 0", nf.nf_type)));
                }
            }
        }
        if !self.startup_timeout_s.is_finite() || self.startup_timeout_s <= 0.0 {
            return Err(ConfigError::Invalid("startup_timeout_s must be positive".into()));
        }
        let p = &self.ports;
        let fixed: Vec<u16> = [
            p.nrf,
            p.monitoring_mcp,
            p.execution_mcp,
            p.host_agent,
            p.monitoring_agent,
            p.execution_agent,
            p.control,
        ]
        .into_iter()
        .filter(|p| *p != 0)
        .collect();
        for (i, a) in fixed.iter().enumerate() {
            if fixed[i + 1..].contains(a) {
                return Err(ConfigError::Invalid(format!("port {a} assigned twice")));
            }
        }
        Ok(())
    }

    pub fn deployments(&self) -> Vec<NfDeployment> {
        self.nfs.iter().map(NfConfig::deployment).collect()
    }

    /// Deployed NF types, the NRF included.
    pub fn deployed(&self) -> Vec<NfType> {
        let mut v: Vec<NfType> = self.nfs.iter().map(|n| n.nf_type).collect();
        v.push(NfType::Nrf);
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_topology() {
        let c = DeploymentConfig::default();
        assert_eq!(c.ports.nrf, 8080);
        assert_eq!(c.ports.monitoring_mcp, 9000);
        assert_eq!(c.ports.execution_mcp, 9001);
        assert_eq!(c.ports.monitoring_agent, 8002);
        assert_eq!(c.nfs.len(), 6);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn parses_partial_toml() {
        let c = DeploymentConfig::from_toml(
            "excerpt_exact = true\n[ports]\nnrf = 18080\n[[nfs]]\nnf_type = \"AMF\"\nstart_at_boot = false\n",
        )
        .unwrap();
        assert!(c.excerpt_exact);
        assert_eq!(c.ports.nrf, 18080);
        assert_eq!(c.ports.control, 7000);
        assert_eq!(c.nfs.len(), 1);
        assert!(!c.nfs[0].start_at_boot);
        assert_eq!(c.deployed(), vec![NfType::Amf, NfType::Nrf]);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(DeploymentConfig::from_toml("[[nfs]]\nnf_type = \"NRF\"\n").is_err());
        assert!(DeploymentConfig::from_toml("[[nfs]]\nnf_type = \"AMF\"\n[[nfs]]\nnf_type = \"AMF\"\n").is_err());
        assert!(DeploymentConfig::from_toml("[ports]\nnrf = 9000\n").is_err());
        assert!(DeploymentConfig::from_toml("wat = 1\n").is_err());
    }
}
