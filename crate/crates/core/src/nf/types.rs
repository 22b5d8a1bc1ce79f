use std::fmt;
use std::net::Ipv4Addr;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Network function types known to the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NfType {
    Amf,
    Smf,
    Upf,
    Udm,
    Udr,
    Ausf,
    Nrf,
}

impl NfType {
    pub const ALL: [NfType; 7] = [
        NfType::Amf,
        NfType::Smf,
        NfType::Upf,
        NfType::Udm,
        NfType::Udr,
        NfType::Ausf,
        NfType::Nrf,
    ];

    /// The lifecycle-controllable NFs of the default deployment.
    pub const CONTROLLABLE: [NfType; 6] = [
        NfType::Amf,
        NfType::Smf,
        NfType::Upf,
        NfType::Udm,
        NfType::Udr,
        NfType::Ausf,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            NfType::Amf => "AMF",
            NfType::Smf => "SMF",
            NfType::Upf => "UPF",
            NfType::Udm => "UDM",
            NfType::Udr => "UDR",
            NfType::Ausf => "AUSF",
            NfType::Nrf => "NRF",
        }
    }

    /// Services each NF produces in the simulated core.
    pub fn default_services(&self) -> Vec<NfService> {
        let pairs: &[(&str, &str)] = match self {
            NfType::Amf => &[("namf-comm", "v1"), ("namf-evts", "v1")],
            NfType::Smf => &[("nsmf-pdusession", "v1"), ("nsmf-event-exposure", "v1")],
            NfType::Upf => &[],
            NfType::Udm => &[("nudm-sdm", "v2"), ("nudm-uecm", "v1"), ("nudm-ueau", "v1")],
            NfType::Udr => &[("nudr-dr", "v1")],
            NfType::Ausf => &[("nausf-auth", "v1")],
            NfType::Nrf => &[("nnrf-nfm", "v1"), ("nnrf-disc", "v1")],
        };
        pairs
            .iter()
            .map(|(name, version)| NfService::new(*name, *version))
            .collect()
    }

    /// Default container addresses of the reference OAI docker deployment.
    pub fn default_ipv4(&self) -> Ipv4Addr {
        let last = match self {
            NfType::Nrf => 130,
            NfType::Amf => 132,
            NfType::Smf => 133,
            NfType::Upf => 134,
            NfType::Udr => 136,
            NfType::Udm => 137,
            NfType::Ausf => 138,
        };
        Ipv4Addr::new(192, 168, 70, last)
    }
}

impl fmt::Display for NfType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown NF type: {0}")]
pub struct UnknownNfType(pub String);

impl FromStr for NfType {
    type Err = UnknownNfType;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NfType::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownNfType(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NfStatus {
    Registered,
    Suspended,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NfService {
    pub service_name: String,
    pub api_version: String,
}

impl NfService {
    pub fn new(service_name: impl Into<String>, api_version: impl Into<String>) -> Self {
        Self {
            service_name: service_name.into(),
            api_version: api_version.into(),
        }
    }
}

/// An NF's registration record held by the NRF.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct NfProfile {
    pub nf_instance_id: String,
    pub nf_type: NfType,
    pub nf_status: NfStatus,
    pub ipv4_address: String,
    #[serde(default)]
    pub services: Vec<NfService>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationError {
    #[error("nfInstanceId must be a UUID, got {0:?}")]
    InstanceId(String),
    #[error("ipv4Address is not a dotted-quad address: {0:?}")]
    Ipv4(String),
    #[error("registered {0} profile must list at least one service")]
    NoServices(NfType),
    #[error("service name must be non-empty")]
    ServiceName,
    #[error("apiVersion {0:?} does not match v<digits>")]
    ApiVersion(String),
    #[error("path id {path} does not match body nfInstanceId {body}")]
    IdMismatch { path: String, body: String },
}

pub fn is_api_version(v: &str) -> bool {
    v.len() > 1 && v.starts_with('v') && v[1..].bytes().all(|b| b.is_ascii_digit())
}

impl NfProfile {
    /// Builds a REGISTERED profile with a fresh instance id and the type's default services.
    pub fn new_registered(nf_type: NfType, ipv4: Ipv4Addr) -> Self {
        Self {
            nf_instance_id: uuid::Uuid::new_v4().to_string(),
            nf_type,
            nf_status: NfStatus::Registered,
            ipv4_address: ipv4.to_string(),
            services: nf_type.default_services(),
        }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if uuid::Uuid::parse_str(&self.nf_instance_id).is_err() {
            return Err(ValidationError::InstanceId(self.nf_instance_id.clone()));
        }
        if self.ipv4_address.parse::<Ipv4Addr>().is_err() {
            return Err(ValidationError::Ipv4(self.ipv4_address.clone()));
        }
        for svc in &self.services {
            if svc.service_name.is_empty() {
                return Err(ValidationError::ServiceName);
            }
            if !is_api_version(&svc.api_version) {
                return Err(ValidationError::ApiVersion(svc.api_version.clone()));
            }
        }
        if self.nf_status == NfStatus::Registered
            && self.nf_type != NfType::Upf
            && self.services.is_empty()
        {
            return Err(ValidationError::NoServices(self.nf_type));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nf_type_parses_case_insensitively() {
        assert_eq!("amf".parse::<NfType>().unwrap(), NfType::Amf);
        assert_eq!(" Ausf ".parse::<NfType>().unwrap(), NfType::Ausf);
        assert!("XYZ".parse::<NfType>().is_err());
    }

    #[test]
    fn default_profiles_validate() {
        for t in NfType::ALL {
            NfProfile::new_registered(t, t.default_ipv4()).validate().unwrap();
        }
    }

    #[test]
    fn profile_validation_errors() {
        let mut p = NfProfile::new_registered(NfType::Amf, NfType::Amf.default_ipv4());
        p.nf_instance_id.clear();
        assert!(matches!(p.validate(), Err(ValidationError::InstanceId(_))));

        let mut p = NfProfile::new_registered(NfType::Amf, NfType::Amf.default_ipv4());
        p.ipv4_address = "300.1.1.1".into();
        assert!(matches!(p.validate(), Err(ValidationError::Ipv4(_))));

        let mut p = NfProfile::new_registered(NfType::Smf, NfType::Smf.default_ipv4());
        p.services.clear();
        assert_eq!(p.validate(), Err(ValidationError::NoServices(NfType::Smf)));

        let mut p = NfProfile::new_registered(NfType::Amf, NfType::Amf.default_ipv4());
        p.services[0].api_version = "1.0.0".into();
        assert!(matches!(p.validate(), Err(ValidationError::ApiVersion(_))));
    }

    #[test]
    fn profile_wire_names() {
        let p = NfProfile::new_registered(NfType::Amf, NfType::Amf.default_ipv4());
        let v = serde_json::to_value(&p).unwrap();
        assert_eq!(v["nfType"], "AMF");
        assert_eq!(v["nfStatus"], "REGISTERED");
        assert_eq!(v["ipv4Address"], "192.168.70.132");
        assert_eq!(v["services"][0]["serviceName"], "namf-comm");
        assert_eq!(v["services"][0]["apiVersion"], "v1");
    }
}
