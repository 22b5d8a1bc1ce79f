use std::collections::BTreeMap;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use super::types::{NfProfile, NfStatus, NfType, ValidationError};
use super::uri::build_resource_uri;

pub const NFM_API: &str = "nnrf-nfm";
pub const NFM_VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub href: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Links {
    pub item: Vec<Link>,
    #[serde(rename = "self")]
    pub self_link: String,
}

/// Body of `GET /nnrf-nfm/v1/nf-instances`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscoveryDocument {
    #[serde(rename = "_links")]
    pub links: Links,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegisterOutcome {
    Created,
    Replaced,
}

/// The NRF's store of NF profiles, keyed by instance id.
#[derive(Default)]
pub struct NrfRegistry {
    profiles: RwLock<BTreeMap<String, NfProfile>>,
    // insertion order per instance, so discovery lists instances stably
    order: RwLock<Vec<String>>,
}

impl NrfRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// PUT semantics: inserts or replaces the profile with the same id.
    pub fn register(&self, profile: NfProfile) -> Result<RegisterOutcome, ValidationError> {
        profile.validate()?;
        let mut profiles = self.profiles.write();
        let id = profile.nf_instance_id.clone();
        if profiles.insert(id.clone(), profile).is_some() {
            Ok(RegisterOutcome::Replaced)
        } else {
            self.order.write().push(id);
            Ok(RegisterOutcome::Created)
        }
    }

    /// Removing an absent id is a successful no-op; returns whether anything was removed.
    pub fn deregister(&self, nf_instance_id: &str) -> bool {
        let mut profiles = self.profiles.write();
        let removed = profiles.remove(nf_instance_id).is_some();
        if removed {
            self.order.write().retain(|id| id != nf_instance_id);
        }
        removed
    }

    pub fn get(&self, nf_instance_id: &str) -> Option<NfProfile> {
        self.profiles.read().get(nf_instance_id).cloned()
    }

    /// REGISTERED instances of a type, in registration order.
    pub fn registered(&self, nf_type: NfType) -> Vec<NfProfile> {
        let profiles = self.profiles.read();
        self.order
            .read()
            .iter()
            .filter_map(|id| profiles.get(id))
            .filter(|p| p.nf_type == nf_type && p.nf_status == NfStatus::Registered)
            .cloned()
            .collect()
    }

    pub fn len(&self) -> usize {
        self.profiles.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn all(&self) -> Vec<NfProfile> {
        let profiles = self.profiles.read();
        self.order
            .read()
            .iter()
            .filter_map(|id| profiles.get(id).cloned())
            .collect()
    }

    /// Discovery document for `nf_type`. Each item links to the instance's
    /// resource under `api_root`; `self_link` is echoed verbatim.
    pub fn discovery(&self, nf_type: NfType, api_root: &str, self_link: &str) -> DiscoveryDocument {
        let item = self
            .registered(nf_type)
            .into_iter()
            .filter_map(|p| {
                build_resource_uri(
                    api_root,
                    NFM_API,
                    NFM_VERSION,
                    &format!("nf-instances/{}", p.nf_instance_id),
                )
                .ok()
            })
            .map(|href| Link { href })
            .collect();
        DiscoveryDocument {
            links: Links {
                item,
                self_link: self_link.to_string(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amf() -> NfProfile {
        NfProfile::new_registered(NfType::Amf, "192.168.70.132".parse().unwrap())
    }

    #[test]
    fn empty_discovery_matches_wire_form() {
        let reg = NrfRegistry::new();
        let doc = reg.discovery(NfType::Amf, "http://127.0.0.1:8080", "");
        assert_eq!(
            serde_json::to_string(&doc).unwrap(),
            r#"{"_links":{"item":[],"self":""}}"#
        );
    }

    #[test]
    fn register_then_discover() {
        let reg = NrfRegistry::new();
        let p = amf();
        assert_eq!(reg.register(p.clone()).unwrap(), RegisterOutcome::Created);
        let doc = reg.discovery(NfType::Amf, "http://127.0.0.1:8080", "");
        assert_eq!(doc.links.item.len(), 1);
        assert_eq!(
            doc.links.item[0].href,
            format!("http://127.0.0.1:8080/nnrf-nfm/v1/nf-instances/{}", p.nf_instance_id)
        );
        assert!(reg.discovery(NfType::Udm, "http://h", "").links.item.is_empty());
    }

    #[test]
    fn put_is_idempotent() {
        let reg = NrfRegistry::new();
        let p = amf();
        reg.register(p.clone()).unwrap();
        assert_eq!(reg.register(p.clone()).unwrap(), RegisterOutcome::Replaced);
        assert_eq!(reg.len(), 1);
        assert_eq!(reg.all(), vec![p]);
    }

    #[test]
    fn invalid_profile_is_rejected() {
        let reg = NrfRegistry::new();
        let mut p = amf();
        p.nf_instance_id = String::new();
        assert!(reg.register(p).is_err());
        assert!(reg.is_empty());
    }

    #[test]
    fn deregistration_is_idempotent() {
        let reg = NrfRegistry::new();
        let p = amf();
        reg.register(p.clone()).unwrap();
        assert!(reg.deregister(&p.nf_instance_id));
        assert!(!reg.deregister(&p.nf_instance_id));
        assert!(!reg.deregister("unknown"));
        assert!(reg.registered(NfType::Amf).is_empty());
    }

    #[test]
    fn suspended_instances_are_not_discovered() {
        let reg = NrfRegistry::new();
        let mut p = amf();
        p.nf_status = NfStatus::Suspended;
        reg.register(p).unwrap();
        assert!(reg.discovery(NfType::Amf, "http://h", "").links.item.is_empty());
    }
}
