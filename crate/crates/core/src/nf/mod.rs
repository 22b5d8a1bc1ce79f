//! Simulated mobile core: NRF registry, SBI endpoints and the NF lifecycle runtime.

pub mod registry;
pub mod runtime;
pub mod sbi;
pub mod types;
pub mod uri;

pub use registry::{DiscoveryDocument, Link, Links, NrfRegistry, RegisterOutcome};
pub use runtime::{
    BackendError, ContainerBackend, LifecycleAction, LifecycleError, LifecycleOutcome, NfBackend,
    NfDelays, NfDeployment, NfRuntime, NfRuntimeState, RunState, SimulatedBackend,
};
pub use sbi::{DiscoveryResponse, NrfService, SbiClient, SbiError};
pub use types::{NfProfile, NfService, NfStatus, NfType, ValidationError};
pub use uri::{build_resource_uri, SbiResourceUri, UriError};
