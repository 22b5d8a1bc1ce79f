//! Simulated core: lifecycle state machine vs. a brute-force model, NRF
//! registry properties, and the NRF over HTTP/2.

mod common;

use std::net::Ipv4Addr;
use std::sync::Arc;

use agentic_core::net::{bind, ServerHandle};
use agentic_core::nf::{
    LifecycleAction, LifecycleError, NfDelays, NfDeployment, NfProfile, NfRuntime, NfService, NfStatus, NfType,
    NrfRegistry, NrfService, RegisterOutcome, RunState, SbiClient, SbiResourceUri, SimulatedBackend,
};
use agentic_core::trace::{Interface, TraceCollector, Tracer};
use common::{lifecycle_action, LifecycleOracle};
use proptest::prelude::*;

fn runtime_with(registry: Arc<NrfRegistry>) -> (NfRuntime, Arc<SimulatedBackend>) {
    let backend = Arc::new(SimulatedBackend::new(NfDelays::default()));
    let deployment: Vec<NfDeployment> = NfType::CONTROLLABLE.iter().map(|t| NfDeployment::new(*t)).collect();
    let rt = NfRuntime::new(registry, backend.clone(), &deployment, Ipv4Addr::new(192, 168, 70, 130));
    (rt, backend)
}

fn block_on<F: std::future::Future>(f: F) -> F::Output {
    tokio::runtime::Builder::new_current_thread()
        .enable_all()
        .build()
        .unwrap()
        .block_on(f)
}

/// Runtime state, registry contents and the model agree for every NF.
fn coherent(rt: &NfRuntime, oracle: &LifecycleOracle) -> Result<(), String> {
    for nf in NfType::CONTROLLABLE {
        let state = rt.state(nf).unwrap().state;
        let registered = !rt.registry().registered(nf).is_empty();
        let expected = oracle.running[&nf];
        if (state == RunState::Running) != expected || registered != expected {
            return Err(format!("{nf}: state {state}, registered {registered}, model says running={expected}"));
        }
        let discovered = rt.registry().discovery(nf, "http://nrf", "").links.item.len();
        if (discovered > 0) != expected {
            return Err(format!("{nf}: discovery lists {discovered} items, model says running={expected}"));
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lifecycle_matches_the_model(
        initial in prop::collection::vec(any::<bool>(), 6),
        actions in prop::collection::vec(lifecycle_action(), 100..200),
    ) {
        block_on(async {
            let (rt, _) = runtime_with(Arc::new(NrfRegistry::new()));
            let mut oracle = LifecycleOracle::new(NfType::CONTROLLABLE.iter().map(|t| (*t, false)));
            for (nf, up) in NfType::CONTROLLABLE.iter().zip(&initial) {
                if *up {
                    rt.lifecycle(*nf, LifecycleAction::Start).await.unwrap();
                    oracle.apply(*nf, LifecycleAction::Start);
                }
            }
            coherent(&rt, &oracle).map_err(TestCaseError::fail)?;
            for (i, (nf, action)) in actions.iter().enumerate() {
                let registry_before = rt.registry().all();
                let got = rt.lifecycle(*nf, *action).await.unwrap();
                let (running, already) = oracle.apply(*nf, *action);
                prop_assert_eq!(got.already, already, "step {}: {} {}", i, nf, action);
                prop_assert_eq!(got.state.state == RunState::Running, running);
                prop_assert_eq!(got.replicas, usize::from(running));
                if already {
                    prop_assert_eq!(rt.registry().all(), registry_before, "no-op changed the registry");
                }
                coherent(&rt, &oracle).map_err(|e| TestCaseError::fail(format!("step {i}: {e}")))?;
            }
            // the NRF is never touched
            prop_assert_eq!(rt.state(NfType::Nrf).unwrap().state, RunState::Running);
            prop_assert_eq!(rt.registry().registered(NfType::Nrf).len(), 1);
            Ok(())
        })?;
    }

    /// PUT idempotence: n identical registrations leave one record.
    #[test]
    fn repeated_registration_is_idempotent(n in 1usize..6, nf in prop::sample::select(NfType::ALL.to_vec())) {
        let registry = NrfRegistry::new();
        let p = NfProfile::new_registered(nf, Ipv4Addr::new(10, 0, 0, 1));
        let mut outcomes = Vec::new();
        for _ in 0..n {
            outcomes.push(registry.register(p.clone()).unwrap());
        }
        prop_assert_eq!(outcomes[0], RegisterOutcome::Created);
        prop_assert!(outcomes[1..].iter().all(|o| *o == RegisterOutcome::Replaced));
        prop_assert_eq!(registry.all(), vec![p]);
    }

    /// Every discovered href points at a REGISTERED instance of the queried
    /// type; suspended or absent instances never show up.
    #[test]
    fn discovery_is_sound(
        entries in prop::collection::vec((prop::sample::select(NfType::ALL.to_vec()), any::<bool>(), any::<bool>()), 0..20),
        query in prop::sample::select(NfType::ALL.to_vec()),
    ) {
        let registry = NrfRegistry::new();
        for (nf, suspended, removed) in &entries {
            let mut p = NfProfile::new_registered(*nf, Ipv4Addr::new(10, 0, 0, 2));
            if *suspended {
                p.nf_status = NfStatus::Suspended;
            }
            registry.register(p.clone()).unwrap();
            if *removed {
                registry.deregister(&p.nf_instance_id);
            }
        }
        let doc = registry.discovery(query, "http://127.0.0.1:8080", "");
        let expected = entries.iter().filter(|(nf, s, r)| *nf == query && !s && !r).count();
        prop_assert_eq!(doc.links.item.len(), expected);
        for link in &doc.links.item {
            let uri = SbiResourceUri::parse(&link.href).unwrap();
            prop_assert_eq!(&uri.api_name, "nnrf-nfm");
            let id = uri.resource_part.strip_prefix("nf-instances/").unwrap();
            let p = registry.get(id).unwrap();
            prop_assert_eq!(p.nf_type, query);
            prop_assert_eq!(p.nf_status, NfStatus::Registered);
        }
    }
}

/// Every (state, action) pair for every NF, against the model.
#[tokio::test]
async fn all_state_action_pairs() {
    for nf in NfType::CONTROLLABLE {
        for start_running in [false, true] {
            for action in LifecycleAction::ALL {
                let (rt, _) = runtime_with(Arc::new(NrfRegistry::new()));
                let mut oracle = LifecycleOracle::new(NfType::CONTROLLABLE.iter().map(|t| (*t, false)));
                if start_running {
                    rt.lifecycle(nf, LifecycleAction::Start).await.unwrap();
                    oracle.apply(nf, LifecycleAction::Start);
                }
                let before: Vec<String> = rt.registry().registered(nf).into_iter().map(|p| p.nf_instance_id).collect();
                let got = rt.lifecycle(nf, action).await.unwrap();
                let (running, already) = oracle.apply(nf, action);
                assert_eq!(got.already, already, "{nf} {action} from running={start_running}");
                assert_eq!(got.state.state == RunState::Running, running);
                coherent(&rt, &oracle).unwrap();
                let after: Vec<String> = rt.registry().registered(nf).into_iter().map(|p| p.nf_instance_id).collect();
                match (action, start_running) {
                    // a restart re-registers under a fresh instance id
                    (LifecycleAction::Restart, true) => assert_ne!(before, after),
                    (LifecycleAction::Start, true) | (LifecycleAction::Stop, false) => assert_eq!(before, after),
                    _ => {}
                }
            }
        }
    }
}

#[tokio::test]
async fn restart_deregisters_before_registering() {
    let collector = TraceCollector::new();
    let (rt, _) = runtime_with(Arc::new(NrfRegistry::new()));
    rt.set_tracer(Tracer::new(collector.clone(), "Lifecycle Runtime"));
    rt.lifecycle(NfType::Amf, LifecycleAction::Start).await.unwrap();
    collector.begin_run();
    rt.lifecycle(NfType::Amf, LifecycleAction::Restart).await.unwrap();
    let purposes: Vec<String> = collector
        .run_events()
        .into_iter()
        .filter(|e| e.is_request() && e.interface == Interface::SYS)
        .map(|e| e.purpose)
        .collect();
    assert_eq!(
        purposes,
        [
            "Deregister AMF from NRF",
            "Stop AMF instance 0",
            "Start AMF instance 0",
            "Register AMF with NRF"
        ]
    );
}

#[tokio::test]
async fn errors_for_nrf_undeployed_and_backend_failure() {
    let registry = Arc::new(NrfRegistry::new());
    let backend = Arc::new(SimulatedBackend::new(NfDelays::default()));
    let rt = NfRuntime::new(
        registry,
        backend.clone(),
        &[NfDeployment::new(NfType::Amf)],
        Ipv4Addr::new(192, 168, 70, 130),
    );
    assert_eq!(
        rt.lifecycle(NfType::Nrf, LifecycleAction::Stop).await.unwrap_err(),
        LifecycleError::NotControllable(NfType::Nrf)
    );
    assert!(matches!(
        rt.lifecycle(NfType::Smf, LifecycleAction::Start).await.unwrap_err(),
        LifecycleError::UnknownNf(_)
    ));
    backend.fail_starts(NfType::Amf, true);
    assert!(matches!(
        rt.lifecycle(NfType::Amf, LifecycleAction::Start).await.unwrap_err(),
        LifecycleError::Backend(_)
    ));
    assert_eq!(rt.state(NfType::Amf).unwrap().state, RunState::Stopped);
    assert!(rt.registry().registered(NfType::Amf).is_empty());
}

struct Nrf {
    registry: Arc<NrfRegistry>,
    api_root: String,
    server: ServerHandle,
}

async fn serve_nrf(excerpt_exact: bool) -> Nrf {
    let listener = bind("127.0.0.1:0").await.unwrap();
    let api_root = format!("http://127.0.0.1:{}", listener.local_addr().unwrap().port());
    let registry = Arc::new(NrfRegistry::new());
    let service = NrfService {
        registry: registry.clone(),
        api_root: api_root.clone(),
        excerpt_exact,
        tracer: Tracer::new(TraceCollector::new(), "NRF"),
    };
    let server = ServerHandle::spawn(listener, service.router());
    Nrf {
        registry,
        api_root,
        server,
    }
}

fn client(api_root: &str, http2: bool) -> SbiClient {
    SbiClient::new(api_root, http2, Tracer::new(TraceCollector::new(), "MCP Tool")).unwrap()
}

#[tokio::test]
async fn unregistered_discovery_is_byte_exact_over_http2() {
    let nrf = serve_nrf(true).await;
    let resp = client(&nrf.api_root, true).discover("AMF").await.unwrap();
    assert_eq!(resp.status, 200);
    assert_eq!(resp.http_version, "HTTP/2.0");
    assert_eq!(resp.body, r#"{"_links":{"item":[],"self":""}}"#);
    nrf.server.stop().await;
}

#[tokio::test]
async fn self_link_echoes_the_request_outside_excerpt_mode() {
    let nrf = serve_nrf(false).await;
    let resp = client(&nrf.api_root, true).discover("AMF").await.unwrap();
    assert_eq!(
        resp.body,
        r#"{"_links":{"item":[],"self":"/nnrf-nfm/v1/nf-instances?nf-type=AMF"}}"#
    );
    // the HTTP/1.1 fallback serves the same document
    let resp1 = client(&nrf.api_root, false).discover("AMF").await.unwrap();
    assert_eq!(resp1.http_version, "HTTP/1.1");
    assert_eq!(resp1.body, resp.body);
    nrf.server.stop().await;
}

#[tokio::test]
async fn registered_amf_is_discovered_with_its_instance_uri() {
    let nrf = serve_nrf(true).await;
    let sbi = client(&nrf.api_root, true);
    let p = NfProfile::new_registered(NfType::Amf, Ipv4Addr::new(192, 168, 70, 132));
    assert_eq!(sbi.register(&p).await.unwrap(), 201);
    // PUT again with the identical profile: replaced, same registry state
    assert_eq!(sbi.register(&p).await.unwrap(), 200);
    assert_eq!(nrf.registry.all().iter().filter(|q| q.nf_type == NfType::Amf).count(), 1);

    let resp = sbi.discover("AMF").await.unwrap();
    let items = &resp.document.links.item;
    assert_eq!(items.len(), 1);
    let expected = format!("{}/nnrf-nfm/v1/nf-instances/{}", nrf.api_root, p.nf_instance_id);
    assert_eq!(items[0].href, expected);
    let fetched = sbi.profile(&items[0].href).await.unwrap();
    assert_eq!(fetched, p);
    assert_eq!(fetched.ipv4_address, "192.168.70.132");

    assert_eq!(sbi.deregister(&p.nf_instance_id).await.unwrap(), 204);
    let resp = sbi.discover("AMF").await.unwrap();
    assert!(resp.document.links.item.is_empty());
    nrf.server.stop().await;
}

#[tokio::test]
async fn invalid_registrations_and_queries_are_rejected() {
    let nrf = serve_nrf(true).await;
    let sbi = client(&nrf.api_root, true);
    let mut p = NfProfile::new_registered(NfType::Smf, Ipv4Addr::new(10, 0, 0, 3));
    p.nf_instance_id = String::new();
    assert!(sbi.register(&p).await.is_err());
    let mut p = NfProfile::new_registered(NfType::Smf, Ipv4Addr::new(10, 0, 0, 3));
    p.services = vec![NfService::new("nsmf-pdusession", "1")];
    assert!(sbi.register(&p).await.is_err());
    assert!(nrf.registry.all().is_empty());

    let http = reqwest::Client::builder().http2_prior_knowledge().build().unwrap();
    let url = format!("{}/nnrf-nfm/v1/nf-instances", nrf.api_root);
    assert_eq!(http.get(&url).send().await.unwrap().status(), 400);
    let bad = http.get(format!("{url}?nf-type=A%20MF")).send().await.unwrap();
    assert_eq!(bad.status(), 400);
    let unknown = http.get(format!("{url}?nf-type=XYZ")).send().await.unwrap().text().await.unwrap();
    assert_eq!(unknown, r#"{"_links":{"item":[],"self":""}}"#);
    nrf.server.stop().await;
}

/// The coherence invariant observed the way a client sees it: through SBI
/// discovery over HTTP/2 after every action.
#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn coherence_holds_through_the_sbi() {
    let nrf = serve_nrf(true).await;
    let sbi = client(&nrf.api_root, true);
    let (rt, _) = runtime_with(nrf.registry.clone());
    let mut oracle = LifecycleOracle::new(NfType::CONTROLLABLE.iter().map(|t| (*t, false)));
    for (nf, action) in common::sample(lifecycle_action(), 150) {
        rt.lifecycle(nf, action).await.unwrap();
        oracle.apply(nf, action);
        for t in NfType::CONTROLLABLE {
            let items = sbi.discover(t.as_str()).await.unwrap().document.links.item.len();
            assert_eq!(items > 0, oracle.running[&t], "{t} after {nf} {action}");
        }
    }
    nrf.server.stop().await;
}
