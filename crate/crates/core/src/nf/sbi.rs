//! NRF management service over the SBI (HTTP/2 + JSON) and its client.

use std::sync::Arc;

use axum::extract::{Path, RawQuery, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::registry::{DiscoveryDocument, NrfRegistry, RegisterOutcome, NFM_API, NFM_VERSION};
use super::types::{NfProfile, NfType, ValidationError};
use super::uri::{build_resource_uri, SbiResourceUri, UriError};
use crate::trace::{participants, prefix, Hop, Interface, TraceContext, Tracer};

/// RFC 7807 problem body used for SBI errors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemDetails {
    pub title: String,
    pub status: u16,
    pub detail: String,
}

fn problem(status: StatusCode, detail: impl Into<String>) -> Response {
    let body = ProblemDetails {
        title: status.canonical_reason().unwrap_or("error").to_string(),
        status: status.as_u16(),
        detail: detail.into(),
    };
    (
        status,
        [(header::CONTENT_TYPE, "application/problem+json")],
        serde_json::to_string(&body).unwrap_or_default(),
    )
        .into_response()
}

#[derive(Clone)]
pub struct NrfService {
    pub registry: Arc<NrfRegistry>,
    /// `scheme://authority` this NRF is reachable at; used in item hrefs.
    pub api_root: String,
    /// Emit an empty `_links.self` instead of echoing the request path.
    pub excerpt_exact: bool,
    pub tracer: Tracer,
}

fn is_token(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

fn json_response(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

impl NrfService {
    fn hop<'a>(&self, operation: &'a str, endpoint: &'a str, purpose: &'a str) -> Hop<'a> {
        Hop {
            interface: Interface::SBI,
            operation,
            endpoint,
            purpose,
            tabulated: false,
        }
    }

    fn discover(&self, query: Option<&str>) -> Response {
        let path = match query {
            Some(q) => format!("/{NFM_API}/{NFM_VERSION}/nf-instances?{q}"),
            None => format!("/{NFM_API}/{NFM_VERSION}/nf-instances"),
        };
        let mut nf_type = None;
        for pair in query.unwrap_or("").split('&').filter(|p| !p.is_empty()) {
            let (k, v) = pair.split_once('=').unwrap_or((pair, ""));
            if k == "nf-type" {
                nf_type = Some(v.to_string());
            }
        }
        let Some(nf_type) = nf_type else {
            return problem(StatusCode::BAD_REQUEST, "missing query parameter nf-type");
        };
        if !is_token(&nf_type) {
            return problem(StatusCode::BAD_REQUEST, format!("malformed nf-type {nf_type:?}"));
        }
        let self_link = if self.excerpt_exact { "" } else { path.as_str() };
        let doc = match nf_type.parse::<NfType>() {
            Ok(t) => self.registry.discovery(t, &self.api_root, self_link),
            Err(_) => DiscoveryDocument {
                links: super::registry::Links {
                    item: Vec::new(),
                    self_link: self_link.to_string(),
                },
            },
        };
        json_response(StatusCode::OK, serde_json::to_string(&doc).unwrap_or_default())
    }

    pub fn router(self) -> Router {
        Router::new()
            .route(
                "/nnrf-nfm/v1/nf-instances",
                get(
                    |State(s): State<NrfService>, headers: HeaderMap, RawQuery(q): RawQuery| async move {
                        let ctx = s.tracer.inbound(
                            &headers,
                            prefix::SBI,
                            s.hop("GET nf-instances", &s.api_root, "Query NF registration state"),
                        );
                        let resp = s.discover(q.as_deref());
                        s.tracer.response(
                            &ctx,
                            s.hop("GET nf-instances", &s.api_root, "Return NF discovery result"),
                        );
                        resp
                    },
                ),
            )
            .route(
                "/nnrf-nfm/v1/nf-instances/{id}",
                get(get_instance).put(put_instance).delete(delete_instance),
            )
            .with_state(self)
    }

    fn traced<F: FnOnce() -> Response>(
        &self,
        headers: &HeaderMap,
        operation: &str,
        purpose: &str,
        f: F,
    ) -> Response {
        let ctx = self
            .tracer
            .inbound(headers, prefix::SBI, self.hop(operation, &self.api_root, purpose));
        let resp = f();
        self.tracer.response(
            &ctx,
            self.hop(operation, &self.api_root, &format!("{operation} -> {}", resp.status().as_u16())),
        );
        resp
    }
}

async fn get_instance(
    State(s): State<NrfService>,
    headers: HeaderMap,
    Path(id): Path<String>,
) -> Response {
    s.traced(&headers, "GET nf-instance", "Retrieve NF profile", || {
        match s.registry.get(&id) {
            Some(p) => json_response(StatusCode::OK, serde_json::to_string(&p).unwrap_or_default()),
            None => problem(StatusCode::NOT_FOUND, format!("no NF instance {id}")),
        }
    })
}

async fn put_instance(
    State(s): State<NrfService>,
    headers: HeaderMap,
    Path(id): Path<String>,
    body: axum::body::Bytes,
) -> Response {
    s.traced(&headers, "PUT nf-instance", "Register NF instance", || {
        let profile: NfProfile = match serde_json::from_slice(&body) {
            Ok(p) => p,
            Err(e) => return problem(StatusCode::BAD_REQUEST, format!("invalid NfProfile: {e}")),
        };
        if profile.nf_instance_id != id {
            let e = ValidationError::IdMismatch {
                path: id,
                body: profile.nf_instance_id,
            };
            return problem(StatusCode::BAD_REQUEST, e.to_string());
        }
        match s.registry.register(profile.clone()) {
            Ok(RegisterOutcome::Created) => (StatusCode::CREATED, Json(profile)).into_response(),
            Ok(RegisterOutcome::Replaced) => (StatusCode::OK, Json(profile)).into_response(),
            Err(e) => problem(StatusCode::BAD_REQUEST, e.to_string()),
        }
    })
}

async fn delete_instance(
    State(s): State<NrfService>,
    headers: HeaderMap,
    Path(id): Path<String>,
) -> Response {
    s.traced(&headers, "DELETE nf-instance", "Deregister NF instance", || {
        s.registry.deregister(&id);
        StatusCode::NO_CONTENT.into_response()
    })
}

#[derive(Debug, Error)]
pub enum SbiError {
    #[error("SBI transport error: {0}")]
    Transport(String),
    #[error("SBI request failed with status {status}: {detail}")]
    Status { status: u16, detail: String },
    #[error("cannot decode SBI response: {0}")]
    Decode(String),
    #[error(transparent)]
    Uri(#[from] UriError),
}

/// Raw response of a discovery query, kept byte-exact.
#[derive(Debug, Clone)]
pub struct DiscoveryResponse {
    pub status: u16,
    pub http_version: String,
    pub body: String,
    pub document: DiscoveryDocument,
}

/// SBI client used by tool servers to reach the NRF.
#[derive(Clone)]
pub struct SbiClient {
    http: reqwest::Client,
    api_root: String,
    tracer: Tracer,
}

impl SbiClient {
    /// `http2` selects HTTP/2 with prior knowledge; otherwise HTTP/1.1.
    pub fn new(api_root: &str, http2: bool, tracer: Tracer) -> Result<Self, SbiError> {
        let api_root = build_resource_uri(api_root, NFM_API, NFM_VERSION, "")?;
        let api_root = SbiResourceUri::parse(&api_root)?.api_root;
        let builder = reqwest::Client::builder().no_proxy();
        let builder = if http2 {
            builder.http2_prior_knowledge()
        } else {
            builder.http1_only()
        };
        Ok(Self {
            http: builder.build().map_err(|e| SbiError::Transport(e.to_string()))?,
            api_root,
            tracer,
        })
    }

    pub fn api_root(&self) -> &str {
        &self.api_root
    }

    fn start(&self, operation: &str, endpoint: &str, purpose: &str, tabulated: bool) -> TraceContext {
        self.tracer.request(
            prefix::SBI,
            participants::NRF,
            Hop {
                interface: Interface::SBI,
                operation,
                endpoint,
                purpose,
                tabulated,
            },
        )
    }

    /// `GET {apiRoot}/nnrf-nfm/v1/nf-instances?nf-type=<TYPE>`.
    pub async fn discover(&self, nf_type: &str) -> Result<DiscoveryResponse, SbiError> {
        let uri = build_resource_uri(
            &self.api_root,
            NFM_API,
            NFM_VERSION,
            &format!(
                "nf-instances?nf-type={}",
                url::form_urlencoded::byte_serialize(nf_type.as_bytes()).collect::<String>()
            ),
        )?;
        let ctx = self.start("GET nf-instances", &uri, "Query NF registration state", true);
        let resp = ctx
            .apply(self.http.get(&uri).header(header::ACCEPT, "application/json"))
            .send()
            .await
            .map_err(|e| SbiError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let http_version = format!("{:?}", resp.version());
        let body = resp.text().await.map_err(|e| SbiError::Transport(e.to_string()))?;
        if status != 200 {
            return Err(SbiError::Status { status, detail: body });
        }
        let document = serde_json::from_str(&body).map_err(|e| SbiError::Decode(e.to_string()))?;
        Ok(DiscoveryResponse {
            status,
            http_version,
            body,
            document,
        })
    }

    /// Follows a discovery item href.
    pub async fn profile(&self, href: &str) -> Result<NfProfile, SbiError> {
        let ctx = self.start("GET nf-instance", href, "Retrieve NF profile", true);
        let resp = ctx
            .apply(self.http.get(href).header(header::ACCEPT, "application/json"))
            .send()
            .await
            .map_err(|e| SbiError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp.text().await.map_err(|e| SbiError::Transport(e.to_string()))?;
        if status != 200 {
            return Err(SbiError::Status { status, detail: body });
        }
        serde_json::from_str(&body).map_err(|e| SbiError::Decode(e.to_string()))
    }

    pub async fn register(&self, profile: &NfProfile) -> Result<u16, SbiError> {
        let uri = build_resource_uri(
            &self.api_root,
            NFM_API,
            NFM_VERSION,
            &format!("nf-instances/{}", profile.nf_instance_id),
        )?;
        let ctx = self.start("PUT nf-instance", &uri, "Register NF instance", false);
        let resp = ctx
            .apply(self.http.put(&uri).json(profile))
            .send()
            .await
            .map_err(|e| SbiError::Transport(e.to_string()))?;
        let status = resp.status().as_u16();
        if status >= 400 {
            let detail = resp.text().await.unwrap_or_default();
            return Err(SbiError::Status { status, detail });
        }
        Ok(status)
    }

    pub async fn deregister(&self, nf_instance_id: &str) -> Result<u16, SbiError> {
        let uri = build_resource_uri(
            &self.api_root,
            NFM_API,
            NFM_VERSION,
            &format!("nf-instances/{nf_instance_id}"),
        )?;
        let ctx = self.start("DELETE nf-instance", &uri, "Deregister NF instance", false);
        let resp = ctx
            .apply(self.http.delete(&uri))
            .send()
            .await
            .map_err(|e| SbiError::Transport(e.to_string()))?;
        Ok(resp.status().as_u16())
    }
}
