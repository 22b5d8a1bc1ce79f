//! SBI resource URIs of the form `{apiRoot}/<apiName>/<apiVersion>/<apiSpecificResourceUriPart>`.

use std::fmt;

use thiserror::Error;
use url::Url;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UriError {
    #[error("invalid apiRoot {0:?}: expected http(s)://host[:port]")]
    InvalidApiRoot(String),
    #[error("apiName must be non-empty and contain no '/'")]
    InvalidApiName,
    #[error("apiVersion must be non-empty and contain no '/'")]
    InvalidApiVersion,
    #[error("not an SBI resource URI: {0:?}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SbiResourceUri {
    pub api_root: String,
    pub api_name: String,
    pub api_version: String,
    pub resource_part: String,
}

/// Normalizes an apiRoot to `scheme://authority` without a trailing slash.
fn normalize_api_root(api_root: &str) -> Result<String, UriError> {
    let invalid = || UriError::InvalidApiRoot(api_root.to_string());
    let url = Url::parse(api_root).map_err(|_| invalid())?;
    if !matches!(url.scheme(), "http" | "https") {
        return Err(invalid());
    }
    url.host_str().filter(|h| !h.is_empty()).ok_or_else(invalid)?;
    if url.path() != "/" && !url.path().is_empty() {
        return Err(invalid());
    }
    if url.query().is_some() || url.fragment().is_some() {
        return Err(invalid());
    }
    // keep the authority exactly as written (Url drops default ports)
    let rest = &api_root[url.scheme().len() + 3..];
    let authority = rest.trim_end_matches('/');
    if authority.is_empty() || authority.contains(['/', '?', '#']) {
        return Err(invalid());
    }
    Ok(format!("{}://{}", url.scheme(), authority))
}

impl SbiResourceUri {
    pub fn new(
        api_root: &str,
        api_name: &str,
        api_version: &str,
        resource_part: &str,
    ) -> Result<Self, UriError> {
        let api_root = normalize_api_root(api_root)?;
        if api_name.is_empty() || api_name.contains('/') {
            return Err(UriError::InvalidApiName);
        }
        if api_version.is_empty() || api_version.contains('/') {
            return Err(UriError::InvalidApiVersion);
        }
        Ok(Self {
            api_root,
            api_name: api_name.to_string(),
            api_version: api_version.to_string(),
            resource_part: resource_part.trim_start_matches('/').to_string(),
        })
    }

    /// Splits a rendered URI back into its four components.
    pub fn parse(uri: &str) -> Result<Self, UriError> {
        let malformed = || UriError::Malformed(uri.to_string());
        let scheme_end = uri.find("://").ok_or_else(malformed)?;
        let after = &uri[scheme_end + 3..];
        let authority_end = after.find('/').ok_or_else(malformed)?;
        let api_root = &uri[..scheme_end + 3 + authority_end];
        let path = &after[authority_end + 1..];
        let mut parts = path.splitn(3, '/');
        let api_name = parts.next().filter(|s| !s.is_empty()).ok_or_else(malformed)?;
        let api_version = parts.next().ok_or_else(malformed)?;
        let resource_part = parts.next().unwrap_or("");
        Self::new(api_root, api_name, api_version, resource_part)
    }

    /// `/apiName/apiVersion/resource`, as sent on the `:path` pseudo-header.
    pub fn path_and_query(&self) -> String {
        format!("/{}/{}/{}", self.api_name, self.api_version, self.resource_part)
    }
}

impl fmt::Display for SbiResourceUri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.api_root, self.path_and_query())
    }
}

pub fn build_resource_uri(
    api_root: &str,
    api_name: &str,
    api_version: &str,
    resource_part: &str,
) -> Result<String, UriError> {
    SbiResourceUri::new(api_root, api_name, api_version, resource_part).map(|u| u.to_string())
}
