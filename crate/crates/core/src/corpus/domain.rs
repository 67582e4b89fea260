//! Registered-domain (eTLD+1) extraction for cited URLs.

use url::{Host, Url};

use crate::error::{Error, Result};

/// Resolves the registered domain of an absolute http(s) URL.
///
/// The host is lowercased and a single leading `www.` label is removed before
/// the public-suffix lookup. Hosts that match no suffix rule fall back to
/// their last two labels.
pub fn extract_domain(url: &str) -> Result<String> {
    let malformed = |reason: &str| Error::MalformedUrl {
        url: url.to_string(),
        reason: reason.to_string(),
    };
    let parsed = Url::parse(url.trim()).map_err(|e| malformed(&e.to_string()))?;
    if !matches!(parsed.scheme(), "http" | "https") {
        return Err(malformed("scheme must be http or https"));
    }
    let host = match parsed.host() {
        Some(Host::Domain(h)) => h.to_ascii_lowercase(),
        Some(Host::Ipv4(_)) | Some(Host::Ipv6(_)) => return Err(Error::IpHost(url.to_string())),
        None => return Err(malformed("missing host")),
    };
    let host = host.trim_end_matches('.');
    let host = host.strip_prefix("www.").unwrap_or(host);
    if host.is_empty() || host.split('.').any(str::is_empty) {
        return Err(malformed("empty host label"));
    }
    if !host.contains('.') {
        return Err(malformed("host has a single label"));
    }

    let domain = match psl::domain_str(host) {
        Some(d) => d.to_string(),
        None => last_two_labels(host),
    };
    Ok(domain)
}

fn last_two_labels(host: &str) -> String {
    let labels: Vec<&str> = host.rsplitn(3, '.').collect();
    format!("{}.{}", labels[1], labels[0])
}
