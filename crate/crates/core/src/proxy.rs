// SPDX-License-Identifier: Apache-2.0

//! Consumer-side service proxy.
//!
//! The proxy caches discovery results (keyed by a digest of the canonical
//! query document) and service contracts, and runs data-free methods such as
//! tip calculation in-process. Every request that leaves the process goes
//! through a [`Transport`], so network calls can be counted exactly.

use std::collections::{BTreeMap, HashMap};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, RwLock};
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::decimal::Decimal;
use crate::discovery::{query_to_xml, Broker, DiscoveryQuery, DiscoveryResult, StageTrace};
use crate::registry::ServiceRecord;
use crate::wire;
use crate::xml::{self, element, empty_element, Element, Fault, XmlError};

pub const DEFAULT_TTL: Duration = Duration::from_secs(60);
pub const ENDPOINT_ENV: &str = "WSCR_ENDPOINT";
pub const DEFAULT_ENDPOINT: &str = "http://127.0.0.1:8080";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportResponse {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot reach {url}: {reason}")]
pub struct TransportError {
    pub url: String,
    pub reason: String,
}

/// One request/response exchange with a remote party.
pub trait Transport: Send + Sync {
    fn send(
        &self,
        method: &str,
        url: &str,
        body: &str,
    ) -> Result<TransportResponse, TransportError>;
}

impl<T: Transport + ?Sized> Transport for &T {
    fn send(
        &self,
        method: &str,
        url: &str,
        body: &str,
    ) -> Result<TransportResponse, TransportError> {
        (**self).send(method, url, body)
    }
}

impl<T: Transport + ?Sized> Transport for Arc<T> {
    fn send(
        &self,
        method: &str,
        url: &str,
        body: &str,
    ) -> Result<TransportResponse, TransportError> {
        (**self).send(method, url, body)
    }
}

/// Wraps a transport and counts every request it forwards, including failed
/// ones.
pub struct CountingTransport<T> {
    inner: T,
    requests: AtomicU64,
}

impl<T> CountingTransport<T> {
    pub fn new(inner: T) -> Self {
        CountingTransport {
            inner,
            requests: AtomicU64::new(0),
        }
    }

    pub fn requests(&self) -> u64 {
        self.requests.load(Ordering::SeqCst)
    }

    pub fn inner(&self) -> &T {
        &self.inner
    }
}

impl<T: Transport> Transport for CountingTransport<T> {
    fn send(
        &self,
        method: &str,
        url: &str,
        body: &str,
    ) -> Result<TransportResponse, TransportError> {
        self.requests.fetch_add(1, Ordering::SeqCst);
        self.inner.send(method, url, body)
    }
}

/// Dispatches requests for `base` straight into a broker, without sockets.
pub struct LoopbackTransport {
    base: String,
    broker: Arc<Broker>,
}

impl LoopbackTransport {
    pub fn new(base: impl Into<String>, broker: Arc<Broker>) -> Self {
        LoopbackTransport {
            base: base.into().trim_end_matches('/').to_string(),
            broker,
        }
    }
}

impl Transport for LoopbackTransport {
    fn send(
        &self,
        method: &str,
        url: &str,
        body: &str,
    ) -> Result<TransportResponse, TransportError> {
        let target = url.strip_prefix(&self.base).filter(|t| t.starts_with('/'));
        match target {
            Some(t) => {
                let r = self.broker.handle(method, t, body);
                Ok(TransportResponse {
                    status: r.status,
                    body: r.body,
                })
            }
            None => Err(TransportError {
                url: url.to_string(),
                reason: "no route".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodSignature {
    pub name: String,
    pub params: Vec<String>,
    pub local_capable: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceContract {
    pub service_key: String,
    pub name: String,
    pub methods: Vec<MethodSignature>,
    pub endpoint: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContractError {
    #[error("method `{0}` is declared twice")]
    DuplicateMethod(String),
    #[error("description line {line}: {reason}")]
    BadLine { line: usize, reason: String },
}

impl ServiceContract {
    /// Reads the contract carried in a record's description:
    ///
    /// ```text
    /// endpoint: https://svc.example.com/api
    /// method: tip(amount,rate) local
    /// method: quote(symbol)
    /// ```
    ///
    /// Other lines are free text. Without an `endpoint:` line the provider
    /// website is used.
    pub fn from_record(record: &ServiceRecord) -> Result<Self, ContractError> {
        let mut methods: Vec<MethodSignature> = Vec::new();
        let mut endpoint = None;
        for (idx, line) in record.description.lines().enumerate() {
            let line = line.trim();
            let bad = |reason: &str| ContractError::BadLine {
                line: idx + 1,
                reason: reason.to_string(),
            };
            if let Some(rest) = line.strip_prefix("endpoint:") {
                endpoint = Some(rest.trim().to_string());
            } else if let Some(rest) = line.strip_prefix("method:") {
                let rest = rest.trim();
                let (sig, flag) = match rest.rsplit_once(')') {
                    Some((sig, flag)) => (sig, flag.trim()),
                    None => return Err(bad("expected name(params)")),
                };
                let local_capable = match flag {
                    "" => false,
                    "local" => true,
                    _ => return Err(bad("unknown method flag")),
                };
                let (name, params) = sig
                    .split_once('(')
                    .ok_or_else(|| bad("expected name(params)"))?;
                let name = name.trim();
                if name.is_empty() {
                    return Err(bad("empty method name"));
                }
                if methods.iter().any(|m| m.name == name) {
                    return Err(ContractError::DuplicateMethod(name.to_string()));
                }
                methods.push(MethodSignature {
                    name: name.to_string(),
                    params: params
                        .split(',')
                        .map(str::trim)
                        .filter(|p| !p.is_empty())
                        .map(str::to_string)
                        .collect(),
                    local_capable,
                });
            }
        }
        Ok(ServiceContract {
            service_key: record.service_key.clone(),
            name: record.name.clone(),
            methods,
            endpoint: endpoint.unwrap_or_else(|| record.provider.website.clone()),
        })
    }

    pub fn method(&self, name: &str) -> Option<&MethodSignature> {
        self.methods.iter().find(|m| m.name == name)
    }
}

#[derive(Debug, Error)]
pub enum ProxyError {
    #[error("RegistryUnreachable: {0}")]
    RegistryUnreachable(TransportError),
    #[error("EndpointUnreachable: {0}")]
    EndpointUnreachable(TransportError),
    #[error("UnknownMethod: `{0}` is not part of the service contract")]
    UnknownMethod(String),
    #[error("method `{0}` is marked local but the proxy has no local implementation")]
    NoLocalImplementation(String),
    #[error("missing argument `{0}`")]
    MissingArgument(String),
    #[error("argument `{name}`: {reason}")]
    BadArgument { name: String, reason: String },
    #[error("{code} (HTTP {status}): {reason}")]
    Remote {
        status: u16,
        code: String,
        reason: String,
    },
    #[error("unreadable response: {0}")]
    BadResponse(String),
    #[error("invalid contract: {0}")]
    Contract(#[from] ContractError),
}

impl ProxyError {
    /// True for failures of the network path rather than of the request.
    pub fn is_transport(&self) -> bool {
        matches!(
            self,
            ProxyError::RegistryUnreachable(_) | ProxyError::EndpointUnreachable(_)
        )
    }
}

/// Hex SHA-256 of the canonical query document.
pub fn query_fingerprint(query: &DiscoveryQuery) -> String {
    hex::encode(Sha256::digest(query_to_xml(query).as_bytes()))
}

struct CacheEntry {
    xml: String,
    result: DiscoveryResult,
    fetched_at: Instant,
}

pub struct ProxyCache {
    entries: RwLock<HashMap<String, CacheEntry>>,
    contracts: RwLock<BTreeMap<String, ServiceContract>>,
    ttl: Duration,
}

impl ProxyCache {
    pub fn new(ttl: Duration) -> Self {
        ProxyCache {
            entries: RwLock::new(HashMap::new()),
            contracts: RwLock::new(BTreeMap::new()),
            ttl,
        }
    }

    pub fn ttl(&self) -> Duration {
        self.ttl
    }

    fn fresh(&self, fingerprint: &str) -> Option<(DiscoveryResult, String)> {
        let entries = self.entries.read().expect("cache lock poisoned");
        entries
            .get(fingerprint)
            .filter(|e| e.fetched_at.elapsed() < self.ttl)
            .map(|e| (e.result.clone(), e.xml.clone()))
    }

    fn insert(&self, fingerprint: String, result: DiscoveryResult, xml: String) {
        let mut entries = self.entries.write().expect("cache lock poisoned");
        entries.insert(
            fingerprint,
            CacheEntry {
                xml,
                result,
                fetched_at: Instant::now(),
            },
        );
    }

    pub fn contract(&self, key: &str) -> Option<ServiceContract> {
        self.contracts
            .read()
            .expect("cache lock poisoned")
            .get(key)
            .cloned()
    }

    fn insert_contract(&self, contract: ServiceContract) {
        self.contracts
            .write()
            .expect("cache lock poisoned")
            .insert(contract.service_key.clone(), contract);
    }
}

/// Discovery response together with its exact wire bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct CachedDiscovery {
    pub result: DiscoveryResult,
    /// Canonical `<DiscoveryResult>` document of the registry response.
    pub xml: String,
    pub served_from_cache: bool,
}

pub struct ServiceProxy<T> {
    transport: T,
    registry: String,
    cache: ProxyCache,
    rate_tables: RwLock<HashMap<String, BTreeMap<String, Decimal>>>,
}

fn check_response(resp: TransportResponse) -> Result<Element, ProxyError> {
    let payload = xml::open_envelope(&resp.body)
        .map_err(|e| ProxyError::BadResponse(format!("HTTP {}: {e}", resp.status)))?;
    if payload.name == "Fault" {
        let fault =
            Fault::from_element(&payload).map_err(|e| ProxyError::BadResponse(e.to_string()))?;
        return Err(ProxyError::Remote {
            status: resp.status,
            code: fault.code,
            reason: fault.reason,
        });
    }
    if resp.status != 200 {
        return Err(ProxyError::BadResponse(format!(
            "HTTP {} without fault",
            resp.status
        )));
    }
    Ok(payload)
}

fn bad_response(e: XmlError) -> ProxyError {
    ProxyError::BadResponse(e.to_string())
}

fn arg(args: &BTreeMap<String, String>, name: &str) -> Result<Decimal, ProxyError> {
    let raw = args
        .get(name)
        .ok_or_else(|| ProxyError::MissingArgument(name.to_string()))?;
    raw.parse()
        .map_err(|e: crate::decimal::DecimalError| ProxyError::BadArgument {
            name: name.to_string(),
            reason: e.to_string(),
        })
}

impl<T: Transport> ServiceProxy<T> {
    pub fn new(transport: T, registry: impl Into<String>, ttl: Duration) -> Self {
        ServiceProxy {
            transport,
            registry: registry.into().trim_end_matches('/').to_string(),
            cache: ProxyCache::new(ttl),
            rate_tables: RwLock::new(HashMap::new()),
        }
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    pub fn cache(&self) -> &ProxyCache {
        &self.cache
    }

    pub fn registry_url(&self) -> &str {
        &self.registry
    }

    fn registry_call(&self, method: &str, path: &str, body: &str) -> Result<Element, ProxyError> {
        let url = format!("{}{}", self.registry, path);
        let resp = self
            .transport
            .send(method, &url, body)
            .map_err(ProxyError::RegistryUnreachable)?;
        check_response(resp)
    }

    fn remember_contracts(&self, result: &DiscoveryResult) {
        for s in &result.services {
            if let Ok(c) = ServiceContract::from_record(&s.record) {
                self.cache.insert_contract(c);
            }
        }
    }

    /// Serves a fresh cached result when present; otherwise asks the
    /// registry and caches the answer.
    pub fn discover_cached(&self, query: &DiscoveryQuery) -> Result<CachedDiscovery, ProxyError> {
        let fp = query_fingerprint(query);
        if let Some((result, xml)) = self.cache.fresh(&fp) {
            return Ok(CachedDiscovery {
                result,
                xml,
                served_from_cache: true,
            });
        }
        let (result, _, xml) = self.discover_remote(query, false)?;
        self.cache.insert(fp, result.clone(), xml.clone());
        Ok(CachedDiscovery {
            result,
            xml,
            served_from_cache: false,
        })
    }

    /// Always asks the registry; never consults or fills the result cache.
    pub fn discover_remote(
        &self,
        query: &DiscoveryQuery,
        debug: bool,
    ) -> Result<(DiscoveryResult, Option<StageTrace>, String), ProxyError> {
        let path = if debug {
            "/discover?debug=1"
        } else {
            "/discover"
        };
        let payload = self.registry_call("POST", path, &xml::envelope(&query_to_xml(query)))?;
        let (result, stages) = wire::result_from_element(&payload).map_err(bad_response)?;
        self.remember_contracts(&result);
        let xml = wire::result_to_xml(&result, stages.as_ref());
        Ok((result, stages, xml))
    }

    pub fn publish(
        &self,
        record: &ServiceRecord,
    ) -> Result<crate::publisher::Certificate, ProxyError> {
        let payload = self.registry_call(
            "POST",
            "/publish",
            &xml::envelope(&wire::record_to_xml(record)),
        )?;
        wire::certificate_from_element(&payload).map_err(bad_response)
    }

    /// Returns `(count, mean)` for the service after the rating is accepted.
    pub fn feedback(&self, fb: &crate::ranker::Feedback) -> Result<(usize, String), ProxyError> {
        let payload = self.registry_call(
            "POST",
            "/feedback",
            &xml::envelope(&wire::feedback_to_xml(fb)),
        )?;
        payload
            .expect_name("FeedbackAccepted")
            .map_err(bad_response)?;
        let count = payload
            .attr("count")
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| ProxyError::BadResponse("FeedbackAccepted without count".into()))?;
        Ok((count, payload.attr("mean").unwrap_or_default().to_string()))
    }

    pub fn get_service(&self, key: &str) -> Result<ServiceRecord, ProxyError> {
        let encoded: String = key
            .bytes()
            .map(|b| {
                if b.is_ascii_alphanumeric() || b"-._~".contains(&b) {
                    (b as char).to_string()
                } else {
                    format!("%{b:02X}")
                }
            })
            .collect();
        let payload = self.registry_call("GET", &format!("/services/{encoded}"), "")?;
        wire::record_from_element(&payload).map_err(bad_response)
    }

    /// Cached contract, fetched from the registry on first use.
    pub fn contract(&self, key: &str) -> Result<ServiceContract, ProxyError> {
        if let Some(c) = self.cache.contract(key) {
            return Ok(c);
        }
        let record = self.get_service(key)?;
        let contract = ServiceContract::from_record(&record)?;
        self.cache.insert_contract(contract.clone());
        Ok(contract)
    }

    /// Invokes `method`. Local-capable methods run in-process; the rest are
    /// posted to the contract endpoint.
    pub fn invoke(
        &self,
        contract: &ServiceContract,
        method: &str,
        args: &BTreeMap<String, String>,
    ) -> Result<String, ProxyError> {
        let sig = contract
            .method(method)
            .ok_or_else(|| ProxyError::UnknownMethod(method.to_string()))?;
        if sig.local_capable {
            return self.invoke_local(contract, sig, args);
        }
        let args_xml: String = sig
            .params
            .iter()
            .filter_map(|p| args.get(p).map(|v| (p, v)))
            .map(|(p, v)| empty_element("Arg", &[("name", p), ("value", v)]))
            .collect();
        let body = xml::envelope(&element("Invoke", &[("method", method)], &args_xml));
        let url = format!("{}/invoke", contract.endpoint.trim_end_matches('/'));
        let resp = self
            .transport
            .send("POST", &url, &body)
            .map_err(ProxyError::EndpointUnreachable)?;
        let payload = check_response(resp)?;
        payload.expect_name("InvokeResult").map_err(bad_response)?;
        payload
            .attr("value")
            .map(str::to_string)
            .ok_or_else(|| ProxyError::BadResponse("InvokeResult without value".into()))
    }

    fn invoke_local(
        &self,
        contract: &ServiceContract,
        sig: &MethodSignature,
        args: &BTreeMap<String, String>,
    ) -> Result<String, ProxyError> {
        let overflow = |name: &str| ProxyError::BadArgument {
            name: name.to_string(),
            reason: "result out of range".into(),
        };
        match sig.name.as_str() {
            "tip" => {
                let amount = arg(args, "amount")?;
                let rate = arg(args, "rate")?;
                Ok(amount
                    .checked_mul(rate)
                    .ok_or_else(|| overflow("amount"))?
                    .to_string())
            }
            "convert" => {
                let amount = arg(args, "amount")?;
                let currency = args
                    .get("currency")
                    .ok_or_else(|| ProxyError::MissingArgument("currency".into()))?;
                let rate = self.rate(contract, currency)?;
                Ok(amount
                    .checked_mul(rate)
                    .ok_or_else(|| overflow("amount"))?
                    .to_string())
            }
            other => Err(ProxyError::NoLocalImplementation(other.to_string())),
        }
    }

    /// Exchange rate from the endpoint's table, downloaded once per endpoint.
    fn rate(&self, contract: &ServiceContract, currency: &str) -> Result<Decimal, ProxyError> {
        let endpoint = contract.endpoint.trim_end_matches('/').to_string();
        let cached = self
            .rate_tables
            .read()
            .expect("rate table lock poisoned")
            .get(&endpoint)
            .map(|t| t.get(currency).copied());
        let found = match cached {
            Some(hit) => hit,
            None => {
                let url = format!("{endpoint}/rates");
                let resp = self
                    .transport
                    .send("GET", &url, "")
                    .map_err(ProxyError::EndpointUnreachable)?;
                let table = parse_rate_table(&check_response(resp)?)?;
                let hit = table.get(currency).copied();
                self.rate_tables
                    .write()
                    .expect("rate table lock poisoned")
                    .insert(endpoint, table);
                hit
            }
        };
        found.ok_or_else(|| ProxyError::BadArgument {
            name: "currency".into(),
            reason: format!("no rate for `{currency}`"),
        })
    }
}

/// `<Rates><Rate currency="EUR" value="0.9"/>…</Rates>`
pub fn parse_rate_table(el: &Element) -> Result<BTreeMap<String, Decimal>, ProxyError> {
    el.expect_name("Rates").map_err(bad_response)?;
    el.children
        .iter()
        .map(|r| {
            r.expect_name("Rate")?;
            let cur = r.required_attr("currency")?.to_string();
            let value = wire::parse_decimal(r.required_attr("value")?, "Rate")?;
            Ok((cur, value))
        })
        .collect::<Result<_, XmlError>>()
        .map_err(bad_response)
}

pub fn rate_table_to_xml(table: &BTreeMap<String, Decimal>) -> String {
    let inner: String = table
        .iter()
        .map(|(c, v)| empty_element("Rate", &[("currency", c), ("value", &v.to_string())]))
        .collect();
    element("Rates", &[], &inner)
}
