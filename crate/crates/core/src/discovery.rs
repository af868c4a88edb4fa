// SPDX-License-Identifier: Apache-2.0

//! Service Discovery Module: query documents, the match → filter → rank
//! pipeline, and the request handler behind the HTTP endpoints.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::decimal::Decimal;
use crate::matcher::{self, MatchError};
use crate::ontology::{Ontology, OntologyError};
use crate::publisher::{self, Certificate, PublishError};
use crate::qos::QosAttribute;
use crate::ranker::{
    self, Bound, Feedback, FeedbackError, FeedbackStore, PreferenceWeights, PriorityGroups,
    QosConstraint, RankedService,
};
use crate::registry::{RegistryStore, ResourceType, ServiceRecord, StoreError, TimeSlot};
use crate::wire::{self, format_time, parse_decimal, split_keywords, Seen};
use crate::xml::{
    self, element, empty_element, parse_document, text_element, Element, Fault, XmlError,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscoveryQuery {
    pub name: String,
    pub keywords: BTreeSet<String>,
    pub concept: Option<String>,
    pub resource_type: Option<ResourceType>,
    pub constraints: Vec<QosConstraint>,
    pub weights: PreferenceWeights,
    pub groups: Option<PriorityGroups>,
    pub price_ceiling: Option<Decimal>,
    pub window: Option<TimeSlot>,
    pub threshold: Option<Decimal>,
    pub exact_only: bool,
}

impl DiscoveryQuery {
    /// Name-only query with uniform weights and every other field unset.
    pub fn named(name: impl Into<String>) -> Self {
        DiscoveryQuery {
            name: name.into(),
            keywords: BTreeSet::new(),
            concept: None,
            resource_type: None,
            constraints: Vec::new(),
            weights: PreferenceWeights::uniform(),
            groups: None,
            price_ceiling: None,
            window: None,
            threshold: None,
            exact_only: false,
        }
    }

    pub fn has_subject(&self) -> bool {
        !self.name.trim().is_empty() || !self.keywords.is_empty() || self.concept.is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscoveryStatus {
    Ok,
    NoMatch,
}

impl DiscoveryStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            DiscoveryStatus::Ok => "OK",
            DiscoveryStatus::NoMatch => "NoMatch",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscoveryResult {
    pub status: DiscoveryStatus,
    pub services: Vec<RankedService>,
}

impl DiscoveryResult {
    pub fn no_match() -> Self {
        DiscoveryResult {
            status: DiscoveryStatus::NoMatch,
            services: Vec::new(),
        }
    }
}

/// Service keys surviving each pipeline stage.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StageTrace {
    pub matched: Vec<String>,
    pub filtered: Vec<String>,
    pub ranked: Vec<String>,
}

#[derive(Debug, Error, PartialEq)]
pub enum DiscoveryError {
    #[error(transparent)]
    Match(#[from] MatchError),
}

// ---------------------------------------------------------------------------
// Query documents

/// Canonical query document. `parse_query_xml(&query_to_xml(q)) == q`.
pub fn query_to_xml(q: &DiscoveryQuery) -> String {
    let mut inner = String::new();
    if !q.name.is_empty() {
        inner.push_str(&text_element("ServiceName", &q.name));
    }
    if !q.keywords.is_empty() {
        inner.push_str(&text_element("Keywords", &wire::join_keywords(&q.keywords)));
    }
    if let Some(c) = &q.concept {
        inner.push_str(&text_element("Concept", c));
    }
    if let Some(r) = q.resource_type {
        inner.push_str(&text_element("ResourceType", r.as_str()));
    }
    if !q.constraints.is_empty() {
        let cs: String = q
            .constraints
            .iter()
            .map(|c| {
                let bound = match c.bound {
                    Bound::Min => "min",
                    Bound::Max => "max",
                };
                empty_element(
                    "Constraint",
                    &[("attr", c.attribute.name()), (bound, &c.value.to_string())],
                )
            })
            .collect();
        inner.push_str(&element("Constraints", &[], &cs));
    }
    let ws: String = q
        .weights
        .entries()
        .iter()
        .map(|(a, w)| empty_element("Weight", &[("attr", a.name()), ("value", &w.to_string())]))
        .collect();
    inner.push_str(&element("Preferences", &[], &ws));
    if let Some(g) = &q.groups {
        let gs: String = g
            .groups()
            .iter()
            .map(|set| {
                let names: Vec<&str> = set.iter().map(|a| a.name()).collect();
                text_element("Group", &names.join(","))
            })
            .collect();
        inner.push_str(&element("Groups", &[], &gs));
    }
    if let Some(p) = q.price_ceiling {
        inner.push_str(&text_element("PriceCeiling", &p.to_string()));
    }
    if let Some(w) = &q.window {
        inner.push_str(&empty_element(
            "TimeSlot",
            &[
                ("start", &format_time(&w.start)),
                ("end", &format_time(&w.end)),
            ],
        ));
    }
    if let Some(t) = q.threshold {
        inner.push_str(&text_element("Threshold", &t.to_string()));
    }
    if q.exact_only {
        inner.push_str(&text_element("ExactOnly", "true"));
    }
    element("DiscoveryQuery", &[], &inner)
}

pub fn parse_query_xml(doc: &str) -> Result<DiscoveryQuery, XmlError> {
    query_from_element(&parse_document(doc)?)
}

fn parse_attr_name(name: &str) -> Result<QosAttribute, XmlError> {
    name.trim()
        .parse()
        .map_err(|_| XmlError::UnknownAttribute(name.trim().to_string()))
}

pub fn query_from_element(root: &Element) -> Result<DiscoveryQuery, XmlError> {
    root.expect_name("DiscoveryQuery")?;
    root.only_attrs(&[])?;
    let mut seen = Seen::new();
    let mut q = DiscoveryQuery::named("");
    let mut weights: Option<BTreeMap<QosAttribute, Decimal>> = None;

    for c in &root.children {
        seen.once(&c.name)?;
        if c.name != "Constraints"
            && c.name != "Preferences"
            && c.name != "Groups"
            && c.name != "TimeSlot"
        {
            c.only_attrs(&[])?;
        }
        match c.name.as_str() {
            "ServiceName" => q.name = c.leaf_text()?.trim().to_string(),
            "Keywords" => q.keywords = split_keywords(c.leaf_text()?),
            "Concept" => {
                let v = c.leaf_text()?.trim();
                if v.is_empty() {
                    return Err(XmlError::schema("Concept"));
                }
                q.concept = Some(v.to_string());
            }
            "ResourceType" => {
                q.resource_type = Some(
                    c.leaf_text()?
                        .trim()
                        .parse()
                        .map_err(|_| XmlError::schema("ResourceType"))?,
                )
            }
            "Constraints" => {
                c.only_attrs(&[])?;
                for k in &c.children {
                    k.expect_name("Constraint")?;
                    k.only_attrs(&["attr", "min", "max"])?;
                    k.leaf_text()?;
                    let attr = parse_attr_name(k.required_attr("attr")?)?;
                    let min = k
                        .attr("min")
                        .map(|v| parse_decimal(v, "Constraint"))
                        .transpose()?;
                    let max = k
                        .attr("max")
                        .map(|v| parse_decimal(v, "Constraint"))
                        .transpose()?;
                    if min.is_none() && max.is_none() {
                        return Err(XmlError::schema("Constraint"));
                    }
                    if let Some(v) = min {
                        q.constraints.push(QosConstraint::min(attr, v));
                    }
                    if let Some(v) = max {
                        q.constraints.push(QosConstraint::max(attr, v));
                    }
                }
            }
            "Preferences" => {
                c.only_attrs(&[])?;
                let mut map = BTreeMap::new();
                for w in &c.children {
                    w.expect_name("Weight")?;
                    w.only_attrs(&["attr", "value"])?;
                    w.leaf_text()?;
                    let attr = parse_attr_name(w.required_attr("attr")?)?;
                    let value = parse_decimal(w.required_attr("value")?, "Weight")?;
                    if map.insert(attr, value).is_some() {
                        return Err(XmlError::schema("Weight"));
                    }
                }
                weights = Some(map);
            }
            "Groups" => {
                c.only_attrs(&[])?;
                let mut groups = Vec::new();
                for g in &c.children {
                    g.expect_name("Group")?;
                    g.only_attrs(&[])?;
                    let set = g
                        .leaf_text()?
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(parse_attr_name)
                        .collect::<Result<BTreeSet<_>, _>>()?;
                    groups.push(set);
                }
                q.groups =
                    Some(PriorityGroups::new(groups).map_err(|_| XmlError::schema("Groups"))?);
            }
            "PriceCeiling" => {
                q.price_ceiling = Some(parse_decimal(c.leaf_text()?, "PriceCeiling")?)
            }
            "TimeSlot" => q.window = Some(wire::time_slot_from_element(c)?),
            "Threshold" => {
                let t = parse_decimal(c.leaf_text()?, "Threshold")?;
                if t <= Decimal::ZERO || t > Decimal::ONE {
                    return Err(XmlError::schema("Threshold"));
                }
                q.threshold = Some(t);
            }
            "ExactOnly" => {
                q.exact_only = match c.leaf_text()?.trim() {
                    "" | "true" => true,
                    "false" => false,
                    _ => return Err(XmlError::schema("ExactOnly")),
                }
            }
            other => return Err(XmlError::schema(other)),
        }
    }
    let weights = weights.ok_or_else(|| XmlError::schema("Preferences"))?;
    q.weights = PreferenceWeights::new(weights).map_err(|_| XmlError::schema("Preferences"))?;
    if !q.has_subject() {
        return Err(XmlError::schema("DiscoveryQuery"));
    }
    Ok(q)
}

// ---------------------------------------------------------------------------
// Configuration

#[derive(Debug, Clone, PartialEq)]
pub struct BrokerConfig {
    pub port: u16,
    /// In-memory registry when absent.
    pub snapshot_path: Option<PathBuf>,
    pub ontology_path: PathBuf,
    pub tau: f64,
    pub beta: f64,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config field `{field}`: {reason}")]
    Field { field: String, reason: String },
    #[error("config line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("ontology: {0}")]
    Ontology(#[from] OntologyError),
    #[error("registry: {0}")]
    Store(#[from] StoreError),
    #[error("feedback journal: {0}")]
    Feedback(#[from] FeedbackError),
}

fn field_err(field: &str, reason: impl ToString) -> ConfigError {
    ConfigError::Field {
        field: field.to_string(),
        reason: reason.to_string(),
    }
}

impl BrokerConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::parse(&text)?;
        // relative paths resolve against the config file's directory
        let base = path.parent().unwrap_or(Path::new("."));
        if cfg.ontology_path.is_relative() {
            cfg.ontology_path = base.join(&cfg.ontology_path);
        }
        if let Some(p) = &cfg.snapshot_path {
            if p.is_relative() {
                cfg.snapshot_path = Some(base.join(p));
            }
        }
        Ok(cfg)
    }

    /// `key=value` lines; `#` comments and blank lines ignored.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut port = None;
        let mut snapshot_path = None;
        let mut ontology_path = None;
        let mut tau = matcher::DEFAULT_THRESHOLD;
        let mut beta = ranker::DEFAULT_BETA;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or(ConfigError::Syntax { line: idx + 1 })?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "port" => port = Some(v.parse::<u16>().map_err(|e| field_err("port", e))?),
                "snapshot_path" => {
                    if v.is_empty() {
                        return Err(field_err("snapshot_path", "must not be empty"));
                    }
                    snapshot_path = Some(PathBuf::from(v));
                }
                "ontology_path" => {
                    if v.is_empty() {
                        return Err(field_err("ontology_path", "must not be empty"));
                    }
                    ontology_path = Some(PathBuf::from(v));
                }
                "tau" => {
                    tau = v.parse().map_err(|e| field_err("tau", e))?;
                    if !(tau > 0.0 && tau <= 1.0) {
                        return Err(field_err("tau", "must be in (0, 1]"));
                    }
                }
                "beta" => {
                    beta = v.parse().map_err(|e| field_err("beta", e))?;
                    if !(0.0..=1.0).contains(&beta) {
                        return Err(field_err("beta", "must be in [0, 1]"));
                    }
                }
                other => return Err(field_err(other, "unknown key")),
            }
        }
        Ok(BrokerConfig {
            port: port.ok_or_else(|| field_err("port", "missing"))?,
            snapshot_path,
            ontology_path: ontology_path.ok_or_else(|| field_err("ontology_path", "missing"))?,
            tau,
            beta,
        })
    }
}

pub fn feedback_path_for(snapshot_path: &Path) -> PathBuf {
    let mut s = snapshot_path.as_os_str().to_owned();
    s.push(".feedback");
    PathBuf::from(s)
}

// ---------------------------------------------------------------------------
// Broker

pub struct Broker {
    store: RegistryStore,
    ontology: Ontology,
    feedback: FeedbackStore,
    tau: f64,
    beta: f64,
}

impl fmt::Debug for Broker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Broker")
            .field("store", &self.store)
            .field("concepts", &self.ontology.len())
            .field("tau", &self.tau)
            .field("beta", &self.beta)
            .finish()
    }
}

impl Broker {
    pub fn new(
        store: RegistryStore,
        ontology: Ontology,
        feedback: FeedbackStore,
        tau: f64,
        beta: f64,
    ) -> Self {
        Broker {
            store,
            ontology,
            feedback,
            tau,
            beta,
        }
    }

    /// In-memory broker with default threshold and feedback blend.
    pub fn in_memory(ontology: Ontology) -> Self {
        Self::new(
            RegistryStore::in_memory(),
            ontology,
            FeedbackStore::in_memory(),
            matcher::DEFAULT_THRESHOLD,
            ranker::DEFAULT_BETA,
        )
    }

    pub fn from_config(cfg: &BrokerConfig) -> Result<Self, ConfigError> {
        let ontology = Ontology::load(&cfg.ontology_path).map_err(|e| match e {
            OntologyError::Io(io) => field_err("ontology_path", io),
            other => ConfigError::Ontology(other),
        })?;
        let (store, feedback) = match &cfg.snapshot_path {
            Some(p) => (
                RegistryStore::open(p)?,
                FeedbackStore::open(feedback_path_for(p))?,
            ),
            None => (RegistryStore::in_memory(), FeedbackStore::in_memory()),
        };
        Ok(Self::new(store, ontology, feedback, cfg.tau, cfg.beta))
    }

    pub fn store(&self) -> &RegistryStore {
        &self.store
    }

    pub fn ontology(&self) -> &Ontology {
        &self.ontology
    }

    pub fn feedback(&self) -> &FeedbackStore {
        &self.feedback
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Records without a concept are filed under the ontology root.
    pub fn publish(
        &self,
        mut record: ServiceRecord,
    ) -> Result<(String, Certificate), PublishError> {
        if record.concept.trim().is_empty() {
            record.concept = self.ontology.root().to_string();
        }
        publisher::publish(&self.store, Some(&self.ontology), record)
    }

    pub fn get(&self, key: &str) -> Option<ServiceRecord> {
        self.store.get(key)
    }

    pub fn record_feedback(&self, fb: Feedback) -> Result<usize, FeedbackError> {
        self.feedback.record_feedback(fb, &self.store)
    }

    pub fn discover(&self, query: &DiscoveryQuery) -> Result<DiscoveryResult, DiscoveryError> {
        self.discover_traced(query).map(|(r, _)| r)
    }

    /// Runs match → filter → rank, reporting the keys that survive each stage.
    pub fn discover_traced(
        &self,
        query: &DiscoveryQuery,
    ) -> Result<(DiscoveryResult, StageTrace), DiscoveryError> {
        let tau = query.threshold.map_or(self.tau, Decimal::to_f64);
        let matched = matcher::match_services(query, &self.store, &self.ontology, tau, &[])?;
        let mut trace = StageTrace {
            matched: keys(matched.iter().map(|c| &c.record)),
            ..StageTrace::default()
        };
        if matched.is_empty() {
            return Ok((DiscoveryResult::no_match(), trace));
        }
        let filtered = ranker::filter_by_constraints(
            matched,
            &query.constraints,
            query.price_ceiling,
            query.window.as_ref(),
        );
        trace.filtered = keys(filtered.iter().map(|c| &c.record));
        if filtered.is_empty() {
            return Ok((DiscoveryResult::no_match(), trace));
        }
        let ranked = ranker::rank_services(
            filtered,
            &query.weights,
            query.groups.as_ref(),
            &self.feedback,
            self.beta,
        )
        .expect("filtered set is non-empty");
        trace.ranked = keys(ranked.iter().map(|r| &r.record));
        Ok((
            DiscoveryResult {
                status: DiscoveryStatus::Ok,
                services: ranked,
            },
            trace,
        ))
    }

    /// Flushes journals and folds the registry journal into the snapshot.
    pub fn shutdown(&self) -> Result<(), StoreError> {
        self.store.checkpoint()?;
        self.feedback.flush().map_err(|e| match e {
            FeedbackError::Store(s) => s,
            other => StoreError::Io(std::io::Error::other(other.to_string())),
        })
    }

    /// Transport-independent request handling for every endpoint.
    pub fn handle(&self, method: &str, target: &str, body: &str) -> Response {
        let (path, query_string) = target.split_once('?').unwrap_or((target, ""));
        match (method, path) {
            ("POST", "/publish") => self.handle_publish(body),
            ("POST", "/discover") => {
                let debug = query_string
                    .split('&')
                    .any(|kv| kv == "debug=1" || kv == "debug=true" || kv == "debug");
                self.handle_discover(body, debug)
            }
            ("POST", "/feedback") => self.handle_feedback(body),
            ("GET", "/health") => Response::ok(xml::envelope(&empty_element(
                "Health",
                &[
                    ("status", "ok"),
                    ("services", &self.store.len().to_string()),
                ],
            ))),
            ("GET", p) if p.starts_with("/services/") => {
                let raw = &p["/services/".len()..];
                let key = percent_decode(raw);
                match self.store.get(&key) {
                    Some(r) => Response::ok(xml::envelope(&wire::record_to_xml(&r))),
                    None => Response::fault(404, "NotFound", format!("no service `{key}`")),
                }
            }
            (_, "/publish" | "/discover" | "/feedback" | "/health") => {
                Response::fault(405, "MethodNotAllowed", format!("{method} {path}"))
            }
            (_, p) if p.starts_with("/services/") => {
                Response::fault(405, "MethodNotAllowed", format!("{method} {path}"))
            }
            _ => Response::fault(404, "NotFound", format!("no endpoint {path}")),
        }
    }

    fn handle_publish(&self, body: &str) -> Response {
        let record = match xml::open_envelope(body).and_then(|el| wire::record_from_element(&el)) {
            Ok(r) => r,
            Err(e) => return Response::xml_error(&e),
        };
        match self.publish(record) {
            Ok((_, cert)) => Response::ok(xml::envelope(&wire::certificate_to_xml(&cert))),
            Err(PublishError::Store(StoreError::DuplicateKey(k))) => Response::fault(
                409,
                "DuplicateKey",
                format!("service `{k}` is already registered"),
            ),
            Err(e @ PublishError::InvalidQos(_)) => {
                Response::fault(400, "InvalidQoS", e.to_string())
            }
            Err(e @ PublishError::UnknownConcept(_)) => {
                Response::fault(400, "UnknownConcept", e.to_string())
            }
            Err(PublishError::Store(StoreError::Io(e))) => {
                Response::fault(500, "StorageError", e.to_string())
            }
            Err(PublishError::Store(e)) => Response::fault(400, "InvalidRecord", e.to_string()),
        }
    }

    fn handle_discover(&self, body: &str, debug: bool) -> Response {
        let query = match xml::open_envelope(body).and_then(|el| query_from_element(&el)) {
            Ok(q) => q,
            Err(e) => return Response::xml_error(&e),
        };
        match self.discover_traced(&query) {
            Ok((result, trace)) => Response::ok(xml::envelope(&wire::result_to_xml(
                &result,
                debug.then_some(&trace),
            ))),
            Err(DiscoveryError::Match(e)) => {
                let code = match e {
                    MatchError::EmptyQuery => "EmptyQuery",
                    MatchError::InvalidThreshold(_) => "SchemaViolation",
                    MatchError::UnknownConcept(_) => "UnknownConcept",
                    MatchError::UnknownAttribute(_) => "UnknownAttribute",
                };
                Response::fault(400, code, e.to_string())
            }
        }
    }

    fn handle_feedback(&self, body: &str) -> Response {
        let fb = match xml::open_envelope(body).and_then(|el| wire::feedback_from_element(&el)) {
            Ok(f) => f,
            Err(e) => return Response::xml_error(&e),
        };
        let key = fb.service_key.clone();
        match self.record_feedback(fb) {
            Ok(count) => {
                let mean = ranker::RatingSource::mean_rating(&self.feedback, &key).unwrap_or(0.0);
                Response::ok(xml::envelope(&empty_element(
                    "FeedbackAccepted",
                    &[
                        ("serviceKey", &key),
                        ("count", &count.to_string()),
                        ("mean", &wire::format_score(mean)),
                    ],
                )))
            }
            Err(e @ FeedbackError::UnknownService(_)) => {
                Response::fault(404, "UnknownService", e.to_string())
            }
            Err(e @ FeedbackError::InvalidRating(_)) => {
                Response::fault(400, "InvalidRating", e.to_string())
            }
            Err(e) => Response::fault(500, "StorageError", e.to_string()),
        }
    }
}

fn keys<'a>(records: impl Iterator<Item = &'a ServiceRecord>) -> Vec<String> {
    records.map(|r| r.service_key.clone()).collect()
}

fn percent_decode(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' && i + 2 < bytes.len() {
            let hex = std::str::from_utf8(&bytes[i + 1..i + 3]).unwrap_or("");
            if let Ok(b) = u8::from_str_radix(hex, 16) {
                out.push(b);
                i += 3;
                continue;
            }
        }
        out.push(bytes[i]);
        i += 1;
    }
    String::from_utf8_lossy(&out).into_owned()
}

/// Status code plus XML body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub status: u16,
    pub body: String,
}

impl Response {
    pub fn ok(body: String) -> Self {
        Response { status: 200, body }
    }

    pub fn fault(status: u16, code: &str, reason: impl Into<String>) -> Self {
        Response {
            status,
            body: xml::envelope(&Fault::new(code, reason).to_xml()),
        }
    }

    pub fn xml_error(e: &XmlError) -> Self {
        Self::fault(400, e.code(), e.to_string())
    }
}
