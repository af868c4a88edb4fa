// SPDX-License-Identifier: Apache-2.0

//! Service Name Matching Block.
//!
//! Every stored record is scored on three channels (exact normalized name,
//! keyword Jaccard, ontology similarity of concepts); the best channel is the
//! record's name similarity. Records at or above the threshold that also pass
//! the resource-type and numeric gates become candidates.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use thiserror::Error;

use crate::discovery::DiscoveryQuery;
use crate::ontology::{self, numeric_match, NumericRequirement, Ontology};
use crate::qos::QosAttribute;
use crate::registry::{normalize_name, RegistryStore, ServiceRecord};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MatchReason {
    Exact,
    Keyword,
    Ontology,
}

impl MatchReason {
    pub fn as_str(self) -> &'static str {
        match self {
            MatchReason::Exact => "Exact",
            MatchReason::Keyword => "Keyword",
            MatchReason::Ontology => "Ontology",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchCandidate {
    pub record: ServiceRecord,
    pub name_similarity: f64,
    pub match_reason: MatchReason,
}

#[derive(Debug, Error, PartialEq)]
pub enum MatchError {
    #[error("EmptyQuery: query needs a service name, keywords, or a concept")]
    EmptyQuery,
    #[error("threshold {0} is outside (0, 1]")]
    InvalidThreshold(f64),
    #[error("UnknownConcept: `{0}`")]
    UnknownConcept(String),
    #[error("UnknownAttribute: `{0}`")]
    UnknownAttribute(String),
}

/// Jaccard index; two empty sets score 0.
pub fn token_similarity(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

fn passes_gates(
    query: &DiscoveryQuery,
    record: &ServiceRecord,
    requirements: &[(QosAttribute, &NumericRequirement)],
) -> bool {
    if let Some(required) = query.resource_type {
        if !ontology::compatible(required, record.resource_type) {
            return false;
        }
    }
    requirements
        .iter()
        .all(|(attr, req)| numeric_match(req, record.qos.get(*attr)))
}

/// Best channel score for one record and the channel that produced it.
fn score(
    query: &DiscoveryQuery,
    wanted_name: &str,
    record: &ServiceRecord,
    ontology: &Ontology,
) -> (f64, MatchReason) {
    let exact: f64 = if !wanted_name.is_empty() && normalize_name(&record.name) == wanted_name {
        1.0
    } else {
        0.0
    };
    let keyword = token_similarity(&query.keywords, &record.keywords);
    let concept = match &query.concept {
        // records whose concept is outside the loaded taxonomy score 0 here
        Some(qc) => ontology
            .concept_similarity(qc, &record.concept)
            .unwrap_or(0.0),
        None => 0.0,
    };
    let best = exact.max(keyword).max(concept);
    let reason = if exact == best {
        MatchReason::Exact
    } else if keyword == best {
        MatchReason::Keyword
    } else {
        MatchReason::Ontology
    };
    (best, reason)
}

fn candidate_order(a: &MatchCandidate, b: &MatchCandidate) -> Ordering {
    b.name_similarity
        .total_cmp(&a.name_similarity)
        .then_with(|| a.record.service_key.cmp(&b.record.service_key))
}

/// Candidate set for `query`, sorted by descending similarity then key.
///
/// `requirements` are interval checks on raw QoS fields, named by attribute.
/// When `query.exact_only` is set only the registry's exact-name lookup is
/// consulted.
pub fn match_services(
    query: &DiscoveryQuery,
    store: &RegistryStore,
    ontology: &Ontology,
    threshold: f64,
    requirements: &[NumericRequirement],
) -> Result<Vec<MatchCandidate>, MatchError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(MatchError::InvalidThreshold(threshold));
    }
    let wanted_name = normalize_name(&query.name);
    if wanted_name.is_empty() && query.keywords.is_empty() && query.concept.is_none() {
        return Err(MatchError::EmptyQuery);
    }
    if let Some(qc) = &query.concept {
        if !ontology.contains(qc) {
            return Err(MatchError::UnknownConcept(qc.clone()));
        }
    }
    let requirements = requirements
        .iter()
        .map(|r| {
            r.attribute
                .parse::<QosAttribute>()
                .map(|a| (a, r))
                .map_err(|_| MatchError::UnknownAttribute(r.attribute.clone()))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut out: Vec<MatchCandidate> = if query.exact_only {
        if wanted_name.is_empty() {
            return Err(MatchError::EmptyQuery);
        }
        store
            .search_by_name(&query.name)
            .into_iter()
            .filter(|r| passes_gates(query, r, &requirements))
            .map(|record| MatchCandidate {
                record,
                name_similarity: 1.0,
                match_reason: MatchReason::Exact,
            })
            .collect()
    } else {
        store.read(|records| {
            records
                .values()
                .filter_map(|r| {
                    let (s, reason) = score(query, &wanted_name, r, ontology);
                    (s >= threshold && passes_gates(query, r, &requirements)).then(|| {
                        MatchCandidate {
                            record: r.clone(),
                            name_similarity: s,
                            match_reason: reason,
                        }
                    })
                })
                .collect()
        })
    };
    out.sort_by(candidate_order);
    Ok(out)
}
