// SPDX-License-Identifier: Apache-2.0

//! Service Publisher Block: QoS validation, certificates, and publication.

use std::fmt;

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::decimal::Decimal;
use crate::ontology::Ontology;
use crate::qos::{QosAttribute, QosProfile};
use crate::registry::{RegistryStore, ServiceRecord, StoreError};

/// Tamper-evident digest over a record's key and QoS values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Certificate {
    pub certificate_id: String,
    pub service_key: String,
    /// Lowercase hex SHA-256 of [`canonical_qos_string`].
    pub digest: String,
    pub issued_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub attribute: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valid {
            return f.write_str("valid");
        }
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("{}: {}", v.attribute, v.message))
            .collect();
        f.write_str(&parts.join("; "))
    }
}

#[derive(Debug, Error)]
pub enum PublishError {
    #[error("InvalidQoS: {0}")]
    InvalidQos(ValidationReport),
    #[error("UnknownConcept: `{0}` is not in the loaded ontology")]
    UnknownConcept(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

pub fn validate_qos(qos: &QosProfile) -> ValidationReport {
    let mut violations = Vec::new();
    let mut flag = |attr: QosAttribute, message: &str| {
        violations.push(Violation {
            attribute: attr.name().to_string(),
            message: message.to_string(),
        })
    };
    let fraction = |v: Decimal| (Decimal::ZERO..=Decimal::ONE).contains(&v);
    let ordinal =
        |v: Decimal| v.is_integral() && (Decimal::ZERO..=Decimal::from_int(5)).contains(&v);

    if !fraction(qos.reliability) {
        flag(QosAttribute::Reliability, "must be within [0, 1]");
    }
    if !fraction(qos.availability) {
        flag(QosAttribute::Availability, "must be within [0, 1]");
    }
    if qos.response_time <= Decimal::ZERO {
        flag(QosAttribute::ResponseTime, "must be > 0 ms");
    }
    if qos.latency < Decimal::ZERO {
        flag(QosAttribute::Latency, "must be >= 0 ms");
    }
    if qos.latency > qos.response_time {
        flag(QosAttribute::Latency, "latency ≤ response_time");
    }
    if qos.price < Decimal::ZERO {
        flag(QosAttribute::Price, "must be >= 0");
    }
    if !ordinal(qos.security) {
        flag(QosAttribute::Security, "must be an integer in 0..=5");
    }
    if !ordinal(qos.compliance) {
        flag(QosAttribute::Compliance, "must be an integer in 0..=5");
    }
    ValidationReport {
        valid: violations.is_empty(),
        violations,
    }
}

/// The digest input: the service key, then one `name=value` line per
/// attribute in name order, every line newline-terminated.
pub fn canonical_qos_string(service_key: &str, qos: &QosProfile) -> String {
    let mut out = String::with_capacity(service_key.len() + 7 * 24);
    out.push_str(service_key);
    out.push('\n');
    for (attr, value) in qos.entries() {
        out.push_str(attr.name());
        out.push('=');
        out.push_str(&value.to_string());
        out.push('\n');
    }
    out
}

pub fn qos_digest(service_key: &str, qos: &QosProfile) -> String {
    hex::encode(Sha256::digest(
        canonical_qos_string(service_key, qos).as_bytes(),
    ))
}

pub fn issue_certificate(record: &ServiceRecord) -> Result<Certificate, PublishError> {
    issue_certificate_at(record, Utc::now())
}

/// Issues a certificate stamped at `at` (truncated to whole seconds).
pub fn issue_certificate_at(
    record: &ServiceRecord,
    at: DateTime<Utc>,
) -> Result<Certificate, PublishError> {
    let report = validate_qos(&record.qos);
    if !report.valid {
        return Err(PublishError::InvalidQos(report));
    }
    let digest = qos_digest(&record.service_key, &record.qos);
    Ok(Certificate {
        certificate_id: format!("cert-{}", &digest[..16]),
        service_key: record.service_key.clone(),
        digest,
        issued_at: at.trunc_subsecs(0),
    })
}

pub fn verify_certificate(record: &ServiceRecord, cert: &Certificate) -> bool {
    cert.service_key == record.service_key
        && cert.digest == qos_digest(&record.service_key, &record.qos)
}

/// Validates, certifies, and stores `record`. The store is untouched unless
/// every step succeeds.
pub fn publish(
    store: &RegistryStore,
    ontology: Option<&Ontology>,
    mut record: ServiceRecord,
) -> Result<(String, Certificate), PublishError> {
    record.check().map_err(StoreError::from)?;
    let cert = issue_certificate(&record)?;
    if let Some(onto) = ontology {
        if !onto.contains(&record.concept) {
            return Err(PublishError::UnknownConcept(record.concept.clone()));
        }
    }
    record.certificate = Some(cert.clone());
    let key = store.save_service(record)?;
    Ok((key, cert))
}
