// SPDX-License-Identifier: Apache-2.0

//! Fixtures shared by unit tests.

use std::collections::BTreeSet;

use chrono::{TimeZone, Utc};

use crate::decimal::Decimal;
use crate::ontology::Ontology;
use crate::publisher::issue_certificate_at;
use crate::qos::QosProfile;
use crate::registry::{ProviderInfo, ResourceType, ServiceRecord};

pub fn sample_qos() -> QosProfile {
    let d = |s: &str| s.parse::<Decimal>().unwrap();
    QosProfile {
        reliability: d("0.99"),
        availability: d("0.999"),
        response_time: d("200"),
        latency: d("50"),
        price: d("1"),
        security: d("3"),
        compliance: d("2"),
    }
}

pub fn sample_record(key: &str, name: &str) -> ServiceRecord {
    ServiceRecord {
        service_key: key.to_string(),
        name: name.to_string(),
        keywords: BTreeSet::new(),
        concept: "Service".to_string(),
        description: String::new(),
        provider: ProviderInfo {
            company_name: "Example Co".to_string(),
            address: "1 Main St".to_string(),
            website: "https://example.com".to_string(),
            contact: "ops@example.com".to_string(),
        },
        resource_type: ResourceType::Storage,
        qos: sample_qos(),
        time_slots: Vec::new(),
        certificate: None,
    }
}

/// Attaches a certificate issued at 2024-01-01T00:00:00Z.
pub fn certified(mut record: ServiceRecord) -> ServiceRecord {
    let at = Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap();
    record.certificate = Some(issue_certificate_at(&record, at).unwrap());
    record
}

pub fn storage_ontology() -> Ontology {
    Ontology::parse(
        "Service\n\
         Service>ComputeService\n\
         Service>StorageService\n\
         StorageService>BlockStorage\n\
         StorageService>ObjectStorage\n",
    )
    .unwrap()
}
