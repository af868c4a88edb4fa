// SPDX-License-Identifier: Apache-2.0

//! Seeded fixtures for the pipeline benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wscr_core::discovery::{Broker, DiscoveryQuery};
use wscr_core::matcher::{MatchCandidate, MatchReason};
use wscr_core::ontology::Ontology;
use wscr_core::qos::QosProfile;
use wscr_core::registry::{ProviderInfo, ResourceType, ServiceRecord};
use wscr_core::Decimal;

pub const TAXONOMY: &str = "Service\nService>ComputeService\nService>StorageService\n\
    StorageService>BlockStorage\nStorageService>ObjectStorage\nComputeService>VirtualMachine\n";
const CONCEPTS: [&str; 6] = [
    "Service",
    "ComputeService",
    "StorageService",
    "BlockStorage",
    "ObjectStorage",
    "VirtualMachine",
];
const NAMES: [&str; 5] = [
    "Block Store",
    "Object Vault",
    "VM Launcher",
    "Cold Archive",
    "Disk Cache",
];
const VOCAB: [&str; 6] = ["block", "object", "disk", "vm", "fast", "cheap"];

pub fn ontology() -> Ontology {
    Ontology::parse(TAXONOMY).expect("fixed taxonomy parses")
}

pub fn records(n: usize, seed: u64) -> Vec<ServiceRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let response_time = rng.random_range(1_000_000..2_000_000_000);
            ServiceRecord {
                service_key: format!("svc-{i:05}"),
                name: NAMES[rng.random_range(0..NAMES.len())].to_string(),
                keywords: VOCAB
                    .iter()
                    .filter(|_| rng.random_bool(0.3))
                    .map(|s| s.to_string())
                    .collect(),
                concept: CONCEPTS[rng.random_range(0..CONCEPTS.len())].to_string(),
                description: String::new(),
                provider: ProviderInfo {
                    company_name: "Bench Co".into(),
                    address: String::new(),
                    website: String::new(),
                    contact: String::new(),
                },
                resource_type: ResourceType::Storage,
                qos: QosProfile {
                    reliability: Decimal::from_micros(rng.random_range(0..=1_000_000)),
                    availability: Decimal::from_micros(rng.random_range(0..=1_000_000)),
                    response_time: Decimal::from_micros(response_time),
                    latency: Decimal::from_micros(rng.random_range(0..=response_time)),
                    price: Decimal::from_micros(rng.random_range(0..=100_000_000)),
                    security: Decimal::from_int(rng.random_range(0..=5)),
                    compliance: Decimal::from_int(rng.random_range(0..=5)),
                },
                time_slots: Vec::new(),
                certificate: None,
            }
        })
        .collect()
}

pub fn broker(n: usize) -> Broker {
    let b = Broker::in_memory(ontology());
    for r in records(n, 7) {
        b.publish(r).expect("fixture publishes");
    }
    b
}

pub fn candidates(n: usize) -> Vec<MatchCandidate> {
    records(n, 11)
        .into_iter()
        .map(|record| MatchCandidate {
            record,
            name_similarity: 1.0,
            match_reason: MatchReason::Exact,
        })
        .collect()
}

/// Keyword and concept query that matches a sizeable share of the fixtures.
pub fn query() -> DiscoveryQuery {
    let mut q = DiscoveryQuery::named("Block Store");
    q.keywords = ["block", "disk"].iter().map(|s| s.to_string()).collect();
    q.concept = Some("StorageService".into());
    q
}
