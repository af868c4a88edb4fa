// SPDX-License-Identifier: Apache-2.0

//! QoS-aware service registry and discovery broker.
//!
//! Providers publish certified service records; consumers discover them by
//! name, keywords, or ontology concept and receive a ranking driven by their
//! QoS preferences and past feedback.

pub mod decimal;
pub mod discovery;
pub mod matcher;
pub mod ontology;
pub mod proxy;
pub mod publisher;
pub mod qos;
pub mod ranker;
pub mod registry;
pub mod wire;
pub mod xml;

#[cfg(test)]
mod testutil;

pub use decimal::{Decimal, DecimalError};
pub use discovery::{
    parse_query_xml, query_to_xml, Broker, BrokerConfig, ConfigError, DiscoveryError,
    DiscoveryQuery, DiscoveryResult, DiscoveryStatus, Response, StageTrace,
};
pub use matcher::{match_services, MatchCandidate, MatchError, MatchReason, DEFAULT_THRESHOLD};
pub use ontology::{NumericRequirement, Ontology, OntologyError};
pub use proxy::{
    CountingTransport, LoopbackTransport, ServiceContract, ServiceProxy, Transport, TransportError,
    TransportResponse,
};
pub use publisher::{publish, Certificate, PublishError, ValidationReport};
pub use qos::{Direction, QosAttribute, QosProfile};
pub use ranker::{
    rank_services, Feedback, FeedbackError, FeedbackStore, PreferenceWeights, PriorityGroups,
    QosConstraint, RankError, RankedService, DEFAULT_BETA,
};
pub use registry::{
    ProviderInfo, RegistryStore, ResourceType, ServiceRecord, StoreError, TimeSlot,
};
