// SPDX-License-Identifier: Apache-2.0

//! The seven non-functional attributes a provider advertises.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decimal::Decimal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    /// Larger raw values are better.
    Benefit,
    /// Smaller raw values are better.
    Cost,
}

/// Attribute names, declared in lexicographic order of their wire names so
/// that the derived `Ord` matches the sorted canonical serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QosAttribute {
    Availability,
    Compliance,
    Latency,
    Price,
    Reliability,
    ResponseTime,
    Security,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown QoS attribute `{0}`")]
pub struct UnknownAttribute(pub String);

impl QosAttribute {
    pub const ALL: [QosAttribute; 7] = [
        QosAttribute::Availability,
        QosAttribute::Compliance,
        QosAttribute::Latency,
        QosAttribute::Price,
        QosAttribute::Reliability,
        QosAttribute::ResponseTime,
        QosAttribute::Security,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QosAttribute::Availability => "availability",
            QosAttribute::Compliance => "compliance",
            QosAttribute::Latency => "latency",
            QosAttribute::Price => "price",
            QosAttribute::Reliability => "reliability",
            QosAttribute::ResponseTime => "response_time",
            QosAttribute::Security => "security",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            QosAttribute::Reliability
            | QosAttribute::Availability
            | QosAttribute::Security
            | QosAttribute::Compliance => Direction::Benefit,
            QosAttribute::ResponseTime | QosAttribute::Latency | QosAttribute::Price => {
                Direction::Cost
            }
        }
    }
}

impl fmt::Display for QosAttribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QosAttribute {
    type Err = UnknownAttribute;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        QosAttribute::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| UnknownAttribute(s.to_string()))
    }
}

/// Raw QoS values as published. Fields are unconstrained here; domain checks
/// live in [`crate::publisher::validate_qos`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QosProfile {
    pub reliability: Decimal,
    pub availability: Decimal,
    /// Milliseconds.
    pub response_time: Decimal,
    /// Milliseconds.
    pub latency: Decimal,
    /// Currency units per invocation.
    pub price: Decimal,
    /// Ordinal 0-5.
    pub security: Decimal,
    /// Ordinal 0-5.
    pub compliance: Decimal,
}

impl QosProfile {
    pub fn get(&self, attr: QosAttribute) -> Decimal {
        match attr {
            QosAttribute::Availability => self.availability,
            QosAttribute::Compliance => self.compliance,
            QosAttribute::Latency => self.latency,
            QosAttribute::Price => self.price,
            QosAttribute::Reliability => self.reliability,
            QosAttribute::ResponseTime => self.response_time,
            QosAttribute::Security => self.security,
        }
    }

    pub fn set(&mut self, attr: QosAttribute, value: Decimal) {
        let slot = match attr {
            QosAttribute::Availability => &mut self.availability,
            QosAttribute::Compliance => &mut self.compliance,
            QosAttribute::Latency => &mut self.latency,
            QosAttribute::Price => &mut self.price,
            QosAttribute::Reliability => &mut self.reliability,
            QosAttribute::ResponseTime => &mut self.response_time,
            QosAttribute::Security => &mut self.security,
        };
        *slot = value;
    }

    /// Attribute map in canonical (sorted) order.
    pub fn entries(&self) -> BTreeMap<QosAttribute, Decimal> {
        QosAttribute::ALL
            .into_iter()
            .map(|a| (a, self.get(a)))
            .collect()
    }

    /// Builds a profile from a complete attribute map.
    pub fn from_entries(entries: &BTreeMap<QosAttribute, Decimal>) -> Option<Self> {
        let get = |a| entries.get(&a).copied();
        Some(QosProfile {
            reliability: get(QosAttribute::Reliability)?,
            availability: get(QosAttribute::Availability)?,
            response_time: get(QosAttribute::ResponseTime)?,
            latency: get(QosAttribute::Latency)?,
            price: get(QosAttribute::Price)?,
            security: get(QosAttribute::Security)?,
            compliance: get(QosAttribute::Compliance)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn declaration_order_is_name_order() {
        let mut names: Vec<_> = QosAttribute::ALL.iter().map(|a| a.name()).collect();
        let declared = names.clone();
        names.sort_unstable();
        assert_eq!(names, declared);
        let mut sorted = QosAttribute::ALL;
        sorted.sort();
        assert_eq!(sorted, QosAttribute::ALL);
    }

    #[test]
    fn names_round_trip_and_reject_unknown() {
        for a in QosAttribute::ALL {
            assert_eq!(a.name().parse::<QosAttribute>().unwrap(), a);
        }
        assert_eq!(
            "speed".parse::<QosAttribute>(),
            Err(UnknownAttribute("speed".into()))
        );
    }

    #[test]
    fn directions() {
        use QosAttribute::*;
        let cost: Vec<_> = QosAttribute::ALL
            .into_iter()
            .filter(|a| a.direction() == Direction::Cost)
            .collect();
        assert_eq!(cost, vec![Latency, Price, ResponseTime]);
    }
}
