// SPDX-License-Identifier: Apache-2.0

//! XML renderings of records, certificates, feedback and discovery results.
//!
//! Writers emit a canonical single-line form (fixed element order, decimals
//! with six fraction digits, RFC 3339 UTC timestamps). Readers accept any
//! element order and surrounding whitespace.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, SecondsFormat, Utc};

use crate::decimal::Decimal;
use crate::discovery::{DiscoveryResult, DiscoveryStatus, StageTrace};
use crate::publisher::Certificate;
use crate::qos::{QosAttribute, QosProfile};
use crate::ranker::{Feedback, RankedService};
use crate::registry::{normalize_keywords, ProviderInfo, ServiceRecord, TimeSlot};
use crate::xml::{element, empty_element, parse_document, text_element, Element, XmlError};

pub fn format_time(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

pub fn parse_time(s: &str, element: &str) -> Result<DateTime<Utc>, XmlError> {
    DateTime::parse_from_rfc3339(s.trim())
        .map(|t| t.with_timezone(&Utc))
        .map_err(|_| XmlError::schema(element))
}

pub fn parse_decimal(s: &str, element: &str) -> Result<Decimal, XmlError> {
    s.parse().map_err(|_| XmlError::schema(element))
}

/// Six fraction digits; `-0.000000` is printed as `0.000000`.
pub fn format_score(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

fn parse_score(s: &str, element: &str) -> Result<f64, XmlError> {
    s.trim().parse().map_err(|_| XmlError::schema(element))
}

pub fn join_keywords(words: &BTreeSet<String>) -> String {
    words.iter().cloned().collect::<Vec<_>>().join(",")
}

pub fn split_keywords(text: &str) -> BTreeSet<String> {
    normalize_keywords(text.split(','))
}

/// Tracks which singleton children an element has already supplied.
pub(crate) struct Seen(BTreeSet<String>);

impl Seen {
    pub(crate) fn new() -> Self {
        Seen(BTreeSet::new())
    }

    pub(crate) fn once(&mut self, name: &str) -> Result<(), XmlError> {
        if self.0.insert(name.to_string()) {
            Ok(())
        } else {
            Err(XmlError::schema(name))
        }
    }
}

pub fn certificate_to_xml(cert: &Certificate) -> String {
    empty_element(
        "Certificate",
        &[
            ("id", &cert.certificate_id),
            ("serviceKey", &cert.service_key),
            ("digest", &cert.digest),
            ("issuedAt", &format_time(&cert.issued_at)),
        ],
    )
}

pub fn certificate_from_element(el: &Element) -> Result<Certificate, XmlError> {
    el.expect_name("Certificate")?;
    el.only_attrs(&["id", "serviceKey", "digest", "issuedAt"])?;
    el.leaf_text()?;
    Ok(Certificate {
        certificate_id: el.required_attr("id")?.to_string(),
        service_key: el.required_attr("serviceKey")?.to_string(),
        digest: el.required_attr("digest")?.to_string(),
        issued_at: parse_time(el.required_attr("issuedAt")?, "Certificate")?,
    })
}

pub fn qos_to_xml(qos: &QosProfile) -> String {
    let values: Vec<(QosAttribute, String)> = qos
        .entries()
        .into_iter()
        .map(|(a, v)| (a, v.to_string()))
        .collect();
    let attrs: Vec<(&str, &str)> = values.iter().map(|(a, v)| (a.name(), v.as_str())).collect();
    empty_element("QoS", &attrs)
}

pub fn qos_from_element(el: &Element) -> Result<QosProfile, XmlError> {
    el.leaf_text()?;
    let mut entries = BTreeMap::new();
    for (k, v) in &el.attrs {
        let attr: QosAttribute = k
            .parse()
            .map_err(|_| XmlError::UnknownAttribute(k.clone()))?;
        entries.insert(attr, parse_decimal(v, "QoS")?);
    }
    QosProfile::from_entries(&entries).ok_or_else(|| XmlError::schema("QoS"))
}

pub fn record_to_xml(record: &ServiceRecord) -> String {
    let p = &record.provider;
    let mut inner = String::new();
    inner.push_str(&text_element("Name", &record.name));
    inner.push_str(&text_element("Keywords", &join_keywords(&record.keywords)));
    inner.push_str(&text_element("Concept", &record.concept));
    inner.push_str(&text_element("Description", &record.description));
    inner.push_str(&empty_element(
        "Provider",
        &[
            ("company", &p.company_name),
            ("address", &p.address),
            ("website", &p.website),
            ("contact", &p.contact),
        ],
    ));
    inner.push_str(&text_element("ResourceType", record.resource_type.as_str()));
    inner.push_str(&qos_to_xml(&record.qos));
    let slots: String = record
        .time_slots
        .iter()
        .map(|s| {
            empty_element(
                "TimeSlot",
                &[
                    ("start", &format_time(&s.start)),
                    ("end", &format_time(&s.end)),
                ],
            )
        })
        .collect();
    inner.push_str(&element("TimeSlots", &[], &slots));
    if let Some(cert) = &record.certificate {
        inner.push_str(&certificate_to_xml(cert));
    }
    element("ServiceRecord", &[("key", &record.service_key)], &inner)
}

pub fn time_slot_from_element(el: &Element) -> Result<TimeSlot, XmlError> {
    el.expect_name("TimeSlot")?;
    el.only_attrs(&["start", "end"])?;
    el.leaf_text()?;
    let start = parse_time(el.required_attr("start")?, "TimeSlot")?;
    let end = parse_time(el.required_attr("end")?, "TimeSlot")?;
    TimeSlot::new(start, end).map_err(|_| XmlError::schema("TimeSlot"))
}

pub fn record_from_element(el: &Element) -> Result<ServiceRecord, XmlError> {
    el.expect_name("ServiceRecord")?;
    el.only_attrs(&["key"])?;
    let key = el.required_attr("key")?.trim().to_string();
    let mut seen = Seen::new();
    let mut name = None;
    let mut keywords = BTreeSet::new();
    let mut concept = String::new();
    let mut description = String::new();
    let mut provider = None;
    let mut resource_type = None;
    let mut qos = None;
    let mut time_slots = Vec::new();
    let mut certificate = None;

    for c in &el.children {
        seen.once(&c.name)?;
        match c.name.as_str() {
            "Name" => name = Some(c.leaf_text()?.trim().to_string()),
            "Keywords" => keywords = split_keywords(c.leaf_text()?),
            "Concept" => concept = c.leaf_text()?.trim().to_string(),
            "Description" => description = c.leaf_text()?.to_string(),
            "Provider" => {
                c.only_attrs(&["company", "address", "website", "contact"])?;
                c.leaf_text()?;
                let get = |k| c.attr(k).unwrap_or_default().to_string();
                provider = Some(ProviderInfo {
                    company_name: c.required_attr("company")?.to_string(),
                    address: get("address"),
                    website: get("website"),
                    contact: get("contact"),
                });
            }
            "ResourceType" => {
                resource_type = Some(
                    c.leaf_text()?
                        .trim()
                        .parse()
                        .map_err(|_| XmlError::schema("ResourceType"))?,
                )
            }
            "QoS" => qos = Some(qos_from_element(c)?),
            "TimeSlots" => {
                c.only_attrs(&[])?;
                time_slots = c
                    .children
                    .iter()
                    .map(time_slot_from_element)
                    .collect::<Result<_, _>>()?;
            }
            "Certificate" => certificate = Some(certificate_from_element(c)?),
            other => return Err(XmlError::schema(other)),
        }
    }
    Ok(ServiceRecord {
        service_key: key,
        name: name.ok_or_else(|| XmlError::schema("Name"))?,
        keywords,
        concept,
        description,
        provider: provider.ok_or_else(|| XmlError::schema("Provider"))?,
        resource_type: resource_type.ok_or_else(|| XmlError::schema("ResourceType"))?,
        qos: qos.ok_or_else(|| XmlError::schema("QoS"))?,
        time_slots,
        certificate,
    })
}

pub fn parse_record_xml(doc: &str) -> Result<ServiceRecord, XmlError> {
    record_from_element(&parse_document(doc)?)
}

pub fn feedback_to_xml(fb: &Feedback) -> String {
    empty_element(
        "Feedback",
        &[
            ("consumer", &fb.consumer_id),
            ("serviceKey", &fb.service_key),
            ("rating", &fb.rating.to_string()),
            ("at", &format_time(&fb.at)),
        ],
    )
}

/// `at` defaults to the current time when omitted.
pub fn feedback_from_element(el: &Element) -> Result<Feedback, XmlError> {
    el.expect_name("Feedback")?;
    el.only_attrs(&["consumer", "serviceKey", "rating", "at"])?;
    el.leaf_text()?;
    let rating = el
        .required_attr("rating")?
        .trim()
        .parse::<i64>()
        .map_err(|_| XmlError::schema("Feedback"))?;
    Ok(Feedback {
        consumer_id: el.attr("consumer").unwrap_or("anonymous").to_string(),
        service_key: el.required_attr("serviceKey")?.to_string(),
        rating,
        at: match el.attr("at") {
            Some(t) => parse_time(t, "Feedback")?,
            None => Utc::now(),
        },
    })
}

pub fn ranked_to_xml(r: &RankedService) -> String {
    let mut inner: String = r
        .normalized
        .iter()
        .map(|(a, v)| {
            empty_element(
                "Normalized",
                &[("attr", a.name()), ("value", &format_score(*v))],
            )
        })
        .collect();
    inner.push_str(&record_to_xml(&r.record));
    element(
        "Service",
        &[
            ("rank", &r.rank.to_string()),
            ("key", &r.record.service_key),
            ("nameSimilarity", &format_score(r.name_similarity)),
            ("qosScore", &format_score(r.qos_score)),
            ("finalScore", &format_score(r.final_score)),
        ],
        &inner,
    )
}

fn ranked_from_element(el: &Element) -> Result<RankedService, XmlError> {
    el.expect_name("Service")?;
    el.only_attrs(&["rank", "key", "nameSimilarity", "qosScore", "finalScore"])?;
    let mut normalized = BTreeMap::new();
    let mut record = None;
    for c in &el.children {
        match c.name.as_str() {
            "Normalized" => {
                c.only_attrs(&["attr", "value"])?;
                let name = c.required_attr("attr")?;
                let attr: QosAttribute = name
                    .parse()
                    .map_err(|_| XmlError::UnknownAttribute(name.to_string()))?;
                normalized.insert(attr, parse_score(c.required_attr("value")?, "Normalized")?);
            }
            "ServiceRecord" if record.is_none() => record = Some(record_from_element(c)?),
            other => return Err(XmlError::schema(other)),
        }
    }
    let record = record.ok_or_else(|| XmlError::schema("Service"))?;
    if record.service_key != el.required_attr("key")? {
        return Err(XmlError::schema("Service"));
    }
    Ok(RankedService {
        record,
        name_similarity: parse_score(el.required_attr("nameSimilarity")?, "Service")?,
        normalized,
        qos_score: parse_score(el.required_attr("qosScore")?, "Service")?,
        final_score: parse_score(el.required_attr("finalScore")?, "Service")?,
        rank: el
            .required_attr("rank")?
            .parse()
            .map_err(|_| XmlError::schema("Service"))?,
    })
}

fn stages_to_xml(t: &StageTrace) -> String {
    empty_element(
        "Stages",
        &[
            ("matched", &t.matched.join(",")),
            ("filtered", &t.filtered.join(",")),
            ("ranked", &t.ranked.join(",")),
        ],
    )
}

fn split_keys(s: &str) -> Vec<String> {
    s.split(',')
        .filter(|k| !k.is_empty())
        .map(str::to_string)
        .collect()
}

/// Renders a result; `stages` is included only when given.
pub fn result_to_xml(result: &DiscoveryResult, stages: Option<&StageTrace>) -> String {
    let mut inner: String = result.services.iter().map(ranked_to_xml).collect();
    if let Some(t) = stages {
        inner.push_str(&stages_to_xml(t));
    }
    element(
        "DiscoveryResult",
        &[("status", result.status.as_str())],
        &inner,
    )
}

pub fn result_from_element(
    el: &Element,
) -> Result<(DiscoveryResult, Option<StageTrace>), XmlError> {
    el.expect_name("DiscoveryResult")?;
    el.only_attrs(&["status"])?;
    let status = match el.required_attr("status")? {
        "OK" => DiscoveryStatus::Ok,
        "NoMatch" => DiscoveryStatus::NoMatch,
        _ => return Err(XmlError::schema("DiscoveryResult")),
    };
    let mut services = Vec::new();
    let mut stages = None;
    for c in &el.children {
        match c.name.as_str() {
            "Service" => services.push(ranked_from_element(c)?),
            "Stages" if stages.is_none() => {
                c.only_attrs(&["matched", "filtered", "ranked"])?;
                let get = |k| c.attr(k).map(split_keys).unwrap_or_default();
                stages = Some(StageTrace {
                    matched: get("matched"),
                    filtered: get("filtered"),
                    ranked: get("ranked"),
                });
            }
            other => return Err(XmlError::schema(other)),
        }
    }
    if (status == DiscoveryStatus::NoMatch) != services.is_empty() {
        return Err(XmlError::schema("DiscoveryResult"));
    }
    Ok((DiscoveryResult { status, services }, stages))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{certified, sample_record};
    use proptest::prelude::*;

    #[test]
    fn certificate_xml_shape() {
        let rec = certified(sample_record("svc-001", "A"));
        let cert = rec.certificate.clone().unwrap();
        let xml = certificate_to_xml(&cert);
        assert!(xml.starts_with(
            "<Certificate id=\"cert-1fec3483fc7f6461\" serviceKey=\"svc-001\" digest=\""
        ));
        assert!(xml.ends_with("issuedAt=\"2024-01-01T00:00:00Z\"/>"));
        let back = certificate_from_element(&parse_document(&xml).unwrap()).unwrap();
        assert_eq!(back, cert);
    }

    #[test]
    fn record_round_trip() {
        let mut rec = certified(sample_record("svc-001", "Currency <Converter>"));
        rec.description = "line one\nmethod: tip(amount,rate) local\n".into();
        let xml = record_to_xml(&rec);
        let back = parse_record_xml(&xml).unwrap();
        assert_eq!(back, rec);
        assert_eq!(record_to_xml(&back), xml);
    }

    #[test]
    fn record_rejects_unknown_parts() {
        let rec = sample_record("svc-001", "A");
        let xml = record_to_xml(&rec);
        let bad = xml.replace("<Name>", "<Colour>red</Colour><Name>");
        assert_eq!(parse_record_xml(&bad), Err(XmlError::schema("Colour")));
        let bad = xml.replace("price=", "speed=\"1\" price=");
        assert_eq!(
            parse_record_xml(&bad),
            Err(XmlError::UnknownAttribute("speed".into()))
        );
        let bad = xml.replace(" price=\"1.000000\"", "");
        assert_eq!(parse_record_xml(&bad), Err(XmlError::schema("QoS")));
        let bad = xml.replace("<Name>A</Name>", "<Name>A</Name><Name>B</Name>");
        assert_eq!(parse_record_xml(&bad), Err(XmlError::schema("Name")));
    }

    #[test]
    fn feedback_round_trip() {
        let fb = Feedback {
            consumer_id: "c".into(),
            service_key: "svc".into(),
            rating: 4,
            at: "2024-03-01T12:00:00Z".parse().unwrap(),
        };
        let xml = feedback_to_xml(&fb);
        assert_eq!(
            xml,
            "<Feedback consumer=\"c\" serviceKey=\"svc\" rating=\"4\" at=\"2024-03-01T12:00:00Z\"/>"
        );
        assert_eq!(
            feedback_from_element(&parse_document(&xml).unwrap()).unwrap(),
            fb
        );
        assert!(feedback_from_element(
            &parse_document("<Feedback serviceKey=\"s\" rating=\"x\"/>").unwrap()
        )
        .is_err());
    }

    #[test]
    fn negative_zero_score_prints_positive() {
        assert_eq!(format_score(-0.0), "0.000000");
        assert_eq!(format_score(2.0 / 3.0), "0.666667");
    }

    proptest! {
        #[test]
        fn qos_xml_round_trips(vals in proptest::array::uniform7(-1_000_000_000i64..1_000_000_000)) {
            let mut qos = sample_record("k", "n").qos;
            for (a, v) in QosAttribute::ALL.into_iter().zip(vals) {
                qos.set(a, Decimal::from_micros(v));
            }
            let back = qos_from_element(&parse_document(&qos_to_xml(&qos)).unwrap()).unwrap();
            prop_assert_eq!(back, qos);
        }
    }
}
