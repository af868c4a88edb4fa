// SPDX-License-Identifier: Apache-2.0

//! QoS Parameter Matching Block: hard-constraint filtering, min-max
//! normalization, simple additive weighting, priority groups, and the
//! consumer feedback stream.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decimal::Decimal;
use crate::matcher::MatchCandidate;
use crate::qos::{Direction, QosAttribute, QosProfile};
use crate::registry::{self, RegistryStore, ServiceRecord, StoreError, TimeSlot};

pub const DEFAULT_BETA: f64 = 0.2;
pub const FEEDBACK_FORMAT: &str = "wscr-feedback";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bound {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QosConstraint {
    pub attribute: QosAttribute,
    pub bound: Bound,
    pub value: Decimal,
}

impl QosConstraint {
    pub fn min(attribute: QosAttribute, value: Decimal) -> Self {
        QosConstraint {
            attribute,
            bound: Bound::Min,
            value,
        }
    }

    pub fn max(attribute: QosAttribute, value: Decimal) -> Self {
        QosConstraint {
            attribute,
            bound: Bound::Max,
            value,
        }
    }

    /// Inclusive on both bound kinds.
    pub fn holds(&self, qos: &QosProfile) -> bool {
        let v = qos.get(self.attribute);
        match self.bound {
            Bound::Min => v >= self.value,
            Bound::Max => v <= self.value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PreferenceError {
    #[error("weight for `{0}` is negative")]
    NegativeWeight(QosAttribute),
    #[error("at least one weight must be positive")]
    AllZero,
    #[error("attribute `{0}` appears in more than one priority group")]
    OverlappingGroups(QosAttribute),
    #[error("priority groups must not be empty")]
    EmptyGroup,
}

/// Consumer preference weights; attributes not present weigh 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreferenceWeights {
    weights: BTreeMap<QosAttribute, Decimal>,
}

impl PreferenceWeights {
    pub fn new(weights: BTreeMap<QosAttribute, Decimal>) -> Result<Self, PreferenceError> {
        if let Some((a, _)) = weights.iter().find(|(_, w)| **w < Decimal::ZERO) {
            return Err(PreferenceError::NegativeWeight(*a));
        }
        if !weights.values().any(|w| *w > Decimal::ZERO) {
            return Err(PreferenceError::AllZero);
        }
        Ok(PreferenceWeights { weights })
    }

    pub fn uniform() -> Self {
        PreferenceWeights {
            weights: QosAttribute::ALL
                .into_iter()
                .map(|a| (a, Decimal::ONE))
                .collect(),
        }
    }

    pub fn get(&self, attr: QosAttribute) -> Decimal {
        self.weights.get(&attr).copied().unwrap_or(Decimal::ZERO)
    }

    pub fn entries(&self) -> &BTreeMap<QosAttribute, Decimal> {
        &self.weights
    }
}

/// Ordered, disjoint attribute groups compared lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorityGroups {
    groups: Vec<BTreeSet<QosAttribute>>,
}

impl PriorityGroups {
    pub fn new(groups: Vec<BTreeSet<QosAttribute>>) -> Result<Self, PreferenceError> {
        let mut seen = BTreeSet::new();
        for g in &groups {
            if g.is_empty() {
                return Err(PreferenceError::EmptyGroup);
            }
            for a in g {
                if !seen.insert(*a) {
                    return Err(PreferenceError::OverlappingGroups(*a));
                }
            }
        }
        Ok(PriorityGroups { groups })
    }

    pub fn groups(&self) -> &[BTreeSet<QosAttribute>] {
        &self.groups
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedService {
    pub record: ServiceRecord,
    pub name_similarity: f64,
    pub normalized: BTreeMap<QosAttribute, f64>,
    pub qos_score: f64,
    pub final_score: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RankError {
    #[error("EmptyCandidateSet: nothing to rank")]
    EmptyCandidateSet,
}

/// Keeps candidates that satisfy every constraint, the price ceiling, and
/// (when a window is given) offer a slot containing the window. Order is
/// preserved.
pub fn filter_by_constraints(
    mut candidates: Vec<MatchCandidate>,
    constraints: &[QosConstraint],
    price_ceiling: Option<Decimal>,
    window: Option<&TimeSlot>,
) -> Vec<MatchCandidate> {
    candidates.retain(|c| survives(&c.record, constraints, price_ceiling, window));
    candidates
}

pub fn survives(
    record: &ServiceRecord,
    constraints: &[QosConstraint],
    price_ceiling: Option<Decimal>,
    window: Option<&TimeSlot>,
) -> bool {
    constraints.iter().all(|c| c.holds(&record.qos))
        && price_ceiling.is_none_or(|ceil| record.qos.price <= ceil)
        && window.is_none_or(|w| record.time_slots.iter().any(|s| s.contains(w)))
}

/// Per-profile normalized values indexed like `QosAttribute::ALL`.
///
/// Differences are taken on the exact fixed-point representation before the
/// single floating division, so affine rescaling of an attribute that stays
/// exactly representable yields bit-identical results.
pub fn normalize_profiles(profiles: &[&QosProfile]) -> Vec<[f64; 7]> {
    let mut out = vec![[0.0; 7]; profiles.len()];
    for (i, attr) in QosAttribute::ALL.into_iter().enumerate() {
        let raw: Vec<i128> = profiles
            .iter()
            .map(|p| p.get(attr).micros() as i128)
            .collect();
        let (Some(&lo), Some(&hi)) = (raw.iter().min(), raw.iter().max()) else {
            continue;
        };
        let span = hi - lo;
        for (row, v) in out.iter_mut().zip(&raw) {
            row[i] = if span == 0 {
                1.0
            } else {
                let num = match attr.direction() {
                    Direction::Benefit => v - lo,
                    Direction::Cost => hi - v,
                };
                num as f64 / span as f64
            };
        }
    }
    out
}

/// Min-max normalization over the candidate set, keyed by
/// `(service_key, attribute)`.
pub fn normalize(candidates: &[MatchCandidate]) -> BTreeMap<(String, QosAttribute), f64> {
    let profiles: Vec<&QosProfile> = candidates.iter().map(|c| &c.record.qos).collect();
    let rows = normalize_profiles(&profiles);
    let mut out = BTreeMap::new();
    for (c, row) in candidates.iter().zip(rows) {
        for (i, attr) in QosAttribute::ALL.into_iter().enumerate() {
            out.insert((c.record.service_key.clone(), attr), row[i]);
        }
    }
    out
}

/// Weighted mean of `row` over `attrs`; falls back to an unweighted mean when
/// every weight in `attrs` is zero.
fn weighted_score(
    row: &[f64; 7],
    prefs: &PreferenceWeights,
    attrs: &BTreeSet<QosAttribute>,
) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, attr) in QosAttribute::ALL.into_iter().enumerate() {
        if attrs.contains(&attr) {
            let w = prefs.get(attr).to_f64();
            num += w * row[i];
            den += w;
        }
    }
    if den > 0.0 {
        num / den
    } else {
        attrs
            .iter()
            .map(|a| row[QosAttribute::ALL.iter().position(|x| x == a).unwrap()])
            .sum::<f64>()
            / attrs.len() as f64
    }
}

pub fn saw_score(row: &[f64; 7], prefs: &PreferenceWeights) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, attr) in QosAttribute::ALL.into_iter().enumerate() {
        let w = prefs.get(attr).to_f64();
        num += w * row[i];
        den += w;
    }
    num / den
}

/// Source of historical mean ratings on the 1-5 scale.
pub trait RatingSource {
    fn mean_rating(&self, service_key: &str) -> Option<f64>;
}

/// No feedback at all.
pub struct NoRatings;

impl RatingSource for NoRatings {
    fn mean_rating(&self, _: &str) -> Option<f64> {
        None
    }
}

pub fn blend(qos_score: f64, mean_rating: Option<f64>, beta: f64) -> f64 {
    match mean_rating {
        Some(m) => (1.0 - beta) * qos_score + beta * m / 5.0,
        None => qos_score,
    }
}

/// Ranks survivors by preference weights, optional priority groups, and
/// feedback. Ranks are assigned 1..n.
pub fn rank_services(
    survivors: Vec<MatchCandidate>,
    prefs: &PreferenceWeights,
    groups: Option<&PriorityGroups>,
    ratings: &dyn RatingSource,
    beta: f64,
) -> Result<Vec<RankedService>, RankError> {
    if survivors.is_empty() {
        return Err(RankError::EmptyCandidateSet);
    }
    let profiles: Vec<&QosProfile> = survivors.iter().map(|c| &c.record.qos).collect();
    let rows = normalize_profiles(&profiles);

    // Group key vectors: declared groups in order, then the remaining
    // positively weighted attributes as one implicit trailing group.
    let group_sets: Vec<BTreeSet<QosAttribute>> = match groups {
        Some(g) => {
            let mut sets = g.groups().to_vec();
            let grouped: BTreeSet<_> = sets.iter().flatten().copied().collect();
            let rest: BTreeSet<_> = prefs
                .entries()
                .iter()
                .filter(|(a, w)| **w > Decimal::ZERO && !grouped.contains(a))
                .map(|(a, _)| *a)
                .collect();
            if !rest.is_empty() {
                sets.push(rest);
            }
            sets
        }
        None => Vec::new(),
    };

    let mut scored: Vec<(Vec<f64>, RankedService)> = survivors
        .into_iter()
        .zip(rows)
        .map(|(c, row)| {
            let qos_score = saw_score(&row, prefs);
            let final_score = blend(qos_score, ratings.mean_rating(&c.record.service_key), beta);
            let group_key = group_sets
                .iter()
                .map(|g| weighted_score(&row, prefs, g))
                .collect();
            let normalized = QosAttribute::ALL.into_iter().zip(row).collect();
            (
                group_key,
                RankedService {
                    record: c.record,
                    name_similarity: c.name_similarity,
                    normalized,
                    qos_score,
                    final_score,
                    rank: 0,
                },
            )
        })
        .collect();

    scored.sort_by(|(ga, a), (gb, b)| {
        ga.iter()
            .zip(gb)
            .map(|(x, y)| y.total_cmp(x))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
            .then_with(|| b.final_score.total_cmp(&a.final_score))
            .then_with(|| a.record.service_key.cmp(&b.record.service_key))
    });
    Ok(scored
        .into_iter()
        .enumerate()
        .map(|(i, (_, mut r))| {
            r.rank = i + 1;
            r
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feedback {
    pub consumer_id: String,
    pub service_key: String,
    pub rating: i64,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Error)]
pub enum FeedbackError {
    #[error("UnknownService: `{0}`")]
    UnknownService(String),
    #[error("InvalidRating: rating must be an integer 1-5, got {0}")]
    InvalidRating(i64),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl From<std::io::Error> for FeedbackError {
    fn from(e: std::io::Error) -> Self {
        FeedbackError::Store(StoreError::Io(e))
    }
}

#[derive(Default)]
struct Tally {
    entries: Vec<Feedback>,
    totals: BTreeMap<String, (i64, usize)>,
}

impl Tally {
    fn push(&mut self, fb: Feedback) -> usize {
        let slot = self.totals.entry(fb.service_key.clone()).or_default();
        slot.0 += fb.rating;
        slot.1 += 1;
        let count = slot.1;
        self.entries.push(fb);
        count
    }
}

/// Append-only feedback stream with per-service running means.
pub struct FeedbackStore {
    tally: RwLock<Tally>,
    journal: Option<Mutex<File>>,
    path: Option<PathBuf>,
}

impl Default for FeedbackStore {
    fn default() -> Self {
        Self::in_memory()
    }
}

impl fmt::Debug for FeedbackStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FeedbackStore")
            .field("entries", &self.len())
            .field("path", &self.path)
            .finish()
    }
}

impl FeedbackStore {
    pub fn in_memory() -> Self {
        FeedbackStore {
            tally: RwLock::new(Tally::default()),
            journal: None,
            path: None,
        }
    }

    /// Loads (or creates) the feedback journal at `path`.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, FeedbackError> {
        let path = path.as_ref().to_path_buf();
        let mut tally = Tally::default();
        if path.exists() && std::fs::metadata(&path)?.len() > 0 {
            let entries = registry::read_ndjson(&path, FEEDBACK_FORMAT, |_, line| {
                let fb: Feedback = serde_json::from_str(line).map_err(|e| e.to_string())?;
                if !(1..=5).contains(&fb.rating) {
                    return Err(format!("rating {} out of range", fb.rating));
                }
                Ok(fb)
            })?;
            for fb in entries {
                tally.push(fb);
            }
        } else {
            let file = File::create(&path)?;
            writeln!(&file, "{}", registry::header_line(FEEDBACK_FORMAT))?;
        }
        let journal = OpenOptions::new().append(true).open(&path)?;
        Ok(FeedbackStore {
            tally: RwLock::new(tally),
            journal: Some(Mutex::new(journal)),
            path: Some(path),
        })
    }

    /// Appends `fb`; returns how many ratings the service now has.
    pub fn record_feedback(
        &self,
        fb: Feedback,
        registry: &RegistryStore,
    ) -> Result<usize, FeedbackError> {
        if !(1..=5).contains(&fb.rating) {
            return Err(FeedbackError::InvalidRating(fb.rating));
        }
        if !registry.contains(&fb.service_key) {
            return Err(FeedbackError::UnknownService(fb.service_key));
        }
        let mut tally = self.tally.write().expect("feedback lock poisoned");
        if let Some(journal) = &self.journal {
            let line = serde_json::to_value(&fb)
                .expect("feedback serializes")
                .to_string();
            let mut file = journal.lock().expect("feedback journal lock poisoned");
            writeln!(file, "{line}")?;
            file.flush()?;
        }
        Ok(tally.push(fb))
    }

    pub fn rating_count(&self, service_key: &str) -> usize {
        let tally = self.tally.read().expect("feedback lock poisoned");
        tally.totals.get(service_key).map_or(0, |t| t.1)
    }

    pub fn len(&self) -> usize {
        self.tally
            .read()
            .expect("feedback lock poisoned")
            .entries
            .len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flush(&self) -> Result<(), FeedbackError> {
        if let Some(journal) = &self.journal {
            journal
                .lock()
                .expect("feedback journal lock poisoned")
                .sync_all()?;
        }
        Ok(())
    }
}

impl RatingSource for FeedbackStore {
    fn mean_rating(&self, service_key: &str) -> Option<f64> {
        let tally = self.tally.read().expect("feedback lock poisoned");
        tally
            .totals
            .get(service_key)
            .map(|(sum, n)| *sum as f64 / *n as f64)
    }
}

impl RatingSource for BTreeMap<String, f64> {
    fn mean_rating(&self, service_key: &str) -> Option<f64> {
        self.get(service_key).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcher::MatchReason;
    use crate::testutil::{certified, sample_record};
    use chrono::TimeZone;

    fn cand(key: &str, edit: impl FnOnce(&mut QosProfile)) -> MatchCandidate {
        let mut record = sample_record(key, "svc");
        edit(&mut record.qos);
        MatchCandidate {
            record,
            name_similarity: 1.0,
            match_reason: MatchReason::Exact,
        }
    }

    fn d(s: &str) -> Decimal {
        s.parse().unwrap()
    }

    fn weights(pairs: &[(QosAttribute, &str)]) -> PreferenceWeights {
        PreferenceWeights::new(pairs.iter().map(|(a, w)| (*a, d(w))).collect()).unwrap()
    }

    #[test]
    fn inclusive_constraint_and_price_ceiling() {
        let c = vec![cand("a", |q| q.availability = d("0.99"))];
        let kept = filter_by_constraints(
            c.clone(),
            &[QosConstraint::min(QosAttribute::Availability, d("0.99"))],
            None,
            None,
        );
        assert_eq!(kept.len(), 1);
        let priced = vec![cand("a", |q| q.price = d("5.01"))];
        assert!(filter_by_constraints(priced, &[], Some(d("5.0")), None).is_empty());
        let at_max = vec![cand("a", |q| q.latency = d("50"))];
        let kept = filter_by_constraints(
            at_max,
            &[QosConstraint::max(QosAttribute::Latency, d("50"))],
            None,
            None,
        );
        assert_eq!(kept.len(), 1);
    }

    #[test]
    fn window_containment() {
        let t = |h, m| Utc.with_ymd_and_hms(2024, 5, 1, h, m, 0).unwrap();
        let window = TimeSlot::new(t(10, 0), t(11, 0)).unwrap();
        let mut wide = cand("a", |_| {});
        wide.record.time_slots = vec![TimeSlot::new(t(9, 0), t(12, 0)).unwrap()];
        let mut late = cand("b", |_| {});
        late.record.time_slots = vec![TimeSlot::new(t(10, 30), t(12, 0)).unwrap()];
        let kept = filter_by_constraints(vec![wide, late], &[], None, Some(&window));
        let keys: Vec<_> = kept.iter().map(|c| c.record.service_key.as_str()).collect();
        assert_eq!(keys, vec!["a"]);
    }

    #[test]
    fn normalization_endpoints_and_degenerate() {
        let cs = vec![
            cand("a", |q| {
                q.reliability = d("0.8");
                q.price = d("2");
            }),
            cand("b", |q| {
                q.reliability = d("0.9");
                q.price = d("4");
            }),
        ];
        let n = normalize(&cs);
        assert_eq!(n[&("a".into(), QosAttribute::Reliability)], 0.0);
        assert_eq!(n[&("b".into(), QosAttribute::Reliability)], 1.0);
        assert_eq!(n[&("a".into(), QosAttribute::Price)], 1.0);
        assert_eq!(n[&("b".into(), QosAttribute::Price)], 0.0);
        assert_eq!(n[&("a".into(), QosAttribute::Latency)], 1.0);
        assert_eq!(n[&("b".into(), QosAttribute::Latency)], 1.0);
    }

    #[test]
    fn single_survivor() {
        let ranked = rank_services(
            vec![cand("a", |_| {})],
            &PreferenceWeights::uniform(),
            None,
            &NoRatings,
            DEFAULT_BETA,
        )
        .unwrap();
        assert_eq!(ranked.len(), 1);
        assert_eq!(ranked[0].rank, 1);
        assert_eq!(ranked[0].final_score, ranked[0].qos_score);
        assert_eq!(ranked[0].qos_score, 1.0);
    }

    #[test]
    fn empty_set_is_an_error() {
        assert_eq!(
            rank_services(vec![], &PreferenceWeights::uniform(), None, &NoRatings, 0.2),
            Err(RankError::EmptyCandidateSet)
        );
    }

    #[test]
    fn dominance_and_tie_break() {
        let better = cand("z", |q| q.reliability = d("0.999"));
        let worse = cand("a", |q| q.reliability = d("0.9"));
        let twin = cand("b", |q| q.reliability = d("0.9"));
        let ranked = rank_services(
            vec![worse, twin, better],
            &PreferenceWeights::uniform(),
            None,
            &NoRatings,
            0.2,
        )
        .unwrap();
        let keys: Vec<_> = ranked
            .iter()
            .map(|r| r.record.service_key.as_str())
            .collect();
        assert_eq!(keys, vec!["z", "a", "b"]);
        assert_eq!(
            ranked.iter().map(|r| r.rank).collect::<Vec<_>>(),
            vec![1, 2, 3]
        );
    }

    #[test]
    fn weights_and_scores() {
        let a = cand("a", |q| {
            q.price = d("1");
            q.reliability = d("0.9");
        });
        let b = cand("b", |q| {
            q.price = d("3");
            q.reliability = d("0.99");
        });
        let prefs = weights(&[(QosAttribute::Price, "3"), (QosAttribute::Reliability, "1")]);
        let ranked = rank_services(vec![a, b], &prefs, None, &NoRatings, 0.2).unwrap();
        assert_eq!(ranked[0].record.service_key, "a");
        assert!((ranked[0].qos_score - 0.75).abs() < 1e-12);
        assert!((ranked[1].qos_score - 0.25).abs() < 1e-12);

        let scaled = weights(&[
            (QosAttribute::Price, "30"),
            (QosAttribute::Reliability, "10"),
        ]);
        let again = rank_services(
            ranked
                .iter()
                .map(|r| MatchCandidate {
                    record: r.record.clone(),
                    name_similarity: 1.0,
                    match_reason: MatchReason::Exact,
                })
                .collect(),
            &scaled,
            None,
            &NoRatings,
            0.2,
        )
        .unwrap();
        assert_eq!(again[0].qos_score, ranked[0].qos_score);
    }

    #[test]
    fn priority_groups_are_lexicographic() {
        // a wins on price, b wins on reliability and availability; weights
        // favour b, but price is the first group.
        let a = cand("a", |q| {
            q.price = d("1");
            q.reliability = d("0.5");
            q.availability = d("0.5");
        });
        let b = cand("b", |q| {
            q.price = d("2");
            q.reliability = d("0.9");
            q.availability = d("0.9");
        });
        let prefs = weights(&[
            (QosAttribute::Price, "1"),
            (QosAttribute::Reliability, "5"),
            (QosAttribute::Availability, "5"),
        ]);
        let plain =
            rank_services(vec![a.clone(), b.clone()], &prefs, None, &NoRatings, 0.2).unwrap();
        assert_eq!(plain[0].record.service_key, "b");
        let groups = PriorityGroups::new(vec![BTreeSet::from([QosAttribute::Price])]).unwrap();
        let grouped = rank_services(vec![a, b], &prefs, Some(&groups), &NoRatings, 0.2).unwrap();
        assert_eq!(grouped[0].record.service_key, "a");
    }

    #[test]
    fn group_validation() {
        assert_eq!(
            PriorityGroups::new(vec![
                BTreeSet::from([QosAttribute::Price]),
                BTreeSet::from([QosAttribute::Price, QosAttribute::Security]),
            ]),
            Err(PreferenceError::OverlappingGroups(QosAttribute::Price))
        );
        assert_eq!(
            PriorityGroups::new(vec![BTreeSet::new()]),
            Err(PreferenceError::EmptyGroup)
        );
        assert_eq!(
            PreferenceWeights::new(BTreeMap::from([(QosAttribute::Price, Decimal::ZERO)])),
            Err(PreferenceError::AllZero)
        );
        assert_eq!(
            PreferenceWeights::new(BTreeMap::from([(QosAttribute::Price, d("-1"))])),
            Err(PreferenceError::NegativeWeight(QosAttribute::Price))
        );
    }

    #[test]
    fn feedback_blend() {
        let a = cand("a", |q| q.reliability = d("0.9"));
        let b = cand("b", |q| q.reliability = d("0.8"));
        let ratings = BTreeMap::from([("b".to_string(), 5.0)]);
        let prefs = weights(&[(QosAttribute::Reliability, "1")]);
        let ranked =
            rank_services(vec![a.clone(), b.clone()], &prefs, None, &ratings, 0.2).unwrap();
        // a: 1.0 with no ratings; b: 0.8·0 + 0.2·1 = 0.2
        assert_eq!(ranked[0].record.service_key, "a");
        assert!((ranked[1].final_score - 0.2).abs() < 1e-12);
        let ranked = rank_services(vec![a, b], &prefs, None, &ratings, 0.0).unwrap();
        for r in &ranked {
            assert_eq!(r.final_score, r.qos_score);
        }
    }

    fn feedback(key: &str, rating: i64) -> Feedback {
        Feedback {
            consumer_id: "c1".into(),
            service_key: key.into(),
            rating,
            at: Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap(),
        }
    }

    #[test]
    fn feedback_means_and_errors() {
        let registry = RegistryStore::in_memory();
        registry
            .save_service(certified(sample_record("a", "A")))
            .unwrap();
        let fs = FeedbackStore::in_memory();
        assert_eq!(fs.record_feedback(feedback("a", 5), &registry).unwrap(), 1);
        assert_eq!(fs.mean_rating("a"), Some(5.0));
        assert!(matches!(
            fs.record_feedback(feedback("a", 0), &registry),
            Err(FeedbackError::InvalidRating(0))
        ));
        assert!(matches!(
            fs.record_feedback(feedback("zz", 3), &registry),
            Err(FeedbackError::UnknownService(_))
        ));

        let fs = FeedbackStore::in_memory();
        fs.record_feedback(feedback("a", 4), &registry).unwrap();
        fs.record_feedback(feedback("a", 2), &registry).unwrap();
        assert_eq!(fs.mean_rating("a"), Some(3.0));
        assert_eq!(fs.mean_rating("b"), None);
    }

    #[test]
    fn feedback_journal_reloads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("feedback.jsonl");
        let registry = RegistryStore::in_memory();
        registry
            .save_service(certified(sample_record("a", "A")))
            .unwrap();
        {
            let fs = FeedbackStore::open(&path).unwrap();
            fs.record_feedback(feedback("a", 4), &registry).unwrap();
            fs.record_feedback(feedback("a", 1), &registry).unwrap();
            fs.flush().unwrap();
        }
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("{\"format\":\"wscr-feedback\",\"version\":1}\n"));
        let fs = FeedbackStore::open(&path).unwrap();
        assert_eq!(fs.len(), 2);
        assert_eq!(fs.mean_rating("a"), Some(2.5));
        assert_eq!(fs.rating_count("a"), 2);
    }
}
