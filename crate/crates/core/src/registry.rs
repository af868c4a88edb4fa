// SPDX-License-Identifier: Apache-2.0

//! UDDI-like registry of published services.
//!
//! Records live in an in-memory map guarded by a single-writer lock. When the
//! store is opened on a snapshot path, every accepted record is first appended
//! to a write-ahead journal next to the snapshot; [`RegistryStore::checkpoint`]
//! folds the journal into a fresh snapshot.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decimal::Decimal;
use crate::publisher::{self, Certificate};
use crate::qos::{QosAttribute, QosProfile};

pub const SNAPSHOT_FORMAT: &str = "wscr-snapshot";
pub const SNAPSHOT_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProviderInfo {
    pub company_name: String,
    pub address: String,
    pub website: String,
    pub contact: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ResourceType {
    Compute,
    Storage,
    Communication,
}

impl ResourceType {
    pub const ALL: [ResourceType; 3] = [
        ResourceType::Compute,
        ResourceType::Storage,
        ResourceType::Communication,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ResourceType::Compute => "Compute",
            ResourceType::Storage => "Storage",
            ResourceType::Communication => "Communication",
        }
    }
}

impl fmt::Display for ResourceType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ResourceType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ResourceType::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown resource type `{s}`"))
    }
}

/// Half-open availability window `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimeSlot {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

impl TimeSlot {
    pub fn new(start: DateTime<Utc>, end: DateTime<Utc>) -> Result<Self, RecordError> {
        if start < end {
            Ok(TimeSlot { start, end })
        } else {
            Err(RecordError::EmptyTimeSlot)
        }
    }

    pub fn contains(&self, other: &TimeSlot) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServiceRecord {
    pub service_key: String,
    pub name: String,
    pub keywords: BTreeSet<String>,
    pub concept: String,
    pub description: String,
    pub provider: ProviderInfo,
    pub resource_type: ResourceType,
    pub qos: QosProfile,
    pub time_slots: Vec<TimeSlot>,
    pub certificate: Option<Certificate>,
}

/// Technical metadata derived from a record's QoS profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TModel {
    pub tmodel_key: String,
    pub service_key: String,
    pub entries: BTreeMap<QosAttribute, Decimal>,
}

impl TModel {
    pub fn derive(record: &ServiceRecord) -> Self {
        TModel {
            tmodel_key: format!("tmodel:{}", record.service_key),
            service_key: record.service_key.clone(),
            entries: record.qos.entries(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordError {
    #[error("service_key must not be empty")]
    EmptyKey,
    #[error("service name must not be empty")]
    EmptyName,
    #[error("provider company_name must not be empty")]
    EmptyCompany,
    #[error("provider website `{0}` is not an absolute URL")]
    BadWebsite(String),
    #[error("keyword `{0}` is not a lowercase token")]
    BadKeyword(String),
    #[error("time slot start must precede end")]
    EmptyTimeSlot,
}

/// Lowercases and trims each keyword, dropping empties.
pub fn normalize_keywords<I, S>(words: I) -> BTreeSet<String>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    words
        .into_iter()
        .map(|w| w.as_ref().trim().to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}

/// Lowercase with internal whitespace runs collapsed to one space.
pub fn normalize_name(name: &str) -> String {
    name.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

impl ServiceRecord {
    /// Structural invariants, excluding certificate and ontology checks.
    pub fn check(&self) -> Result<(), RecordError> {
        if self.service_key.trim().is_empty() {
            return Err(RecordError::EmptyKey);
        }
        if self.name.trim().is_empty() {
            return Err(RecordError::EmptyName);
        }
        if self.provider.company_name.trim().is_empty() {
            return Err(RecordError::EmptyCompany);
        }
        if !self.provider.website.is_empty() && url::Url::parse(&self.provider.website).is_err() {
            return Err(RecordError::BadWebsite(self.provider.website.clone()));
        }
        for k in &self.keywords {
            let ok = !k.is_empty()
                && !k.contains(',')
                && !k.chars().any(char::is_whitespace)
                && k.to_lowercase() == *k;
            if !ok {
                return Err(RecordError::BadKeyword(k.clone()));
            }
        }
        if self.time_slots.iter().any(|s| s.start >= s.end) {
            return Err(RecordError::EmptyTimeSlot);
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("DuplicateKey: service `{0}` is already registered")]
    DuplicateKey(String),
    #[error("MissingCertificate: service `{0}` has no certificate")]
    MissingCertificate(String),
    #[error("InvalidCertificate: certificate does not match service `{0}`")]
    InvalidCertificate(String),
    #[error("InvalidRecord: {0}")]
    InvalidRecord(#[from] RecordError),
    #[error("CorruptSnapshot: line {line}: {reason}")]
    CorruptSnapshot { line: usize, reason: String },
    #[error("io error: {0}")]
    Io(#[from] io::Error),
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u64,
}

/// Canonical single-line JSON for a record: sorted keys, six-digit decimals.
pub fn canonical_json(record: &ServiceRecord) -> String {
    // serde_json::Value objects are BTreeMap-backed, which sorts keys.
    let value = serde_json::to_value(record).expect("record serializes");
    value.to_string()
}

pub(crate) fn header_line(format: &str) -> String {
    serde_json::to_value(Header {
        format: format.to_string(),
        version: SNAPSHOT_VERSION,
    })
    .expect("header serializes")
    .to_string()
}

/// Reads a line-delimited JSON file with the standard header. `parse` is
/// applied to each body line and gets its 1-based line number.
pub(crate) fn read_ndjson<T>(
    path: &Path,
    format: &str,
    mut parse: impl FnMut(usize, &str) -> Result<T, String>,
) -> Result<Vec<T>, StoreError> {
    let corrupt = |line, reason: String| StoreError::CorruptSnapshot { line, reason };
    let raw = fs::read_to_string(path)?;
    if raw.is_empty() {
        return Err(corrupt(1, "missing header".into()));
    }
    let mut out = Vec::new();
    let lines: Vec<&str> = raw.split_inclusive('\n').collect();
    for (idx, chunk) in lines.iter().enumerate() {
        let line_no = idx + 1;
        let Some(line) = chunk.strip_suffix('\n') else {
            return Err(corrupt(line_no, "truncated line".into()));
        };
        if line_no == 1 {
            let header: Header =
                serde_json::from_str(line).map_err(|e| corrupt(1, format!("bad header: {e}")))?;
            if header.format != format || header.version != SNAPSHOT_VERSION {
                return Err(corrupt(
                    1,
                    format!("unsupported header {}/{}", header.format, header.version),
                ));
            }
            continue;
        }
        out.push(parse(line_no, line).map_err(|reason| corrupt(line_no, reason))?);
    }
    Ok(out)
}

pub(crate) fn write_ndjson_atomic(
    path: &Path,
    format: &str,
    lines: impl IntoIterator<Item = String>,
) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        writeln!(w, "{}", header_line(format))?;
        for line in lines {
            writeln!(w, "{line}")?;
        }
        w.into_inner()?.sync_all()?;
    }
    fs::rename(tmp, path)
}

#[derive(Default)]
struct State {
    records: BTreeMap<String, ServiceRecord>,
    tmodels: BTreeMap<String, TModel>,
}

impl State {
    fn insert(&mut self, record: ServiceRecord) {
        let tmodel = TModel::derive(&record);
        self.tmodels.insert(record.service_key.clone(), tmodel);
        self.records.insert(record.service_key.clone(), record);
    }
}

struct Journal {
    snapshot_path: PathBuf,
    journal_path: PathBuf,
    file: File,
}

pub struct RegistryStore {
    state: RwLock<State>,
    journal: Option<Mutex<Journal>>,
}

impl Default for RegistryStore {
    fn default() -> Self {
        Self::in_memory()
    }
}

impl fmt::Debug for RegistryStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RegistryStore")
            .field("records", &self.len())
            .field("persistent", &self.journal.is_some())
            .finish()
    }
}

fn parse_record_line(line: &str) -> Result<ServiceRecord, String> {
    let record: ServiceRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
    record.check().map_err(|e| e.to_string())?;
    match &record.certificate {
        Some(cert) if publisher::verify_certificate(&record, cert) => Ok(record),
        Some(_) => Err(format!("certificate mismatch for `{}`", record.service_key)),
        None => Err(format!(
            "record `{}` has no certificate",
            record.service_key
        )),
    }
}

impl RegistryStore {
    pub fn in_memory() -> Self {
        RegistryStore {
            state: RwLock::new(State::default()),
            journal: None,
        }
    }

    /// Opens a persistent store: loads the snapshot at `snapshot_path` if it
    /// exists, then replays `<snapshot_path>.journal`.
    pub fn open(snapshot_path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let snapshot_path = snapshot_path.as_ref().to_path_buf();
        let journal_path = journal_path_for(&snapshot_path);
        let store = RegistryStore::in_memory();
        if snapshot_path.exists() {
            store.restore(&snapshot_path)?;
        }
        if journal_path.exists() {
            store.replay_journal(&journal_path)?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&journal_path)?;
        if file.metadata()?.len() == 0 {
            writeln!(&file, "{}", header_line(SNAPSHOT_FORMAT))?;
        }
        Ok(RegistryStore {
            state: store.state,
            journal: Some(Mutex::new(Journal {
                snapshot_path,
                journal_path,
                file,
            })),
        })
    }

    fn replay_journal(&self, path: &Path) -> Result<(), StoreError> {
        let file = File::open(path)?;
        let mut reader = BufReader::new(file);
        let mut buf = String::new();
        let mut line_no = 0;
        let mut state = self.state.write().expect("registry lock poisoned");
        loop {
            buf.clear();
            if reader.read_line(&mut buf)? == 0 {
                break;
            }
            line_no += 1;
            let Some(line) = buf.strip_suffix('\n') else {
                // torn final append; the write never completed
                log::warn!(
                    "discarding torn journal line {line_no} in {}",
                    path.display()
                );
                break;
            };
            if line_no == 1 {
                continue;
            }
            let record = parse_record_line(line).map_err(|reason| StoreError::CorruptSnapshot {
                line: line_no,
                reason,
            })?;
            if state.records.contains_key(&record.service_key) {
                return Err(StoreError::CorruptSnapshot {
                    line: line_no,
                    reason: format!("duplicate key `{}`", record.service_key),
                });
            }
            state.insert(record);
        }
        Ok(())
    }

    pub fn save_service(&self, record: ServiceRecord) -> Result<String, StoreError> {
        record.check()?;
        let Some(cert) = &record.certificate else {
            return Err(StoreError::MissingCertificate(record.service_key.clone()));
        };
        if !publisher::verify_certificate(&record, cert) {
            return Err(StoreError::InvalidCertificate(record.service_key.clone()));
        }
        let mut state = self.state.write().expect("registry lock poisoned");
        if state.records.contains_key(&record.service_key) {
            return Err(StoreError::DuplicateKey(record.service_key.clone()));
        }
        if let Some(journal) = &self.journal {
            let mut j = journal.lock().expect("journal lock poisoned");
            writeln!(j.file, "{}", canonical_json(&record))?;
            j.file.flush()?;
        }
        let key = record.service_key.clone();
        state.insert(record);
        Ok(key)
    }

    pub fn get(&self, key: &str) -> Option<ServiceRecord> {
        self.read(|records| records.get(key).cloned())
    }

    pub fn tmodel(&self, key: &str) -> Option<TModel> {
        self.state
            .read()
            .expect("registry lock poisoned")
            .tmodels
            .get(key)
            .cloned()
    }

    pub fn contains(&self, key: &str) -> bool {
        self.read(|records| records.contains_key(key))
    }

    pub fn len(&self) -> usize {
        self.read(BTreeMap::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Runs `f` against a consistent view of all records, in key order.
    pub fn read<R>(&self, f: impl FnOnce(&BTreeMap<String, ServiceRecord>) -> R) -> R {
        let state = self.state.read().expect("registry lock poisoned");
        f(&state.records)
    }

    pub fn records(&self) -> Vec<ServiceRecord> {
        self.read(|records| records.values().cloned().collect())
    }

    /// Exact-name recall: case-insensitive, whitespace-normalized equality.
    pub fn search_by_name(&self, name: &str) -> Vec<ServiceRecord> {
        let wanted = normalize_name(name);
        if wanted.is_empty() {
            return Vec::new();
        }
        self.read(|records| {
            records
                .values()
                .filter(|r| normalize_name(&r.name) == wanted)
                .cloned()
                .collect()
        })
    }

    /// Writes every record to `path`; returns the record count.
    pub fn snapshot(&self, path: impl AsRef<Path>) -> Result<usize, StoreError> {
        let state = self.state.read().expect("registry lock poisoned");
        let lines: Vec<String> = state.records.values().map(canonical_json).collect();
        let count = lines.len();
        write_ndjson_atomic(path.as_ref(), SNAPSHOT_FORMAT, lines)?;
        Ok(count)
    }

    /// Replaces the store contents with the snapshot at `path`. Nothing is
    /// replaced if any line fails to parse.
    pub fn restore(&self, path: impl AsRef<Path>) -> Result<usize, StoreError> {
        let mut seen = BTreeSet::new();
        let records = read_ndjson(path.as_ref(), SNAPSHOT_FORMAT, |_, line| {
            let record = parse_record_line(line)?;
            if !seen.insert(record.service_key.clone()) {
                return Err(format!("duplicate key `{}`", record.service_key));
            }
            Ok(record)
        })?;
        let count = records.len();
        let mut fresh = State::default();
        for r in records {
            fresh.insert(r);
        }
        *self.state.write().expect("registry lock poisoned") = fresh;
        Ok(count)
    }

    /// Folds the journal into the snapshot file. No-op for in-memory stores.
    pub fn checkpoint(&self) -> Result<(), StoreError> {
        let Some(journal) = &self.journal else {
            return Ok(());
        };
        // lock order matches save_service: state, then journal
        let state = self.state.read().expect("registry lock poisoned");
        let mut j = journal.lock().expect("journal lock poisoned");
        let lines = state.records.values().map(canonical_json);
        write_ndjson_atomic(&j.snapshot_path, SNAPSHOT_FORMAT, lines)?;
        let file = File::create(&j.journal_path)?;
        writeln!(&file, "{}", header_line(SNAPSHOT_FORMAT))?;
        j.file = OpenOptions::new().append(true).open(&j.journal_path)?;
        Ok(())
    }
}

pub fn journal_path_for(snapshot_path: &Path) -> PathBuf {
    let mut s = snapshot_path.as_os_str().to_owned();
    s.push(".journal");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{certified, sample_record};

    #[test]
    fn save_then_get_round_trips() {
        let store = RegistryStore::in_memory();
        let rec = certified(sample_record("svc-001", "Currency Converter"));
        assert_eq!(store.save_service(rec.clone()).unwrap(), "svc-001");
        assert_eq!(store.get("svc-001").unwrap(), rec);
        let tm = store.tmodel("svc-001").unwrap();
        assert_eq!(tm.entries.len(), 7);
        assert_eq!(tm.entries, rec.qos.entries());
    }

    #[test]
    fn duplicate_key_rejected() {
        let store = RegistryStore::in_memory();
        let rec = certified(sample_record("svc-001", "A"));
        store.save_service(rec.clone()).unwrap();
        assert!(matches!(
            store.save_service(rec),
            Err(StoreError::DuplicateKey(k)) if k == "svc-001"
        ));
        assert_eq!(store.len(), 1);
    }

    #[test]
    fn missing_certificate_rejected() {
        let store = RegistryStore::in_memory();
        let rec = sample_record("svc-001", "A");
        assert!(matches!(
            store.save_service(rec),
            Err(StoreError::MissingCertificate(_))
        ));
        assert!(store.is_empty());
    }

    #[test]
    fn tampered_certificate_rejected() {
        let store = RegistryStore::in_memory();
        let mut rec = certified(sample_record("svc-001", "A"));
        rec.qos.price = Decimal::from_int(99);
        assert!(matches!(
            store.save_service(rec),
            Err(StoreError::InvalidCertificate(_))
        ));
    }

    #[test]
    fn search_normalizes_case_and_whitespace() {
        let store = RegistryStore::in_memory();
        store
            .save_service(certified(sample_record("svc-001", "currency  converter")))
            .unwrap();
        store
            .save_service(certified(sample_record("svc-002", "Weather")))
            .unwrap();
        let hits = store.search_by_name("Currency Converter");
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].service_key, "svc-001");
        assert!(store.search_by_name("Stock Quote").is_empty());
        assert!(store.search_by_name("   ").is_empty());
    }

    #[test]
    fn search_returns_all_same_name_in_key_order() {
        let store = RegistryStore::in_memory();
        for key in ["k3", "k1", "k2"] {
            store
                .save_service(certified(sample_record(key, "X")))
                .unwrap();
        }
        store
            .save_service(certified(sample_record("k0", "Y")))
            .unwrap();
        let oracle: Vec<String> = store
            .records()
            .into_iter()
            .filter(|r| r.name == "X")
            .map(|r| r.service_key)
            .collect();
        let keys: Vec<_> = store
            .search_by_name("x")
            .into_iter()
            .map(|r| r.service_key)
            .collect();
        assert_eq!(keys, oracle);
        assert_eq!(keys, vec!["k1", "k2", "k3"]);
    }

    #[test]
    fn empty_snapshot_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.jsonl");
        let store = RegistryStore::in_memory();
        assert_eq!(store.snapshot(&path).unwrap(), 0);
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "{\"format\":\"wscr-snapshot\",\"version\":1}\n");
        assert_eq!(RegistryStore::in_memory().restore(&path).unwrap(), 0);
    }

    #[test]
    fn snapshot_lines_are_canonical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.jsonl");
        let store = RegistryStore::in_memory();
        store
            .save_service(certified(sample_record("svc-001", "A")))
            .unwrap();
        store.snapshot(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let line = text.lines().nth(1).unwrap();
        assert!(line.contains("\"availability\":0.999000"));
        assert!(line.contains("\"response_time\":200.000000"));
        let value: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(value.to_string(), line);
        for pair in [
            "certificate",
            "concept",
            "description",
            "keywords",
            "name",
            "provider",
        ]
        .windows(2)
        {
            let a = line.find(&format!("\"{}\":", pair[0])).unwrap();
            let b = line.find(&format!("\"{}\":", pair[1])).unwrap();
            assert!(a < b, "{pair:?}");
        }
        assert!(line.find("\"certificate\"").unwrap() < line.find("\"concept\"").unwrap());
    }

    #[test]
    fn truncated_snapshot_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.jsonl");
        let store = RegistryStore::in_memory();
        for i in 0..3 {
            store
                .save_service(certified(sample_record(&format!("svc-{i}"), "A")))
                .unwrap();
        }
        store.snapshot(&path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let cut = text.len() - 40;
        fs::write(&path, &text[..cut]).unwrap();
        let target = RegistryStore::in_memory();
        match target.restore(&path) {
            Err(StoreError::CorruptSnapshot { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected CorruptSnapshot, got {other:?}"),
        }
        assert!(target.is_empty());
    }

    #[test]
    fn bad_header_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.jsonl");
        fs::write(&path, "{\"format\":\"other\",\"version\":1}\n").unwrap();
        assert!(matches!(
            RegistryStore::in_memory().restore(&path),
            Err(StoreError::CorruptSnapshot { line: 1, .. })
        ));
    }

    #[test]
    fn journal_survives_reopen_and_checkpoint() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("registry.jsonl");
        {
            let store = RegistryStore::open(&path).unwrap();
            store
                .save_service(certified(sample_record("a", "A")))
                .unwrap();
            store
                .save_service(certified(sample_record("b", "B")))
                .unwrap();
        }
        assert!(!path.exists());
        {
            let store = RegistryStore::open(&path).unwrap();
            assert_eq!(store.len(), 2);
            store.checkpoint().unwrap();
            store
                .save_service(certified(sample_record("c", "C")))
                .unwrap();
        }
        let journal = fs::read_to_string(journal_path_for(&path)).unwrap();
        assert_eq!(journal.lines().count(), 2);
        let store = RegistryStore::open(&path).unwrap();
        let keys: Vec<_> = store.records().into_iter().map(|r| r.service_key).collect();
        assert_eq!(keys, vec!["a", "b", "c"]);
    }

    #[test]
    fn torn_journal_tail_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("registry.jsonl");
        {
            let store = RegistryStore::open(&path).unwrap();
            store
                .save_service(certified(sample_record("a", "A")))
                .unwrap();
        }
        let jp = journal_path_for(&path);
        let mut f = OpenOptions::new().append(true).open(&jp).unwrap();
        write!(f, "{{\"service_key\":\"b\"").unwrap();
        drop(f);
        let store = RegistryStore::open(&path).unwrap();
        assert_eq!(store.len(), 1);
    }

    #[test]
    fn record_invariants() {
        let mut rec = sample_record("k", "N");
        rec.provider.website = "not a url".into();
        assert!(matches!(rec.check(), Err(RecordError::BadWebsite(_))));
        rec.provider.website = String::new();
        assert!(rec.check().is_ok());
        rec.keywords.insert("Upper".into());
        assert!(matches!(rec.check(), Err(RecordError::BadKeyword(_))));
        let mut rec = sample_record("k", "  ");
        assert_eq!(rec.check(), Err(RecordError::EmptyName));
        rec.name = "ok".into();
        rec.provider.company_name.clear();
        assert_eq!(rec.check(), Err(RecordError::EmptyCompany));
    }

    #[test]
    fn time_slot_containment() {
        let t =
            |h: u32, m: u32| chrono::TimeZone::with_ymd_and_hms(&Utc, 2024, 1, 1, h, m, 0).unwrap();
        let window = TimeSlot::new(t(10, 0), t(11, 0)).unwrap();
        assert!(TimeSlot::new(t(9, 0), t(12, 0)).unwrap().contains(&window));
        assert!(!TimeSlot::new(t(10, 30), t(12, 0))
            .unwrap()
            .contains(&window));
        assert!(TimeSlot::new(t(11, 0), t(10, 0)).is_err());
    }
}
