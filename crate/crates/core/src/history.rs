//! Per-topic learning histories and their durable store.
//!
//! Every session contributes one experience record to each Knowledge Point
//! it involved. The store is a single append-only file of line-delimited
//! JSON records keyed by topic id, with an in-memory index rebuilt at open;
//! replaying the log always reproduces the same histories.

use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::LearningSession;
use crate::kp::KnowledgePointId;
use crate::scalar::Real;
use crate::textshare::ShareVector;

/// How the learning happened; affects the method-effectiveness factor only
/// through the recorded `lm` value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearningMethod {
    #[default]
    Read,
    Listen,
    Discuss,
    Write,
}

/// One learning experience of one Knowledge Point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LearningExperience<R: Real> {
    /// Learning cessation time: when the session stopped. Memory decay is
    /// measured from here.
    pub lct: DateTime<Utc>,
    /// Session length in seconds (scores convert to minutes).
    pub duration_s: u64,
    /// The topic's share of the session text, in (0, 1].
    pub proportion: R,
    /// Physical/psychological state factor in [0, 1]; 1 when unlogged.
    pub pps: R,
    /// Learning-method effectiveness factor in [0, 1]; 1 when unlogged.
    pub lm: R,
    pub method: LearningMethod,
}

impl<R: Real> LearningExperience<R> {
    pub fn validate(&self) -> Result<(), HistoryError> {
        if self.duration_s == 0 {
            return Err(HistoryError::InvalidExperience { field: "duration_s" });
        }
        if self.proportion <= R::zero() || self.proportion > R::one() {
            return Err(HistoryError::InvalidExperience { field: "proportion" });
        }
        for (field, value) in [("pps", self.pps), ("lm", self.lm)] {
            if value < R::zero() || value > R::one() {
                return Err(HistoryError::InvalidExperience { field });
            }
        }
        Ok(())
    }

    pub fn duration_minutes(&self) -> R {
        R::from_secs(self.duration_s) / R::from_config(60.0)
    }
}

/// A Knowledge Point's time-ordered, append-only experience list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LearningHistory<R: Real> {
    pub kp: KnowledgePointId,
    pub experiences: Vec<LearningExperience<R>>,
}

impl<R: Real> LearningHistory<R> {
    pub fn empty(kp: KnowledgePointId) -> Self {
        Self {
            kp,
            experiences: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.experiences.is_empty()
    }

    pub fn len(&self) -> usize {
        self.experiences.len()
    }
}

#[derive(Debug, Error)]
pub enum HistoryError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("corrupt record at byte offset {offset}: {source}")]
    CorruptRecord {
        offset: u64,
        source: serde_json::Error,
    },
    #[error("session `{session_id}` was already recorded")]
    DuplicateSession { session_id: String },
    #[error("experience field `{field}` is out of range")]
    InvalidExperience { field: &'static str },
    #[error("factor `{field}` = {value} outside [0, 1]")]
    FactorOutOfRange { field: &'static str, value: f64 },
}

/// On-disk record: one line of the store file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
struct StoredRecord<R: Real> {
    kp: KnowledgePointId,
    lct: DateTime<Utc>,
    duration_s: u64,
    proportion: R,
    pps: R,
    lm: R,
    method: LearningMethod,
    session_id: String,
}

/// Append-only experience store with an in-memory index.
///
/// Single writer, many readers: writes go through `&mut self`, reads clone
/// from the index snapshot built at open. The file is only created once the
/// first record is appended.
#[derive(Debug)]
pub struct HistoryStore<R: Real> {
    path: PathBuf,
    index: BTreeMap<KnowledgePointId, Vec<LearningExperience<R>>>,
    recorded_sessions: HashSet<String>,
}

impl<R: Real> HistoryStore<R> {
    /// Opens a store, replaying the log if the file exists.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, HistoryError> {
        let path = path.as_ref().to_path_buf();
        let mut store = Self {
            path,
            index: BTreeMap::new(),
            recorded_sessions: HashSet::new(),
        };
        if store.path.exists() {
            store.replay()?;
        }
        Ok(store)
    }

    fn replay(&mut self) -> Result<(), HistoryError> {
        let file = File::open(&self.path)?;
        let mut reader = BufReader::new(file);
        let mut offset: u64 = 0;
        let mut line = String::new();
        loop {
            line.clear();
            let read = reader.read_line(&mut line)?;
            if read == 0 {
                break;
            }
            let trimmed = line.trim();
            if !trimmed.is_empty() {
                let record: StoredRecord<R> = serde_json::from_str(trimmed)
                    .map_err(|source| HistoryError::CorruptRecord { offset, source })?;
                self.apply(record);
            }
            offset += read as u64;
        }
        Ok(())
    }

    fn apply(&mut self, record: StoredRecord<R>) {
        let experience = LearningExperience {
            lct: record.lct,
            duration_s: record.duration_s,
            proportion: record.proportion,
            pps: record.pps,
            lm: record.lm,
            method: record.method,
        };
        self.recorded_sessions.insert(record.session_id);
        let list = self.index.entry(record.kp).or_default();
        // The file is append-ordered; histories expose cessation-time order.
        // Stable insertion keeps equal timestamps in append order.
        let pos = list.partition_point(|e| e.lct <= experience.lct);
        list.insert(pos, experience);
    }

    /// Appends one experience per Knowledge Point the session involved
    /// (every entry of `shares` is positive by construction).
    ///
    /// Returns the number of histories appended. The whole batch is written
    /// with a single write; on failure the file is rolled back to its
    /// pre-call length and the index is untouched. Re-recording a session id
    /// is rejected. Degenerate sessions (zero duration or no shares) append
    /// nothing.
    pub fn record_session(
        &mut self,
        session: &LearningSession,
        shares: &ShareVector<R>,
        pps: R,
        lm: R,
        method: LearningMethod,
    ) -> Result<usize, HistoryError> {
        for (field, value) in [("pps", pps), ("lm", lm)] {
            if value < R::zero() || value > R::one() {
                return Err(HistoryError::FactorOutOfRange {
                    field,
                    value: value.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        let session_id = session.session_id();
        if self.recorded_sessions.contains(&session_id) {
            return Err(HistoryError::DuplicateSession { session_id });
        }
        if session.duration_s == 0 || shares.is_empty() {
            return Ok(0);
        }

        let mut records = Vec::with_capacity(shares.len());
        for (kp, proportion) in shares.iter() {
            let record = StoredRecord {
                kp: kp.clone(),
                lct: session.stop,
                duration_s: session.duration_s,
                proportion,
                pps,
                lm,
                method,
                session_id: session_id.clone(),
            };
            let experience = LearningExperience {
                lct: record.lct,
                duration_s: record.duration_s,
                proportion: record.proportion,
                pps: record.pps,
                lm: record.lm,
                method: record.method,
            };
            experience.validate()?;
            records.push(record);
        }

        self.append_batch(&records)?;
        let count = records.len();
        for record in records {
            self.apply(record);
        }
        Ok(count)
    }

    fn append_batch(&self, records: &[StoredRecord<R>]) -> Result<(), HistoryError> {
        let mut buffer = String::new();
        for record in records {
            buffer.push_str(&serde_json::to_string(record).expect("record serializes"));
            buffer.push('\n');
        }

        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        let start = file.seek(SeekFrom::End(0))?;
        let outcome = file
            .write_all(buffer.as_bytes())
            .and_then(|()| file.flush())
            .and_then(|()| file.sync_data());
        if let Err(err) = outcome {
            // Roll the file back so a failed batch leaves no partial tail.
            let _ = file.set_len(start);
            return Err(err.into());
        }
        Ok(())
    }

    /// All experiences for a topic, in cessation-time order. A topic that
    /// was never learned has an empty history.
    pub fn load_history(&self, kp: &KnowledgePointId) -> LearningHistory<R> {
        LearningHistory {
            kp: kp.clone(),
            experiences: self.index.get(kp).cloned().unwrap_or_default(),
        }
    }

    /// Topics with at least one experience.
    pub fn kp_ids(&self) -> impl Iterator<Item = &KnowledgePointId> {
        self.index.keys()
    }

    pub fn session_count(&self) -> usize {
        self.recorded_sessions.len()
    }

    pub fn experience_count(&self) -> usize {
        self.index.values().map(Vec::len).sum()
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::PageDwell;
    use chrono::TimeZone;
    use std::collections::BTreeMap;

    fn at(secs: i64) -> DateTime<Utc> {
        Utc.timestamp_opt(1_463_490_000 + secs, 0).unwrap()
    }

    fn session(did: &str, start: i64, stop: i64) -> LearningSession {
        LearningSession {
            did: did.into(),
            start: at(start),
            stop: at(stop),
            duration_s: (stop - start) as u64,
            pages: vec![PageDwell {
                page: 1,
                seconds: (stop - start) as u64,
            }],
        }
    }

    fn shares(pairs: &[(&str, f64)]) -> ShareVector<f64> {
        let map: BTreeMap<KnowledgePointId, f64> = pairs
            .iter()
            .map(|(id, s)| (KnowledgePointId::from(*id), *s))
            .collect();
        ShareVector::from_raw(map).unwrap()
    }

    fn temp_store() -> (tempfile::TempDir, HistoryStore<f64>) {
        let dir = tempfile::tempdir().unwrap();
        let store = HistoryStore::open(dir.path().join("profile.db")).unwrap();
        (dir, store)
    }

    #[test]
    fn one_session_appends_one_experience_per_kp() {
        let (_dir, mut store) = temp_store();
        let n = store
            .record_session(
                &session("d1", 0, 3600),
                &shares(&[("A", 0.6), ("B", 0.4)]),
                1.0,
                1.0,
                LearningMethod::Read,
            )
            .unwrap();
        assert_eq!(n, 2);
        let a = store.load_history(&"A".into());
        assert_eq!(a.len(), 1);
        assert_eq!(a.experiences[0].duration_s, 3600);
        assert_eq!(a.experiences[0].proportion, 0.6);
        assert_eq!(a.experiences[0].lct, at(3600));
        let b = store.load_history(&"B".into());
        assert_eq!(b.experiences[0].proportion, 0.4);
    }

    #[test]
    fn empty_shares_append_nothing() {
        let (_dir, mut store) = temp_store();
        let n = store
            .record_session(
                &session("d1", 0, 3600),
                &ShareVector::empty(),
                1.0,
                1.0,
                LearningMethod::Read,
            )
            .unwrap();
        assert_eq!(n, 0);
        assert_eq!(store.experience_count(), 0);
    }

    #[test]
    fn duplicate_session_is_rejected() {
        let (_dir, mut store) = temp_store();
        let s = session("d1", 0, 3600);
        let v = shares(&[("A", 1.0)]);
        store
            .record_session(&s, &v, 1.0, 1.0, LearningMethod::Read)
            .unwrap();
        assert!(matches!(
            store.record_session(&s, &v, 1.0, 1.0, LearningMethod::Read),
            Err(HistoryError::DuplicateSession { .. })
        ));
        assert_eq!(store.load_history(&"A".into()).len(), 1);
    }

    #[test]
    fn absent_kp_has_empty_history() {
        let (_dir, store) = temp_store();
        assert!(store.load_history(&"nope".into()).is_empty());
    }

    #[test]
    fn interleaved_appends_keep_histories_isolated() {
        let (_dir, mut store) = temp_store();
        store
            .record_session(&session("d1", 0, 600), &shares(&[("A", 1.0)]), 1.0, 1.0, LearningMethod::Read)
            .unwrap();
        store
            .record_session(
                &session("d2", 700, 1300),
                &shares(&[("B", 1.0)]),
                1.0,
                1.0,
                LearningMethod::Listen,
            )
            .unwrap();
        store
            .record_session(
                &session("d1", 4000, 4600),
                &shares(&[("A", 0.5), ("B", 0.5)]),
                1.0,
                1.0,
                LearningMethod::Read,
            )
            .unwrap();
        let a = store.load_history(&"A".into());
        let b = store.load_history(&"B".into());
        assert_eq!(a.len(), 2);
        assert_eq!(b.len(), 2);
        assert!(a.experiences.windows(2).all(|w| w[0].lct <= w[1].lct));
        assert_eq!(b.experiences[0].method, LearningMethod::Listen);
    }

    #[test]
    fn reopen_replays_identical_histories() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profile.db");
        let mut before: BTreeMap<KnowledgePointId, LearningHistory<f64>> = BTreeMap::new();
        {
            let mut store = HistoryStore::open(&path).unwrap();
            store
                .record_session(
                    &session("d1", 0, 3600),
                    &shares(&[("A", 0.6), ("B", 0.4)]),
                    0.9,
                    0.8,
                    LearningMethod::Discuss,
                )
                .unwrap();
            store
                .record_session(&session("d2", 86_400, 90_000), &shares(&[("A", 1.0)]), 1.0, 1.0, LearningMethod::Read)
                .unwrap();
            for kp in store.kp_ids() {
                before.insert(kp.clone(), store.load_history(kp));
            }
        }
        let store: HistoryStore<f64> = HistoryStore::open(&path).unwrap();
        assert_eq!(store.session_count(), 2);
        for (kp, history) in &before {
            assert_eq!(&store.load_history(kp), history);
        }
    }

    #[test]
    fn duplicate_detection_survives_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profile.db");
        let s = session("d1", 0, 3600);
        {
            let mut store: HistoryStore<f64> = HistoryStore::open(&path).unwrap();
            store
                .record_session(&s, &shares(&[("A", 1.0)]), 1.0, 1.0, LearningMethod::Read)
                .unwrap();
        }
        let mut store: HistoryStore<f64> = HistoryStore::open(&path).unwrap();
        assert!(matches!(
            store.record_session(&s, &shares(&[("A", 1.0)]), 1.0, 1.0, LearningMethod::Read),
            Err(HistoryError::DuplicateSession { .. })
        ));
    }

    #[test]
    fn corrupt_record_reports_byte_offset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("profile.db");
        {
            let mut store: HistoryStore<f64> = HistoryStore::open(&path).unwrap();
            store
                .record_session(&session("d1", 0, 600), &shares(&[("A", 1.0)]), 1.0, 1.0, LearningMethod::Read)
                .unwrap();
        }
        let good_len = std::fs::metadata(&path).unwrap().len();
        let mut file = OpenOptions::new().append(true).open(&path).unwrap();
        file.write_all(b"{ torn line\n").unwrap();
        drop(file);
        match HistoryStore::<f64>::open(&path) {
            Err(HistoryError::CorruptRecord { offset, .. }) => assert_eq!(offset, good_len),
            other => panic!("expected corrupt record, got {other:?}"),
        }
    }

    #[test]
    fn out_of_range_factors_are_rejected() {
        let (_dir, mut store) = temp_store();
        assert!(matches!(
            store.record_session(
                &session("d1", 0, 600),
                &shares(&[("A", 1.0)]),
                1.5,
                1.0,
                LearningMethod::Read
            ),
            Err(HistoryError::FactorOutOfRange { field: "pps", .. })
        ));
    }

    #[test]
    fn late_arriving_older_log_keeps_histories_time_ordered() {
        let (_dir, mut store) = temp_store();
        store
            .record_session(&session("d1", 86_400, 90_000), &shares(&[("A", 1.0)]), 1.0, 1.0, LearningMethod::Read)
            .unwrap();
        store
            .record_session(&session("d1", 0, 600), &shares(&[("A", 1.0)]), 1.0, 1.0, LearningMethod::Read)
            .unwrap();
        let history = store.load_history(&"A".into());
        assert_eq!(history.len(), 2);
        assert!(history.experiences[0].lct < history.experiences[1].lct);
    }
}
