//! Event-log ingestion: turns a recorded activity log into learning sessions.
//!
//! The log is an ordered stream of reader events (open/close, foreground
//! switches, idle transitions, page switches). A session starts on an
//! activation event and stops on the next termination event for the same
//! document. Nearby sessions on the same document are then merged, with the
//! gap time excluded from the merged duration.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kp::DocumentId;

/// What happened at one point of the activity log.
///
/// `DocOpened`, `ForegroundToDoc` and `IdleResume` activate a document;
/// `DocClosed`, `ForegroundFromDoc` and `IdleStart` terminate the running
/// session. `IdleStart` timestamps denote when idleness began, not when the
/// logger detected it, so the session is closed at the true cessation time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    DocOpened,
    DocClosed,
    ForegroundToDoc,
    ForegroundFromDoc,
    IdleStart,
    IdleResume,
    PageSwitch,
}

impl EventKind {
    /// Activation events open a session.
    pub fn starts_session(self) -> bool {
        matches!(
            self,
            EventKind::DocOpened | EventKind::ForegroundToDoc | EventKind::IdleResume
        )
    }

    /// Termination events close the running session.
    pub fn stops_session(self) -> bool {
        matches!(
            self,
            EventKind::DocClosed | EventKind::ForegroundFromDoc | EventKind::IdleStart
        )
    }
}

/// One record of the activity log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearningEvent {
    /// Absolute time, second resolution.
    pub ts: DateTime<Utc>,
    /// Document the event refers to.
    pub did: DocumentId,
    pub kind: EventKind,
    /// Page number (>= 1). Required for `PageSwitch`; activation events may
    /// carry the page visible on activation; termination events never do.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub page: Option<u32>,
}

impl LearningEvent {
    pub fn new(ts: DateTime<Utc>, did: impl Into<DocumentId>, kind: EventKind) -> Self {
        Self {
            ts,
            did: did.into(),
            kind,
            page: None,
        }
    }

    pub fn with_page(mut self, page: u32) -> Self {
        self.page = Some(page);
        self
    }
}

/// Active seconds spent on one page within a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageDwell {
    pub page: u32,
    pub seconds: u64,
}

/// A contiguous (or merged) interval of learning on one document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearningSession {
    pub did: DocumentId,
    pub start: DateTime<Utc>,
    pub stop: DateTime<Utc>,
    /// Active learning seconds. Equals `stop - start` for a raw session;
    /// after merging it excludes the gaps, so it may be less.
    pub duration_s: u64,
    /// Page-level dwell detail, in reading order. Zero-second dwells are
    /// dropped; merged sessions concatenate the page lists of their parts.
    pub pages: Vec<PageDwell>,
}

impl LearningSession {
    /// Deterministic identifier used for duplicate detection when recording.
    pub fn session_id(&self) -> String {
        format!(
            "{}:{}:{}",
            self.did,
            self.start.timestamp(),
            self.stop.timestamp()
        )
    }

    pub fn duration_minutes(&self) -> f64 {
        self.duration_s as f64 / 60.0
    }
}

/// Ingestion parameters.
///
/// `poll_period_s` and `idle_timeout_s` describe how the source log was
/// captured (the logger polls every `poll_period_s` seconds and flags idle
/// after `idle_timeout_s` without input); the reduction itself is purely
/// event-driven and only `merge_gap_s` affects its output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestConfig {
    pub poll_period_s: u64,
    pub idle_timeout_s: u64,
    /// Two same-document sessions closer than this are merged (default 30 min).
    pub merge_gap_s: u64,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            poll_period_s: 1,
            idle_timeout_s: 300,
            merge_gap_s: 1800,
        }
    }
}

impl IngestConfig {
    pub fn validate(&self) -> Result<(), IngestError> {
        for (field, value) in [
            ("poll_period_s", self.poll_period_s),
            ("idle_timeout_s", self.idle_timeout_s),
            ("merge_gap_s", self.merge_gap_s),
        ] {
            if value == 0 {
                return Err(IngestError::NonPositiveConfig { field });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("event {position}: timestamp goes backwards")]
    OutOfOrderTimestamps { position: usize },
    #[error("event {position}: PageSwitch without a page number")]
    MissingPage { position: usize },
    #[error("config field `{field}` must be strictly positive")]
    NonPositiveConfig { field: &'static str },
    #[error("event log line {line}: {source}")]
    MalformedRecord {
        line: usize,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Non-fatal oddities found while segmenting; the offending event is dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IngestWarning {
    /// Termination event for a document with no running session.
    CloseWithoutOpen { position: usize, did: DocumentId },
    /// Activation event for a document that already has a running session.
    AlreadyOpen { position: usize, did: DocumentId },
    /// Page switch outside any running session for that document.
    PageSwitchOutsideSession { position: usize, did: DocumentId },
    /// Log ended while a session was still running; the tail is discarded.
    UnterminatedSession { did: DocumentId, start: DateTime<Utc> },
}

impl std::fmt::Display for IngestWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IngestWarning::CloseWithoutOpen { position, did } => {
                write!(f, "event {position}: close without open for {did}, dropped")
            }
            IngestWarning::AlreadyOpen { position, did } => {
                write!(f, "event {position}: {did} already has a running session")
            }
            IngestWarning::PageSwitchOutsideSession { position, did } => {
                write!(f, "event {position}: page switch outside a session for {did}, dropped")
            }
            IngestWarning::UnterminatedSession { did, start } => {
                write!(f, "session on {did} started {start} never terminated, discarded")
            }
        }
    }
}

/// Result of [`segment_sessions`]: the sessions plus any dropped-event notes.
#[derive(Debug, Clone, Default)]
pub struct Segmentation {
    pub sessions: Vec<LearningSession>,
    pub warnings: Vec<IngestWarning>,
}

struct OpenSession {
    start: DateTime<Utc>,
    current_page: u32,
    page_since: DateTime<Utc>,
    pages: Vec<PageDwell>,
}

impl OpenSession {
    fn credit_page(&mut self, until: DateTime<Utc>) {
        let secs = (until - self.page_since).num_seconds().max(0) as u64;
        if secs > 0 {
            self.pages.push(PageDwell {
                page: self.current_page,
                seconds: secs,
            });
        }
    }
}

/// Splits a time-ordered event log into raw learning sessions.
///
/// A session for document `d` opens at an activation event for `d` and
/// closes at the next termination event for `d`; page dwell accumulates from
/// page switches in between. The output is sorted by `(start, stop, did)`.
pub fn segment_sessions(
    events: &[LearningEvent],
    cfg: &IngestConfig,
) -> Result<Segmentation, IngestError> {
    cfg.validate()?;

    let mut open: BTreeMap<DocumentId, OpenSession> = BTreeMap::new();
    let mut out = Segmentation::default();
    let mut prev_ts: Option<DateTime<Utc>> = None;

    for (position, event) in events.iter().enumerate() {
        if let Some(prev) = prev_ts {
            if event.ts < prev {
                return Err(IngestError::OutOfOrderTimestamps { position });
            }
        }
        prev_ts = Some(event.ts);

        match event.kind {
            k if k.starts_session() => {
                if open.contains_key(&event.did) {
                    out.warnings.push(IngestWarning::AlreadyOpen {
                        position,
                        did: event.did.clone(),
                    });
                    continue;
                }
                open.insert(
                    event.did.clone(),
                    OpenSession {
                        start: event.ts,
                        // Readers land on page 1 unless the event says otherwise.
                        current_page: event.page.unwrap_or(1),
                        page_since: event.ts,
                        pages: Vec::new(),
                    },
                );
            }
            k if k.stops_session() => match open.remove(&event.did) {
                Some(mut session) => {
                    session.credit_page(event.ts);
                    out.sessions.push(LearningSession {
                        did: event.did.clone(),
                        start: session.start,
                        stop: event.ts,
                        duration_s: (event.ts - session.start).num_seconds().max(0) as u64,
                        pages: session.pages,
                    });
                }
                None => out.warnings.push(IngestWarning::CloseWithoutOpen {
                    position,
                    did: event.did.clone(),
                }),
            },
            _ => {
                // PageSwitch
                let page = event
                    .page
                    .ok_or(IngestError::MissingPage { position })?;
                match open.get_mut(&event.did) {
                    Some(session) => {
                        session.credit_page(event.ts);
                        session.current_page = page;
                        session.page_since = event.ts;
                    }
                    None => out.warnings.push(IngestWarning::PageSwitchOutsideSession {
                        position,
                        did: event.did.clone(),
                    }),
                }
            }
        }
    }

    for (did, session) in open {
        out.warnings.push(IngestWarning::UnterminatedSession {
            did,
            start: session.start,
        });
    }

    out.sessions
        .sort_by(|a, b| (a.start, a.stop, &a.did).cmp(&(b.start, b.stop, &b.did)));
    Ok(out)
}

/// Coalesces same-document sessions separated by less than `merge_gap_s`.
///
/// Sessions are grouped per document in time order; a chain of sessions with
/// every gap strictly below the threshold becomes one session whose duration
/// is the sum of the parts (gap time is not learning time) and whose page
/// list is the concatenation of the parts'. Sessions on other documents in
/// between do not interrupt a chain.
pub fn merge_sessions(sessions: &[LearningSession], merge_gap_s: u64) -> Vec<LearningSession> {
    let mut by_doc: BTreeMap<&DocumentId, Vec<&LearningSession>> = BTreeMap::new();
    for session in sessions {
        by_doc.entry(&session.did).or_default().push(session);
    }

    let mut merged = Vec::with_capacity(sessions.len());
    for (_, mut chain) in by_doc {
        chain.sort_by_key(|s| (s.start, s.stop));
        let mut iter = chain.into_iter();
        let Some(first) = iter.next() else { continue };
        let mut current = first.clone();
        for next in iter {
            let gap = (next.start - current.stop).num_seconds();
            if gap >= 0 && (gap as u64) < merge_gap_s {
                current.stop = next.stop;
                current.duration_s += next.duration_s;
                current.pages.extend(next.pages.iter().cloned());
            } else {
                merged.push(std::mem::replace(&mut current, next.clone()));
            }
        }
        merged.push(current);
    }

    merged.sort_by(|a, b| (a.start, a.stop, &a.did).cmp(&(b.start, b.stop, &b.did)));
    merged
}

/// Parses a line-delimited event log (one JSON object per line).
pub fn parse_event_log(text: &str) -> Result<Vec<LearningEvent>, IngestError> {
    let mut events = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let event: LearningEvent = serde_json::from_str(trimmed)
            .map_err(|source| IngestError::MalformedRecord { line: idx + 1, source })?;
        events.push(event);
    }
    Ok(events)
}
