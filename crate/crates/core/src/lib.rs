//! Personal knowledge analytics: estimates how familiar a person is with
//! conceptual knowledge topics from logged learning activity, and
//! recommends what to learn next.
//!
//! The pipeline:
//!
//! 1. [`ingest`] segments an activity event log into learning sessions and
//!    merges nearby sessions on the same material;
//! 2. [`textshare`] computes each topic's share of a session's text, from
//!    normalized term frequency or imported topic-model output;
//! 3. [`history`] appends one experience per involved topic to a durable
//!    per-topic learning history;
//! 4. [`familiarity`] scores a history with Ebbinghaus memory decay, in gl;
//! 5. [`tree`] builds a topic's prerequisite closure from definitions and
//!    turns scores into a percent of understanding;
//! 6. [`caiml`] counts each document's not-understood topics, recommends
//!    the easiest next document, and plans full learning sequences.
//!
//! The numeric core is generic over the scalar type through
//! [`scalar::Real`]; the aliases at the crate root fix it to `f64`.

pub mod caiml;
pub mod familiarity;
pub mod fixtures;
pub mod history;
pub mod ingest;
pub mod kp;
pub mod scalar;
pub mod textshare;
pub mod tree;

pub use ingest::{
    merge_sessions, parse_event_log, segment_sessions, EventKind, IngestConfig, IngestError,
    IngestWarning, LearningEvent, LearningSession, PageDwell, Segmentation,
};
pub use kp::{DocumentId, KnowledgePointId};
pub use textshare::{count_terms, tokenize, KpDictionary, KpEntry, Term, TermStats};
pub use tree::{build_tree, Classification, CycleBreak, Definition, UnderstandingTree};

/// `f64` aliases for the scalar-generic types.
pub type ShareVector = textshare::ShareVector<f64>;
pub type TopicModelOutput = textshare::TopicModelOutput<f64>;
pub type LearningExperience = history::LearningExperience<f64>;
pub type LearningHistory = history::LearningHistory<f64>;
pub type HistoryStore = history::HistoryStore<f64>;
pub type RetentionParams = familiarity::RetentionParams<f64>;
pub type FamiliarityScore = familiarity::FamiliarityScore<f64>;
pub type SiblingCompensation = familiarity::SiblingCompensation<f64>;
pub type SiblingTerm = familiarity::SiblingTerm<f64>;
pub type UnderstandingReport = tree::UnderstandingReport<f64>;
pub type TreeExportNode = tree::TreeExportNode<f64>;
pub type DocumentProfile = caiml::DocumentProfile<f64>;
pub type KnowledgeState = caiml::KnowledgeState<f64>;
pub type Plan = caiml::Plan<f64>;
pub type CoupledPlanParams = caiml::CoupledPlanParams<f64>;
