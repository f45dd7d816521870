//! Document recommendation and learning-sequence planning.
//!
//! The recommender counts, per document, the unique Not-Understood topics in
//! the union of the document's topics and their prerequisite closures, and
//! returns the documents with the smallest count: the easiest material to
//! learn meaningfully right now. The planner repeats that choice, learning
//! one document per step under idealized semantics (a document's defined
//! topic becomes understood when nothing else in the document blocks it) and
//! emits the full count matrix of the run.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::familiarity::{familiarity, FamiliarityFormula, RetentionParams};
use crate::history::{LearningExperience, LearningHistory, LearningMethod};
use crate::kp::{DocumentId, KnowledgePointId};
use crate::scalar::Real;
use crate::tree::{percent_understanding, Definition, TreeError, UnderstandingTree};

#[derive(Debug, Error)]
pub enum CaimlError {
    #[error("no understanding tree for non-basic knowledge point `{kp}`")]
    MissingTree { kp: KnowledgePointId },
    #[error("document `{doc}` has no knowledge-point shares")]
    EmptyShares { doc: DocumentId },
    #[error("document shares of `{doc}` sum to {sum}, expected 1")]
    SharesNotNormalized { doc: DocumentId, sum: f64 },
    #[error("document `{doc}` does not contain the topic it defines")]
    DefinesNotInShares { doc: DocumentId },
    #[error("no documents to recommend from")]
    NoDocuments,
    #[error("unknown document `{doc}` in forced order")]
    UnknownDocument { doc: DocumentId },
    #[error("document `{doc}` appears more than once in forced order")]
    DuplicateDocument { doc: DocumentId },
    #[error("forced order covers {got} of {expected} documents")]
    IncompleteOrder { expected: usize, got: usize },
    #[error(
        "step {step}: `{doc}` has {count} not-understood topics but the minimum is {min_count}"
    )]
    NotGreedy {
        step: usize,
        doc: DocumentId,
        count: usize,
        min_count: usize,
    },
    #[error("no document can make progress; blocked topics: {}", blocked.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(", "))]
    Deadlock { blocked: Vec<KnowledgePointId> },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Familiarity(#[from] crate::familiarity::FamiliarityError),
}

/// A learnable document: its topic shares and, optionally, the single topic
/// it serves as a definition of.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DocumentProfile<R: Real> {
    pub doc_id: DocumentId,
    /// Topic shares, summing to one.
    pub kp_shares: BTreeMap<KnowledgePointId, R>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defines: Option<KnowledgePointId>,
}

impl<R: Real> DocumentProfile<R> {
    /// Uniform shares over a bag of topics.
    pub fn uniform(
        doc_id: impl Into<DocumentId>,
        kps: impl IntoIterator<Item = KnowledgePointId>,
        defines: Option<KnowledgePointId>,
    ) -> Self {
        let kps: BTreeSet<KnowledgePointId> = kps.into_iter().collect();
        let share = R::one() / R::from_count(kps.len().max(1));
        Self {
            doc_id: doc_id.into(),
            kp_shares: kps.into_iter().map(|kp| (kp, share)).collect(),
            defines,
        }
    }

    pub fn validate(&self) -> Result<(), CaimlError> {
        if self.kp_shares.is_empty() {
            return Err(CaimlError::EmptyShares {
                doc: self.doc_id.clone(),
            });
        }
        let sum: R = self.kp_shares.values().copied().sum();
        if (sum - R::one()).abs() > R::sum_one_tolerance() {
            return Err(CaimlError::SharesNotNormalized {
                doc: self.doc_id.clone(),
                sum: sum.to_f64().unwrap_or(f64::NAN),
            });
        }
        if let Some(defines) = &self.defines {
            if !self.kp_shares.contains_key(defines) {
                return Err(CaimlError::DefinesNotInShares {
                    doc: self.doc_id.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn kps(&self) -> impl Iterator<Item = &KnowledgePointId> {
        self.kp_shares.keys()
    }
}

/// Understanding trees for every defined topic, plus the set of basic
/// topics (which need no tree: their closure is themselves).
#[derive(Debug, Clone, Default)]
pub struct TreeIndex {
    trees: BTreeMap<KnowledgePointId, UnderstandingTree>,
    bkps: BTreeSet<KnowledgePointId>,
}

impl TreeIndex {
    pub fn new(
        trees: BTreeMap<KnowledgePointId, UnderstandingTree>,
        bkps: BTreeSet<KnowledgePointId>,
    ) -> Self {
        Self { trees, bkps }
    }

    /// Builds one tree per defined subject in the corpus.
    pub fn build(
        corpus: &[Definition],
        bkps: &BTreeSet<KnowledgePointId>,
        rule: f64,
    ) -> Result<Self, TreeError> {
        let subjects: BTreeSet<&KnowledgePointId> = corpus.iter().map(|d| &d.subject).collect();
        let mut trees = BTreeMap::new();
        for subject in subjects {
            let tree = crate::tree::build_tree(subject, corpus, bkps, rule)?;
            trees.insert(subject.clone(), tree);
        }
        Ok(Self {
            trees,
            bkps: bkps.clone(),
        })
    }

    pub fn tree(&self, kp: &KnowledgePointId) -> Option<&UnderstandingTree> {
        self.trees.get(kp)
    }

    pub fn trees(&self) -> impl Iterator<Item = (&KnowledgePointId, &UnderstandingTree)> {
        self.trees.iter()
    }

    pub fn bkps(&self) -> &BTreeSet<KnowledgePointId> {
        &self.bkps
    }

    pub fn is_bkp(&self, kp: &KnowledgePointId) -> bool {
        self.bkps.contains(kp)
    }

    /// Every topic known to the index (tree nodes plus basic topics).
    pub fn all_kps(&self) -> BTreeSet<KnowledgePointId> {
        let mut all = self.bkps.clone();
        for tree in self.trees.values() {
            all.extend(tree.nodes().iter().cloned());
        }
        all
    }

    /// The topic plus, for a defined topic, everything in its tree.
    /// A non-basic topic without a tree is an error.
    fn closure(&self, kp: &KnowledgePointId) -> Result<BTreeSet<KnowledgePointId>, CaimlError> {
        if let Some(tree) = self.trees.get(kp) {
            Ok(tree.nodes().clone())
        } else if self.bkps.contains(kp) {
            Ok(BTreeSet::from([kp.clone()]))
        } else {
            Err(CaimlError::MissingTree { kp: kp.clone() })
        }
    }
}

/// What the subject currently understands, with the percent-understanding
/// values behind the classification.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct KnowledgeState<R: Real> {
    pub understood: BTreeSet<KnowledgePointId>,
    pub pu: BTreeMap<KnowledgePointId, R>,
}

impl<R: Real> KnowledgeState<R> {
    /// State where exactly the given topics are fully understood.
    pub fn assume_understood(kps: impl IntoIterator<Item = KnowledgePointId>) -> Self {
        let understood: BTreeSet<KnowledgePointId> = kps.into_iter().collect();
        let pu = understood.iter().map(|kp| (kp.clone(), R::one())).collect();
        Self { understood, pu }
    }

    /// Derives the understood set from percent-understanding values: a topic
    /// is understood exactly when its value is one.
    pub fn from_pu(pu: BTreeMap<KnowledgePointId, R>) -> Self {
        let understood = pu
            .iter()
            .filter(|(_, v)| **v == R::one())
            .map(|(kp, _)| kp.clone())
            .collect();
        Self { understood, pu }
    }

    pub fn is_understood(&self, kp: &KnowledgePointId) -> bool {
        self.understood.contains(kp)
    }

    pub fn pu_of(&self, kp: &KnowledgePointId) -> R {
        self.pu.get(kp).copied().unwrap_or_else(R::zero)
    }

    fn mark_understood(&mut self, kp: KnowledgePointId) {
        self.pu.insert(kp.clone(), R::one());
        self.understood.insert(kp);
    }
}

/// Unique Not-Understood topics in the document's topics and their closures.
pub fn not_understood_count<R: Real>(
    doc: &DocumentProfile<R>,
    state: &KnowledgeState<R>,
    trees: &TreeIndex,
) -> Result<usize, CaimlError> {
    Ok(not_understood_set(doc, state, trees)?.len())
}

fn not_understood_set<R: Real>(
    doc: &DocumentProfile<R>,
    state: &KnowledgeState<R>,
    trees: &TreeIndex,
) -> Result<BTreeSet<KnowledgePointId>, CaimlError> {
    let mut blocking = BTreeSet::new();
    for kp in doc.kps() {
        for member in trees.closure(kp)? {
            if !state.is_understood(&member) {
                blocking.insert(member);
            }
        }
    }
    Ok(blocking)
}

/// Documents with the fewest Not-Understood topics, in ascending id order.
pub fn recommend<R: Real>(
    docs: &[DocumentProfile<R>],
    state: &KnowledgeState<R>,
    trees: &TreeIndex,
) -> Result<Vec<DocumentId>, CaimlError> {
    if docs.is_empty() {
        return Err(CaimlError::NoDocuments);
    }
    let counts = count_all(docs, state, trees)?;
    let min = counts.values().copied().min().expect("non-empty");
    Ok(counts
        .into_iter()
        .filter(|(_, count)| *count == min)
        .map(|(doc, _)| doc)
        .collect())
}

fn count_all<R: Real>(
    docs: &[DocumentProfile<R>],
    state: &KnowledgeState<R>,
    trees: &TreeIndex,
) -> Result<BTreeMap<DocumentId, usize>, CaimlError> {
    docs.iter()
        .map(|doc| Ok((doc.doc_id.clone(), not_understood_count(doc, state, trees)?)))
        .collect()
}

/// Percent of understanding of a whole document: the share-weighted mean of
/// its topics' percent-understanding values.
pub fn doc_understanding<R: Real>(
    doc: &DocumentProfile<R>,
    pu: &BTreeMap<KnowledgePointId, R>,
) -> Result<R, CaimlError> {
    if doc.kp_shares.is_empty() {
        return Err(CaimlError::EmptyShares {
            doc: doc.doc_id.clone(),
        });
    }
    let mut weighted = R::zero();
    let mut total = R::zero();
    for (kp, &share) in &doc.kp_shares {
        let value = pu.get(kp).copied().unwrap_or_else(R::zero);
        weighted = weighted + share * value;
        total = total + share;
    }
    Ok(weighted / total)
}

/// Alternative recommender: documents whose anticipated understanding is
/// closest to (but below) 100%. When every document is already fully
/// understood, all of them tie.
pub fn recommend_by_understanding<R: Real>(
    docs: &[DocumentProfile<R>],
    pu: &BTreeMap<KnowledgePointId, R>,
) -> Result<Vec<DocumentId>, CaimlError> {
    if docs.is_empty() {
        return Err(CaimlError::NoDocuments);
    }
    let mut scored: BTreeMap<DocumentId, R> = BTreeMap::new();
    for doc in docs {
        scored.insert(doc.doc_id.clone(), doc_understanding(doc, pu)?);
    }
    let below: Vec<(&DocumentId, R)> = scored
        .iter()
        .filter(|(_, v)| **v < R::one())
        .map(|(d, &v)| (d, v))
        .collect();
    if below.is_empty() {
        return Ok(scored.keys().cloned().collect());
    }
    let best = below
        .iter()
        .map(|(_, v)| *v)
        .fold(R::neg_infinity(), R::max);
    Ok(below
        .into_iter()
        .filter(|(_, v)| *v == best)
        .map(|(d, _)| d.clone())
        .collect())
}

/// Count matrix of a planning run: one row for the initial state and one per
/// learned document, one column per document in ascending id order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountMatrix {
    pub doc_ids: Vec<DocumentId>,
    /// Row 0 is the state before any learning; row i > 0 is the state after
    /// learning the i-th document of the sequence.
    pub rows: Vec<Vec<usize>>,
    pub row_labels: Vec<String>,
}

impl CountMatrix {
    /// Comma-separated integer cells, one row per line.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(usize::to_string).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Every column must be non-increasing: learning never makes any
    /// document harder.
    pub fn columns_non_increasing(&self) -> bool {
        self.rows
            .windows(2)
            .all(|pair| pair[0].iter().zip(&pair[1]).all(|(a, b)| a >= b))
    }
}

/// Outcome of a planning run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Plan<R: Real> {
    pub sequence: Vec<DocumentId>,
    pub matrix: CountMatrix,
    pub final_state: KnowledgeState<R>,
}

fn ordered_docs<R: Real>(docs: &[DocumentProfile<R>]) -> Vec<&DocumentProfile<R>> {
    let mut ordered: Vec<&DocumentProfile<R>> = docs.iter().collect();
    ordered.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    ordered
}

/// Greedy planner: repeatedly learn the unlearned document with the fewest
/// Not-Understood topics (lowest id on ties). Learning a document makes its
/// defined topic understood exactly when no other topic in the document's
/// closure blocks it. Errors with the blocked topics if no remaining
/// document can ever make progress.
pub fn plan_sequence<R: Real>(
    docs: &[DocumentProfile<R>],
    initial: &KnowledgeState<R>,
    trees: &TreeIndex,
) -> Result<Plan<R>, CaimlError> {
    plan(docs, initial, trees, None)
}

/// Replays a caller-supplied order instead of the greedy choice, emitting
/// the same matrix shape. The order must cover every document exactly once.
pub fn plan_sequence_forced<R: Real>(
    docs: &[DocumentProfile<R>],
    initial: &KnowledgeState<R>,
    trees: &TreeIndex,
    order: &[DocumentId],
) -> Result<Plan<R>, CaimlError> {
    plan(docs, initial, trees, Some(order))
}

fn plan<R: Real>(
    docs: &[DocumentProfile<R>],
    initial: &KnowledgeState<R>,
    trees: &TreeIndex,
    forced: Option<&[DocumentId]>,
) -> Result<Plan<R>, CaimlError> {
    if docs.is_empty() {
        return Err(CaimlError::NoDocuments);
    }
    for doc in docs {
        doc.validate()?;
    }
    let ordered = ordered_docs(docs);
    let by_id: BTreeMap<&DocumentId, &DocumentProfile<R>> =
        ordered.iter().map(|d| (&d.doc_id, *d)).collect();

    if let Some(order) = forced {
        let mut seen = BTreeSet::new();
        for doc in order {
            if !by_id.contains_key(doc) {
                return Err(CaimlError::UnknownDocument { doc: doc.clone() });
            }
            if !seen.insert(doc) {
                return Err(CaimlError::DuplicateDocument { doc: doc.clone() });
            }
        }
        if order.len() != ordered.len() {
            return Err(CaimlError::IncompleteOrder {
                expected: ordered.len(),
                got: order.len(),
            });
        }
    }

    let mut state = initial.clone();
    let mut learned: BTreeSet<DocumentId> = BTreeSet::new();
    let mut sequence = Vec::with_capacity(ordered.len());
    let mut rows = Vec::with_capacity(ordered.len() + 1);
    let mut row_labels = vec!["Before starting".to_owned()];

    let snapshot = |state: &KnowledgeState<R>| -> Result<Vec<usize>, CaimlError> {
        ordered
            .iter()
            .map(|doc| not_understood_count(doc, state, trees))
            .collect()
    };
    rows.push(snapshot(&state)?);

    for step in 0..ordered.len() {
        let chosen: DocumentId = match forced {
            Some(order) => order[step].clone(),
            None => {
                let mut best: Option<(usize, &DocumentId)> = None;
                for doc in &ordered {
                    if learned.contains(&doc.doc_id) {
                        continue;
                    }
                    let count = not_understood_count(doc, &state, trees)?;
                    // Strict < keeps the lowest id on ties: docs are id-ordered.
                    if best.map_or(true, |(min, _)| count < min) {
                        best = Some((count, &doc.doc_id));
                    }
                }
                let (_, doc) = best.expect("unlearned documents remain");
                // Deadlock: nothing can be learned productively any more.
                if !any_progress_possible(&ordered, &learned, &state, trees)? {
                    let blocked = blocked_kps(&ordered, &learned, &state);
                    return Err(CaimlError::Deadlock { blocked });
                }
                doc.clone()
            }
        };

        let doc = by_id[&chosen];
        learned.insert(chosen.clone());
        sequence.push(chosen.clone());

        if let Some(defines) = &doc.defines {
            if !state.is_understood(defines) {
                let mut blocking = not_understood_set(doc, &state, trees)?;
                blocking.remove(defines);
                if blocking.is_empty() {
                    state.mark_understood(defines.clone());
                }
            }
        }

        rows.push(snapshot(&state)?);
        row_labels.push(chosen.to_string());
    }

    Ok(Plan {
        sequence,
        matrix: CountMatrix {
            doc_ids: ordered.iter().map(|d| d.doc_id.clone()).collect(),
            rows,
            row_labels,
        },
        final_state: state,
    })
}

/// True when some unlearned document can be learned with effect: either it
/// is fully unblocked, or learning it would make its defined topic
/// understood.
fn any_progress_possible<R: Real>(
    ordered: &[&DocumentProfile<R>],
    learned: &BTreeSet<DocumentId>,
    state: &KnowledgeState<R>,
    trees: &TreeIndex,
) -> Result<bool, CaimlError> {
    for doc in ordered {
        if learned.contains(&doc.doc_id) {
            continue;
        }
        let mut blocking = not_understood_set(doc, state, trees)?;
        if let Some(defines) = &doc.defines {
            blocking.remove(defines);
        }
        if blocking.is_empty() {
            return Ok(true);
        }
    }
    Ok(false)
}

fn blocked_kps<R: Real>(
    ordered: &[&DocumentProfile<R>],
    learned: &BTreeSet<DocumentId>,
    state: &KnowledgeState<R>,
) -> Vec<KnowledgePointId> {
    let mut blocked = BTreeSet::new();
    for doc in ordered {
        if learned.contains(&doc.doc_id) {
            continue;
        }
        if let Some(defines) = &doc.defines {
            if !state.is_understood(defines) {
                blocked.insert(defines.clone());
            }
        }
    }
    blocked.into_iter().collect()
}

/// Checks that a sequence is a valid greedy run: at every step the chosen
/// document's count is minimal among the documents not yet learned.
pub fn verify_greedy_sequence<R: Real>(
    docs: &[DocumentProfile<R>],
    initial: &KnowledgeState<R>,
    trees: &TreeIndex,
    order: &[DocumentId],
) -> Result<(), CaimlError> {
    if docs.is_empty() {
        return Err(CaimlError::NoDocuments);
    }
    let ordered = ordered_docs(docs);
    let by_id: BTreeMap<&DocumentId, &DocumentProfile<R>> =
        ordered.iter().map(|d| (&d.doc_id, *d)).collect();

    let mut state = initial.clone();
    let mut learned: BTreeSet<DocumentId> = BTreeSet::new();
    for (step, chosen_id) in order.iter().enumerate() {
        let doc = *by_id
            .get(chosen_id)
            .ok_or_else(|| CaimlError::UnknownDocument {
                doc: chosen_id.clone(),
            })?;
        if learned.contains(chosen_id) {
            return Err(CaimlError::DuplicateDocument {
                doc: chosen_id.clone(),
            });
        }
        let mut min_count = usize::MAX;
        for candidate in &ordered {
            if learned.contains(&candidate.doc_id) {
                continue;
            }
            min_count = min_count.min(not_understood_count(candidate, &state, trees)?);
        }
        let count = not_understood_count(doc, &state, trees)?;
        if count != min_count {
            return Err(CaimlError::NotGreedy {
                step,
                doc: chosen_id.clone(),
                count,
                min_count,
            });
        }
        learned.insert(chosen_id.clone());
        if let Some(defines) = &doc.defines {
            if !state.is_understood(defines) {
                let mut blocking = not_understood_set(doc, &state, trees)?;
                blocking.remove(defines);
                if blocking.is_empty() {
                    state.mark_understood(defines.clone());
                }
            }
        }
    }
    Ok(())
}

/// Parameters for the familiarity-coupled planning mode, which records a
/// synthetic reading session per learned document and re-derives the
/// understood set from actual scores instead of the idealized rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct CoupledPlanParams<R: Real> {
    pub start: DateTime<Utc>,
    /// Simulated session length per document, in minutes.
    pub session_minutes: u64,
    /// Simulated days between consecutive learning steps.
    pub step_days: u64,
    pub threshold_gl: R,
    pub retention: RetentionParams<R>,
    /// Topics treated as understood regardless of scores (typically the
    /// basic ones, which rarely have logged history).
    pub assumed_understood: BTreeSet<KnowledgePointId>,
}

/// Greedy planning with familiarity accrual: each learned document appends a
/// synthetic experience to every topic it covers, and understanding is
/// recomputed from the resulting scores at each step. Documents are all
/// learned exactly once; topics may well end the run not understood if the
/// simulated exposure is too small.
pub fn plan_sequence_coupled<R: Real>(
    docs: &[DocumentProfile<R>],
    trees: &TreeIndex,
    params: &CoupledPlanParams<R>,
) -> Result<Plan<R>, CaimlError> {
    if docs.is_empty() {
        return Err(CaimlError::NoDocuments);
    }
    for doc in docs {
        doc.validate()?;
    }
    let ordered = ordered_docs(docs);
    let mut histories: BTreeMap<KnowledgePointId, LearningHistory<R>> = BTreeMap::new();
    let mut rows = Vec::with_capacity(ordered.len() + 1);
    let mut row_labels = vec!["Before starting".to_owned()];
    let mut sequence = Vec::with_capacity(ordered.len());
    let mut learned: BTreeSet<DocumentId> = BTreeSet::new();

    let derive_state = |histories: &BTreeMap<KnowledgePointId, LearningHistory<R>>,
                        now: DateTime<Utc>|
     -> Result<KnowledgeState<R>, CaimlError> {
        let mut scores: BTreeMap<KnowledgePointId, R> = BTreeMap::new();
        for kp in trees.all_kps() {
            let mut score = match histories.get(&kp) {
                Some(history) => {
                    familiarity(history, now, &params.retention, FamiliarityFormula::Simple)?
                        .value_gl
                }
                None => R::zero(),
            };
            // Assumed topics are at least at the threshold, so trees that
            // contain them can still reach full understanding.
            if params.assumed_understood.contains(&kp) {
                score = score.max(params.threshold_gl);
            }
            scores.insert(kp, score);
        }
        let mut pu: BTreeMap<KnowledgePointId, R> = BTreeMap::new();
        for kp in trees.all_kps() {
            if params.assumed_understood.contains(&kp) {
                pu.insert(kp, R::one());
                continue;
            }
            let value = match trees.tree(&kp) {
                Some(tree) => percent_understanding(tree, &scores, params.threshold_gl)?.pu,
                None => crate::tree::percent_familiarity(
                    scores.get(&kp).copied().unwrap_or_else(R::zero),
                    params.threshold_gl,
                )?,
            };
            pu.insert(kp, value);
        }
        Ok(KnowledgeState::from_pu(pu))
    };

    let mut now = params.start;
    let mut state = derive_state(&histories, now)?;
    let snapshot = |state: &KnowledgeState<R>| -> Result<Vec<usize>, CaimlError> {
        ordered
            .iter()
            .map(|doc| not_understood_count(doc, state, trees))
            .collect()
    };
    rows.push(snapshot(&state)?);

    for _ in 0..ordered.len() {
        let mut best: Option<(usize, &DocumentProfile<R>)> = None;
        for doc in &ordered {
            if learned.contains(&doc.doc_id) {
                continue;
            }
            let count = not_understood_count(doc, &state, trees)?;
            if best.map_or(true, |(min, _)| count < min) {
                best = Some((count, doc));
            }
        }
        let (_, doc) = best.expect("unlearned documents remain");
        learned.insert(doc.doc_id.clone());
        sequence.push(doc.doc_id.clone());

        let stop = now + Duration::minutes(params.session_minutes as i64);
        for (kp, &share) in &doc.kp_shares {
            let history = histories
                .entry(kp.clone())
                .or_insert_with(|| LearningHistory::empty(kp.clone()));
            history.experiences.push(LearningExperience {
                lct: stop,
                duration_s: params.session_minutes * 60,
                proportion: share,
                pps: R::one(),
                lm: R::one(),
                method: LearningMethod::Read,
            });
        }
        now = stop + Duration::days(params.step_days as i64);
        state = derive_state(&histories, now)?;
        rows.push(snapshot(&state)?);
        row_labels.push(doc.doc_id.to_string());
    }

    Ok(Plan {
        sequence,
        matrix: CountMatrix {
            doc_ids: ordered.iter().map(|d| d.doc_id.clone()).collect(),
            rows,
            row_labels,
        },
        final_state: state,
    })
}
