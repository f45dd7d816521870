//! Knowledge-point shares of a session's text.
//!
//! A share vector says how much of a learning session was about each
//! Knowledge Point. Two routes produce one:
//!
//! - normalized term frequency over the session text, with dictionary
//!   phrase matching: `N_i = alpha + (1 - alpha) * T_i / Max(TF)` and
//!   `share_i = N_i / sum(N_j)` over the Knowledge Points present;
//! - imported topic-model output (topic/word distributions plus per-session
//!   topic coverage), where a term's share is its coverage-weighted
//!   probability mass over the top terms of every topic.
//!
//! Topic models are consumed here, never trained.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kp::KnowledgePointId;
use crate::scalar::Real;

/// Default smoothing constant for normalized term frequency.
pub const DEFAULT_ALPHA: f64 = 0.4;

/// Default number of top terms considered per topic.
pub const DEFAULT_TOP_M: usize = 20;

#[derive(Debug, Error)]
pub enum TextShareError {
    #[error("dictionary has no entries")]
    EmptyDictionary,
    #[error("knowledge point `{id}` declared twice")]
    DuplicateId { id: KnowledgePointId },
    #[error("knowledge point `{id}` has an alias with no words")]
    EmptyAlias { id: KnowledgePointId },
    #[error("alias `{phrase}` maps to both `{first}` and `{second}`")]
    AmbiguousAlias {
        phrase: String,
        first: KnowledgePointId,
        second: KnowledgePointId,
    },
    #[error("term statistics are empty")]
    EmptyTermStats,
    #[error("alpha must lie in [0, 1), got {alpha}")]
    AlphaOutOfRange { alpha: f64 },
    #[error("topic model has no topics")]
    NoTopics,
    #[error("top_m must be at least 1")]
    ZeroTopM,
    #[error("topic {index} does not sum to 1 (sum = {sum})")]
    TopicNotNormalized { index: usize, sum: f64 },
    #[error("topic {index} has a negative probability for `{term}`")]
    NegativeTopicProbability { index: usize, term: String },
    #[error("coverage has {got} entries for {topics} topics")]
    CoverageLengthMismatch { topics: usize, got: usize },
    #[error("coverage does not sum to 1 (sum = {sum})")]
    CoverageNotNormalized { sum: f64 },
    #[error("coverage of topic {index} is negative")]
    NegativeCoverage { index: usize },
    #[error("top_m = {top_m} exceeds the {support} terms of topic {index}")]
    TopMExceedsSupport {
        index: usize,
        top_m: usize,
        support: usize,
    },
    #[error("share vector entry for `{id}` is negative")]
    NegativeShare { id: KnowledgePointId },
    #[error("share vector sums to {sum}, expected 1")]
    SharesNotNormalized { sum: f64 },
}

/// One dictionary entry: a canonical topic plus its surface forms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KpEntry {
    pub id: KnowledgePointId,
    pub name: String,
    /// Case-insensitive phrases that denote this topic in text.
    pub aliases: Vec<String>,
    /// Basic Knowledge Point: simple enough that nothing else interprets it;
    /// always a leaf of an understanding tree.
    #[serde(default)]
    pub bkp: bool,
}

/// Canonical topic identifiers with alias phrases and basic-topic flags.
///
/// Matching is case-insensitive, token-boundary aligned and longest-first:
/// "joint probability distribution" beats "probability distribution" beats
/// "probability" wherever they overlap. The canonical name participates as
/// an implicit alias.
#[derive(Debug, Clone)]
pub struct KpDictionary {
    entries: BTreeMap<KnowledgePointId, KpEntry>,
    /// First token of a phrase -> candidate (phrase tokens, id), longest first.
    phrase_index: HashMap<String, Vec<(Vec<String>, KnowledgePointId)>>,
}

impl KpDictionary {
    pub fn new(entries: Vec<KpEntry>) -> Result<Self, TextShareError> {
        if entries.is_empty() {
            return Err(TextShareError::EmptyDictionary);
        }
        let mut map = BTreeMap::new();
        let mut phrase_owner: HashMap<Vec<String>, KnowledgePointId> = HashMap::new();
        let mut phrase_index: HashMap<String, Vec<(Vec<String>, KnowledgePointId)>> =
            HashMap::new();

        for entry in entries {
            if map.contains_key(&entry.id) {
                return Err(TextShareError::DuplicateId { id: entry.id });
            }
            for phrase in entry.aliases.iter().chain(std::iter::once(&entry.name)) {
                let tokens = tokenize(phrase);
                if tokens.is_empty() {
                    return Err(TextShareError::EmptyAlias { id: entry.id });
                }
                match phrase_owner.get(&tokens) {
                    Some(owner) if *owner != entry.id => {
                        return Err(TextShareError::AmbiguousAlias {
                            phrase: tokens.join(" "),
                            first: owner.clone(),
                            second: entry.id,
                        });
                    }
                    Some(_) => continue,
                    None => {
                        phrase_owner.insert(tokens.clone(), entry.id.clone());
                        phrase_index
                            .entry(tokens[0].clone())
                            .or_default()
                            .push((tokens, entry.id.clone()));
                    }
                }
            }
            map.insert(entry.id.clone(), entry);
        }

        for candidates in phrase_index.values_mut() {
            candidates.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        }

        Ok(Self {
            entries: map,
            phrase_index,
        })
    }

    pub fn get(&self, id: &KnowledgePointId) -> Option<&KpEntry> {
        self.entries.get(id)
    }

    pub fn is_bkp(&self, id: &KnowledgePointId) -> bool {
        self.entries.get(id).is_some_and(|e| e.bkp)
    }

    pub fn ids(&self) -> impl Iterator<Item = &KnowledgePointId> {
        self.entries.keys()
    }

    pub fn entries(&self) -> impl Iterator<Item = &KpEntry> {
        self.entries.values()
    }

    /// All ids flagged as Basic Knowledge Points.
    pub fn bkp_ids(&self) -> std::collections::BTreeSet<KnowledgePointId> {
        self.entries
            .values()
            .filter(|e| e.bkp)
            .map(|e| e.id.clone())
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Longest phrase starting at `tokens[0]`, if any.
    fn longest_match(&self, tokens: &[String]) -> Option<(&KnowledgePointId, usize)> {
        let candidates = self.phrase_index.get(&tokens[0])?;
        candidates
            .iter()
            .find(|(phrase, _)| tokens.len() >= phrase.len() && &tokens[..phrase.len()] == phrase)
            .map(|(phrase, id)| (id, phrase.len()))
    }

    /// Exact whole-string phrase lookup (used for topic-model terms).
    pub fn match_phrase(&self, phrase: &str) -> Option<&KnowledgePointId> {
        let tokens = tokenize(phrase);
        if tokens.is_empty() {
            return None;
        }
        self.longest_match(&tokens)
            .and_then(|(id, len)| (len == tokens.len()).then_some(id))
    }

    /// Loads a dictionary from its JSON array form.
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        let entries: Vec<KpEntry> = serde_json::from_str(text)?;
        Ok(Self::new(entries).map_err(serde::de::Error::custom)?)
    }

    pub fn to_json(&self) -> String {
        let entries: Vec<&KpEntry> = self.entries.values().collect();
        serde_json::to_string_pretty(&entries).expect("dictionary serializes")
    }
}

/// Lowercases and splits on non-alphanumeric boundaries.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// A counted occurrence unit: either a matched Knowledge Point or a plain word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Term {
    Kp(KnowledgePointId),
    Word(String),
}

/// Raw term frequencies of one session text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermStats {
    counts: BTreeMap<Term, u64>,
    max_tf: u64,
}

impl TermStats {
    pub fn counts(&self) -> &BTreeMap<Term, u64> {
        &self.counts
    }

    pub fn max_tf(&self) -> u64 {
        self.max_tf
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn kp_count(&self, id: &KnowledgePointId) -> u64 {
        self.counts.get(&Term::Kp(id.clone())).copied().unwrap_or(0)
    }

    pub fn word_count(&self, word: &str) -> u64 {
        self.counts
            .get(&Term::Word(word.to_owned()))
            .copied()
            .unwrap_or(0)
    }

    /// Knowledge Points present in the text, with their counts.
    pub fn kp_counts(&self) -> impl Iterator<Item = (&KnowledgePointId, u64)> {
        self.counts.iter().filter_map(|(term, &count)| match term {
            Term::Kp(id) => Some((id, count)),
            Term::Word(_) => None,
        })
    }

    /// Builds stats from externally produced counts (e.g. a pre-tokenized
    /// corpus); `max_tf` is derived.
    pub fn from_counts(counts: BTreeMap<Term, u64>) -> Self {
        let max_tf = counts.values().copied().max().unwrap_or(0);
        Self { counts, max_tf }
    }
}

/// Counts dictionary phrases (attributed to canonical ids) and plain words.
///
/// Greedy leftmost-longest: at each token the longest matching alias wins and
/// consumes its tokens, so a phrase match hides its constituent words. Words
/// that match nothing are still counted; they compete for `Max(TF)`.
pub fn count_terms(text: &str, dict: &KpDictionary) -> Result<TermStats, TextShareError> {
    if dict.is_empty() {
        return Err(TextShareError::EmptyDictionary);
    }
    let tokens = tokenize(text);
    let mut counts: BTreeMap<Term, u64> = BTreeMap::new();
    let mut i = 0;
    while i < tokens.len() {
        match dict.longest_match(&tokens[i..]) {
            Some((id, len)) => {
                *counts.entry(Term::Kp(id.clone())).or_insert(0) += 1;
                i += len;
            }
            None => {
                *counts.entry(Term::Word(tokens[i].clone())).or_insert(0) += 1;
                i += 1;
            }
        }
    }
    let max_tf = counts.values().copied().max().unwrap_or(0);
    Ok(TermStats { counts, max_tf })
}

/// Normalized term frequency for every counted term:
/// `N_i = alpha + (1 - alpha) * T_i / Max(TF)`.
pub fn normalized_tf<R: Real>(
    stats: &TermStats,
    alpha: R,
) -> Result<BTreeMap<Term, R>, TextShareError> {
    if stats.is_empty() {
        return Err(TextShareError::EmptyTermStats);
    }
    check_alpha(alpha)?;
    let max_tf = R::from_u64(stats.max_tf).expect("max_tf converts");
    Ok(stats
        .counts
        .iter()
        .map(|(term, &count)| {
            let tf = R::from_u64(count).expect("count converts");
            // The ratio comes first so scaling all counts by the same factor
            // leaves every N_i bit-identical.
            (term.clone(), alpha + (R::one() - alpha) * (tf / max_tf))
        })
        .collect())
}

fn check_alpha<R: Real>(alpha: R) -> Result<(), TextShareError> {
    if alpha < R::zero() || alpha >= R::one() {
        return Err(TextShareError::AlphaOutOfRange {
            alpha: alpha.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

/// Per-topic shares of a session, non-negative and summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
#[serde(bound = "")]
pub struct ShareVector<R: Real> {
    shares: BTreeMap<KnowledgePointId, R>,
}

impl<R: Real> Default for ShareVector<R> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<R: Real> ShareVector<R> {
    pub fn empty() -> Self {
        Self {
            shares: BTreeMap::new(),
        }
    }

    /// Builds a vector from raw weights, normalizing to sum 1.
    /// Zero or negative weights are rejected; an empty map stays empty.
    pub fn from_weights(weights: BTreeMap<KnowledgePointId, R>) -> Result<Self, TextShareError> {
        for (id, &w) in &weights {
            if w < R::zero() {
                return Err(TextShareError::NegativeShare { id: id.clone() });
            }
        }
        let total: R = weights.values().copied().sum();
        if total <= R::zero() {
            return Ok(Self::empty());
        }
        Ok(Self {
            shares: weights
                .into_iter()
                .filter(|(_, w)| *w > R::zero())
                .map(|(id, w)| (id, w / total))
                .collect(),
        })
    }

    /// Validates an externally supplied vector (e.g. a parsed shares file).
    pub fn from_raw(shares: BTreeMap<KnowledgePointId, R>) -> Result<Self, TextShareError> {
        if shares.is_empty() {
            return Ok(Self::empty());
        }
        let mut sum = R::zero();
        for (id, &s) in &shares {
            if s < R::zero() {
                return Err(TextShareError::NegativeShare { id: id.clone() });
            }
            sum = sum + s;
        }
        if (sum - R::one()).abs() > R::sum_one_tolerance() {
            return Err(TextShareError::SharesNotNormalized {
                sum: sum.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { shares })
    }

    pub fn get(&self, id: &KnowledgePointId) -> Option<R> {
        self.shares.get(id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&KnowledgePointId, R)> {
        self.shares.iter().map(|(id, &s)| (id, s))
    }

    pub fn len(&self) -> usize {
        self.shares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shares.is_empty()
    }

    pub fn sum(&self) -> R {
        self.shares.values().copied().sum()
    }

    pub fn as_map(&self) -> &BTreeMap<KnowledgePointId, R> {
        &self.shares
    }
}

/// Shares from normalized term frequency: each present Knowledge Point's
/// `N_i` divided by the sum of `N_j` over the Knowledge Points present.
///
/// Plain words influence the result only through `Max(TF)`. A text without
/// any dictionary hit yields an empty vector.
pub fn tf_share<R: Real>(stats: &TermStats, alpha: R) -> Result<ShareVector<R>, TextShareError> {
    if stats.is_empty() {
        return Ok(ShareVector::empty());
    }
    let normalized = normalized_tf(stats, alpha)?;
    let weights: BTreeMap<KnowledgePointId, R> = normalized
        .into_iter()
        .filter_map(|(term, n)| match term {
            Term::Kp(id) => Some((id, n)),
            Term::Word(_) => None,
        })
        .collect();
    ShareVector::from_weights(weights)
}

/// Imported output of a topic model run over the subject's sessions,
/// restricted to one session of interest.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TopicModelOutput<R: Real> {
    /// `k` word distributions, one per topic.
    pub topics: Vec<BTreeMap<String, R>>,
    /// This session's coverage of each topic, summing to one.
    pub coverage: Vec<R>,
    /// Number of top terms considered per topic.
    pub top_m: usize,
}

impl<R: Real> TopicModelOutput<R> {
    pub fn validate(&self) -> Result<(), TextShareError> {
        if self.topics.is_empty() {
            return Err(TextShareError::NoTopics);
        }
        if self.top_m == 0 {
            return Err(TextShareError::ZeroTopM);
        }
        if self.coverage.len() != self.topics.len() {
            return Err(TextShareError::CoverageLengthMismatch {
                topics: self.topics.len(),
                got: self.coverage.len(),
            });
        }
        for (index, topic) in self.topics.iter().enumerate() {
            if self.top_m > topic.len() {
                return Err(TextShareError::TopMExceedsSupport {
                    index,
                    top_m: self.top_m,
                    support: topic.len(),
                });
            }
            let mut sum = R::zero();
            for (term, &p) in topic {
                if p < R::zero() {
                    return Err(TextShareError::NegativeTopicProbability {
                        index,
                        term: term.clone(),
                    });
                }
                sum = sum + p;
            }
            if (sum - R::one()).abs() > R::sum_one_tolerance() {
                return Err(TextShareError::TopicNotNormalized {
                    index,
                    sum: sum.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        let mut sum = R::zero();
        for (index, &pi) in self.coverage.iter().enumerate() {
            if pi < R::zero() {
                return Err(TextShareError::NegativeCoverage { index });
            }
            sum = sum + pi;
        }
        if (sum - R::one()).abs() > R::sum_one_tolerance() {
            return Err(TextShareError::CoverageNotNormalized {
                sum: sum.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }

    /// The `top_m` terms of topic `index`, highest probability first;
    /// ties broken by term so the selection is deterministic.
    fn top_terms(&self, index: usize) -> Vec<(&String, R)> {
        let mut terms: Vec<(&String, R)> = self.topics[index].iter().map(|(t, &p)| (t, p)).collect();
        terms.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| a.0.cmp(b.0))
        });
        terms.truncate(self.top_m);
        terms
    }
}

/// Shares from topic-model output.
///
/// Each term's share is `coverage_j * p(term | topic_j)` summed over topics
/// where the term ranks in the topic's top `m`, divided by the total such
/// mass. Term shares are attributed to Knowledge Points through exact
/// dictionary phrase lookup and renormalized over the matched ids.
pub fn topic_share<R: Real>(
    tm: &TopicModelOutput<R>,
    dict: &KpDictionary,
) -> Result<ShareVector<R>, TextShareError> {
    if dict.is_empty() {
        return Err(TextShareError::EmptyDictionary);
    }
    tm.validate()?;

    let mut term_mass: BTreeMap<&String, R> = BTreeMap::new();
    let mut total = R::zero();
    for (j, &pi) in tm.coverage.iter().enumerate() {
        for (term, p) in tm.top_terms(j) {
            let mass = pi * p;
            total = total + mass;
            *term_mass.entry(term).or_insert_with(R::zero) = term_mass
                .get(term)
                .copied()
                .unwrap_or_else(R::zero)
                + mass;
        }
    }
    if total <= R::zero() {
        return Ok(ShareVector::empty());
    }

    let mut weights: BTreeMap<KnowledgePointId, R> = BTreeMap::new();
    for (term, mass) in term_mass {
        if let Some(id) = dict.match_phrase(term) {
            let entry = weights.entry(id.clone()).or_insert_with(R::zero);
            *entry = *entry + mass / total;
        }
    }
    ShareVector::from_weights(weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(id: &str, name: &str, aliases: &[&str], bkp: bool) -> KpEntry {
        KpEntry {
            id: KnowledgePointId::from(id),
            name: name.to_owned(),
            aliases: aliases.iter().map(|a| (*a).to_owned()).collect(),
            bkp,
        }
    }

    fn dict() -> KpDictionary {
        KpDictionary::new(vec![
            entry("bayes", "Bayes", &["bayes"], false),
            entry(
                "JPD",
                "Joint Probability Distribution",
                &["joint probability distribution", "jpd"],
                false,
            ),
            entry(
                "PD",
                "Probability Distribution",
                &["probability distribution", "pd"],
                false,
            ),
            entry("Probability", "Probability", &["probability"], true),
        ])
        .unwrap()
    }

    #[test]
    fn counts_repeated_alias_occurrences() {
        let stats = count_terms("bayes theorem bayes", &dict()).unwrap();
        assert_eq!(stats.kp_count(&"bayes".into()), 2);
        assert_eq!(stats.word_count("theorem"), 1);
        assert_eq!(stats.max_tf(), 2);
    }

    #[test]
    fn longest_phrase_wins_over_constituents() {
        let stats = count_terms(
            "a joint probability distribution is not a probability distribution of joints",
            &dict(),
        )
        .unwrap();
        assert_eq!(stats.kp_count(&"JPD".into()), 1);
        assert_eq!(stats.kp_count(&"PD".into()), 1);
        // "probability" alone never surfaces: both occurrences sit inside
        // longer matched phrases.
        assert_eq!(stats.kp_count(&"Probability".into()), 0);
        assert_eq!(stats.word_count("joints"), 1);
    }

    #[test]
    fn matching_is_case_insensitive_and_boundary_aligned() {
        let stats = count_terms("BAYES, bayes; (bayes)", &dict()).unwrap();
        assert_eq!(stats.kp_count(&"bayes".into()), 3);
    }

    #[test]
    fn empty_text_gives_empty_stats_and_empty_dictionary_errors() {
        let stats = count_terms("", &dict()).unwrap();
        assert!(stats.is_empty());
        assert_eq!(stats.max_tf(), 0);
        assert!(matches!(
            KpDictionary::new(vec![]),
            Err(TextShareError::EmptyDictionary)
        ));
    }

    #[test]
    fn ambiguous_alias_is_rejected() {
        let result = KpDictionary::new(vec![
            entry("A", "Alpha", &["shared"], false),
            entry("B", "Beta", &["shared"], false),
        ]);
        assert!(matches!(result, Err(TextShareError::AmbiguousAlias { .. })));
    }

    #[test]
    fn max_count_term_normalizes_to_one_regardless_of_alpha() {
        let stats = count_terms("bayes bayes filler", &dict()).unwrap();
        for alpha in [0.0, 0.25, 0.4, 0.9] {
            let n = normalized_tf::<f64>(&stats, alpha).unwrap();
            assert_eq!(n[&Term::Kp("bayes".into())], 1.0);
        }
    }

    #[test]
    fn normalized_tf_matches_direct_evaluation() {
        // T_i = 1, Max(TF) = 4, alpha = 0.4 -> 0.4 + 0.6 * 1/4 = 0.55.
        let mut counts = BTreeMap::new();
        counts.insert(Term::Kp("bayes".into()), 1);
        counts.insert(Term::Word("filler".into()), 4);
        let stats = TermStats::from_counts(counts);
        let n = normalized_tf::<f64>(&stats, 0.4).unwrap();
        assert!((n[&Term::Kp("bayes".into())] - 0.55).abs() < 1e-12);
        // alpha = 0 reduces to plain TF / Max(TF).
        let n0 = normalized_tf::<f64>(&stats, 0.0).unwrap();
        assert_eq!(n0[&Term::Kp("bayes".into())], 0.25);
    }

    #[test]
    fn normalized_tf_rejects_empty_stats_and_bad_alpha() {
        assert!(matches!(
            normalized_tf::<f64>(&TermStats::default(), 0.4),
            Err(TextShareError::EmptyTermStats)
        ));
        let stats = count_terms("bayes", &dict()).unwrap();
        assert!(matches!(
            normalized_tf::<f64>(&stats, 1.0),
            Err(TextShareError::AlphaOutOfRange { .. })
        ));
    }

    #[test]
    fn single_kp_takes_the_whole_share() {
        let stats = count_terms("bayes and some other words", &dict()).unwrap();
        let shares = tf_share::<f64>(&stats, 0.4).unwrap();
        assert_eq!(shares.len(), 1);
        assert_eq!(shares.get(&"bayes".into()), Some(1.0));
    }

    #[test]
    fn equal_counts_split_evenly() {
        let stats = count_terms("bayes jpd", &dict()).unwrap();
        let shares = tf_share::<f64>(&stats, 0.4).unwrap();
        assert_eq!(shares.get(&"bayes".into()), Some(0.5));
        assert_eq!(shares.get(&"JPD".into()), Some(0.5));
    }

    #[test]
    fn unequal_counts_follow_the_normalized_tf_ratio() {
        // bayes x4, jpd x1, Max(TF) = 4, alpha = 0.4:
        // N(bayes) = 1, N(jpd) = 0.55, shares 1/1.55 and 0.55/1.55.
        let stats = count_terms("bayes bayes bayes bayes jpd", &dict()).unwrap();
        let shares = tf_share::<f64>(&stats, 0.4).unwrap();
        assert!((shares.get(&"bayes".into()).unwrap() - 0.6451612903225806).abs() < 1e-12);
        assert!((shares.get(&"JPD".into()).unwrap() - 0.3548387096774194).abs() < 1e-12);
        assert!((shares.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn text_without_kp_hits_yields_empty_shares() {
        let stats = count_terms("nothing matches here", &dict()).unwrap();
        let shares = tf_share::<f64>(&stats, 0.4).unwrap();
        assert!(shares.is_empty());
    }

    #[test]
    fn tf_share_is_exactly_scale_invariant() {
        let base = count_terms("bayes bayes bayes jpd pd pd filler filler filler", &dict()).unwrap();
        for scale in [2u64, 3, 7] {
            let scaled = TermStats::from_counts(
                base.counts()
                    .iter()
                    .map(|(t, &c)| (t.clone(), c * scale))
                    .collect(),
            );
            let a = tf_share::<f64>(&base, 0.4).unwrap();
            let b = tf_share::<f64>(&scaled, 0.4).unwrap();
            assert_eq!(a, b);
        }
    }

    fn topic(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(t, p)| ((*t).to_owned(), *p)).collect()
    }

    #[test]
    fn single_topic_share_reduces_to_renormalized_word_distribution() {
        let tm = TopicModelOutput {
            topics: vec![topic(&[("bayes", 0.5), ("jpd", 0.3), ("noise", 0.2)])],
            coverage: vec![1.0],
            top_m: 2,
        };
        let shares = topic_share(&tm, &dict()).unwrap();
        // Top 2 terms are bayes (0.5) and jpd (0.3); mass renormalizes to 0.8.
        assert!((shares.get(&"bayes".into()).unwrap() - 0.5 / 0.8).abs() < 1e-12);
        assert!((shares.get(&"JPD".into()).unwrap() - 0.3 / 0.8).abs() < 1e-12);
    }

    #[test]
    fn symmetric_topics_give_symmetric_shares() {
        let tm = TopicModelOutput {
            topics: vec![
                topic(&[("bayes", 0.6), ("jpd", 0.4)]),
                topic(&[("jpd", 0.6), ("bayes", 0.4)]),
            ],
            coverage: vec![0.5, 0.5],
            top_m: 2,
        };
        let shares = topic_share(&tm, &dict()).unwrap();
        assert!((shares.get(&"bayes".into()).unwrap() - 0.5).abs() < 1e-12);
        assert!((shares.get(&"JPD".into()).unwrap() - 0.5).abs() < 1e-12);
    }

    /// Brute-force restatement of the topic-share double sum, kept
    /// independent of the library path.
    fn oracle_topic_share(
        tm: &TopicModelOutput<f64>,
        dict: &KpDictionary,
    ) -> BTreeMap<KnowledgePointId, f64> {
        let mut denom = 0.0;
        let mut per_term: BTreeMap<String, f64> = BTreeMap::new();
        for (j, topic) in tm.topics.iter().enumerate() {
            let mut terms: Vec<(&String, f64)> = topic.iter().map(|(t, &p)| (t, p)).collect();
            terms.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            for (term, p) in terms.into_iter().take(tm.top_m) {
                denom += tm.coverage[j] * p;
                *per_term.entry(term.clone()).or_insert(0.0) += tm.coverage[j] * p;
            }
        }
        let mut kp_mass: BTreeMap<KnowledgePointId, f64> = BTreeMap::new();
        for (term, mass) in per_term {
            if let Some(id) = dict.match_phrase(&term) {
                *kp_mass.entry(id.clone()).or_insert(0.0) += mass / denom;
            }
        }
        let total: f64 = kp_mass.values().sum();
        kp_mass.into_iter().map(|(k, v)| (k, v / total)).collect()
    }

    #[test]
    fn two_topic_share_matches_brute_force_double_sum() {
        let tm = TopicModelOutput {
            topics: vec![
                topic(&[("bayes", 0.6), ("jpd", 0.3), ("noise", 0.1)]),
                topic(&[("noise", 0.8), ("bayes", 0.2)]),
            ],
            coverage: vec![0.7, 0.3],
            top_m: 2,
        };
        let shares = topic_share(&tm, &dict()).unwrap();
        let expected = oracle_topic_share(&tm, &dict());
        assert_eq!(shares.len(), expected.len());
        for (id, value) in expected {
            assert!((shares.get(&id).unwrap() - value).abs() < 1e-12, "{id}");
        }
        assert!((shares.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn topic_share_is_invariant_under_topic_permutation() {
        let t1 = topic(&[("bayes", 0.6), ("jpd", 0.3), ("noise", 0.1)]);
        let t2 = topic(&[("noise", 0.5), ("jpd", 0.5)]);
        let fwd = TopicModelOutput {
            topics: vec![t1.clone(), t2.clone()],
            coverage: vec![0.7, 0.3],
            top_m: 2,
        };
        let rev = TopicModelOutput {
            topics: vec![t2, t1],
            coverage: vec![0.3, 0.7],
            top_m: 2,
        };
        let a = topic_share(&fwd, &dict()).unwrap();
        let b = topic_share(&rev, &dict()).unwrap();
        assert_eq!(a.len(), b.len());
        for (id, share) in a.iter() {
            // Equal up to float summation order.
            assert!((share - b.get(id).unwrap()).abs() < 1e-12, "{id}");
        }
    }

    #[test]
    fn malformed_topic_model_errors_name_the_invariant() {
        let bad_topic = TopicModelOutput {
            topics: vec![topic(&[("bayes", 0.7), ("jpd", 0.7)])],
            coverage: vec![1.0],
            top_m: 1,
        };
        assert!(matches!(
            topic_share(&bad_topic, &dict()),
            Err(TextShareError::TopicNotNormalized { index: 0, .. })
        ));

        let bad_coverage = TopicModelOutput {
            topics: vec![topic(&[("bayes", 1.0)])],
            coverage: vec![0.4],
            top_m: 1,
        };
        assert!(matches!(
            topic_share(&bad_coverage, &dict()),
            Err(TextShareError::CoverageNotNormalized { .. })
        ));

        let bad_top_m = TopicModelOutput {
            topics: vec![topic(&[("bayes", 1.0)])],
            coverage: vec![1.0],
            top_m: 5,
        };
        assert!(matches!(
            topic_share(&bad_top_m, &dict()),
            Err(TextShareError::TopMExceedsSupport { index: 0, .. })
        ));
    }

    #[test]
    fn share_vectors_from_weights_always_sum_to_one() {
        let mut weights = BTreeMap::new();
        weights.insert(KnowledgePointId::from("a"), 0.3_f64);
        weights.insert(KnowledgePointId::from("b"), 1.9);
        weights.insert(KnowledgePointId::from("c"), 0.0001);
        let v = ShareVector::from_weights(weights).unwrap();
        assert!((v.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn raw_share_vector_validation() {
        let mut good = BTreeMap::new();
        good.insert(KnowledgePointId::from("a"), 0.25_f64);
        good.insert(KnowledgePointId::from("b"), 0.75);
        assert!(ShareVector::from_raw(good).is_ok());

        let mut bad = BTreeMap::new();
        bad.insert(KnowledgePointId::from("a"), 0.25_f64);
        assert!(matches!(
            ShareVector::from_raw(bad),
            Err(TextShareError::SharesNotNormalized { .. })
        ));
    }
}
