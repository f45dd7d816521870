//! Understanding trees: the prerequisite closure of a topic, and the
//! percent-understanding math evaluated over it.
//!
//! A tree is built from a definition corpus: a topic's children are the
//! topics referenced by strictly more than a configured fraction of its
//! definitions (majority vote by default), recursively extended until every
//! leaf is a Basic Knowledge Point. Revisited topics reuse their node, so
//! each topic counts once; back-edges are dropped and recorded, keeping the
//! structure acyclic.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kp::KnowledgePointId;
use crate::scalar::Real;
use crate::textshare::KpDictionary;

/// One definition of a topic, with the topics its text references.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Definition {
    pub subject: KnowledgePointId,
    pub text: String,
    /// Referenced topics; never contains the subject itself.
    pub referenced: BTreeSet<KnowledgePointId>,
}

impl Definition {
    /// Builds a definition with self-references stripped.
    pub fn new(
        subject: impl Into<KnowledgePointId>,
        text: impl Into<String>,
        referenced: impl IntoIterator<Item = KnowledgePointId>,
    ) -> Self {
        let subject = subject.into();
        let referenced = referenced.into_iter().filter(|kp| *kp != subject).collect();
        Self {
            subject,
            text: text.into(),
            referenced,
        }
    }

    /// Builds a definition by extracting references from the text with the
    /// dictionary matcher (used when no curated list is supplied).
    pub fn extracted(
        subject: impl Into<KnowledgePointId>,
        text: impl Into<String>,
        dict: &KpDictionary,
    ) -> Result<Self, crate::textshare::TextShareError> {
        let subject = subject.into();
        let text = text.into();
        let stats = crate::textshare::count_terms(&text, dict)?;
        let referenced = stats
            .kp_counts()
            .map(|(id, _)| id.clone())
            .filter(|id| *id != subject)
            .collect();
        Ok(Self {
            subject,
            text,
            referenced,
        })
    }
}

#[derive(Debug, Error)]
pub enum TreeError {
    #[error("root `{kp}` has no definition in the corpus")]
    RootUndefined { kp: KnowledgePointId },
    #[error("root `{kp}` is a basic knowledge point")]
    RootIsBkp { kp: KnowledgePointId },
    #[error("selection rule fraction {rule} must lie in [0, 1)")]
    RuleOutOfRange { rule: f64 },
    #[error("familiarity threshold must be strictly positive")]
    NonPositiveThreshold,
    #[error("magnitude is only defined for an understood tree")]
    NotUnderstood,
}

/// A back-edge dropped during construction to keep the tree acyclic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleBreak {
    pub from: KnowledgePointId,
    pub to: KnowledgePointId,
}

/// The deduplicated prerequisite closure of a root topic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnderstandingTree {
    root: KnowledgePointId,
    children: BTreeMap<KnowledgePointId, BTreeSet<KnowledgePointId>>,
    nodes: BTreeSet<KnowledgePointId>,
    /// Nodes that were basic knowledge points at build time (always leaves).
    bkp_nodes: BTreeSet<KnowledgePointId>,
    cycle_breaks: Vec<CycleBreak>,
}

impl UnderstandingTree {
    pub fn root(&self) -> &KnowledgePointId {
        &self.root
    }

    /// Every unique topic in the closure, root included.
    pub fn nodes(&self) -> &BTreeSet<KnowledgePointId> {
        &self.nodes
    }

    /// Unique topics below the root.
    pub fn descendants(&self) -> impl Iterator<Item = &KnowledgePointId> {
        self.nodes.iter().filter(move |kp| **kp != self.root)
    }

    pub fn children_of(&self, kp: &KnowledgePointId) -> Option<&BTreeSet<KnowledgePointId>> {
        self.children.get(kp)
    }

    pub fn is_bkp_node(&self, kp: &KnowledgePointId) -> bool {
        self.bkp_nodes.contains(kp)
    }

    pub fn bkp_nodes(&self) -> &BTreeSet<KnowledgePointId> {
        &self.bkp_nodes
    }

    pub fn cycle_breaks(&self) -> &[CycleBreak] {
        &self.cycle_breaks
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Longest root-to-leaf path length, in edges.
    pub fn height(&self) -> usize {
        fn depth(
            tree: &UnderstandingTree,
            kp: &KnowledgePointId,
            memo: &mut BTreeMap<KnowledgePointId, usize>,
        ) -> usize {
            if let Some(&d) = memo.get(kp) {
                return d;
            }
            let d = tree
                .children
                .get(kp)
                .map(|kids| {
                    kids.iter()
                        .map(|k| 1 + depth(tree, k, memo))
                        .max()
                        .unwrap_or(0)
                })
                .unwrap_or(0);
            memo.insert(kp.clone(), d);
            d
        }
        depth(self, &self.root, &mut BTreeMap::new())
    }
}

/// Votes cast by a topic's definitions: a candidate child must be referenced
/// by strictly more than `rule * definition_count` definitions.
fn select_children(
    definitions: &[&Definition],
    rule: f64,
) -> BTreeSet<KnowledgePointId> {
    let mut votes: BTreeMap<&KnowledgePointId, usize> = BTreeMap::new();
    for def in definitions {
        for kp in &def.referenced {
            *votes.entry(kp).or_insert(0) += 1;
        }
    }
    let threshold = rule * definitions.len() as f64;
    votes
        .into_iter()
        .filter(|(_, count)| (*count as f64) > threshold)
        .map(|(kp, _)| kp.clone())
        .collect()
}

/// Default strict-majority selection rule.
pub const DEFAULT_MAJORITY_RULE: f64 = 0.5;

/// Builds the understanding tree of `root` from a definition corpus.
///
/// Topics in `bkps` are never expanded; topics without definitions become
/// leaves. Construction is depth-first in child order, deterministic, and
/// independent of corpus order (selection is per-topic vote counting).
pub fn build_tree(
    root: &KnowledgePointId,
    corpus: &[Definition],
    bkps: &BTreeSet<KnowledgePointId>,
    rule: f64,
) -> Result<UnderstandingTree, TreeError> {
    if !(0.0..1.0).contains(&rule) {
        return Err(TreeError::RuleOutOfRange { rule });
    }
    if bkps.contains(root) {
        return Err(TreeError::RootIsBkp { kp: root.clone() });
    }
    let mut by_subject: BTreeMap<&KnowledgePointId, Vec<&Definition>> = BTreeMap::new();
    for def in corpus {
        by_subject.entry(&def.subject).or_default().push(def);
    }
    if !by_subject.contains_key(root) {
        return Err(TreeError::RootUndefined { kp: root.clone() });
    }

    let mut tree = UnderstandingTree {
        root: root.clone(),
        children: BTreeMap::new(),
        nodes: BTreeSet::new(),
        bkp_nodes: BTreeSet::new(),
        cycle_breaks: Vec::new(),
    };
    let mut in_stack: BTreeSet<KnowledgePointId> = BTreeSet::new();
    extend(root, &by_subject, bkps, rule, &mut tree, &mut in_stack);
    Ok(tree)
}

fn extend(
    kp: &KnowledgePointId,
    by_subject: &BTreeMap<&KnowledgePointId, Vec<&Definition>>,
    bkps: &BTreeSet<KnowledgePointId>,
    rule: f64,
    tree: &mut UnderstandingTree,
    in_stack: &mut BTreeSet<KnowledgePointId>,
) {
    tree.nodes.insert(kp.clone());
    if bkps.contains(kp) {
        tree.bkp_nodes.insert(kp.clone());
        return;
    }
    let Some(definitions) = by_subject.get(kp) else {
        // No definitions and not a declared BKP: a de-facto leaf.
        return;
    };

    let mut kept: BTreeSet<KnowledgePointId> = BTreeSet::new();
    in_stack.insert(kp.clone());
    for child in select_children(definitions, rule) {
        if in_stack.contains(&child) {
            tree.cycle_breaks.push(CycleBreak {
                from: kp.clone(),
                to: child.clone(),
            });
            continue;
        }
        let seen = tree.nodes.contains(&child);
        kept.insert(child.clone());
        if !seen {
            extend(&child, by_subject, bkps, rule, tree, in_stack);
        }
    }
    in_stack.remove(kp);
    tree.children.insert(kp.clone(), kept);
}

/// Percent of familiarity: capped ratio of a score to the threshold.
pub fn percent_familiarity<R: Real>(score_gl: R, threshold_gl: R) -> Result<R, TreeError> {
    if !(threshold_gl > R::zero()) {
        return Err(TreeError::NonPositiveThreshold);
    }
    Ok(if score_gl >= threshold_gl {
        R::one()
    } else {
        score_gl.max(R::zero()) / threshold_gl
    })
}

/// Understood / Not Understood classification of a root topic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Understood,
    NotUnderstood,
}

/// The outcome of evaluating a tree against familiarity scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct UnderstandingReport<R: Real> {
    pub root: KnowledgePointId,
    pub root_pf: R,
    /// Mean percent familiarity over the unique non-root nodes; 1 when the
    /// tree is degenerate (no descendants).
    pub mean_descendant_pf: R,
    pub pu: R,
    pub classification: Classification,
    /// Mean tree familiarity over the threshold; present only when understood.
    pub magnitude: Option<R>,
    /// True when the tree had no descendants and `pu` equals the root PF.
    pub degenerate: bool,
}

impl<R: Real> UnderstandingReport<R> {
    /// Percent of understanding rounded to a whole percentage.
    pub fn pu_percent(&self) -> u32 {
        (self.pu * R::from_config(100.0))
            .round()
            .to_u32()
            .unwrap_or(0)
    }
}

fn score_of<R: Real>(scores: &BTreeMap<KnowledgePointId, R>, kp: &KnowledgePointId) -> R {
    scores.get(kp).copied().unwrap_or_else(R::zero)
}

/// Percent of understanding of the tree's root: the root's percent
/// familiarity times the mean percent familiarity of its unique
/// descendants. Topics without a score count as zero. Understood means
/// every node reached the threshold, i.e. the product is exactly one.
pub fn percent_understanding<R: Real>(
    tree: &UnderstandingTree,
    scores: &BTreeMap<KnowledgePointId, R>,
    threshold_gl: R,
) -> Result<UnderstandingReport<R>, TreeError> {
    let root_pf = percent_familiarity(score_of(scores, tree.root()), threshold_gl)?;
    let descendant_count = tree.node_count() - 1;
    let (mean_descendant_pf, degenerate) = if descendant_count == 0 {
        (R::one(), true)
    } else {
        let sum: R = tree
            .descendants()
            .map(|kp| percent_familiarity(score_of(scores, kp), threshold_gl))
            .collect::<Result<Vec<R>, TreeError>>()?
            .into_iter()
            .sum();
        (sum / R::from_count(descendant_count), false)
    };
    let pu = root_pf * mean_descendant_pf;
    let classification = if pu == R::one() {
        Classification::Understood
    } else {
        Classification::NotUnderstood
    };
    let magnitude = match classification {
        Classification::Understood => {
            Some(magnitude(tree, scores, threshold_gl, false)?)
        }
        Classification::NotUnderstood => None,
    };
    Ok(UnderstandingReport {
        root: tree.root().clone(),
        root_pf,
        mean_descendant_pf,
        pu,
        classification,
        magnitude,
        degenerate,
    })
}

/// Magnitude of understanding: the tree's mean familiarity divided by the
/// threshold, defined only when every node is at or above the threshold.
/// Basic knowledge points can be excluded from the mean, since people are
/// usually very familiar with them.
pub fn magnitude<R: Real>(
    tree: &UnderstandingTree,
    scores: &BTreeMap<KnowledgePointId, R>,
    threshold_gl: R,
    exclude_bkps: bool,
) -> Result<R, TreeError> {
    if !(threshold_gl > R::zero()) {
        return Err(TreeError::NonPositiveThreshold);
    }
    if tree.nodes().iter().any(|kp| score_of(scores, kp) < threshold_gl) {
        return Err(TreeError::NotUnderstood);
    }
    let considered: Vec<&KnowledgePointId> = tree
        .nodes()
        .iter()
        .filter(|kp| !(exclude_bkps && tree.is_bkp_node(kp)))
        .collect();
    // The root is never a BKP, so the set cannot be empty.
    let sum: R = considered.iter().map(|kp| score_of(scores, kp)).sum();
    Ok(sum / R::from_count(considered.len()) / threshold_gl)
}

/// Nested export node: the fully extended view of a tree, each node tagged
/// with its score and percent familiarity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TreeExportNode<R: Real> {
    pub kp: KnowledgePointId,
    pub f_gl: R,
    pub pf: R,
    pub bkp: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<TreeExportNode<R>>,
}

/// Renders the tree as nested nodes with per-node score and percent
/// familiarity. Shared subtrees are expanded at every occurrence; the
/// structure is acyclic so this terminates.
pub fn export_tree<R: Real>(
    tree: &UnderstandingTree,
    scores: &BTreeMap<KnowledgePointId, R>,
    threshold_gl: R,
) -> Result<TreeExportNode<R>, TreeError> {
    fn node<R: Real>(
        tree: &UnderstandingTree,
        kp: &KnowledgePointId,
        scores: &BTreeMap<KnowledgePointId, R>,
        threshold_gl: R,
    ) -> Result<TreeExportNode<R>, TreeError> {
        let f_gl = score_of(scores, kp);
        let children = tree
            .children_of(kp)
            .map(|kids| {
                kids.iter()
                    .map(|k| node(tree, k, scores, threshold_gl))
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()?
            .unwrap_or_default();
        Ok(TreeExportNode {
            kp: kp.clone(),
            f_gl,
            pf: percent_familiarity(f_gl, threshold_gl)?,
            bkp: tree.is_bkp_node(kp),
            children,
        })
    }
    node(tree, tree.root(), scores, threshold_gl)
}
