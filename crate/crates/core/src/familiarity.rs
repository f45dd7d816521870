//! Familiarity scoring with Ebbinghaus memory decay.
//!
//! Retention follows the classic forgetting curve
//! `b(t) = k / ((log10 t)^c + k)` with `k = 1.84`, `c = 1.25` and `t` in
//! minutes counted from one minute before the end of learning, so a session
//! retains 100% at its own cessation time. A topic's Familiarity Measure
//! (unit: gl) is the decay-weighted sum of its experiences:
//! minutes x proportion x retention, optionally attenuated by the recorded
//! state and method factors.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::history::LearningHistory;
use crate::kp::KnowledgePointId;
use crate::scalar::Real;

/// Forgetting-curve constants. The defaults are Ebbinghaus' fitted values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RetentionParams<R: Real> {
    pub k: R,
    pub c: R,
}

impl<R: Real> Default for RetentionParams<R> {
    fn default() -> Self {
        Self {
            k: R::from_config(1.84),
            c: R::from_config(1.25),
        }
    }
}

impl<R: Real> RetentionParams<R> {
    pub fn new(k: R, c: R) -> Result<Self, FamiliarityError> {
        let params = Self { k, c };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), FamiliarityError> {
        if !(self.k > R::zero()) {
            return Err(FamiliarityError::NonPositiveParam { field: "k" });
        }
        if !(self.c > R::zero()) {
            return Err(FamiliarityError::NonPositiveParam { field: "c" });
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum FamiliarityError {
    #[error("retention parameter `{field}` must be strictly positive")]
    NonPositiveParam { field: &'static str },
    #[error("history of `{kp}` has an experience at {lct} after the evaluation time {eval}")]
    FutureLearning {
        kp: KnowledgePointId,
        lct: DateTime<Utc>,
        eval: DateTime<Utc>,
    },
    #[error("compensation coefficient for sibling `{sibling}` of `{kp}` must be strictly positive")]
    NonPositiveCoefficient {
        kp: KnowledgePointId,
        sibling: KnowledgePointId,
    },
    #[error("`{kp}` lists itself as a sibling")]
    SelfSibling { kp: KnowledgePointId },
}

/// Fraction of a learning experience retained `minutes_since_learning`
/// minutes after it ended.
///
/// The curve evaluates at `t = minutes_since_learning + 1`, which makes it
/// exactly 1 at zero elapsed time and strictly decreasing afterwards.
/// Negative inputs clamp to full retention.
pub fn retention<R: Real>(minutes_since_learning: R, params: &RetentionParams<R>) -> R {
    let t = (minutes_since_learning + R::one()).max(R::one());
    let decayed = t.log10().powf(params.c);
    params.k / (decayed + params.k)
}

/// Which scoring formula to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamiliarityFormula {
    /// Attenuate each experience by its recorded state and method factors.
    #[default]
    Full,
    /// Ignore the factors: duration x proportion x retention only.
    Simple,
}

/// A familiarity score, in gl, at a specific evaluation time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FamiliarityScore<R: Real> {
    pub kp: KnowledgePointId,
    pub value_gl: R,
    pub eval_time: DateTime<Utc>,
    pub formula: FamiliarityFormula,
}

/// Scores a history at `eval_time`: the sum over experiences of
/// minutes x proportion x retention (x pps x lm under the full formula).
///
/// An empty history scores zero; an experience after `eval_time` is an error.
pub fn familiarity<R: Real>(
    history: &LearningHistory<R>,
    eval_time: DateTime<Utc>,
    params: &RetentionParams<R>,
    formula: FamiliarityFormula,
) -> Result<FamiliarityScore<R>, FamiliarityError> {
    params.validate()?;
    let minute = R::from_config(60.0);
    let mut total = R::zero();
    for experience in &history.experiences {
        if experience.lct > eval_time {
            return Err(FamiliarityError::FutureLearning {
                kp: history.kp.clone(),
                lct: experience.lct,
                eval: eval_time,
            });
        }
        let elapsed_minutes =
            R::from_config((eval_time - experience.lct).num_seconds() as f64) / minute;
        let mut contribution = experience.duration_minutes()
            * experience.proportion
            * retention(elapsed_minutes, params);
        if formula == FamiliarityFormula::Full {
            contribution = contribution * experience.pps * experience.lm;
        }
        total = total + contribution;
    }
    Ok(FamiliarityScore {
        kp: history.kp.clone(),
        value_gl: total,
        eval_time,
        formula,
    })
}

/// Sibling compensation: closely related topics lend a fraction of their
/// familiarity. Each sibling `j` of topic `i` contributes `F_j / c_j`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SiblingCompensation<R: Real> {
    pub groups: BTreeMap<KnowledgePointId, Vec<SiblingTerm<R>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SiblingTerm<R: Real> {
    pub sibling: KnowledgePointId,
    pub coefficient: R,
}

impl<R: Real> SiblingCompensation<R> {
    pub fn validate(&self) -> Result<(), FamiliarityError> {
        for (kp, terms) in &self.groups {
            for term in terms {
                if term.sibling == *kp {
                    return Err(FamiliarityError::SelfSibling { kp: kp.clone() });
                }
                if !(term.coefficient > R::zero()) {
                    return Err(FamiliarityError::NonPositiveCoefficient {
                        kp: kp.clone(),
                        sibling: term.sibling.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Applies sibling compensation to a score map.
///
/// All contributions read from a frozen snapshot of the input, so the result
/// does not depend on map order and compensation never cascades. Topics
/// without a score count as zero; a topic that only appears as a
/// compensation target still gains an entry.
pub fn compensate<R: Real>(
    scores: &BTreeMap<KnowledgePointId, R>,
    comp: &SiblingCompensation<R>,
) -> Result<BTreeMap<KnowledgePointId, R>, FamiliarityError> {
    comp.validate()?;
    let old = |kp: &KnowledgePointId| scores.get(kp).copied().unwrap_or_else(R::zero);
    let mut out: BTreeMap<KnowledgePointId, R> = scores.clone();
    for (kp, terms) in &comp.groups {
        let boost: R = terms
            .iter()
            .map(|t| old(&t.sibling) / t.coefficient)
            .sum();
        let entry = out.entry(kp.clone()).or_insert_with(R::zero);
        *entry = *entry + boost;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::{LearningExperience, LearningMethod};
    use chrono::{Duration, TimeZone};

    fn at(secs: i64) -> DateTime<Utc> {
        Utc.timestamp_opt(1_463_490_000 + secs, 0).unwrap()
    }

    fn params() -> RetentionParams<f64> {
        RetentionParams::default()
    }

    fn experience(lct: DateTime<Utc>, duration_s: u64, proportion: f64, pps: f64, lm: f64) -> LearningExperience<f64> {
        LearningExperience {
            lct,
            duration_s,
            proportion,
            pps,
            lm,
            method: LearningMethod::Read,
        }
    }

    #[test]
    fn retention_is_exactly_one_at_zero_elapsed() {
        assert_eq!(retention(0.0, &params()), 1.0);
    }

    #[test]
    fn retention_after_one_day_matches_independent_evaluation() {
        // Independent route: same curve written via ln instead of log10.
        let k = 1.84_f64;
        let c = 1.25_f64;
        let t = 1441.0_f64;
        let oracle = k / ((t.ln() / 10.0_f64.ln()).powf(c) + k);
        let got = retention(1440.0, &params());
        assert!((got - oracle).abs() < 1e-12);
        assert!((got - 0.304).abs() < 1e-3);
        assert!((got - 0.30408487225267334).abs() < 1e-12);
    }

    #[test]
    fn retention_decreases_monotonically() {
        let day = 1440.0;
        let grid = [day, 30.0 * day, 365.0 * day, 3650.0 * day];
        let values: Vec<f64> = grid.iter().map(|&m| retention(m, &params())).collect();
        for pair in values.windows(2) {
            assert!(pair[0] > pair[1]);
        }
        assert!(values[0] < 1.0);
    }

    #[test]
    fn retention_clamps_negative_elapsed_to_full() {
        assert_eq!(retention(-5.0, &params()), 1.0);
    }

    #[test]
    fn single_fresh_experience_scores_duration_times_proportion() {
        // 60 minutes at proportion 0.5, evaluated at the cessation time:
        // retention is 1, so the score is 30 gl.
        let lct = at(3600);
        let history = LearningHistory {
            kp: "A".into(),
            experiences: vec![experience(lct, 3600, 0.5, 1.0, 1.0)],
        };
        let score = familiarity(&history, lct, &params(), FamiliarityFormula::Simple).unwrap();
        assert_eq!(score.value_gl, 30.0);
    }

    #[test]
    fn unit_factors_make_full_equal_simple() {
        let history = LearningHistory {
            kp: "A".into(),
            experiences: vec![
                experience(at(0), 1800, 0.7, 1.0, 1.0),
                experience(at(86_400), 3600, 0.3, 1.0, 1.0),
            ],
        };
        let t = at(200_000);
        let full = familiarity(&history, t, &params(), FamiliarityFormula::Full).unwrap();
        let simple = familiarity(&history, t, &params(), FamiliarityFormula::Simple).unwrap();
        assert_eq!(full.value_gl, simple.value_gl);
    }

    #[test]
    fn scores_decay_and_factors_only_attenuate() {
        let last = at(10 * 86_400);
        let history = LearningHistory {
            kp: "A".into(),
            experiences: vec![
                experience(at(0), 5400, 0.5, 0.9, 0.8),
                experience(at(3 * 86_400), 3600, 0.8, 0.95, 1.0),
                experience(last, 7200, 0.4, 0.85, 0.9),
            ],
        };
        let offsets = [
            Duration::hours(1),
            Duration::days(1),
            Duration::days(30),
            Duration::days(365),
            Duration::days(3650),
        ];
        let mut previous_full = f64::INFINITY;
        let mut previous_simple = f64::INFINITY;
        for offset in offsets {
            let t = last + offset;
            let full = familiarity(&history, t, &params(), FamiliarityFormula::Full)
                .unwrap()
                .value_gl;
            let simple = familiarity(&history, t, &params(), FamiliarityFormula::Simple)
                .unwrap()
                .value_gl;
            assert!(full < previous_full);
            assert!(simple < previous_simple);
            // Factors at or below one can only lower the score.
            assert!(simple >= full);
            previous_full = full;
            previous_simple = simple;
        }
    }

    #[test]
    fn empty_history_scores_zero() {
        let history = LearningHistory::<f64>::empty("A".into());
        let score = familiarity(&history, at(0), &params(), FamiliarityFormula::Full).unwrap();
        assert_eq!(score.value_gl, 0.0);
    }

    #[test]
    fn future_learning_is_an_error() {
        let history = LearningHistory {
            kp: "A".into(),
            experiences: vec![experience(at(1000), 600, 1.0, 1.0, 1.0)],
        };
        assert!(matches!(
            familiarity(&history, at(0), &params(), FamiliarityFormula::Full),
            Err(FamiliarityError::FutureLearning { .. })
        ));
    }

    #[test]
    fn score_never_exceeds_undecayed_learning_mass() {
        let history = LearningHistory {
            kp: "A".into(),
            experiences: vec![
                experience(at(0), 5400, 0.5, 0.9, 0.8),
                experience(at(86_400), 3600, 0.8, 1.0, 1.0),
            ],
        };
        let cap: f64 = history
            .experiences
            .iter()
            .map(|e| e.duration_minutes() * e.proportion)
            .sum();
        let score = familiarity(&history, at(90_000), &params(), FamiliarityFormula::Full)
            .unwrap()
            .value_gl;
        assert!(score >= 0.0 && score <= cap);
    }

    #[test]
    fn shifting_history_and_eval_time_together_leaves_score_unchanged() {
        let history = LearningHistory {
            kp: "A".into(),
            experiences: vec![
                experience(at(0), 5400, 0.5, 0.9, 0.8),
                experience(at(86_400), 3600, 0.8, 1.0, 1.0),
            ],
        };
        let shift = Duration::days(400);
        let shifted = LearningHistory {
            kp: history.kp.clone(),
            experiences: history
                .experiences
                .iter()
                .map(|e| LearningExperience { lct: e.lct + shift, ..e.clone() })
                .collect(),
        };
        let t = at(200_000);
        let a = familiarity(&history, t, &params(), FamiliarityFormula::Full).unwrap();
        let b = familiarity(&shifted, t + shift, &params(), FamiliarityFormula::Full).unwrap();
        assert_eq!(a.value_gl, b.value_gl);
    }

    fn score_map(pairs: &[(&str, f64)]) -> BTreeMap<KnowledgePointId, f64> {
        pairs.iter().map(|(k, v)| (KnowledgePointId::from(*k), *v)).collect()
    }

    #[test]
    fn no_siblings_means_no_change() {
        let scores = score_map(&[("A", 50.0), ("B", 20.0)]);
        let out = compensate(&scores, &SiblingCompensation::default()).unwrap();
        assert_eq!(out, scores);
    }

    #[test]
    fn one_sibling_contributes_its_score_over_the_coefficient() {
        let scores = score_map(&[("A", 12.0), ("B", 50.0)]);
        let comp = SiblingCompensation {
            groups: BTreeMap::from([(
                KnowledgePointId::from("A"),
                vec![SiblingTerm { sibling: "B".into(), coefficient: 5.0 }],
            )]),
        };
        let out = compensate(&scores, &comp).unwrap();
        assert_eq!(out[&"A".into()], 22.0);
        assert_eq!(out[&"B".into()], 50.0);
    }

    #[test]
    fn compensation_uses_a_frozen_snapshot() {
        // A and B compensate each other; both boosts read pre-update values.
        let scores = score_map(&[("A", 10.0), ("B", 40.0)]);
        let comp = SiblingCompensation {
            groups: BTreeMap::from([
                (
                    KnowledgePointId::from("A"),
                    vec![SiblingTerm { sibling: "B".into(), coefficient: 4.0 }],
                ),
                (
                    KnowledgePointId::from("B"),
                    vec![SiblingTerm { sibling: "A".into(), coefficient: 2.0 }],
                ),
            ]),
        };
        let out = compensate(&scores, &comp).unwrap();
        assert_eq!(out[&"A".into()], 20.0);
        assert_eq!(out[&"B".into()], 45.0);
    }

    #[test]
    fn compensation_never_decreases_scores_and_absent_siblings_count_zero() {
        let scores = score_map(&[("A", 10.0)]);
        let comp = SiblingCompensation {
            groups: BTreeMap::from([
                (
                    KnowledgePointId::from("A"),
                    vec![SiblingTerm { sibling: "ghost".into(), coefficient: 3.0 }],
                ),
                (
                    KnowledgePointId::from("C"),
                    vec![SiblingTerm { sibling: "A".into(), coefficient: 2.0 }],
                ),
            ]),
        };
        let out = compensate(&scores, &comp).unwrap();
        assert_eq!(out[&"A".into()], 10.0);
        // A topic that only appears as a target gains an entry.
        assert_eq!(out[&"C".into()], 5.0);
    }

    #[test]
    fn invalid_compensation_is_rejected() {
        let scores = score_map(&[("A", 10.0)]);
        let non_positive = SiblingCompensation {
            groups: BTreeMap::from([(
                KnowledgePointId::from("A"),
                vec![SiblingTerm { sibling: "B".into(), coefficient: 0.0 }],
            )]),
        };
        assert!(matches!(
            compensate(&scores, &non_positive),
            Err(FamiliarityError::NonPositiveCoefficient { .. })
        ));
        let self_ref = SiblingCompensation {
            groups: BTreeMap::from([(
                KnowledgePointId::from("A"),
                vec![SiblingTerm { sibling: "A".into(), coefficient: 2.0 }],
            )]),
        };
        assert!(matches!(
            compensate(&scores, &self_ref),
            Err(FamiliarityError::SelfSibling { .. })
        ));
    }

    #[test]
    fn generic_scalar_works_in_f32() {
        let p: RetentionParams<f32> = RetentionParams::default();
        assert_eq!(retention(0.0_f32, &p), 1.0);
        assert!((retention(1440.0_f32, &p) - 0.304).abs() < 1e-3);
    }
}
