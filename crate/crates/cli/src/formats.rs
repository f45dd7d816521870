//! File-format helpers: reading and writing the JSON formats the commands
//! exchange, and turning a document manifest into profiles, definitions and
//! derived basic-topic sets.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use ickem_core::caiml::TreeIndex;
use ickem_core::kp::KnowledgePointId;
use ickem_core::textshare::{count_terms, tf_share};
use ickem_core::{Definition, DocumentProfile, KpDictionary, ShareVector};

use crate::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading {}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = read_text(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::validation(format!("parsing {}: {e}", path.display())))
}

/// Writes deterministic, pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::validation(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))
}

pub fn parse_timestamp(text: &str) -> Result<DateTime<Utc>, CliError> {
    DateTime::parse_from_rfc3339(text)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|e| CliError::validation(format!("timestamp `{text}` is not ISO-8601: {e}")))
}

pub fn load_dictionary(path: &Path) -> Result<KpDictionary, CliError> {
    let text = read_text(path)?;
    KpDictionary::from_json(&text)
        .map_err(|e| CliError::validation(format!("dictionary {}: {e}", path.display())))
}

pub fn load_shares(path: &Path) -> Result<ShareVector, CliError> {
    let map: BTreeMap<KnowledgePointId, f64> = read_json(path)?;
    ickem_core::textshare::ShareVector::from_raw(map)
        .map_err(|e| CliError::validation(format!("shares file {}: {e}", path.display())))
}

/// One entry of a document manifest. Topics come from the curated
/// `kp_refs` list (uniform shares) or, when absent, from the raw `text`
/// (term-frequency shares; requires a dictionary).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub doc_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defines: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kp_refs: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

/// One entry of a definition corpus. A missing `referenced` list is
/// extracted from the text with the dictionary matcher.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DefinitionRecord {
    pub subject: String,
    #[serde(default)]
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub referenced: Option<Vec<String>>,
}

/// A fully resolved document manifest.
pub struct Manifest {
    pub docs: Vec<DocumentProfile>,
    pub definitions: Vec<Definition>,
    /// Topics no document defines; they need no understanding tree.
    pub bkps: BTreeSet<KnowledgePointId>,
}

impl Manifest {
    pub fn tree_index(&self, rule: f64) -> Result<TreeIndex, CliError> {
        TreeIndex::build(&self.definitions, &self.bkps, rule)
            .map_err(|e| CliError::validation(format!("building understanding trees: {e}")))
    }
}

pub fn load_manifest(
    path: &Path,
    dict: Option<&KpDictionary>,
    alpha: f64,
) -> Result<Manifest, CliError> {
    let records: Vec<DocumentRecord> = read_json(path)?;
    if records.is_empty() {
        return Err(CliError::validation(format!(
            "manifest {} contains no documents",
            path.display()
        )));
    }
    let mut docs = Vec::with_capacity(records.len());
    let mut definitions = Vec::new();
    let mut mentioned: BTreeSet<KnowledgePointId> = BTreeSet::new();
    let mut defined: BTreeSet<KnowledgePointId> = BTreeSet::new();

    for record in &records {
        let defines = record.defines.as_deref().map(KnowledgePointId::from);
        let profile = match (&record.kp_refs, &record.text) {
            (Some(refs), _) => DocumentProfile::uniform(
                record.doc_id.as_str(),
                refs.iter().map(|r| KnowledgePointId::from(r.as_str())),
                defines.clone(),
            ),
            (None, Some(text)) => {
                let dict = dict.ok_or_else(|| {
                    CliError::validation(format!(
                        "document `{}` carries raw text; pass --dict to extract its topics",
                        record.doc_id
                    ))
                })?;
                let stats = count_terms(text, dict)
                    .map_err(|e| CliError::validation(format!("document `{}`: {e}", record.doc_id)))?;
                let shares = tf_share(&stats, alpha)
                    .map_err(|e| CliError::validation(format!("document `{}`: {e}", record.doc_id)))?;
                DocumentProfile {
                    doc_id: record.doc_id.as_str().into(),
                    kp_shares: shares.as_map().clone(),
                    defines: defines.clone(),
                }
            }
            (None, None) => {
                return Err(CliError::validation(format!(
                    "document `{}` needs either kp_refs or text",
                    record.doc_id
                )))
            }
        };
        profile
            .validate()
            .map_err(|e| CliError::validation(e.to_string()))?;
        mentioned.extend(profile.kps().cloned());

        if let Some(subject) = defines {
            defined.insert(subject.clone());
            definitions.push(Definition::new(
                subject,
                record.text.clone().unwrap_or_default(),
                profile.kps().cloned(),
            ));
        }
        docs.push(profile);
    }

    let bkps = mentioned.difference(&defined).cloned().collect();
    Ok(Manifest {
        docs,
        definitions,
        bkps,
    })
}

pub fn load_definitions(
    path: &Path,
    dict: &KpDictionary,
) -> Result<Vec<Definition>, CliError> {
    let records: Vec<DefinitionRecord> = read_json(path)?;
    records
        .iter()
        .map(|record| match &record.referenced {
            Some(refs) => Ok(Definition::new(
                record.subject.as_str(),
                record.text.clone(),
                refs.iter().map(|r| KnowledgePointId::from(r.as_str())),
            )),
            None => Definition::extracted(record.subject.as_str(), record.text.clone(), dict)
                .map_err(|e| {
                    CliError::validation(format!("definition of `{}`: {e}", record.subject))
                }),
        })
        .collect()
}
