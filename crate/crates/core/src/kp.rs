//! Domain identifiers shared by every stage of the pipeline.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Canonical identifier of a Knowledge Point (a named unit of conceptual
/// knowledge, e.g. `"JPD"` for a joint probability distribution).
///
/// Ids are case-sensitive; surface-form matching happens through the
/// dictionary's alias phrases, not through the id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct KnowledgePointId(pub String);

impl KnowledgePointId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for KnowledgePointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for KnowledgePointId {
    fn from(id: &str) -> Self {
        Self(id.to_owned())
    }
}

impl From<String> for KnowledgePointId {
    fn from(id: String) -> Self {
        Self(id)
    }
}

/// Identifier of a learning material (document).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DocumentId(pub String);

impl DocumentId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DocumentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for DocumentId {
    fn from(id: &str) -> Self {
        Self(id.to_owned())
    }
}

impl From<String> for DocumentId {
    fn from(id: String) -> Self {
        Self(id)
    }
}
