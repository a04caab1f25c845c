//! Domain types shared by every module. No I/O and no backends here; all
//! values are immutable after construction and safe to share across threads.

use serde::{Deserialize, Serialize};

/// The task a demonstration set or corpus belongs to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "target_language", rename_all = "snake_case")]
pub enum TaskKind {
    /// English-to-X translation. Carries the target-language tag used in the
    /// prompt template (e.g. "German").
    MachineTranslation(String),
    DialogueSummarization,
    Paraphrasing,
    NaturalLanguageInference,
}

impl TaskKind {
    pub fn machine_translation(target_language: impl Into<String>) -> Result<Self, TypeError> {
        let tag = target_language.into();
        if tag.trim().is_empty() {
            return Err(TypeError::EmptyTargetLanguage);
        }
        Ok(TaskKind::MachineTranslation(tag))
    }

    pub fn is_machine_translation(&self) -> bool {
        matches!(self, TaskKind::MachineTranslation(_))
    }
}

/// Where a demonstration entry came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Original,
    /// Paraphrase number `variant` (1-based) of the original at `origin_index`.
    Paraphrase { origin_index: usize, variant: usize },
    /// Verbatim copy of the original at `origin_index`.
    Copy { origin_index: usize },
}

/// One source/target pair included in a prompt before the query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demonstration {
    pub source: String,
    pub target: String,
    pub provenance: Provenance,
}

impl Demonstration {
    pub fn original(source: impl Into<String>, target: impl Into<String>) -> Result<Self, TypeError> {
        Self::new(source, target, Provenance::Original)
    }

    pub fn new(
        source: impl Into<String>,
        target: impl Into<String>,
        provenance: Provenance,
    ) -> Result<Self, TypeError> {
        let source = source.into();
        let target = target.into();
        if source.is_empty() {
            return Err(TypeError::EmptySource);
        }
        if target.is_empty() {
            return Err(TypeError::EmptyTarget);
        }
        if let Provenance::Paraphrase { variant, .. } = provenance {
            if variant < 1 {
                return Err(TypeError::InvalidVariant);
            }
        }
        Ok(Demonstration { source, target, provenance })
    }
}

/// An ordered set of demonstrations for one task, together with the sampling
/// seed that produced it. Order is significant and survives serialization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DemonstrationSet {
    pub task: TaskKind,
    pub demos: Vec<Demonstration>,
    pub seed: u64,
}

impl DemonstrationSet {
    pub fn new(task: TaskKind, demos: Vec<Demonstration>, seed: u64) -> Self {
        DemonstrationSet { task, demos, seed }
    }

    pub fn len(&self) -> usize {
        self.demos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demos.is_empty()
    }
}

/// One evaluation instance: a source text and at least one gold reference
/// (for NLI the single reference is the canonical gold label).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestInstance {
    pub id: String,
    pub source: String,
    pub references: Vec<String>,
}

impl TestInstance {
    pub fn new(
        id: impl Into<String>,
        source: impl Into<String>,
        references: Vec<String>,
    ) -> Result<Self, TypeError> {
        let references = references;
        if references.is_empty() || references.iter().any(|r| r.is_empty()) {
            return Err(TypeError::EmptyReferences);
        }
        Ok(TestInstance { id: id.into(), source: source.into(), references })
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TypeError {
    #[error("machine translation requires a non-empty target-language tag")]
    EmptyTargetLanguage,
    #[error("demonstration source must be non-empty")]
    EmptySource,
    #[error("demonstration target must be non-empty")]
    EmptyTarget,
    #[error("paraphrase variant must be >= 1")]
    InvalidVariant,
    #[error("test instance needs at least one non-empty reference")]
    EmptyReferences,
}

pub const NLI_LABELS: [&str; 3] = ["neutral", "contradiction", "entailment"];

/// Extract a canonical NLI label from free-form model output.
///
/// Scans case-insensitively for "neutral", "contradiction" and "entailment"
/// and returns the label whose first occurrence comes earliest. Returns
/// `None` when none of the three words occurs.
pub fn canonical_nli_label(raw: &str) -> Option<&'static str> {
    let lowered = raw.to_lowercase();
    NLI_LABELS
        .iter()
        .filter_map(|label| lowered.find(label).map(|pos| (pos, *label)))
        .min_by_key(|(pos, _)| *pos)
        .map(|(_, label)| label)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nli_label_case_normalization() {
        assert_eq!(canonical_nli_label("Entailment."), Some("entailment"));
        assert_eq!(canonical_nli_label("NEUTRAL"), Some("neutral"));
    }

    #[test]
    fn nli_label_absent() {
        assert_eq!(canonical_nli_label("xyz"), None);
        assert_eq!(canonical_nli_label(""), None);
    }

    #[test]
    fn nli_label_earliest_occurrence_wins() {
        // "contradiction" starts at byte 12, "entailment" at byte 32.
        let raw = "It is not a contradiction; it is entailment";
        assert_eq!(canonical_nli_label(raw), Some("contradiction"));
    }

    #[test]
    fn nli_label_idempotent() {
        for label in NLI_LABELS {
            assert_eq!(canonical_nli_label(label), Some(label));
        }
    }

    #[test]
    fn demonstration_rejects_empty_fields() {
        assert_eq!(Demonstration::original("", "y"), Err(TypeError::EmptySource));
        assert_eq!(Demonstration::original("x", ""), Err(TypeError::EmptyTarget));
        assert_eq!(
            Demonstration::new("x", "y", Provenance::Paraphrase { origin_index: 0, variant: 0 }),
            Err(TypeError::InvalidVariant)
        );
    }

    #[test]
    fn task_kind_requires_language_tag() {
        assert_eq!(TaskKind::machine_translation("  "), Err(TypeError::EmptyTargetLanguage));
        assert!(TaskKind::machine_translation("German").is_ok());
    }

    #[test]
    fn demonstration_set_roundtrip_preserves_order_and_seed() {
        let set = DemonstrationSet::new(
            TaskKind::Paraphrasing,
            vec![
                Demonstration::original("a", "b").unwrap(),
                Demonstration::new("c", "d", Provenance::Copy { origin_index: 0 }).unwrap(),
            ],
            42,
        );
        let json = serde_json::to_string(&set).unwrap();
        let back: DemonstrationSet = serde_json::from_str(&json).unwrap();
        assert_eq!(set, back);
    }
}
