//! Demonstration-set expansion: paraphrase-based augmentation and the
//! copy-the-demos baseline.
//!
//! Expansion never mutates the originals. An EPA pass over k originals with n
//! paraphrases each yields exactly k*(1+n) entries; a copy pass with repeat
//! factor r yields k*r. Any backend failure aborts the expansion rather than
//! silently shrinking the demonstration set, since a smaller set would
//! corrupt k-shot comparisons downstream.

use serde::{Deserialize, Serialize};

use crate::llm::{GenerationParams, Generator, LlmError};
use crate::types::{Demonstration, DemonstrationSet, Provenance, TaskKind};

pub const DEFAULT_PARAPHRASE_TEMPLATE: &str = "Paraphrase the following text: [source]";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AugmentationMode {
    Epa { n_paraphrases: usize },
    CopyK { repeat_factor: usize },
}

/// How paraphrase entries are ordered relative to their originals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Each original is immediately followed by its paraphrases.
    GroupedAfterOriginal,
    /// All originals first, then all paraphrases in (origin, variant) order.
    AllOriginalsFirst,
}

impl Default for Placement {
    fn default() -> Self {
        Placement::GroupedAfterOriginal
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationPlan {
    #[serde(flatten)]
    pub mode: AugmentationMode,
    pub paraphrase_prompt_template: String,
    pub placement: Placement,
}

impl AugmentationPlan {
    pub fn epa(n_paraphrases: usize) -> Self {
        AugmentationPlan {
            mode: AugmentationMode::Epa { n_paraphrases },
            paraphrase_prompt_template: DEFAULT_PARAPHRASE_TEMPLATE.to_string(),
            placement: Placement::default(),
        }
    }

    pub fn copy_k(repeat_factor: usize) -> Self {
        AugmentationPlan {
            mode: AugmentationMode::CopyK { repeat_factor },
            paraphrase_prompt_template: DEFAULT_PARAPHRASE_TEMPLATE.to_string(),
            placement: Placement::default(),
        }
    }
}

/// An expanded demonstration sequence plus the inputs that produced it, so a
/// persisted expansion is auditable and replayable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpandedDemoSet {
    pub task: TaskKind,
    pub entries: Vec<Demonstration>,
    pub origin: DemonstrationSet,
    pub plan: AugmentationPlan,
}

#[derive(Debug, thiserror::Error)]
pub enum AugmentError {
    #[error("machine translation expansion requires a translator backend")]
    MissingTranslator,
    #[error("translator supplied for non-translation task")]
    UnexpectedTranslator,
    #[error("copy repeat_factor must be >= 1")]
    InvalidRepeatFactor,
    #[error("input demonstration {index} is not an original")]
    NonOriginalInput { index: usize },
    #[error("paraphrase template must contain [source] exactly once")]
    BadParaphraseTemplate,
    #[error("paraphrasing {field} of demonstration {index} failed: {source}")]
    ParaphraseFailure {
        index: usize,
        field: &'static str,
        #[source]
        source: LlmError,
    },
    #[error("backend returned an empty paraphrase for demonstration {index}")]
    EmptyParaphrase { index: usize },
}

/// One paraphrase/translate text transformation backed by a generator.
pub struct TextRewriter<'a> {
    generator: &'a Generator<'a>,
    params: GenerationParams,
    /// When set, the request is the template with [source] substituted;
    /// when absent the raw text is sent verbatim (translator-style backends).
    prompt_template: Option<String>,
}

impl<'a> TextRewriter<'a> {
    pub fn paraphraser(
        generator: &'a Generator<'a>,
        params: GenerationParams,
        template: impl Into<String>,
    ) -> Result<Self, AugmentError> {
        let template = template.into();
        if template.matches("[source]").count() != 1 {
            return Err(AugmentError::BadParaphraseTemplate);
        }
        Ok(TextRewriter { generator, params, prompt_template: Some(template) })
    }

    pub fn translator(generator: &'a Generator<'a>, params: GenerationParams) -> Self {
        TextRewriter { generator, params, prompt_template: None }
    }

    fn rewrite(&self, text: &str, index: usize, field: &'static str) -> Result<String, AugmentError> {
        let request = match &self.prompt_template {
            Some(template) => template.replace("[source]", text),
            None => text.to_string(),
        };
        let record = self
            .generator
            .generate(&request, &self.params)
            .map_err(|source| AugmentError::ParaphraseFailure { index, field, source })?;
        if record.output_text.trim().is_empty() {
            return Err(AugmentError::EmptyParaphrase { index });
        }
        Ok(record.output_text)
    }
}

fn require_originals(demos: &DemonstrationSet) -> Result<(), AugmentError> {
    for (index, demo) in demos.demos.iter().enumerate() {
        if demo.provenance != Provenance::Original {
            return Err(AugmentError::NonOriginalInput { index });
        }
    }
    Ok(())
}

/// Expand a demonstration set with n paraphrases per original.
///
/// Non-MT tasks paraphrase both source and target through the paraphrase
/// prompt, except NLI targets which are class labels and are copied verbatim.
/// MT paraphrases the English source and sends each paraphrase through the
/// translator to produce its paired target.
pub fn epa_expand(
    demos: &DemonstrationSet,
    n: usize,
    placement: Placement,
    paraphraser: &TextRewriter<'_>,
    translator: Option<&TextRewriter<'_>>,
) -> Result<ExpandedDemoSet, AugmentError> {
    require_originals(demos)?;
    let is_mt = demos.task.is_machine_translation();
    match (is_mt, translator.is_some()) {
        (true, false) => return Err(AugmentError::MissingTranslator),
        (false, true) => return Err(AugmentError::UnexpectedTranslator),
        _ => {}
    }

    // All paraphrases are produced before assembly so a failure leaves no
    // partially expanded set behind.
    let mut paraphrases: Vec<Vec<Demonstration>> = Vec::with_capacity(demos.len());
    for (index, demo) in demos.demos.iter().enumerate() {
        let mut variants = Vec::with_capacity(n);
        for variant in 1..=n {
            let source = paraphraser.rewrite(&demo.source, index, "source")?;
            let target = if is_mt {
                translator.unwrap().rewrite(&source, index, "target")?
            } else if demos.task == TaskKind::NaturalLanguageInference {
                demo.target.clone()
            } else {
                paraphraser.rewrite(&demo.target, index, "target")?
            };
            variants.push(Demonstration {
                source,
                target,
                provenance: Provenance::Paraphrase { origin_index: index, variant },
            });
        }
        paraphrases.push(variants);
    }

    let mut entries = Vec::with_capacity(demos.len() * (1 + n));
    match placement {
        Placement::GroupedAfterOriginal => {
            for (demo, variants) in demos.demos.iter().zip(paraphrases) {
                entries.push(demo.clone());
                entries.extend(variants);
            }
        }
        Placement::AllOriginalsFirst => {
            entries.extend(demos.demos.iter().cloned());
            for variants in paraphrases {
                entries.extend(variants);
            }
        }
    }

    Ok(ExpandedDemoSet {
        task: demos.task.clone(),
        entries,
        origin: demos.clone(),
        plan: AugmentationPlan {
            mode: AugmentationMode::Epa { n_paraphrases: n },
            paraphrase_prompt_template: paraphraser
                .prompt_template
                .clone()
                .unwrap_or_else(|| DEFAULT_PARAPHRASE_TEMPLATE.to_string()),
            placement,
        },
    })
}

/// Repeat the original demonstration block `repeat_factor` times in block
/// order [d1..dk, d1..dk, ...]; repeats carry copy provenance.
pub fn copy_expand(demos: &DemonstrationSet, repeat_factor: usize) -> Result<ExpandedDemoSet, AugmentError> {
    if repeat_factor < 1 {
        return Err(AugmentError::InvalidRepeatFactor);
    }
    require_originals(demos)?;

    let mut entries = Vec::with_capacity(demos.len() * repeat_factor);
    entries.extend(demos.demos.iter().cloned());
    for _ in 1..repeat_factor {
        for (index, demo) in demos.demos.iter().enumerate() {
            entries.push(Demonstration {
                source: demo.source.clone(),
                target: demo.target.clone(),
                provenance: Provenance::Copy { origin_index: index },
            });
        }
    }

    Ok(ExpandedDemoSet {
        task: demos.task.clone(),
        entries,
        origin: demos.clone(),
        plan: AugmentationPlan::copy_k(repeat_factor),
    })
}

/// A no-expansion pass-through, so baseline runs share the ExpandedDemoSet
/// shape with augmented ones.
pub fn identity_expand(demos: &DemonstrationSet) -> Result<ExpandedDemoSet, AugmentError> {
    copy_expand(demos, 1)
}
