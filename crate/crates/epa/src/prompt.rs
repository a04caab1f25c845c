//! Task templates and in-context prompt assembly.
//!
//! A rendered prompt is: each demonstration's instantiated instruction
//! followed by the demonstration target, all joined by the demo separator,
//! and finally the instruction instantiated with the query source and no
//! target. Rendering is byte-exact per template so the wire format stays
//! auditable.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::augment::ExpandedDemoSet;
use crate::types::{TaskKind, TestInstance};

pub const MT_PATTERN: &str = "Translate the following text from English into [target-lang]: [source]";
pub const SUMMARIZATION_PATTERN: &str =
    "Given the following dialogue: [source] Give the dialogue summarization:";
pub const PARAPHRASING_PATTERN: &str = "Given the English input: [source] Give the paraphrase:";
pub const NLI_PATTERN: &str =
    "Given the following two sentences: [source] Whether they are neutral, contradiction, or entailment:";

pub const DEFAULT_DEMO_SEPARATOR: &str = "\n\n";
pub const DEFAULT_DEMO_TARGET_PREFIX: &str = " ";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub task: TaskKind,
    pub instruction_pattern: String,
    pub demo_separator: String,
    pub demo_target_prefix: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptRequest {
    pub rendered_text: String,
    pub instance_id: String,
    pub demo_count: usize,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("template task does not match demonstration task")]
    TaskMismatch,
    #[error("instruction pattern must contain [source] exactly once")]
    BadSourcePlaceholder,
    #[error("machine translation pattern must contain [target-lang] exactly once")]
    BadTargetLangPlaceholder,
}

impl PromptTemplate {
    pub fn new(
        task: TaskKind,
        instruction_pattern: impl Into<String>,
        demo_separator: impl Into<String>,
        demo_target_prefix: impl Into<String>,
    ) -> Result<Self, PromptError> {
        let template = PromptTemplate {
            task,
            instruction_pattern: instruction_pattern.into(),
            demo_separator: demo_separator.into(),
            demo_target_prefix: demo_target_prefix.into(),
        };
        template.validate()?;
        Ok(template)
    }

    pub fn validate(&self) -> Result<(), PromptError> {
        if self.instruction_pattern.matches("[source]").count() != 1 {
            return Err(PromptError::BadSourcePlaceholder);
        }
        let lang_count = self.instruction_pattern.matches("[target-lang]").count();
        match (&self.task, lang_count) {
            (TaskKind::MachineTranslation(_), 1) => Ok(()),
            (TaskKind::MachineTranslation(_), _) => Err(PromptError::BadTargetLangPlaceholder),
            (_, 0) => Ok(()),
            (_, _) => Err(PromptError::BadTargetLangPlaceholder),
        }
    }

    fn instantiate(&self, source: &str) -> String {
        let mut text = self.instruction_pattern.replace("[source]", source);
        if let TaskKind::MachineTranslation(lang) = &self.task {
            text = text.replace("[target-lang]", lang);
        }
        text
    }
}

/// The standard template for a task, with default separator and prefix.
pub fn default_template(task: TaskKind) -> PromptTemplate {
    let pattern = match &task {
        TaskKind::MachineTranslation(_) => MT_PATTERN,
        TaskKind::DialogueSummarization => SUMMARIZATION_PATTERN,
        TaskKind::Paraphrasing => PARAPHRASING_PATTERN,
        TaskKind::NaturalLanguageInference => NLI_PATTERN,
    };
    PromptTemplate {
        task,
        instruction_pattern: pattern.to_string(),
        demo_separator: DEFAULT_DEMO_SEPARATOR.to_string(),
        demo_target_prefix: DEFAULT_DEMO_TARGET_PREFIX.to_string(),
    }
}

/// NLI premise/hypothesis pairs serialize into a single source string.
pub fn nli_source(premise: &str, hypothesis: &str) -> String {
    format!("Premise: {premise} Hypothesis: {hypothesis}")
}

/// Assemble the full in-context prompt for one test instance.
pub fn build_prompt(
    expanded: &ExpandedDemoSet,
    instance: &TestInstance,
    template: &PromptTemplate,
) -> Result<PromptRequest, PromptError> {
    if template.task != expanded.task {
        return Err(PromptError::TaskMismatch);
    }
    template.validate()?;

    let mut blocks: Vec<String> = Vec::with_capacity(expanded.entries.len() + 1);
    for demo in &expanded.entries {
        blocks.push(format!(
            "{}{}{}",
            template.instantiate(&demo.source),
            template.demo_target_prefix,
            demo.target
        ));
    }
    blocks.push(template.instantiate(&instance.source));

    Ok(PromptRequest {
        rendered_text: blocks.join(&template.demo_separator),
        instance_id: instance.id.clone(),
        demo_count: expanded.entries.len(),
    })
}

/// On-disk template configuration: one section per task, all fields optional
/// with the standard defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TemplateConfig {
    #[serde(default)]
    pub tasks: BTreeMap<String, TemplateOverride>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TemplateOverride {
    pub instruction_pattern: Option<String>,
    pub demo_separator: Option<String>,
    pub demo_target_prefix: Option<String>,
}

impl TemplateConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, TemplateConfigError> {
        let text = std::fs::read_to_string(path)?;
        Ok(toml::from_str(&text)?)
    }

    fn key_for(task: &TaskKind) -> &'static str {
        match task {
            TaskKind::MachineTranslation(_) => "machine_translation",
            TaskKind::DialogueSummarization => "dialogue_summarization",
            TaskKind::Paraphrasing => "paraphrasing",
            TaskKind::NaturalLanguageInference => "natural_language_inference",
        }
    }

    /// Resolve the template for a task, applying any configured overrides.
    pub fn template_for(&self, task: TaskKind) -> Result<PromptTemplate, PromptError> {
        let mut template = default_template(task);
        if let Some(over) = self.tasks.get(Self::key_for(&template.task)) {
            if let Some(pattern) = &over.instruction_pattern {
                template.instruction_pattern = pattern.clone();
            }
            if let Some(sep) = &over.demo_separator {
                template.demo_separator = sep.clone();
            }
            if let Some(prefix) = &over.demo_target_prefix {
                template.demo_target_prefix = prefix.clone();
            }
        }
        template.validate()?;
        Ok(template)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum TemplateConfigError {
    #[error("cannot read template config: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse template config: {0}")]
    Parse(#[from] toml::de::Error),
}
