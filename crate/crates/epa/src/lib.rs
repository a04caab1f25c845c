//! EPA: paraphrase-based demonstration augmentation for in-context learning.
//!
//! The crate covers the whole experiment loop: sampling demonstrations from
//! a corpus, expanding them via paraphrasing (or the copy baseline),
//! rendering task prompts, dispatching to a generation backend with caching
//! and retries, and scoring the outputs with from-scratch chrF++, BLEU,
//! ROUGE-L and accuracy implementations, averaged over seeds.

pub mod augment;
pub mod data;
pub mod llm;
pub mod metrics;
pub mod prompt;
pub mod runner;
pub mod types;

pub use augment::{copy_expand, epa_expand, AugmentationPlan, ExpandedDemoSet, Placement};
pub use data::{load_jsonl, load_parallel_tsv, sample_demonstrations, Corpus};
pub use llm::{Backend, GenerationParams, GenerationRecord, Generator, ResponseCache};
pub use metrics::{accuracy, chrf_pp, corpus_bleu, rouge_l_f1, ChrfConfig};
pub use prompt::{build_prompt, PromptRequest, PromptTemplate};
pub use runner::{aggregate, emit_report, run_experiment, ExperimentConfig, ScoreReport};
pub use types::{canonical_nli_label, Demonstration, DemonstrationSet, TaskKind, TestInstance};
