//! Python bindings for the epa crate: metrics, label extraction,
//! demonstration expansion with table-backed mock backends, prompt
//! rendering and aggregation.

use std::collections::HashMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use epa::augment::{self, Placement, TextRewriter, DEFAULT_PARAPHRASE_TEMPLATE};
use epa::data;
use epa::llm::{GenerationParams, Generator, MockFixture, RetryPolicy};
use epa::metrics;
use epa::prompt::{self, default_template};
use epa::types::{Demonstration, DemonstrationSet, Provenance, TaskKind, TestInstance};

fn parse_task(task: &str, target_language: Option<&str>) -> PyResult<TaskKind> {
    match task {
        "machine_translation" => {
            let lang = target_language
                .ok_or_else(|| PyValueError::new_err("machine_translation needs target_language"))?;
            TaskKind::machine_translation(lang).map_err(|e| PyValueError::new_err(e.to_string()))
        }
        "dialogue_summarization" => Ok(TaskKind::DialogueSummarization),
        "paraphrasing" => Ok(TaskKind::Paraphrasing),
        "natural_language_inference" => Ok(TaskKind::NaturalLanguageInference),
        other => Err(PyValueError::new_err(format!("unknown task {other:?}"))),
    }
}

fn demo_set(task: TaskKind, demos: Vec<(String, String)>, seed: u64) -> PyResult<DemonstrationSet> {
    let demos = demos
        .into_iter()
        .map(|(s, t)| Demonstration::original(s, t))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(DemonstrationSet::new(task, demos, seed))
}

fn provenance_tag(provenance: &Provenance) -> String {
    match provenance {
        Provenance::Original => "original".to_string(),
        Provenance::Paraphrase { origin_index, variant } => {
            format!("paraphrase:{origin_index}:{variant}")
        }
        Provenance::Copy { origin_index } => format!("copy:{origin_index}"),
    }
}

#[pyfunction]
fn chrf_pp(hypotheses: Vec<String>, references: Vec<Vec<String>>) -> PyResult<f64> {
    metrics::chrf_pp(&hypotheses, &references, &metrics::ChrfConfig::default())
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pyfunction]
fn corpus_bleu(hypotheses: Vec<String>, references: Vec<Vec<String>>) -> PyResult<f64> {
    metrics::corpus_bleu(&hypotheses, &references).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pyfunction]
fn rouge_l_f1(hypothesis: String, references: Vec<String>) -> PyResult<f64> {
    metrics::rouge_l_f1(&hypothesis, &references).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Returns (accuracy, parse_failure_count).
#[pyfunction]
fn accuracy(predictions: Vec<Option<String>>, golds: Vec<String>) -> PyResult<(f64, usize)> {
    metrics::accuracy(&predictions, &golds)
        .map(|r| (r.accuracy, r.parse_failures))
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pyfunction]
fn canonical_nli_label(raw: String) -> Option<&'static str> {
    epa::types::canonical_nli_label(&raw)
}

#[pyfunction]
fn tokenize(text: String) -> Vec<String> {
    metrics::tokenize(&text)
}

/// Returns (mean, sample_std).
#[pyfunction]
fn aggregate(values: Vec<f64>) -> PyResult<(f64, f64)> {
    epa::runner::aggregate(&values).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Render the in-context prompt for a query with the task's standard template.
#[pyfunction]
#[pyo3(signature = (task, demos, query, target_language=None))]
fn render_prompt(
    task: &str,
    demos: Vec<(String, String)>,
    query: String,
    target_language: Option<&str>,
) -> PyResult<String> {
    let task = parse_task(task, target_language)?;
    let set = demo_set(task.clone(), demos, 0)?;
    let expanded =
        augment::identity_expand(&set).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let instance = TestInstance::new("query", query, vec!["unused".to_string()])
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let template = default_template(task);
    prompt::build_prompt(&expanded, &instance, &template)
        .map(|p| p.rendered_text)
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// EPA expansion with dict-backed deterministic backends. The paraphrase
/// table maps full paraphrase prompts to outputs; the translate table maps
/// paraphrased sources to target-language text. Returns
/// (source, target, provenance) triples.
#[pyfunction]
#[pyo3(signature = (task, demos, n, paraphrase_table, translate_table=None, target_language=None))]
fn epa_expand(
    task: &str,
    demos: Vec<(String, String)>,
    n: usize,
    paraphrase_table: HashMap<String, String>,
    translate_table: Option<HashMap<String, String>>,
    target_language: Option<&str>,
) -> PyResult<Vec<(String, String, String)>> {
    let task = parse_task(task, target_language)?;
    let set = demo_set(task, demos, 0)?;

    let paraphrase_backend = MockFixture::new(paraphrase_table);
    let pgen = Generator::new(&paraphrase_backend).with_retry(RetryPolicy::immediate(1));
    let paraphraser =
        TextRewriter::paraphraser(&pgen, GenerationParams::default(), DEFAULT_PARAPHRASE_TEMPLATE)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;

    let translate_backend = translate_table.map(MockFixture::new);
    let tgen = translate_backend
        .as_ref()
        .map(|backend| Generator::new(backend).with_retry(RetryPolicy::immediate(1)));
    let translator =
        tgen.as_ref().map(|gen| TextRewriter::translator(gen, GenerationParams::default()));

    let expanded = augment::epa_expand(
        &set,
        n,
        Placement::GroupedAfterOriginal,
        &paraphraser,
        translator.as_ref(),
    )
    .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(expanded
        .entries
        .into_iter()
        .map(|d| (d.source, d.target, provenance_tag(&d.provenance)))
        .collect())
}

/// Copy-k baseline expansion. Returns (source, target, provenance) triples.
#[pyfunction]
#[pyo3(signature = (task, demos, repeat_factor, target_language=None))]
fn copy_expand(
    task: &str,
    demos: Vec<(String, String)>,
    repeat_factor: usize,
    target_language: Option<&str>,
) -> PyResult<Vec<(String, String, String)>> {
    let task = parse_task(task, target_language)?;
    let set = demo_set(task, demos, 0)?;
    let expanded =
        augment::copy_expand(&set, repeat_factor).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(expanded
        .entries
        .into_iter()
        .map(|d| (d.source, d.target, provenance_tag(&d.provenance)))
        .collect())
}

/// Seeded without-replacement sample of k pairs; same algorithm as the CLI.
#[pyfunction]
fn sample_demonstrations(
    pairs: Vec<(String, String)>,
    k: usize,
    seed: u64,
) -> PyResult<Vec<(String, String)>> {
    if k > pairs.len() {
        return Err(PyValueError::new_err(format!(
            "requested {k} demonstrations but the pool has {}",
            pairs.len()
        )));
    }
    Ok(data::sample_indices(pairs.len(), k, seed).into_iter().map(|i| pairs[i].clone()).collect())
}

#[pymodule]
fn epa_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(chrf_pp, m)?)?;
    m.add_function(wrap_pyfunction!(corpus_bleu, m)?)?;
    m.add_function(wrap_pyfunction!(rouge_l_f1, m)?)?;
    m.add_function(wrap_pyfunction!(accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_nli_label, m)?)?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate, m)?)?;
    m.add_function(wrap_pyfunction!(render_prompt, m)?)?;
    m.add_function(wrap_pyfunction!(epa_expand, m)?)?;
    m.add_function(wrap_pyfunction!(copy_expand, m)?)?;
    m.add_function(wrap_pyfunction!(sample_demonstrations, m)?)?;
    Ok(())
}
