//! Dataset ingestion, demonstration sampling and on-disk corpus formats.
//!
//! Supported inputs: FLORES-style parallel text files (one sentence per
//! line), JSONL with a configurable field mapping, and this tool's own
//! canonical JSONL dump. Every loaded pair is available both as a test
//! instance and as a demonstration-pool entry; which role a file plays is
//! decided by the experiment configuration.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::prompt::nli_source;
use crate::types::{canonical_nli_label, Demonstration, DemonstrationSet, TaskKind, TestInstance};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainPair {
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub task: TaskKind,
    pub name: String,
    pub train: Vec<TrainPair>,
    pub test: Vec<TestInstance>,
}

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("parallel files differ in length: {src_lines} source vs {tgt_lines} target lines")]
    LineCountMismatch { src_lines: usize, tgt_lines: usize },
    #[error("file {0} is empty")]
    EmptyFile(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed JSON: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("line {line}: missing field {name:?}")]
    MissingField { line: usize, name: String },
    #[error("line {line}: label {label:?} does not map to an NLI label")]
    UnknownLabel { line: usize, label: String },
    #[error("duplicate test instance id {0:?}")]
    DuplicateId(String),
    #[error("line {line}: {message}")]
    InvalidInstance { line: usize, message: String },
    #[error("requested {k} demonstrations but the train pool has {available}")]
    InsufficientTrainData { k: usize, available: usize },
    #[error("corpus has no test instances")]
    EmptyTestSet,
    #[error("line {line}: task does not match line 1")]
    InconsistentTask { line: usize },
}

impl Corpus {
    fn validate(self) -> Result<Self, DataError> {
        if self.test.is_empty() {
            return Err(DataError::EmptyTestSet);
        }
        let mut seen = HashSet::new();
        for instance in &self.test {
            if !seen.insert(instance.id.as_str()) {
                return Err(DataError::DuplicateId(instance.id.clone()));
            }
        }
        Ok(self)
    }

    /// Replace the demonstration pool with another corpus's pairs, so a
    /// separate file can supply demonstrations.
    pub fn with_train_from(mut self, pool: &Corpus) -> Self {
        self.train = pool.train.clone();
        self
    }
}

fn read_lines(path: &Path) -> Result<Vec<String>, DataError> {
    let reader = BufReader::new(File::open(path)?);
    let lines: Vec<String> = reader.lines().collect::<Result<_, _>>()?;
    if lines.is_empty() {
        return Err(DataError::EmptyFile(path.display().to_string()));
    }
    Ok(lines)
}

fn padded_id(index: usize) -> String {
    format!("{index:04}")
}

/// Load a FLORES-style parallel pair of one-sentence-per-line files.
pub fn load_parallel_tsv(
    path_src: impl AsRef<Path>,
    path_tgt: impl AsRef<Path>,
    target_language: &str,
) -> Result<Corpus, DataError> {
    let path_src = path_src.as_ref();
    let src_lines = read_lines(path_src)?;
    let tgt_lines = read_lines(path_tgt.as_ref())?;
    if src_lines.len() != tgt_lines.len() {
        return Err(DataError::LineCountMismatch {
            src_lines: src_lines.len(),
            tgt_lines: tgt_lines.len(),
        });
    }
    let task = TaskKind::machine_translation(target_language)
        .map_err(|e| DataError::InvalidInstance { line: 0, message: e.to_string() })?;

    let mut train = Vec::with_capacity(src_lines.len());
    let mut test = Vec::with_capacity(src_lines.len());
    for (i, (source, target)) in src_lines.into_iter().zip(tgt_lines).enumerate() {
        test.push(
            TestInstance::new(padded_id(i), source.clone(), vec![target.clone()])
                .map_err(|e| DataError::InvalidInstance { line: i + 1, message: e.to_string() })?,
        );
        train.push(TrainPair { source, target });
    }
    let name = path_src.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Corpus { task, name, train, test }.validate()
}

/// Which JSON fields supply each instance component.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FieldMap {
    pub id: Option<String>,
    pub source: Option<String>,
    pub target: Option<String>,
    pub premise: Option<String>,
    pub hypothesis: Option<String>,
    pub label: Option<String>,
}

fn string_field(
    value: &serde_json::Value,
    name: &str,
    line: usize,
) -> Result<String, DataError> {
    match value.get(name) {
        Some(serde_json::Value::String(s)) => Ok(s.clone()),
        Some(other) => Ok(other.to_string()),
        None => Err(DataError::MissingField { line, name: name.to_string() }),
    }
}

/// Load a JSONL dataset, one JSON object per line.
///
/// NLI lines need premise/hypothesis/label mappings; the premise and
/// hypothesis are joined into a single source string and the label is
/// canonicalized, rejecting lines whose label maps to none of the three
/// NLI classes. All other tasks need source/target mappings.
pub fn load_jsonl(
    path: impl AsRef<Path>,
    task: TaskKind,
    field_map: &FieldMap,
) -> Result<Corpus, DataError> {
    let path = path.as_ref();
    let lines = read_lines(path)?;
    let is_nli = task == TaskKind::NaturalLanguageInference;

    let mut train = Vec::with_capacity(lines.len());
    let mut test = Vec::with_capacity(lines.len());
    for (i, raw) in lines.iter().enumerate() {
        let line_no = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(raw)
            .map_err(|e| DataError::MalformedLine { line: line_no, message: e.to_string() })?;

        let (source, target) = if is_nli {
            let premise_field = field_map.premise.as_deref().unwrap_or("premise");
            let hypothesis_field = field_map.hypothesis.as_deref().unwrap_or("hypothesis");
            let label_field = field_map.label.as_deref().unwrap_or("label");
            let premise = string_field(&value, premise_field, line_no)?;
            let hypothesis = string_field(&value, hypothesis_field, line_no)?;
            let raw_label = string_field(&value, label_field, line_no)?;
            let label = canonical_nli_label(&raw_label)
                .ok_or(DataError::UnknownLabel { line: line_no, label: raw_label })?;
            (nli_source(&premise, &hypothesis), label.to_string())
        } else {
            let source_field = field_map.source.as_deref().unwrap_or("source");
            let target_field = field_map.target.as_deref().unwrap_or("target");
            (
                string_field(&value, source_field, line_no)?,
                string_field(&value, target_field, line_no)?,
            )
        };

        let id = match &field_map.id {
            Some(id_field) => string_field(&value, id_field, line_no)?,
            None => padded_id(i),
        };
        test.push(
            TestInstance::new(id, source.clone(), vec![target.clone()])
                .map_err(|e| DataError::InvalidInstance { line: line_no, message: e.to_string() })?,
        );
        train.push(TrainPair { source, target });
    }
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Corpus { task, name, train, test }.validate()
}

#[derive(Debug, Serialize, Deserialize)]
struct CanonicalLine {
    id: String,
    source: String,
    references: Vec<String>,
    task: TaskKind,
}

/// Write a corpus to the canonical JSONL dump: {id, source, references, task}.
pub fn dump_canonical_jsonl(corpus: &Corpus, path: impl AsRef<Path>) -> Result<(), DataError> {
    let mut writer = BufWriter::new(File::create(path)?);
    for instance in &corpus.test {
        let line = CanonicalLine {
            id: instance.id.clone(),
            source: instance.source.clone(),
            references: instance.references.clone(),
            task: corpus.task.clone(),
        };
        writeln!(writer, "{}", serde_json::to_string(&line).expect("canonical line serializes"))?;
    }
    writer.flush()?;
    Ok(())
}

/// Load a canonical JSONL dump back into a corpus.
pub fn load_canonical_jsonl(path: impl AsRef<Path>) -> Result<Corpus, DataError> {
    let path = path.as_ref();
    let lines = read_lines(path)?;
    let mut task: Option<TaskKind> = None;
    let mut train = Vec::with_capacity(lines.len());
    let mut test = Vec::with_capacity(lines.len());
    for (i, raw) in lines.iter().enumerate() {
        let line_no = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let line: CanonicalLine = serde_json::from_str(raw)
            .map_err(|e| DataError::MalformedLine { line: line_no, message: e.to_string() })?;
        match &task {
            None => task = Some(line.task.clone()),
            Some(t) if *t != line.task => return Err(DataError::InconsistentTask { line: line_no }),
            Some(_) => {}
        }
        if let Some(first_ref) = line.references.first() {
            train.push(TrainPair { source: line.source.clone(), target: first_ref.clone() });
        }
        test.push(
            TestInstance::new(line.id, line.source, line.references)
                .map_err(|e| DataError::InvalidInstance { line: line_no, message: e.to_string() })?,
        );
    }
    let task = task.ok_or_else(|| DataError::EmptyFile(path.display().to_string()))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Corpus { task, name, train, test }.validate()
}

/// SplitMix64: the fixed 64-bit generator behind demonstration sampling, so
/// the same (corpus, k, seed) picks the same demonstrations on any platform
/// or implementation of this tool.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

/// Pick k distinct indices from 0..len via a partial Fisher-Yates shuffle
/// driven by SplitMix64. Deterministic in (len, k, seed).
pub fn sample_indices(len: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = SplitMix64::new(seed);
    let mut indices: Vec<usize> = (0..len).collect();
    for i in 0..k.min(len) {
        let j = i + (rng.next_u64() % (len - i) as u64) as usize;
        indices.swap(i, j);
    }
    indices.truncate(k);
    indices
}

/// Draw k distinct demonstration pairs without replacement.
pub fn sample_demonstrations(
    corpus: &Corpus,
    k: usize,
    seed: u64,
) -> Result<DemonstrationSet, DataError> {
    if k > corpus.train.len() {
        return Err(DataError::InsufficientTrainData { k, available: corpus.train.len() });
    }
    let demos = sample_indices(corpus.train.len(), k, seed)
        .iter()
        .map(|&i| {
            let pair = &corpus.train[i];
            Demonstration::original(pair.source.clone(), pair.target.clone())
                .map_err(|e| DataError::InvalidInstance { line: i + 1, message: e.to_string() })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DemonstrationSet::new(corpus.task.clone(), demos, seed))
}
