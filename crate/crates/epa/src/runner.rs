//! Config-driven experiment orchestration: sample demonstrations, expand
//! them, assemble prompts, generate, score and aggregate across seeds.
//!
//! Seeds run sequentially; within a seed, test-instance generation goes
//! through the bounded dispatcher in `llm`. Per-seed expansion happens once,
//! before any test-instance dispatch, and is persisted so reruns reuse
//! identical demonstrations.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::augment::{copy_expand, epa_expand, identity_expand, AugmentError, ExpandedDemoSet, Placement, TextRewriter, DEFAULT_PARAPHRASE_TEMPLATE};
use crate::data::{self, Corpus, DataError, FieldMap};
use crate::llm::{Backend, GenerationParams, GenerationRecord, Generator, HttpChatBackend, LlmError, MockEcho, MockFixture, ResponseCache, RetryPolicy};
use crate::metrics::{self, ChrfConfig, MetricError};
use crate::prompt::{build_prompt, PromptError, PromptRequest, TemplateConfig};
use crate::types::{canonical_nli_label, TaskKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum RunMode {
    Baseline,
    Epa { n_paraphrases: usize },
    CopyK { repeat_factor: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    ChrfPp,
    Bleu,
    RougeL,
    Accuracy,
}

impl MetricKind {
    pub fn name(&self) -> &'static str {
        match self {
            MetricKind::ChrfPp => "chrf_pp",
            MetricKind::Bleu => "bleu",
            MetricKind::RougeL => "rouge_l",
            MetricKind::Accuracy => "accuracy",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "snake_case")]
pub enum CorpusSpec {
    /// FLORES-style parallel one-sentence-per-line files. Optional demo_*
    /// paths supply a separate demonstration pool.
    ParallelTsv {
        source_path: PathBuf,
        target_path: PathBuf,
        demo_source_path: Option<PathBuf>,
        demo_target_path: Option<PathBuf>,
    },
    Jsonl {
        path: PathBuf,
        #[serde(default)]
        field_map: FieldMap,
        demo_path: Option<PathBuf>,
    },
    Canonical {
        path: PathBuf,
        demo_path: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case")]
pub enum BackendSpec {
    MockEcho,
    /// JSON object file mapping request text to response text.
    MockFixture { path: PathBuf },
    Http { endpoint: String, api_key_env: String },
}

impl BackendSpec {
    pub fn is_mock(&self) -> bool {
        !matches!(self, BackendSpec::Http { .. })
    }

    pub fn build(&self) -> Result<Box<dyn Backend>, RunnerError> {
        match self {
            BackendSpec::MockEcho => Ok(Box::new(MockEcho::new())),
            BackendSpec::MockFixture { path } => {
                let text = fs::read_to_string(path)
                    .map_err(|e| RunnerError::Config(format!("cannot read fixture {}: {e}", path.display())))?;
                let table: std::collections::HashMap<String, String> = serde_json::from_str(&text)
                    .map_err(|e| RunnerError::Config(format!("fixture {} is not a JSON object of strings: {e}", path.display())))?;
                Ok(Box::new(MockFixture::new(table)))
            }
            BackendSpec::Http { endpoint, api_key_env } => Ok(Box::new(
                HttpChatBackend::from_env(endpoint.clone(), api_key_env)
                    .map_err(|e| RunnerError::Config(e.to_string()))?,
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    pub corpus: CorpusSpec,
    pub k_shots: usize,
    pub mode: RunMode,
    pub seeds: Vec<u64>,
    pub backend: BackendSpec,
    /// Backend for paraphrase creation; defaults to `backend`.
    pub paraphrase_backend: Option<BackendSpec>,
    /// Translator backend; required for EPA on machine translation.
    pub translator_backend: Option<BackendSpec>,
    #[serde(default)]
    pub params: GenerationParams,
    pub metrics: Vec<MetricKind>,
    #[serde(default)]
    pub placement: Placement,
    #[serde(default = "default_paraphrase_template")]
    pub paraphrase_template: String,
    #[serde(default)]
    pub templates: TemplateConfig,
    pub output_dir: Option<PathBuf>,
    pub cache_path: Option<PathBuf>,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    /// Cap on test instances, for smoke runs over corpus slices.
    pub max_instances: Option<usize>,
}

fn default_paraphrase_template() -> String {
    DEFAULT_PARAPHRASE_TEMPLATE.to_string()
}

fn default_concurrency() -> usize {
    4
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, RunnerError> {
        let text = fs::read_to_string(path.as_ref())
            .map_err(|e| RunnerError::Config(format!("cannot read config: {e}")))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| RunnerError::Config(format!("cannot parse config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), RunnerError> {
        if self.seeds.is_empty() {
            return Err(RunnerError::Config("at least one seed is required".into()));
        }
        if self.k_shots == 0 {
            return Err(RunnerError::Config("k_shots must be >= 1".into()));
        }
        if self.metrics.is_empty() {
            return Err(RunnerError::Config("at least one metric is required".into()));
        }
        let is_nli = self.task == TaskKind::NaturalLanguageInference;
        for metric in &self.metrics {
            let compatible = match metric {
                MetricKind::Accuracy => is_nli,
                MetricKind::ChrfPp | MetricKind::Bleu | MetricKind::RougeL => !is_nli,
            };
            if !compatible {
                return Err(RunnerError::Config(format!(
                    "metric {} is incompatible with task {:?}",
                    metric.name(),
                    self.task
                )));
            }
        }
        if let RunMode::Epa { .. } = self.mode {
            if self.task.is_machine_translation() && self.translator_backend.is_none() {
                return Err(RunnerError::Config(
                    "EPA on machine translation requires translator_backend".into(),
                ));
            }
        }
        Ok(())
    }

    /// Digest over the canonical JSON form of the config; names the output
    /// directory and ties a report to the exact configuration that made it.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(json.as_bytes());
        hex::encode(&hasher.finalize()[..16])
    }

    pub fn load_corpus(&self) -> Result<Corpus, RunnerError> {
        let corpus = match &self.corpus {
            CorpusSpec::ParallelTsv { source_path, target_path, demo_source_path, demo_target_path } => {
                let lang = match &self.task {
                    TaskKind::MachineTranslation(lang) => lang.clone(),
                    _ => {
                        return Err(RunnerError::Config(
                            "parallel_tsv corpora require a machine_translation task".into(),
                        ))
                    }
                };
                let corpus = data::load_parallel_tsv(source_path, target_path, &lang)?;
                match (demo_source_path, demo_target_path) {
                    (Some(ds), Some(dt)) => {
                        let pool = data::load_parallel_tsv(ds, dt, &lang)?;
                        corpus.with_train_from(&pool)
                    }
                    (None, None) => corpus,
                    _ => {
                        return Err(RunnerError::Config(
                            "demo_source_path and demo_target_path must be given together".into(),
                        ))
                    }
                }
            }
            CorpusSpec::Jsonl { path, field_map, demo_path } => {
                let corpus = data::load_jsonl(path, self.task.clone(), field_map)?;
                match demo_path {
                    Some(dp) => {
                        let pool = data::load_jsonl(dp, self.task.clone(), field_map)?;
                        corpus.with_train_from(&pool)
                    }
                    None => corpus,
                }
            }
            CorpusSpec::Canonical { path, demo_path } => {
                let corpus = data::load_canonical_jsonl(path)?;
                if corpus.task != self.task {
                    return Err(RunnerError::Config("corpus task does not match config task".into()));
                }
                match demo_path {
                    Some(dp) => {
                        let pool = data::load_canonical_jsonl(dp)?;
                        corpus.with_train_from(&pool)
                    }
                    None => corpus,
                }
            }
        };
        let mut corpus = corpus;
        if let Some(cap) = self.max_instances {
            corpus.test.truncate(cap);
            if corpus.test.is_empty() {
                return Err(RunnerError::Config("max_instances leaves no test instances".into()));
            }
        }
        Ok(corpus)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub per_seed: Vec<f64>,
    pub mean: f64,
    pub sample_std: f64,
    pub single_run: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub config_digest: String,
    pub task: TaskKind,
    pub mode: RunMode,
    pub k_shots: usize,
    pub seeds: Vec<u64>,
    pub metrics: BTreeMap<String, MetricSummary>,
    pub parse_failure_count: usize,
    pub cache_hit_rate: f64,
    pub generated_at_unix: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum RunnerError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("seed {seed}: expansion failed: {source}")]
    Augment {
        seed: u64,
        #[source]
        source: AugmentError,
    },
    #[error("seed {seed}: prompt assembly failed for instance {instance_id}: {source}")]
    Prompt {
        seed: u64,
        instance_id: String,
        #[source]
        source: PromptError,
    },
    #[error("seed {seed}: generation failed for instance {instance_id}: {source}")]
    Generation {
        seed: u64,
        instance_id: String,
        #[source]
        source: LlmError,
    },
    #[error("seed {seed}: scoring failed: {source}")]
    Metric {
        seed: u64,
        #[source]
        source: MetricError,
    },
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("aggregate called on an empty input")]
    EmptyInput,
}

/// Sample mean and sample standard deviation (n-1 denominator; 0 for n = 1).
pub fn aggregate(values: &[f64]) -> Result<(f64, f64), RunnerError> {
    if values.is_empty() {
        return Err(RunnerError::EmptyInput);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() >= 2 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok((mean, std))
}

/// Backends and environment hooks for one run. Separating these from the
/// config lets tests inject in-memory mocks and observe dispatch counters.
pub struct RunEnv<'a> {
    pub generation: &'a dyn Backend,
    pub paraphraser: Option<&'a dyn Backend>,
    pub translator: Option<&'a dyn Backend>,
    pub cache: Option<&'a ResponseCache>,
    pub retry: RetryPolicy,
    /// Fixed report timestamp; `None` reads the system clock.
    pub timestamp: Option<u64>,
}

impl<'a> RunEnv<'a> {
    pub fn mock(backend: &'a dyn Backend) -> Self {
        RunEnv {
            generation: backend,
            paraphraser: None,
            translator: None,
            cache: None,
            retry: RetryPolicy::immediate(1),
            timestamp: Some(0),
        }
    }

    fn now(&self) -> u64 {
        self.timestamp.unwrap_or_else(|| {
            SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
        })
    }
}

/// One persisted generation, annotated with its seed and instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub instance_id: String,
    #[serde(flatten)]
    pub record: GenerationRecord,
}

struct SeedOutcome {
    seed: u64,
    expanded: ExpandedDemoSet,
    records: Vec<RunRecord>,
    scores: BTreeMap<MetricKind, f64>,
    parse_failures: usize,
}

/// Expansion for one seed without any test-instance dispatch; the `expand`
/// CLI verb and the runner both go through here.
pub fn expand_only(
    cfg: &ExperimentConfig,
    env: &RunEnv<'_>,
    corpus: &Corpus,
    seed: u64,
) -> Result<ExpandedDemoSet, RunnerError> {
    expand_for_seed(cfg, env, corpus, seed)
}

fn expand_for_seed(
    cfg: &ExperimentConfig,
    env: &RunEnv<'_>,
    corpus: &Corpus,
    seed: u64,
) -> Result<ExpandedDemoSet, RunnerError> {
    let demos = data::sample_demonstrations(corpus, cfg.k_shots, seed)?;
    let wrap = |source| RunnerError::Augment { seed, source };
    match cfg.mode {
        RunMode::Baseline => identity_expand(&demos).map_err(wrap),
        RunMode::CopyK { repeat_factor } => copy_expand(&demos, repeat_factor).map_err(wrap),
        RunMode::Epa { n_paraphrases } => {
            let paraphrase_backend = env.paraphraser.unwrap_or(env.generation);
            let pgen = Generator::new(paraphrase_backend)
                .with_retry(env.retry.clone())
                .with_concurrency(cfg.concurrency);
            let pgen = match env.cache {
                Some(cache) => pgen.with_cache(cache),
                None => pgen,
            };
            let paraphraser =
                TextRewriter::paraphraser(&pgen, cfg.params.clone(), cfg.paraphrase_template.clone())
                    .map_err(wrap)?;

            let tgen;
            let translator = match env.translator {
                Some(backend) => {
                    let gen = Generator::new(backend)
                        .with_retry(env.retry.clone())
                        .with_concurrency(cfg.concurrency);
                    tgen = match env.cache {
                        Some(cache) => gen.with_cache(cache),
                        None => gen,
                    };
                    Some(TextRewriter::translator(&tgen, cfg.params.clone()))
                }
                None => None,
            };
            epa_expand(&demos, n_paraphrases, cfg.placement, &paraphraser, translator.as_ref())
                .map_err(wrap)
        }
    }
}

fn run_seed(
    cfg: &ExperimentConfig,
    env: &RunEnv<'_>,
    corpus: &Corpus,
    seed: u64,
) -> Result<SeedOutcome, RunnerError> {
    let expanded = expand_for_seed(cfg, env, corpus, seed)?;
    let template = cfg
        .templates
        .template_for(cfg.task.clone())
        .map_err(|source| RunnerError::Prompt { seed, instance_id: String::new(), source })?;

    let mut prompts = Vec::with_capacity(corpus.test.len());
    for instance in &corpus.test {
        let prompt = build_prompt(&expanded, instance, &template)
            .map_err(|source| RunnerError::Prompt { seed, instance_id: instance.id.clone(), source })?;
        prompts.push(prompt);
    }

    let generator = Generator::new(env.generation)
        .with_retry(env.retry.clone())
        .with_concurrency(cfg.concurrency);
    let generator = match env.cache {
        Some(cache) => generator.with_cache(cache),
        None => generator,
    };
    let request_texts: Vec<String> = prompts.iter().map(|p| p.rendered_text.clone()).collect();
    let results = generator.generate_many(&request_texts, &cfg.params);

    let mut records = Vec::with_capacity(results.len());
    for (result, instance) in results.into_iter().zip(&corpus.test) {
        let record = result.map_err(|source| RunnerError::Generation {
            seed,
            instance_id: instance.id.clone(),
            source,
        })?;
        records.push(RunRecord { seed, instance_id: instance.id.clone(), record });
    }

    let hypotheses: Vec<String> = records.iter().map(|r| r.record.output_text.clone()).collect();
    let references: Vec<Vec<String>> = corpus.test.iter().map(|t| t.references.clone()).collect();

    let mut scores = BTreeMap::new();
    let mut parse_failures = 0usize;
    for metric in &cfg.metrics {
        let wrap = |source| RunnerError::Metric { seed, source };
        let value = match metric {
            MetricKind::ChrfPp => {
                metrics::chrf_pp(&hypotheses, &references, &ChrfConfig::default()).map_err(wrap)?
            }
            MetricKind::Bleu => metrics::corpus_bleu(&hypotheses, &references).map_err(wrap)?,
            MetricKind::RougeL => metrics::corpus_rouge_l_f1(&hypotheses, &references).map_err(wrap)?,
            MetricKind::Accuracy => {
                let predictions: Vec<Option<String>> = hypotheses
                    .iter()
                    .map(|h| canonical_nli_label(h).map(str::to_string))
                    .collect();
                let golds: Vec<String> =
                    corpus.test.iter().map(|t| t.references[0].clone()).collect();
                let report = metrics::accuracy(&predictions, &golds).map_err(wrap)?;
                parse_failures += report.parse_failures;
                report.accuracy
            }
        };
        scores.insert(*metric, value);
    }

    Ok(SeedOutcome { seed, expanded, records, scores, parse_failures })
}

/// Run the full pipeline across all configured seeds and aggregate.
pub fn run_experiment(cfg: &ExperimentConfig, env: &RunEnv<'_>) -> Result<ScoreReport, RunnerError> {
    cfg.validate()?;
    let corpus = cfg.load_corpus()?;

    let mut outcomes = Vec::with_capacity(cfg.seeds.len());
    for &seed in &cfg.seeds {
        outcomes.push(run_seed(cfg, env, &corpus, seed)?);
    }

    let mut metric_summaries = BTreeMap::new();
    for metric in &cfg.metrics {
        let per_seed: Vec<f64> = outcomes.iter().map(|o| o.scores[metric]).collect();
        let (mean, sample_std) = aggregate(&per_seed)?;
        metric_summaries.insert(
            metric.name().to_string(),
            MetricSummary { per_seed, mean, sample_std, single_run: cfg.seeds.len() == 1 },
        );
    }

    let all_records: Vec<&RunRecord> = outcomes.iter().flat_map(|o| o.records.iter()).collect();
    let hits = all_records.iter().filter(|r| r.record.cache_hit).count();
    let cache_hit_rate =
        if all_records.is_empty() { 0.0 } else { hits as f64 / all_records.len() as f64 };

    let report = ScoreReport {
        config_digest: cfg.digest(),
        task: cfg.task.clone(),
        mode: cfg.mode,
        k_shots: cfg.k_shots,
        seeds: cfg.seeds.clone(),
        metrics: metric_summaries,
        parse_failure_count: outcomes.iter().map(|o| o.parse_failures).sum(),
        cache_hit_rate,
        generated_at_unix: env.now(),
    };

    if let Some(output_dir) = &cfg.output_dir {
        persist_run(cfg, output_dir, &outcomes, &report)?;
    }
    Ok(report)
}

fn persist_run(
    cfg: &ExperimentConfig,
    output_dir: &Path,
    outcomes: &[SeedOutcome],
    report: &ScoreReport,
) -> Result<(), RunnerError> {
    let run_dir = output_dir.join(cfg.digest());
    fs::create_dir_all(&run_dir)?;

    let mut records = BufWriter::new(File::create(run_dir.join("records.jsonl"))?);
    for outcome in outcomes {
        for record in &outcome.records {
            writeln!(records, "{}", serde_json::to_string(record).expect("record serializes"))?;
        }
    }
    records.flush()?;

    let expanded: BTreeMap<u64, &ExpandedDemoSet> =
        outcomes.iter().map(|o| (o.seed, &o.expanded)).collect();
    fs::write(
        run_dir.join("expanded_demos.json"),
        serde_json::to_string_pretty(&expanded).expect("expanded sets serialize"),
    )?;
    fs::write(run_dir.join("report.json"), emit_report(report, ReportFormat::Json))?;
    Ok(())
}

/// Expansion and prompt assembly only, no generation dispatch. Returns the
/// prompts for every (seed, instance) pair.
pub fn dry_run(
    cfg: &ExperimentConfig,
    env: &RunEnv<'_>,
) -> Result<Vec<(u64, PromptRequest)>, RunnerError> {
    cfg.validate()?;
    let corpus = cfg.load_corpus()?;
    let template = cfg
        .templates
        .template_for(cfg.task.clone())
        .map_err(|source| RunnerError::Prompt { seed: 0, instance_id: String::new(), source })?;

    let mut prompts = Vec::new();
    for &seed in &cfg.seeds {
        let expanded = expand_for_seed(cfg, env, &corpus, seed)?;
        for instance in &corpus.test {
            let prompt = build_prompt(&expanded, instance, &template)
                .map_err(|source| RunnerError::Prompt { seed, instance_id: instance.id.clone(), source })?;
            prompts.push((seed, prompt));
        }
    }
    Ok(prompts)
}

/// Re-score previously persisted generations without re-dispatching.
pub fn score_records(
    cfg: &ExperimentConfig,
    records_path: impl AsRef<Path>,
    env: &RunEnv<'_>,
) -> Result<ScoreReport, RunnerError> {
    cfg.validate()?;
    let corpus = cfg.load_corpus()?;

    let reader = BufReader::new(File::open(records_path.as_ref())?);
    let mut by_seed: BTreeMap<u64, BTreeMap<String, String>> = BTreeMap::new();
    let mut hits = 0usize;
    let mut total = 0usize;
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: RunRecord = serde_json::from_str(&line)
            .map_err(|e| RunnerError::Config(format!("malformed records line: {e}")))?;
        total += 1;
        if record.record.cache_hit {
            hits += 1;
        }
        by_seed.entry(record.seed).or_default().insert(record.instance_id, record.record.output_text);
    }

    let mut metric_values: BTreeMap<MetricKind, Vec<f64>> = BTreeMap::new();
    let mut parse_failure_count = 0usize;
    let mut seeds = Vec::new();
    for (&seed, outputs) in &by_seed {
        seeds.push(seed);
        let mut hypotheses = Vec::with_capacity(corpus.test.len());
        for instance in &corpus.test {
            let output = outputs.get(&instance.id).ok_or_else(|| {
                RunnerError::Config(format!("records are missing instance {} for seed {seed}", instance.id))
            })?;
            hypotheses.push(output.clone());
        }
        let references: Vec<Vec<String>> = corpus.test.iter().map(|t| t.references.clone()).collect();
        for metric in &cfg.metrics {
            let wrap = |source| RunnerError::Metric { seed, source };
            let value = match metric {
                MetricKind::ChrfPp => {
                    metrics::chrf_pp(&hypotheses, &references, &ChrfConfig::default()).map_err(wrap)?
                }
                MetricKind::Bleu => metrics::corpus_bleu(&hypotheses, &references).map_err(wrap)?,
                MetricKind::RougeL => {
                    metrics::corpus_rouge_l_f1(&hypotheses, &references).map_err(wrap)?
                }
                MetricKind::Accuracy => {
                    let predictions: Vec<Option<String>> = hypotheses
                        .iter()
                        .map(|h| canonical_nli_label(h).map(str::to_string))
                        .collect();
                    let golds: Vec<String> =
                        corpus.test.iter().map(|t| t.references[0].clone()).collect();
                    let report = metrics::accuracy(&predictions, &golds).map_err(wrap)?;
                    parse_failure_count += report.parse_failures;
                    report.accuracy
                }
            };
            metric_values.entry(*metric).or_default().push(value);
        }
    }

    let mut metric_summaries = BTreeMap::new();
    for (metric, per_seed) in metric_values {
        let (mean, sample_std) = aggregate(&per_seed)?;
        let single_run = per_seed.len() == 1;
        metric_summaries
            .insert(metric.name().to_string(), MetricSummary { per_seed, mean, sample_std, single_run });
    }

    Ok(ScoreReport {
        config_digest: cfg.digest(),
        task: cfg.task.clone(),
        mode: cfg.mode,
        k_shots: cfg.k_shots,
        seeds,
        metrics: metric_summaries,
        parse_failure_count,
        cache_hit_rate: if total == 0 { 0.0 } else { hits as f64 / total as f64 },
        generated_at_unix: env.now(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Tsv,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "tsv" => Ok(ReportFormat::Tsv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(format!("unknown report format {other:?}")),
        }
    }
}

fn format_mean_std(mean: f64, std: f64) -> String {
    format!("{mean:.2} \u{b1} {std:.2}")
}

/// Render a report. JSON is lossless; TSV and markdown print one row per
/// metric as "mean ± std" with two decimal places.
pub fn emit_report(report: &ScoreReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(report).expect("report serializes");
            text.push('\n');
            text
        }
        ReportFormat::Tsv => {
            let mut out = String::from("metric\tscore\n");
            for (name, summary) in &report.metrics {
                out.push_str(&format!(
                    "{name}\t{}\n",
                    format_mean_std(summary.mean, summary.sample_std)
                ));
            }
            out
        }
        ReportFormat::Markdown => {
            let mut out = String::from("| metric | score |\n| --- | --- |\n");
            for (name, summary) in &report.metrics {
                out.push_str(&format!(
                    "| {name} | {} |\n",
                    format_mean_std(summary.mean, summary.sample_std)
                ));
            }
            out
        }
    }
}

pub fn write_report(
    report: &ScoreReport,
    format: ReportFormat,
    path: impl AsRef<Path>,
) -> Result<(), RunnerError> {
    fs::write(path.as_ref(), emit_report(report, format))?;
    Ok(())
}
