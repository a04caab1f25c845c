use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use epa::llm::{Backend, ResponseCache, RetryPolicy};
use epa::runner::{
    dry_run, emit_report, run_experiment, score_records, BackendSpec, ExperimentConfig, ReportFormat,
    RunEnv, RunMode, ScoreReport,
};

#[derive(Parser)]
#[command(name = "epa", about = "Paraphrase-augmented in-context learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a full experiment: expand, prompt, generate, score, report.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's mode: baseline, epa:<n>, copy:<r>.
        #[arg(long)]
        mode: Option<String>,
        /// Override the config's k_shots.
        #[arg(long)]
        shots: Option<usize>,
        /// Override the config's seeds (comma separated).
        #[arg(long)]
        seeds: Option<String>,
        /// Override the config's backend: mock-echo, or http:<endpoint>,<env-var>.
        #[arg(long)]
        backend: Option<String>,
        /// Assemble prompts only; dispatch nothing.
        #[arg(long)]
        dry_run: bool,
    },
    /// Expand demonstrations only and print the expanded set as JSON.
    Expand {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long)]
        seeds: Option<String>,
    },
    /// Score previously persisted generation records.
    Score {
        #[arg(long)]
        config: PathBuf,
        /// Path to records.jsonl from an earlier run.
        #[arg(long)]
        records: PathBuf,
        #[arg(long, default_value = "json")]
        format: ReportFormat,
    },
    /// Re-render an existing report.json in another format.
    Report {
        /// Path to report.json.
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value = "markdown")]
        format: ReportFormat,
    },
}

fn parse_mode(text: &str) -> Result<RunMode> {
    if text == "baseline" {
        return Ok(RunMode::Baseline);
    }
    if let Some(n) = text.strip_prefix("epa:") {
        return Ok(RunMode::Epa { n_paraphrases: n.parse().context("bad epa:<n>")? });
    }
    if let Some(r) = text.strip_prefix("copy:") {
        return Ok(RunMode::CopyK { repeat_factor: r.parse().context("bad copy:<r>")? });
    }
    bail!("unknown mode {text:?}; expected baseline, epa:<n> or copy:<r>")
}

fn parse_backend(text: &str) -> Result<BackendSpec> {
    if text == "mock-echo" {
        return Ok(BackendSpec::MockEcho);
    }
    if let Some(rest) = text.strip_prefix("fixture:") {
        return Ok(BackendSpec::MockFixture { path: rest.into() });
    }
    if let Some(rest) = text.strip_prefix("http:") {
        let (endpoint, env_var) = rest
            .rsplit_once(',')
            .context("http backend needs http:<endpoint>,<env-var>")?;
        return Ok(BackendSpec::Http { endpoint: endpoint.into(), api_key_env: env_var.into() });
    }
    bail!("unknown backend {text:?}; expected mock-echo, fixture:<path> or http:<endpoint>,<env-var>")
}

fn apply_overrides(
    cfg: &mut ExperimentConfig,
    mode: Option<&str>,
    shots: Option<usize>,
    seeds: Option<&str>,
    backend: Option<&str>,
) -> Result<()> {
    if let Some(mode) = mode {
        cfg.mode = parse_mode(mode)?;
    }
    if let Some(shots) = shots {
        cfg.k_shots = shots;
    }
    if let Some(seeds) = seeds {
        cfg.seeds = seeds
            .split(',')
            .map(|s| s.trim().parse().context("seeds must be integers"))
            .collect::<Result<_>>()?;
    }
    if let Some(backend) = backend {
        cfg.backend = parse_backend(backend)?;
    }
    Ok(())
}

struct Backends {
    generation: Box<dyn Backend>,
    paraphraser: Option<Box<dyn Backend>>,
    translator: Option<Box<dyn Backend>>,
    cache: Option<ResponseCache>,
    deterministic: bool,
}

fn build_backends(cfg: &ExperimentConfig) -> Result<Backends> {
    let generation = cfg.backend.build()?;
    let paraphraser = match &cfg.paraphrase_backend {
        Some(spec) => Some(spec.build()?),
        None => None,
    };
    let translator = match &cfg.translator_backend {
        Some(spec) => Some(spec.build()?),
        None => None,
    };
    let cache = match &cfg.cache_path {
        Some(path) => Some(ResponseCache::open(path)?),
        None => None,
    };
    let deterministic = cfg.backend.is_mock()
        && cfg.paraphrase_backend.as_ref().map_or(true, BackendSpec::is_mock)
        && cfg.translator_backend.as_ref().map_or(true, BackendSpec::is_mock);
    Ok(Backends { generation, paraphraser, translator, cache, deterministic })
}

fn env_for<'a>(backends: &'a Backends) -> RunEnv<'a> {
    RunEnv {
        generation: backends.generation.as_ref(),
        paraphraser: backends.paraphraser.as_deref(),
        translator: backends.translator.as_deref(),
        cache: backends.cache.as_ref(),
        retry: if backends.deterministic { RetryPolicy::immediate(1) } else { RetryPolicy::default() },
        // Mock-only runs pin the report timestamp so reruns are byte-identical.
        timestamp: if backends.deterministic { Some(0) } else { None },
    }
}

fn print_report(report: &ScoreReport) {
    print!("{}", emit_report(report, ReportFormat::Markdown));
    eprintln!(
        "config {} | seeds {:?} | cache hit rate {:.1}% | parse failures {}",
        report.config_digest,
        report.seeds,
        report.cache_hit_rate * 100.0,
        report.parse_failure_count
    );
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, mode, shots, seeds, backend, dry_run: dry } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            apply_overrides(&mut cfg, mode.as_deref(), shots, seeds.as_deref(), backend.as_deref())?;
            let backends = build_backends(&cfg)?;
            let env = env_for(&backends);
            if dry {
                for (seed, prompt) in dry_run(&cfg, &env)? {
                    println!("--- seed {seed} instance {} ({} demos)", prompt.instance_id, prompt.demo_count);
                    println!("{}", prompt.rendered_text);
                }
            } else {
                let report = run_experiment(&cfg, &env)?;
                print_report(&report);
            }
        }
        Command::Expand { config, mode, shots, seeds } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            apply_overrides(&mut cfg, mode.as_deref(), shots, seeds.as_deref(), None)?;
            let backends = build_backends(&cfg)?;
            let env = env_for(&backends);
            let corpus = cfg.load_corpus()?;
            let mut expanded = std::collections::BTreeMap::new();
            for &seed in &cfg.seeds {
                expanded.insert(seed, epa::runner::expand_only(&cfg, &env, &corpus, seed)?);
            }
            println!("{}", serde_json::to_string_pretty(&expanded)?);
        }
        Command::Score { config, records, format } => {
            let cfg = ExperimentConfig::load(&config)?;
            let backends = build_backends(&cfg)?;
            let env = env_for(&backends);
            let report = score_records(&cfg, &records, &env)?;
            print!("{}", emit_report(&report, format));
        }
        Command::Report { report, format } => {
            let text = std::fs::read_to_string(&report)?;
            let parsed: ScoreReport = serde_json::from_str(&text)?;
            print!("{}", emit_report(&parsed, format));
        }
    }
    Ok(())
}
