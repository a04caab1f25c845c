//! From-scratch evaluation metrics: chrF++, corpus BLEU, ROUGE-L F1 and
//! classification accuracy, plus a pluggable external-scorer interface for
//! learned metrics.
//!
//! Tokenization for BLEU/ROUGE is Unicode-aware: runs of alphanumeric
//! characters are tokens, every other non-whitespace character is its own
//! token. chrF++ removes whitespace before extracting character n-grams and
//! reuses the same tokenizer for its word n-grams. All functions are pure.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MetricError {
    #[error("hypothesis and reference lists have different lengths ({hyps} vs {refs})")]
    LengthMismatch { hyps: usize, refs: usize },
    #[error("metric called on an empty corpus")]
    EmptyCorpus,
    #[error("segment {index} has no references")]
    MissingReferences { index: usize },
}

/// Split text into tokens: maximal alphanumeric runs, with each remaining
/// non-whitespace character emitted as a single-character token.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.push(ch);
        } else {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            if !ch.is_whitespace() {
                tokens.push(ch.to_string());
            }
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Clipped-match statistics for one n-gram order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NgramStats {
    pub matched: u64,
    pub hyp_total: u64,
    pub ref_total: u64,
}

impl NgramStats {
    pub fn merge(&mut self, other: &NgramStats) {
        self.matched += other.matched;
        self.hyp_total += other.hyp_total;
        self.ref_total += other.ref_total;
    }

    /// Degenerate orders (nothing on either side) are excluded from means.
    pub fn is_degenerate(&self) -> bool {
        self.hyp_total == 0 && self.ref_total == 0
    }

    pub fn f_beta(&self, beta: f64) -> f64 {
        let precision = if self.hyp_total > 0 { self.matched as f64 / self.hyp_total as f64 } else { 0.0 };
        let recall = if self.ref_total > 0 { self.matched as f64 / self.ref_total as f64 } else { 0.0 };
        let beta_sq = beta * beta;
        let denom = beta_sq * precision + recall;
        if denom > 0.0 {
            (1.0 + beta_sq) * precision * recall / denom
        } else {
            0.0
        }
    }
}

fn char_ngram_counts(chars: &[char], n: usize) -> HashMap<&[char], u64> {
    let mut counts = HashMap::new();
    if n > 0 && chars.len() >= n {
        for window in chars.windows(n) {
            *counts.entry(window).or_insert(0) += 1;
        }
    }
    counts
}

fn word_ngram_counts<'a>(tokens: &'a [String], n: usize) -> HashMap<&'a [String], u64> {
    let mut counts = HashMap::new();
    if n > 0 && tokens.len() >= n {
        for window in tokens.windows(n) {
            *counts.entry(window).or_insert(0) += 1;
        }
    }
    counts
}

fn clipped_stats<K: std::hash::Hash + Eq>(
    hyp: &HashMap<K, u64>,
    reference: &HashMap<K, u64>,
) -> NgramStats {
    let hyp_total: u64 = hyp.values().sum();
    let ref_total: u64 = reference.values().sum();
    let matched: u64 = hyp
        .iter()
        .map(|(gram, count)| (*count).min(reference.get(gram).copied().unwrap_or(0)))
        .sum();
    NgramStats { matched, hyp_total, ref_total }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChrfConfig {
    pub char_order: usize,
    pub word_order: usize,
    pub beta: f64,
    pub strip_whitespace_for_char_ngrams: bool,
}

impl Default for ChrfConfig {
    fn default() -> Self {
        ChrfConfig { char_order: 6, word_order: 2, beta: 2.0, strip_whitespace_for_char_ngrams: true }
    }
}

impl ChrfConfig {
    fn orders(&self) -> usize {
        self.char_order + self.word_order
    }

    fn char_sequence(&self, text: &str) -> Vec<char> {
        if self.strip_whitespace_for_char_ngrams {
            text.chars().filter(|c| !c.is_whitespace()).collect()
        } else {
            text.chars().collect()
        }
    }
}

/// Per-order stats for one hypothesis against one reference: character
/// orders 1..=char_order, then word orders 1..=word_order.
fn chrf_segment_stats(hypothesis: &str, reference: &str, cfg: &ChrfConfig) -> Vec<NgramStats> {
    let hyp_chars = cfg.char_sequence(hypothesis);
    let ref_chars = cfg.char_sequence(reference);
    let hyp_tokens = tokenize(hypothesis);
    let ref_tokens = tokenize(reference);

    let mut stats = Vec::with_capacity(cfg.orders());
    for n in 1..=cfg.char_order {
        stats.push(clipped_stats(&char_ngram_counts(&hyp_chars, n), &char_ngram_counts(&ref_chars, n)));
    }
    for n in 1..=cfg.word_order {
        stats.push(clipped_stats(&word_ngram_counts(&hyp_tokens, n), &word_ngram_counts(&ref_tokens, n)));
    }
    stats
}

fn mean_f_beta(stats: &[NgramStats], beta: f64) -> f64 {
    let live: Vec<f64> =
        stats.iter().filter(|s| !s.is_degenerate()).map(|s| s.f_beta(beta)).collect();
    if live.is_empty() {
        0.0
    } else {
        live.iter().sum::<f64>() / live.len() as f64
    }
}

fn check_corpus(hypotheses: &[String], references: &[Vec<String>]) -> Result<(), MetricError> {
    if hypotheses.len() != references.len() {
        return Err(MetricError::LengthMismatch { hyps: hypotheses.len(), refs: references.len() });
    }
    if hypotheses.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    if let Some(index) = references.iter().position(|r| r.is_empty()) {
        return Err(MetricError::MissingReferences { index });
    }
    Ok(())
}

/// Corpus-level chrF++ on the 0-100 scale.
///
/// Per segment the best-matching reference is the one maximizing the mean
/// per-order F-beta (ties break to the first); its per-order statistics are
/// summed into corpus totals, and the score is the mean corpus-level F-beta
/// over all non-degenerate orders, times 100.
pub fn chrf_pp(
    hypotheses: &[String],
    references: &[Vec<String>],
    cfg: &ChrfConfig,
) -> Result<f64, MetricError> {
    check_corpus(hypotheses, references)?;

    let mut corpus: Vec<NgramStats> = vec![NgramStats::default(); cfg.orders()];
    for (hyp, refs) in hypotheses.iter().zip(references) {
        // Best-matching reference; ties keep the earliest.
        let mut best: Option<(f64, Vec<NgramStats>)> = None;
        for r in refs {
            let stats = chrf_segment_stats(hyp, r, cfg);
            let score = mean_f_beta(&stats, cfg.beta);
            if best.as_ref().map_or(true, |(top, _)| score > *top) {
                best = Some((score, stats));
            }
        }
        let (_, best) = best.expect("references are non-empty");
        for (total, segment) in corpus.iter_mut().zip(&best) {
            total.merge(segment);
        }
    }
    Ok(mean_f_beta(&corpus, cfg.beta) * 100.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BleuConfig {
    /// Add-one smoothing on the precision of orders >= 2.
    pub smoothing: bool,
}

impl Default for BleuConfig {
    fn default() -> Self {
        BleuConfig { smoothing: false }
    }
}

const BLEU_MAX_ORDER: usize = 4;

/// Corpus BLEU (orders 1-4, geometric mean, brevity penalty) on 0-100.
///
/// The brevity-penalty reference length is the per-segment closest reference
/// length (ties to the shorter). Without smoothing any zero precision makes
/// the score 0.
pub fn corpus_bleu_with(
    hypotheses: &[String],
    references: &[Vec<String>],
    cfg: &BleuConfig,
) -> Result<f64, MetricError> {
    check_corpus(hypotheses, references)?;

    let mut matched = [0u64; BLEU_MAX_ORDER];
    let mut totals = [0u64; BLEU_MAX_ORDER];
    let mut hyp_len = 0u64;
    let mut ref_len = 0u64;

    for (hyp, refs) in hypotheses.iter().zip(references) {
        let hyp_tokens = tokenize(hyp);
        let ref_token_lists: Vec<Vec<String>> = refs.iter().map(|r| tokenize(r)).collect();

        hyp_len += hyp_tokens.len() as u64;
        let closest = ref_token_lists
            .iter()
            .map(|r| r.len())
            .min_by_key(|&len| {
                let diff = (len as i64 - hyp_tokens.len() as i64).unsigned_abs();
                (diff, len)
            })
            .expect("references are non-empty");
        ref_len += closest as u64;

        for n in 1..=BLEU_MAX_ORDER {
            let hyp_counts = word_ngram_counts(&hyp_tokens, n);
            // Clip against the maximum count in any single reference.
            let mut max_ref_counts: HashMap<&[String], u64> = HashMap::new();
            for ref_tokens in &ref_token_lists {
                for (gram, count) in word_ngram_counts(ref_tokens, n) {
                    let entry = max_ref_counts.entry(gram).or_insert(0);
                    *entry = (*entry).max(count);
                }
            }
            for (gram, count) in &hyp_counts {
                matched[n - 1] += (*count).min(max_ref_counts.get(gram).copied().unwrap_or(0));
            }
            totals[n - 1] += hyp_counts.values().sum::<u64>();
        }
    }

    if hyp_len == 0 {
        return Ok(0.0);
    }

    let mut log_sum = 0.0;
    for n in 1..=BLEU_MAX_ORDER {
        let (m, t) = if cfg.smoothing && n >= 2 {
            (matched[n - 1] + 1, totals[n - 1] + 1)
        } else {
            (matched[n - 1], totals[n - 1])
        };
        if m == 0 || t == 0 {
            return Ok(0.0);
        }
        log_sum += (m as f64 / t as f64).ln() / BLEU_MAX_ORDER as f64;
    }

    let brevity_penalty = if hyp_len > ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    };
    Ok(brevity_penalty * log_sum.exp() * 100.0)
}

pub fn corpus_bleu(hypotheses: &[String], references: &[Vec<String>]) -> Result<f64, MetricError> {
    corpus_bleu_with(hypotheses, references, &BleuConfig::default())
}

fn lcs_length(a: &[String], b: &[String]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut current = vec![0usize; b.len() + 1];
    for token_a in a {
        for (j, token_b) in b.iter().enumerate() {
            current[j + 1] = if token_a == token_b {
                prev[j] + 1
            } else {
                prev[j + 1].max(current[j])
            };
        }
        std::mem::swap(&mut prev, &mut current);
    }
    prev[b.len()]
}

/// ROUGE-L F1 on the 0-1 scale: best F1 over references, where precision and
/// recall come from the longest common subsequence of token sequences.
pub fn rouge_l_f1(hypothesis: &str, references: &[String]) -> Result<f64, MetricError> {
    if references.is_empty() {
        return Err(MetricError::MissingReferences { index: 0 });
    }
    let hyp_tokens = tokenize(hypothesis);
    let mut best = 0.0f64;
    for reference in references {
        let ref_tokens = tokenize(reference);
        if hyp_tokens.is_empty() || ref_tokens.is_empty() {
            continue;
        }
        let lcs = lcs_length(&hyp_tokens, &ref_tokens) as f64;
        let precision = lcs / hyp_tokens.len() as f64;
        let recall = lcs / ref_tokens.len() as f64;
        if precision + recall > 0.0 {
            best = best.max(2.0 * precision * recall / (precision + recall));
        }
    }
    Ok(best)
}

/// Mean segment-level ROUGE-L F1 over a corpus.
pub fn corpus_rouge_l_f1(hypotheses: &[String], references: &[Vec<String>]) -> Result<f64, MetricError> {
    check_corpus(hypotheses, references)?;
    let mut sum = 0.0;
    for (hyp, refs) in hypotheses.iter().zip(references) {
        sum += rouge_l_f1(hyp, refs)?;
    }
    Ok(sum / hypotheses.len() as f64)
}

/// Classification accuracy with a parse-failure tally.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub accuracy: f64,
    pub parse_failures: usize,
}

/// Fraction of positions where the prediction is present and matches the
/// gold label case-insensitively; absent predictions count as wrong.
pub fn accuracy(predictions: &[Option<String>], golds: &[String]) -> Result<AccuracyReport, MetricError> {
    if predictions.len() != golds.len() {
        return Err(MetricError::LengthMismatch { hyps: predictions.len(), refs: golds.len() });
    }
    if predictions.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    let mut correct = 0usize;
    let mut parse_failures = 0usize;
    for (prediction, gold) in predictions.iter().zip(golds) {
        match prediction {
            Some(label) if label.to_lowercase() == gold.to_lowercase() => correct += 1,
            Some(_) => {}
            None => parse_failures += 1,
        }
    }
    Ok(AccuracyReport { accuracy: correct as f64 / predictions.len() as f64, parse_failures })
}

/// One scoring request for an external learned metric.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreTriple {
    pub source: String,
    pub hypothesis: String,
    pub reference: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ScorerError {
    #[error("external scorer unavailable: {0}")]
    ScorerUnavailable(String),
    #[error("scorer returned {got} scores for {expected} triples")]
    CountMismatch { expected: usize, got: usize },
}

/// A learned metric behind a service boundary; scores are opaque reals.
pub trait ExternalScorer {
    fn score_batch(&self, triples: &[ScoreTriple]) -> Result<Vec<f64>, ScorerError>;
}

/// Forward triples to a scorer and return its segment scores unchanged.
pub fn external_score(
    hypotheses: &[String],
    references: &[Vec<String>],
    sources: &[String],
    scorer: &dyn ExternalScorer,
) -> Result<Vec<f64>, ScorerError> {
    let triples: Vec<ScoreTriple> = hypotheses
        .iter()
        .zip(references)
        .zip(sources)
        .map(|((hyp, refs), source)| ScoreTriple {
            source: source.clone(),
            hypothesis: hyp.clone(),
            reference: refs.first().cloned().unwrap_or_default(),
        })
        .collect();
    if triples.is_empty() {
        return Ok(Vec::new());
    }
    let scores = scorer.score_batch(&triples)?;
    if scores.len() != triples.len() {
        return Err(ScorerError::CountMismatch { expected: triples.len(), got: scores.len() });
    }
    Ok(scores)
}

/// HTTP scorer: POSTs the triple list as JSON, expects a JSON array of reals.
pub struct HttpScorer {
    endpoint: String,
    client: reqwest::blocking::Client,
}

impl HttpScorer {
    pub fn new(endpoint: impl Into<String>) -> Self {
        HttpScorer { endpoint: endpoint.into(), client: reqwest::blocking::Client::new() }
    }
}

impl ExternalScorer for HttpScorer {
    fn score_batch(&self, triples: &[ScoreTriple]) -> Result<Vec<f64>, ScorerError> {
        let response = self
            .client
            .post(&self.endpoint)
            .json(triples)
            .send()
            .map_err(|e| ScorerError::ScorerUnavailable(e.to_string()))?;
        if !response.status().is_success() {
            return Err(ScorerError::ScorerUnavailable(format!("HTTP {}", response.status())));
        }
        response.json().map_err(|e| ScorerError::ScorerUnavailable(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(items: &[&str]) -> Vec<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    fn single_refs(items: &[&str]) -> Vec<Vec<String>> {
        items.iter().map(|s| vec![s.to_string()]).collect()
    }

    #[test]
    fn tokenize_splits_punctuation() {
        assert_eq!(tokenize("Hello, world!"), strings(&["Hello", ",", "world", "!"]));
        assert_eq!(tokenize("  a  b "), strings(&["a", "b"]));
        assert_eq!(tokenize(""), Vec::<String>::new());
        assert_eq!(tokenize("don't"), strings(&["don", "'", "t"]));
    }

    #[test]
    fn chrf_identical_is_hundred() {
        let hyps = strings(&["the cat sat on the mat"]);
        let refs = single_refs(&["the cat sat on the mat"]);
        let score = chrf_pp(&hyps, &refs, &ChrfConfig::default()).unwrap();
        assert!((score - 100.0).abs() < 1e-12);
    }

    #[test]
    fn chrf_empty_hypothesis_is_zero() {
        let score = chrf_pp(&strings(&[""]), &single_refs(&["abc"]), &ChrfConfig::default()).unwrap();
        assert_eq!(score, 0.0);
    }

    #[test]
    fn chrf_matches_hand_computation() {
        // hyp "cat sat" / ref "the cat sat": char n-grams over "catsat" vs
        // "thecatsat", word n-grams over [cat,sat] vs [the,cat,sat].
        // Order 1: m=6 h=6 r=9; order 2: m=5 h=5 r=8; order 3: m=4 h=4 r=7;
        // order 4: m=3 h=3 r=6; order 5: m=2 h=2 r=5; order 6: m=1 h=1 r=4;
        // word 1: m=2 h=2 r=3; word 2: m=1 h=1 r=2.
        let f = |m: f64, h: f64, r: f64| {
            let p = m / h;
            let rec = m / r;
            5.0 * p * rec / (4.0 * p + rec)
        };
        let expected = (f(6.0, 6.0, 9.0)
            + f(5.0, 5.0, 8.0)
            + f(4.0, 4.0, 7.0)
            + f(3.0, 3.0, 6.0)
            + f(2.0, 2.0, 5.0)
            + f(1.0, 1.0, 4.0)
            + f(2.0, 2.0, 3.0)
            + f(1.0, 1.0, 2.0))
            / 8.0
            * 100.0;
        let score =
            chrf_pp(&strings(&["cat sat"]), &single_refs(&["the cat sat"]), &ChrfConfig::default()).unwrap();
        assert!((score - expected).abs() < 1e-9, "score {score} expected {expected}");
    }

    #[test]
    fn chrf_multi_reference_takes_best() {
        let hyps = strings(&["the cat"]);
        let refs = vec![strings(&["completely unrelated", "the cat"])];
        let score = chrf_pp(&hyps, &refs, &ChrfConfig::default()).unwrap();
        assert!((score - 100.0).abs() < 1e-12);
    }

    #[test]
    fn bleu_identical_is_hundred() {
        let hyps = strings(&["the cat sat on the mat today"]);
        let refs = single_refs(&["the cat sat on the mat today"]);
        let score = corpus_bleu(&hyps, &refs).unwrap();
        assert!((score - 100.0).abs() < 1e-12);
    }

    #[test]
    fn bleu_disjoint_is_zero() {
        let score = corpus_bleu(&strings(&["aaa bbb"]), &single_refs(&["ccc ddd"])).unwrap();
        assert_eq!(score, 0.0);
    }

    #[test]
    fn bleu_clipping_matches_hand_counts() {
        // hyp "the the cat" vs ref "the cat sat": p1 = 2/3 (the clipped to 1,
        // cat 1), p2 = 1/2 ("the cat"), p3 = 0 so the unsmoothed score is 0.
        let hyps = strings(&["the the cat"]);
        let refs = single_refs(&["the cat sat"]);
        assert_eq!(corpus_bleu(&hyps, &refs).unwrap(), 0.0);
        // With add-one smoothing on n>=2 the intermediate precisions become
        // observable: p1=2/3, p2=(1+1)/(2+1), p3=1/2, p4=1/1, BP=1 (len 3 vs 3).
        let smoothed = corpus_bleu_with(&hyps, &refs, &BleuConfig { smoothing: true }).unwrap();
        let expected = (0.25 * ((2.0f64 / 3.0).ln() + (2.0f64 / 3.0).ln() + 0.5f64.ln() + 1.0f64.ln()))
            .exp()
            * 100.0;
        assert!((smoothed - expected).abs() < 1e-9);
    }

    #[test]
    fn bleu_brevity_penalty_applies_when_short() {
        // hyp 2 tokens fully matching, ref 4 tokens: p_n all 1 for n<=2 but
        // p3 needs hyp 3-grams; use 4-token identical prefix vs 5-token ref.
        let hyps = strings(&["a b c d"]);
        let refs = single_refs(&["a b c d e"]);
        let score = corpus_bleu(&hyps, &refs).unwrap();
        let expected = (1.0f64 - 5.0 / 4.0).exp()
            * (0.25 * ((4.0f64 / 4.0).ln() + (3.0f64 / 3.0).ln() + (2.0f64 / 2.0).ln() + (1.0f64 / 1.0).ln()))
                .exp()
            * 100.0;
        assert!((score - expected).abs() < 1e-9);
    }

    #[test]
    fn bleu_closest_reference_length_breaks_ties_short() {
        // hyp 3 tokens; refs of 2 and 4 tokens are equidistant; pick 2.
        let hyps = strings(&["a b c"]);
        let refs = vec![strings(&["a b", "a b c d"])];
        let score = corpus_bleu(&hyps, &refs).unwrap();
        // matches: p1=3/3, p2=2/2 ("a b" from ref2... both refs), p3=1/1;
        // hyp_len 3 > ref_len 2 so BP = 1. p4: hyp has no 4-grams -> t=0 -> 0.
        assert_eq!(score, 0.0);
        let hyps = strings(&["a b c d e"]);
        let refs = vec![strings(&["a b c d", "a b c d e f"])];
        // distances 1 and 1, tie -> shorter (4); hyp_len 5 > 4 -> BP 1.
        let score = corpus_bleu(&hyps, &refs).unwrap();
        assert!(score > 0.0);
    }

    #[test]
    fn rouge_identical_is_one() {
        assert_eq!(rouge_l_f1("a b c", &strings(&["a b c"])).unwrap(), 1.0);
    }

    #[test]
    fn rouge_disjoint_is_zero() {
        assert_eq!(rouge_l_f1("a b", &strings(&["c d"])).unwrap(), 0.0);
    }

    #[test]
    fn rouge_hand_dp_case() {
        // hyp "the cat the mat" (4 tokens), ref "the cat sat on the mat"
        // (6 tokens): LCS = 4, P = 1, R = 2/3, F1 = 0.8.
        let f1 = rouge_l_f1("the cat the mat", &strings(&["the cat sat on the mat"])).unwrap();
        assert!((f1 - 0.8).abs() < 1e-12);
    }

    #[test]
    fn rouge_empty_sides_are_zero() {
        assert_eq!(rouge_l_f1("", &strings(&["a"])).unwrap(), 0.0);
        assert_eq!(rouge_l_f1("a", &strings(&[""])).unwrap(), 0.0);
    }

    #[test]
    fn accuracy_counts_and_parse_failures() {
        let golds = strings(&["entailment", "neutral", "contradiction"]);
        let all_right: Vec<Option<String>> = golds.iter().cloned().map(Some).collect();
        assert_eq!(accuracy(&all_right, &golds).unwrap().accuracy, 1.0);

        let none: Vec<Option<String>> = vec![None, None, None];
        let report = accuracy(&none, &golds).unwrap();
        assert_eq!(report.accuracy, 0.0);
        assert_eq!(report.parse_failures, 3);

        let two_thirds = vec![Some("entailment".into()), Some("neutral".into()), None];
        let report = accuracy(&two_thirds, &golds).unwrap();
        assert!((report.accuracy - 2.0 / 3.0).abs() < 1e-9);
        assert_eq!(report.parse_failures, 1);
    }

    #[test]
    fn accuracy_is_case_insensitive() {
        let report = accuracy(&[Some("Entailment".into())], &strings(&["entailment"])).unwrap();
        assert_eq!(report.accuracy, 1.0);
    }

    #[test]
    fn length_mismatch_is_reported() {
        assert_eq!(
            chrf_pp(&strings(&["a"]), &single_refs(&["a", "b"]), &ChrfConfig::default()).unwrap_err(),
            MetricError::LengthMismatch { hyps: 1, refs: 2 }
        );
        assert_eq!(
            corpus_bleu(&strings(&[]), &single_refs(&[])).unwrap_err(),
            MetricError::EmptyCorpus
        );
    }

    struct ConstScorer(f64);
    impl ExternalScorer for ConstScorer {
        fn score_batch(&self, triples: &[ScoreTriple]) -> Result<Vec<f64>, ScorerError> {
            Ok(triples.iter().map(|_| self.0).collect())
        }
    }

    struct LenScorer;
    impl ExternalScorer for LenScorer {
        fn score_batch(&self, triples: &[ScoreTriple]) -> Result<Vec<f64>, ScorerError> {
            Ok(triples.iter().map(|t| t.hypothesis.len() as f64).collect())
        }
    }

    #[test]
    fn external_scorer_passthrough() {
        let hyps = strings(&["ab", "cdef"]);
        let refs = single_refs(&["x", "y"]);
        let sources = strings(&["s1", "s2"]);
        assert_eq!(external_score(&hyps, &refs, &sources, &ConstScorer(0.5)).unwrap(), vec![0.5, 0.5]);
        assert_eq!(external_score(&hyps, &refs, &sources, &LenScorer).unwrap(), vec![2.0, 4.0]);
        assert_eq!(external_score(&[], &[], &[], &ConstScorer(0.5)).unwrap(), Vec::<f64>::new());
    }
}
