//! Brute-force scoring oracle, independent of the library's metric
//! implementations: exhaustive n-gram multiset counting over materialized
//! gram lists and a full quadratic LCS table. Used to cross-check chrF++,
//! BLEU and ROUGE-L.

#![allow(dead_code)]

/// Oracle tokenizer: pad every non-alphanumeric, non-whitespace character
/// with spaces, then split on whitespace. Same token definition as the
/// library, reached by a different route.
pub fn oracle_tokenize(text: &str) -> Vec<String> {
    let mut padded = String::with_capacity(text.len() * 2);
    for ch in text.chars() {
        if ch.is_alphanumeric() || ch.is_whitespace() {
            padded.push(ch);
        } else {
            padded.push(' ');
            padded.push(ch);
            padded.push(' ');
        }
    }
    padded.split_whitespace().map(str::to_string).collect()
}

/// Every n-gram of `items`, materialized.
fn grams<T: Clone>(items: &[T], n: usize) -> Vec<Vec<T>> {
    if n == 0 || items.len() < n {
        return Vec::new();
    }
    (0..=items.len() - n).map(|i| items[i..i + n].to_vec()).collect()
}

fn count_of<T: PartialEq>(needle: &[T], haystack: &[Vec<T>]) -> usize {
    haystack.iter().filter(|g| g.as_slice() == needle).count()
}

/// Clipped multiset intersection size, by scanning every hypothesis gram.
fn clipped_matches<T: PartialEq + Clone>(hyp: &[Vec<T>], reference: &[Vec<T>]) -> usize {
    let mut matched = 0;
    let mut seen: Vec<&Vec<T>> = Vec::new();
    for gram in hyp {
        if seen.iter().any(|s| *s == gram) {
            continue;
        }
        seen.push(gram);
        matched += count_of(gram, hyp).min(count_of(gram, reference));
    }
    matched
}

fn f_beta(matched: usize, hyp_total: usize, ref_total: usize, beta: f64) -> f64 {
    let p = if hyp_total > 0 { matched as f64 / hyp_total as f64 } else { 0.0 };
    let r = if ref_total > 0 { matched as f64 / ref_total as f64 } else { 0.0 };
    let b2 = beta * beta;
    let denom = b2 * p + r;
    if denom > 0.0 {
        (1.0 + b2) * p * r / denom
    } else {
        0.0
    }
}

const CHAR_ORDER: usize = 6;
const WORD_ORDER: usize = 2;
const BETA: f64 = 2.0;

fn chrf_segment_stats(hyp: &str, reference: &str) -> Vec<(usize, usize, usize)> {
    let hyp_chars: Vec<char> = hyp.chars().filter(|c| !c.is_whitespace()).collect();
    let ref_chars: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
    let hyp_tokens = oracle_tokenize(hyp);
    let ref_tokens = oracle_tokenize(reference);

    let mut stats = Vec::new();
    for n in 1..=CHAR_ORDER {
        let h = grams(&hyp_chars, n);
        let r = grams(&ref_chars, n);
        stats.push((clipped_matches(&h, &r), h.len(), r.len()));
    }
    for n in 1..=WORD_ORDER {
        let h = grams(&hyp_tokens, n);
        let r = grams(&ref_tokens, n);
        stats.push((clipped_matches(&h, &r), h.len(), r.len()));
    }
    stats
}

fn mean_f(stats: &[(usize, usize, usize)]) -> f64 {
    let live: Vec<f64> = stats
        .iter()
        .filter(|(_, h, r)| *h > 0 || *r > 0)
        .map(|(m, h, r)| f_beta(*m, *h, *r, BETA))
        .collect();
    if live.is_empty() {
        0.0
    } else {
        live.iter().sum::<f64>() / live.len() as f64
    }
}

pub fn oracle_chrf_pp(hypotheses: &[String], references: &[Vec<String>]) -> f64 {
    let orders = CHAR_ORDER + WORD_ORDER;
    let mut totals = vec![(0usize, 0usize, 0usize); orders];
    for (hyp, refs) in hypotheses.iter().zip(references) {
        let mut best: Option<Vec<(usize, usize, usize)>> = None;
        for r in refs {
            let stats = chrf_segment_stats(hyp, r);
            let better = match &best {
                None => true,
                Some(current) => mean_f(&stats) > mean_f(current),
            };
            if better {
                best = Some(stats);
            }
        }
        let best = best.expect("non-empty references");
        for (total, seg) in totals.iter_mut().zip(&best) {
            total.0 += seg.0;
            total.1 += seg.1;
            total.2 += seg.2;
        }
    }
    mean_f(&totals) * 100.0
}

pub fn oracle_bleu(hypotheses: &[String], references: &[Vec<String>]) -> f64 {
    const MAX_ORDER: usize = 4;
    let mut matched = [0usize; MAX_ORDER];
    let mut totals = [0usize; MAX_ORDER];
    let mut hyp_len = 0usize;
    let mut ref_len = 0usize;

    for (hyp, refs) in hypotheses.iter().zip(references) {
        let hyp_tokens = oracle_tokenize(hyp);
        let ref_token_lists: Vec<Vec<String>> = refs.iter().map(|r| oracle_tokenize(r)).collect();

        hyp_len += hyp_tokens.len();
        let mut best_len = ref_token_lists[0].len();
        for r in &ref_token_lists[1..] {
            let diff = |len: usize| (len as i64 - hyp_tokens.len() as i64).abs();
            if diff(r.len()) < diff(best_len) || (diff(r.len()) == diff(best_len) && r.len() < best_len) {
                best_len = r.len();
            }
        }
        ref_len += best_len;

        for n in 1..=MAX_ORDER {
            let hyp_grams = grams(&hyp_tokens, n);
            totals[n - 1] += hyp_grams.len();
            // Clip each distinct gram at its max count in any one reference.
            let mut seen: Vec<&Vec<String>> = Vec::new();
            for gram in &hyp_grams {
                if seen.iter().any(|s| *s == gram) {
                    continue;
                }
                seen.push(gram);
                let hyp_count = count_of(gram, &hyp_grams);
                let max_ref = ref_token_lists
                    .iter()
                    .map(|r| count_of(gram, &grams(r, n)))
                    .max()
                    .unwrap_or(0);
                matched[n - 1] += hyp_count.min(max_ref);
            }
        }
    }

    if hyp_len == 0 {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 0..MAX_ORDER {
        if matched[n] == 0 || totals[n] == 0 {
            return 0.0;
        }
        log_sum += (matched[n] as f64 / totals[n] as f64).ln() / MAX_ORDER as f64;
    }
    let bp = if hyp_len > ref_len { 1.0 } else { (1.0 - ref_len as f64 / hyp_len as f64).exp() };
    bp * log_sum.exp() * 100.0
}

/// Full O(n*m) LCS table.
fn lcs_table(a: &[String], b: &[String]) -> usize {
    let mut table = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            table[i][j] = if a[i - 1] == b[j - 1] {
                table[i - 1][j - 1] + 1
            } else {
                table[i - 1][j].max(table[i][j - 1])
            };
        }
    }
    table[a.len()][b.len()]
}

pub fn oracle_rouge_l_f1(hypothesis: &str, references: &[String]) -> f64 {
    let hyp = oracle_tokenize(hypothesis);
    let mut best = 0.0f64;
    for reference in references {
        let r = oracle_tokenize(reference);
        if hyp.is_empty() || r.is_empty() {
            continue;
        }
        let lcs = lcs_table(&hyp, &r) as f64;
        let p = lcs / hyp.len() as f64;
        let rec = lcs / r.len() as f64;
        if p + rec > 0.0 {
            best = best.max(2.0 * p * rec / (p + rec));
        }
    }
    best
}

/// Small deterministic generator for randomized test cases.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed)
    }

    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, bound: u64) -> u64 {
        self.next() % bound.max(1)
    }

    /// Random short text over a small vocabulary plus punctuation, so n-gram
    /// collisions and clipping actually occur.
    pub fn text(&mut self, max_tokens: usize) -> String {
        const VOCAB: [&str; 14] =
            ["the", "cat", "sat", "on", "a", "mat", "dog", "ran", "cats", "sit", "über", "naïve", ",", "."];
        let len = self.below(max_tokens as u64 + 1) as usize;
        (0..len).map(|_| VOCAB[self.below(VOCAB.len() as u64) as usize]).collect::<Vec<_>>().join(" ")
    }
}
