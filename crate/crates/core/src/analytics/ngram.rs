//! Event analysis over an n-gram corpus: which n-grams contain a phrase,
//! bucketed by the position the phrase starts at.

use crate::analytics::AnalyticsError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramRecord {
    pub tokens: Vec<String>,
    pub frequency: u64,
}

impl NGramRecord {
    pub fn new(tokens: &[&str], frequency: u64) -> Self {
        NGramRecord { tokens: tokens.iter().map(|t| t.to_string()).collect(), frequency }
    }
}

/// Related n-grams whose phrase starts at one token position (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatternBucket {
    pub position: usize,
    pub distinct_count: u64,
    pub total_frequency: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventReport {
    pub phrase: Vec<String>,
    /// Tokens per n-gram; 0 when the corpus was empty.
    pub n: usize,
    pub buckets: Vec<PatternBucket>,
    pub related_distinct: u64,
    pub corpus_distinct: u64,
    pub share_percent: f64,
}

/// Placeholder for a non-phrase token in a pattern label.
pub const TOKEN_PLACEHOLDER: &str = "<token>";

impl EventReport {
    /// `bird flu <token> <token> <token>` style label for a bucket.
    pub fn pattern(&self, bucket: &PatternBucket) -> String {
        pattern_label(&self.phrase, self.n, bucket.position)
    }
}

pub(crate) fn pattern_label(phrase: &[String], n: usize, position: usize) -> String {
    let mut parts: Vec<&str> = Vec::with_capacity(n);
    parts.extend(std::iter::repeat_n(TOKEN_PLACEHOLDER, position - 1));
    parts.extend(phrase.iter().map(String::as_str));
    parts.extend(std::iter::repeat_n(TOKEN_PLACEHOLDER, n.saturating_sub(position - 1 + phrase.len())));
    parts.join(" ")
}

/// `100 * related / corpus`, or 0 for an empty corpus.
pub fn share_percent(related: u64, corpus: u64) -> f64 {
    if corpus == 0 {
        0.0
    } else {
        100.0 * related as f64 / corpus as f64
    }
}

/// Streaming phrase scanner.
#[derive(Debug, Clone)]
pub struct NGramScanner {
    phrase: Vec<String>,
    case_fold: bool,
    n: Option<usize>,
    buckets: Vec<PatternBucket>,
    corpus: u64,
}

impl NGramScanner {
    /// `n` fixes the corpus n-gram length up front; otherwise it is taken
    /// from the first record.
    pub fn new(phrase: &[String], case_fold: bool, n: Option<usize>) -> Result<Self, AnalyticsError> {
        if phrase.is_empty() {
            return Err(AnalyticsError::InvalidSpec("phrase must have at least one token".into()));
        }
        let phrase = phrase.iter().map(|t| if case_fold { t.to_lowercase() } else { t.clone() }).collect();
        let mut scanner = NGramScanner { phrase, case_fold, n: None, buckets: Vec::new(), corpus: 0 };
        if let Some(n) = n {
            scanner.fix_n(n)?;
        }
        Ok(scanner)
    }

    fn fix_n(&mut self, n: usize) -> Result<(), AnalyticsError> {
        if self.phrase.len() > n {
            return Err(AnalyticsError::PhraseTooLong { phrase: self.phrase.len(), n });
        }
        self.n = Some(n);
        self.buckets = (1..=n - self.phrase.len() + 1)
            .map(|position| PatternBucket { position, distinct_count: 0, total_frequency: 0 })
            .collect();
        Ok(())
    }

    pub fn push<S: AsRef<str>>(&mut self, tokens: &[S], frequency: u64) -> Result<(), AnalyticsError> {
        match self.n {
            None => self.fix_n(tokens.len())?,
            Some(n) if n != tokens.len() => {
                return Err(AnalyticsError::RaggedCorpus { expected: n, found: tokens.len() })
            }
            _ => {}
        }
        self.corpus += 1;
        let k = self.phrase.len();
        for start in 0..=tokens.len() - k {
            let hit = tokens[start..start + k].iter().zip(&self.phrase).all(|(t, p)| {
                let t = t.as_ref();
                if self.case_fold {
                    t.to_lowercase() == *p
                } else {
                    t == p
                }
            });
            if hit {
                let b = &mut self.buckets[start];
                b.distinct_count += 1;
                b.total_frequency += frequency;
            }
        }
        Ok(())
    }

    pub fn finish(self) -> EventReport {
        let related: u64 = self.buckets.iter().map(|b| b.distinct_count).sum();
        EventReport {
            phrase: self.phrase,
            n: self.n.unwrap_or(0),
            share_percent: share_percent(related, self.corpus),
            buckets: self.buckets,
            related_distinct: related,
            corpus_distinct: self.corpus,
        }
    }
}

pub fn ngram_event_scan<'a>(
    corpus: impl IntoIterator<Item = &'a NGramRecord>,
    phrase: &[String],
    case_fold: bool,
) -> Result<EventReport, AnalyticsError> {
    let mut scanner = NGramScanner::new(phrase, case_fold, None)?;
    for r in corpus {
        scanner.push(&r.tokens, r.frequency)?;
    }
    Ok(scanner.finish())
}

/// Splits a phrase on whitespace.
pub fn phrase_tokens(phrase: &str) -> Vec<String> {
    phrase.split_whitespace().map(str::to_string).collect()
}
