//! Buzz-score analysis and prediction, and n-gram event analysis.
//!
//! Everything here is a pure function over its inputs; [`modules`] wraps the
//! same code as transform modules for use inside queries.

mod aggregate;
pub mod modules;
mod ngram;
mod predict;

use chrono::NaiveDate;

pub use aggregate::{daily_aggregate, hourly_aggregate, BuzzRecord, DailyAggregator, HourlyAggregator, HourlyMean};
pub use ngram::{
    ngram_event_scan, phrase_tokens, share_percent, EventReport, NGramRecord, NGramScanner, PatternBucket,
    TOKEN_PLACEHOLDER,
};
pub use predict::{
    day_ordinal, ep_predict, pearson, percent_error, predict_day, rp_predict, select_history_dates, weekly_predict,
    HistorySelector, PredictionSpec, SeriesPoint, Technique,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalyticsError {
    #[error("history is empty")]
    EmptyHistory,
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("input has zero variance")]
    ZeroVariance,
    #[error("actual value is zero")]
    ZeroActual,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("history is missing {}", fmt_dates(.0))]
    MissingHistory(Vec<NaiveDate>),
    #[error("phrase has {phrase} tokens but n-grams have {n}")]
    PhraseTooLong { phrase: usize, n: usize },
    #[error("n-gram has {found} tokens, corpus n-grams have {expected}")]
    RaggedCorpus { expected: usize, found: usize },
    #[error("{0}")]
    InvalidSpec(String),
}

fn fmt_dates(dates: &[NaiveDate]) -> String {
    const SHOWN: usize = 10;
    let mut s: Vec<String> = dates.iter().take(SHOWN).map(|d| d.to_string()).collect();
    if dates.len() > SHOWN {
        s.push(format!("and {} more", dates.len() - SHOWN));
    }
    s.join(", ")
}
