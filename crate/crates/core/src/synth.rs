//! Deterministic synthetic datasets: a buzz-score table with daily and
//! weekly structure, and a 5-gram corpus with a planted phrase.
//!
//! Output is bit-identical for identical arguments.

use std::f64::consts::TAU;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{Datelike, Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::value::{DataType, Schema};

/// Columns of a buzz-score table.
pub fn buzz_schema() -> Schema {
    Schema::of(&[
        ("date", DataType::Date),
        ("time", DataType::Time),
        ("product", DataType::Text),
        ("sub_item", DataType::Text),
        ("buzz_score", DataType::Float),
    ])
    .expect("static schema")
}

/// Columns of an n-gram corpus with `n` tokens per record.
pub fn ngram_schema(n: usize) -> Schema {
    let mut fields: Vec<crate::value::Field> =
        (1..=n).map(|i| crate::value::Field::new(format!("token{i}"), DataType::Text)).collect();
    fields.push(crate::value::Field::new("frequency", DataType::Int));
    Schema::new(fields).expect("static schema")
}

pub const DEFAULT_PRODUCTS: [&str; 5] = ["ONLNMUSIC", "EBOOKS", "VGAME", "SOCNETS", "PHOTO"];

#[derive(Debug, Clone, PartialEq)]
pub struct BuzzConfig {
    pub seed: u64,
    pub days: u32,
    pub products: Vec<String>,
    pub start: NaiveDate,
}

impl BuzzConfig {
    pub fn new(seed: u64, days: u32) -> Self {
        BuzzConfig {
            seed,
            days,
            products: DEFAULT_PRODUCTS.iter().map(|p| p.to_string()).collect(),
            start: NaiveDate::from_ymd_opt(2005, 4, 1).unwrap(),
        }
    }

    pub fn products<S: AsRef<str>>(mut self, products: &[S]) -> Self {
        self.products = products.iter().map(|p| p.as_ref().to_string()).collect();
        self
    }
}

/// One record per product per hour: a per-product level with a slow trend,
/// a weekly cycle, a diurnal cycle and seeded noise. Scores are positive.
pub fn write_synthetic_buzz<W: Write>(config: &BuzzConfig, out: W) -> Result<()> {
    if config.days == 0 {
        return Err(Error::InvalidRequest("days must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let profiles: Vec<(f64, f64, f64)> = config
        .products
        .iter()
        .map(|_| (rng.random_range(3.0..15.0), rng.random_range(-0.02..0.02), rng.random_range(0.0..TAU)))
        .collect();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(buzz_schema().names())?;
    for day in 0..config.days {
        let date = config
            .start
            .checked_add_days(Days::new(day as u64))
            .ok_or_else(|| Error::InvalidRequest("date out of range".into()))?;
        let weekday = date.weekday().num_days_from_monday() as f64;
        for (p, product) in config.products.iter().enumerate() {
            let (level, trend, phase) = profiles[p];
            let daily = level * (1.0 + trend * day as f64 / 7.0) + 0.8 * (TAU * weekday / 7.0 + phase).sin();
            for hour in 0..24u32 {
                let diurnal = 0.5 * (TAU * (hour as f64 - 14.0) / 24.0).cos();
                let noise: f64 = rng.random_range(-0.4..0.4);
                let score = (daily + diurnal + noise).max(0.01);
                let time = format!("{hour:02}:{:02}:{:02}", rng.random_range(0..60), rng.random_range(0..60));
                let sub_item = format!("{product}_{}", rng.random_range(1..=3));
                w.write_record([date.to_string(), time, product.clone(), sub_item, format!("{score:.8}")])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn gen_synthetic_buzz(config: &BuzzConfig, path: &Path) -> Result<()> {
    write_synthetic_buzz(config, BufWriter::new(File::create(path)?))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramConfig {
    pub seed: u64,
    pub records: usize,
    pub phrase: Vec<String>,
    pub planted_count: usize,
}

impl NGramConfig {
    pub fn new(seed: u64, records: usize, phrase: &str, planted_count: usize) -> Self {
        NGramConfig { seed, records, phrase: crate::analytics::phrase_tokens(phrase), planted_count }
    }
}

pub const NGRAM_WIDTH: usize = 5;

const SYLLABLES: [&str; 24] = [
    "ka", "lo", "mi", "ne", "su", "ta", "ri", "po", "ve", "da", "go", "hu", "ji", "be", "fa", "ze", "wo", "qi", "xu",
    "ny", "ar", "el", "on", "ut",
];

fn vocabulary(exclude: &[String]) -> Vec<String> {
    let excluded: Vec<String> = exclude.iter().map(|t| t.to_lowercase()).collect();
    let mut words = Vec::new();
    for a in SYLLABLES {
        for b in SYLLABLES {
            let w = format!("{a}{b}");
            if !excluded.contains(&w) {
                words.push(w);
            }
        }
    }
    words
}

/// A 5-gram corpus in which exactly `planted_count` records contain the
/// phrase (once, at a random position). Other tokens never equal a phrase
/// token, even ignoring case.
pub fn write_synthetic_ngrams<W: Write>(config: &NGramConfig, out: W) -> Result<()> {
    let k = config.phrase.len();
    if k > NGRAM_WIDTH {
        return Err(Error::InvalidRequest(format!("phrase has {k} tokens; n-grams have {NGRAM_WIDTH}")));
    }
    if config.planted_count > config.records {
        return Err(Error::InvalidRequest("planted count exceeds record count".into()));
    }
    if k == 0 && config.planted_count > 0 {
        return Err(Error::InvalidRequest("cannot plant an empty phrase".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let vocab = vocabulary(&config.phrase);
    let mut planted = vec![false; config.records];
    planted[..config.planted_count].iter_mut().for_each(|p| *p = true);
    planted.shuffle(&mut rng);

    let mut w = csv::Writer::from_writer(out);
    w.write_record(ngram_schema(NGRAM_WIDTH).names())?;
    for is_planted in planted {
        let mut tokens: Vec<&str> = (0..NGRAM_WIDTH).map(|_| vocab[rng.random_range(0..vocab.len())].as_str()).collect();
        if is_planted {
            let start = rng.random_range(0..=NGRAM_WIDTH - k);
            for (i, t) in config.phrase.iter().enumerate() {
                tokens[start + i] = t;
            }
        }
        let frequency: u32 = rng.random_range(40..5000);
        let mut record: Vec<String> = tokens.into_iter().map(str::to_string).collect();
        record.push(frequency.to_string());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn gen_synthetic_ngrams(config: &NGramConfig, path: &Path) -> Result<()> {
    write_synthetic_ngrams(config, BufWriter::new(File::create(path)?))
}
