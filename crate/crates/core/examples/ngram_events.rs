//! Event analysis: how many 5-grams mention a phrase, and where in the 5-gram.
//!
//!     cargo run --example ngram_events

use bigexcel::analytics::{ngram_event_scan, phrase_tokens, share_percent, NGramRecord};
use bigexcel::cli::{write_result, OutputFormat};
use bigexcel::synth::{write_synthetic_ngrams, NGramConfig};
use bigexcel::{Engine, IngestRequest};

fn main() -> bigexcel::Result<()> {
    let mut csv = Vec::new();
    write_synthetic_ngrams(&NGramConfig::new(7, 5_000, "bird flu", 40), &mut csv)?;
    let engine = Engine::new();
    engine.ingest(&IngestRequest::inline("ngrams", String::from_utf8(csv).unwrap()))?;

    let rs = engine.query(
        "SELECT TRANSFORM(token1, token2, token3, token4, token5, frequency) \
         USING 'event_analysis(phrase=bird flu)' FROM ngrams",
    )?;
    write_result(&rs, OutputFormat::Table, &mut std::io::stdout().lock())?;

    // The same scan over in-memory records.
    let records = [
        NGramRecord::new(&["the", "bird", "flu", "is", "here"], 12),
        NGramRecord::new(&["bird", "flu", "bird", "flu", "again"], 3),
        NGramRecord::new(&["nothing", "to", "see", "here", "now"], 40),
    ];
    let report = ngram_event_scan(&records, &phrase_tokens("bird flu"), false).expect("valid phrase");
    for b in &report.buckets {
        println!("{:<36} distinct {} frequency {}", report.pattern(b), b.distinct_count, b.total_frequency);
    }
    println!("share of a 29,570,136-record corpus for 148,934 hits: {:.4}%", share_percent(148_934, 29_570_136));
    Ok(())
}
