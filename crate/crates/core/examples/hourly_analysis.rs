//! Hourly and daily buzz-score aggregation over a synthetic dataset.
//!
//!     cargo run --example hourly_analysis

use bigexcel::cli::{write_result, OutputFormat};
use bigexcel::synth::{write_synthetic_buzz, BuzzConfig};
use bigexcel::{Engine, IngestRequest};

fn main() -> bigexcel::Result<()> {
    let mut csv = Vec::new();
    write_synthetic_buzz(&BuzzConfig::new(42, 60), &mut csv)?;
    let engine = Engine::new();
    engine.ingest(&IngestRequest::inline("Yahoo_Buzz_Scores", String::from_utf8(csv).unwrap()))?;

    let hourly = engine.query(
        "SELECT TRANSFORM(date, time, buzz_score) USING 'hourly_analysis' FROM Yahoo_Buzz_Scores \
         WHERE product = 'EBOOKS' AND date = '2005-05-23' AND time >= '08:00:00' AND time <= '13:59:59'",
    )?;
    let mut out = std::io::stdout().lock();
    write_result(&hourly, OutputFormat::Table, &mut out)?;

    let daily = engine.query(
        "SELECT TRANSFORM(date, time, buzz_score) USING 'daily_analysis' FROM Yahoo_Buzz_Scores \
         WHERE product IN ('EBOOKS', 'PHOTO') AND date >= 2005-05-23 AND date <= 2005-05-27",
    )?;
    write_result(&daily, OutputFormat::Table, &mut out)?;

    let spread = engine.query("SELECT TRANSFORM(buzz_score) USING 'stddev' FROM Yahoo_Buzz_Scores WHERE product = 'VGAME'")?;
    write_result(&spread, OutputFormat::Table, &mut out)?;
    Ok(())
}
