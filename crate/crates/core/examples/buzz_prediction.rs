//! EP and RP prediction of a day's buzz score, compared with the actual value.
//!
//!     cargo run --example buzz_prediction

use std::collections::BTreeMap;

use bigexcel::analytics::{pearson, percent_error, predict_day, weekly_predict, HistorySelector, Technique};
use bigexcel::synth::{write_synthetic_buzz, BuzzConfig};
use bigexcel::{Engine, IngestRequest, Value};
use chrono::NaiveDate;

fn main() -> bigexcel::Result<()> {
    let mut csv = Vec::new();
    write_synthetic_buzz(&BuzzConfig::new(42, 122).products(&["EBOOKS"]), &mut csv)?;
    let engine = Engine::new();
    engine.ingest(&IngestRequest::inline("buzz", String::from_utf8(csv).unwrap()))?;

    // Through the query path: the prediction module.
    let rs = engine.query(
        "SELECT TRANSFORM(date, time, buzz_score) USING 'daily_prediction(technique=rp, selector=weeks:4, target=2005-07-23)' FROM buzz",
    )?;
    println!("module: {:?}", rs.rows()[0].iter().map(Value::to_string).collect::<Vec<_>>());

    // Directly: daily scores in, predictions out.
    let daily: BTreeMap<NaiveDate, f64> = engine
        .query("SELECT TRANSFORM(date, time, buzz_score) USING 'daily_analysis' FROM buzz")?
        .rows()
        .iter()
        .map(|r| (r[0].as_date().unwrap(), r[1].as_f64().unwrap()))
        .collect();
    let target = NaiveDate::from_ymd_opt(2005, 7, 23).unwrap();
    let actual = daily[&target];
    for technique in [Technique::Extrapolation, Technique::Regression] {
        for selector in [HistorySelector::PrecedingDays(14), HistorySelector::WeekdaySample(4)] {
            let p = predict_day(technique, selector, target, &daily).expect("history present");
            let err = percent_error(actual, p).expect("nonzero actual");
            println!("{:<2} {:<8} predicted {p:8.4} actual {actual:8.4} error {err:+7.2}%", technique.as_str(), selector.to_string());
        }
    }

    let week_start = NaiveDate::from_ymd_opt(2005, 7, 18).unwrap();
    let week = weekly_predict(Technique::Regression, HistorySelector::PrecedingDays(7), week_start, &daily).expect("history present");
    let predicted: Vec<f64> = week.iter().map(|(_, v)| *v).collect();
    let actuals: Vec<f64> = week.iter().map(|(d, _)| daily[d]).collect();
    println!("weekly rp days:7 vs actual: pearson {:.4}", pearson(&predicted, &actuals).expect("varying series"));
    Ok(())
}
