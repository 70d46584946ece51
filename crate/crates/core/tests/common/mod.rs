//! Brute-force reference implementations and test helpers shared by the
//! integration tests. Nothing here calls into the analytics code under test.

#![allow(dead_code)]

use std::collections::HashMap;
use std::time::Duration;

use chrono::{NaiveDate, NaiveTime, Timelike};

/// `|a - b| <= tol * max(|a|, |b|, 1)`.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Group by a "date hour" string key, mean per group, sorted.
pub fn oracle_hourly(records: &[(NaiveDate, NaiveTime, f64)]) -> Vec<(NaiveDate, u32, f64)> {
    let mut groups: HashMap<String, Vec<f64>> = HashMap::new();
    for (d, t, s) in records {
        groups.entry(format!("{d} {:02}", t.hour())).or_default().push(*s);
    }
    let mut keys: Vec<&String> = groups.keys().collect();
    keys.sort();
    keys.into_iter()
        .map(|k| {
            let (d, h) = k.split_once(' ').unwrap();
            (d.parse().unwrap(), h.parse().unwrap(), mean(&groups[k]))
        })
        .collect()
}

/// Per day: bucket scores into 24 hour slots, average the non-empty slots.
pub fn oracle_daily(records: &[(NaiveDate, NaiveTime, f64)]) -> Vec<(NaiveDate, f64)> {
    let mut days: HashMap<NaiveDate, Vec<Vec<f64>>> = HashMap::new();
    for (d, t, s) in records {
        days.entry(*d).or_insert_with(|| vec![Vec::new(); 24])[t.hour() as usize].push(*s);
    }
    let mut out: Vec<(NaiveDate, f64)> = days
        .into_iter()
        .map(|(d, slots)| {
            let means: Vec<f64> = slots.iter().filter(|s| !s.is_empty()).map(|s| mean(s)).collect();
            (d, mean(&means))
        })
        .collect();
    out.sort_by_key(|(d, _)| *d);
    out
}

/// Least squares via the 2x2 normal equations and Cramer's rule, with x
/// shifted to start at 0.
pub fn oracle_rp(points: &[(i64, f64)], target: i64) -> f64 {
    let x0 = points.iter().map(|p| p.0).min().unwrap();
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let x = (x - x0) as f64;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let det = n * sxx - sx * sx;
    let intercept = (sy * sxx - sx * sxy) / det;
    let slope = (n * sxy - sx * sy) / det;
    intercept + slope * (target - x0) as f64
}

/// Computational formula: (nΣxy − ΣxΣy) / sqrt((nΣx² − (Σx)²)(nΣy² − (Σy)²)).
pub fn oracle_pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let sa: f64 = a.iter().sum();
    let sb: f64 = b.iter().sum();
    let sab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let saa: f64 = a.iter().map(|x| x * x).sum();
    let sbb: f64 = b.iter().map(|y| y * y).sum();
    (n * sab - sa * sb) / ((n * saa - sa * sa) * (n * sbb - sb * sb)).sqrt()
}

/// Two-pass population standard deviation.
pub fn oracle_stddev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Substring scan over space-joined records: for each occurrence of
/// " phrase " in " t1 t2 ... tn ", the bucket is the number of spaces
/// before it. Returns per-bucket (distinct, total) and the related count.
pub fn oracle_ngram(corpus: &[(Vec<String>, u64)], phrase: &[String], n: usize) -> (Vec<(u64, u64)>, u64) {
    let k = phrase.len();
    let mut buckets = vec![(0u64, 0u64); n - k + 1];
    let needle = format!(" {} ", phrase.join(" "));
    for (tokens, freq) in corpus {
        let hay = format!(" {} ", tokens.join(" "));
        let mut from = 0;
        while let Some(i) = hay[from..].find(&needle) {
            let at = from + i;
            let pos = hay[..at + 1].matches(' ').count() - 1;
            buckets[pos].0 += 1;
            buckets[pos].1 += freq;
            from = at + 1;
        }
    }
    let related = buckets.iter().map(|b| b.0).sum();
    (buckets, related)
}

pub fn date(s: &str) -> NaiveDate {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
}

pub fn http_agent() -> ureq::Agent {
    ureq::Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(Duration::from_secs(30)))
        .build()
        .into()
}

pub struct Http {
    pub base: String,
    pub agent: ureq::Agent,
}

impl Http {
    pub fn new(base: String) -> Self {
        Http { base, agent: http_agent() }
    }

    pub fn get(&self, path: &str) -> (u16, serde_json::Value) {
        let mut r = self.agent.get(&format!("{}{path}", self.base)).call().unwrap();
        let status = r.status().as_u16();
        (status, r.body_mut().read_json().unwrap_or(serde_json::Value::Null))
    }

    pub fn post(&self, path: &str, body: &serde_json::Value) -> (u16, serde_json::Value) {
        let mut r = self.agent.post(&format!("{}{path}", self.base)).send_json(body).unwrap();
        let status = r.status().as_u16();
        (status, r.body_mut().read_json().unwrap_or(serde_json::Value::Null))
    }

    pub fn delete(&self, path: &str) -> (u16, serde_json::Value) {
        let mut r = self.agent.delete(&format!("{}{path}", self.base)).call().unwrap();
        let status = r.status().as_u16();
        (status, r.body_mut().read_json().unwrap_or(serde_json::Value::Null))
    }

    /// Submits and polls until finished; returns the job id and final status body.
    pub fn run_query(&self, body: &serde_json::Value) -> (String, serde_json::Value) {
        let (status, sub) = self.post("/api/queries", body);
        assert_eq!(status, 202, "{sub}");
        let id = sub["job_id"].as_str().unwrap().to_string();
        let deadline = std::time::Instant::now() + Duration::from_secs(30);
        loop {
            let (_, st) = self.get(&format!("/api/queries/{id}"));
            let s = st["status"].as_str().unwrap_or_default().to_string();
            if s == "succeeded" || s == "failed" || std::time::Instant::now() > deadline {
                return (id, st);
            }
            std::thread::sleep(Duration::from_millis(3));
        }
    }

    /// Follows next_cursor to the end; returns all rows and the page count.
    pub fn all_rows(&self, id: &str, limit: usize) -> (Vec<serde_json::Value>, usize) {
        let mut rows = Vec::new();
        let mut cursor: Option<String> = None;
        let mut pages = 0;
        loop {
            let mut path = format!("/api/queries/{id}/rows?limit={limit}");
            if let Some(c) = &cursor {
                path.push_str(&format!("&cursor={c}"));
            }
            let (status, page) = self.get(&path);
            assert_eq!(status, 200, "{page}");
            pages += 1;
            rows.extend(page["rows"].as_array().unwrap().iter().cloned());
            match page.get("next_cursor").and_then(|c| c.as_str()) {
                Some(c) => cursor = Some(c.to_string()),
                None => return (rows, pages),
            }
        }
    }
}

pub const HOURLY_QUERY: &str = "SELECT TRANSFORM(date, time, buzz_score) \nUSING 'hourly_analysis' \nFROM Yahoo_Buzz_Scores \nWHERE product='EBOOKS' \nAND date >= 2005-05-23 \nAND date <=2005-05-27;";

pub const DAILY_QUERY: &str = "SELECT TRANSFORM(date, buzz_score)\nUSING 'daily_analysis' \nFROM Yahoo_Buzz_Scores\nWHERE product IN ('ONLNMUSIC','EBOOKS', \n\t'VGAME', 'SOCNETS', 'PHOTO')\nAND date>='2005-04-01' \nAND date <='2005-07-26'";

pub const PREDICTION_QUERY: &str = "SELECT TRANSFORM(date, buzz_score)\nUSING 'daily_prediction' \nFROM Yahoo_Buzz_Scores\nWHERE product IN ('EBOOKS')\nAND date>='2005-07-08' \nAND date <='2005-07-22'";

pub const NGRAM_QUERY: &str = "SELECT TRANSFORM(n-gram, frequency)\nUSING 'ngram_analysis' \nAS distinct_n-gram, total_frequency\nFROM Yahoo_n-grams";

/// Collapses whitespace runs and strips quotes and a trailing semicolon, so
/// texts that differ only in layout or date quoting compare equal.
pub fn normalize_query(q: &str) -> String {
    let s: String = q.replace(['\'', ';'], "");
    let s = s.replace(">=", " >= ").replace("<=", " <= ").replace(',', " , ").replace('(', " ( ").replace(')', " ) ");
    let s = s.replace(" = ", "=").replace('=', " = ").replace(" >  = ", " >= ").replace(" <  = ", " <= ");
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_uppercase()
}

/// An engine holding empty tables shaped like the buzz-score and n-gram data.
pub fn fixture_engine() -> bigexcel::Engine {
    use bigexcel::engine::IngestRequest;
    let e = bigexcel::Engine::new();
    e.ingest(&IngestRequest::inline("Yahoo_Buzz_Scores", "").header(false).schema(bigexcel::synth::buzz_schema()))
        .unwrap();
    let ngram = bigexcel::Schema::of(&[("n-gram", bigexcel::DataType::Text), ("frequency", bigexcel::DataType::Int)])
        .unwrap();
    e.ingest(&IngestRequest::inline("Yahoo_n-grams", "").header(false).schema(ngram)).unwrap();
    e
}

/// Runs `bx` in-process with `--data-dir dir`; returns (exit code, stdout, stderr).
pub fn bx(dir: &std::path::Path, args: &[&str]) -> (i32, String, String) {
    let mut full = vec!["bx".to_string(), "--data-dir".into(), dir.display().to_string()];
    full.extend(args.iter().map(|s| s.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = bigexcel::cli::run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}
