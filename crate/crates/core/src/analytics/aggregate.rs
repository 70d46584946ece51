//! Hourly and daily buzz-score aggregation.

use std::collections::BTreeMap;

use chrono::{NaiveDate, NaiveTime, Timelike};

/// One buzz-score observation.
#[derive(Debug, Clone, PartialEq)]
pub struct BuzzRecord {
    pub date: NaiveDate,
    pub time: NaiveTime,
    pub product: String,
    pub buzz_score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HourlyMean {
    pub date: NaiveDate,
    pub hour: u32,
    pub mean: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    sum: f64,
    count: u64,
}

impl Acc {
    fn add(&mut self, x: f64) {
        self.sum += x;
        self.count += 1;
    }

    fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }
}

/// Streaming (date, hour) grouping; state is one accumulator per group.
#[derive(Debug, Default, Clone)]
pub struct HourlyAggregator {
    groups: BTreeMap<(NaiveDate, u32), Acc>,
}

impl HourlyAggregator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, date: NaiveDate, time: NaiveTime, score: f64) {
        self.groups.entry((date, time.hour())).or_default().add(score);
    }

    /// Sorted by (date, hour).
    pub fn finish(self) -> Vec<HourlyMean> {
        self.groups
            .into_iter()
            .map(|((date, hour), acc)| HourlyMean { date, hour, mean: acc.mean() })
            .collect()
    }
}

/// Per-day score: the unweighted mean of that day's hourly means. Records
/// pushed without a time of day are treated as already-hourly values and
/// averaged directly.
#[derive(Debug, Default, Clone)]
pub struct DailyAggregator {
    hourly: HourlyAggregator,
    untimed: BTreeMap<NaiveDate, Acc>,
}

impl DailyAggregator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, date: NaiveDate, time: Option<NaiveTime>, score: f64) {
        match time {
            Some(t) => self.hourly.push(date, t, score),
            None => self.untimed.entry(date).or_default().add(score),
        }
    }

    /// Sorted by date.
    pub fn finish(self) -> Vec<(NaiveDate, f64)> {
        let mut days = self.untimed;
        for h in self.hourly.finish() {
            days.entry(h.date).or_default().add(h.mean);
        }
        days.into_iter().map(|(d, acc)| (d, acc.mean())).collect()
    }
}

pub fn hourly_aggregate<'a>(records: impl IntoIterator<Item = &'a BuzzRecord>) -> Vec<HourlyMean> {
    let mut agg = HourlyAggregator::new();
    for r in records {
        agg.push(r.date, r.time, r.buzz_score);
    }
    agg.finish()
}

pub fn daily_aggregate<'a>(records: impl IntoIterator<Item = &'a BuzzRecord>) -> Vec<(NaiveDate, f64)> {
    let mut agg = DailyAggregator::new();
    for r in records {
        agg.push(r.date, Some(r.time), r.buzz_score);
    }
    agg.finish()
}
