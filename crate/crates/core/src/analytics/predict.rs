//! Day-level buzz-score prediction: history selection, extrapolation by
//! averaging (EP), ordinary least-squares regression (RP), and the error and
//! correlation measures used to judge them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::{Days, NaiveDate};

use crate::analytics::AnalyticsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Technique {
    /// Mean of the selected history.
    Extrapolation,
    /// Least-squares line through the selected history, evaluated at the target day.
    Regression,
}

impl Technique {
    pub fn as_str(self) -> &'static str {
        match self {
            Technique::Extrapolation => "ep",
            Technique::Regression => "rp",
        }
    }
}

impl fmt::Display for Technique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Technique {
    type Err = AnalyticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ep" => Ok(Technique::Extrapolation),
            "rp" => Ok(Technique::Regression),
            other => Err(AnalyticsError::InvalidSpec(format!("technique must be `ep` or `rp`, got `{other}`"))),
        }
    }
}

/// Which historical days feed a prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HistorySelector {
    /// The n consecutive days right before the target.
    PrecedingDays(u32),
    /// The n same-weekday dates right before the target, 7 days apart.
    WeekdaySample(u32),
}

impl HistorySelector {
    pub fn n(self) -> u32 {
        match self {
            HistorySelector::PrecedingDays(n) | HistorySelector::WeekdaySample(n) => n,
        }
    }
}

impl fmt::Display for HistorySelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HistorySelector::PrecedingDays(n) => write!(f, "days:{n}"),
            HistorySelector::WeekdaySample(n) => write!(f, "weeks:{n}"),
        }
    }
}

/// `days:n` or `weeks:n`.
impl FromStr for HistorySelector {
    type Err = AnalyticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AnalyticsError::InvalidSpec(format!("selector must be `days:n` or `weeks:n`, got `{s}`"));
        let (kind, n) = s.trim().split_once(':').ok_or_else(bad)?;
        let n: u32 = n.trim().parse().map_err(|_| bad())?;
        match kind.trim().to_ascii_lowercase().as_str() {
            "days" => Ok(HistorySelector::PrecedingDays(n)),
            "weeks" => Ok(HistorySelector::WeekdaySample(n)),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PredictionSpec {
    pub technique: Technique,
    pub selector: HistorySelector,
    pub target_date: NaiveDate,
}

impl PredictionSpec {
    pub fn new(technique: Technique, selector: HistorySelector, target_date: NaiveDate) -> Result<Self, AnalyticsError> {
        let min = match technique {
            Technique::Extrapolation => 1,
            Technique::Regression => 2,
        };
        if selector.n() < min {
            return Err(AnalyticsError::InvalidSpec(format!(
                "{technique} needs a history of at least {min} days, selector is {selector}"
            )));
        }
        Ok(PredictionSpec { technique, selector, target_date })
    }
}

/// A regression input: x is a day ordinal, y a score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub x: i64,
    pub y: f64,
}

const EPOCH: NaiveDate = NaiveDate::from_ymd_opt(1970, 1, 1).unwrap();

/// Days since 1970-01-01.
pub fn day_ordinal(date: NaiveDate) -> i64 {
    date.signed_duration_since(EPOCH).num_days()
}

/// History dates for `target`, ascending; the target itself is never included.
pub fn select_history_dates(selector: HistorySelector, target: NaiveDate) -> Vec<NaiveDate> {
    let (n, step) = match selector {
        HistorySelector::PrecedingDays(n) => (n, 1),
        HistorySelector::WeekdaySample(n) => (n, 7),
    };
    (1..=n as u64).rev().filter_map(|k| target.checked_sub_days(Days::new(k * step))).collect()
}

pub fn ep_predict(history: &[f64]) -> Result<f64, AnalyticsError> {
    if history.is_empty() {
        return Err(AnalyticsError::EmptyHistory);
    }
    Ok(history.iter().sum::<f64>() / history.len() as f64)
}

/// Least-squares line through `points`, evaluated at `target_x`.
pub fn rp_predict(points: &[SeriesPoint], target_x: i64) -> Result<f64, AnalyticsError> {
    if points.len() < 2 {
        return Err(AnalyticsError::TooFewPoints(points.len()));
    }
    let n = points.len() as f64;
    // Centre x before fitting: day ordinals are large and mostly cancel.
    let x0 = points[0].x;
    let mean_x = points.iter().map(|p| (p.x - x0) as f64).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.y).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for p in points {
        let dx = (p.x - x0) as f64 - mean_x;
        sxx += dx * dx;
        sxy += dx * (p.y - mean_y);
    }
    if sxx == 0.0 {
        return Err(AnalyticsError::ZeroVariance);
    }
    let slope = sxy / sxx;
    Ok(mean_y + slope * ((target_x - x0) as f64 - mean_x))
}

/// Signed percent error, `100 * (predicted - actual) / actual`.
pub fn percent_error(actual: f64, predicted: f64) -> Result<f64, AnalyticsError> {
    if actual == 0.0 {
        return Err(AnalyticsError::ZeroActual);
    }
    Ok(100.0 * (predicted - actual) / actual)
}

/// Sample Pearson correlation coefficient.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64, AnalyticsError> {
    if a.len() != b.len() {
        return Err(AnalyticsError::LengthMismatch(a.len(), b.len()));
    }
    if a.len() < 2 {
        return Err(AnalyticsError::TooFewPoints(a.len()));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(AnalyticsError::ZeroVariance);
    }
    let (cov, sa, sb) = (sab / (n - 1.0), (saa / (n - 1.0)).sqrt(), (sbb / (n - 1.0)).sqrt());
    Ok((cov / (sa * sb)).clamp(-1.0, 1.0))
}

/// Predicts one day from a daily series.
pub fn predict_day(
    technique: Technique,
    selector: HistorySelector,
    target: NaiveDate,
    daily: &BTreeMap<NaiveDate, f64>,
) -> Result<f64, AnalyticsError> {
    let spec = PredictionSpec::new(technique, selector, target)?;
    let dates = select_history_dates(spec.selector, spec.target_date);
    let missing: Vec<NaiveDate> = dates.iter().filter(|d| !daily.contains_key(d)).copied().collect();
    if !missing.is_empty() {
        return Err(AnalyticsError::MissingHistory(missing));
    }
    match spec.technique {
        Technique::Extrapolation => ep_predict(&dates.iter().map(|d| daily[d]).collect::<Vec<_>>()),
        Technique::Regression => {
            let points: Vec<SeriesPoint> =
                dates.iter().map(|d| SeriesPoint { x: day_ordinal(*d), y: daily[d] }).collect();
            rp_predict(&points, day_ordinal(spec.target_date))
        }
    }
}

/// Predicts the 7 days starting at `week_start`, each from its own history.
pub fn weekly_predict(
    technique: Technique,
    selector: HistorySelector,
    week_start: NaiveDate,
    daily: &BTreeMap<NaiveDate, f64>,
) -> Result<Vec<(NaiveDate, f64)>, AnalyticsError> {
    let mut out = Vec::with_capacity(7);
    let mut missing = Vec::new();
    for day in week_start.iter_days().take(7) {
        match predict_day(technique, selector, day, daily) {
            Ok(v) => out.push((day, v)),
            Err(AnalyticsError::MissingHistory(m)) => missing.extend(m),
            Err(e) => return Err(e),
        }
    }
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        return Err(AnalyticsError::MissingHistory(missing));
    }
    Ok(out)
}
