//! Analytics as transform modules.
//!
//! | module | inputs | output |
//! |---|---|---|
//! | `hourly_analysis` | date, time, score | date, hour, mean |
//! | `daily_analysis` | date, score / date, time, score | date, mean |
//! | `daily_prediction` | date, score / date, time, score | date, technique, selector, predicted |
//! | `weekly_prediction` | same | same, 7 rows |
//! | `ngram_analysis` | n-gram text or tokens..., frequency | pattern, total_frequency, distinct_count, corpus_distinct |
//!
//! `event_analysis` is another name for `ngram_analysis`.

use std::collections::BTreeMap;

use chrono::{Days, NaiveDate, NaiveTime};

use crate::analytics::{
    ngram::pattern_label, phrase_tokens, predict_day, weekly_predict, DailyAggregator, HistorySelector,
    HourlyAggregator, NGramScanner, PredictionSpec, Technique,
};
use crate::error::Result;
use crate::query::Params;
use crate::repository::{
    Arity, ModuleDescriptor, ModuleError, ModuleRepository, OutputSchema, ParamSpec, TransformModule,
};
use crate::value::{DataType, Row, Schema, Value};

fn check_input(module: &str, input: &Schema, expected: &[&[DataType]]) -> Result<(), ModuleError> {
    for (i, (field, allowed)) in input.fields().iter().zip(expected).enumerate() {
        if !allowed.contains(&field.data_type) {
            let names: Vec<&str> = allowed.iter().map(|t| t.as_str()).collect();
            return Err(ModuleError::new(format!(
                "{module}: input column {} (`{}`) is {}, expected {}",
                i + 1,
                field.name,
                field.data_type.as_str(),
                names.join(" or ")
            )));
        }
    }
    Ok(())
}

const NUMERIC: &[DataType] = &[DataType::Int, DataType::Float];
const DATE: &[DataType] = &[DataType::Date];
const TIME: &[DataType] = &[DataType::Time];
const TEXT: &[DataType] = &[DataType::Text];

fn date_time_score(row: &Row, timed: bool) -> Option<(NaiveDate, Option<NaiveTime>, f64)> {
    let date = row[0].as_date()?;
    if timed {
        Some((date, Some(row[1].as_time()?), row[2].as_f64()?))
    } else {
        Some((date, None, row[1].as_f64()?))
    }
}

/// Per (date, hour) mean score. Rows with a NULL cell are skipped.
pub struct HourlyAnalysis {
    schema: Schema,
    agg: HourlyAggregator,
}

impl TransformModule for HourlyAnalysis {
    fn output_schema(&self) -> &Schema {
        &self.schema
    }

    fn push(&mut self, row: Row) -> Result<Vec<Row>, ModuleError> {
        if let Some((date, Some(time), score)) = date_time_score(&row, true) {
            self.agg.push(date, time, score);
        }
        Ok(Vec::new())
    }

    fn close(&mut self) -> Result<Vec<Row>, ModuleError> {
        Ok(std::mem::take(&mut self.agg)
            .finish()
            .into_iter()
            .map(|h| vec![Value::Date(h.date), Value::Int(h.hour as i64), Value::Float(h.mean)])
            .collect())
    }
}

/// Per-day mean of hourly means; with a (date, score) input the scores are
/// averaged per day directly.
pub struct DailyAnalysis {
    schema: Schema,
    timed: bool,
    agg: DailyAggregator,
}

impl TransformModule for DailyAnalysis {
    fn output_schema(&self) -> &Schema {
        &self.schema
    }

    fn push(&mut self, row: Row) -> Result<Vec<Row>, ModuleError> {
        if let Some((date, time, score)) = date_time_score(&row, self.timed) {
            self.agg.push(date, time, score);
        }
        Ok(Vec::new())
    }

    fn close(&mut self) -> Result<Vec<Row>, ModuleError> {
        Ok(std::mem::take(&mut self.agg)
            .finish()
            .into_iter()
            .map(|(d, m)| vec![Value::Date(d), Value::Float(m)])
            .collect())
    }
}

fn daily_input_check(module: &str, input: &Schema) -> Result<bool, ModuleError> {
    if input.len() == 3 {
        check_input(module, input, &[DATE, TIME, NUMERIC])?;
        Ok(true)
    } else {
        check_input(module, input, &[DATE, NUMERIC])?;
        Ok(false)
    }
}

/// EP/RP prediction over the daily series built from the input rows.
///
/// Without `target` the day after the last input date is predicted; without
/// `selector` every day from the first input date up to the target is used.
pub struct Prediction {
    schema: Schema,
    weekly: bool,
    timed: bool,
    technique: Technique,
    selector: Option<HistorySelector>,
    target: Option<NaiveDate>,
    agg: DailyAggregator,
}

impl Prediction {
    fn open(weekly: bool, params: &Params, input: &Schema) -> Result<Self, ModuleError> {
        let name = if weekly { "weekly_prediction" } else { "daily_prediction" };
        let timed = daily_input_check(name, input)?;
        let technique = match params.get("technique") {
            Some(t) => t.parse()?,
            None => Technique::Extrapolation,
        };
        let selector = params.get("selector").map(|s| s.parse()).transpose()?;
        let target = params
            .get("target")
            .map(|t| {
                crate::value::parse_date(t).ok_or_else(|| ModuleError::new(format!("target `{t}` is not a YYYY-MM-DD date")))
            })
            .transpose()?;
        if let (Some(sel), Some(t)) = (selector, target) {
            PredictionSpec::new(technique, sel, t)?;
        }
        Ok(Prediction { schema: prediction_schema(), weekly, timed, technique, selector, target, agg: DailyAggregator::new() })
    }
}

fn prediction_schema() -> Schema {
    Schema::of(&[
        ("date", DataType::Date),
        ("technique", DataType::Text),
        ("selector", DataType::Text),
        ("predicted", DataType::Float),
    ])
    .expect("static schema")
}

impl TransformModule for Prediction {
    fn output_schema(&self) -> &Schema {
        &self.schema
    }

    fn push(&mut self, row: Row) -> Result<Vec<Row>, ModuleError> {
        if let Some((date, time, score)) = date_time_score(&row, self.timed) {
            self.agg.push(date, time, score);
        }
        Ok(Vec::new())
    }

    fn close(&mut self) -> Result<Vec<Row>, ModuleError> {
        let daily: BTreeMap<NaiveDate, f64> = std::mem::take(&mut self.agg).finish().into_iter().collect();
        let (first, last) = match (daily.keys().next(), daily.keys().next_back()) {
            (Some(f), Some(l)) => (*f, *l),
            _ if self.selector.is_some() && self.target.is_some() => (NaiveDate::MIN, NaiveDate::MIN),
            _ => return Err(ModuleError::new("no input rows to predict from")),
        };
        let target = match self.target {
            Some(t) => t,
            None => last.checked_add_days(Days::new(1)).ok_or_else(|| ModuleError::new("date out of range"))?,
        };
        let selector = match self.selector {
            Some(s) => s,
            None => {
                let span = target.signed_duration_since(first).num_days();
                HistorySelector::PrecedingDays(u32::try_from(span).unwrap_or(0))
            }
        };
        let row = |date: NaiveDate, v: f64| {
            vec![
                Value::Date(date),
                Value::Text(self.technique.to_string()),
                Value::Text(selector.to_string()),
                Value::Float(v),
            ]
        };
        if self.weekly {
            Ok(weekly_predict(self.technique, selector, target, &daily)?.into_iter().map(|(d, v)| row(d, v)).collect())
        } else {
            Ok(vec![row(target, predict_day(self.technique, selector, target, &daily)?)])
        }
    }
}

enum NGramMode {
    Event(NGramScanner),
    /// No phrase: group identical n-grams.
    Distinct { groups: BTreeMap<String, (u64, u64)>, corpus: u64 },
}

/// Phrase-centred event analysis, or distinct n-gram counting when no
/// phrase is given.
pub struct NGramAnalysis {
    schema: Schema,
    split_text: bool,
    case_fold: bool,
    mode: NGramMode,
}

impl NGramAnalysis {
    fn open(params: &Params, input: &Schema) -> Result<Self, ModuleError> {
        let k = input.len();
        let mut expected = vec![TEXT; k - 1];
        expected.push(NUMERIC);
        check_input("ngram_analysis", input, &expected)?;
        let case_fold = match params.get("case_fold").map(|s| s.to_ascii_lowercase()) {
            None => false,
            Some(v) if matches!(v.as_str(), "on" | "true" | "yes" | "1") => true,
            Some(v) if matches!(v.as_str(), "off" | "false" | "no" | "0") => false,
            Some(v) => return Err(ModuleError::new(format!("case_fold must be on or off, got `{v}`"))),
        };
        let split_text = k == 2;
        let mode = match params.get("phrase") {
            Some(p) => {
                let n = (!split_text).then_some(k - 1);
                NGramMode::Event(NGramScanner::new(&phrase_tokens(p), case_fold, n)?)
            }
            None => NGramMode::Distinct { groups: BTreeMap::new(), corpus: 0 },
        };
        let schema = Schema::of(&[
            ("pattern", DataType::Text),
            ("total_frequency", DataType::Int),
            ("distinct_count", DataType::Int),
            ("corpus_distinct", DataType::Int),
        ])
        .expect("static schema");
        Ok(NGramAnalysis { schema, split_text, case_fold, mode })
    }
}

impl TransformModule for NGramAnalysis {
    fn output_schema(&self) -> &Schema {
        &self.schema
    }

    fn push(&mut self, row: Row) -> Result<Vec<Row>, ModuleError> {
        let (freq_cell, token_cells) = row.split_last().expect("arity checked");
        let frequency = match freq_cell {
            Value::Int(f) if *f >= 0 => *f as u64,
            Value::Float(f) if *f >= 0.0 && f.fract() == 0.0 => *f as u64,
            Value::Null => 0,
            other => return Err(ModuleError::new(format!("frequency must be a nonnegative integer, got {other}"))),
        };
        let tokens: Vec<&str> = if self.split_text {
            token_cells[0].as_str().unwrap_or("").split_whitespace().collect()
        } else {
            token_cells.iter().map(|v| v.as_str().unwrap_or("")).collect()
        };
        match &mut self.mode {
            NGramMode::Event(scanner) => scanner.push(&tokens, frequency)?,
            NGramMode::Distinct { groups, corpus } => {
                let mut key = tokens.join(" ");
                if self.case_fold {
                    key = key.to_lowercase();
                }
                let g = groups.entry(key).or_default();
                g.0 += frequency;
                g.1 += 1;
                *corpus += 1;
            }
        }
        Ok(Vec::new())
    }

    fn close(&mut self) -> Result<Vec<Row>, ModuleError> {
        let int = |v: u64| Value::Int(v as i64);
        let mode = std::mem::replace(&mut self.mode, NGramMode::Distinct { groups: BTreeMap::new(), corpus: 0 });
        Ok(match mode {
            NGramMode::Event(scanner) => {
                let report = scanner.finish();
                report
                    .buckets
                    .iter()
                    .map(|b| {
                        vec![
                            Value::Text(pattern_label(&report.phrase, report.n, b.position)),
                            int(b.total_frequency),
                            int(b.distinct_count),
                            int(report.corpus_distinct),
                        ]
                    })
                    .collect()
            }
            NGramMode::Distinct { groups, corpus } => groups
                .into_iter()
                .map(|(pattern, (total, count))| vec![Value::Text(pattern), int(total), int(count), int(corpus)])
                .collect(),
        })
    }
}

fn boxed<M: TransformModule + 'static>(m: M) -> Box<dyn TransformModule> {
    Box::new(m)
}

fn prediction_descriptor(name: &str, weekly: bool) -> ModuleDescriptor {
    let target_doc = if weekly {
        "first day of the predicted week (YYYY-MM-DD); default: day after the last input date"
    } else {
        "day to predict (YYYY-MM-DD); default: day after the last input date"
    };
    let d = ModuleDescriptor::new(name, Arity::OneOf(vec![2, 3]), OutputSchema::Fixed(prediction_schema()));
    let d = if weekly {
        d.describe("EP/RP prediction for the 7 days of a week, each from its own history")
            .param(ParamSpec::required("technique", "ep or rp"))
            .param(ParamSpec::required("selector", "days:n or weeks:n"))
    } else {
        d.describe("EP/RP prediction of one day's score")
            .param(ParamSpec::optional("technique", "ep or rp; default ep"))
            .param(ParamSpec::optional("selector", "days:n or weeks:n; default: every day since the first input date"))
    };
    d.param(ParamSpec::optional("target", target_doc))
}

fn ngram_descriptor(name: &str) -> ModuleDescriptor {
    ModuleDescriptor::new(name, Arity::AtLeast(2), OutputSchema::Fixed(
        Schema::of(&[
            ("pattern", DataType::Text),
            ("total_frequency", DataType::Int),
            ("distinct_count", DataType::Int),
            ("corpus_distinct", DataType::Int),
        ])
        .expect("static schema"),
    ))
    .describe("n-grams related to a phrase, bucketed by phrase position; distinct n-grams without a phrase")
    .param(ParamSpec::optional("phrase", "space-separated tokens"))
    .param(ParamSpec::optional("case_fold", "on or off; default off"))
}

pub fn register(repo: &ModuleRepository) -> Result<()> {
    let hourly_schema =
        Schema::of(&[("date", DataType::Date), ("hour", DataType::Int), ("mean", DataType::Float)]).expect("static schema");
    let daily_schema = Schema::of(&[("date", DataType::Date), ("mean", DataType::Float)]).expect("static schema");

    let s = hourly_schema.clone();
    repo.register(
        ModuleDescriptor::new("hourly_analysis", Arity::Exact(3), OutputSchema::Fixed(hourly_schema))
            .describe("mean score per date and hour"),
        move |_: &Params, input: &Schema| {
            check_input("hourly_analysis", input, &[DATE, TIME, NUMERIC])?;
            Ok(boxed(HourlyAnalysis { schema: s.clone(), agg: HourlyAggregator::new() }))
        },
    )?;

    let s = daily_schema.clone();
    repo.register(
        ModuleDescriptor::new("daily_analysis", Arity::OneOf(vec![2, 3]), OutputSchema::Fixed(daily_schema))
            .describe("mean score per date (mean of hourly means when a time column is given)"),
        move |_: &Params, input: &Schema| {
            let timed = daily_input_check("daily_analysis", input)?;
            Ok(boxed(DailyAnalysis { schema: s.clone(), timed, agg: DailyAggregator::new() }))
        },
    )?;

    repo.register(prediction_descriptor("daily_prediction", false), |p: &Params, input: &Schema| {
        Ok(boxed(Prediction::open(false, p, input)?))
    })?;
    repo.register(prediction_descriptor("weekly_prediction", true), |p: &Params, input: &Schema| {
        Ok(boxed(Prediction::open(true, p, input)?))
    })?;

    for name in ["ngram_analysis", "event_analysis"] {
        repo.register(ngram_descriptor(name), |p: &Params, input: &Schema| Ok(boxed(NGramAnalysis::open(p, input)?)))?;
    }
    Ok(())
}
