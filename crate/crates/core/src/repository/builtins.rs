//! Whole-input aggregates: `sum`, `average`, `stddev`.

use crate::error::Result;
use crate::query::Params;
use crate::repository::{
    Arity, ModuleDescriptor, ModuleError, ModuleRepository, OutputSchema, TransformModule,
};
use crate::value::{DataType, Row, Schema, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregateKind {
    Sum,
    Average,
    /// Population standard deviation (divides by N).
    StdDev,
}

impl AggregateKind {
    fn name(self) -> &'static str {
        match self {
            AggregateKind::Sum => "sum",
            AggregateKind::Average => "average",
            AggregateKind::StdDev => "stddev",
        }
    }
}

/// Running single-column aggregate. NULL cells are skipped; an input with no
/// values yields a single NULL row.
#[derive(Debug, Clone)]
pub struct Aggregate {
    kind: AggregateKind,
    schema: Schema,
    count: u64,
    sum: f64,
    mean: f64,
    m2: f64,
}

impl Aggregate {
    pub fn new(kind: AggregateKind) -> Self {
        let schema = Schema::of(&[(kind.name(), DataType::Float)]).expect("static schema");
        Aggregate { kind, schema, count: 0, sum: 0.0, mean: 0.0, m2: 0.0 }
    }

    pub fn add(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn value(&self) -> Option<f64> {
        if self.count == 0 {
            return None;
        }
        Some(match self.kind {
            AggregateKind::Sum => self.sum,
            AggregateKind::Average => self.sum / self.count as f64,
            AggregateKind::StdDev => (self.m2 / self.count as f64).sqrt(),
        })
    }
}

impl TransformModule for Aggregate {
    fn output_schema(&self) -> &Schema {
        &self.schema
    }

    fn push(&mut self, row: Row) -> Result<Vec<Row>, ModuleError> {
        if let Some(x) = row[0].as_f64() {
            self.add(x);
        }
        Ok(Vec::new())
    }

    fn close(&mut self) -> Result<Vec<Row>, ModuleError> {
        Ok(vec![vec![self.value().map_or(Value::Null, Value::Float)]])
    }
}

pub(super) fn register(repo: &ModuleRepository) -> Result<()> {
    for (kind, description) in [
        (AggregateKind::Sum, "sum of a numeric column"),
        (AggregateKind::Average, "arithmetic mean of a numeric column"),
        (AggregateKind::StdDev, "population standard deviation of a numeric column"),
    ] {
        let out = Aggregate::new(kind).schema.clone();
        let descriptor =
            ModuleDescriptor::new(kind.name(), Arity::Exact(1), OutputSchema::Fixed(out)).describe(description);
        repo.register(descriptor, move |_: &Params, input: &Schema| {
            let ty = input.fields()[0].data_type;
            if !ty.is_numeric() {
                return Err(ModuleError::new(format!("`{}` needs a numeric column, got {ty}", kind.name())));
            }
            Ok(Box::new(Aggregate::new(kind)) as Box<dyn TransformModule>)
        })?;
    }
    Ok(())
}
