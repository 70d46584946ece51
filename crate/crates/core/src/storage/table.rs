use std::sync::atomic::{AtomicU64, Ordering};

use chrono::{NaiveDate, NaiveTime};

use crate::error::{Error, Result};
use crate::value::{DataType, Row, Schema, Value};

static NEXT_VERSION: AtomicU64 = AtomicU64::new(1);

/// Process-unique version stamp; every loaded table gets a fresh one.
pub(crate) fn next_version() -> u64 {
    NEXT_VERSION.fetch_add(1, Ordering::Relaxed)
}

/// One column's cells, stored contiguously by kind.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Int(Vec<Option<i64>>),
    Float(Vec<Option<f64>>),
    Text(Vec<Option<String>>),
    Date(Vec<Option<NaiveDate>>),
    Time(Vec<Option<NaiveTime>>),
}

impl ColumnData {
    pub fn new(ty: DataType) -> Self {
        match ty {
            DataType::Int => ColumnData::Int(Vec::new()),
            DataType::Float => ColumnData::Float(Vec::new()),
            DataType::Text => ColumnData::Text(Vec::new()),
            DataType::Date => ColumnData::Date(Vec::new()),
            DataType::Time => ColumnData::Time(Vec::new()),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ColumnData::Int(v) => v.len(),
            ColumnData::Float(v) => v.len(),
            ColumnData::Text(v) => v.len(),
            ColumnData::Date(v) => v.len(),
            ColumnData::Time(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> Value {
        match self {
            ColumnData::Int(v) => v[i].map_or(Value::Null, Value::Int),
            ColumnData::Float(v) => v[i].map_or(Value::Null, Value::Float),
            ColumnData::Text(v) => v[i].clone().map_or(Value::Null, Value::Text),
            ColumnData::Date(v) => v[i].map_or(Value::Null, Value::Date),
            ColumnData::Time(v) => v[i].map_or(Value::Null, Value::Time),
        }
    }

    /// Appends a cell; NULL fits any column, an INT widens into a FLOAT column.
    fn push(&mut self, value: Value) -> std::result::Result<(), Value> {
        match (self, value) {
            (ColumnData::Int(v), Value::Null) => v.push(None),
            (ColumnData::Float(v), Value::Null) => v.push(None),
            (ColumnData::Text(v), Value::Null) => v.push(None),
            (ColumnData::Date(v), Value::Null) => v.push(None),
            (ColumnData::Time(v), Value::Null) => v.push(None),
            (ColumnData::Int(v), Value::Int(x)) => v.push(Some(x)),
            (ColumnData::Float(v), Value::Float(x)) if !x.is_nan() => v.push(Some(x)),
            (ColumnData::Float(v), Value::Int(x)) => v.push(Some(x as f64)),
            (ColumnData::Text(v), Value::Text(x)) => v.push(Some(x)),
            (ColumnData::Date(v), Value::Date(x)) => v.push(Some(x)),
            (ColumnData::Time(v), Value::Time(x)) => v.push(Some(x)),
            (_, other) => return Err(other),
        }
        Ok(())
    }
}

/// An immutable, column-major table.
#[derive(Debug, Clone)]
pub struct Table {
    name: String,
    schema: Schema,
    columns: Vec<ColumnData>,
    row_count: usize,
    version: u64,
}

impl Table {
    /// Builds a table from row tuples, checking every cell against the schema.
    pub fn from_rows(
        name: impl Into<String>,
        schema: Schema,
        rows: impl IntoIterator<Item = Row>,
    ) -> Result<Self> {
        let mut builder = TableBuilder::new(name, schema)?;
        for row in rows {
            builder.push_row(row)?;
        }
        Ok(builder.finish())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn row_count(&self) -> usize {
        self.row_count
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn column(&self, index: usize) -> &ColumnData {
        &self.columns[index]
    }

    pub fn cell(&self, row: usize, col: usize) -> Value {
        self.columns[col].get(row)
    }

    pub fn row(&self, index: usize) -> Row {
        self.columns.iter().map(|c| c.get(index)).collect()
    }

    pub fn rows(&self) -> impl Iterator<Item = Row> + '_ {
        (0..self.row_count).map(move |i| self.row(i))
    }
}

pub(crate) struct TableBuilder {
    name: String,
    schema: Schema,
    columns: Vec<ColumnData>,
    row_count: usize,
}

impl TableBuilder {
    pub(crate) fn new(name: impl Into<String>, schema: Schema) -> Result<Self> {
        let name = name.into();
        if !crate::value::is_identifier(&name) {
            return Err(Error::InvalidRequest(format!("invalid table name `{name}`")));
        }
        let columns = schema.fields().iter().map(|f| ColumnData::new(f.data_type)).collect();
        Ok(TableBuilder { name, schema, columns, row_count: 0 })
    }

    pub(crate) fn push_row(&mut self, row: Row) -> Result<()> {
        if row.len() != self.schema.len() {
            return Err(Error::InvalidRequest(format!(
                "row {} has {} values, schema has {} columns",
                self.row_count + 1,
                row.len(),
                self.schema.len()
            )));
        }
        // Validate the whole row first so a failure leaves the columns aligned.
        for (value, field) in row.iter().zip(self.schema.fields()) {
            let ok = match (value.data_type(), field.data_type) {
                (None, _) => true,
                (Some(DataType::Int), DataType::Float) => true,
                (Some(DataType::Float), DataType::Float) => !value.as_f64().unwrap().is_nan(),
                (Some(a), b) => a == b,
            };
            if !ok {
                return Err(Error::CellParse {
                    row: self.row_count as u64 + 1,
                    column: field.name.clone(),
                    message: format!("value `{value}` does not fit {}", field.data_type),
                });
            }
        }
        for (col, value) in self.columns.iter_mut().zip(row) {
            col.push(value).expect("row validated above");
        }
        self.row_count += 1;
        Ok(())
    }

    pub(crate) fn finish(self) -> Table {
        Table {
            name: self.name,
            schema: self.schema,
            columns: self.columns,
            row_count: self.row_count,
            version: next_version(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_mistyped_cells() {
        let schema = Schema::of(&[("a", DataType::Int)]).unwrap();
        let err = Table::from_rows("t", schema, vec![vec![Value::Text("x".into())]]).unwrap_err();
        assert_eq!(err.code(), "type_mismatch");
    }

    #[test]
    fn int_widens_into_float_column() {
        let schema = Schema::of(&[("a", DataType::Float)]).unwrap();
        let t = Table::from_rows("t", schema, vec![vec![Value::Int(3)], vec![Value::Null]]).unwrap();
        assert_eq!(t.cell(0, 0), Value::Float(3.0));
        assert_eq!(t.cell(1, 0), Value::Null);
        assert_eq!(t.row_count(), 2);
    }

    #[test]
    fn versions_are_unique() {
        let schema = Schema::of(&[("a", DataType::Int)]).unwrap();
        let a = Table::from_rows("t", schema.clone(), vec![]).unwrap();
        let b = Table::from_rows("t", schema, vec![]).unwrap();
        assert_ne!(a.version(), b.version());
    }
}
