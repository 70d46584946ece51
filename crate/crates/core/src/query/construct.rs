//! Builds query ASTs from structured (form-style) requests.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::query::ast::{CmpOp, ModuleRef, Params, Predicate, Projection, QueryAst};
use crate::value::{is_identifier, parse_date, parse_time, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FilterOp {
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "in")]
    In,
}

/// A scalar filter value as it arrives from a form or JSON body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FilterScalar {
    Int(i64),
    Float(f64),
    Text(String),
}

impl FilterScalar {
    /// Strings shaped like dates or times become DATE / TIME literals, as in query text.
    pub fn to_literal(&self) -> Value {
        match self {
            FilterScalar::Int(v) => Value::Int(*v),
            FilterScalar::Float(v) => Value::Float(*v),
            FilterScalar::Text(s) => parse_date(s)
                .map(Value::Date)
                .or_else(|| parse_time(s).map(Value::Time))
                .unwrap_or_else(|| Value::Text(s.clone())),
        }
    }
}

impl From<&str> for FilterScalar {
    fn from(s: &str) -> Self {
        FilterScalar::Text(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FilterValue {
    One(FilterScalar),
    Many(Vec<FilterScalar>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Filter {
    pub column: String,
    pub op: FilterOp,
    pub value: FilterValue,
}

impl Filter {
    pub fn new(column: &str, op: FilterOp, value: impl Into<FilterScalar>) -> Self {
        Filter { column: column.to_string(), op, value: FilterValue::One(value.into()) }
    }

    pub fn one_of<S: Into<FilterScalar>>(column: &str, values: impl IntoIterator<Item = S>) -> Self {
        Filter {
            column: column.to_string(),
            op: FilterOp::In,
            value: FilterValue::Many(values.into_iter().map(Into::into).collect()),
        }
    }

    fn to_predicate(&self) -> Result<Predicate> {
        if !is_identifier(&self.column) {
            return Err(Error::InvalidRequest(format!("malformed filter column `{}`", self.column)));
        }
        let op = match self.op {
            FilterOp::Eq => CmpOp::Eq,
            FilterOp::Ge => CmpOp::Ge,
            FilterOp::Le => CmpOp::Le,
            FilterOp::In => {
                let values: Vec<Value> = match &self.value {
                    FilterValue::One(v) => vec![v.to_literal()],
                    FilterValue::Many(vs) => vs.iter().map(FilterScalar::to_literal).collect(),
                };
                if values.is_empty() {
                    return Err(Error::InvalidRequest(format!("empty `in` list for `{}`", self.column)));
                }
                return Ok(Predicate::In { column: self.column.clone(), values });
            }
        };
        match &self.value {
            FilterValue::One(v) => Ok(Predicate::compare(&self.column, op, v.to_literal())),
            FilterValue::Many(_) => Err(Error::InvalidRequest(format!(
                "filter on `{}` with `{}` takes a single value",
                self.column,
                op.as_str()
            ))),
        }
    }
}

/// The structured payload a form-based client submits instead of query text.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StructuredRequest {
    pub table: String,
    pub columns: Vec<String>,
    #[serde(default)]
    pub module: Option<String>,
    #[serde(default, alias = "module_params")]
    pub params: Params,
    #[serde(default)]
    pub filters: Vec<Filter>,
}

/// Assembles the AST for a structured request: a module turns the columns
/// into a TRANSFORM input list, filters become a conjunction.
pub fn construct(request: &StructuredRequest) -> Result<QueryAst> {
    if !is_identifier(&request.table) {
        return Err(Error::InvalidRequest(format!("malformed table name `{}`", request.table)));
    }
    if request.columns.is_empty() {
        return Err(Error::InvalidRequest("at least one column is required".into()));
    }
    let star = request.columns.len() == 1 && request.columns[0] == "*";
    if !star {
        if let Some(bad) = request.columns.iter().find(|c| !is_identifier(c)) {
            return Err(Error::InvalidRequest(format!("malformed column name `{bad}`")));
        }
    }
    let projection = match &request.module {
        Some(module) => {
            if star {
                return Err(Error::InvalidRequest("TRANSFORM needs explicit input columns".into()));
            }
            if !is_identifier(module) {
                return Err(Error::InvalidRequest(format!("malformed module name `{module}`")));
            }
            if let Some(bad) = request.params.keys().find(|k| !is_identifier(k)) {
                return Err(Error::InvalidRequest(format!("malformed parameter name `{bad}`")));
            }
            Projection::Transform {
                inputs: request.columns.clone(),
                module: ModuleRef { name: module.clone(), params: request.params.clone() },
                output_names: None,
            }
        }
        None if star => Projection::Star,
        None => Projection::Columns(request.columns.clone()),
    };
    let terms = request.filters.iter().map(Filter::to_predicate).collect::<Result<Vec<_>>>()?;
    Ok(QueryAst { projection, source: request.table.clone(), predicate: Predicate::all(terms) })
}
