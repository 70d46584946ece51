//! Predicates resolved against a concrete schema.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::query::ast::{CmpOp, Predicate};
use crate::value::{parse_date, parse_time, DataType, Schema, Value};

#[derive(Debug, Clone)]
enum Term {
    Compare { column: usize, op: CmpOp, literal: Value },
    In { column: usize, literals: Vec<Value> },
}

/// A flattened conjunction of terms with column indices and literals
/// coerced to their column's kind.
#[derive(Debug, Clone)]
pub struct BoundPredicate {
    terms: Vec<Term>,
}

/// Coerces a literal to be comparable with a column of kind `ty`.
///
/// INT and FLOAT are mutually comparable. A quoted literal against a DATE or
/// TIME column is parsed as one; a DATE/TIME literal against a TEXT column
/// compares by its text form. Any other kind difference is a type mismatch.
fn coerce(literal: &Value, ty: DataType, column: &str) -> Result<Value> {
    let mismatch = || {
        Error::TypeMismatch(format!(
            "cannot compare {} column `{column}` with literal {}",
            ty,
            crate::query::ast::literal_text(literal)
        ))
    };
    let lit_ty = literal.data_type().ok_or_else(mismatch)?;
    match (lit_ty, ty) {
        (a, b) if a == b => Ok(literal.clone()),
        (a, b) if a.is_numeric() && b.is_numeric() => Ok(literal.clone()),
        (DataType::Text, DataType::Date) => {
            parse_date(literal.as_str().unwrap()).map(Value::Date).ok_or_else(mismatch)
        }
        (DataType::Text, DataType::Time) => {
            parse_time(literal.as_str().unwrap()).map(Value::Time).ok_or_else(mismatch)
        }
        (DataType::Date | DataType::Time, DataType::Text) => Ok(Value::Text(literal.to_string())),
        _ => Err(mismatch()),
    }
}

impl BoundPredicate {
    pub fn bind(predicate: &Predicate, schema: &Schema, table: &str) -> Result<Self> {
        let mut terms = Vec::new();
        bind_into(predicate, schema, table, &mut terms)?;
        Ok(BoundPredicate { terms })
    }

    /// Evaluates against a row given as a cell accessor. NULL cells never match.
    pub fn matches(&self, cell: impl Fn(usize) -> Value) -> bool {
        self.terms.iter().all(|term| match term {
            Term::Compare { column, op, literal } => {
                let ord = cell(*column).compare(literal);
                match op {
                    CmpOp::Eq => ord == Some(Ordering::Equal),
                    CmpOp::Ge => matches!(ord, Some(Ordering::Greater | Ordering::Equal)),
                    CmpOp::Le => matches!(ord, Some(Ordering::Less | Ordering::Equal)),
                }
            }
            Term::In { column, literals } => {
                let v = cell(*column);
                literals.iter().any(|l| v.compare(l) == Some(Ordering::Equal))
            }
        })
    }

    pub fn matches_row(&self, row: &[Value]) -> bool {
        self.matches(|i| row[i].clone())
    }
}

fn bind_into(predicate: &Predicate, schema: &Schema, table: &str, out: &mut Vec<Term>) -> Result<()> {
    let resolve = |column: &str| {
        schema
            .index_of(column)
            .map(|i| (i, schema.fields()[i].data_type))
            .ok_or_else(|| Error::UnknownColumn { table: table.to_string(), column: column.to_string() })
    };
    match predicate {
        Predicate::Compare { column, op, value } => {
            let (index, ty) = resolve(column)?;
            out.push(Term::Compare { column: index, op: *op, literal: coerce(value, ty, column)? });
        }
        Predicate::In { column, values } => {
            if values.is_empty() {
                return Err(Error::InvalidRequest(format!("empty IN list for `{column}`")));
            }
            let (index, ty) = resolve(column)?;
            let literals = values.iter().map(|v| coerce(v, ty, column)).collect::<Result<_>>()?;
            out.push(Term::In { column: index, literals });
        }
        Predicate::And(children) => {
            if children.len() < 2 {
                return Err(Error::InvalidRequest("AND needs at least two terms".into()));
            }
            for c in children {
                bind_into(c, schema, table, out)?;
            }
        }
    }
    Ok(())
}
