use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use crate::value::Value;

/// Module parameters, ordered by key so rendering is canonical.
pub type Params = BTreeMap<String, String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ge,
    Le,
}

impl CmpOp {
    pub fn as_str(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ge => ">=",
            CmpOp::Le => "<=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    Compare { column: String, op: CmpOp, value: Value },
    In { column: String, values: Vec<Value> },
    /// Conjunction of at least two terms.
    And(Vec<Predicate>),
}

impl Predicate {
    pub fn compare(column: impl Into<String>, op: CmpOp, value: Value) -> Self {
        Predicate::Compare { column: column.into(), op, value }
    }

    /// Joins terms into a conjunction; a single term stands alone.
    pub fn all(mut terms: Vec<Predicate>) -> Option<Self> {
        match terms.len() {
            0 => None,
            1 => terms.pop(),
            _ => Some(Predicate::And(terms)),
        }
    }

    /// Every column the predicate references, in order of appearance.
    pub fn columns(&self) -> Vec<&str> {
        match self {
            Predicate::Compare { column, .. } | Predicate::In { column, .. } => vec![column],
            Predicate::And(children) => children.iter().flat_map(|c| c.columns()).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleRef {
    pub name: String,
    pub params: Params,
}

impl ModuleRef {
    pub fn new(name: impl Into<String>) -> Self {
        ModuleRef { name: name.into(), params: Params::new() }
    }

    pub fn with_param(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.params.insert(key.into(), value.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    Star,
    Columns(Vec<String>),
    Transform {
        inputs: Vec<String>,
        module: ModuleRef,
        output_names: Option<Vec<String>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryAst {
    pub projection: Projection,
    pub source: String,
    pub predicate: Option<Predicate>,
}

fn quote(out: &mut impl fmt::Write, text: &str) -> fmt::Result {
    out.write_char('\'')?;
    for c in text.chars() {
        if c == '\'' {
            out.write_str("''")?;
        } else {
            out.write_char(c)?;
        }
    }
    out.write_char('\'')
}

/// Literal syntax: dates, times and text are quoted; floats always carry a
/// decimal point or exponent so they re-parse as floats.
pub(crate) fn write_literal(out: &mut impl fmt::Write, value: &Value) -> fmt::Result {
    match value {
        Value::Int(v) => write!(out, "{v}"),
        Value::Float(v) => write!(out, "{v:?}"),
        Value::Null => out.write_str("NULL"),
        other => quote(out, &other.to_string()),
    }
}

pub(crate) fn literal_text(value: &Value) -> String {
    let mut s = String::new();
    write_literal(&mut s, value).expect("writing to a String");
    s
}

fn write_param_value(out: &mut String, value: &str) {
    let chars: Vec<char> = value.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        let edge_space = c.is_whitespace() && (i == 0 || i == chars.len() - 1);
        if matches!(c, '\\' | ',' | '(' | ')') || edge_space {
            out.push('\\');
        }
        out.push(c);
    }
}

impl fmt::Display for ModuleRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut text = self.name.clone();
        if !self.params.is_empty() {
            text.push('(');
            for (i, (k, v)) in self.params.iter().enumerate() {
                if i > 0 {
                    text.push_str(", ");
                }
                text.push_str(k);
                text.push('=');
                write_param_value(&mut text, v);
            }
            text.push(')');
        }
        f.write_str(&text)
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::Compare { column, op, value } => {
                write!(f, "{column} {} ", op.as_str())?;
                write_literal(f, value)
            }
            Predicate::In { column, values } => {
                write!(f, "{column} IN (")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write_literal(f, v)?;
                }
                f.write_char(')')
            }
            Predicate::And(children) => {
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" AND ")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Projection::Star => f.write_char('*'),
            Projection::Columns(cols) => f.write_str(&cols.join(", ")),
            Projection::Transform { inputs, module, output_names } => {
                write!(f, "TRANSFORM({}) USING ", inputs.join(", "))?;
                quote(f, &module.to_string())?;
                if let Some(names) = output_names {
                    write!(f, " AS {}", names.join(", "))?;
                }
                Ok(())
            }
        }
    }
}

/// Canonical query text: upper-case keywords, single spaces, quoted dates.
impl fmt::Display for QueryAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SELECT {} FROM {}", self.projection, self.source)?;
        if let Some(p) = &self.predicate {
            write!(f, " WHERE {p}")?;
        }
        Ok(())
    }
}

impl QueryAst {
    pub fn render(&self) -> String {
        self.to_string()
    }
}
