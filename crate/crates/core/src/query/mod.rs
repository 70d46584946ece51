//! The query language: parsing, canonical rendering, construction from
//! structured requests, validation and execution.

mod ast;
mod construct;
mod exec;
mod parser;
mod predicate;

pub use ast::{CmpOp, ModuleRef, Params, Predicate, Projection, QueryAst};
pub use construct::{construct, Filter, FilterOp, FilterScalar, FilterValue, StructuredRequest};
pub use exec::{execute, prepare, PreparedQuery, ResultSet};
pub use parser::{parse, parse_modref};
pub use predicate::BoundPredicate;

/// Canonical text of a query: `parse(render(ast)) == ast`.
pub fn render(ast: &QueryAst) -> String {
    ast.render()
}
