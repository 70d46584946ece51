use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::query::ast::{Projection, QueryAst};
use crate::query::predicate::BoundPredicate;
use crate::repository::{run_pipeline, ModuleRepository, TransformModule};
use crate::storage::{Catalog, Cursor, Page, TableLease};
use crate::value::{Field, Row, Schema};

static NEXT_RESULT: AtomicU64 = AtomicU64::new(1);

/// A materialized, immutable query result.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultSet {
    id: u64,
    schema: Schema,
    rows: Vec<Row>,
}

impl ResultSet {
    pub fn new(schema: Schema, rows: Vec<Row>) -> Self {
        ResultSet { id: NEXT_RESULT.fetch_add(1, Ordering::Relaxed), schema, rows }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Cursor pagination over the materialized rows.
    pub fn page(&self, cursor: Option<&str>, limit: usize) -> Result<Page> {
        if limit == 0 {
            return Err(Error::InvalidRequest("limit must be positive".into()));
        }
        let start = Cursor::resume(cursor, self.id, 0, self.rows.len())?;
        let end = (start + limit).min(self.rows.len());
        let next_cursor =
            (end < self.rows.len()).then(|| Cursor { source: self.id, fingerprint: 0, offset: end }.encode());
        Ok(Page { schema: self.schema.clone(), rows: self.rows[start..end].to_vec(), next_cursor })
    }
}

enum Plan {
    Project(Vec<usize>),
    Transform { module_name: String, inputs: Vec<usize>, instance: Box<dyn TransformModule> },
}

/// A validated query bound to its source table, ready to run once.
///
/// Holding a prepared query pins the source table against `drop_table`.
pub struct PreparedQuery {
    ast: QueryAst,
    lease: TableLease,
    predicate: Option<BoundPredicate>,
    plan: Plan,
    output_schema: Schema,
}

impl std::fmt::Debug for PreparedQuery {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PreparedQuery").field("query", &self.ast.render()).finish_non_exhaustive()
    }
}

fn resolve_columns(schema: &Schema, table: &str, names: &[String]) -> Result<Vec<usize>> {
    names
        .iter()
        .map(|n| {
            schema
                .index_of(n)
                .ok_or_else(|| Error::UnknownColumn { table: table.to_string(), column: n.clone() })
        })
        .collect()
}

/// Validates `ast` against the catalog and repository: table, columns,
/// predicate literal types, module existence, arity and parameters.
pub fn prepare(ast: &QueryAst, catalog: &Catalog, repository: &ModuleRepository) -> Result<PreparedQuery> {
    let lease = catalog.lease(&ast.source)?;
    let table = lease.table().clone();
    let schema = table.schema();
    let predicate = ast
        .predicate
        .as_ref()
        .map(|p| BoundPredicate::bind(p, schema, table.name()))
        .transpose()?;
    let (plan, output_schema) = match &ast.projection {
        Projection::Star => ((Plan::Project((0..schema.len()).collect())), schema.clone()),
        Projection::Columns(cols) => {
            let idx = resolve_columns(schema, table.name(), cols)?;
            let fields = idx.iter().map(|&i| schema.fields()[i].clone()).collect();
            (Plan::Project(idx), Schema::new(fields)?)
        }
        Projection::Transform { inputs, module, output_names } => {
            let idx = resolve_columns(schema, table.name(), inputs)?;
            let input_schema = Schema::new(idx.iter().map(|&i| schema.fields()[i].clone()).collect())?;
            let instance = repository.instantiate(&module.name, &module.params, &input_schema)?;
            let mut fields: Vec<Field> = instance.output_schema().fields().to_vec();
            if let Some(names) = output_names {
                if names.len() > fields.len() {
                    return Err(Error::InvalidRequest(format!(
                        "AS names {} columns but module `{}` emits {}",
                        names.len(),
                        module.name,
                        fields.len()
                    )));
                }
                for (f, n) in fields.iter_mut().zip(names) {
                    f.name = n.clone();
                }
            }
            (
                Plan::Transform { module_name: module.name.clone(), inputs: idx, instance },
                Schema::new(fields)?,
            )
        }
    };
    Ok(PreparedQuery { ast: ast.clone(), lease, predicate, plan, output_schema })
}

impl PreparedQuery {
    pub fn ast(&self) -> &QueryAst {
        &self.ast
    }

    pub fn output_schema(&self) -> &Schema {
        &self.output_schema
    }

    /// Single pass over the filtered table, materialized into a result set.
    pub fn execute(self) -> Result<ResultSet> {
        let table = self.lease.table().clone();
        let predicate = self.predicate;
        let filtered = (0..table.row_count())
            .filter(|&i| predicate.as_ref().is_none_or(|p| p.matches(|c| table.cell(i, c))));
        let rows = match self.plan {
            Plan::Project(cols) => filtered.map(|i| cols.iter().map(|&c| table.cell(i, c)).collect()).collect(),
            Plan::Transform { module_name, inputs, instance } => {
                let input = filtered.map(|i| inputs.iter().map(|&c| table.cell(i, c)).collect());
                let rows = run_pipeline(&module_name, instance, input)?;
                if let Some(bad) = rows.iter().position(|r| r.len() != self.output_schema.len()) {
                    return Err(Error::ModuleFailed {
                        module: module_name,
                        row: bad,
                        message: format!("emitted {} values for a {}-column output", rows[bad].len(), self.output_schema.len()),
                    });
                }
                rows
            }
        };
        Ok(ResultSet::new(self.output_schema, rows))
    }
}

/// Validates and runs `ast` in one step.
pub fn execute(ast: &QueryAst, catalog: &Catalog, repository: &ModuleRepository) -> Result<ResultSet> {
    prepare(ast, catalog, repository)?.execute()
}
