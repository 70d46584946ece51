//! The engine ties a table catalog to a module repository. The CLI and the
//! HTTP service are both thin layers over it.

use std::io::Cursor as IoCursor;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::query::{construct, parse, prepare, PreparedQuery, QueryAst, ResultSet, StructuredRequest};
use crate::repository::ModuleRepository;
use crate::storage::{convert_delimited, convert_text_to_csv, infer_schema, Catalog};
use crate::value::Schema;

/// Query text or a structured request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QueryInput {
    Text { text: String },
    Request { request: StructuredRequest },
}

impl QueryInput {
    pub fn text(text: impl Into<String>) -> Self {
        QueryInput::Text { text: text.into() }
    }

    pub fn to_ast(&self) -> Result<QueryAst> {
        match self {
            QueryInput::Text { text } => Ok(parse(text)?),
            QueryInput::Request { request } => construct(request),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IngestSource {
    Path(PathBuf),
    Inline(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestRequest {
    pub table: String,
    pub source: IngestSource,
    /// Inferred from the data when absent.
    pub schema: Option<Schema>,
    pub has_header: bool,
    pub delimiter: char,
}

impl IngestRequest {
    pub fn csv_file(table: &str, path: impl Into<PathBuf>) -> Self {
        IngestRequest {
            table: table.into(),
            source: IngestSource::Path(path.into()),
            schema: None,
            has_header: true,
            delimiter: ',',
        }
    }

    pub fn inline(table: &str, data: impl Into<String>) -> Self {
        IngestRequest { source: IngestSource::Inline(data.into()), ..IngestRequest::csv_file(table, "") }
    }

    pub fn schema(mut self, schema: Schema) -> Self {
        self.schema = Some(schema);
        self
    }

    pub fn header(mut self, has_header: bool) -> Self {
        self.has_header = has_header;
        self
    }

    pub fn delimiter(mut self, delimiter: char) -> Self {
        self.delimiter = delimiter;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LoadSummary {
    pub table: String,
    pub rows_loaded: usize,
}

/// A single character, or `tab`.
pub fn parse_delimiter(s: &str) -> Result<char, Error> {
    match s {
        "tab" | "\\t" | "\t" => Ok('\t'),
        "comma" => Ok(','),
        _ => {
            let mut chars = s.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Ok(c),
                _ => Err(Error::InvalidRequest(format!("delimiter must be one character or `tab`, got `{s}`"))),
            }
        }
    }
}

pub struct Engine {
    catalog: Catalog,
    repository: ModuleRepository,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new()
    }
}

impl Engine {
    /// In-memory catalog, built-in modules.
    pub fn new() -> Self {
        Engine::with_parts(Catalog::new(), ModuleRepository::with_builtins())
    }

    /// Persistent catalog under `data_dir`, built-in modules.
    pub fn open(data_dir: impl Into<PathBuf>) -> Result<Self> {
        Ok(Engine::with_parts(Catalog::open(data_dir)?, ModuleRepository::with_builtins()))
    }

    pub fn with_parts(catalog: Catalog, repository: ModuleRepository) -> Self {
        Engine { catalog, repository }
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn repository(&self) -> &ModuleRepository {
        &self.repository
    }

    pub fn prepare(&self, input: &QueryInput) -> Result<PreparedQuery> {
        prepare(&input.to_ast()?, &self.catalog, &self.repository)
    }

    pub fn prepare_ast(&self, ast: &QueryAst) -> Result<PreparedQuery> {
        prepare(ast, &self.catalog, &self.repository)
    }

    /// Parses, validates and runs query text.
    pub fn query(&self, text: &str) -> Result<ResultSet> {
        self.prepare(&QueryInput::text(text))?.execute()
    }

    pub fn query_request(&self, request: &StructuredRequest) -> Result<ResultSet> {
        self.prepare_ast(&construct(request)?)?.execute()
    }

    /// Converts (if not comma-delimited), infers a schema if none was given,
    /// and loads a new table.
    pub fn ingest(&self, req: &IngestRequest) -> Result<LoadSummary> {
        if req.delimiter == '\n' || req.delimiter == '"' {
            return Err(Error::InvalidRequest(format!("unusable delimiter {:?}", req.delimiter)));
        }
        let table = match &req.source {
            IngestSource::Path(path) => self.ingest_path(req, path)?,
            IngestSource::Inline(data) => {
                let csv = if req.delimiter == ',' {
                    data.as_bytes().to_vec()
                } else {
                    let mut out = Vec::new();
                    convert_delimited(data.as_bytes(), &mut out, req.delimiter)?;
                    out
                };
                let schema = match &req.schema {
                    Some(s) => s.clone(),
                    None => infer_schema(IoCursor::new(&csv), req.has_header)?,
                };
                self.catalog.load_reader(IoCursor::new(csv), &req.table, schema, req.has_header)?
            }
        };
        tracing::info!(table = %req.table, rows = table.row_count(), "table loaded");
        Ok(LoadSummary { table: req.table.clone(), rows_loaded: table.row_count() })
    }

    fn ingest_path(&self, req: &IngestRequest, path: &Path) -> Result<std::sync::Arc<crate::storage::Table>> {
        let converted;
        let csv_path = if req.delimiter == ',' {
            path
        } else {
            converted = convert_text_to_csv(path, req.delimiter)?;
            converted.as_path()
        };
        let schema = match &req.schema {
            Some(s) => s.clone(),
            None => infer_schema(std::io::BufReader::new(std::fs::File::open(csv_path)?), req.has_header)?,
        };
        self.catalog.load_csv(csv_path, &req.table, schema, req.has_header)
    }
}
