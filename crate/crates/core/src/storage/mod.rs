//! Embedded table store: delimited-text conversion, CSV loading, the table
//! catalog with an optional on-disk snapshot, and cursor-paginated scans.
//!
//! Tables are immutable once loaded. Loads and drops are serialized; a load
//! only becomes visible in the catalog after it has fully parsed (and, when
//! a data directory is configured, been written to disk).
//!
//! Snapshot layout: `<data_dir>/<table>/data.csv` (with header) and
//! `<data_dir>/<table>/schema.tsv` (`name<TAB>TYPE` per column).

mod cursor;
mod csv;
mod table;

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use parking_lot::{Mutex, RwLock};

pub use self::csv::{convert_delimited, convert_text_to_csv, infer_schema, read_table, write_table};
pub(crate) use self::cursor::{fingerprint, Cursor};
pub use self::table::{ColumnData, Table};

use crate::error::{Error, Result};
use crate::query::{BoundPredicate, Predicate};
use crate::value::{Row, Schema};

/// One page of rows. `next_cursor` is present iff more rows follow.
#[derive(Debug, Clone, PartialEq)]
pub struct Page {
    pub schema: Schema,
    pub rows: Vec<Row>,
    pub next_cursor: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableInfo {
    pub name: String,
    pub row_count: usize,
    pub schema: Schema,
}

struct Entry {
    table: Arc<Table>,
    readers: AtomicUsize,
}

/// Keeps a table pinned against `drop_table` while held.
pub struct TableLease {
    entry: Arc<Entry>,
}

impl TableLease {
    pub fn table(&self) -> &Arc<Table> {
        &self.entry.table
    }
}

impl Drop for TableLease {
    fn drop(&mut self) {
        self.entry.readers.fetch_sub(1, Ordering::AcqRel);
    }
}

impl std::fmt::Debug for TableLease {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("TableLease").field(&self.entry.table.name()).finish()
    }
}

#[derive(Default)]
pub struct Catalog {
    tables: RwLock<BTreeMap<String, Arc<Entry>>>,
    mutation: Mutex<()>,
    data_dir: Option<PathBuf>,
}

impl Catalog {
    /// An in-memory catalog with no persistence.
    pub fn new() -> Self {
        Catalog::default()
    }

    /// Opens (creating if needed) a data directory and loads every table snapshot in it.
    pub fn open(data_dir: impl Into<PathBuf>) -> Result<Self> {
        let data_dir = data_dir.into();
        fs::create_dir_all(&data_dir)?;
        let mut tables = BTreeMap::new();
        let mut dirs: Vec<_> = fs::read_dir(&data_dir)?
            .filter_map(|e| e.ok())
            .filter(|e| e.path().join("schema.tsv").is_file())
            .collect();
        dirs.sort_by_key(|e| e.file_name());
        for dir in dirs {
            let name = dir.file_name().to_string_lossy().into_owned();
            let schema = Schema::from_sidecar(&fs::read_to_string(dir.path().join("schema.tsv"))?)?;
            let data = BufReader::new(File::open(dir.path().join("data.csv"))?);
            let table = read_table(data, &name, schema, true)?;
            tracing::debug!(table = %name, rows = table.row_count(), "restored table snapshot");
            tables.insert(name, Arc::new(Entry { table: Arc::new(table), readers: AtomicUsize::new(0) }));
        }
        Ok(Catalog { tables: RwLock::new(tables), mutation: Mutex::new(()), data_dir: Some(data_dir) })
    }

    pub fn data_dir(&self) -> Option<&Path> {
        self.data_dir.as_deref()
    }

    /// Loads a CSV file as a new table.
    pub fn load_csv(&self, path: &Path, table_name: &str, schema: Schema, has_header: bool) -> Result<Arc<Table>> {
        let file = File::open(path)?;
        self.load_reader(BufReader::new(file), table_name, schema, has_header)
    }

    /// Loads CSV from any reader as a new table.
    pub fn load_reader<R: Read>(&self, input: R, table_name: &str, schema: Schema, has_header: bool) -> Result<Arc<Table>> {
        let _guard = self.mutation.lock();
        if self.tables.read().contains_key(table_name) {
            return Err(Error::DuplicateTable(table_name.to_string()));
        }
        let table = read_table(input, table_name, schema, has_header)?;
        self.publish(table)
    }

    /// Registers an already-built table.
    pub fn insert(&self, table: Table) -> Result<Arc<Table>> {
        let _guard = self.mutation.lock();
        if self.tables.read().contains_key(table.name()) {
            return Err(Error::DuplicateTable(table.name().to_string()));
        }
        self.publish(table)
    }

    fn publish(&self, table: Table) -> Result<Arc<Table>> {
        if let Some(dir) = &self.data_dir {
            write_snapshot(dir, &table)?;
        }
        let table = Arc::new(table);
        let entry = Arc::new(Entry { table: table.clone(), readers: AtomicUsize::new(0) });
        self.tables.write().insert(table.name().to_string(), entry);
        Ok(table)
    }

    /// Sorted by name.
    pub fn list_tables(&self) -> Vec<TableInfo> {
        self.tables
            .read()
            .values()
            .map(|e| TableInfo {
                name: e.table.name().to_string(),
                row_count: e.table.row_count(),
                schema: e.table.schema().clone(),
            })
            .collect()
    }

    pub fn get(&self, name: &str) -> Result<Arc<Table>> {
        self.tables
            .read()
            .get(name)
            .map(|e| e.table.clone())
            .ok_or_else(|| Error::UnknownTable(name.to_string()))
    }

    /// Pins a table for the duration of a query.
    pub fn lease(&self, name: &str) -> Result<TableLease> {
        let tables = self.tables.read();
        let entry = tables.get(name).ok_or_else(|| Error::UnknownTable(name.to_string()))?;
        entry.readers.fetch_add(1, Ordering::AcqRel);
        Ok(TableLease { entry: entry.clone() })
    }

    pub fn drop_table(&self, name: &str) -> Result<()> {
        let _guard = self.mutation.lock();
        let mut tables = self.tables.write();
        let entry = tables.get(name).ok_or_else(|| Error::UnknownTable(name.to_string()))?;
        if entry.readers.load(Ordering::Acquire) > 0 {
            return Err(Error::TableInUse(name.to_string()));
        }
        tables.remove(name);
        drop(tables);
        if let Some(dir) = &self.data_dir {
            let path = dir.join(name);
            if path.exists() {
                fs::remove_dir_all(path)?;
            }
        }
        Ok(())
    }

    /// Returns the next page of rows matching `predicate`, in table order.
    pub fn scan_page(
        &self,
        table: &str,
        predicate: Option<&Predicate>,
        cursor: Option<&str>,
        page_size: usize,
    ) -> Result<Page> {
        if page_size == 0 {
            return Err(Error::InvalidRequest("page size must be positive".into()));
        }
        let table = self.get(table)?;
        let bound = predicate.map(|p| BoundPredicate::bind(p, table.schema(), table.name())).transpose()?;
        let fp = predicate.map_or(0, |p| fingerprint(&p.to_string()));
        let start = Cursor::resume(cursor, table.version(), fp, table.row_count())?;
        let matches = |i: usize| bound.as_ref().is_none_or(|b| b.matches(|c| table.cell(i, c)));

        let mut rows = Vec::new();
        let mut next = None;
        for i in start..table.row_count() {
            if !matches(i) {
                continue;
            }
            if rows.len() == page_size {
                next = Some(i);
                break;
            }
            rows.push(table.row(i));
        }
        Ok(Page {
            schema: table.schema().clone(),
            rows,
            next_cursor: next.map(|offset| Cursor { source: table.version(), fingerprint: fp, offset }.encode()),
        })
    }
}

fn write_snapshot(data_dir: &Path, table: &Table) -> Result<()> {
    let final_dir = data_dir.join(table.name());
    let tmp_dir = data_dir.join(format!(".{}.loading", table.name()));
    if tmp_dir.exists() {
        fs::remove_dir_all(&tmp_dir)?;
    }
    fs::create_dir_all(&tmp_dir)?;
    fs::write(tmp_dir.join("schema.tsv"), table.schema().to_sidecar())?;
    let mut out = BufWriter::new(File::create(tmp_dir.join("data.csv"))?);
    write_table(table, &mut out, true)?;
    out.flush()?;
    drop(out);
    if final_dir.exists() {
        fs::remove_dir_all(&final_dir)?;
    }
    fs::rename(&tmp_dir, &final_dir)?;
    Ok(())
}
