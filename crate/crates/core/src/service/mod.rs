//! HTTP + JSON service over an [`Engine`](crate::engine::Engine): table
//! management, asynchronous query jobs, paginated results and chart data.
//!
//! | method | path | |
//! |---|---|---|
//! | `POST` | `/api/tables` | load a table: `{name, csv \| path, schema?, has_header?, delimiter?}` → 201 |
//! | `GET` | `/api/tables` | `[{name, rows, columns}]` |
//! | `GET` | `/api/tables/{name}/schema` | `[{name, type}]` |
//! | `DELETE` | `/api/tables/{name}` | 204 |
//! | `GET` | `/api/modules` | module descriptors |
//! | `POST` | `/api/queries` | `{text}` or `{request}` → 202 `{job_id, query, status}` |
//! | `GET` | `/api/queries` | all known jobs |
//! | `GET` | `/api/queries/{id}` | `{status, error?, row_count?}` |
//! | `DELETE` | `/api/queries/{id}` | 204 |
//! | `GET` | `/api/queries/{id}/rows?cursor=&limit=` | `{schema, rows, next_cursor?}` |
//! | `GET` | `/api/queries/{id}/chart?kind=&x=&series=a,b` | chart data |
//!
//! Errors are `{"error": {"code", "message"}}`; parse errors add `offset`
//! and `expected`.

mod http;
mod jobs;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Duration;

pub use http::{router, serve, RunningService};
pub use jobs::{chart_data, ChartData, ChartKind, ChartSeries, ChartSpec, JobManager, JobStatus, JobView};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    pub data_dir: Option<PathBuf>,
    pub workers: usize,
    pub queue_capacity: usize,
    pub result_ttl: Duration,
    /// Served under `/` when set.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        ServiceConfig {
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            data_dir: None,
            workers: std::thread::available_parallelism().map_or(4, |n| n.get()),
            queue_capacity: 256,
            result_ttl: Duration::from_secs(3600),
            static_dir: None,
        }
    }
}
