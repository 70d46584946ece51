use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::thread::JoinHandle;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Deserialize;
use serde_json::{json, Value as Json_};
use tokio::sync::oneshot;
use tower_http::services::ServeDir;

use crate::engine::{parse_delimiter, Engine, IngestRequest, IngestSource, QueryInput};
use crate::error::Error;
use crate::repository::OutputSchema;
use crate::service::jobs::{ChartSpec, JobManager};
use crate::service::ServiceConfig;
use crate::value::{Field, Schema};

type AppState = Arc<JobManager>;

struct ApiError {
    status: StatusCode,
    error: Error,
}

impl From<Error> for ApiError {
    fn from(error: Error) -> Self {
        let status = match &error {
            Error::UnknownTable(_) | Error::JobNotFound(_) => StatusCode::NOT_FOUND,
            Error::DuplicateTable(_) | Error::DuplicateModule(_) | Error::TableInUse(_) | Error::JobNotReady { .. } => {
                StatusCode::CONFLICT
            }
            Error::StaleCursor => StatusCode::GONE,
            Error::QueueFull => StatusCode::SERVICE_UNAVAILABLE,
            Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError { status, error }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(r: JsonRejection) -> Self {
        Error::InvalidRequest(r.body_text()).into()
    }
}

impl From<QueryRejection> for ApiError {
    fn from(r: QueryRejection) -> Self {
        Error::InvalidRequest(r.body_text()).into()
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "code": self.error.code(), "message": self.error.to_string() });
        if let Error::Parse(p) = &self.error {
            body["offset"] = json!(p.offset);
            body["expected"] = json!(p.expected);
        }
        (self.status, Json(json!({ "error": body }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn blocking_error(e: tokio::task::JoinError) -> ApiError {
    Error::Io(std::io::Error::other(e)).into()
}

#[derive(Deserialize)]
struct TableBody {
    name: String,
    csv: Option<String>,
    path: Option<PathBuf>,
    schema: Option<Vec<Field>>,
    has_header: Option<bool>,
    delimiter: Option<String>,
}

async fn create_table(State(jobs): State<AppState>, body: Result<Json<TableBody>, JsonRejection>) -> ApiResult<Response> {
    let Json(body) = body?;
    let source = match (body.csv, body.path) {
        (Some(csv), None) => IngestSource::Inline(csv),
        (None, Some(path)) => IngestSource::Path(path),
        _ => return Err(Error::InvalidRequest("exactly one of `csv` and `path` is required".into()).into()),
    };
    let request = IngestRequest {
        table: body.name,
        source,
        schema: body.schema.map(Schema::new).transpose()?,
        has_header: body.has_header.unwrap_or(true),
        delimiter: body.delimiter.as_deref().map(parse_delimiter).transpose()?.unwrap_or(','),
    };
    let engine = jobs.engine().clone();
    let summary = tokio::task::spawn_blocking(move || engine.ingest(&request)).await.map_err(blocking_error)??;
    Ok((StatusCode::CREATED, Json(summary)).into_response())
}

async fn list_tables(State(jobs): State<AppState>) -> Json<Json_> {
    let tables: Vec<Json_> = jobs
        .engine()
        .catalog()
        .list_tables()
        .into_iter()
        .map(|t| json!({ "name": t.name, "rows": t.row_count, "columns": t.schema }))
        .collect();
    Json(json!(tables))
}

async fn table_schema(State(jobs): State<AppState>, Path(name): Path<String>) -> ApiResult<Json<Schema>> {
    Ok(Json(jobs.engine().catalog().get(&name)?.schema().clone()))
}

async fn drop_table(State(jobs): State<AppState>, Path(name): Path<String>) -> ApiResult<StatusCode> {
    let engine = jobs.engine().clone();
    tokio::task::spawn_blocking(move || engine.catalog().drop_table(&name)).await.map_err(blocking_error)??;
    Ok(StatusCode::NO_CONTENT)
}

async fn list_modules(State(jobs): State<AppState>) -> Json<Json_> {
    let modules: Vec<Json_> = jobs
        .engine()
        .repository()
        .list_modules()
        .into_iter()
        .map(|d| {
            let params: Vec<Json_> = d
                .params
                .iter()
                .map(|p| json!({ "key": p.key, "required": p.required, "description": p.description }))
                .collect();
            let output = match &d.output_schema {
                OutputSchema::Fixed(s) => json!(s),
                OutputSchema::Dynamic => Json_::Null,
            };
            json!({
                "name": d.name,
                "description": d.description,
                "input_arity": d.input_arity.to_string(),
                "params": params,
                "output_schema": output,
            })
        })
        .collect();
    Json(json!(modules))
}

async fn submit_query(State(jobs): State<AppState>, body: Result<Json<QueryInput>, JsonRejection>) -> ApiResult<Response> {
    let Json(input) = body?;
    let view = jobs.submit(&input).map_err(|e| {
        let mut api = ApiError::from(e);
        if api.status != StatusCode::SERVICE_UNAVAILABLE {
            api.status = StatusCode::BAD_REQUEST;
        }
        api
    })?;
    Ok((StatusCode::ACCEPTED, Json(json!({ "job_id": view.id, "query": view.query, "status": view.status })))
        .into_response())
}

async fn list_queries(State(jobs): State<AppState>) -> Json<Json_> {
    Json(json!(jobs.list()))
}

async fn query_status(State(jobs): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(jobs.get_status(&id)?).into_response())
}

async fn delete_query(State(jobs): State<AppState>, Path(id): Path<String>) -> ApiResult<StatusCode> {
    jobs.delete(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

#[derive(Deserialize)]
struct RowsParams {
    cursor: Option<String>,
    limit: Option<usize>,
}

pub const DEFAULT_PAGE_LIMIT: usize = 100;

async fn query_rows(
    State(jobs): State<AppState>,
    Path(id): Path<String>,
    params: Result<Query<RowsParams>, QueryRejection>,
) -> ApiResult<Json<Json_>> {
    let Query(params) = params?;
    let cursor = params.cursor.filter(|c| !c.is_empty());
    let page = jobs.fetch_page(&id, cursor.as_deref(), params.limit.unwrap_or(DEFAULT_PAGE_LIMIT))?;
    let rows: Vec<Vec<Json_>> = page.rows.iter().map(|r| r.iter().map(|v| v.to_json()).collect()).collect();
    let mut body = json!({ "schema": page.schema, "rows": rows });
    if let Some(next) = page.next_cursor {
        body["next_cursor"] = json!(next);
    }
    Ok(Json(body))
}

#[derive(Deserialize)]
struct ChartParams {
    kind: Option<String>,
    x: String,
    #[serde(default)]
    series: String,
}

async fn query_chart(
    State(jobs): State<AppState>,
    Path(id): Path<String>,
    params: Result<Query<ChartParams>, QueryRejection>,
) -> ApiResult<Response> {
    let Query(params) = params?;
    let spec = ChartSpec {
        kind: params.kind.as_deref().unwrap_or("line").parse()?,
        x_column: params.x,
        series_columns: params.series.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect(),
    };
    Ok(Json(jobs.chart_data(&id, &spec)?).into_response())
}

/// The API routes, plus static files from `static_dir` for everything else.
pub fn router(jobs: Arc<JobManager>, static_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/api/tables", get(list_tables).post(create_table))
        .route("/api/tables/{name}", axum::routing::delete(drop_table))
        .route("/api/tables/{name}/schema", get(table_schema))
        .route("/api/modules", get(list_modules))
        .route("/api/queries", get(list_queries).post(submit_query))
        .route("/api/queries/{id}", get(query_status).delete(delete_query))
        .route("/api/queries/{id}/rows", get(query_rows))
        .route("/api/queries/{id}/chart", get(query_chart))
        .with_state(jobs);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

fn engine_for(config: &ServiceConfig) -> crate::error::Result<Engine> {
    match &config.data_dir {
        Some(dir) => Engine::open(dir),
        None => Ok(Engine::new()),
    }
}

/// Runs the service until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> crate::error::Result<()> {
    let engine = Arc::new(engine_for(&config)?);
    let jobs = Arc::new(JobManager::new(engine, &config));
    let listener = tokio::net::TcpListener::bind(config.bind).await?;
    tracing::info!(addr = %listener.local_addr()?, workers = config.workers, "listening");
    axum::serve(listener, router(jobs, config.static_dir.clone()))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

/// A service running on a background thread; stops when dropped.
pub struct RunningService {
    addr: SocketAddr,
    jobs: Arc<JobManager>,
    shutdown: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<std::io::Result<()>>>,
}

impl RunningService {
    /// Binds `config.bind` (port 0 picks a free port) and serves `engine`.
    pub fn start(engine: Arc<Engine>, config: &ServiceConfig) -> crate::error::Result<Self> {
        let listener = std::net::TcpListener::bind(config.bind)?;
        listener.set_nonblocking(true)?;
        let addr = listener.local_addr()?;
        let jobs = Arc::new(JobManager::new(engine, config));
        let app = router(jobs.clone(), config.static_dir.clone());
        let (tx, rx) = oneshot::channel::<()>();
        let thread = std::thread::Builder::new().name("bx-http".into()).spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread().worker_threads(2).enable_all().build()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener)?;
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await
            })
        })?;
        Ok(RunningService { addr, jobs, shutdown: Some(tx), thread: Some(thread) })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// `http://host:port`
    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn jobs(&self) -> &Arc<JobManager> {
        &self.jobs
    }
}

impl Drop for RunningService {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}
