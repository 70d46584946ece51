use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use crossbeam_channel::{bounded, Sender, TrySendError};
use parking_lot::{Mutex, RwLock};
use serde::{Deserialize, Serialize};

use crate::engine::{Engine, QueryInput};
use crate::error::{Error, Result};
use crate::query::{PreparedQuery, ResultSet};
use crate::service::ServiceConfig;
use crate::storage::Page;
use crate::value::DataType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Queued,
    Running,
    Succeeded,
    Failed,
}

impl JobStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            JobStatus::Queued => "queued",
            JobStatus::Running => "running",
            JobStatus::Succeeded => "succeeded",
            JobStatus::Failed => "failed",
        }
    }

    pub fn is_finished(self) -> bool {
        matches!(self, JobStatus::Succeeded | JobStatus::Failed)
    }
}

/// Snapshot of a job as reported to clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobView {
    pub id: String,
    /// Canonical text of the submitted query.
    pub query: String,
    pub status: JobStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_count: Option<usize>,
}

struct JobState {
    status: JobStatus,
    error: Option<String>,
    result: Option<Arc<ResultSet>>,
    finished_at: Option<Instant>,
}

struct Job {
    id: String,
    query: String,
    state: Mutex<JobState>,
}

impl Job {
    fn view(&self) -> JobView {
        let s = self.state.lock();
        JobView {
            id: self.id.clone(),
            query: self.query.clone(),
            status: s.status,
            error: s.error.clone(),
            row_count: s.result.as_ref().map(|r| r.len()),
        }
    }

    /// Moves forward only; a backwards transition is ignored.
    fn advance(&self, status: JobStatus, outcome: Option<std::result::Result<ResultSet, String>>) {
        let mut s = self.state.lock();
        if status <= s.status {
            return;
        }
        s.status = status;
        match outcome {
            Some(Ok(rs)) => s.result = Some(Arc::new(rs)),
            Some(Err(e)) => s.error = Some(e),
            None => {}
        }
        if status.is_finished() {
            s.finished_at = Some(Instant::now());
        }
    }
}

struct Task {
    job: Arc<Job>,
    prepared: PreparedQuery,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    Line,
    Bar,
    GroupedBar,
}

impl std::str::FromStr for ChartKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line" => Ok(ChartKind::Line),
            "bar" => Ok(ChartKind::Bar),
            "grouped_bar" => Ok(ChartKind::GroupedBar),
            other => Err(Error::InvalidRequest(format!("chart kind must be line, bar or grouped_bar, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartSpec {
    pub kind: ChartKind,
    pub x_column: String,
    pub series_columns: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSeries {
    pub name: String,
    /// `None` where the cell is NULL.
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartData {
    pub kind: ChartKind,
    pub x: Vec<serde_json::Value>,
    pub series: Vec<ChartSeries>,
}

/// Shapes a result set into chart series.
pub fn chart_data(result: &ResultSet, spec: &ChartSpec) -> Result<ChartData> {
    let schema = result.schema();
    let col = |name: &str| {
        schema
            .index_of(name)
            .ok_or_else(|| Error::UnknownColumn { table: "result".into(), column: name.to_string() })
    };
    let xi = col(&spec.x_column)?;
    let mut series = Vec::with_capacity(spec.series_columns.len());
    for name in &spec.series_columns {
        let i = col(name)?;
        let ty: DataType = schema.fields()[i].data_type;
        if !ty.is_numeric() {
            return Err(Error::TypeMismatch(format!("series column `{name}` is {}, not numeric", ty.as_str())));
        }
        series.push(ChartSeries { name: name.clone(), values: result.rows().iter().map(|r| r[i].as_f64()).collect() });
    }
    let x = result.rows().iter().map(|r| r[xi].to_json()).collect();
    Ok(ChartData { kind: spec.kind, x, series })
}

/// Asynchronous query jobs on a bounded worker pool.
///
/// Submission validates synchronously and enqueues; a full queue rejects.
/// Finished jobs are forgotten after `result_ttl` or an explicit delete.
pub struct JobManager {
    engine: Arc<Engine>,
    jobs: Arc<RwLock<HashMap<String, Arc<Job>>>>,
    sender: Option<Sender<Task>>,
    workers: Vec<JoinHandle<()>>,
    result_ttl: Duration,
    id_prefix: u32,
    next_id: AtomicU64,
}

impl JobManager {
    pub fn new(engine: Arc<Engine>, config: &ServiceConfig) -> Self {
        let (sender, receiver) = bounded::<Task>(config.queue_capacity);
        let workers = (0..config.workers.max(1))
            .map(|i| {
                let rx = receiver.clone();
                std::thread::Builder::new()
                    .name(format!("bx-worker-{i}"))
                    .spawn(move || {
                        for task in rx {
                            run_task(task);
                        }
                    })
                    .expect("spawn worker thread")
            })
            .collect();
        JobManager {
            engine,
            jobs: Arc::default(),
            sender: Some(sender),
            workers,
            result_ttl: config.result_ttl,
            id_prefix: rand::random(),
            next_id: AtomicU64::new(1),
        }
    }

    pub fn engine(&self) -> &Arc<Engine> {
        &self.engine
    }

    pub fn submit(&self, input: &QueryInput) -> Result<JobView> {
        self.purge_expired();
        let prepared = self.engine.prepare(input)?;
        let n = self.next_id.fetch_add(1, Ordering::Relaxed);
        let job = Arc::new(Job {
            id: format!("q{:08x}{n:06x}", self.id_prefix),
            query: prepared.ast().render(),
            state: Mutex::new(JobState { status: JobStatus::Queued, error: None, result: None, finished_at: None }),
        });
        self.jobs.write().insert(job.id.clone(), job.clone());
        let view = job.view();
        let sender = self.sender.as_ref().expect("job manager is running");
        match sender.try_send(Task { job, prepared }) {
            Ok(()) => {
                tracing::debug!(job = %view.id, query = %view.query, "job queued");
                Ok(view)
            }
            Err(TrySendError::Full(task) | TrySendError::Disconnected(task)) => {
                self.jobs.write().remove(&task.job.id);
                Err(Error::QueueFull)
            }
        }
    }

    fn job(&self, id: &str) -> Result<Arc<Job>> {
        self.jobs.read().get(id).cloned().ok_or_else(|| Error::JobNotFound(id.to_string()))
    }

    pub fn get_status(&self, id: &str) -> Result<JobView> {
        self.purge_expired();
        Ok(self.job(id)?.view())
    }

    /// The result of a succeeded job.
    pub fn result(&self, id: &str) -> Result<Arc<ResultSet>> {
        let job = self.job(id)?;
        let s = job.state.lock();
        match &s.result {
            Some(r) => Ok(r.clone()),
            None => Err(Error::JobNotReady { id: id.to_string(), status: s.status.as_str().into(), message: s.error.clone() }),
        }
    }

    pub fn fetch_page(&self, id: &str, cursor: Option<&str>, limit: usize) -> Result<Page> {
        self.result(id)?.page(cursor, limit)
    }

    pub fn chart_data(&self, id: &str, spec: &ChartSpec) -> Result<ChartData> {
        chart_data(&*self.result(id)?, spec)
    }

    /// Blocks until the job finishes or `timeout` elapses.
    pub fn wait(&self, id: &str, timeout: Duration) -> Result<JobView> {
        let deadline = Instant::now() + timeout;
        loop {
            let view = self.job(id)?.view();
            if view.status.is_finished() || Instant::now() >= deadline {
                return Ok(view);
            }
            std::thread::sleep(Duration::from_millis(2));
        }
    }

    /// Forgets a job; a queued or running job still completes, unobserved.
    pub fn delete(&self, id: &str) -> Result<()> {
        self.jobs.write().remove(id).map(|_| ()).ok_or_else(|| Error::JobNotFound(id.to_string()))
    }

    pub fn list(&self) -> Vec<JobView> {
        let mut v: Vec<JobView> = self.jobs.read().values().map(|j| j.view()).collect();
        v.sort_by(|a, b| a.id.cmp(&b.id));
        v
    }

    pub fn purge_expired(&self) {
        let ttl = self.result_ttl;
        let expired = |j: &Arc<Job>| j.state.lock().finished_at.is_some_and(|t| t.elapsed() >= ttl);
        if self.jobs.read().values().any(expired) {
            self.jobs.write().retain(|_, j| !expired(j));
        }
    }
}

fn run_task(task: Task) {
    let Task { job, prepared } = task;
    job.advance(JobStatus::Running, None);
    let outcome = match catch_unwind(AssertUnwindSafe(|| prepared.execute())) {
        Ok(Ok(rs)) => Ok(rs),
        Ok(Err(e)) => Err(format!("{}: {e}", e.code())),
        Err(_) => Err("module_failed: query execution panicked".to_string()),
    };
    let status = if outcome.is_ok() { JobStatus::Succeeded } else { JobStatus::Failed };
    match &outcome {
        Ok(rs) => tracing::debug!(job = %job.id, rows = rs.len(), "job succeeded"),
        Err(e) => tracing::warn!(job = %job.id, error = %e, "job failed"),
    }
    job.advance(status, Some(outcome));
}

impl Drop for JobManager {
    fn drop(&mut self) {
        drop(self.sender.take());
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::IngestRequest;
    use crate::query::Params;
    use crate::repository::{Arity, ModuleDescriptor, ModuleError, OutputSchema, TransformModule};
    use crate::value::{Row, Schema};

    fn engine() -> Arc<Engine> {
        let e = Engine::new();
        e.ingest(&IngestRequest::inline("t", "k,v,s\n1,2.5,a\n2,,b\n3,4.0,c\n4,1.0,d\n5,3.0,e\n")).unwrap();
        Arc::new(e)
    }

    fn config(workers: usize, queue: usize) -> ServiceConfig {
        ServiceConfig { workers, queue_capacity: queue, ..ServiceConfig::default() }
    }

    #[test]
    fn submit_wait_page() {
        let m = JobManager::new(engine(), &config(2, 8));
        let v = m.submit(&QueryInput::text("select * from t")).unwrap();
        assert_eq!(v.query, "SELECT * FROM t");
        assert!(matches!(v.status, JobStatus::Queued | JobStatus::Running));
        let done = m.wait(&v.id, Duration::from_secs(5)).unwrap();
        assert_eq!(done.status, JobStatus::Succeeded);
        assert_eq!(done.row_count, Some(5));
        let mut rows = 0;
        let mut cursor = None;
        let mut pages = 0;
        loop {
            let p = m.fetch_page(&v.id, cursor.as_deref(), 2).unwrap();
            rows += p.rows.len();
            pages += 1;
            cursor = p.next_cursor;
            if cursor.is_none() {
                break;
            }
        }
        assert_eq!((rows, pages), (5, 3));
    }

    #[test]
    fn sync_errors_create_no_job() {
        let m = JobManager::new(engine(), &config(1, 8));
        assert_eq!(m.submit(&QueryInput::text("SELECT * FROM nope")).unwrap_err().code(), "unknown_table");
        assert!(m.list().is_empty());
        assert_eq!(m.get_status("nope").unwrap_err().code(), "job_not_found");
    }

    #[test]
    fn chart_shapes_and_gaps() {
        let m = JobManager::new(engine(), &config(1, 8));
        let id = m.submit(&QueryInput::text("SELECT k, v, s FROM t")).unwrap().id;
        m.wait(&id, Duration::from_secs(5)).unwrap();
        let spec = ChartSpec { kind: ChartKind::Line, x_column: "k".into(), series_columns: vec!["v".into()] };
        let c = m.chart_data(&id, &spec).unwrap();
        assert_eq!(c.x.len(), 5);
        assert_eq!(c.series[0].values[1], None);
        let bad = ChartSpec { series_columns: vec!["s".into()], ..spec.clone() };
        assert_eq!(m.chart_data(&id, &bad).unwrap_err().code(), "type_mismatch");
        let missing = ChartSpec { x_column: "zz".into(), ..spec };
        assert_eq!(m.chart_data(&id, &missing).unwrap_err().code(), "unknown_column");
    }

    struct Gate(Schema, crossbeam_channel::Receiver<()>);

    impl TransformModule for Gate {
        fn output_schema(&self) -> &Schema {
            &self.0
        }
        fn push(&mut self, _: Row) -> std::result::Result<Vec<Row>, ModuleError> {
            Ok(vec![])
        }
        fn close(&mut self) -> std::result::Result<Vec<Row>, ModuleError> {
            let _ = self.1.recv_timeout(Duration::from_secs(10));
            Err(ModuleError::new("gate closed"))
        }
    }

    #[test]
    fn full_queue_rejects_and_failures_are_reported() {
        let e = engine();
        let (open, gate) = crossbeam_channel::unbounded::<()>();
        let out = Schema::of(&[("x", DataType::Int)]).unwrap();
        e.repository()
            .register(
                ModuleDescriptor::new("gate", Arity::Any, OutputSchema::Fixed(out.clone())),
                move |_: &Params, _: &Schema| Ok(Box::new(Gate(out.clone(), gate.clone())) as Box<dyn TransformModule>),
            )
            .unwrap();
        let m = JobManager::new(e, &config(1, 1));
        let q = QueryInput::text("SELECT TRANSFORM(k) USING 'gate' FROM t");
        let first = m.submit(&q).unwrap();
        // Wait for the worker to pick it up so the queue slot frees.
        while m.get_status(&first.id).unwrap().status == JobStatus::Queued {
            std::thread::sleep(Duration::from_millis(1));
        }
        let second = m.submit(&q).unwrap();
        assert_eq!(m.submit(&q).unwrap_err().code(), "queue_full");
        assert_eq!(m.engine().catalog().drop_table("t").unwrap_err().code(), "table_in_use");
        assert_eq!(m.fetch_page(&first.id, None, 10).unwrap_err().code(), "job_not_ready");
        open.send(()).unwrap();
        open.send(()).unwrap();
        let v = m.wait(&second.id, Duration::from_secs(10)).unwrap();
        assert_eq!(v.status, JobStatus::Failed);
        assert!(v.error.unwrap().contains("gate closed"));
        let err = m.fetch_page(&second.id, None, 10).unwrap_err();
        assert_eq!(err.code(), "job_not_ready");
        assert!(err.to_string().contains("gate closed"));
    }

    #[test]
    fn ttl_and_delete() {
        let m = JobManager::new(engine(), &ServiceConfig { result_ttl: Duration::from_millis(0), ..config(1, 4) });
        let id = m.submit(&QueryInput::text("SELECT k FROM t")).unwrap().id;
        while !m.job(&id).unwrap().view().status.is_finished() {
            std::thread::sleep(Duration::from_millis(1));
        }
        assert_eq!(m.get_status(&id).unwrap_err().code(), "job_not_found");
        let m = JobManager::new(engine(), &config(1, 4));
        let id = m.submit(&QueryInput::text("SELECT k FROM t")).unwrap().id;
        m.delete(&id).unwrap();
        assert_eq!(m.delete(&id).unwrap_err().code(), "job_not_found");
    }
}
