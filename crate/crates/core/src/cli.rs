//! The `bx` command line. Every subcommand goes through [`Engine`], the same
//! path the HTTP service uses.

use std::ffi::OsString;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::time::Duration;

use chrono::{Days, NaiveDate};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analytics::{percent_error, select_history_dates, HistorySelector, Technique};
use crate::engine::{Engine, IngestRequest};
use crate::error::{Error, Result};
use crate::query::{Filter, FilterOp, ResultSet, StructuredRequest};
use crate::service::ServiceConfig;
use crate::synth::{gen_synthetic_buzz, gen_synthetic_ngrams, BuzzConfig, NGramConfig};
use crate::value::{parse_date, DataType, Schema, Value};

#[derive(Debug, Parser)]
#[command(name = "bx", version, about = "Query, analyse and serve tabular data")]
pub struct Cli {
    /// Directory holding table snapshots.
    #[arg(long, global = true, env = "BX_DATA_DIR", default_value = "bx-data")]
    pub data_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a delimited text file as a new table.
    Ingest(IngestArgs),
    /// Run a query.
    Query(QueryArgs),
    /// Predict a product's buzz score with EP or RP.
    Predict(PredictArgs),
    /// Event analysis of a phrase over an n-gram table.
    Ngram(NgramArgs),
    /// Generate synthetic datasets.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// List tables.
    Tables,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub table: String,
    /// Field delimiter: a single character or `tab`.
    #[arg(long, default_value = ",")]
    pub delimiter: String,
    /// Schema sidecar (`name<TAB>TYPE` per line); inferred when omitted.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// The first line is a header.
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long, conflicts_with = "sql_file", required_unless_present = "sql_file")]
    pub sql: Option<String>,
    #[arg(long)]
    pub sql_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub table: String,
    #[arg(long)]
    pub product: String,
    #[arg(long, default_value = "ep")]
    pub technique: String,
    /// `days:n` or `weeks:n`.
    #[arg(long)]
    pub selector: String,
    /// Day to predict, or first day of the week with `--weekly`.
    #[arg(long)]
    pub target: String,
    #[arg(long)]
    pub weekly: bool,
    #[arg(long, value_enum, default_value = "table")]
    pub format: OutputFormat,
}

#[derive(Debug, Args)]
pub struct NgramArgs {
    #[arg(long)]
    pub table: String,
    #[arg(long)]
    pub phrase: String,
    #[arg(long)]
    pub case_fold: bool,
}

#[derive(Debug, Subcommand)]
pub enum GenCommand {
    /// Hourly buzz scores, one record per product per hour.
    Buzz {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 122)]
        days: u32,
        /// Comma-separated product names.
        #[arg(long, value_delimiter = ',')]
        products: Option<Vec<String>>,
    },
    /// A 5-gram corpus with a planted phrase.
    Ngrams {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        records: usize,
        #[arg(long, default_value = "bird flu")]
        phrase: String,
        #[arg(long, default_value_t = 50)]
        planted_count: usize,
    },
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "BX_HOST", default_value = "127.0.0.1")]
    pub host: IpAddr,
    #[arg(long, env = "BX_PORT", default_value_t = 8080)]
    pub port: u16,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, env = "BX_WORKERS")]
    pub workers: Option<usize>,
    #[arg(long, env = "BX_QUEUE_CAPACITY", default_value_t = 256)]
    pub queue_capacity: usize,
    /// Seconds a finished job's result is kept.
    #[arg(long, env = "BX_RESULT_TTL", default_value_t = 3600)]
    pub result_ttl: u64,
    /// Static files served under `/`.
    #[arg(long, env = "BX_STATIC_DIR")]
    pub static_dir: Option<PathBuf>,
}

impl ServeArgs {
    pub fn config(&self, data_dir: PathBuf) -> ServiceConfig {
        let defaults = ServiceConfig::default();
        ServiceConfig {
            bind: SocketAddr::new(self.host, self.port),
            data_dir: Some(data_dir),
            workers: self.workers.unwrap_or(defaults.workers),
            queue_capacity: self.queue_capacity,
            result_ttl: Duration::from_secs(self.result_ttl),
            static_dir: self.static_dir.clone(),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the exit code: 0 success, 1 runtime failure, 2 usage error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    match execute(cli, out) {
        Ok(()) => 0,
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
        Err(e) => {
            let _ = writeln!(err, "error[{}]: {e}", e.code());
            1
        }
    }
}

pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Gen(GenCommand::Buzz { out: path, seed, days, products }) => {
            let mut config = BuzzConfig::new(seed, days);
            if let Some(p) = products {
                config = config.products(&p);
            }
            gen_synthetic_buzz(&config, &path)?;
            writeln!(out, "wrote {}", path.display())?;
        }
        Command::Gen(GenCommand::Ngrams { out: path, seed, records, phrase, planted_count }) => {
            gen_synthetic_ngrams(&NGramConfig::new(seed, records, &phrase, planted_count), &path)?;
            writeln!(out, "wrote {}", path.display())?;
        }
        Command::Serve(args) => {
            let config = args.config(cli.data_dir);
            let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
            rt.block_on(crate::service::serve(config))?;
        }
        Command::Ingest(args) => {
            let engine = Engine::open(&cli.data_dir)?;
            let mut req = IngestRequest::csv_file(&args.table, &args.input)
                .header(args.header)
                .delimiter(crate::engine::parse_delimiter(&args.delimiter)?);
            if let Some(p) = &args.schema {
                req = req.schema(Schema::from_sidecar(&std::fs::read_to_string(p)?)?);
            }
            let s = engine.ingest(&req)?;
            writeln!(out, "loaded {} rows into {}", s.rows_loaded, s.table)?;
        }
        Command::Tables => {
            let engine = Engine::open(&cli.data_dir)?;
            for t in engine.catalog().list_tables() {
                let cols: Vec<String> = t.schema.fields().iter().map(|f| format!("{} {}", f.name, f.data_type.as_str())).collect();
                writeln!(out, "{}\t{}\t{}", t.name, t.row_count, cols.join(", "))?;
            }
        }
        Command::Query(args) => {
            let text = match (args.sql, args.sql_file) {
                (Some(s), _) => s,
                (None, Some(f)) => std::fs::read_to_string(f)?,
                (None, None) => unreachable!("clap requires one of --sql and --sql-file"),
            };
            let engine = Engine::open(&cli.data_dir)?;
            write_result(&engine.query(&text)?, args.format, out)?;
        }
        Command::Predict(args) => predict(&Engine::open(&cli.data_dir)?, &args, out)?,
        Command::Ngram(args) => ngram(&Engine::open(&cli.data_dir)?, &args, out)?,
    }
    Ok(())
}

/// The structured request `bx predict` runs: the prediction module over one
/// product's scores, restricted to the dates the selector can reach.
pub fn prediction_request(args: &PredictArgs) -> Result<StructuredRequest> {
    let bad_date = || Error::InvalidRequest(format!("target `{}` is not a YYYY-MM-DD date", args.target));
    let target: NaiveDate = parse_date(&args.target).ok_or_else(bad_date)?;
    let selector: HistorySelector = args.selector.parse()?;
    let technique: Technique = args.technique.parse()?;
    let last_target = if args.weekly { target.checked_add_days(Days::new(6)).ok_or_else(bad_date)? } else { target };
    let first = select_history_dates(selector, target).first().copied().unwrap_or(target);
    let last = last_target.pred_opt().ok_or_else(bad_date)?;
    let module = if args.weekly { "weekly_prediction" } else { "daily_prediction" };
    Ok(StructuredRequest {
        table: args.table.clone(),
        columns: vec!["date".into(), "time".into(), "buzz_score".into()],
        module: Some(module.into()),
        params: [
            ("technique".to_string(), technique.to_string()),
            ("selector".to_string(), selector.to_string()),
            ("target".to_string(), target.to_string()),
        ]
        .into_iter()
        .collect(),
        filters: vec![
            Filter::new("product", FilterOp::Eq, args.product.as_str()),
            Filter::new("date", FilterOp::Ge, first.to_string().as_str()),
            Filter::new("date", FilterOp::Le, last.to_string().as_str()),
        ],
    })
}

fn predict(engine: &Engine, args: &PredictArgs, out: &mut dyn Write) -> Result<()> {
    let request = prediction_request(args)?;
    let predicted = engine.query_request(&request)?;
    // Where the table also has the actual scores, report the error.
    let dates: Vec<NaiveDate> = predicted.rows().iter().filter_map(|r| r[0].as_date()).collect();
    let (Some(first), Some(last)) = (dates.first(), dates.last()) else {
        return write_result(&predicted, args.format, out);
    };
    let actual_req = StructuredRequest {
        table: args.table.clone(),
        columns: vec!["date".into(), "time".into(), "buzz_score".into()],
        module: Some("daily_analysis".into()),
        params: Default::default(),
        filters: vec![
            Filter::new("product", FilterOp::Eq, args.product.as_str()),
            Filter::new("date", FilterOp::Ge, first.to_string().as_str()),
            Filter::new("date", FilterOp::Le, last.to_string().as_str()),
        ],
    };
    let actual = engine.query_request(&actual_req)?;
    let actual_by_date: std::collections::BTreeMap<NaiveDate, f64> = actual
        .rows()
        .iter()
        .filter_map(|r| Some((r[0].as_date()?, r[1].as_f64()?)))
        .collect();
    let mut fields = predicted.schema().fields().to_vec();
    fields.push(crate::value::Field::new("actual", DataType::Float));
    fields.push(crate::value::Field::new("error_percent", DataType::Float));
    let rows = predicted
        .rows()
        .iter()
        .map(|r| {
            let mut row = r.clone();
            let actual = r[0].as_date().and_then(|d| actual_by_date.get(&d).copied());
            let err = actual.zip(r[3].as_f64()).and_then(|(a, p)| percent_error(a, p).ok());
            row.push(actual.map_or(Value::Null, Value::Float));
            row.push(err.map_or(Value::Null, Value::Float));
            row
        })
        .collect();
    write_result(&ResultSet::new(Schema::new(fields)?, rows), args.format, out)
}

/// The query `bx ngram` runs: every TEXT column as a token, then the
/// `frequency` column.
pub fn ngram_request(engine: &Engine, args: &NgramArgs) -> Result<StructuredRequest> {
    let table = engine.catalog().get(&args.table)?;
    let schema = table.schema();
    let mut columns: Vec<String> =
        schema.fields().iter().filter(|f| f.data_type == DataType::Text).map(|f| f.name.clone()).collect();
    let freq = schema
        .fields()
        .iter()
        .find(|f| f.name == "frequency")
        .or_else(|| schema.fields().iter().rev().find(|f| f.data_type == DataType::Int))
        .ok_or_else(|| Error::InvalidRequest(format!("table `{}` has no frequency column", args.table)))?;
    columns.push(freq.name.clone());
    let mut params: crate::query::Params = [("phrase".to_string(), args.phrase.clone())].into_iter().collect();
    if args.case_fold {
        params.insert("case_fold".into(), "on".into());
    }
    Ok(StructuredRequest {
        table: args.table.clone(),
        columns,
        module: Some("ngram_analysis".into()),
        params,
        filters: Vec::new(),
    })
}

fn ngram(engine: &Engine, args: &NgramArgs, out: &mut dyn Write) -> Result<()> {
    let rs = engine.query_request(&ngram_request(engine, args)?)?;
    let mut related = 0i64;
    let mut corpus = 0i64;
    writeln!(out, "pattern\tdistinct_count\ttotal_frequency")?;
    for r in rs.rows() {
        let count = match r[2] {
            Value::Int(c) => c,
            _ => 0,
        };
        related += count;
        if let Value::Int(c) = r[3] {
            corpus = c;
        }
        writeln!(out, "{}\t{}\t{}", r[0], count, r[1])?;
    }
    let share = crate::analytics::share_percent(related as u64, corpus as u64);
    writeln!(out, "related_distinct={related} corpus_distinct={corpus} share_percent={share:.4}")?;
    Ok(())
}

pub fn write_result(rs: &ResultSet, format: OutputFormat, out: &mut dyn Write) -> Result<()> {
    let names: Vec<&str> = rs.schema().names().collect();
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&names)?;
            for r in rs.rows() {
                w.write_record(r.iter().map(|v| v.to_csv_field()))?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            let rows: Vec<serde_json::Map<String, serde_json::Value>> = rs
                .rows()
                .iter()
                .map(|r| names.iter().map(|n| n.to_string()).zip(r.iter().map(|v| v.to_json())).collect())
                .collect();
            serde_json::to_writer_pretty(&mut *out, &rows).map_err(std::io::Error::other)?;
            writeln!(out)?;
        }
        OutputFormat::Table => {
            let cells: Vec<Vec<String>> = rs.rows().iter().map(|r| r.iter().map(|v| v.to_csv_field()).collect()).collect();
            let widths: Vec<usize> = names
                .iter()
                .enumerate()
                .map(|(i, n)| cells.iter().map(|r| r[i].chars().count()).chain([n.len()]).max().unwrap_or(0))
                .collect();
            let line = |vals: &[&str]| -> String {
                let padded: Vec<String> = vals.iter().zip(&widths).map(|(v, w)| format!("{v:<w$}")).collect();
                padded.join("  ").trim_end().to_string()
            };
            writeln!(out, "{}", line(&names))?;
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            writeln!(out, "{}", line(&rule.iter().map(String::as_str).collect::<Vec<_>>()))?;
            for r in &cells {
                writeln!(out, "{}", line(&r.iter().map(String::as_str).collect::<Vec<_>>()))?;
            }
            writeln!(out, "({} rows)", cells.len())?;
        }
    }
    Ok(())
}
