//! Acceptance suite. Prints one `PASS` or `FAIL` line per criterion, then
//! fails if any criterion failed.

mod common;

use std::collections::BTreeMap;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, Barrier};
use std::time::{Duration, Instant};

use bigexcel::analytics::*;
use bigexcel::engine::IngestRequest;
use bigexcel::query::{
    construct, parse, render, BoundPredicate, CmpOp, Filter, FilterOp, Params, Predicate, StructuredRequest,
};
use bigexcel::repository::{
    run_pipeline, Aggregate, AggregateKind, Arity, ModuleDescriptor, ModuleError, OutputSchema, TransformModule,
};
use bigexcel::service::{RunningService, ServiceConfig};
use bigexcel::storage::{Catalog, Table};
use bigexcel::{DataType, Engine, Row, Schema, Value};
use chrono::{Days, NaiveDate, NaiveTime};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

/// Relative error on the same scale `rel_close` uses.
fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

struct Suite {
    failed: Vec<&'static str>,
}

impl Suite {
    fn run(&mut self, name: &'static str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let outcome = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(o) => o,
            Err(p) => Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into())),
        };
        let elapsed = start.elapsed();
        let outcome = match (outcome, budget) {
            (Ok(d), Some(b)) if elapsed > b => Err(format!("{d}; took {elapsed:.2?}, budget {b:?}")),
            (o, _) => o,
        };
        let line = match &outcome {
            Ok(d) => format!("PASS {name} ({d}; {elapsed:.2?})\n"),
            Err(d) => format!("FAIL {name} ({d}; {elapsed:.2?})\n"),
        };
        // Written past the test harness's capture so the lines always show.
        let _ = std::io::stderr().lock().write_all(line.as_bytes());
        if outcome.is_err() {
            self.failed.push(name);
        }
    }
}

#[test]
fn acceptance() {
    let mut s = Suite { failed: Vec::new() };
    s.run("query corpus", Some(Duration::from_secs(1)), query_corpus);
    s.run("published arithmetic", None, published_arithmetic);
    s.run("oracle equivalence", Some(Duration::from_secs(30)), oracle_equivalence);
    s.run("rp exactness", None, rp_exactness);
    s.run("planted truth end-to-end", Some(Duration::from_secs(60)), planted_truth);
    s.run("pagination partition", None, pagination_partition);
    s.run("concurrency", Some(Duration::from_secs(30)), concurrency);
    s.run("error-code contract", None, error_codes);
    assert!(s.failed.is_empty(), "failed criteria: {:?}", s.failed);
}

fn query_corpus() -> Outcome {
    let engine = fixture_engine();
    for q in [HOURLY_QUERY, DAILY_QUERY, PREDICTION_QUERY, NGRAM_QUERY] {
        let ast = parse(q).map_err(|e| format!("parse: {e}"))?;
        engine.prepare_ast(&ast).map_err(|e| format!("validate: {e}"))?;
        let again = parse(&render(&ast)).map_err(|e| format!("reparse: {e}"))?;
        check(again == ast, || format!("round trip changed `{}`", render(&ast)))?;
    }
    let request = StructuredRequest {
        table: "Yahoo_Buzz_Scores".into(),
        columns: vec!["date".into(), "time".into(), "buzz_score".into()],
        module: Some("hourly_analysis".into()),
        params: Params::default(),
        filters: vec![
            Filter::new("product", FilterOp::Eq, "EBOOKS"),
            Filter::new("date", FilterOp::Ge, "2005-05-23"),
            Filter::new("date", FilterOp::Le, "2005-05-27"),
        ],
    };
    let built = construct(&request).map_err(|e| e.to_string())?.render();
    check(normalize_query(&built) == normalize_query(HOURLY_QUERY), || format!("constructed `{built}`"))?;
    Ok("4 queries parse, validate, round-trip; constructed hourly query matches".into())
}

fn published_arithmetic() -> Outcome {
    let share = share_percent(148_934, 29_570_136);
    let share_ok = (share - 0.5037).abs() <= 0.00005;
    let target = date("2005-07-23");
    let dates = select_history_dates(HistorySelector::PrecedingDays(14), target);
    let want: Vec<NaiveDate> = date("2005-07-08").iter_days().take_while(|d| *d < target).collect();
    let (first, last) = (dates[0], dates[dates.len() - 1]);
    let detail = format!(
        "share {share:.6} {} 0.5037 +-0.00005; PrecedingDays(14) before {target} = {first}..{last} ({} days), \
         expected 2005-07-08..2005-07-22 ({} days)",
        if share_ok { "within" } else { "outside" },
        dates.len(),
        want.len()
    );
    if share_ok && dates == want { Ok(detail) } else { Err(detail) }
}

fn random_records(rng: &mut ChaCha8Rng, max: usize) -> Vec<(NaiveDate, NaiveTime, f64)> {
    let n = rng.random_range(1..=max);
    (0..n)
        .map(|_| {
            let d = date("2005-04-01").checked_add_days(Days::new(rng.random_range(0..20))).unwrap();
            let t = NaiveTime::from_hms_opt(rng.random_range(0..24), rng.random_range(0..60), rng.random_range(0..60))
                .unwrap();
            (d, t, rng.random_range(-100.0..1000.0))
        })
        .collect()
}

fn to_buzz(rs: &[(NaiveDate, NaiveTime, f64)]) -> Vec<BuzzRecord> {
    rs.iter().map(|(d, t, s)| BuzzRecord { date: *d, time: *t, product: "P".into(), buzz_score: *s }).collect()
}

fn oracle_equivalence() -> Outcome {
    const INSTANCES: usize = 100;
    const TOL: f64 = 1e-9;
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce);
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    let mut note = |name: &'static str, e: f64| {
        let w = worst.entry(name).or_insert(0.0);
        *w = w.max(e);
    };
    for _ in 0..INSTANCES {
        let rs = random_records(&mut rng, 10_000);
        let got = hourly_aggregate(&to_buzz(&rs));
        let want = oracle_hourly(&rs);
        check(got.len() == want.len(), || "hourly group count differs".into())?;
        for (g, w) in got.iter().zip(&want) {
            check((g.date, g.hour) == (w.0, w.1), || format!("hourly key {:?} vs {:?}", (g.date, g.hour), w))?;
            note("hourly_aggregate", rel_err(g.mean, w.2));
        }

        let rs = random_records(&mut rng, 10_000);
        let got = daily_aggregate(&to_buzz(&rs));
        let want = oracle_daily(&rs);
        check(got.len() == want.len(), || "daily group count differs".into())?;
        for (g, w) in got.iter().zip(&want) {
            check(g.0 == w.0, || "daily key differs".into())?;
            note("daily_aggregate", rel_err(g.1, w.1));
        }

        let xs: Vec<f64> = (0..rng.random_range(1..=10_000)).map(|_| rng.random_range(-1e3..1e3)).collect();
        note("ep_predict", rel_err(ep_predict(&xs).map_err(|e| e.to_string())?, mean(&xs)));

        let n = rng.random_range(2..=400);
        let mut x = rng.random_range(12_000..13_000);
        let points: Vec<SeriesPoint> = (0..n)
            .map(|_| {
                x += rng.random_range(1..8);
                SeriesPoint { x, y: rng.random_range(-100.0..100.0) }
            })
            .collect();
        let target = x + rng.random_range(1..30);
        let got = rp_predict(&points, target).map_err(|e| e.to_string())?;
        note("rp_predict", rel_err(got, oracle_rp(&points.iter().map(|p| (p.x, p.y)).collect::<Vec<_>>(), target)));

        let n = rng.random_range(3..=5_000);
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let b: Vec<f64> = a.iter().map(|x| 0.3 * x + rng.random_range(-10.0..10.0)).collect();
        note("pearson", rel_err(pearson(&a, &b).map_err(|e| e.to_string())?, oracle_pearson(&a, &b)));

        let xs: Vec<f64> = (0..rng.random_range(1..=10_000)).map(|_| rng.random_range(-1e3..1e3)).collect();
        let module: Box<dyn TransformModule> = Box::new(Aggregate::new(AggregateKind::StdDev));
        let out = run_pipeline("stddev", module, xs.iter().map(|x| vec![Value::Float(*x)])).map_err(|e| e.to_string())?;
        note("stddev", rel_err(out[0][0].as_f64().unwrap(), oracle_stddev(&xs)));

        let vocab = ["bird", "flu", "the", "a", "is", "Bird"];
        let corpus: Vec<(Vec<String>, u64)> = (0..rng.random_range(0..2_000))
            .map(|_| {
                let t = (0..5).map(|_| vocab[rng.random_range(0..vocab.len())].to_string()).collect();
                (t, rng.random_range(0..1000))
            })
            .collect();
        let phrase: Vec<String> = ["bird", "flu", "is"][..rng.random_range(1..4)].iter().map(|s| s.to_string()).collect();
        let records: Vec<NGramRecord> =
            corpus.iter().map(|(t, f)| NGramRecord { tokens: t.clone(), frequency: *f }).collect();
        let report = ngram_event_scan(&records, &phrase, false).map_err(|e| e.to_string())?;
        let (buckets, related) = oracle_ngram(&corpus, &phrase, 5);
        let got: Vec<(u64, u64)> = report.buckets.iter().map(|b| (b.distinct_count, b.total_frequency)).collect();
        check(got == buckets && report.related_distinct == related, || format!("ngram {got:?} vs {buckets:?}"))?;
        note("ngram_event_scan", 0.0);
    }
    let max = worst.values().cloned().fold(0.0, f64::max);
    let detail = format!("{} functions x {INSTANCES} instances, max rel err {max:.1e}", worst.len());
    if max <= TOL { Ok(detail) } else { Err(format!("{detail}; per function {worst:?}")) }
}

fn rp_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let (a, b) = (rng.random_range(-5.0..5.0), rng.random_range(-100.0..100.0));
        let step = rng.random_range(1..8);
        let points: Vec<SeriesPoint> = (0..rng.random_range(2..40))
            .map(|i| {
                let x = 12_500 + step * i;
                SeriesPoint { x, y: a * (x - 12_500) as f64 + b }
            })
            .collect();
        let target = rng.random_range(12_000..14_000);
        let want = a * (target - 12_500) as f64 + b;
        worst = worst.max(rel_err(rp_predict(&points, target).map_err(|e| e.to_string())?, want));
    }
    check(worst <= 1e-9, || format!("collinear max rel err {worst:.1e}"))?;

    let mut const_worst = 0.0f64;
    for _ in 0..200 {
        let c = rng.random_range(-100.0..100.0);
        let n = rng.random_range(2..40);
        let points: Vec<SeriesPoint> = (0..n).map(|x| SeriesPoint { x: x * 7, y: c }).collect();
        let rp = rp_predict(&points, rng.random_range(0..1000)).map_err(|e| e.to_string())?;
        const_worst = const_worst.max(rel_err(rp, ep_predict(&vec![c; n as usize]).unwrap()));
    }
    check(const_worst <= 1e-9, || format!("constant-y rp vs ep max rel err {const_worst:.1e}"))?;

    let start = date("2005-04-01");
    let daily: BTreeMap<NaiveDate, f64> =
        start.iter_days().take(120).map(|d| (d, 2.0 * day_ordinal(d) as f64)).collect();
    let week = weekly_predict(Technique::Regression, HistorySelector::WeekdaySample(4), date("2005-07-01"), &daily)
        .map_err(|e| e.to_string())?;
    for (d, v) in &week {
        check(rel_err(*v, 2.0 * day_ordinal(*d) as f64) <= 1e-9, || format!("linear series off on {d}: {v}"))?;
    }
    Ok(format!("collinear max rel err {worst:.1e}, constant max {const_worst:.1e}, linear week exact"))
}

fn read_buzz_csv(path: &std::path::Path, products: &[&str], from: &str, to: &str) -> Vec<(NaiveDate, NaiveTime, f64)> {
    let (from, to) = (date(from), date(to));
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .filter_map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            let d = date(f[0]);
            let keep = products.contains(&f[2]) && d >= from && d <= to;
            keep.then(|| (d, NaiveTime::parse_from_str(f[1], "%H:%M:%S").unwrap(), f[4].parse().unwrap()))
        })
        .collect()
}

fn csv_body(out: &str) -> Vec<Vec<String>> {
    out.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn planted_truth() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |name: &str| dir.path().join(name).display().to_string();
    let cli = |args: &[&str]| -> Result<String, String> {
        let (code, out, err) = bx(dir.path(), args);
        if code == 0 { Ok(out) } else { Err(format!("bx {}: {err}", args.join(" "))) }
    };

    cli(&["gen", "ngrams", "--out", &p("ngrams.csv"), "--planted-count", "50", "--phrase", "bird flu"])?;
    cli(&["ingest", "--input", &p("ngrams.csv"), "--table", "ngrams", "--header"])?;
    let out = cli(&["ngram", "--table", "ngrams", "--phrase", "bird flu"])?;
    let lines: Vec<&str> = out.lines().collect();
    let bucket_sum: u64 = lines[1..lines.len() - 1].iter().map(|l| l.split('\t').nth(1).unwrap().parse::<u64>().unwrap()).sum();
    let summary = lines[lines.len() - 1];
    check(summary.starts_with("related_distinct=50 "), || format!("ngram summary `{summary}`"))?;
    check(bucket_sum == 50, || format!("bucket totals sum to {bucket_sum}"))?;

    cli(&["gen", "buzz", "--out", &p("buzz.csv")])?;
    cli(&["ingest", "--input", &p("buzz.csv"), "--table", "Yahoo_Buzz_Scores", "--header"])?;

    let hourly = csv_body(&cli(&["query", "--sql", HOURLY_QUERY, "--format", "csv"])?);
    let want = oracle_hourly(&read_buzz_csv(&dir.path().join("buzz.csv"), &["EBOOKS"], "2005-05-23", "2005-05-27"));
    check(hourly.len() == want.len() && !want.is_empty(), || format!("{} hourly rows vs {}", hourly.len(), want.len()))?;
    for (g, w) in hourly.iter().zip(&want) {
        let same = date(&g[0]) == w.0 && g[1].parse::<u32>().unwrap() == w.1 && rel_close(g[2].parse().unwrap(), w.2, 1e-9);
        check(same, || format!("hourly row {g:?} vs {w:?}"))?;
    }

    let products = ["ONLNMUSIC", "EBOOKS", "VGAME", "SOCNETS", "PHOTO"];
    let daily = csv_body(&cli(&["query", "--sql", DAILY_QUERY, "--format", "csv"])?);
    let want = oracle_daily(&read_buzz_csv(&dir.path().join("buzz.csv"), &products, "2005-04-01", "2005-07-26"));
    check(daily.len() == want.len() && !want.is_empty(), || format!("{} daily rows vs {}", daily.len(), want.len()))?;
    for (g, w) in daily.iter().zip(&want) {
        check(date(&g[0]) == w.0 && rel_close(g[1].parse().unwrap(), w.1, 1e-9), || format!("daily row {g:?} vs {w:?}"))?;
    }
    Ok(format!("related_distinct=50, bucket sum 50; {} hourly and {} daily rows equal the oracle", hourly.len(), daily.len()))
}

fn random_table(rng: &mut ChaCha8Rng, name: &str) -> (Table, Vec<(i64, Option<i64>)>) {
    let data: Vec<(i64, Option<i64>)> =
        (0..rng.random_range(0..150)).map(|k| (k, rng.random_bool(0.9).then(|| rng.random_range(0..10)))).collect();
    let schema = Schema::of(&[("k", DataType::Int), ("v", DataType::Int)]).unwrap();
    let rows = data.iter().map(|(k, v)| vec![Value::Int(*k), v.map_or(Value::Null, Value::Int)]);
    (Table::from_rows(name, schema, rows).unwrap(), data)
}

fn random_range_predicate(rng: &mut ChaCha8Rng) -> (i64, i64) {
    let (a, b) = (rng.random_range(0..10), rng.random_range(0..10));
    (a.min(b), a.max(b))
}

fn pagination_partition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let storage_cases = 200;
    for case in 0..storage_cases {
        let catalog = Catalog::new();
        let (table, _) = random_table(&mut rng, "t");
        let t = catalog.insert(table).map_err(|e| e.to_string())?;
        let (lo, hi) = random_range_predicate(&mut rng);
        let pred = Predicate::all(vec![
            Predicate::compare("v", CmpOp::Ge, Value::Int(lo)),
            Predicate::compare("v", CmpOp::Le, Value::Int(hi)),
        ])
        .unwrap();
        let bound = BoundPredicate::bind(&pred, t.schema(), "t").map_err(|e| e.to_string())?;
        let full: Vec<Row> = t.rows().filter(|r| bound.matches_row(r)).collect();
        let size = rng.random_range(1..25);
        let mut got = Vec::new();
        let mut cursor: Option<String> = None;
        loop {
            let page = catalog.scan_page("t", Some(&pred), cursor.as_deref(), size).map_err(|e| e.to_string())?;
            got.extend(page.rows);
            match page.next_cursor {
                Some(c) => cursor = Some(c),
                None => break,
            }
        }
        check(got == full, || format!("storage case {case}: {} rows paged vs {} scanned", got.len(), full.len()))?;
    }

    let config = ServiceConfig { bind: "127.0.0.1:0".parse().unwrap(), ..ServiceConfig::default() };
    let svc = RunningService::start(Arc::new(Engine::new()), &config).map_err(|e| e.to_string())?;
    let http = Http::new(svc.base_url());
    let http_cases = 40;
    for case in 0..http_cases {
        let name = format!("t{case}");
        let (table, data) = random_table(&mut rng, &name);
        svc.jobs().engine().catalog().insert(table).map_err(|e| e.to_string())?;
        let (lo, hi) = random_range_predicate(&mut rng);
        let (id, st) = http.run_query(&json!({"text": format!("SELECT k, v FROM {name} WHERE v >= {lo} AND v <= {hi}")}));
        check(st["status"] == "succeeded", || format!("http case {case}: {st}"))?;
        let (got, _) = http.all_rows(&id, rng.random_range(1..25));
        let want: Vec<Json> = data
            .iter()
            .filter(|(_, v)| v.is_some_and(|v| v >= lo && v <= hi))
            .map(|(k, v)| json!([k, v]))
            .collect();
        check(got == want, || format!("http case {case}: {} rows paged vs {}", got.len(), want.len()))?;
    }
    Ok(format!("{storage_cases} storage and {http_cases} HTTP cases"))
}

fn concurrency() -> Outcome {
    let engine = Engine::new();
    let mut data = Vec::new();
    bigexcel::synth::write_synthetic_buzz(&bigexcel::synth::BuzzConfig::new(3, 60), &mut data).map_err(|e| e.to_string())?;
    engine
        .ingest(&IngestRequest::inline("buzz", String::from_utf8(data).unwrap()))
        .map_err(|e| e.to_string())?;
    let products = ["ONLNMUSIC", "EBOOKS", "VGAME", "SOCNETS", "PHOTO"];
    let mut queries = Vec::new();
    for p in products {
        queries.push(format!("SELECT TRANSFORM(date, time, buzz_score) USING 'hourly_analysis' FROM buzz WHERE product = '{p}'"));
        queries.push(format!("SELECT TRANSFORM(date, time, buzz_score) USING 'daily_analysis' FROM buzz WHERE product = '{p}'"));
        queries.push(format!(
            "SELECT TRANSFORM(date, buzz_score) USING 'daily_prediction(technique=rp, selector=weeks:4, target=2005-05-20)' \
             FROM buzz WHERE product = '{p}'"
        ));
    }
    queries.push("SELECT date, time, buzz_score FROM buzz WHERE buzz_score >= 50.0".into());
    let serial: Vec<Vec<Json>> = queries
        .iter()
        .map(|q| engine.query(q).map(|rs| rs.rows().iter().map(|r| Json::Array(r.iter().map(Value::to_json).collect())).collect()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    check(queries.len() == 16, || format!("{} queries", queries.len()))?;

    let config = ServiceConfig { bind: "127.0.0.1:0".parse().unwrap(), workers: 4, ..ServiceConfig::default() };
    let svc = RunningService::start(Arc::new(engine), &config).map_err(|e| e.to_string())?;
    let base = svc.base_url();
    let barrier = Arc::new(Barrier::new(queries.len()));
    let handles: Vec<_> = queries
        .iter()
        .cloned()
        .map(|q| {
            let (base, barrier) = (base.clone(), barrier.clone());
            std::thread::spawn(move || {
                let http = Http::new(base);
                barrier.wait();
                let (id, st) = http.run_query(&json!({ "text": q }));
                (st, http.all_rows(&id, 500).0)
            })
        })
        .collect();
    for (i, (h, want)) in handles.into_iter().zip(&serial).enumerate() {
        let (st, rows) = h.join().map_err(|_| "client thread panicked".to_string())?;
        check(st["status"] == "succeeded", || format!("query {i}: {st}"))?;
        check(&rows == want, || format!("query {i}: {} rows vs {} serial", rows.len(), want.len()))?;
    }
    Ok(format!("16 concurrent submissions match serial execution, {} workers", config.workers))
}

struct Gate(Schema, crossbeam_channel::Receiver<()>);

impl TransformModule for Gate {
    fn output_schema(&self) -> &Schema {
        &self.0
    }
    fn push(&mut self, _: Row) -> Result<Vec<Row>, ModuleError> {
        Ok(vec![])
    }
    fn close(&mut self) -> Result<Vec<Row>, ModuleError> {
        let _ = self.1.recv_timeout(Duration::from_secs(10));
        Err(ModuleError::new("gate closed"))
    }
}

fn error_codes() -> Outcome {
    let engine = Engine::new();
    engine.ingest(&IngestRequest::inline("t", "k,d,s\n1,2005-05-23,a\n2,2005-05-24,b\n")).map_err(|e| e.to_string())?;
    let (open, gate) = crossbeam_channel::unbounded::<()>();
    let out = Schema::of(&[("x", DataType::Int)]).unwrap();
    let gate_module = move |_: &Params, _: &Schema| Ok(Box::new(Gate(out.clone(), gate.clone())) as Box<dyn TransformModule>);
    let descriptor = ModuleDescriptor::new("gate", Arity::Any, OutputSchema::Dynamic);
    engine.repository().register(descriptor.clone(), gate_module.clone()).map_err(|e| e.to_string())?;

    let mut seen: Vec<(&str, String)> = Vec::new();
    let dup = engine.repository().register(descriptor, gate_module).unwrap_err();
    seen.push(("duplicate_module", dup.code().into()));
    let _ = open.send(());
    let failed = engine.query("SELECT TRANSFORM(k) USING 'gate' FROM t").unwrap_err();
    seen.push(("module_failed", failed.code().into()));

    let config = ServiceConfig {
        bind: "127.0.0.1:0".parse().unwrap(),
        workers: 1,
        queue_capacity: 1,
        ..ServiceConfig::default()
    };
    let svc = RunningService::start(Arc::new(engine), &config).map_err(|e| e.to_string())?;
    let http = Http::new(svc.base_url());
    let code = |(_, body): (u16, Json)| body["error"]["code"].as_str().unwrap_or("<none>").to_string();
    let submit = |text: &str| http.post("/api/queries", &json!({ "text": text }));

    seen.push(("parse_error", code(submit("SELEC * FROM t"))));
    seen.push(("unknown_table", code(submit("SELECT * FROM nope"))));
    seen.push(("unknown_column", code(submit("SELECT nope FROM t"))));
    seen.push(("unknown_module", code(submit("SELECT TRANSFORM(k) USING 'nope' FROM t"))));
    seen.push(("type_mismatch", code(submit("SELECT * FROM t WHERE d = 5"))));
    seen.push(("duplicate_table", code(http.post("/api/tables", &json!({"name": "t", "csv": "a\n1\n"})))));
    seen.push(("job_not_found", code(http.get("/api/queries/q0"))));
    seen.push(("invalid_request", code(http.post("/api/queries", &json!({"bogus": true})))));
    seen.push(("io_error", code(http.post("/api/tables", &json!({"name": "f", "path": "/nonexistent/x.csv"})))));

    let (id, _) = http.run_query(&json!({"text": "SELECT k FROM t"}));
    seen.push(("stale_cursor", code(http.get(&format!("/api/queries/{id}/rows?cursor=bx1.1.2.3")))));

    let gated = json!({"text": "SELECT TRANSFORM(k) USING 'gate' FROM t"});
    let running = submit_ok(&http, &gated)?;
    let deadline = Instant::now() + Duration::from_secs(10);
    while http.get(&format!("/api/queries/{running}")).1["status"] == "queued" && Instant::now() < deadline {
        std::thread::sleep(Duration::from_millis(2));
    }
    let queued = submit_ok(&http, &gated)?;
    seen.push(("job_not_ready", code(http.get(&format!("/api/queries/{queued}/rows")))));
    seen.push(("queue_full", code(http.post("/api/queries", &gated))));
    seen.push(("table_in_use", code(http.delete("/api/tables/t"))));
    let _ = open.send(());
    let _ = open.send(());

    let wrong: Vec<String> =
        seen.iter().filter(|(want, got)| want != got).map(|(want, got)| format!("{want} gave {got}")).collect();
    let n = seen.len();
    if wrong.is_empty() { Ok(format!("{n}/{n} codes triggered")) } else { Err(wrong.join(", ")) }
}

fn submit_ok(http: &Http, body: &Json) -> Result<String, String> {
    let (status, sub) = http.post("/api/queries", body);
    check(status == 202, || format!("submit returned {status}: {sub}"))?;
    Ok(sub["job_id"].as_str().unwrap().to_string())
}
