//! Start the HTTP service in-process, load a table, run a query job, page
//! through its rows and fetch chart data.
//!
//!     cargo run --example http_service
//!
//! `bx serve` runs the same service in the foreground.

use std::sync::Arc;

use bigexcel::service::{RunningService, ServiceConfig};
use bigexcel::synth::{write_synthetic_buzz, BuzzConfig};
use bigexcel::Engine;
use serde_json::{json, Value};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = ServiceConfig { bind: "127.0.0.1:0".parse()?, ..ServiceConfig::default() };
    let service = RunningService::start(Arc::new(Engine::new()), &config)?;
    let base = service.base_url();
    println!("listening on {base}");
    let agent: ureq::Agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();

    let mut csv = Vec::new();
    write_synthetic_buzz(&BuzzConfig::new(1, 30).products(&["EBOOKS"]), &mut csv)?;
    let created: Value = agent
        .post(&format!("{base}/api/tables"))
        .send_json(json!({ "name": "buzz", "csv": String::from_utf8(csv)? }))?
        .body_mut()
        .read_json()?;
    println!("POST /api/tables -> {created}");

    let query = "SELECT TRANSFORM(date, time, buzz_score) USING 'hourly_analysis' FROM buzz WHERE date = '2005-04-10'";
    let job: Value = agent.post(&format!("{base}/api/queries")).send_json(json!({ "text": query }))?.body_mut().read_json()?;
    let id = job["job_id"].as_str().unwrap().to_string();
    println!("POST /api/queries -> {job}");

    let status = loop {
        let s: Value = agent.get(&format!("{base}/api/queries/{id}")).call()?.body_mut().read_json()?;
        if s["status"] == "succeeded" || s["status"] == "failed" {
            break s;
        }
        std::thread::sleep(std::time::Duration::from_millis(5));
    };
    println!("GET /api/queries/{id} -> {status}");

    let mut url = format!("{base}/api/queries/{id}/rows?limit=10");
    loop {
        let page: Value = agent.get(&url).call()?.body_mut().read_json()?;
        println!("rows page: {} rows", page["rows"].as_array().unwrap().len());
        match page["next_cursor"].as_str() {
            Some(c) => url = format!("{base}/api/queries/{id}/rows?limit=10&cursor={c}"),
            None => break,
        }
    }

    let chart: Value = agent
        .get(&format!("{base}/api/queries/{id}/chart?kind=line&x=hour&series=mean"))
        .call()?
        .body_mut()
        .read_json()?;
    println!("chart: {} points", chart["x"].as_array().unwrap().len());

    let mut bad = agent.post(&format!("{base}/api/queries")).send_json(json!({ "text": "SELECT * FROM missing" }))?;
    println!("bad query -> {} {}", bad.status(), bad.body_mut().read_to_string()?);
    Ok(())
}
