//! Load delimited text into the table store and page through a filtered scan.
//!
//!     cargo run --example ingest_and_page

use bigexcel::query::{CmpOp, Predicate};
use bigexcel::{Engine, IngestRequest, Value};

fn main() -> bigexcel::Result<()> {
    let dir = tempfile::tempdir()?;
    let path = dir.path().join("scores.txt");
    let mut text = String::from("day\tname\tscore\n");
    for i in 0..23 {
        text.push_str(&format!("2005-05-{:02}\titem, no. {i}\t{}\n", i + 1, (i * 7) % 10));
    }
    std::fs::write(&path, text)?;

    let engine = Engine::open(dir.path().join("data"))?;
    let summary = engine.ingest(&IngestRequest::csv_file("scores", &path).delimiter('\t'))?;
    println!("loaded {} rows into {}", summary.rows_loaded, summary.table);
    println!("schema: {}", engine.catalog().get("scores")?.schema().to_sidecar().trim_end().replace('\n', ", "));

    let filter = Predicate::compare("score", CmpOp::Ge, Value::Int(5));
    let mut cursor = None;
    let mut page_no = 0;
    loop {
        let page = engine.catalog().scan_page("scores", Some(&filter), cursor.as_deref(), 4)?;
        page_no += 1;
        let names: Vec<String> = page.rows.iter().map(|r| r[1].to_string()).collect();
        println!("page {page_no}: {}", names.join(" | "));
        match page.next_cursor {
            Some(c) => cursor = Some(c),
            None => break,
        }
    }

    // Tables survive a restart when the engine has a data directory.
    drop(engine);
    let reopened = Engine::open(dir.path().join("data"))?;
    println!("after reopen: {} rows", reopened.catalog().get("scores")?.row_count());
    Ok(())
}
