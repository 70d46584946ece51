//! Parse, render and construct `SELECT TRANSFORM ... USING` queries.
//!
//!     cargo run --example query_language

use bigexcel::query::{construct, parse, Filter, FilterOp, StructuredRequest};

fn main() -> bigexcel::Result<()> {
    let text = "select transform(date, time, buzz_score) using 'hourly_analysis'
                from Yahoo_Buzz_Scores
                where product='EBOOKS' and date >= 2005-05-23 and date <= 2005-05-27;";
    let ast = parse(text)?;
    println!("canonical: {}", ast.render());
    assert_eq!(parse(&ast.render())?, ast);

    // The same query built from a form-style request.
    let request = StructuredRequest {
        table: "Yahoo_Buzz_Scores".into(),
        columns: vec!["date".into(), "time".into(), "buzz_score".into()],
        module: Some("hourly_analysis".into()),
        params: Default::default(),
        filters: vec![
            Filter::new("product", FilterOp::Eq, "EBOOKS"),
            Filter::new("date", FilterOp::Ge, "2005-05-23"),
            Filter::new("date", FilterOp::Le, "2005-05-27"),
        ],
    };
    assert_eq!(construct(&request)?, ast);
    println!("request:   {}", serde_json::to_string(&request).unwrap());

    let ngram = parse("SELECT TRANSFORM(n-gram, frequency) USING 'ngram_analysis' AS distinct_n-gram, total_frequency FROM Yahoo_n-grams")?;
    println!("canonical: {}", ngram.render());

    match parse("SELECT TRANSFORM(date) USING hourly FROM t") {
        Err(e) => println!("error:     {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
