//! A lightweight data-exploration engine.
//!
//! Tabular data is loaded into an embedded, immutable column store
//! ([`storage`]), queried with a small `SELECT TRANSFORM(...) USING 'module'`
//! language ([`query`]) whose modules come from a [`repository`], and served
//! page by page over HTTP ([`service`]) or from the `bx` command line
//! ([`cli`]). The [`analytics`] modules cover hourly/daily buzz-score
//! aggregation, EP/RP prediction and n-gram event analysis; [`synth`]
//! generates deterministic datasets to try them on.
//!
//! ```
//! use bigexcel::engine::{Engine, IngestRequest};
//!
//! let engine = Engine::new();
//! engine.ingest(&IngestRequest::inline("scores", "day,score\n1,2.0\n2,4.0\n")).unwrap();
//! let rs = engine.query("SELECT TRANSFORM(score) USING 'average' FROM scores").unwrap();
//! assert_eq!(rs.rows()[0][0].as_f64(), Some(3.0));
//! ```

pub mod analytics;
pub mod cli;
pub mod engine;
pub mod error;
pub mod query;
pub mod repository;
pub mod service;
pub mod storage;
pub mod synth;
pub mod value;

pub use engine::{Engine, IngestRequest, QueryInput};
pub use error::{Error, Result};
pub use value::{DataType, Row, Schema, Value};
