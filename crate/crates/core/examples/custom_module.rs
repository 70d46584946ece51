//! Register a user-defined transform module and call it from a query.
//!
//!     cargo run --example custom_module

use bigexcel::query::Params;
use bigexcel::repository::{Arity, ModuleDescriptor, ModuleError, OutputSchema, ParamSpec, TransformModule};
use bigexcel::{DataType, Engine, IngestRequest, Row, Schema, Value};

/// Emits (min, max) of a numeric column, optionally scaled.
struct Range {
    schema: Schema,
    scale: f64,
    bounds: Option<(f64, f64)>,
}

impl TransformModule for Range {
    fn output_schema(&self) -> &Schema {
        &self.schema
    }

    fn push(&mut self, row: Row) -> Result<Vec<Row>, ModuleError> {
        if let Some(x) = row[0].as_f64() {
            let (lo, hi) = self.bounds.unwrap_or((x, x));
            self.bounds = Some((lo.min(x), hi.max(x)));
        }
        Ok(Vec::new())
    }

    fn close(&mut self) -> Result<Vec<Row>, ModuleError> {
        let (lo, hi) = self.bounds.ok_or_else(|| ModuleError::new("no numeric input"))?;
        Ok(vec![vec![Value::Float(lo * self.scale), Value::Float(hi * self.scale)]])
    }
}

fn main() -> bigexcel::Result<()> {
    let engine = Engine::new();
    engine.ingest(&IngestRequest::inline("t", "g,x\na,3\na,-1\nb,10\nb,4\n"))?;

    let schema = Schema::of(&[("min", DataType::Float), ("max", DataType::Float)])?;
    let descriptor = ModuleDescriptor::new("range", Arity::Exact(1), OutputSchema::Fixed(schema.clone()))
        .describe("minimum and maximum of one numeric column")
        .param(ParamSpec::optional("scale", "multiplier, default 1"));
    engine.repository().register(descriptor, move |params: &Params, input: &Schema| {
        if !input.fields()[0].data_type.is_numeric() {
            return Err(ModuleError::new("range needs a numeric column"));
        }
        let scale = match params.get("scale") {
            Some(s) => s.parse().map_err(|_| ModuleError::new(format!("bad scale `{s}`")))?,
            None => 1.0,
        };
        Ok(Box::new(Range { schema: schema.clone(), scale, bounds: None }) as Box<dyn TransformModule>)
    })?;

    print!("{}", engine.repository().listing());
    let rs = engine.query("SELECT TRANSFORM(x) USING 'range(scale=2)' AS lo, hi FROM t WHERE g = 'a'")?;
    println!("{:?} -> {:?}", rs.schema().names().collect::<Vec<_>>(), rs.rows()[0]);
    match engine.query("SELECT TRANSFORM(g) USING 'range' FROM t") {
        Err(e) => println!("rejected: [{}] {e}", e.code()),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
