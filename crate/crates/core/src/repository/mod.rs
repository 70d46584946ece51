//! The module repository: named transform modules that queries embed with
//! `TRANSFORM(...) USING 'name(key=value, ...)'`.
//!
//! A module is opened with its parameters and the input schema, receives
//! every filtered row through `push`, and gets one final `close`. Its output
//! is the concatenation of everything those calls return.

mod builtins;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use parking_lot::RwLock;

use crate::error::{Error, Result};
use crate::query::Params;
use crate::value::{is_identifier, Row, Schema};

pub use builtins::{Aggregate, AggregateKind};

/// Failure raised by a module; the pipeline adds the module name and row index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleError(pub String);

impl ModuleError {
    pub fn new(message: impl Into<String>) -> Self {
        ModuleError(message.into())
    }
}

impl fmt::Display for ModuleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ModuleError {}

impl From<crate::analytics::AnalyticsError> for ModuleError {
    fn from(e: crate::analytics::AnalyticsError) -> Self {
        ModuleError(e.to_string())
    }
}

/// One open module instance. Instances are single-use.
pub trait TransformModule: Send {
    fn output_schema(&self) -> &Schema;
    fn push(&mut self, row: Row) -> Result<Vec<Row>, ModuleError>;
    fn close(&mut self) -> Result<Vec<Row>, ModuleError>;
}

impl fmt::Debug for dyn TransformModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransformModule").field("output_schema", self.output_schema()).finish()
    }
}

/// Creates module instances; called concurrently from query workers.
pub trait ModuleFactory: Send + Sync {
    fn open(&self, params: &Params, input: &Schema) -> Result<Box<dyn TransformModule>, ModuleError>;
}

impl<F> ModuleFactory for F
where
    F: Fn(&Params, &Schema) -> Result<Box<dyn TransformModule>, ModuleError> + Send + Sync,
{
    fn open(&self, params: &Params, input: &Schema) -> Result<Box<dyn TransformModule>, ModuleError> {
        self(params, input)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Arity {
    Exact(usize),
    OneOf(Vec<usize>),
    AtLeast(usize),
    Any,
}

impl Arity {
    pub fn accepts(&self, n: usize) -> bool {
        match self {
            Arity::Exact(k) => n == *k,
            Arity::OneOf(ks) => ks.contains(&n),
            Arity::AtLeast(k) => n >= *k,
            Arity::Any => n >= 1,
        }
    }
}

impl fmt::Display for Arity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arity::Exact(k) => write!(f, "{k}"),
            Arity::OneOf(ks) => {
                let parts: Vec<String> = ks.iter().map(|k| k.to_string()).collect();
                f.write_str(&parts.join("|"))
            }
            Arity::AtLeast(k) => write!(f, "{k}+"),
            Arity::Any => f.write_str("any"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamSpec {
    pub key: String,
    pub required: bool,
    pub description: String,
}

impl ParamSpec {
    pub fn required(key: &str, description: &str) -> Self {
        ParamSpec { key: key.into(), required: true, description: description.into() }
    }

    pub fn optional(key: &str, description: &str) -> Self {
        ParamSpec { key: key.into(), required: false, description: description.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutputSchema {
    Fixed(Schema),
    /// Depends on parameters or input; known once the module is opened.
    Dynamic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleDescriptor {
    pub name: String,
    pub description: String,
    pub params: Vec<ParamSpec>,
    pub input_arity: Arity,
    pub output_schema: OutputSchema,
}

impl ModuleDescriptor {
    pub fn new(name: &str, input_arity: Arity, output_schema: OutputSchema) -> Self {
        ModuleDescriptor {
            name: name.into(),
            description: String::new(),
            params: Vec::new(),
            input_arity,
            output_schema,
        }
    }

    pub fn describe(mut self, description: &str) -> Self {
        self.description = description.into();
        self
    }

    pub fn param(mut self, spec: ParamSpec) -> Self {
        self.params.push(spec);
        self
    }

    /// `name<TAB>input_arity<TAB>param keys`.
    pub fn listing_line(&self) -> String {
        let keys: Vec<&str> = self.params.iter().map(|p| p.key.as_str()).collect();
        format!("{}\t{}\t{}", self.name, self.input_arity, keys.join(","))
    }

    fn check_params(&self, params: &Params) -> Result<()> {
        let reject = |message: String| Error::ModuleRejected { module: self.name.clone(), message };
        for spec in self.params.iter().filter(|p| p.required) {
            if !params.contains_key(&spec.key) {
                return Err(reject(format!("missing required parameter `{}`", spec.key)));
            }
        }
        if let Some(k) = params.keys().find(|k| !self.params.iter().any(|p| &p.key == *k)) {
            return Err(reject(format!("unknown parameter `{k}`")));
        }
        Ok(())
    }
}

struct Registered {
    descriptor: ModuleDescriptor,
    factory: Arc<dyn ModuleFactory>,
}

/// Registry of transform modules, keyed by case-sensitive name.
#[derive(Default)]
pub struct ModuleRepository {
    modules: RwLock<BTreeMap<String, Registered>>,
}

impl ModuleRepository {
    pub fn empty() -> Self {
        ModuleRepository::default()
    }

    /// A repository holding the aggregate and analytics modules.
    pub fn with_builtins() -> Self {
        let repo = ModuleRepository::empty();
        builtins::register(&repo).expect("built-in module names are distinct");
        crate::analytics::modules::register(&repo).expect("built-in module names are distinct");
        repo
    }

    pub fn register(&self, descriptor: ModuleDescriptor, factory: impl ModuleFactory + 'static) -> Result<()> {
        self.register_shared(descriptor, Arc::new(factory))
    }

    pub fn register_shared(&self, descriptor: ModuleDescriptor, factory: Arc<dyn ModuleFactory>) -> Result<()> {
        if !is_identifier(&descriptor.name) {
            return Err(Error::InvalidRequest(format!("invalid module name `{}`", descriptor.name)));
        }
        if let Some(i) = descriptor.params.iter().position(|p| !p.required) {
            if descriptor.params[i..].iter().any(|p| p.required) {
                return Err(Error::InvalidRequest(format!(
                    "module `{}`: required parameters must precede optional ones",
                    descriptor.name
                )));
            }
        }
        let mut modules = self.modules.write();
        if modules.contains_key(&descriptor.name) {
            return Err(Error::DuplicateModule(descriptor.name));
        }
        modules.insert(descriptor.name.clone(), Registered { descriptor, factory });
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Result<ModuleDescriptor> {
        self.modules
            .read()
            .get(name)
            .map(|r| r.descriptor.clone())
            .ok_or_else(|| Error::UnknownModule(name.to_string()))
    }

    /// Sorted by name.
    pub fn list_modules(&self) -> Vec<ModuleDescriptor> {
        self.modules.read().values().map(|r| r.descriptor.clone()).collect()
    }

    /// One `name<TAB>input_arity<TAB>param keys` line per module.
    pub fn listing(&self) -> String {
        self.list_modules().iter().map(|d| d.listing_line() + "\n").collect()
    }

    /// Checks arity and parameters, then opens a fresh instance.
    pub fn instantiate(&self, name: &str, params: &Params, input: &Schema) -> Result<Box<dyn TransformModule>> {
        let (descriptor, factory) = {
            let modules = self.modules.read();
            let r = modules.get(name).ok_or_else(|| Error::UnknownModule(name.to_string()))?;
            (r.descriptor.clone(), r.factory.clone())
        };
        if !descriptor.input_arity.accepts(input.len()) {
            return Err(Error::TypeMismatch(format!(
                "module `{name}` takes {} input columns, got {}",
                descriptor.input_arity,
                input.len()
            )));
        }
        descriptor.check_params(params)?;
        factory
            .open(params, input)
            .map_err(|e| Error::ModuleRejected { module: name.to_string(), message: e.0 })
    }
}

/// Streams `rows` through an open module: all `push` emissions, then `close`.
pub fn run_pipeline(
    module_name: &str,
    mut module: Box<dyn TransformModule>,
    rows: impl IntoIterator<Item = Row>,
) -> Result<Vec<Row>> {
    let fail = |row: usize, e: ModuleError| Error::ModuleFailed {
        module: module_name.to_string(),
        row,
        message: e.0,
    };
    let mut out = Vec::new();
    let mut pushed = 0;
    for row in rows {
        out.extend(module.push(row).map_err(|e| fail(pushed, e))?);
        pushed += 1;
    }
    out.extend(module.close().map_err(|e| fail(pushed, e))?);
    Ok(out)
}
