//! Scenario-driven front end for the `kuranishi` engine.

pub mod expr;
pub mod report;
pub mod scenario;
pub mod tasks;

use std::collections::BTreeMap;
use std::time::Instant;

use kuranishi::report::Report;

use report::{OptionsEcho, RunReport, Status, SCHEMA_VERSION};
use scenario::{Scenario, ScenarioError, Task};
use tasks::{Options, TaskError};

/// The elliptic extension example, written in the scenario grammar.
pub const PAPER_EXAMPLE: &str = include_str!("../../../scenarios/paper_example.toml");

pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const PARSE: i32 = 3;
    pub const VALIDATION: i32 = 4;
    pub const INTERNAL: i32 = 5;
}

#[derive(Debug)]
pub enum Failure {
    /// Scenario text does not parse; no report.
    Parse(ScenarioError),
    /// A report was produced but something did not validate.
    Validation(Box<RunReport>),
    Internal(Box<RunReport>),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Parse(_) => exit::PARSE,
            Failure::Validation(_) => exit::VALIDATION,
            Failure::Internal(_) => exit::INTERNAL,
        }
    }

    pub fn report(&self) -> Option<&RunReport> {
        match self {
            Failure::Parse(_) => None,
            Failure::Validation(r) | Failure::Internal(r) => Some(r),
        }
    }
}

/// Flags of a run; `task` and `order` override the scenario's own.
#[derive(Clone, Debug, Default)]
pub struct RunFlags {
    pub task: Option<Task>,
    pub order: Option<u32>,
    pub pole_bound: Option<i64>,
    pub emit_family: bool,
}

fn blank(task: &str, opts: &Options) -> RunReport {
    RunReport {
        schema_version: SCHEMA_VERSION,
        engine_version: ENGINE_VERSION.to_string(),
        task: task.to_string(),
        status: Status::Ok,
        error: None,
        scenario: None,
        options: OptionsEcho { order: opts.order, pole_bound: opts.pole_bound, emit_family: opts.emit_family },
        sections: BTreeMap::new(),
        verification: Report::new(),
        summary: Vec::new(),
        timing_ms: 0,
        determinism_hash: String::new(),
    }
}

/// Parses and runs one scenario.
pub fn run_text(text: &str, flags: &RunFlags) -> Result<RunReport, Failure> {
    let start = Instant::now();
    let parsed = Scenario::parse(text);
    let task = flags.task.clone().or_else(|| parsed.as_ref().ok().and_then(|s| s.task.clone())).unwrap_or(Task::Cohomology);
    let order = flags.order.or_else(|| parsed.as_ref().ok().and_then(|s| s.order)).unwrap_or(tasks::DEFAULT_ORDER);
    let opts = Options { order, pole_bound: flags.pole_bound, emit_family: flags.emit_family };
    let mut rep = blank(task.name(), &opts);
    let sc = match parsed {
        Ok(s) => s,
        Err(e @ ScenarioError::Parse { .. }) => return Err(Failure::Parse(e)),
        Err(ScenarioError::Invalid(m)) => {
            rep.status = Status::ValidationFailed;
            rep.verification.push("scenario validates", false, m.clone());
            rep.error = Some(m);
            rep.timing_ms = start.elapsed().as_millis() as u64;
            rep.seal();
            return Err(Failure::Validation(Box::new(rep)));
        }
    };
    rep.scenario = Some(sc.echo.clone());
    rep.options.pole_bound = opts.pole_bound.or(sc.pole_bound);
    let result = tasks::run(&sc, &task, &opts);
    rep.timing_ms = start.elapsed().as_millis() as u64;
    match result {
        Ok(out) => {
            rep.sections = out.sections;
            rep.verification = out.verification;
            rep.summary = out.summary;
            if !rep.verification.passed() {
                rep.status = Status::ValidationFailed;
                rep.seal();
                return Err(Failure::Validation(Box::new(rep)));
            }
            rep.seal();
            Ok(rep)
        }
        Err(e) => {
            let internal = matches!(e, TaskError::Internal(_));
            rep.status = if internal { Status::Error } else { Status::ValidationFailed };
            rep.error = Some(e.to_string());
            rep.seal();
            Err(if internal { Failure::Internal(Box::new(rep)) } else { Failure::Validation(Box::new(rep)) })
        }
    }
}
