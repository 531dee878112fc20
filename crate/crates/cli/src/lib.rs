//! Command implementations behind the `quatgenus` binary.
//!
//! Every command returns an [`Outcome`]: a line-oriented text rendering, a
//! JSON value and an exit status. Failures that stop a command early are
//! [`CliError`]s, which carry their own exit status.

pub mod kernel;
pub mod script;
pub mod selftest;

use std::fmt;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use quatgenus_core::arith::ArithError;
use quatgenus_core::forms::FormError;
use quatgenus_core::local::PlaceError;
use quatgenus_core::quaternion::QuatError;
use quatgenus_core::tower::{Status, TowerError};

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Exit {
    Success = 0,
    PropertyFailure = 1,
    InputError = 2,
    PreconditionError = 3,
    Incomplete = 4,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputMode {
    #[default]
    Text,
    Json,
}

impl std::str::FromStr for OutputMode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "text" => Ok(OutputMode::Text),
            "json" => Ok(OutputMode::Json),
            _ => Err(CliError::Input(format!(
                "unknown output mode {s:?}; expected text or json"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    /// Search bound for vectors and square-class witnesses.
    pub height_bound: u64,
    /// Witness window: square-free `c` with `|c| ≤ witness_window`.
    pub witness_window: u64,
    pub max_levels: usize,
    pub output: OutputMode,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            height_bound: 200,
            witness_window: 10,
            max_levels: 3,
            output: OutputMode::Text,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.height_bound == 0 || self.witness_window == 0 || self.max_levels == 0 {
            return Err(CliError::Input(
                "height bound, witness window and max levels must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Precondition(String),
    #[error("{0}")]
    Incomplete(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit(&self) -> Exit {
        match self {
            CliError::Input(_) => Exit::InputError,
            CliError::Precondition(_) => Exit::PreconditionError,
            CliError::Incomplete(_) => Exit::Incomplete,
            CliError::Internal(_) => Exit::PropertyFailure,
        }
    }
}

impl From<ArithError> for CliError {
    fn from(e: ArithError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<PlaceError> for CliError {
    fn from(e: PlaceError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<FormError> for CliError {
    fn from(e: FormError) -> Self {
        match e {
            FormError::SynthesisExhausted { .. } => CliError::Incomplete(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<QuatError> for CliError {
    fn from(e: QuatError) -> Self {
        let msg = e.to_string();
        match e {
            QuatError::NotDivision(_) | QuatError::Isomorphic(..) => CliError::Precondition(msg),
            QuatError::ConnectingExhausted { .. } => CliError::Incomplete(msg),
            QuatError::Parse(_) | QuatError::Arith(_) => CliError::Input(msg),
        }
    }
}

impl From<TowerError> for CliError {
    fn from(e: TowerError) -> Self {
        let msg = e.to_string();
        match e {
            TowerError::Quat(q) => q.into(),
            TowerError::AdjoinRefused {
                status: Status::Unknown,
                ..
            } => CliError::Incomplete(msg),
            TowerError::EmptyForm
            | TowerError::Coefficient(_)
            | TowerError::AdjoinTooSmall { .. }
            | TowerError::AdjoinRefused { .. }
            | TowerError::MissingAssumption { .. }
            | TowerError::BadPair(..)
            | TowerError::DuplicateAssumption(_) => CliError::Input(msg),
            TowerError::AbstractBase(_)
            | TowerError::FormalAlgebra(_)
            | TowerError::NotDivision(_)
            | TowerError::Isomorphic(..)
            | TowerError::Unlinked(..)
            | TowerError::TrivialClass => CliError::Precondition(msg),
            TowerError::Bookkeeping(_) => CliError::Internal(msg),
        }
    }
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit: Exit,
    pub lines: Vec<String>,
    pub json: Value,
}

impl Outcome {
    pub fn new(exit: Exit, lines: Vec<String>, json: Value) -> Outcome {
        Outcome { exit, lines, json }
    }

    pub fn render(&self, mode: OutputMode) -> String {
        match mode {
            OutputMode::Text => {
                let mut s = self.lines.join("\n");
                s.push('\n');
                s
            }
            OutputMode::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("reports serialize");
                s.push('\n');
                s
            }
        }
    }
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("reports serialize")
}

pub(crate) fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub(crate) fn join<T: fmt::Display>(items: &[T], sep: &str) -> String {
    items
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}
