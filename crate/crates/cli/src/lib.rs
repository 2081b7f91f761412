//! Pipeline stages behind the `verscan` command.
//!
//! Each stage reads the previous stage's files and writes deterministic
//! artifacts, so stages can be re-run independently.

pub mod commands;
pub mod config;
pub mod demo;
pub mod output;

pub use config::RunConfig;

/// How a stage finished when it did not fail outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Some inputs were skipped; their diagnostics were logged.
    Partial {
        skipped: usize,
    },
}

impl Outcome {
    pub fn from_skipped(skipped: usize) -> Self {
        if skipped == 0 {
            Outcome::Success
        } else {
            Outcome::Partial { skipped }
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::Partial { .. } => 2,
        }
    }
}
