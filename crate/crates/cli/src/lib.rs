//! Batch pipeline behind the `editstyle` binary: analyze a source edit, index
//! a footage repository, transfer the style and emit review artifacts.

mod config;
mod pipeline;
mod plan;

use thiserror::Error;

pub use config::ProjectConfig;
pub use pipeline::{cmd_analyze, cmd_index, cmd_review, cmd_transfer, artifacts};
pub use plan::{EditPlan, PlanFlags, PlanRecord, StyleSummary, Timeline, TimelineShot};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{stage}: {detail}")]
    Pipeline { stage: &'static str, detail: String },
}

impl CliError {
    pub fn pipeline(stage: &'static str, detail: impl std::fmt::Display) -> Self {
        CliError::Pipeline {
            stage,
            detail: detail.to_string(),
        }
    }

    /// Process exit status: 2 for configuration errors, 3 for pipeline errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Pipeline { .. } => 3,
        }
    }
}
