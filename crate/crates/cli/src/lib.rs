//! Batch commands over a benchmark manifest: extract, generate, evaluate,
//! report, train and convert.

pub mod cli;
pub mod commands;
pub mod error;
pub mod manifest;
pub mod outcome;
pub mod runtime;

pub use cli::{run, Cli};
pub use commands::evaluate::{cmd_evaluate, EvaluateOptions, Evaluation, RecordStatus, ResultRecord};
pub use commands::extract::{cmd_extract, ExtractOptions, ExtractReport, Extraction};
pub use commands::generate::{cmd_generate, GenerateOptions, RunInfo};
pub use commands::report::{cmd_report, Format};
pub use commands::train::{cmd_train, TrainOptions, TrainSummary};
pub use commands::Method;
pub use error::CliError;
pub use manifest::{Manifest, ManifestEntry};
pub use outcome::Outcome;
pub use runtime::Runtime;
