//! Command-line front end: JSON channel documents in, reports out.

pub mod args;
pub mod commands;
pub mod document;
pub mod error;
pub mod trace;

pub use args::Cli;
pub use commands::run;
pub use document::{ChannelDocument, DocumentKind};
pub use error::CliError;
pub use trace::TraceDocument;
