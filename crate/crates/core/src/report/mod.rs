//! Pipeline orchestration, event annotation and plot-ready outputs.

mod annotate;
mod config;
pub mod outputs;
mod pipeline;
mod timeline;

use std::io::Write;

use thiserror::Error;

pub use annotate::{annotate, annotate_file};
pub use config::{RunConfig, DEFAULT_WINDOW};
pub use pipeline::{run_pipeline, FileEntry, Manifest, MANIFEST_FILE, OUTPUT_FILES};
pub use timeline::{parse_instant, Event, EventTimeline, FTX_2022_TIMELINE};

/// Broad failure class; the CLI maps these to exit codes 2, 3 and 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numeric,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("config: {0}")]
    Config(String),
    #[error("timeline: {0}")]
    Timeline(String),
    #[error("annotate: {0}")]
    Annotate(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error("{stage} stage{}: {message}", window.map(|w| format!(", window {w}")).unwrap_or_default())]
    Stage { stage: &'static str, window: Option<usize>, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ReportError {
    pub(crate) fn stage(stage: &'static str, message: impl ToString) -> Self {
        ReportError::Stage { stage, window: None, message: message.to_string() }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            ReportError::Config(_) | ReportError::Timeline(_) => ErrorKind::Config,
            ReportError::Stage { stage, .. } if matches!(*stage, "ewcorr" | "tmfg" | "centrality") => {
                ErrorKind::Numeric
            }
            _ => ErrorKind::Data,
        }
    }
}

/// LF-terminated CSV writer used for every output so bytes do not depend on platform.
pub(crate) fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}
