//! Library surface of the `mcp-risk` binary: pipeline orchestration,
//! configuration, report derivation, and chart rendering.

pub mod charts;
pub mod config;
pub mod errors;
pub mod pipeline;
pub mod report;
