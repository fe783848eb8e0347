//! Metadata-driven security risk scoring for MCP server repositories.
//!
//! The crate turns static-analysis findings into standardized risk scores:
//!
//! * [`catalog`] parses the MITRE CWE and CAPEC catalogs, links them,
//!   imputes missing likelihood fields, and computes a 0-100 Risk Index
//!   per weakness.
//! * [`findings`] ingests SARIF, Joern, and MCP-scanner outputs, maps every
//!   finding to a CWE, and deduplicates across tools into per-repository
//!   finding profiles.
//! * [`scoring`] aggregates profiles and Risk Indices into repository
//!   exposure, RMS severity, overall score, normalized score, and risk band.
//! * [`surfaces`] maps weaknesses onto the four MCP threat surfaces and
//!   computes surface shares and conditional co-occurrence.
//! * [`harvest`] searches a code-hosting service for candidate MCP server
//!   repositories and persists reproducible snapshot manifests.
//! * [`tables`] renders and parses the delimited tables and structured
//!   documents exchanged between pipeline stages.

pub mod catalog;
pub mod findings;
pub mod harvest;
pub mod scoring;
pub mod surfaces;
pub mod tables;
