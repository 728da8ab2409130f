//! File formats and report rendering for the CTHSMM command-line pipeline.
//!
//! The algorithms live in `cthsmm-core`; this crate adds CSV event-log IO,
//! the versioned model JSON format, simulator spec documents, and the
//! report artifacts the CLI writes.

pub mod csv_data;
pub mod io;
pub mod model_json;
pub mod reports;
pub mod spec_json;
