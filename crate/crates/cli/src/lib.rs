//! Manifest parsing, model construction and report emission behind the
//! `cdsplit` binary.

pub mod expr;
pub mod manifest;
pub mod model;
pub mod report;
pub mod run;

pub use run::{execute, Options, Sub};
