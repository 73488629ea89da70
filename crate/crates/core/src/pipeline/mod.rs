//! Filesystem-facing layer: file formats, experiment drivers and the
//! runtime benchmark.

pub mod bench;
pub mod experiments;
pub mod formats;
