//! File formats, renderers and command line plumbing around `rumkit-core`.
//!
//! Documents are versioned JSON written canonically (sorted keys, floats
//! with 17 significant digits) so that saving a loaded file reproduces it
//! byte for byte. See `docs/formats.md` for the schemas.

pub mod csv;
pub mod doc;
pub mod error;
pub mod io;
pub mod json;
pub mod scan;
pub mod svg;

pub use error::{FileError, Result};
