//! File formats, the KDE bandwidth sweep and the command-line front end for
//! [`datacopy_core`].
//!
//! Point sets are read from and written to CSV ([`io`]); reports,
//! partitions and baseline results are JSON ([`report`]).

pub mod error;
pub mod io;
pub mod report;
pub mod sweep;

pub use error::{CliError, Result};
