//! File formats, experiment runners and the `cpci` command-line tool built
//! on [`cpci_core`].

pub mod airquality;
pub mod config;
pub mod error;
pub mod output;
pub mod persist;
pub mod plot;
pub mod runner;
pub mod table;

pub use crate::config::RunConfig;
pub use crate::error::{Error, Result};
