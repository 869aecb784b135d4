//! Dataset loaders, run configuration, parallel LOSO runner, reports and the
//! `mrcst` command line, on top of [`mrcst_core`].

pub mod cli;
pub mod config;
pub mod io;
pub mod report;
pub mod runner;

pub use config::RunConfig;
pub use io::{load_generic_csv, load_maxlittle, load_sakar, DatasetFormat, LoadError};
