//! File formats, configuration and the command-line pipeline around
//! [`g2p_core`]: prepare a lexicon, align it, train, decode and evaluate.

pub mod batch;
pub mod cli;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod formats;
pub mod model_file;

pub use g2p_core;
