//! File formats, embedding table loading, parallel evaluation and the command
//! line for `vlawe-core`.

mod binio;
pub mod cli;
pub mod codebook_file;
pub mod corpus_io;
pub mod dump;
pub mod error;
pub mod model_file;
pub mod report;
pub mod runner;
pub mod table_io;

pub use error::{Result, VlaweError};
