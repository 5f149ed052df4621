//! Instance formats, random generators and named fixtures.

use std::path::Path;

use thiserror::Error;

use crate::error::Result;
use crate::model::Instance;

mod fixtures;
mod format;
mod generate;

pub use fixtures::{fixture, fixture_names, Fact, Fixture};
pub use format::{parse_instance, write_instance, Format};
pub use generate::{gen_binary, gen_dirichlet, generate, GeneratorConfig, GeneratorKind, GENERATOR_VERSION};

/// Rows and columns are zero-based agent and good indices.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("negative value at row {row}, column {col}")]
    NegativeValue { row: usize, col: usize },

    #[error("non-integer value `{text}` at row {row}, column {col}")]
    NonInteger { row: usize, col: usize, text: String },

    #[error("row {row} has {found} values, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },

    #[error("missing field `{0}`")]
    MissingField(String),

    #[error("{0}")]
    Shape(String),
}

/// Reads an instance, choosing the format from the extension or the contents.
pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
    Ok(parse_instance(&text, Format::from_path(path))?)
}
