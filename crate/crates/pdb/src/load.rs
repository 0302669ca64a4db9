use std::path::Path;

use pdb_core::parser::{parse_unit, ParseError, SourceUnit};

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{source}")]
    Parse { path: String, source: ParseError },
}

/// Read and parse a `.pdb` file.
pub fn load_unit(path: &Path) -> Result<SourceUnit, LoadError> {
    let shown = path.display().to_string();
    let src = std::fs::read_to_string(path).map_err(|source| LoadError::Io { path: shown.clone(), source })?;
    parse_unit(&src).map_err(|source| LoadError::Parse { path: shown, source })
}
