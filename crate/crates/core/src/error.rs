use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("zero dictionary: tr(WᵀW) = 0")]
    ZeroDictionary,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no homomorphism found after {0} tries")]
    NoHomomorphism(usize),

    #[error("brute-force enumeration of {0} vertex maps exceeds the limit of {1}; use a smaller graph")]
    EnumerationTooLarge(u128, u128),

    #[error("degenerate aggregates: all diagonal entries are zero")]
    DegenerateAggregates,

    #[error("corruption infeasible: {0}")]
    CorruptionInfeasible(String),

    #[error("labels contain a single class")]
    SingleClass,

    #[error("probability table is not normalized (sum = {0})")]
    NotNormalized(f64),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{}: {source}", path.display())]
    File {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}

impl Error {
    /// Process exit status: 1 for bad parameters, 2 for bad or unusable
    /// input data, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) => 1,
            Error::Dimension(_)
            | Error::NoHomomorphism(_)
            | Error::EnumerationTooLarge(..)
            | Error::CorruptionInfeasible(_)
            | Error::SingleClass
            | Error::NotNormalized(_)
            | Error::Parse { .. }
            | Error::File { .. }
            | Error::Io(_) => 2,
            Error::ZeroDictionary | Error::NonFinite(_) | Error::DegenerateAggregates | Error::Numerical(_) => 3,
        }
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}
