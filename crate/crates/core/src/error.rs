use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// The matrix is not positive semidefinite. `band` is `j - k` of the first
    /// entry that failed (0 for a diagonal entry); indices are 0-based.
    #[error("not positive semidefinite at ({k}, {j}), band {band}: {detail}")]
    NotPsd {
        band: usize,
        k: usize,
        j: usize,
        detail: String,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal consistency check failed: {0}")]
    Consistency(String),
}

impl Error {
    pub(crate) fn not_psd(k: usize, j: usize, detail: impl Into<String>) -> Self {
        Error::NotPsd {
            band: j.abs_diff(k),
            k,
            j,
            detail: detail.into(),
        }
    }
}
