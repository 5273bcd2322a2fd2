use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the domain of an operation (empty histogram, bad dimensions, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A caller-supplied method parameter is out of range.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// The edge map has no strictly positive magnitude.
    #[error("no edges: the image has no positive edge response")]
    NoEdges,
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("unsupported depth: maxval {0} (only 8-bit images are accepted)")]
    UnsupportedDepth(u32),
    #[error("corrupt stream: {0}")]
    CorruptStream(String),
}
