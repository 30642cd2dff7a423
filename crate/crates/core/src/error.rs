use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Exact subsequence counting exceeded 64-bit range.
    #[error("subsequence count overflowed u64 (|x| = {input_len}, |y| = {output_len})")]
    CountOverflow { input_len: usize, output_len: usize },

    /// A requested block length is larger than the configured cap.
    #[error("block length {len} exceeds the configured cap of {cap}")]
    CapExceeded { len: usize, cap: usize },

    /// A weighted-sum bound needed an f-value that was never computed.
    #[error("missing f-value for L = {l}, R = {r}")]
    MissingFValue { l: usize, r: usize },

    /// Monte Carlo estimation produced no usable samples.
    #[error("estimation failed: {0}")]
    Estimation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
