use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what}: requested {requested} exceeds cap {cap}")]
    Capacity {
        what: &'static str,
        requested: u64,
        cap: u64,
    },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("missing prime-power value lambda({p}^{exponent})")]
    MissingPrimePower { p: u64, exponent: u32 },

    #[error("malformed cache file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_range(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::OutOfRange(msg()))
    }
}
