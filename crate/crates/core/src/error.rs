use thiserror::Error;

/// Errors raised by the library. The CLI wraps these with file context.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("path has length {got}, expected {expected}")]
    PathLength { expected: u32, got: u32 },

    #[error("invalid path string {0:?}: expected a string of '0'/'1' characters")]
    PathParse(String),

    #[error("depth {got} outside supported range {min}..={max}")]
    Depth { got: u32, min: u32, max: u32 },

    #[error("{name} = {value} outside {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("information set is empty")]
    EmptyInfoSet,

    #[error("path {0} appears twice in the information set")]
    DuplicatePath(String),

    #[error("k = {k} outside 1..={n}")]
    Dimension { k: usize, n: usize },

    #[error("message references path {0}, which is not in the information set")]
    PathNotInInfoSet(String),

    #[error("input has length {got}, expected {expected}")]
    Length { expected: usize, got: usize },

    #[error("invalid compound channel: {0}")]
    Channel(String),

    #[error("ensemble would need {needed} components, limit is {limit}")]
    ComponentLimit { needed: usize, limit: usize },

    #[error("enumeration budget exceeded: {needed} > {limit}")]
    Budget { needed: u128, limit: u128 },

    #[error("observations exclude every codeword consistent with the decided bits")]
    Inconsistent,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            range: "[0, 1]",
        })
    }
}

pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            range: "(0, 1)",
        })
    }
}
