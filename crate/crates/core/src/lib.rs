//! Plotkin/Reed-Muller codes, successive-cancellation decoding and code
//! construction from the exact second-moment recursion of synthetic channels.
//!
//! * [`codebook`]: paths, monomial codewords, `RM(r, m)` and the two encoders.
//! * [`channel`]: BSCs, compound BSC ensembles and their moments.
//! * [`decoder`]: the SC decoder, a brute-force posterior oracle and Monte
//!   Carlo harnesses.
//! * [`polarization`]: exact enumeration of the potential `V = √(A·B)`.
//! * [`ordering`]: construction by sorting on `B` and path-order comparisons.
//! * [`cli`]: the command-line front end.

pub mod channel;
pub mod cli;
pub mod codebook;
pub mod decoder;
pub mod error;
pub mod format;
pub mod ordering;
pub mod polarization;

pub use codebook::{CodeSpec, Codeword, Message, Path};
pub use error::{Error, Result};
