//! Numerical toolkit for capacity bounds of the binary deletion channel.
//!
//! * [`bitseq`], [`entropy`], [`rng`]: bit strings, subsequence counting,
//!   channel sampling, entropy and seeded randomness.
//! * [`matrix`]: exact transition matrices of the fixed-length channels.
//! * [`baa`]: Blahut-Arimoto, `f(L, R)` and `C_L`.
//! * [`bounds`]: closed-form upper bounds, `T_L` and Markov lower bounds.
//! * [`markov`]: first-order Markov sources and their deletion outputs.

pub mod baa;
pub mod bitseq;
pub mod bounds;
pub mod entropy;
pub mod error;
pub mod markov;
pub mod matrix;
pub mod optimize;
pub mod rng;

pub use baa::{blahut_arimoto, c_l, f_value, mutual_information, BaaResult, FCache, FEntry, FTable, InputDistribution};
pub use bitseq::{
    binomial, deletion_count_prob, deletion_output_prob, sample_deletion, subsequence_count, BitString, DeletionProb,
};
pub use entropy::{binary_entropy, entropy};
pub use error::{Error, Result};
pub use matrix::{build_fi_matrix, build_fifo_matrix, ChannelMatrix, MatrixCaps};
