//! Keyword-based semantic communication simulator and data allocation solvers.
//!
//! The transmitter extracts keywords from each sentence using a knowledge base
//! shared with the receiver, encodes them into quadrature symbols, and sends
//! them over an AWGN channel. The receiver decodes the keywords and regenerates
//! a sentence, which is scored against the original with BLEU, embedding
//! similarity, and their convex combination (the semantic score).
//!
//! The `dap` module covers the downstream allocation side: a data center
//! distributes data categories of increasing size and cost to budget-limited
//! users under a storage cap, solved greedily or exactly.

pub mod channel;
pub mod corpus;
pub mod dap;
pub mod error;
pub mod knowledge;
pub mod metrics;
pub mod pipeline;

pub use error::{Error, Result};
