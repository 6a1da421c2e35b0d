//! File formats and command-line front end for `potentialforge-core`.
//!
//! Exit codes of every command: 0 success, 1 input error, 2 semantic failure
//! (infeasible design, failed verification, invalid restriction, size cap),
//! 3 solver failure.

pub mod cli;
pub mod commands;
pub mod format;
