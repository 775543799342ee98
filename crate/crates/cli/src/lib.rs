//! Command-line front end for `qfidelity`: state files, reports and the
//! built-in verification suite.

pub mod commands;
pub mod error;
pub mod statefile;
pub mod verify;
