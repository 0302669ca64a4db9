//! File loading, golden distribution files, corpus helpers and the
//! command-line front end for `pdb-core`.

pub use pdb_core as core;

pub mod cli;
pub mod corpus;
pub mod format;
pub mod load;
