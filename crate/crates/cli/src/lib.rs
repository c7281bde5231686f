//! Library surface of the batch toolchain: pipeline orchestration, corpus
//! handling, benchmark aggregation, and report shapes. The `acdc` binary is a
//! thin argument-parsing layer over these.

pub mod bench;
pub mod corpus;
pub mod pipeline;
pub mod report;
