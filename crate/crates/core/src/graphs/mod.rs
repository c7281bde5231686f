//! Static analyses over the checked program: per-function control-flow graphs,
//! postdominator trees, control dependence graphs, and static chain enumeration.
//!
//! Analyses are intraprocedural: dependence edges never cross function
//! boundaries, so every chain stays within one function.

mod cdg;
mod cfg;
mod chains;
mod flow;
pub mod oracle;
mod postdom;

pub use cdg::{build_cdg, control_dependences, control_dependences_raw, Cdg};
pub use cfg::{build_cfg, Cfg, CfgNode};
pub use chains::{enumerate_chains, Chain, DEFAULT_MAX_STATIC_CHAINS};
pub use flow::FlowGraph;
pub use postdom::{postdominators, PostDomTree};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    /// Static chain enumeration exceeded the configured cap; feeds the
    /// localizer's infeasibility exit.
    #[error("chain enumeration at length {length} exceeded the cap of {cap} chains")]
    ChainCapExceeded { length: usize, cap: usize },
    /// A node cannot reach EXIT; the control-flow graph violated its
    /// construction invariant.
    #[error("internal error: {0}")]
    Internal(String),
}
