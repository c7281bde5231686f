//! Control dependence chains and bounded static enumeration.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::minilang::StatementId;

use super::cdg::Cdg;
use super::GraphError;

/// Enumeration cap protecting the localizer from chain blow-up.
pub const DEFAULT_MAX_STATIC_CHAINS: usize = 100_000;

/// A sequence of statements (s_1, …, s_k), k ≥ 2, where each adjacent pair is
/// a control dependence edge. The chain's length is its edge count, k − 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Chain {
    nodes: Vec<StatementId>,
}

impl Chain {
    /// Panics if the sequence is shorter than two nodes; adjacency against a
    /// particular Cdg is the caller's contract.
    pub fn new(nodes: Vec<StatementId>) -> Self {
        assert!(nodes.len() >= 2, "a chain has at least two nodes");
        Chain { nodes }
    }

    pub fn nodes(&self) -> &[StatementId] {
        &self.nodes
    }

    pub fn head(&self) -> StatementId {
        self.nodes[0]
    }

    pub fn tail(&self) -> StatementId {
        *self.nodes.last().expect("chains are non-empty")
    }

    /// Edge count (k − 1 for k nodes).
    pub fn length(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn edges(&self) -> impl Iterator<Item = (StatementId, StatementId)> + '_ {
        self.nodes.windows(2).map(|w| (w[0], w[1]))
    }

    /// Is `self` an extension of `other` (longer, with `other` as a prefix)?
    pub fn extends(&self, other: &Chain) -> bool {
        self.nodes.len() > other.nodes.len() && self.nodes.starts_with(&other.nodes)
    }

    /// Every adjacent pair is an edge of `cdg`.
    pub fn is_valid_in(&self, cdg: &Cdg) -> bool {
        self.edges().all(|e| cdg.edges.contains(&e))
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, n) in self.nodes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, ")")
    }
}

/// Enumerate all chains of exactly `length` edges, in lexicographic node
/// order. Nodes may repeat (loop self-edges make (p,p,s) legal). Enumeration
/// aborts with [`GraphError::ChainCapExceeded`] once more than `cap` chains
/// exist, which drives the localizer's infeasibility exit.
pub fn enumerate_chains(cdg: &Cdg, length: usize, cap: usize) -> Result<Vec<Chain>, GraphError> {
    assert!(length >= 1, "chain length is at least one edge");
    let mut out = Vec::new();
    let mut prefix: Vec<StatementId> = Vec::with_capacity(length + 1);
    for start in cdg.sources() {
        prefix.push(start);
        walk(cdg, length, cap, &mut prefix, &mut out)?;
        prefix.pop();
    }
    Ok(out)
}

fn walk(
    cdg: &Cdg,
    remaining: usize,
    cap: usize,
    prefix: &mut Vec<StatementId>,
    out: &mut Vec<Chain>,
) -> Result<(), GraphError> {
    if remaining == 0 {
        if out.len() >= cap {
            return Err(GraphError::ChainCapExceeded {
                length: prefix.len() - 1,
                cap,
            });
        }
        out.push(Chain::new(prefix.clone()));
        return Ok(());
    }
    let last = *prefix.last().expect("prefix starts non-empty");
    for &next in cdg.children_of(last) {
        prefix.push(next);
        walk(cdg, remaining - 1, cap, prefix, out)?;
        prefix.pop();
    }
    Ok(())
}
