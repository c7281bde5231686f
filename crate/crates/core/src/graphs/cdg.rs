//! Control dependence via the Ferrante–Ottenstein–Warren construction:
//! for each CFG edge (a, b), every node on the postdominator-tree path from b
//! up to (but excluding) ipdom(a) is directly control-dependent on a. Loop
//! predicates become dependent on themselves, which is what makes chains such
//! as (p, p, s) legal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::minilang::{Program, StatementId};

use super::cfg::{build_cfg, Cfg};
use super::flow::FlowGraph;
use super::postdom::{postdominators, PostDomTree};
use super::GraphError;

/// Program-level control dependence graph. An edge (s1, s2) means s2 is
/// directly control-dependent on predicate s1; edges never cross functions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cdg {
    pub edges: BTreeSet<(StatementId, StatementId)>,
    parents: BTreeMap<StatementId, Vec<StatementId>>,
    children: BTreeMap<StatementId, Vec<StatementId>>,
}

impl Cdg {
    pub fn from_edges(edges: impl IntoIterator<Item = (StatementId, StatementId)>) -> Self {
        let mut cdg = Cdg::default();
        for (a, b) in edges {
            cdg.insert(a, b);
        }
        cdg
    }

    fn insert(&mut self, parent: StatementId, child: StatementId) {
        if self.edges.insert((parent, child)) {
            let parents = self.parents.entry(child).or_default();
            if let Err(pos) = parents.binary_search(&parent) {
                parents.insert(pos, parent);
            }
            let children = self.children.entry(parent).or_default();
            if let Err(pos) = children.binary_search(&child) {
                children.insert(pos, child);
            }
        }
    }

    /// Direct controlling predicates of a statement, ascending by id.
    pub fn parents_of(&self, stmt: StatementId) -> &[StatementId] {
        self.parents.get(&stmt).map_or(&[], Vec::as_slice)
    }

    pub fn children_of(&self, stmt: StatementId) -> &[StatementId] {
        self.children.get(&stmt).map_or(&[], Vec::as_slice)
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Statements with at least one outgoing edge, ascending.
    pub fn sources(&self) -> impl Iterator<Item = StatementId> + '_ {
        self.children.keys().copied()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph cdg {\n");
        for (a, b) in &self.edges {
            let _ = writeln!(out, "  n{} -> n{};", a.0, b.0);
        }
        out.push_str("}\n");
        out
    }
}

/// Control dependences of one function's CFG, as raw node-index pairs.
pub fn control_dependences_raw(graph: &FlowGraph, pdt: &PostDomTree) -> BTreeSet<(usize, usize)> {
    let mut deps = BTreeSet::new();
    for (a, b) in graph.edges() {
        let stop = pdt.ipdom[a];
        let mut cur = Some(b);
        while let Some(n) = cur {
            if Some(n) == stop {
                break;
            }
            deps.insert((a, n));
            cur = pdt.ipdom[n];
        }
    }
    deps
}

/// Control dependences of one function, translated to statement ids.
pub fn control_dependences(program: &Program, cfg: &Cfg, pdt: &PostDomTree) -> Cdg {
    let raw = control_dependences_raw(&cfg.graph, pdt);
    let mut cdg = Cdg::default();
    for (a, b) in raw {
        // ENTRY has a single successor and never sources a dependence; EXIT
        // has no successors; both keep statement_of at None and are skipped.
        if let (Some(sa), Some(sb)) = (cfg.statement_of(a), cfg.statement_of(b)) {
            debug_assert!(
                program.statement(sa).predicate.is_some(),
                "control dependence source {sa} is not a predicate"
            );
            cdg.insert(sa, sb);
        }
    }
    cdg
}

/// Build the whole-program control dependence graph (union over functions).
pub fn build_cdg(program: &Program) -> Result<Cdg, GraphError> {
    let mut cdg = Cdg::default();
    for function in &program.functions {
        let cfg = build_cfg(program, function);
        let pdt = postdominators(&cfg.graph)?;
        let f_cdg = control_dependences(program, &cfg, &pdt);
        for (a, b) in f_cdg.edges {
            cdg.insert(a, b);
        }
    }
    Ok(cdg)
}
