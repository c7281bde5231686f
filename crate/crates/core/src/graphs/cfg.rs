//! Lowering of structured statements into per-function control-flow graphs.
//!
//! One node per statement plus synthetic ENTRY and EXIT nodes. Statement nodes
//! are numbered by their [`StatementId`]s; predicate nodes carry labeled
//! true/false out-edges. `return` edges go to EXIT. Because every `while`
//! keeps its structural false edge and `return` targets EXIT, every node
//! reaches EXIT by construction; the auxiliary ENTRY→EXIT edge of the standard
//! preprocessing is therefore never required, and [`super::postdominators`]
//! reports an internal error if the invariant is ever violated.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::minilang::{FunctionDecl, Program, StatementId, Stmt, StmtKind};

use super::flow::FlowGraph;

/// What a CFG node stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CfgNode {
    Entry,
    Exit,
    Stmt(StatementId),
}

/// Per-function control-flow graph.
#[derive(Debug, Clone)]
pub struct Cfg {
    pub graph: FlowGraph,
    /// Node index → meaning.
    pub nodes: Vec<CfgNode>,
    /// Statement id → node index.
    pub node_of: BTreeMap<StatementId, usize>,
    /// Labeled out-edges of predicate nodes: (predicate node, target, branch).
    pub branch_edges: Vec<(usize, usize, bool)>,
}

impl Cfg {
    pub fn entry(&self) -> usize {
        self.graph.entry
    }

    pub fn exit(&self) -> usize {
        self.graph.exit
    }

    pub fn statement_of(&self, node: usize) -> Option<StatementId> {
        match self.nodes[node] {
            CfgNode::Stmt(id) => Some(id),
            _ => None,
        }
    }

    /// DOT rendering for debug dumps.
    pub fn to_dot(&self, program: &Program, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph \"cfg_{name}\" {{");
        for (i, node) in self.nodes.iter().enumerate() {
            let label = match node {
                CfgNode::Entry => "ENTRY".to_string(),
                CfgNode::Exit => "EXIT".to_string(),
                CfgNode::Stmt(id) => {
                    format!("{id}: {:?}", program.statement(*id).kind)
                }
            };
            let _ = writeln!(out, "  n{i} [label=\"{label}\"];");
        }
        let mut labeled: BTreeMap<(usize, usize), Vec<&str>> = BTreeMap::new();
        for (from, to, branch) in &self.branch_edges {
            labeled.entry((*from, *to)).or_default().push(if *branch { "T" } else { "F" });
        }
        for (from, to) in self.graph.edges() {
            match labeled.get(&(from, to)) {
                Some(tags) => {
                    let _ = writeln!(out, "  n{from} -> n{to} [label=\"{}\"];", tags.join(","));
                }
                None => {
                    let _ = writeln!(out, "  n{from} -> n{to};");
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Build the control-flow graph of one function.
pub fn build_cfg(program: &Program, function: &FunctionDecl) -> Cfg {
    let mut stmt_ids = Vec::new();
    collect_ids(&function.body, &mut stmt_ids);

    let n_stmts = stmt_ids.len();
    let entry = n_stmts;
    let exit = n_stmts + 1;
    let mut nodes: Vec<CfgNode> = stmt_ids.iter().map(|&id| CfgNode::Stmt(id)).collect();
    nodes.push(CfgNode::Entry);
    nodes.push(CfgNode::Exit);

    let node_of: BTreeMap<StatementId, usize> =
        stmt_ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();

    let mut b = Builder {
        graph: FlowGraph::new(n_stmts + 2, entry, exit),
        node_of: &node_of,
        branch_edges: Vec::new(),
        exit,
    };

    let outs = b.lower_block(&function.body, vec![(entry, None)]);
    for (from, branch) in outs {
        b.connect(from, exit, branch);
    }
    let (graph, branch_edges) = (b.graph, b.branch_edges);

    let _ = program; // reserved for future span-aware diagnostics in dumps
    Cfg { graph, nodes, node_of, branch_edges }
}

fn collect_ids(body: &[Stmt], out: &mut Vec<StatementId>) {
    for stmt in body {
        out.push(stmt.id);
        match &stmt.kind {
            StmtKind::If { then_branch, else_branch, .. } => {
                collect_ids(then_branch, out);
                collect_ids(else_branch, out);
            }
            StmtKind::While { body, .. } => collect_ids(body, out),
            _ => {}
        }
    }
}

struct Builder<'a> {
    graph: FlowGraph,
    node_of: &'a BTreeMap<StatementId, usize>,
    branch_edges: Vec<(usize, usize, bool)>,
    exit: usize,
}

impl Builder<'_> {
    fn connect(&mut self, from: usize, to: usize, branch: Option<bool>) {
        self.graph.add_edge(from, to);
        if let Some(b) = branch {
            self.branch_edges.push((from, to, b));
        }
    }

    /// Lower a block given the dangling edges that should enter it; returns the
    /// dangling edges leaving it.
    fn lower_block(
        &mut self,
        stmts: &[Stmt],
        mut incoming: Vec<(usize, Option<bool>)>,
    ) -> Vec<(usize, Option<bool>)> {
        for stmt in stmts {
            let node = self.node_of[&stmt.id];
            for (from, branch) in incoming.drain(..) {
                self.connect(from, node, branch);
            }
            match &stmt.kind {
                StmtKind::If { then_branch, else_branch, .. } => {
                    let then_outs = self.lower_block(then_branch, vec![(node, Some(true))]);
                    let else_outs = self.lower_block(else_branch, vec![(node, Some(false))]);
                    incoming = then_outs;
                    incoming.extend(else_outs);
                }
                StmtKind::While { body, .. } => {
                    let body_outs = self.lower_block(body, vec![(node, Some(true))]);
                    for (from, branch) in body_outs {
                        self.connect(from, node, branch);
                    }
                    incoming = vec![(node, Some(false))];
                }
                StmtKind::Return(_) => {
                    self.connect(node, self.exit, None);
                    // Nothing dangles; following statements are dead code and
                    // get no incoming edge from here.
                    incoming = Vec::new();
                }
                _ => {
                    incoming = vec![(node, None)];
                }
            }
        }
        incoming
    }
}
