//! Brute-force reference implementations of postdomination and control
//! dependence, straight from their definitions, plus a seeded random graph
//! generator. These exist to verify the production analyses and deliberately
//! share no code with them.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::flow::FlowGraph;

/// `sets[n][d]` ⟺ d postdominates n, i.e. d lies on every path from n to EXIT.
/// Computed by checking that no path from n reaches EXIT while avoiding d.
#[allow(clippy::needless_range_loop)]
pub fn brute_force_postdominators(g: &FlowGraph) -> Vec<Vec<bool>> {
    let n = g.len();
    let mut sets = vec![vec![false; n]; n];
    for node in 0..n {
        for cand in 0..n {
            sets[node][cand] = if node == cand {
                true
            } else {
                !reaches_exit_avoiding(g, node, cand)
            };
        }
    }
    sets
}

fn reaches_exit_avoiding(g: &FlowGraph, from: usize, avoid: usize) -> bool {
    if from == avoid {
        return false;
    }
    let mut seen = vec![false; g.len()];
    let mut stack = vec![from];
    seen[from] = true;
    while let Some(cur) = stack.pop() {
        if cur == g.exit {
            return true;
        }
        for &next in g.succs(cur) {
            if next != avoid && !seen[next] {
                seen[next] = true;
                stack.push(next);
            }
        }
    }
    false
}

/// Definitional control dependence: b depends on a iff some successor u of a
/// is postdominated by b, while b does not postdominate a itself (a node does
/// depend on itself when it postdominates one of its successors, which is the
/// loop-predicate case).
#[allow(clippy::needless_range_loop)]
pub fn brute_force_control_deps(
    g: &FlowGraph,
    pdom_sets: &[Vec<bool>],
) -> BTreeSet<(usize, usize)> {
    let mut deps = BTreeSet::new();
    for a in 0..g.len() {
        for b in 0..g.len() {
            let on_some_branch = g.succs(a).iter().any(|&u| pdom_sets[u][b]);
            if on_some_branch && (a == b || !pdom_sets[a][b]) {
                deps.insert((a, b));
            }
        }
    }
    deps
}

/// Seeded random digraph shaped like a CFG: a dedicated entry with one
/// successor, an exit with none, every other node with one or two successors,
/// and every node guaranteed to reach exit.
pub fn random_flow_graph(seed: u64, max_nodes: usize) -> FlowGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(4..=max_nodes.max(4));
    let entry = 0;
    let exit = n - 1;
    let mut g = FlowGraph::new(n, entry, exit);

    g.add_edge(entry, rng.gen_range(1..n));
    for node in 1..n - 1 {
        let out_degree = if rng.gen_bool(0.5) { 2 } else { 1 };
        for _ in 0..out_degree {
            // Any target but entry; self-edges are allowed.
            let target = rng.gen_range(1..n);
            g.add_edge(node, target);
        }
    }

    // Patch up nodes that cannot reach exit.
    loop {
        let reaching = g.reaching(exit);
        match (0..n).find(|&v| !reaching[v]) {
            Some(stuck) => g.add_edge(stuck, exit),
            None => break,
        }
    }
    g
}
