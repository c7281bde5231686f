//! Postdominator trees via the iterative dominance algorithm of Cooper,
//! Harvey, and Kennedy, run on the reverse graph rooted at EXIT.

use super::flow::FlowGraph;
use super::GraphError;

/// Immediate-postdominator mapping. EXIT is the root and has no parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PostDomTree {
    /// `ipdom[n]` is `None` exactly for the root (EXIT).
    pub ipdom: Vec<Option<usize>>,
    pub root: usize,
}

impl PostDomTree {
    /// Does `d` postdominate `n`? Reflexive: every node postdominates itself.
    pub fn postdominates(&self, d: usize, n: usize) -> bool {
        let mut cur = n;
        loop {
            if cur == d {
                return true;
            }
            match self.ipdom[cur] {
                Some(next) => cur = next,
                None => return false,
            }
        }
    }
}

/// Compute the postdominator tree of a graph in which every node reaches EXIT.
pub fn postdominators(graph: &FlowGraph) -> Result<PostDomTree, GraphError> {
    let reaches_exit = graph.reaching(graph.exit);
    if let Some(stuck) = (0..graph.len()).find(|&n| !reaches_exit[n]) {
        return Err(GraphError::Internal(format!(
            "node {stuck} cannot reach EXIT; postdominators are undefined"
        )));
    }

    // Dominators of the reverse graph rooted at EXIT.
    let root = graph.exit;
    let rpo = reverse_postorder_on_reverse(graph, root);
    let mut order_index = vec![usize::MAX; graph.len()];
    for (i, &n) in rpo.iter().enumerate() {
        order_index[n] = i;
    }

    let mut idom: Vec<Option<usize>> = vec![None; graph.len()];
    idom[root] = Some(root);
    let mut changed = true;
    while changed {
        changed = false;
        for &n in rpo.iter().skip(1) {
            // Predecessors in the reverse graph are successors in the original.
            let mut new_idom: Option<usize> = None;
            for &p in graph.succs(n) {
                if idom[p].is_none() {
                    continue;
                }
                new_idom = Some(match new_idom {
                    None => p,
                    Some(cur) => intersect(&idom, &order_index, p, cur),
                });
            }
            if let Some(ni) = new_idom {
                if idom[n] != Some(ni) {
                    idom[n] = Some(ni);
                    changed = true;
                }
            }
        }
    }

    let ipdom = idom
        .iter()
        .enumerate()
        .map(|(n, &d)| if n == root { None } else { d })
        .collect();
    Ok(PostDomTree { ipdom, root })
}

fn intersect(idom: &[Option<usize>], order: &[usize], mut a: usize, mut b: usize) -> usize {
    while a != b {
        while order[a] > order[b] {
            a = idom[a].expect("processed node has a candidate idom");
        }
        while order[b] > order[a] {
            b = idom[b].expect("processed node has a candidate idom");
        }
    }
    a
}

/// Reverse postorder of a DFS over predecessor edges starting at `root`, which
/// is a valid processing order for dominance on the reverse graph.
fn reverse_postorder_on_reverse(graph: &FlowGraph, root: usize) -> Vec<usize> {
    let mut visited = vec![false; graph.len()];
    let mut postorder = Vec::with_capacity(graph.len());
    // Iterative DFS with an explicit phase marker.
    let mut stack = vec![(root, 0usize)];
    visited[root] = true;
    while let Some((node, child_idx)) = stack.pop() {
        let preds = graph.preds(node);
        if child_idx < preds.len() {
            stack.push((node, child_idx + 1));
            let next = preds[child_idx];
            if !visited[next] {
                visited[next] = true;
                stack.push((next, 0));
            }
        } else {
            postorder.push(node);
        }
    }
    postorder.reverse();
    postorder
}
