//! Plain directed graph with designated entry and exit, shared by the
//! control-flow lowering and the dominance analyses.

/// A directed graph over node indices `0..len()`. Successor and predecessor
/// lists are kept sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowGraph {
    pub entry: usize,
    pub exit: usize,
    succs: Vec<Vec<usize>>,
    preds: Vec<Vec<usize>>,
}

impl FlowGraph {
    pub fn new(nodes: usize, entry: usize, exit: usize) -> Self {
        FlowGraph { entry, exit, succs: vec![Vec::new(); nodes], preds: vec![Vec::new(); nodes] }
    }

    pub fn len(&self) -> usize {
        self.succs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succs.is_empty()
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        if let Err(pos) = self.succs[from].binary_search(&to) {
            self.succs[from].insert(pos, to);
        }
        if let Err(pos) = self.preds[to].binary_search(&from) {
            self.preds[to].insert(pos, from);
        }
    }

    pub fn succs(&self, node: usize) -> &[usize] {
        &self.succs[node]
    }

    pub fn preds(&self, node: usize) -> &[usize] {
        &self.preds[node]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.succs
            .iter()
            .enumerate()
            .flat_map(|(from, tos)| tos.iter().map(move |&to| (from, to)))
    }

    /// Nodes reachable from `start` following successor edges, `start` included.
    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        self.reach(start, false)
    }

    /// Nodes that can reach `target` following successor edges, `target` included.
    pub fn reaching(&self, target: usize) -> Vec<bool> {
        self.reach(target, true)
    }

    fn reach(&self, origin: usize, reverse: bool) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![origin];
        seen[origin] = true;
        while let Some(n) = stack.pop() {
            let next = if reverse { &self.preds[n] } else { &self.succs[n] };
            for &m in next {
                if !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
        seen
    }
}
