//! Exhaustive time-instant reference for chain coverage: search for explicit
//! strictly increasing timestamps matching each chain edge in turn, by
//! backtracking over every candidate tuple. Verifies the greedy matcher and
//! shares no code with it.

use crate::graphs::Chain;
use crate::runtime::CdEvent;

pub fn exhaustive_chain_covered(chain: &Chain, events: &[CdEvent]) -> bool {
    let edges: Vec<_> = chain.edges().collect();
    search(&edges, events, 0, 0)
}

fn search(
    edges: &[(crate::minilang::StatementId, crate::minilang::StatementId)],
    events: &[CdEvent],
    edge_idx: usize,
    from_event: usize,
) -> bool {
    if edge_idx == edges.len() {
        return true;
    }
    let (parent, child) = edges[edge_idx];
    for (i, event) in events.iter().enumerate().skip(from_event) {
        if event.parent == parent
            && event.child == child
            && search(edges, events, edge_idx + 1, i + 1)
        {
            return true;
        }
    }
    false
}
