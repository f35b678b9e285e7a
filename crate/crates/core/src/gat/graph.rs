use crate::aggregator::AggregatedGraph;

/// Neighborhoods used by attention: undirected one-hop neighbors plus a
/// self-loop on every node, in compressed row form with sorted rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttentionGraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl AttentionGraph {
    /// `neighbors[i]` lists the nodes adjacent to `i`; duplicates and
    /// existing self-loops are tolerated.
    pub fn from_neighbors(neighbors: &[Vec<usize>]) -> Self {
        let mut offsets = Vec::with_capacity(neighbors.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for (i, list) in neighbors.iter().enumerate() {
            let mut row: Vec<usize> = list.iter().copied().chain(std::iter::once(i)).collect();
            row.sort_unstable();
            row.dedup();
            assert!(row.last().is_none_or(|&j| j < neighbors.len()), "neighbor index out of range");
            targets.extend(row);
            offsets.push(targets.len());
        }
        Self { offsets, targets }
    }

    pub fn from_edges(nodes: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); nodes];
        for &(u, v) in edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        Self::from_neighbors(&adj)
    }

    pub fn from_aggregated(agg: &AggregatedGraph) -> Self {
        Self::from_neighbors(&agg.neighbors())
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of stored (directed) attention edges, self-loops included.
    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn neighborhood(&self, i: usize) -> &[usize] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Range of edge slots belonging to node `i`.
    pub fn edge_range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    pub(crate) fn targets(&self) -> &[usize] {
        &self.targets
    }
}
