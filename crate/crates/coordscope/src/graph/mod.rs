//! Weighted graph containers and the shared algorithms: connected
//! components, Louvain communities, eigenvector centrality, and
//! agglomerative hierarchical clustering.

mod eigenvector;
mod hierarchical;
mod louvain;

pub use eigenvector::eigenvector_centrality;
pub use hierarchical::{hierarchical_cluster, Dendrogram, Linkage, Merge, Metric};
pub use louvain::louvain;

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("self-loop on node `{0}` is not allowed")]
    SelfLoop(String),
    #[error("edge weight must be positive, got {0}")]
    NonPositiveWeight(f64),
    #[error("power iteration did not converge after {iterations} iterations (last delta {delta:e})")]
    NoConvergence { iterations: usize, delta: f64 },
    #[error("eigenvector centrality requires a nonempty graph")]
    EmptyGraph,
    #[error("hierarchical clustering requires at least 2 items, got {0}")]
    TooFewItems(usize),
    #[error("matrix must be square: {rows} rows but row {row} has {cols} columns")]
    NotSquare { rows: usize, row: usize, cols: usize },
}

/// Undirected weighted graph. Nodes are string ids; parallel edges are
/// folded into the weight.
#[derive(Debug, Clone, Default)]
pub struct WeightedGraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    adjacency: Vec<BTreeMap<usize, f64>>,
}

impl WeightedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), i);
        self.adjacency.push(BTreeMap::new());
        i
    }

    /// Accumulates weight onto the undirected edge {a, b}.
    pub fn add_edge(&mut self, a: &str, b: &str, weight: f64) -> Result<(), GraphError> {
        if a == b {
            return Err(GraphError::SelfLoop(a.to_string()));
        }
        if weight <= 0.0 {
            return Err(GraphError::NonPositiveWeight(weight));
        }
        let ia = self.add_node(a);
        let ib = self.add_node(b);
        *self.adjacency[ia].entry(ib).or_insert(0.0) += weight;
        *self.adjacency[ib].entry(ia).or_insert(0.0) += weight;
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|adj| adj.len()).sum::<usize>() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn node_ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id_of(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn weight(&self, a: &str, b: &str) -> Option<f64> {
        let ia = self.index_of(a)?;
        let ib = self.index_of(b)?;
        self.adjacency[ia].get(&ib).copied()
    }

    pub fn neighbors(&self, index: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.adjacency[index].iter().map(|(&j, &w)| (j, w))
    }

    pub fn degree(&self, index: usize) -> usize {
        self.adjacency[index].len()
    }

    /// Weighted degree (strength) of a node.
    pub fn strength(&self, index: usize) -> f64 {
        self.adjacency[index].values().sum()
    }

    /// Sum of all edge weights.
    pub fn total_weight(&self) -> f64 {
        self.adjacency
            .iter()
            .map(|adj| adj.values().sum::<f64>())
            .sum::<f64>()
            / 2.0
    }

    /// Edges as (a, b, weight) with a < b by node id, sorted.
    pub fn edges(&self) -> Vec<(String, String, f64)> {
        let mut out = Vec::new();
        for (i, adj) in self.adjacency.iter().enumerate() {
            for (&j, &w) in adj {
                if i < j {
                    let (a, b) = if self.ids[i] <= self.ids[j] {
                        (self.ids[i].clone(), self.ids[j].clone())
                    } else {
                        (self.ids[j].clone(), self.ids[i].clone())
                    };
                    out.push((a, b, w));
                }
            }
        }
        out.sort_by(|x, y| (&x.0, &x.1).cmp(&(&y.0, &y.1)));
        out
    }

    /// Dense weighted adjacency matrix in a caller-supplied node order.
    pub fn adjacency_matrix(&self, order: &[String]) -> Vec<Vec<f64>> {
        let n = order.len();
        let mut matrix = vec![vec![0.0; n]; n];
        for (i, a) in order.iter().enumerate() {
            for (j, b) in order.iter().enumerate() {
                if i != j {
                    if let Some(w) = self.weight(a, b) {
                        matrix[i][j] = w;
                    }
                }
            }
        }
        matrix
    }
}

/// Directed weighted graph with the same id handling as [`WeightedGraph`].
#[derive(Debug, Clone, Default)]
pub struct WeightedDigraph {
    ids: Vec<String>,
    index: HashMap<String, usize>,
    out_adjacency: Vec<BTreeMap<usize, f64>>,
    in_adjacency: Vec<BTreeMap<usize, f64>>,
}

impl WeightedDigraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), i);
        self.out_adjacency.push(BTreeMap::new());
        self.in_adjacency.push(BTreeMap::new());
        i
    }

    pub fn add_edge(&mut self, source: &str, target: &str, weight: f64) -> Result<(), GraphError> {
        if source == target {
            return Err(GraphError::SelfLoop(source.to_string()));
        }
        if weight <= 0.0 {
            return Err(GraphError::NonPositiveWeight(weight));
        }
        let is = self.add_node(source);
        let it = self.add_node(target);
        *self.out_adjacency[is].entry(it).or_insert(0.0) += weight;
        *self.in_adjacency[it].entry(is).or_insert(0.0) += weight;
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out_adjacency.iter().map(|adj| adj.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id_of(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn weight(&self, source: &str, target: &str) -> Option<f64> {
        let is = self.index_of(source)?;
        let it = self.index_of(target)?;
        self.out_adjacency[is].get(&it).copied()
    }

    /// Number of distinct in-neighbors.
    pub fn in_degree(&self, index: usize) -> usize {
        self.in_adjacency[index].len()
    }

    pub fn out_degree(&self, index: usize) -> usize {
        self.out_adjacency[index].len()
    }

    pub fn in_neighbors(&self, index: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.in_adjacency[index].iter().map(|(&j, &w)| (j, w))
    }

    pub fn out_neighbors(&self, index: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.out_adjacency[index].iter().map(|(&j, &w)| (j, w))
    }

    /// Edges as (source, target, weight) sorted by id pair.
    pub fn edges(&self) -> Vec<(String, String, f64)> {
        let mut out = Vec::new();
        for (i, adj) in self.out_adjacency.iter().enumerate() {
            for (&j, &w) in adj {
                out.push((self.ids[i].clone(), self.ids[j].clone(), w));
            }
        }
        out.sort_by(|x, y| (&x.0, &x.1).cmp(&(&y.0, &y.1)));
        out
    }

    /// Drop edges below the weight floor, then drop isolated nodes.
    pub fn filter_min_weight(&self, min_weight: f64) -> WeightedDigraph {
        let mut filtered = WeightedDigraph::new();
        for (i, adj) in self.out_adjacency.iter().enumerate() {
            for (&j, &w) in adj {
                if w >= min_weight {
                    filtered
                        .add_edge(&self.ids[i], &self.ids[j], w)
                        .expect("edges already validated");
                }
            }
        }
        filtered
    }
}

/// Connected components of an undirected graph, singletons included.
/// Components are sorted by smallest member id; members are sorted.
pub fn connected_components(graph: &WeightedGraph) -> Vec<Vec<String>> {
    let n = graph.node_count();
    let mut seen = vec![false; n];
    let mut components = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let mut members = Vec::new();
        while let Some(node) = stack.pop() {
            members.push(graph.id_of(node).to_string());
            for (next, _) in graph.neighbors(node) {
                if !seen[next] {
                    seen[next] = true;
                    stack.push(next);
                }
            }
        }
        members.sort();
        components.push(members);
    }
    components.sort_by(|a, b| a[0].cmp(&b[0]));
    components
}

/// Indices of the largest component (ties broken toward the component
/// holding the smallest node id).
pub(crate) fn largest_component_indices(graph: &WeightedGraph) -> Vec<usize> {
    let components = connected_components(graph);
    let best = components
        .iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then_with(|| b[0].cmp(&a[0])))
        .cloned()
        .unwrap_or_default();
    best.iter()
        .map(|id| graph.index_of(id).expect("component member exists"))
        .collect()
}

/// Modularity of a partition (node index -> community id) at resolution
/// `gamma`.
pub fn modularity(graph: &WeightedGraph, communities: &[usize], gamma: f64) -> f64 {
    let two_m = 2.0 * graph.total_weight();
    if two_m == 0.0 {
        return 0.0;
    }
    let n_comms = communities.iter().copied().max().map_or(0, |m| m + 1);
    let mut internal = vec![0.0; n_comms];
    let mut strength = vec![0.0; n_comms];
    for node in 0..graph.node_count() {
        let c = communities[node];
        strength[c] += graph.strength(node);
        for (next, w) in graph.neighbors(node) {
            if communities[next] == c {
                internal[c] += w;
            }
        }
    }
    (0..n_comms)
        .map(|c| internal[c] / two_m - gamma * (strength[c] / two_m).powi(2))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(edges: &[(&str, &str, f64)]) -> WeightedGraph {
        let mut g = WeightedGraph::new();
        for (a, b, w) in edges {
            g.add_edge(a, b, *w).unwrap();
        }
        g
    }

    #[test]
    fn undirected_weight_access_is_symmetric() {
        let g = graph(&[("a", "b", 2.0)]);
        assert_eq!(g.weight("a", "b"), Some(2.0));
        assert_eq!(g.weight("b", "a"), Some(2.0));
        assert_eq!(g.weight("a", "c"), None);
    }

    #[test]
    fn parallel_edges_fold_into_weight() {
        let mut g = WeightedGraph::new();
        g.add_edge("a", "b", 1.0).unwrap();
        g.add_edge("b", "a", 2.0).unwrap();
        assert_eq!(g.weight("a", "b"), Some(3.0));
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn self_loops_and_bad_weights_are_rejected() {
        let mut g = WeightedGraph::new();
        assert!(matches!(g.add_edge("a", "a", 1.0), Err(GraphError::SelfLoop(_))));
        assert!(matches!(
            g.add_edge("a", "b", 0.0),
            Err(GraphError::NonPositiveWeight(_))
        ));
        let mut d = WeightedDigraph::new();
        assert!(matches!(d.add_edge("a", "a", 1.0), Err(GraphError::SelfLoop(_))));
    }

    #[test]
    fn components_partition_disjoint_pairs() {
        let g = graph(&[("a", "b", 1.0), ("c", "d", 1.0)]);
        let comps = connected_components(&g);
        assert_eq!(comps, vec![vec!["a", "b"], vec!["c", "d"]]);
    }

    #[test]
    fn components_of_empty_graph() {
        let g = WeightedGraph::new();
        assert!(connected_components(&g).is_empty());
    }

    #[test]
    fn components_path_plus_isolate() {
        // oracle: brute-force reachability over the 4 nodes
        let mut g = graph(&[("a", "b", 1.0), ("b", "c", 1.0)]);
        g.add_node("d");
        let comps = connected_components(&g);
        assert_eq!(comps, vec![vec!["a", "b", "c"], vec!["d"]]);

        let brute = brute_force_components(&g);
        assert_eq!(comps, brute);
    }

    /// Reachability by repeated relaxation; independent of the DFS path.
    fn brute_force_components(g: &WeightedGraph) -> Vec<Vec<String>> {
        let n = g.node_count();
        let mut label: Vec<usize> = (0..n).collect();
        loop {
            let mut changed = false;
            for i in 0..n {
                for (j, _) in g.neighbors(i) {
                    let low = label[i].min(label[j]);
                    if label[i] != low || label[j] != low {
                        label[i] = low;
                        label[j] = low;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for i in 0..n {
            groups.entry(label[i]).or_default().push(g.id_of(i).to_string());
        }
        let mut out: Vec<Vec<String>> = groups
            .into_values()
            .map(|mut v| {
                v.sort();
                v
            })
            .collect();
        out.sort_by(|a, b| a[0].cmp(&b[0]));
        out
    }

    #[test]
    fn components_cover_all_nodes_disjointly() {
        let g = graph(&[("a", "b", 1.0), ("b", "c", 2.0), ("x", "y", 1.0)]);
        let comps = connected_components(&g);
        let mut all: Vec<String> = comps.concat();
        all.sort();
        let mut ids: Vec<String> = g.node_ids().to_vec();
        ids.sort();
        assert_eq!(all, ids);
    }

    #[test]
    fn digraph_filter_drops_light_edges_and_isolates() {
        let mut d = WeightedDigraph::new();
        d.add_edge("a", "b", 2.0).unwrap();
        d.add_edge("c", "b", 1.0).unwrap();
        let f = d.filter_min_weight(2.0);
        assert!(f.contains("a"));
        assert!(f.contains("b"));
        assert!(!f.contains("c"));
        assert_eq!(f.edge_count(), 1);
    }

    #[test]
    fn digraph_in_degree_counts_distinct_sources() {
        let mut d = WeightedDigraph::new();
        d.add_edge("a", "hub", 2.0).unwrap();
        d.add_edge("b", "hub", 1.0).unwrap();
        d.add_edge("a", "hub", 1.0).unwrap();
        let hub = d.index_of("hub").unwrap();
        assert_eq!(d.in_degree(hub), 2);
        assert_eq!(d.weight("a", "hub"), Some(3.0));
    }
}
