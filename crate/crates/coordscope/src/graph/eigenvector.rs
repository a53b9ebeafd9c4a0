//! Eigenvector centrality by power iteration on the weighted adjacency.
//!
//! Iterates with A + I so the sequence cannot oscillate on bipartite
//! structures; the shift leaves the eigenvectors of A unchanged. On a
//! disconnected graph the scores are computed on the largest component
//! (ties toward the one holding the smallest node id) and every other
//! node scores 0, since the principal eigenvector of a disconnected
//! adjacency is component-ambiguous.

use std::collections::BTreeMap;

use super::{largest_component_indices, GraphError, WeightedGraph};

/// L2-normalized, non-negative principal-eigenvector scores.
///
/// Halts when the L2 distance between successive iterates drops below
/// `tol`; fails after `max_iter` iterations naming the last delta.
pub fn eigenvector_centrality(
    graph: &WeightedGraph,
    tol: f64,
    max_iter: usize,
) -> Result<BTreeMap<String, f64>, GraphError> {
    if graph.is_empty() {
        return Err(GraphError::EmptyGraph);
    }

    let component = largest_component_indices(graph);
    let mut in_component = vec![false; graph.node_count()];
    for &idx in &component {
        in_component[idx] = true;
    }

    let n = component.len() as f64;
    let mut current = vec![0.0f64; graph.node_count()];
    for &idx in &component {
        current[idx] = 1.0 / n.sqrt();
    }

    let mut delta = f64::INFINITY;
    for _ in 0..max_iter {
        let mut next = current.clone();
        for &idx in &component {
            for (nbr, w) in graph.neighbors(idx) {
                if in_component[nbr] {
                    next[idx] += w * current[nbr];
                }
            }
        }
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in next.iter_mut() {
                *x /= norm;
            }
        }
        delta = current
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        current = next;
        if delta < tol {
            return Ok(graph
                .node_ids()
                .iter()
                .enumerate()
                .map(|(idx, id)| (id.clone(), current[idx].max(0.0)))
                .collect());
        }
    }
    Err(GraphError::NoConvergence {
        iterations: max_iter,
        delta,
    })
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
    fn star_center_dominates_and_leaves_tie() {
        let g = graph(&[
            ("hub", "l1", 1.0),
            ("hub", "l2", 1.0),
            ("hub", "l3", 1.0),
            ("hub", "l4", 1.0),
        ]);
        let scores = eigenvector_centrality(&g, 1e-9, 1000).unwrap();
        let hub = scores["hub"];
        for leaf in ["l1", "l2", "l3", "l4"] {
            assert!(hub > scores[leaf] + 1e-6);
        }
        assert!((scores["l1"] - scores["l4"]).abs() < 1e-9);
    }

    #[test]
    fn four_cycle_is_uniform() {
        let g = graph(&[
            ("a", "b", 1.0),
            ("b", "c", 1.0),
            ("c", "d", 1.0),
            ("d", "a", 1.0),
        ]);
        let scores = eigenvector_centrality(&g, 1e-9, 1000).unwrap();
        for id in ["b", "c", "d"] {
            assert!((scores[id] - scores["a"]).abs() < 1e-8);
        }
        let norm: f64 = scores.values().map(|s| s * s).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-9);
    }

    #[test]
    fn weighted_triangle_matches_closed_form() {
        // w(ab)=2, w(bc)=1, w(ac)=1: principal eigenvector is proportional
        // to (1, 1, sqrt(3)-1) with eigenvalue 1+sqrt(3).
        let g = graph(&[("a", "b", 2.0), ("b", "c", 1.0), ("a", "c", 1.0)]);
        let scores = eigenvector_centrality(&g, 1e-12, 5000).unwrap();
        let norm = (6.0f64 - 2.0 * 3.0f64.sqrt()).sqrt();
        let expected_ab = 1.0 / norm;
        let expected_c = (3.0f64.sqrt() - 1.0) / norm;
        assert!((scores["a"] - expected_ab).abs() < 1e-6, "a={}", scores["a"]);
        assert!((scores["b"] - expected_ab).abs() < 1e-6);
        assert!((scores["c"] - expected_c).abs() < 1e-6);
    }

    #[test]
    fn residual_satisfies_eigen_equation() {
        let g = graph(&[
            ("a", "b", 2.0),
            ("b", "c", 1.0),
            ("a", "c", 1.0),
            ("c", "d", 3.0),
        ]);
        let scores = eigenvector_centrality(&g, 1e-13, 10000).unwrap();
        let ids: Vec<String> = g.node_ids().to_vec();
        let v: Vec<f64> = ids.iter().map(|id| scores[id]).collect();
        let mut av = vec![0.0; ids.len()];
        for (i, _) in ids.iter().enumerate() {
            for (j, w) in g.neighbors(i) {
                av[i] += w * v[j];
            }
        }
        let lambda: f64 = v.iter().zip(&av).map(|(x, y)| x * y).sum();
        let residual: f64 = av
            .iter()
            .zip(&v)
            .map(|(a, x)| (a - lambda * x) * (a - lambda * x))
            .sum::<f64>()
            .sqrt();
        assert!(residual < 1e-9, "residual {residual}");
    }

    #[test]
    fn disconnected_scores_follow_largest_component() {
        let g = graph(&[
            ("a", "b", 1.0),
            ("b", "c", 1.0),
            ("x", "y", 10.0),
        ]);
        let scores = eigenvector_centrality(&g, 1e-9, 1000).unwrap();
        assert_eq!(scores["x"], 0.0);
        assert_eq!(scores["y"], 0.0);
        assert!(scores["b"] > 0.0);
    }

    #[test]
    fn empty_graph_is_an_error() {
        let g = WeightedGraph::new();
        assert!(matches!(
            eigenvector_centrality(&g, 1e-9, 100),
            Err(GraphError::EmptyGraph)
        ));
    }

    #[test]
    fn non_convergence_names_the_delta() {
        let g = graph(&[("a", "b", 1.0), ("b", "c", 5.0)]);
        let err = eigenvector_centrality(&g, 1e-15, 1).unwrap_err();
        match err {
            GraphError::NoConvergence { iterations, delta } => {
                assert_eq!(iterations, 1);
                assert!(delta > 0.0);
            }
            other => panic!("unexpected error: {other}"),
        }
    }
}
