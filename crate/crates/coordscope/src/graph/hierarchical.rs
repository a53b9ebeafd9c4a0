//! Naive agglomerative hierarchical clustering over the rows of a square
//! non-negative matrix. Distances between items are taken between matrix
//! rows; merge ties are broken toward the lexicographically smallest
//! cluster-id pair so the dendrogram is reproducible.

use serde::Serialize;

use super::GraphError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Average,
    Single,
    Complete,
}

impl std::str::FromStr for Linkage {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "average" => Ok(Linkage::Average),
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            other => Err(format!("unknown linkage `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Euclidean,
    Cityblock,
}

impl std::str::FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "euclidean" => Ok(Metric::Euclidean),
            "cityblock" | "manhattan" => Ok(Metric::Cityblock),
            other => Err(format!("unknown metric `{other}`")),
        }
    }
}

/// One agglomeration step. Cluster ids follow the usual convention:
/// leaves are 0..n-1 and merge `i` creates cluster `n + i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub size: usize,
}

/// Binary merge tree over labeled leaves.
#[derive(Debug, Clone)]
pub struct Dendrogram {
    labels: Vec<String>,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    pub fn leaf_count(&self) -> usize {
        self.labels.len()
    }

    fn cluster_height(&self, cluster: usize) -> f64 {
        if cluster < self.labels.len() {
            0.0
        } else {
            self.merges[cluster - self.labels.len()].height
        }
    }

    /// Newick serialization with branch lengths measured between merge
    /// heights, terminated by `;`.
    pub fn to_newick(&self) -> String {
        fn walk(d: &Dendrogram, cluster: usize, out: &mut String) {
            let n = d.labels.len();
            if cluster < n {
                out.push_str(&d.labels[cluster]);
                return;
            }
            let merge = &d.merges[cluster - n];
            out.push('(');
            walk(d, merge.left, out);
            out.push(':');
            push_len(merge.height - d.cluster_height(merge.left), out);
            out.push(',');
            walk(d, merge.right, out);
            out.push(':');
            push_len(merge.height - d.cluster_height(merge.right), out);
            out.push(')');
        }
        fn push_len(len: f64, out: &mut String) {
            out.push_str(&format!("{len}"));
        }
        let mut out = String::new();
        if self.labels.len() == 1 {
            out.push_str(&self.labels[0]);
        } else if !self.merges.is_empty() {
            walk(self, self.labels.len() + self.merges.len() - 1, &mut out);
        }
        out.push(';');
        out
    }
}

fn row_distance(a: &[f64], b: &[f64], metric: Metric) -> f64 {
    match metric {
        Metric::Euclidean => a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt(),
        Metric::Cityblock => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
    }
}

/// Agglomerate the rows of `matrix` into a complete binary dendrogram.
///
/// `labels` names the items (one per row). The matrix must be square;
/// at least two items are required.
pub fn hierarchical_cluster(
    matrix: &[Vec<f64>],
    labels: &[String],
    linkage: Linkage,
    metric: Metric,
) -> Result<Dendrogram, GraphError> {
    let n = matrix.len();
    if n < 2 {
        return Err(GraphError::TooFewItems(n));
    }
    for (row_idx, row) in matrix.iter().enumerate() {
        if row.len() != n {
            return Err(GraphError::NotSquare {
                rows: n,
                row: row_idx,
                cols: row.len(),
            });
        }
    }
    debug_assert_eq!(labels.len(), n);

    // active clusters: id -> member leaves
    let mut members: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    let mut active: Vec<usize> = (0..n).collect();
    // pairwise distance between active clusters, keyed by (min id, max id)
    let mut dist: std::collections::HashMap<(usize, usize), f64> = std::collections::HashMap::new();
    for i in 0..n {
        for j in (i + 1)..n {
            dist.insert((i, j), row_distance(&matrix[i], &matrix[j], metric));
        }
    }

    let mut merges = Vec::with_capacity(n - 1);
    while active.len() > 1 {
        // smallest distance; ties toward the lexicographically smallest pair
        let mut best: Option<((usize, usize), f64)> = None;
        for (ai, &a) in active.iter().enumerate() {
            for &b in &active[ai + 1..] {
                let key = (a.min(b), a.max(b));
                let d = dist[&key];
                match best {
                    None => best = Some((key, d)),
                    Some((bk, bd)) => {
                        if d < bd || (d == bd && key < bk) {
                            best = Some((key, d));
                        }
                    }
                }
            }
        }
        let ((a, b), height) = best.expect("two active clusters remain");

        let left_members = members[a].take().expect("active cluster");
        let right_members = members[b].take().expect("active cluster");
        let new_id = members.len();
        let size = left_members.len() + right_members.len();

        active.retain(|&c| c != a && c != b);
        for &other in &active {
            let da = dist[&(a.min(other), a.max(other))];
            let db = dist[&(b.min(other), b.max(other))];
            let combined = match linkage {
                Linkage::Average => {
                    let la = left_members.len() as f64;
                    let lb = right_members.len() as f64;
                    (la * da + lb * db) / (la + lb)
                }
                Linkage::Single => da.min(db),
                Linkage::Complete => da.max(db),
            };
            dist.insert((other.min(new_id), other.max(new_id)), combined);
        }

        let mut merged = left_members;
        merged.extend(right_members);
        members.push(Some(merged));
        active.push(new_id);
        merges.push(Merge {
            left: a,
            right: b,
            height,
            size,
        });
    }

    Ok(Dendrogram {
        labels: labels.to_vec(),
        merges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn identical_rows_merge_first_at_zero() {
        let matrix = vec![
            vec![0.0, 1.0, 2.0],
            vec![0.0, 1.0, 2.0],
            vec![5.0, 5.0, 5.0],
        ];
        let d = hierarchical_cluster(&matrix, &labels(&["A", "B", "C"]), Linkage::Average, Metric::Euclidean)
            .unwrap();
        assert_eq!(d.merges()[0].left, 0);
        assert_eq!(d.merges()[0].right, 1);
        assert_eq!(d.merges()[0].height, 0.0);
    }

    #[test]
    fn two_items_merge_at_row_distance() {
        let matrix = vec![vec![0.0, 3.0], vec![4.0, 0.0]];
        let d = hierarchical_cluster(&matrix, &labels(&["A", "B"]), Linkage::Average, Metric::Euclidean)
            .unwrap();
        assert_eq!(d.merges().len(), 1);
        let expected = (16.0f64 + 9.0).sqrt();
        assert!((d.merges()[0].height - expected).abs() < 1e-12);
    }

    // Hand trace of the naive average-linkage algorithm on rows
    //   A=[0,2,1,0] B=[2,0,1,0] C=[1,1,0,0] D=[0,0,0,0]:
    //   d(C,D)=sqrt(2) is the minimum, so {C,D} merges first; then
    //   d({C,D},A) = d({C,D},B) = (sqrt(3)+sqrt(5))/2 ties and the pair
    //   (A, {C,D}) wins lexicographically; B joins last at
    //   (2*sqrt(8)/2 + sqrt(3) + sqrt(5))/3.
    #[test]
    fn four_item_fixture_matches_hand_trace() {
        let matrix = vec![
            vec![0.0, 2.0, 1.0, 0.0],
            vec![2.0, 0.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 0.0, 0.0],
        ];
        let d = hierarchical_cluster(&matrix, &labels(&["A", "B", "C", "D"]), Linkage::Average, Metric::Euclidean)
            .unwrap();
        let m = d.merges();
        assert_eq!((m[0].left, m[0].right), (2, 3));
        assert!((m[0].height - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!((m[1].left, m[1].right), (0, 4));
        let expected_second = (3f64.sqrt() + 5f64.sqrt()) / 2.0;
        assert!((m[1].height - expected_second).abs() < 1e-12);
        assert_eq!((m[2].left, m[2].right), (1, 5));
        let expected_third = (8f64.sqrt() + 3f64.sqrt() + 5f64.sqrt()) / 3.0;
        assert!((m[2].height - expected_third).abs() < 1e-12);
    }

    #[test]
    fn heights_non_decreasing_under_average_linkage() {
        let matrix = vec![
            vec![0.0, 9.0, 1.0, 4.0, 2.0],
            vec![9.0, 0.0, 3.0, 1.0, 7.0],
            vec![1.0, 3.0, 0.0, 5.0, 2.0],
            vec![4.0, 1.0, 5.0, 0.0, 8.0],
            vec![2.0, 7.0, 2.0, 8.0, 0.0],
        ];
        let names = labels(&["a", "b", "c", "d", "e"]);
        let d = hierarchical_cluster(&matrix, &names, Linkage::Average, Metric::Euclidean).unwrap();
        for pair in d.merges().windows(2) {
            assert!(pair[0].height <= pair[1].height + 1e-12);
        }
        // leaves survive exactly
        assert_eq!(d.leaf_count(), 5);
        assert_eq!(d.merges().len(), 4);
        let total: usize = d.merges().last().unwrap().size;
        assert_eq!(total, 5);
    }

    #[test]
    fn too_few_items_is_an_error() {
        let err = hierarchical_cluster(&[vec![0.0]], &labels(&["A"]), Linkage::Average, Metric::Euclidean)
            .unwrap_err();
        assert!(matches!(err, GraphError::TooFewItems(1)));
    }

    #[test]
    fn non_square_matrix_is_an_error() {
        let err = hierarchical_cluster(
            &[vec![0.0, 1.0], vec![1.0]],
            &labels(&["A", "B"]),
            Linkage::Average,
            Metric::Euclidean,
        )
        .unwrap_err();
        assert!(matches!(err, GraphError::NotSquare { .. }));
    }

    #[test]
    fn newick_has_branch_lengths_and_terminator() {
        let matrix = vec![
            vec![0.0, 1.0, 9.0],
            vec![1.0, 0.0, 9.0],
            vec![9.0, 9.0, 0.0],
        ];
        let d = hierarchical_cluster(&matrix, &labels(&["a", "b", "c"]), Linkage::Average, Metric::Euclidean)
            .unwrap();
        let newick = d.to_newick();
        assert!(newick.ends_with(';'));
        assert!(newick.contains("a:"));
        assert!(newick.contains("c:"));
        assert!(newick.starts_with('('));
    }
}
