//! Greedy modularity optimization (Louvain), deterministic for a fixed
//! seed: the node visit order is a seeded shuffle and all tie-breaks are
//! resolved toward the smallest community id.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::WeightedGraph;

const MAX_PASSES_PER_LEVEL: usize = 32;
const MIN_GAIN: f64 = 1e-12;

struct LevelGraph {
    adjacency: Vec<BTreeMap<usize, f64>>,
    /// Self-loop weight accumulated by aggregation.
    loops: Vec<f64>,
    two_m: f64,
}

impl LevelGraph {
    fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    fn strength(&self, node: usize) -> f64 {
        self.adjacency[node].values().sum::<f64>() + 2.0 * self.loops[node]
    }
}

/// Community assignment per node id. Communities are relabeled 0..k-1 in
/// order of first appearance over nodes sorted by id.
pub fn louvain(graph: &WeightedGraph, resolution: f64, seed: u64) -> BTreeMap<String, usize> {
    let n = graph.node_count();
    if n == 0 {
        return BTreeMap::new();
    }

    // Work on indices in sorted-id order so the outcome does not depend on
    // insertion order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| graph.id_of(a).cmp(graph.id_of(b)));
    let position: Vec<usize> = {
        let mut pos = vec![0; n];
        for (rank, &idx) in order.iter().enumerate() {
            pos[idx] = rank;
        }
        pos
    };

    let mut level = LevelGraph {
        adjacency: {
            let mut adj = vec![BTreeMap::new(); n];
            for idx in 0..n {
                for (nbr, w) in graph.neighbors(idx) {
                    adj[position[idx]].insert(position[nbr], w);
                }
            }
            adj
        },
        loops: vec![0.0; n],
        two_m: 2.0 * graph.total_weight(),
    };

    // membership[i] = community of original rank i, tracked across levels
    let mut membership: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    if level.two_m > 0.0 {
        loop {
            let assignment = optimize_level(&level, resolution, &mut rng);
            let (aggregated, relabel, n_comms) = aggregate(&level, &assignment);
            if n_comms == level.node_count() {
                break;
            }
            for m in membership.iter_mut() {
                *m = relabel[assignment[*m]];
            }
            level = aggregated;
        }
    }

    // Stable labels: first appearance over sorted ids.
    let mut relabel: BTreeMap<usize, usize> = BTreeMap::new();
    let mut result = BTreeMap::new();
    for rank in 0..n {
        let raw = membership[rank];
        let next = relabel.len();
        let label = *relabel.entry(raw).or_insert(next);
        result.insert(graph.id_of(order[rank]).to_string(), label);
    }
    result
}

/// One level of local moves; returns node -> community.
fn optimize_level(level: &LevelGraph, resolution: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = level.node_count();
    let mut community: Vec<usize> = (0..n).collect();
    let mut community_strength: Vec<f64> = (0..n).map(|i| level.strength(i)).collect();
    let two_m = level.two_m;

    let mut visit: Vec<usize> = (0..n).collect();
    visit.shuffle(rng);

    for _ in 0..MAX_PASSES_PER_LEVEL {
        let mut moves = 0usize;
        for &node in &visit {
            let home = community[node];
            let strength = level.strength(node);
            community_strength[home] -= strength;

            // Weights from `node` to each neighboring community, in
            // ascending community id for deterministic tie-breaks.
            let mut to_comm: BTreeMap<usize, f64> = BTreeMap::new();
            for (&nbr, &w) in &level.adjacency[node] {
                if nbr != node {
                    *to_comm.entry(community[nbr]).or_insert(0.0) += w;
                }
            }

            let w_home = to_comm.get(&home).copied().unwrap_or(0.0);
            let removal_cost =
                -w_home / two_m + resolution * community_strength[home] * strength / (two_m * two_m);

            let mut best_comm = home;
            let mut best_gain = 0.0;
            for (&cand, &w_cand) in &to_comm {
                if cand == home {
                    continue;
                }
                let gain = removal_cost + w_cand / two_m
                    - resolution * community_strength[cand] * strength / (two_m * two_m);
                if gain > best_gain + MIN_GAIN {
                    best_gain = gain;
                    best_comm = cand;
                }
            }

            community_strength[best_comm] += strength;
            if best_comm != home {
                community[node] = best_comm;
                moves += 1;
            }
        }
        if moves == 0 {
            break;
        }
    }
    community
}

/// Collapse communities into nodes; returns the new graph, the dense
/// relabeling old-community -> new-node, and the community count.
fn aggregate(level: &LevelGraph, community: &[usize]) -> (LevelGraph, Vec<usize>, usize) {
    let n = level.node_count();
    let mut relabel = vec![usize::MAX; n];
    let mut n_comms = 0;
    for node in 0..n {
        let c = community[node];
        if relabel[c] == usize::MAX {
            relabel[c] = n_comms;
            n_comms += 1;
        }
    }

    let mut adjacency = vec![BTreeMap::new(); n_comms];
    let mut loops = vec![0.0; n_comms];
    for node in 0..n {
        let cn = relabel[community[node]];
        loops[cn] += level.loops[node];
        for (&nbr, &w) in &level.adjacency[node] {
            let cm = relabel[community[nbr]];
            if cn == cm {
                // each internal edge visited from both endpoints
                loops[cn] += w / 2.0;
            } else {
                *adjacency[cn].entry(cm).or_insert(0.0) += w;
            }
        }
    }
    (
        LevelGraph {
            adjacency,
            loops,
            two_m: level.two_m,
        },
        relabel,
        n_comms,
    )
}
