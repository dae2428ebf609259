//! Pattern-weighted maximum degree: the largest degree sum over injective
//! homomorphic copies of a pattern tree inside a host tree.

use rand::Rng;

use crate::error::GrowthError;
use crate::growth::GrowthState;
use crate::matching::max_weight_assignment;
use crate::tree::Tree;

/// Outcome of a pattern-weighted maximum-degree query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UMax {
    /// The pattern has no injective homomorphic copy in the host.
    NoEmbedding,
    Value(u64),
}

impl UMax {
    pub fn value(self) -> Option<u64> {
        match self {
            UMax::Value(v) => Some(v),
            UMax::NoEmbedding => None,
        }
    }
}

impl std::fmt::Display for UMax {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UMax::Value(v) => write!(f, "{v}"),
            UMax::NoEmbedding => f.write_str("none"),
        }
    }
}

/// A pattern and a host. Host degrees include self loops.
#[derive(Debug, Clone, Copy)]
pub struct UMaxQuery<'a> {
    pub pattern: &'a Tree,
    pub host: &'a Tree,
}

impl<'a> UMaxQuery<'a> {
    pub fn new(pattern: &'a Tree, host: &'a Tree) -> Self {
        UMaxQuery { pattern, host }
    }
}

/// Pattern vertices in BFS order from 0, with the BFS parent of each.
fn bfs_order(t: &Tree) -> (Vec<usize>, Vec<Option<usize>>) {
    let n = t.vertex_count();
    let mut order = Vec::with_capacity(n);
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    seen[0] = true;
    order.push(0);
    let mut head = 0;
    while head < order.len() {
        let v = order[head];
        head += 1;
        for &w in t.neighbors(v) {
            let w = w as usize;
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some(v);
                order.push(w);
            }
        }
    }
    (order, parent)
}

/// Exhaustive search over injective homomorphisms.
pub fn umax_bruteforce(q: UMaxQuery<'_>) -> UMax {
    let (order, parent) = bfs_order(q.pattern);
    let host = q.host;
    if order.len() > host.vertex_count() {
        return UMax::NoEmbedding;
    }
    let mut image = vec![usize::MAX; q.pattern.vertex_count()];
    let mut used = vec![false; host.vertex_count()];
    let mut best: Option<u64> = None;

    #[allow(clippy::too_many_arguments)]
    fn extend(
        depth: usize,
        sum: u64,
        order: &[usize],
        parent: &[Option<usize>],
        host: &Tree,
        image: &mut [usize],
        used: &mut [bool],
        best: &mut Option<u64>,
    ) {
        if depth == order.len() {
            *best = (*best).max(Some(sum));
            return;
        }
        let u = order[depth];
        let candidates: Vec<usize> = match parent[u] {
            None => (0..host.vertex_count()).collect(),
            Some(p) => host.neighbors(image[p]).iter().map(|&x| x as usize).collect(),
        };
        for x in candidates {
            if used[x] {
                continue;
            }
            used[x] = true;
            image[u] = x;
            extend(depth + 1, sum + u64::from(host.degree(x)), order, parent, host, image, used, best);
            used[x] = false;
        }
    }

    extend(0, 0, &order, &parent, host, &mut image, &mut used, &mut best);
    best.map_or(UMax::NoEmbedding, UMax::Value)
}

/// Tree DP over the host.
///
/// The pattern is rooted at vertex 0. For each pattern vertex `u` and each
/// directed host edge `y -> x`, `best[u][x, y]` is the largest degree sum of
/// the pattern subtree below `u` mapped with `u ↦ x` and the subtree kept on
/// the side of `x` away from `y`. In a tree, non-backtracking images of
/// distinct pattern children never meet, so injectivity reduces to assigning
/// the children of `u` to distinct host neighbors of `x`.
pub fn umax_dp(q: UMaxQuery<'_>) -> UMax {
    let host = q.host;
    let pattern = q.pattern;
    let n = host.vertex_count();
    let k = pattern.vertex_count();
    if k > n {
        return UMax::NoEmbedding;
    }
    if k == 1 {
        return UMax::Value(u64::from(host.max_degree()));
    }
    let (order, parent) = bfs_order(pattern);
    let mut children = vec![Vec::new(); k];
    for &u in &order[1..] {
        children[parent[u].expect("non-root")].push(u);
    }

    // directed edge x -> neighbors(x)[j] lives at slot offset[x] + j
    let mut offset = Vec::with_capacity(n + 1);
    offset.push(0usize);
    for x in 0..n {
        offset.push(offset[x] + host.neighbors(x).len());
    }
    let slot_of = |x: usize, y: usize| -> usize {
        let j = host
            .neighbors(x)
            .binary_search(&(y as u32))
            .expect("adjacent vertices");
        offset[x] + j
    };

    // best_with_parent[u][slot(x, y)] with y the image of u's pattern parent
    let mut best_with_parent: Vec<Vec<Option<i64>>> = vec![Vec::new(); k];
    let mut root_best: Option<i64> = None;
    let slots = offset[n];

    for &u in order.iter().rev() {
        let kids = &children[u];
        let is_root = parent[u].is_none();
        let mut table = if is_root { Vec::new() } else { vec![None; slots] };
        for x in 0..n {
            let dx = i64::from(host.degree(x));
            let nbrs = host.neighbors(x);
            if kids.is_empty() {
                if is_root {
                    root_best = root_best.max(Some(dx));
                } else {
                    table[offset[x]..offset[x + 1]].fill(Some(dx));
                }
                continue;
            }
            let needed = kids.len() + usize::from(!is_root);
            if nbrs.len() < kids.len() {
                continue;
            }
            // weights[c][j]: child c placed on nbrs[j], looking away from x
            let weights: Vec<Vec<Option<i64>>> = kids
                .iter()
                .map(|&c| {
                    nbrs.iter()
                        .map(|&z| best_with_parent[c][slot_of(z as usize, x)])
                        .collect()
                })
                .collect();
            // An optimal assignment avoiding any single excluded column uses
            // only each child's top `needed` columns.
            let mut keep = vec![false; nbrs.len()];
            for row in &weights {
                let mut idx: Vec<usize> = (0..nbrs.len()).filter(|&j| row[j].is_some()).collect();
                idx.sort_unstable_by_key(|&j| std::cmp::Reverse(row[j]));
                for &j in idx.iter().take(needed) {
                    keep[j] = true;
                }
            }
            let kept: Vec<usize> = (0..nbrs.len()).filter(|&j| keep[j]).collect();
            let solve = |skip: Option<usize>| -> Option<i64> {
                let cols: Vec<usize> = kept.iter().copied().filter(|&j| Some(j) != skip).collect();
                let sub: Vec<Vec<Option<i64>>> =
                    weights.iter().map(|row| cols.iter().map(|&j| row[j]).collect()).collect();
                max_weight_assignment(&sub).map(|s| s + dx)
            };
            let unrestricted = solve(None);
            if is_root {
                root_best = root_best.max(unrestricted);
            } else {
                for j in 0..nbrs.len() {
                    table[offset[x] + j] = if keep[j] { solve(Some(j)) } else { unrestricted };
                }
            }
        }
        best_with_parent[u] = table;
        // children tables are no longer needed
        for &c in kids {
            best_with_parent[c] = Vec::new();
        }
    }
    root_best.map_or(UMax::NoEmbedding, |v| UMax::Value(v as u64))
}

/// Raw pattern-weighted maximum degree recorded along one growth run.
#[derive(Debug, Clone, PartialEq)]
pub struct UMaxTrajectory {
    pub checkpoints: Vec<usize>,
    pub values: Vec<UMax>,
}

impl UMaxTrajectory {
    /// `value / sqrt(n)` per checkpoint; `None` where the pattern does not embed.
    pub fn scaled(&self) -> Vec<Option<f64>> {
        self.checkpoints
            .iter()
            .zip(&self.values)
            .map(|(&n, v)| v.value().map(|x| x as f64 / (n as f64).sqrt()))
            .collect()
    }
}

/// Grows `seed` through the sorted `checkpoints`, recomputing the statistic
/// from scratch at each.
pub fn umax_statistic_trajectory<R: Rng + ?Sized>(
    pattern: &Tree,
    seed: &Tree,
    checkpoints: &[usize],
    rng: &mut R,
) -> Result<UMaxTrajectory, GrowthError> {
    let mut state = GrowthState::new(seed)?;
    umax_along(pattern, &mut state, checkpoints, rng)
}

/// As [`umax_statistic_trajectory`] on an existing growth state.
pub fn umax_along<R: Rng + ?Sized>(
    pattern: &Tree,
    state: &mut GrowthState,
    checkpoints: &[usize],
    rng: &mut R,
) -> Result<UMaxTrajectory, GrowthError> {
    let mut sorted = checkpoints.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if let Some(&first) = sorted.first() {
        if first < state.size() {
            return Err(GrowthError::CheckpointBelowCurrent {
                checkpoint: first,
                current: state.size(),
            });
        }
    }
    let mut values = Vec::with_capacity(sorted.len());
    for &n in &sorted {
        state.grow_to(n, rng)?;
        let host = state.to_tree();
        values.push(umax_dp(UMaxQuery::new(pattern, &host)));
    }
    Ok(UMaxTrajectory {
        checkpoints: sorted,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ahu::unlabeled_trees;
    use crate::rng::{family, stream};

    fn both(u: &Tree, t: &Tree) -> UMax {
        let q = UMaxQuery::new(u, t);
        let b = umax_bruteforce(q);
        assert_eq!(umax_dp(q), b, "pattern {:?} host {:?}", u.to_edge_list(), t.to_edge_list());
        b
    }

    #[test]
    fn examples() {
        let t = Tree::spur_at_middle();
        assert_eq!(both(&Tree::singleton(), &t), UMax::Value(u64::from(t.max_degree())));
        assert_eq!(both(&Tree::path(2), &Tree::star(4)), UMax::Value(4));
        assert_eq!(both(&Tree::path(3), &Tree::path(5)), UMax::Value(6));
        assert_eq!(both(&Tree::path(4), &Tree::star(4)), UMax::NoEmbedding);
        assert_eq!(both(&Tree::path(6), &Tree::path(5)), UMax::NoEmbedding);
        for t in [Tree::spur_near_end(), Tree::spur_at_middle(), Tree::star(6)] {
            let expected = 2 * (t.vertex_count() as u64 - 1);
            assert_eq!(both(&t, &t), UMax::Value(expected));
        }
    }

    #[test]
    fn exhaustive_small_catalog() {
        let catalog = unlabeled_trees(9);
        assert_eq!(catalog.iter().filter(|t| t.vertex_count() == 9).count(), 47);
        let patterns: Vec<&Tree> = catalog.iter().filter(|t| t.vertex_count() <= 4).collect();
        for u in &patterns {
            for t in &catalog {
                both(u, t);
            }
        }
    }

    #[test]
    fn counts_loops_in_host_degrees() {
        let forest = Tree::looped_forest(3);
        assert_eq!(both(&Tree::singleton(), &forest), UMax::Value(1));
        assert_eq!(both(&Tree::path(2), &forest), UMax::NoEmbedding);
    }

    #[test]
    fn trajectory_is_monotone_and_starts_at_seed() {
        let seed = Tree::spur_at_middle();
        let checkpoints = [6, 50, 200, 1000];
        for r in 0..20 {
            let mut rng = stream(9, family::MISC, r);
            let traj = umax_statistic_trajectory(&seed, &seed, &checkpoints, &mut rng).unwrap();
            assert_eq!(traj.values[0], UMax::Value(10));
            assert!((traj.scaled()[0].unwrap() - 10.0 / 6f64.sqrt()).abs() < 1e-12);
            assert!(traj.values.windows(2).all(|w| w[0] <= w[1]));
        }
        let mut rng = stream(9, family::MISC, 99);
        assert!(umax_statistic_trajectory(&seed, &seed, &[3], &mut rng).is_err());
    }

    #[test]
    fn single_vertex_pattern_tracks_max_degree() {
        let seed = Tree::star(3);
        let mut a = stream(10, family::MISC, 0);
        let mut b = stream(10, family::MISC, 0);
        let traj = umax_statistic_trajectory(&Tree::singleton(), &seed, &[10, 100, 500], &mut a).unwrap();
        let mut state = GrowthState::new(&seed).unwrap();
        let deg = crate::growth::watch_degrees(&mut state, &[], &[10, 100, 500], &mut b).unwrap();
        for (c, v) in traj.values.iter().enumerate() {
            assert_eq!(v.value(), Some(u64::from(deg.max_degree[c])));
        }
    }
}
