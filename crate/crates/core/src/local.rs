//! Rooted balls around uniform vertices, the Pólya-point limit tree, and
//! distances between empirical ball-type distributions.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::ahu::{ahu_code, RootedBallCode};
use crate::error::{Error, GrowthError};
use crate::growth::{GrowthState, TreeForestCoupling};
use crate::tree::Tree;

/// Node budget for one Pólya-point ball.
pub const POLYA_NODE_LIMIT: usize = 1_000_000;

/// Where a ball came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BallSource {
    Grown {
        seed: String,
        n: usize,
        replica: u64,
        root: usize,
    },
    PolyaPoint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallSample {
    pub code: RootedBallCode,
    pub radius: u32,
    pub source: BallSource,
}

/// Ball of radius `r` around a uniform vertex of `tree`.
pub fn sample_ball<R: Rng + ?Sized>(tree: &Tree, r: u32, rng: &mut R) -> (usize, RootedBallCode) {
    let root = rng.random_range(0..tree.vertex_count());
    let code = ahu_code(tree, root, Some(r)).expect("root drawn in range");
    (root, code)
}

/// Ball of radius `r` around a uniform vertex of a grown state.
pub fn sample_ball_from_state<R: Rng + ?Sized>(
    state: &GrowthState,
    r: u32,
    seed_label: &str,
    replica: u64,
    rng: &mut R,
) -> BallSample {
    let tree = state.to_tree();
    let (root, code) = sample_ball(&tree, r, rng);
    BallSample {
        code,
        radius: r,
        source: BallSource::Grown {
            seed: seed_label.to_string(),
            n: state.size(),
            replica,
            root,
        },
    }
}

/// Counts of ball codes; masses are `count / total`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BallDistribution {
    counts: BTreeMap<String, u64>,
    total: u64,
}

impl BallDistribution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, code: &RootedBallCode) {
        self.add_count(code.as_str(), 1);
    }

    pub fn add_count(&mut self, code: &str, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(code.to_string()).or_insert(0) += count;
        self.total += count;
    }

    /// Associative, commutative union of counts.
    pub fn merge(&mut self, other: &BallDistribution) {
        for (code, &c) in &other.counts {
            self.add_count(code, c);
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, code: &str) -> u64 {
        self.counts.get(code).copied().unwrap_or(0)
    }

    pub fn mass(&self, code: &str) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(code) as f64 / self.total as f64
        }
    }

    pub fn support_len(&self) -> usize {
        self.counts.len()
    }

    /// `(code, count)` in code order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.counts.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// `(code, mass)` in code order.
    pub fn masses(&self) -> Vec<(String, f64)> {
        self.iter().map(|(k, c)| (k.to_string(), c as f64 / self.total as f64)).collect()
    }
}

impl FromIterator<RootedBallCode> for BallDistribution {
    fn from_iter<I: IntoIterator<Item = RootedBallCode>>(iter: I) -> Self {
        let mut d = BallDistribution::new();
        for c in iter {
            d.add(&c);
        }
        d
    }
}

/// Half the `L1` distance, computed on exact integer cross-products.
pub fn tv_between(p: &BallDistribution, q: &BallDistribution) -> f64 {
    if p.total == 0 || q.total == 0 {
        return if p.total == q.total { 0.0 } else { 1.0 };
    }
    let (np, nq) = (u128::from(p.total), u128::from(q.total));
    let mut diff: u128 = 0;
    let mut visit = |a: u64, b: u64| {
        let (x, y) = (u128::from(a) * nq, u128::from(b) * np);
        diff += x.abs_diff(y);
    };
    for (code, &c) in &p.counts {
        visit(c, q.count(code));
    }
    for (code, &c) in &q.counts {
        if !p.counts.contains_key(code) {
            visit(0, c);
        }
    }
    diff as f64 / (2.0 * np as f64 * nq as f64)
}

/// Ball codes from `replicas` independent trees `PA(n, seed)`, with
/// `roots_per_tree` uniform roots each.
pub fn empirical_ball_distribution<R: Rng + ?Sized>(
    seed: &Tree,
    n: usize,
    r: u32,
    roots_per_tree: usize,
    replicas: usize,
    rng: &mut R,
) -> Result<BallDistribution, GrowthError> {
    let mut state = GrowthState::new(seed)?;
    let mut dist = BallDistribution::new();
    for _ in 0..replicas {
        state.reset();
        state.grow_to(n, rng)?;
        dist.merge(&balls_of_state(&state, r, roots_per_tree, rng));
    }
    Ok(dist)
}

/// `count` balls around uniform roots of one grown tree.
pub fn balls_of_state<R: Rng + ?Sized>(state: &GrowthState, r: u32, count: usize, rng: &mut R) -> BallDistribution {
    let tree = state.to_tree();
    (0..count).map(|_| sample_ball(&tree, r, rng).1).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyaNodeType {
    Root,
    /// Reached by stepping to an older neighbor.
    Older,
    /// Reached by stepping to a younger neighbor.
    Younger,
}

/// A node of the Pólya-point tree. Positions are square roots of birth
/// times as fractions of the final size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyaPointNode {
    pub position: f64,
    pub strength: f64,
    pub node_type: PolyaNodeType,
    pub depth: u32,
}

/// Explores the Pólya-point tree to depth `r` around its root.
///
/// The root sits at `sqrt(U)`. Every node other than a younger-type one has
/// one older neighbor at a uniform position below its own. Every node has
/// Poisson-many further younger neighbors, uniform above its own position
/// `x`, with mean `strength·(1 - x)/x`. Strengths follow [`polya_strength`].
pub fn sample_polya_point_tree<R: Rng + ?Sized>(r: u32, rng: &mut R) -> Result<Vec<(PolyaPointNode, Option<usize>)>, Error> {
    let root = PolyaPointNode {
        position: rng.random::<f64>().sqrt(),
        strength: polya_strength(PolyaNodeType::Root, rng),
        node_type: PolyaNodeType::Root,
        depth: 0,
    };
    let mut nodes = vec![(root, None)];
    let mut head = 0;
    while head < nodes.len() {
        let (node, _) = nodes[head];
        let parent = head;
        head += 1;
        if node.depth >= r {
            continue;
        }
        let x = node.position;
        if node.node_type != PolyaNodeType::Younger {
            let older = PolyaPointNode {
                position: x * rng.random::<f64>(),
                strength: polya_strength(PolyaNodeType::Older, rng),
                node_type: PolyaNodeType::Older,
                depth: node.depth + 1,
            };
            nodes.push((older, Some(parent)));
        }
        let mean = node.strength * (1.0 - x) / x;
        if !(mean < POLYA_NODE_LIMIT as f64) {
            return Err(Error::TruncationExceeded {
                limit: POLYA_NODE_LIMIT,
                radius: r,
            });
        }
        let count = if mean > 0.0 {
            Poisson::new(mean).expect("finite positive mean").sample(rng) as usize
        } else {
            0
        };
        if nodes.len() + count > POLYA_NODE_LIMIT {
            return Err(Error::TruncationExceeded {
                limit: POLYA_NODE_LIMIT,
                radius: r,
            });
        }
        for _ in 0..count {
            let younger = PolyaPointNode {
                position: x + (1.0 - x) * rng.random::<f64>(),
                strength: polya_strength(PolyaNodeType::Younger, rng),
                node_type: PolyaNodeType::Younger,
                depth: node.depth + 1,
            };
            nodes.push((younger, Some(parent)));
        }
    }
    Ok(nodes)
}

/// Strength law per node type: `Gamma(2)` for older-type nodes (size
/// biased by the edge that led to them), `Gamma(1)` otherwise.
pub fn polya_strength<R: Rng + ?Sized>(node_type: PolyaNodeType, rng: &mut R) -> f64 {
    let shape = match node_type {
        PolyaNodeType::Older => 2.0,
        PolyaNodeType::Root | PolyaNodeType::Younger => 1.0,
    };
    Gamma::new(shape, 1.0).expect("positive shape").sample(rng)
}

/// Radius-`r` ball around the root of a Pólya-point tree.
pub fn sample_polya_point_ball<R: Rng + ?Sized>(r: u32, rng: &mut R) -> Result<BallSample, Error> {
    let nodes = sample_polya_point_tree(r, rng)?;
    let edges: Vec<(usize, usize)> = nodes
        .iter()
        .enumerate()
        .filter_map(|(i, (_, p))| p.map(|p| (p, i)))
        .collect();
    let tree = Tree::from_edges_unchecked(nodes.len(), &edges, vec![0; nodes.len()]);
    Ok(BallSample {
        code: ahu_code(&tree, 0, Some(r)).expect("root exists"),
        radius: r,
        source: BallSource::PolyaPoint,
    })
}

/// Distribution of `samples` Pólya-point balls.
pub fn polya_point_distribution<R: Rng + ?Sized>(r: u32, samples: usize, rng: &mut R) -> Result<BallDistribution, Error> {
    let mut d = BallDistribution::new();
    for _ in 0..samples {
        d.add(&sample_polya_point_ball(r, rng)?.code);
    }
    Ok(d)
}

/// Fraction of uniform roots whose radius-`r` ball differs between the tree
/// process and its coupled looped forest. Roots in the seed always count
/// as a disagreement.
pub fn coupled_ball_disagreement<R: Rng + ?Sized>(
    coupling: &TreeForestCoupling,
    r: u32,
    roots: usize,
    rng: &mut R,
) -> f64 {
    let tree = coupling.tree.to_tree();
    let forest = coupling.forest.to_tree();
    let mut differ = 0usize;
    for _ in 0..roots {
        let v = rng.random_range(0..tree.vertex_count());
        let same = coupling.forest_vertex_of_new(v).is_some_and(|f| {
            ahu_code(&tree, v, Some(r)).expect("in range") == ahu_code(&forest, f, Some(r)).expect("in range")
        });
        differ += usize::from(!same);
    }
    differ as f64 / roots as f64
}
