//! Linear preferential-attachment growth from an arbitrary seed.
//!
//! Attachment targets are drawn from an endpoint list in which every vertex
//! appears once per unit of degree, so a uniform index is exactly
//! degree-proportional. Each step appends the target and the new vertex.

use std::io::{self, Read, Write};

use rand::Rng;

use crate::error::GrowthError;
use crate::tree::Tree;

/// A tree (or looped forest) under preferential-attachment growth.
#[derive(Debug, Clone)]
pub struct GrowthState {
    seed: Tree,
    parents: Vec<u32>,
    degrees: Vec<u32>,
    endpoints: Vec<u32>,
    max_degree: u32,
}

impl GrowthState {
    /// Starts growth from `seed`. Every vertex needs positive degree; loops
    /// count once.
    pub fn new(seed: &Tree) -> Result<GrowthState, GrowthError> {
        let n = seed.vertex_count();
        if n == 0 {
            return Err(GrowthError::EmptyForest);
        }
        let degrees = seed.degrees();
        if let Some(v) = degrees.iter().position(|&d| d == 0) {
            return Err(GrowthError::IsolatedVertex(v));
        }
        // grouped by vertex: slot ranges line up across coupled processes
        let mut endpoints = Vec::with_capacity(seed.degree_sum());
        for (v, &d) in degrees.iter().enumerate() {
            endpoints.extend(std::iter::repeat_n(v as u32, d as usize));
        }
        let max_degree = degrees.iter().copied().max().unwrap_or(0);
        Ok(GrowthState {
            seed: seed.clone(),
            parents: Vec::new(),
            degrees,
            endpoints,
            max_degree,
        })
    }

    /// Returns to the seed, keeping allocated buffers for reuse.
    pub fn reset(&mut self) {
        let k = self.seed.vertex_count();
        self.parents.clear();
        self.degrees.truncate(k);
        self.endpoints.clear();
        for v in 0..k {
            self.degrees[v] = self.seed.degree(v);
            self.endpoints
                .extend(std::iter::repeat_n(v as u32, self.degrees[v] as usize));
        }
        self.max_degree = self.seed.max_degree();
    }

    pub fn seed(&self) -> &Tree {
        &self.seed
    }

    pub fn seed_size(&self) -> usize {
        self.seed.vertex_count()
    }

    /// Current number of vertices.
    pub fn size(&self) -> usize {
        self.degrees.len()
    }

    pub fn degree(&self, v: usize) -> u32 {
        self.degrees[v]
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn total_degree(&self) -> usize {
        self.endpoints.len()
    }

    pub fn endpoints(&self) -> &[u32] {
        &self.endpoints
    }

    /// Attachment target of every vertex added after the seed, in order.
    pub fn parents(&self) -> &[u32] {
        &self.parents
    }

    pub fn reserve(&mut self, target: usize) {
        let extra = target.saturating_sub(self.size());
        self.degrees.reserve(extra);
        self.parents.reserve(extra);
        self.endpoints.reserve(2 * extra);
    }

    /// Adds one vertex attached to a degree-proportional target; returns the
    /// target.
    #[inline]
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let slot = rng.random_range(0..self.endpoints.len() as u32);
        self.attach_slot(slot as usize)
    }

    /// Adds one vertex attached to the owner of endpoint `slot`.
    #[inline]
    pub fn attach_slot(&mut self, slot: usize) -> usize {
        let target = self.endpoints[slot];
        let new = self.degrees.len() as u32;
        let d = &mut self.degrees[target as usize];
        *d += 1;
        if *d > self.max_degree {
            self.max_degree = *d;
        }
        self.degrees.push(1);
        self.endpoints.push(target);
        self.endpoints.push(new);
        self.parents.push(target);
        target as usize
    }

    /// Grows until the state has `n` vertices.
    pub fn grow_to<R: Rng + ?Sized>(&mut self, n: usize, rng: &mut R) -> Result<(), GrowthError> {
        if n < self.size() {
            return Err(GrowthError::TargetBelowCurrent {
                target: n,
                current: self.size(),
            });
        }
        self.reserve(n);
        while self.size() < n {
            self.step(rng);
        }
        debug_assert!(self.check_invariants());
        Ok(())
    }

    /// Endpoint multiplicities equal degrees and the degree sum matches the
    /// edge accounting.
    pub fn check_invariants(&self) -> bool {
        let mut counts = vec![0u32; self.size()];
        for &e in &self.endpoints {
            counts[e as usize] += 1;
        }
        let expected_total = self.seed.degree_sum() + 2 * self.parents.len();
        counts == self.degrees
            && self.endpoints.len() == expected_total
            && self.degrees.iter().copied().max() == Some(self.max_degree)
    }

    /// Materializes the current graph (seed loops are kept).
    pub fn to_tree(&self) -> Tree {
        let k = self.seed_size();
        let mut edges: Vec<(usize, usize)> = self.seed.edges().collect();
        edges.extend(
            self.parents
                .iter()
                .enumerate()
                .map(|(i, &p)| (k + i, p as usize)),
        );
        let mut loops = vec![0; self.size()];
        for (v, l) in loops.iter_mut().enumerate().take(k) {
            *l = self.seed.loops(v);
        }
        Tree::from_edges_unchecked(self.size(), &edges, loops)
    }

    /// Parent of every vertex but the first, rooted at vertex 0. Seed
    /// vertices use their BFS parent in the seed; later vertices their
    /// attachment target. Only meaningful for loop-free seeds.
    pub fn parent_array(&self) -> Vec<u32> {
        let mut out = self.seed.parent_array();
        out.extend_from_slice(&self.parents);
        out
    }
}

/// Grows `PA(n, seed)`.
pub fn grow<R: Rng + ?Sized>(seed: &Tree, n: usize, rng: &mut R) -> Result<GrowthState, GrowthError> {
    if seed.vertex_count() < 2 {
        return Err(GrowthError::SeedTooSmall(seed.vertex_count()));
    }
    if !seed.is_loop_free() {
        return Err(GrowthError::LoopedSeed);
    }
    if n < seed.vertex_count() {
        return Err(GrowthError::TargetBelowCurrent {
            target: n,
            current: seed.vertex_count(),
        });
    }
    let mut state = GrowthState::new(seed)?;
    state.grow_to(n, rng)?;
    Ok(state)
}

/// Runs `steps` attachment steps on a looped forest.
pub fn grow_forest<R: Rng + ?Sized>(
    forest: &Tree,
    steps: usize,
    rng: &mut R,
) -> Result<GrowthState, GrowthError> {
    let mut state = GrowthState::new(forest)?;
    let target = state.size() + steps;
    state.grow_to(target, rng)?;
    Ok(state)
}

/// `PA(n, T)` and `PA(n + |T| - 2, F)` driven by one stream, where `F` holds
/// `d_T(v)` looped vertices for every seed vertex `v`.
#[derive(Debug, Clone)]
pub struct TreeForestCoupling {
    pub tree: GrowthState,
    pub forest: GrowthState,
    /// Seed vertex of `T` represented by each initial forest vertex.
    pub represents: Vec<u32>,
}

impl TreeForestCoupling {
    pub fn new(seed: &Tree) -> Result<Self, GrowthError> {
        if seed.vertex_count() < 2 {
            return Err(GrowthError::SeedTooSmall(seed.vertex_count()));
        }
        let tree = GrowthState::new(seed)?;
        let mut represents = Vec::with_capacity(seed.degree_sum());
        for v in 0..seed.vertex_count() {
            represents.extend(std::iter::repeat_n(v as u32, seed.degree(v) as usize));
        }
        let forest = GrowthState::new(&Tree::looped_forest(represents.len()))?;
        Ok(TreeForestCoupling {
            tree,
            forest,
            represents,
        })
    }

    /// Forest vertex → tree vertex. New vertices map to new vertices in
    /// birth order.
    pub fn tree_vertex_of(&self, forest_vertex: usize) -> usize {
        let k = self.represents.len();
        if forest_vertex < k {
            self.represents[forest_vertex] as usize
        } else {
            forest_vertex - k + self.tree.seed_size()
        }
    }

    /// Tree vertex → forest vertex for vertices added after the seed.
    pub fn forest_vertex_of_new(&self, tree_vertex: usize) -> Option<usize> {
        let k = self.tree.seed_size();
        (tree_vertex >= k).then(|| tree_vertex - k + self.represents.len())
    }

    /// One shared step. Slot `i` of both endpoint lists always refer to
    /// corresponding vertices, so the same uniform index drives both.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let slot = rng.random_range(0..self.tree.total_degree());
        self.tree.attach_slot(slot);
        self.forest.attach_slot(slot);
    }

    pub fn grow_to<R: Rng + ?Sized>(&mut self, n: usize, rng: &mut R) -> Result<(), GrowthError> {
        if n < self.tree.size() {
            return Err(GrowthError::TargetBelowCurrent {
                target: n,
                current: self.tree.size(),
            });
        }
        self.tree.reserve(n);
        self.forest.reserve(n + self.represents.len() - self.tree.seed_size());
        while self.tree.size() < n {
            self.step(rng);
        }
        Ok(())
    }

    /// Tree degrees equal the summed degrees of their forest counterparts.
    pub fn degrees_consistent(&self) -> bool {
        let mut summed = vec![0u32; self.tree.size()];
        for f in 0..self.forest.size() {
            summed[self.tree_vertex_of(f)] += self.forest.degree(f);
        }
        summed == self.tree.degrees()
            && self.forest.size() + self.tree.seed_size() == self.tree.size() + self.represents.len()
    }
}

/// Convenience wrapper: grows the coupled pair until the tree has `n`
/// vertices.
pub fn grow_coupled_tree_forest<R: Rng + ?Sized>(
    seed: &Tree,
    n: usize,
    rng: &mut R,
) -> Result<TreeForestCoupling, GrowthError> {
    let mut c = TreeForestCoupling::new(seed)?;
    c.grow_to(n, rng)?;
    Ok(c)
}

/// Two seeds of equal size grown with one stream so that the degrees of
/// the first `matched_prefix` vertices (after canonical relabeling) agree
/// at every step. When the profiles are equal the whole profiles agree.
#[derive(Debug, Clone)]
pub struct ProfileCoupling {
    pub first: GrowthState,
    pub second: GrowthState,
    pub matched_prefix: usize,
}

impl ProfileCoupling {
    pub fn new(s: &Tree, t: &Tree) -> Result<Self, GrowthError> {
        if s.vertex_count() != t.vertex_count() {
            return Err(GrowthError::SizeMismatch(s.vertex_count(), t.vertex_count()));
        }
        if s.vertex_count() < 2 {
            return Err(GrowthError::SeedTooSmall(s.vertex_count()));
        }
        let s = s.canonical_relabel();
        let t = t.canonical_relabel();
        let matched_prefix = s.degree_profile().common_prefix_len(&t.degree_profile());
        if matched_prefix == 0 {
            return Err(GrowthError::NoCommonPrefix);
        }
        Ok(ProfileCoupling {
            first: GrowthState::new(&s)?,
            second: GrowthState::new(&t)?,
            matched_prefix,
        })
    }

    pub fn profiles_equal(&self) -> bool {
        self.matched_prefix >= self.first.seed_size()
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let slot = rng.random_range(0..self.first.total_degree());
        self.first.attach_slot(slot);
        self.second.attach_slot(slot);
    }

    pub fn grow_to<R: Rng + ?Sized>(&mut self, n: usize, rng: &mut R) -> Result<(), GrowthError> {
        if n < self.first.size() {
            return Err(GrowthError::TargetBelowCurrent {
                target: n,
                current: self.first.size(),
            });
        }
        while self.first.size() < n {
            self.step(rng);
        }
        Ok(())
    }

    /// Degrees of the matched seed vertices agree.
    pub fn prefix_degrees_match(&self) -> bool {
        self.first.degrees()[..self.matched_prefix] == self.second.degrees()[..self.matched_prefix]
    }
}

pub fn grow_coupled_equal_profiles<R: Rng + ?Sized>(
    s: &Tree,
    t: &Tree,
    n: usize,
    rng: &mut R,
) -> Result<ProfileCoupling, GrowthError> {
    let mut c = ProfileCoupling::new(s, t)?;
    c.grow_to(n, rng)?;
    Ok(c)
}

/// Degrees of watched vertices and the maximum degree recorded at
/// checkpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub watched: Vec<usize>,
    pub checkpoints: Vec<usize>,
    /// `degrees[c][w]`: degree of `watched[w]` at `checkpoints[c]`.
    pub degrees: Vec<Vec<u32>>,
    pub max_degree: Vec<u32>,
}

impl Trajectory {
    pub fn scaled_degree(&self, checkpoint: usize, watched: usize) -> f64 {
        self.degrees[checkpoint][watched] as f64 / (self.checkpoints[checkpoint] as f64).sqrt()
    }

    pub fn scaled_max_degree(&self, checkpoint: usize) -> f64 {
        self.max_degree[checkpoint] as f64 / (self.checkpoints[checkpoint] as f64).sqrt()
    }

    /// Long-format rows `(n, statistic, value)`; watched vertices use
    /// 1-based labels in the statistic name.
    pub fn rows(&self) -> Vec<(usize, String, f64)> {
        let mut out = Vec::new();
        for (c, &n) in self.checkpoints.iter().enumerate() {
            for (w, &v) in self.watched.iter().enumerate() {
                out.push((n, format!("degree_scaled:{}", v + 1), self.scaled_degree(c, w)));
            }
            out.push((n, "max_degree_scaled".to_string(), self.scaled_max_degree(c)));
        }
        out
    }
}

/// Grows `state` through the sorted `checkpoints`, recording the watched
/// degrees at each.
pub fn watch_degrees<R: Rng + ?Sized>(
    state: &mut GrowthState,
    vertices: &[usize],
    checkpoints: &[usize],
    rng: &mut R,
) -> Result<Trajectory, GrowthError> {
    for &v in vertices {
        if v >= state.size() {
            return Err(crate::error::TreeError::VertexOutOfRange {
                vertex: v,
                size: state.size(),
            }
            .into());
        }
    }
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
    let mut traj = Trajectory {
        watched: vertices.to_vec(),
        checkpoints: sorted.clone(),
        degrees: Vec::with_capacity(sorted.len()),
        max_degree: Vec::with_capacity(sorted.len()),
    };
    for &n in &sorted {
        state.grow_to(n, rng)?;
        traj.degrees.push(vertices.iter().map(|&v| state.degree(v)).collect());
        traj.max_degree.push(state.max_degree());
    }
    Ok(traj)
}

/// Magic bytes of the binary parent-array format.
pub const PARENT_MAGIC: [u8; 4] = *b"PATR";
pub const PARENT_VERSION: u32 = 1;

/// Writes `magic, version: u32, n: u32, then n-1 parents: u32` (little
/// endian, 1-based labels; entry `i` is the parent of vertex `i + 2`).
pub fn write_parent_array<W: Write>(parents: &[u32], mut out: W) -> io::Result<()> {
    let n = u32::try_from(parents.len() + 1)
        .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "tree too large"))?;
    out.write_all(&PARENT_MAGIC)?;
    out.write_all(&PARENT_VERSION.to_le_bytes())?;
    out.write_all(&n.to_le_bytes())?;
    for &p in parents {
        out.write_all(&(p + 1).to_le_bytes())?;
    }
    Ok(())
}

/// Reads the format written by [`write_parent_array`] back into 0-based
/// parents.
pub fn read_parent_array<R: Read>(mut input: R) -> io::Result<Vec<u32>> {
    let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
    let mut word = [0u8; 4];
    input.read_exact(&mut word)?;
    if word != PARENT_MAGIC {
        return Err(bad("bad magic"));
    }
    input.read_exact(&mut word)?;
    if u32::from_le_bytes(word) != PARENT_VERSION {
        return Err(bad("unsupported version"));
    }
    input.read_exact(&mut word)?;
    let n = u32::from_le_bytes(word) as usize;
    if n == 0 {
        return Err(bad("empty tree"));
    }
    let mut parents = Vec::with_capacity(n - 1);
    for i in 1..n {
        input.read_exact(&mut word)?;
        let p = u32::from_le_bytes(word);
        if p == 0 || p as usize > n || p as usize == i + 1 {
            return Err(bad("parent label out of range"));
        }
        parents.push(p - 1);
    }
    Ok(parents)
}

/// Rebuilds a tree from a parent array, rejecting cycles.
pub fn tree_from_parent_array(parents: &[u32]) -> Result<Tree, GrowthError> {
    let n = parents.len() + 1;
    let edges: Vec<(usize, usize)> = parents
        .iter()
        .enumerate()
        .map(|(i, &p)| (i + 1, p as usize))
        .collect();
    Ok(Tree::from_edges(n, &edges)?)
}
