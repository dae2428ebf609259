//! Labeled trees (and the looped forests used by the tree-forest coupling).
//!
//! Vertices are indexed `0..n` internally. The text format and the CLI use
//! 1-based labels, so label `k` in a file is vertex `k - 1` here.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::TreeError;

/// An immutable undirected graph stored in compressed adjacency form, with
/// each neighbor list sorted so that equality is labeled-graph equality.
///
/// In pure-tree mode every loop count is zero and the graph is connected and
/// acyclic. The looped-forest variant keeps one self loop per isolated vertex
/// and counts it once towards the degree.
#[derive(Clone, PartialEq, Eq)]
pub struct Tree {
    offsets: Vec<u32>,
    neighbors: Vec<u32>,
    loops: Vec<u32>,
}

/// Non-increasing degree sequence of a tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DegreeProfile(pub Vec<u32>);

impl DegreeProfile {
    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    /// Length of the longest common prefix with `other`, reading both
    /// profiles as zero-padded infinite sequences.
    pub fn common_prefix_len(&self, other: &DegreeProfile) -> usize {
        let len = self.0.len().max(other.0.len());
        (0..len)
            .take_while(|&i| {
                self.0.get(i).copied().unwrap_or(0) == other.0.get(i).copied().unwrap_or(0)
            })
            .count()
    }
}

impl fmt::Display for DegreeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

impl Tree {
    /// Builds a tree on `n` vertices from 0-based edges, checking that the
    /// result is connected and acyclic.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Tree, TreeError> {
        if n == 0 {
            return Err(TreeError::Empty);
        }
        let mut uf = UnionFind::new(n);
        let mut seen = std::collections::HashSet::with_capacity(edges.len());
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(TreeError::LabelOutOfRange {
                        label: w + 1,
                        max: n,
                    });
                }
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(TreeError::DuplicateEdge(u + 1, v + 1));
            }
            if !uf.union(u, v) {
                return Err(TreeError::Cycle(u + 1, v + 1));
            }
        }
        if edges.len() + 1 != n {
            let components = n - edges.len();
            return Err(TreeError::Disconnected { components });
        }
        Ok(Self::from_edges_unchecked(n, edges, vec![0; n]))
    }

    /// Builds the adjacency structure without validation. Callers guarantee
    /// the edge set is well formed for the intended mode.
    pub(crate) fn from_edges_unchecked(
        n: usize,
        edges: &[(usize, usize)],
        loops: Vec<u32>,
    ) -> Tree {
        debug_assert_eq!(loops.len(), n);
        let mut offsets = vec![0u32; n + 1];
        for &(u, v) in edges {
            offsets[u + 1] += 1;
            offsets[v + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut neighbors = vec![0u32; 2 * edges.len()];
        for &(u, v) in edges {
            neighbors[fill[u] as usize] = v as u32;
            fill[u] += 1;
            neighbors[fill[v] as usize] = u as u32;
            fill[v] += 1;
        }
        for v in 0..n {
            neighbors[offsets[v] as usize..offsets[v + 1] as usize].sort_unstable();
        }
        Tree {
            offsets,
            neighbors,
            loops,
        }
    }

    /// Uniformly random labeled tree on `n` vertices, decoded from a random
    /// Prüfer sequence.
    pub fn random_labeled<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Tree {
        assert!(n >= 1, "a tree needs at least one vertex");
        if n <= 2 {
            return Tree::path(n);
        }
        let code: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
        let mut degree = vec![1usize; n];
        for &c in &code {
            degree[c] += 1;
        }
        let mut leaves: std::collections::BinaryHeap<std::cmp::Reverse<usize>> =
            (0..n).filter(|&v| degree[v] == 1).map(std::cmp::Reverse).collect();
        let mut edges = Vec::with_capacity(n - 1);
        for &c in &code {
            let std::cmp::Reverse(leaf) = leaves.pop().expect("a leaf always remains");
            edges.push((leaf, c));
            degree[c] -= 1;
            if degree[c] == 1 {
                leaves.push(std::cmp::Reverse(c));
            }
        }
        let std::cmp::Reverse(a) = leaves.pop().expect("two leaves remain");
        let std::cmp::Reverse(b) = leaves.pop().expect("two leaves remain");
        edges.push((a, b));
        Tree::from_edges(n, &edges).expect("Prüfer decoding yields a tree")
    }

    /// `count` isolated vertices, each carrying one self loop (degree 1).
    pub fn looped_forest(count: usize) -> Tree {
        Self::from_edges_unchecked(count, &[], vec![1; count])
    }

    /// The single-vertex tree.
    pub fn singleton() -> Tree {
        Self::from_edges_unchecked(1, &[], vec![0])
    }

    /// The star `S_k` on `k` vertices with center 0.
    pub fn star(k: usize) -> Tree {
        assert!(k >= 1, "star needs at least one vertex");
        let edges: Vec<_> = (1..k).map(|v| (0, v)).collect();
        Self::from_edges_unchecked(k, &edges, vec![0; k])
    }

    /// The path `P_k` on `k` vertices, `0 - 1 - ... - (k-1)`.
    pub fn path(k: usize) -> Tree {
        assert!(k >= 1, "path needs at least one vertex");
        let edges: Vec<_> = (1..k).map(|v| (v - 1, v)).collect();
        Self::from_edges_unchecked(k, &edges, vec![0; k])
    }

    /// Six-vertex tree: a 5-path with a pendant vertex on its second vertex.
    pub fn spur_near_end() -> Tree {
        Tree::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (1, 5)]).expect("valid tree")
    }

    /// Six-vertex tree: a 5-path with a pendant vertex on its middle vertex.
    /// Same degree profile as [`Tree::spur_near_end`], not isomorphic to it.
    pub fn spur_at_middle() -> Tree {
        Tree::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (2, 5)]).expect("valid tree")
    }

    pub fn vertex_count(&self) -> usize {
        self.loops.len()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.neighbors[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    pub fn loops(&self, v: usize) -> u32 {
        self.loops[v]
    }

    pub fn loop_count(&self) -> usize {
        self.loops.iter().map(|&l| l as usize).sum()
    }

    /// True when no vertex carries a loop.
    pub fn is_loop_free(&self) -> bool {
        self.loops.iter().all(|&l| l == 0)
    }

    /// Regular edges plus loops, each loop counted once.
    pub fn degree(&self, v: usize) -> u32 {
        self.offsets[v + 1] - self.offsets[v] + self.loops[v]
    }

    pub fn degrees(&self) -> Vec<u32> {
        (0..self.vertex_count()).map(|v| self.degree(v)).collect()
    }

    pub fn degree_sum(&self) -> usize {
        self.neighbors.len() + self.loop_count()
    }

    pub fn max_degree(&self) -> u32 {
        (0..self.vertex_count())
            .map(|v| self.degree(v))
            .max()
            .unwrap_or(0)
    }

    /// Number of vertices achieving the maximum degree.
    pub fn max_degree_multiplicity(&self) -> usize {
        let max = self.max_degree();
        (0..self.vertex_count())
            .filter(|&v| self.degree(v) == max)
            .count()
    }

    pub fn leaf_count(&self) -> usize {
        (0..self.vertex_count())
            .filter(|&v| self.degree(v) == 1)
            .count()
    }

    /// Each undirected edge once, as `(smaller, larger)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.vertex_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn degree_profile(&self) -> DegreeProfile {
        let mut d = self.degrees();
        d.sort_unstable_by(|a, b| b.cmp(a));
        DegreeProfile(d)
    }

    /// Old vertex index for each new label after sorting by non-increasing
    /// degree, ties kept in original order.
    pub fn canonical_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.vertex_count()).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(self.degree(v)));
        order
    }

    /// Relabels vertices so that degrees are non-increasing in the label.
    pub fn canonical_relabel(&self) -> Tree {
        let order = self.canonical_order();
        let mut new_of_old = vec![0usize; order.len()];
        for (new, &old) in order.iter().enumerate() {
            new_of_old[old] = new;
        }
        self.relabel(&new_of_old)
    }

    /// Applies a permutation given as `new_of_old[old] = new`.
    pub fn relabel(&self, new_of_old: &[usize]) -> Tree {
        assert_eq!(new_of_old.len(), self.vertex_count());
        let edges: Vec<_> = self
            .edges()
            .map(|(u, v)| (new_of_old[u], new_of_old[v]))
            .collect();
        let mut loops = vec![0; self.vertex_count()];
        for (old, &l) in self.loops.iter().enumerate() {
            loops[new_of_old[old]] = l;
        }
        Self::from_edges_unchecked(self.vertex_count(), &edges, loops)
    }

    /// Renders the 1-based edge-list text format.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (u, v) in self.edges() {
            out.push_str(&format!("{} {}\n", u + 1, v + 1));
        }
        out
    }

    /// Parent of every non-root vertex when rooted at vertex 0, as a
    /// 0-based array of length `n - 1` (entry `i` belongs to vertex `i + 1`).
    pub fn parent_array(&self) -> Vec<u32> {
        let n = self.vertex_count();
        let mut parent = vec![u32::MAX; n];
        let mut queue = std::collections::VecDeque::from([0usize]);
        parent[0] = 0;
        while let Some(u) = queue.pop_front() {
            for &w in self.neighbors(u) {
                if parent[w as usize] == u32::MAX {
                    parent[w as usize] = u as u32;
                    queue.push_back(w as usize);
                }
            }
        }
        parent[1..].to_vec()
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tree")
            .field("vertex_count", &self.vertex_count())
            .field("edges", &self.edges().collect::<Vec<_>>())
            .field("loops", &self.loops)
            .finish()
    }
}

/// Parses a compact tree description: `star:K`, `path:K`, `singleton`,
/// `spur-near-end`, `spur-at-middle`, or `edges:1-2,2-3,...` (1-based).
pub fn parse_tree_spec(spec: &str) -> Result<Tree, TreeError> {
    let spec = spec.trim();
    let syntax = || TreeError::Syntax {
        line: 1,
        text: spec.to_string(),
    };
    let size = |rest: &str| -> Result<usize, TreeError> {
        match rest.trim().parse::<usize>() {
            Ok(k) if k >= 1 => Ok(k),
            _ => Err(syntax()),
        }
    };
    match spec.split_once(':') {
        Some(("star", k)) => Ok(Tree::star(size(k)?)),
        Some(("path", k)) => Ok(Tree::path(size(k)?)),
        Some(("edges", list)) => {
            let mut text = String::new();
            for pair in list.split(',') {
                let (u, v) = pair.split_once('-').ok_or_else(syntax)?;
                text.push_str(&format!("{} {}\n", u.trim(), v.trim()));
            }
            parse_tree(&text)
        }
        None => match spec {
            "singleton" => Ok(Tree::singleton()),
            "spur-near-end" => Ok(Tree::spur_near_end()),
            "spur-at-middle" => Ok(Tree::spur_at_middle()),
            _ => Err(syntax()),
        },
        Some(_) => Err(syntax()),
    }
}

/// Parses whitespace-separated `u v` pairs with 1-based labels. Blank lines
/// and text after `#` are ignored.
pub fn parse_tree(text: &str) -> Result<Tree, TreeError> {
    let mut edges = Vec::new();
    let mut max_label = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parsed: Option<Vec<usize>> = fields.iter().map(|f| f.parse().ok()).collect();
        let labels = match parsed {
            Some(l) if l.len() == 2 => l,
            _ => {
                return Err(TreeError::Syntax {
                    line: idx + 1,
                    text: raw.to_string(),
                })
            }
        };
        for &l in &labels {
            if l == 0 {
                return Err(TreeError::LabelOutOfRange {
                    label: 0,
                    max: usize::MAX,
                });
            }
            max_label = max_label.max(l);
        }
        edges.push((labels[0] - 1, labels[1] - 1));
    }
    if edges.is_empty() {
        return Err(TreeError::Empty);
    }
    for &(u, v) in &edges {
        if u == v {
            return Err(TreeError::Cycle(u + 1, v + 1));
        }
    }
    Tree::from_edges(max_label, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_labeled_trees_are_uniform_on_three_vertices() {
        // the 3 labeled trees on 3 vertices differ by their center
        let mut rng = crate::rng::stream(1, crate::rng::family::MISC, 0);
        let mut centers = [0usize; 3];
        for _ in 0..3000 {
            let t = Tree::random_labeled(3, &mut rng);
            centers[(0..3).find(|&v| t.degree(v) == 2).unwrap()] += 1;
        }
        assert!(centers.iter().all(|&c| (850..1150).contains(&c)), "{centers:?}");
        for n in 1..30 {
            assert_eq!(Tree::random_labeled(n, &mut rng).vertex_count(), n);
        }
    }

    #[test]
    fn tree_specs() {
        assert_eq!(parse_tree_spec("star:5").unwrap(), Tree::star(5));
        assert_eq!(parse_tree_spec(" path:3 ").unwrap(), Tree::path(3));
        assert_eq!(parse_tree_spec("singleton").unwrap(), Tree::singleton());
        assert_eq!(parse_tree_spec("spur-at-middle").unwrap(), Tree::spur_at_middle());
        assert_eq!(parse_tree_spec("edges:1-2, 2-3").unwrap(), Tree::path(3));
        for bad in ["star:0", "star:x", "cycle:3", "edges:1-2,2", "blob", "edges:1-2,2-1"] {
            assert!(parse_tree_spec(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn parses_single_edge() {
        let t = parse_tree("1 2").unwrap();
        assert_eq!(t.vertex_count(), 2);
        assert_eq!(t.degree_profile().0, vec![1, 1]);
    }

    #[test]
    fn parses_star_and_spur_tree() {
        let s4 = parse_tree("1 2\n1 3\n1 4\n").unwrap();
        assert_eq!(s4.degrees(), vec![3, 1, 1, 1]);
        let s = parse_tree("1 2\n2 3\n3 4\n4 5\n2 6").unwrap();
        assert_eq!(s.degree_profile().0, vec![3, 2, 2, 1, 1, 1]);
        assert_eq!(s, Tree::spur_near_end());
    }

    #[test]
    fn parse_errors() {
        assert_eq!(parse_tree(""), Err(TreeError::Empty));
        assert!(matches!(
            parse_tree("1 2\n2 3\n3 1"),
            Err(TreeError::Cycle(3, 1))
        ));
        assert!(matches!(
            parse_tree("1 2\n3 4"),
            Err(TreeError::Disconnected { components: 2 })
        ));
        assert!(matches!(
            parse_tree("1 2\n2 1"),
            Err(TreeError::DuplicateEdge(2, 1))
        ));
        assert!(matches!(
            parse_tree("0 1"),
            Err(TreeError::LabelOutOfRange { label: 0, .. })
        ));
        assert!(matches!(parse_tree("1 3"), Err(TreeError::Disconnected { .. })));
        assert!(matches!(parse_tree("1 x"), Err(TreeError::Syntax { line: 1, .. })));
        assert!(matches!(parse_tree("2 2"), Err(TreeError::Cycle(2, 2))));
    }

    #[test]
    fn profiles() {
        assert_eq!(Tree::star(2).degree_profile().0, vec![1, 1]);
        assert_eq!(Tree::path(5).degree_profile().0, vec![2, 2, 2, 1, 1]);
        assert_eq!(
            Tree::spur_near_end().degree_profile(),
            Tree::spur_at_middle().degree_profile()
        );
        assert_eq!(Tree::path(5).degree_profile().to_string(), "(2,2,2,1,1)");
    }

    #[test]
    fn canonical_relabel_moves_hub_first() {
        let s4 = parse_tree("3 1\n3 2\n3 4").unwrap();
        let c = s4.canonical_relabel();
        assert_eq!(c.degrees(), vec![3, 1, 1, 1]);
        assert_eq!(c.neighbors(0).len(), 3);

        let p3 = parse_tree("1 2\n2 3").unwrap();
        let c = p3.canonical_relabel();
        assert_eq!(c.degrees(), vec![2, 1, 1]);
        let mut nb = c.neighbors(0).to_vec();
        nb.sort();
        assert_eq!(nb, vec![1, 2]);

        // ties keep original order
        let s2 = Tree::star(2);
        assert_eq!(s2.canonical_order(), vec![0, 1]);
        assert_eq!(s2.canonical_relabel(), s2);
    }

    #[test]
    fn loop_degree_convention() {
        let f = Tree::looped_forest(3);
        assert_eq!(f.degrees(), vec![1, 1, 1]);
        assert_eq!(f.degree_sum(), 3);
        assert_eq!(f.edge_count(), 0);
        assert!(!f.is_loop_free());
    }

    #[test]
    fn parent_array_roots_at_zero() {
        let t = Tree::spur_at_middle();
        let parents = t.parent_array();
        assert_eq!(parents, vec![0, 1, 2, 3, 2]);
        assert_eq!(crate::growth::tree_from_parent_array(&parents).unwrap(), t);
    }

    #[test]
    fn edge_list_round_trip() {
        let t = Tree::spur_near_end();
        assert_eq!(parse_tree(&t.to_edge_list()).unwrap(), t);
    }
}
