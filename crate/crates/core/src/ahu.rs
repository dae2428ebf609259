//! Canonical codes for rooted trees (Aho–Hopcroft–Ullman).
//!
//! A vertex is encoded as `(` + one `L` per self loop + the sorted codes of
//! its children + `)`. Two rooted trees (or balls of looped forests) get
//! the same code iff they are isomorphic as rooted graphs.

use std::collections::VecDeque;
use std::fmt;

use crate::error::TreeError;
use crate::tree::Tree;

/// Canonical code of a rooted tree, optionally truncated to a radius.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootedBallCode {
    pub code: Vec<u8>,
    pub radius: Option<u32>,
}

impl RootedBallCode {
    pub fn as_str(&self) -> &str {
        // codes only contain '(' ')' 'L'
        std::str::from_utf8(&self.code).expect("ascii code")
    }

    /// Number of vertices in the encoded ball.
    pub fn vertex_count(&self) -> usize {
        self.code.iter().filter(|&&b| b == b'(').count()
    }

    /// Degree of the root inside the ball (children plus loops).
    pub fn root_degree(&self) -> usize {
        let mut depth = 0usize;
        let mut count = 0usize;
        for &b in &self.code {
            match b {
                b'(' => {
                    if depth == 1 {
                        count += 1;
                    }
                    depth += 1;
                }
                b')' => depth -= 1,
                b'L' if depth == 1 => count += 1,
                _ => {}
            }
        }
        count
    }
}

impl fmt::Debug for RootedBallCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RootedBallCode({}, r={:?})", self.as_str(), self.radius)
    }
}

impl fmt::Display for RootedBallCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Code of the ball of the given radius around `root` (the whole component
/// when `radius` is `None`).
pub fn ahu_code(t: &Tree, root: usize, radius: Option<u32>) -> Result<RootedBallCode, TreeError> {
    if root >= t.vertex_count() {
        return Err(TreeError::VertexOutOfRange {
            vertex: root,
            size: t.vertex_count(),
        });
    }
    Ok(RootedBallCode {
        code: encode_from(t, root, radius),
        radius,
    })
}

fn encode_from(t: &Tree, root: usize, radius: Option<u32>) -> Vec<u8> {
    // BFS order restricted to the ball; parents recorded by position.
    let mut order: Vec<(u32, u32, u32)> = vec![(root as u32, u32::MAX, 0)];
    let mut queue = VecDeque::from([0usize]);
    while let Some(idx) = queue.pop_front() {
        let (v, parent, depth) = order[idx];
        if radius.is_some_and(|r| depth >= r) {
            continue;
        }
        for &w in t.neighbors(v as usize) {
            if idx != 0 && w == order[parent as usize].0 {
                continue;
            }
            order.push((w, idx as u32, depth + 1));
            queue.push_back(order.len() - 1);
        }
    }
    let mut children: Vec<Vec<Vec<u8>>> = vec![Vec::new(); order.len()];
    for idx in (0..order.len()).rev() {
        let (v, parent, _) = order[idx];
        let mut kids = std::mem::take(&mut children[idx]);
        kids.sort_unstable();
        let len = 2 + t.loops(v as usize) as usize + kids.iter().map(Vec::len).sum::<usize>();
        let mut code = Vec::with_capacity(len);
        code.push(b'(');
        code.extend(std::iter::repeat_n(b'L', t.loops(v as usize) as usize));
        for k in kids {
            code.extend_from_slice(&k);
        }
        code.push(b')');
        if idx == 0 {
            return code;
        }
        children[parent as usize].push(code);
    }
    unreachable!("root is always processed")
}

/// One or two central vertices of a tree (minimizers of eccentricity).
pub fn centers(t: &Tree) -> Vec<usize> {
    let n = t.vertex_count();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut deg: Vec<u32> = (0..n).map(|v| t.neighbors(v).len() as u32).collect();
    let mut layer: Vec<usize> = (0..n).filter(|&v| deg[v] <= 1).collect();
    let mut remaining = n;
    while remaining > 2 {
        remaining -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            for &w in t.neighbors(v) {
                let w = w as usize;
                deg[w] -= 1;
                if deg[w] == 1 {
                    next.push(w);
                }
            }
        }
        layer = next;
    }
    layer.sort_unstable();
    layer
}

/// Unrooted canonical code: the smaller of the codes rooted at the centers.
pub fn unrooted_code(t: &Tree) -> Vec<u8> {
    centers(t)
        .into_iter()
        .map(|c| encode_from(t, c, None))
        .min()
        .expect("non-empty tree")
}

/// Isomorphism of unlabeled trees.
pub fn trees_isomorphic(s: &Tree, t: &Tree) -> bool {
    s.vertex_count() == t.vertex_count()
        && s.degree_profile() == t.degree_profile()
        && unrooted_code(s) == unrooted_code(t)
}

/// One representative of every unlabeled tree with at most `max_size`
/// vertices, ordered by size.
pub fn unlabeled_trees(max_size: usize) -> Vec<Tree> {
    let mut out = Vec::new();
    if max_size == 0 {
        return out;
    }
    let mut layer = vec![Tree::singleton()];
    for size in 1..=max_size {
        out.extend(layer.iter().cloned());
        if size == max_size {
            break;
        }
        let mut seen = std::collections::HashSet::new();
        let mut next = Vec::new();
        for t in &layer {
            let edges: Vec<(usize, usize)> = t.edges().collect();
            for v in 0..size {
                let mut grown = edges.clone();
                grown.push((v, size));
                let g = Tree::from_edges(size + 1, &grown).expect("adding a leaf keeps a tree");
                if seen.insert(unrooted_code(&g)) {
                    next.push(g);
                }
            }
        }
        layer = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::parse_tree;

    #[test]
    fn catalog_sizes() {
        // unlabeled tree counts for n = 1..=10
        let counts = [1, 1, 1, 2, 3, 6, 11, 23, 47, 106];
        let all = unlabeled_trees(10);
        for (n, &c) in counts.iter().enumerate() {
            assert_eq!(all.iter().filter(|t| t.vertex_count() == n + 1).count(), c);
        }
    }

    #[test]
    fn star_codes() {
        let s4 = Tree::star(4);
        let relabeled = parse_tree("1 4\n2 4\n3 4").unwrap();
        let center = ahu_code(&s4, 0, None).unwrap();
        assert_eq!(center, ahu_code(&relabeled, 3, None).unwrap());
        assert_eq!(center.as_str(), "(()()())");
        assert_ne!(center, ahu_code(&s4, 1, None).unwrap());
    }

    #[test]
    fn path_codes() {
        let p3 = Tree::path(3);
        assert_ne!(
            ahu_code(&p3, 0, None).unwrap(),
            ahu_code(&p3, 1, None).unwrap()
        );
        assert_eq!(ahu_code(&p3, 0, None).unwrap().as_str(), "((()))");
    }

    #[test]
    fn radius_truncation() {
        let p5 = Tree::path(5);
        assert_eq!(ahu_code(&p5, 2, Some(0)).unwrap().as_str(), "()");
        assert_eq!(ahu_code(&p5, 2, Some(1)).unwrap().as_str(), "(()())");
        assert_eq!(ahu_code(&p5, 0, Some(1)).unwrap().as_str(), "(())");
        assert_eq!(ahu_code(&p5, 2, Some(1)).unwrap().root_degree(), 2);
    }

    #[test]
    fn loops_are_encoded() {
        let f = Tree::looped_forest(2);
        assert_eq!(ahu_code(&f, 0, Some(3)).unwrap().as_str(), "(L)");
        assert_eq!(ahu_code(&f, 0, Some(3)).unwrap().root_degree(), 1);
    }

    #[test]
    fn root_out_of_range() {
        assert!(ahu_code(&Tree::star(3), 3, None).is_err());
    }

    #[test]
    fn centers_of_small_trees() {
        assert_eq!(centers(&Tree::path(5)), vec![2]);
        assert_eq!(centers(&Tree::path(4)), vec![1, 2]);
        assert_eq!(centers(&Tree::star(6)), vec![0]);
        assert_eq!(centers(&Tree::star(2)), vec![0, 1]);
    }

    #[test]
    fn isomorphism() {
        assert!(!trees_isomorphic(&Tree::spur_near_end(), &Tree::spur_at_middle()));
        assert!(!trees_isomorphic(&Tree::path(4), &Tree::star(4)));
        let t = Tree::spur_near_end();
        let perm = [3, 5, 0, 1, 4, 2];
        assert!(trees_isomorphic(&t, &t.relabel(&perm)));
    }
}
