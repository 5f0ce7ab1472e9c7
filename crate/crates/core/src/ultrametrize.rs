//! Subdominant ultrametric, dendrograms and the distortion of replacing a
//! metric by its ultrametrization.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::props::{check_ultrametric, TripleWitness};
use crate::space::FiniteMetricSpace;

/// Prim's algorithm on the complete graph over `0..n` minus `skip`. Returns
/// each vertex's tree parent (`None` for the root and for `skip`). The root
/// is the lowest non-skipped index; ties pick the lowest index.
pub(crate) fn prim_mst<W: Fn(usize, usize) -> f64>(n: usize, skip: Option<usize>, w: W) -> Vec<Option<usize>> {
    let mut parent = vec![None; n];
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut link = vec![usize::MAX; n];
    if let Some(s) = skip {
        in_tree[s] = true;
    }
    let Some(root) = (0..n).find(|&v| Some(v) != skip) else {
        return parent;
    };
    let mut u = root;
    in_tree[u] = true;
    loop {
        let mut next = None;
        let mut next_w = f64::INFINITY;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let d = w(u, v);
            if d < best[v] {
                best[v] = d;
                link[v] = u;
            }
            if next.is_none() || best[v] < next_w {
                next = Some(v);
                next_w = best[v];
            }
        }
        let Some(v) = next else { break };
        in_tree[v] = true;
        parent[v] = Some(link[v]);
        u = v;
    }
    parent
}

/// The largest ultrametric below `d`: `d'(x,y)` is the minimax chain value,
/// the largest edge on the minimum spanning tree path from `x` to `y`.
pub fn subdominant_ultrametric(space: &FiniteMetricSpace) -> FiniteMetricSpace {
    let n = space.len();
    let parent = prim_mst(n, None, |i, j| space.dist(i, j));
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, p) in parent.iter().enumerate() {
        if let Some(p) = *p {
            adj[v].push(p);
            adj[p].push(v);
        }
    }
    let mut out = vec![0.0f64; n * n];
    let mut seen = vec![false; n];
    let mut stack = Vec::with_capacity(n);
    for x in 0..n {
        seen.fill(false);
        seen[x] = true;
        stack.clear();
        stack.push(x);
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    out[x * n + v] = out[x * n + u].max(space.dist(u, v));
                    stack.push(v);
                }
            }
        }
    }
    FiniteMetricSpace::trusted(space.labels().to_vec(), out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum UltrametrizeError {
    NotUltrametric(TripleWitness),
    EmptySpace,
}

impl fmt::Display for UltrametrizeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UltrametrizeError::NotUltrametric(w) => write!(
                f,
                "not an ultrametric: d({x}, {y}) = {} > {} = max(d({x}, {z}), d({z}, {y}))",
                w.lhs,
                w.rhs,
                x = w.triple[0],
                y = w.triple[1],
                z = w.triple[2]
            ),
            UltrametrizeError::EmptySpace => write!(f, "empty space"),
        }
    }
}

impl core::error::Error for UltrametrizeError {}

/// Relative tolerance for ultrametric input checks and height grouping.
pub const HEIGHT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DendrogramNode {
    pub height: f64,
    /// Child node indices, ordered by least leaf.
    pub children: Vec<usize>,
    /// Point indices below this node, ascending.
    pub leaves: Vec<usize>,
}

/// Merge tree of an ultrametric space. Nodes `0..n` are the leaves (point
/// `i` is node `i`); internal nodes follow in merge order.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Dendrogram {
    pub nodes: Vec<DendrogramNode>,
    pub root: usize,
    pub labels: Vec<String>,
}

impl Dendrogram {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn node(&self, v: usize) -> &DendrogramNode {
        &self.nodes[v]
    }

    fn parents(&self) -> Vec<Option<usize>> {
        let mut p = vec![None; self.nodes.len()];
        for (v, node) in self.nodes.iter().enumerate() {
            for &c in &node.children {
                p[c] = Some(v);
            }
        }
        p
    }

    /// The tree metric: `d(x, y)` is the height of the lowest common ancestor.
    pub fn tree_metric(&self) -> FiniteMetricSpace {
        let n = self.len();
        let mut dist = vec![0.0f64; n * n];
        for node in &self.nodes {
            for (a, &ca) in node.children.iter().enumerate() {
                for &cb in &node.children[a + 1..] {
                    for &x in &self.nodes[ca].leaves {
                        for &y in &self.nodes[cb].leaves {
                            dist[x * n + y] = node.height;
                            dist[y * n + x] = node.height;
                        }
                    }
                }
            }
        }
        FiniteMetricSpace::trusted(self.labels.clone(), dist)
    }

    pub fn lca_height(&self, x: usize, y: usize) -> f64 {
        if x == y {
            return 0.0;
        }
        let parent = self.parents();
        let mut ancestors = Vec::new();
        let mut u = Some(x);
        while let Some(v) = u {
            ancestors.push(v);
            u = parent[v];
        }
        let mut u = Some(y);
        while let Some(v) = u {
            if ancestors.contains(&v) {
                return self.nodes[v].height;
            }
            u = parent[v];
        }
        unreachable!("a dendrogram is connected")
    }

    /// Largest number of children of any node.
    pub fn max_children(&self) -> usize {
        self.nodes.iter().map(|n| n.children.len()).max().unwrap_or(0)
    }

    /// All nodes in preorder (parents before children).
    pub fn preorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            out.push(v);
            stack.extend(self.nodes[v].children.iter().rev());
        }
        out
    }

    /// Shape with heights, independent of node numbering: each node as
    /// `(height, leaves, sorted child shapes)`, compared recursively.
    pub fn canonical(&self) -> CanonicalTree {
        fn build(d: &Dendrogram, v: usize) -> CanonicalTree {
            let mut children: Vec<CanonicalTree> = d.nodes[v].children.iter().map(|&c| build(d, c)).collect();
            children.sort_by(|a, b| a.leaves.cmp(&b.leaves));
            CanonicalTree { height: d.nodes[v].height, leaves: d.nodes[v].leaves.clone(), children }
        }
        build(self, self.root)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalTree {
    pub height: f64,
    pub leaves: Vec<usize>,
    pub children: Vec<CanonicalTree>,
}

/// Single-linkage merge tree of an ultrametric space. Pairs are merged in
/// increasing distance order (ties by lowest indices); heights within
/// [`HEIGHT_TOL`] relative of the first height in a group form one level,
/// so all components joined at that level become children of one node.
pub fn build_dendrogram(space: &FiniteMetricSpace) -> Result<Dendrogram, UltrametrizeError> {
    let n = space.len();
    if n == 0 {
        return Err(UltrametrizeError::EmptySpace);
    }
    if let Some(w) = check_ultrametric(space, HEIGHT_TOL).witness {
        return Err(UltrametrizeError::NotUltrametric(w));
    }
    let mut nodes: Vec<DendrogramNode> =
        (0..n).map(|i| DendrogramNode { height: 0.0, children: Vec::new(), leaves: vec![i] }).collect();
    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((space.dist(i, j), i, j));
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    // union-find over points; `top[root]` is the current tree node of a component
    let mut uf: Vec<usize> = (0..n).collect();
    fn find(uf: &mut [usize], mut x: usize) -> usize {
        while uf[x] != x {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        x
    }
    let mut top: Vec<usize> = (0..n).collect();
    let mut start = 0;
    while start < edges.len() {
        let h0 = edges[start].0;
        let mut end = start;
        while end < edges.len() && edges[end].0 <= h0 * (1.0 + HEIGHT_TOL) {
            end += 1;
        }
        // group components joined within this level
        let mut groups: Vec<(usize, Vec<usize>, f64)> = Vec::new(); // (new root, old tops, height)
        let mut joined: Vec<(usize, usize, f64)> = Vec::new();
        for &(h, i, j) in &edges[start..end] {
            let (ri, rj) = (find(&mut uf, i), find(&mut uf, j));
            if ri != rj {
                joined.push((ri, rj, h));
            }
        }
        if !joined.is_empty() {
            let before: Vec<usize> = (0..n).map(|x| find(&mut uf, x)).collect();
            for &(a, b, _) in &joined {
                let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
                if ra != rb {
                    let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                    uf[hi] = lo;
                }
            }
            for x in 0..n {
                let old = before[x];
                if old != x {
                    continue;
                }
                let new = find(&mut uf, x);
                let top_old = top[old];
                match groups.iter_mut().find(|g| g.0 == new) {
                    Some(g) => g.1.push(top_old),
                    None => groups.push((new, vec![top_old], 0.0)),
                }
            }
            for &(a, _, h) in &joined {
                let r = find(&mut uf, a);
                if let Some(g) = groups.iter_mut().find(|g| g.0 == r) {
                    g.2 = g.2.max(h);
                }
            }
            groups.retain(|g| g.1.len() >= 2);
            groups.sort_by_key(|g| g.0);
            for (r, mut children, h) in groups {
                children.sort_by_key(|&c| nodes[c].leaves[0]);
                let mut leaves: Vec<usize> = children.iter().flat_map(|&c| nodes[c].leaves.iter().copied()).collect();
                leaves.sort_unstable();
                nodes.push(DendrogramNode { height: h, children, leaves });
                top[r] = nodes.len() - 1;
            }
        }
        start = end;
    }
    let root = top[find(&mut uf, 0)];
    Ok(Dendrogram { nodes, root, labels: space.labels().to_vec() })
}

/// `L = max d/d'` over pairs, with a pair attaining it (`None` when `n < 2`).
pub fn ultrametrization_distortion(space: &FiniteMetricSpace) -> (f64, Option<(usize, usize)>) {
    let u = subdominant_ultrametric(space);
    let n = space.len();
    let mut best = (1.0, None);
    for x in 0..n {
        for y in (x + 1)..n {
            let r = space.dist(x, y) / u.dist(x, y);
            if best.1.is_none() || r > best.0 {
                best = (r.max(1.0), Some((x, y)));
            }
        }
    }
    best
}
