use crate::error::{Error, Result};
use crate::geometry::{GeodesicSpace, GeometrySpec};
use crate::spaces::euclidean::check_weights;

/// Relative distance to an edge endpoint below which a locus snaps to it.
const SNAP: f64 = 1e-14;

/// A position in a metric tree: `offset` is measured from the lower-indexed
/// endpoint of edge `edge`. Loci are canonical, so a node has exactly one
/// representation and `==` is geometric equality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeLocus {
    pub edge: usize,
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeEdge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

/// Finite metric tree (a CAT(0) space), rooted at node 0 internally.
#[derive(Debug, Clone)]
pub struct MetricTree {
    edges: Vec<TreeEdge>,
    parent: Vec<Option<usize>>,
    parent_edge: Vec<Option<usize>>,
    /// Distance from the root.
    depth: Vec<f64>,
    level: Vec<usize>,
    tin: Vec<usize>,
    tout: Vec<usize>,
    /// Lowest-indexed incident edge per node.
    node_edge: Vec<usize>,
}

/// Rooted representation: a point at height `h` above node `child` on the
/// edge to its parent.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Rooted {
    child: usize,
    h: f64,
}

impl MetricTree {
    /// Builds a tree from `(node_a, node_b, length)` triples. Nodes are
    /// `0..=max index`; the graph must be connected, acyclic, with positive
    /// lengths, and contain at least one edge.
    pub fn new(edges: &[(usize, usize, f64)]) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::InvalidTree("at least one edge is required".into()));
        }
        let n_nodes = edges.iter().map(|&(a, b, _)| a.max(b)).max().unwrap() + 1;
        if edges.len() != n_nodes - 1 {
            return Err(Error::InvalidTree(format!(
                "{} edges on {n_nodes} nodes: a tree needs exactly {}",
                edges.len(),
                n_nodes - 1
            )));
        }
        let mut norm = Vec::with_capacity(edges.len());
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n_nodes];
        for (i, &(a, b, len)) in edges.iter().enumerate() {
            if a == b {
                return Err(Error::InvalidTree(format!("edge {i} is a self-loop")));
            }
            if !(len > 0.0 && len.is_finite()) {
                return Err(Error::InvalidTree(format!(
                    "edge {i} has non-positive length {len}"
                )));
            }
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            norm.push(TreeEdge { a, b, length: len });
            adj[a].push((b, i));
            adj[b].push((a, i));
        }
        let mut parent = vec![None; n_nodes];
        let mut parent_edge = vec![None; n_nodes];
        let mut depth = vec![0.0; n_nodes];
        let mut level = vec![0; n_nodes];
        let mut tin = vec![usize::MAX; n_nodes];
        let mut tout = vec![0; n_nodes];
        let mut clock = 0;
        // Iterative DFS: (node, next adjacency index).
        let mut stack = vec![(0usize, 0usize)];
        tin[0] = clock;
        clock += 1;
        while let Some(top) = stack.last_mut() {
            let (v, next) = *top;
            if next < adj[v].len() {
                top.1 += 1;
                let (w, e) = adj[v][next];
                if Some(e) == parent_edge[v] {
                    continue;
                }
                if tin[w] != usize::MAX {
                    return Err(Error::InvalidTree("graph contains a cycle".into()));
                }
                parent[w] = Some(v);
                parent_edge[w] = Some(e);
                depth[w] = depth[v] + norm[e].length;
                level[w] = level[v] + 1;
                tin[w] = clock;
                clock += 1;
                stack.push((w, 0));
            } else {
                tout[v] = clock;
                clock += 1;
                stack.pop();
            }
        }
        if tin.iter().any(|&t| t == usize::MAX) {
            return Err(Error::InvalidTree("graph is not connected".into()));
        }
        let node_edge = adj
            .iter()
            .map(|a| a.iter().map(|&(_, e)| e).min().unwrap())
            .collect();
        Ok(Self {
            edges: norm,
            parent,
            parent_edge,
            depth,
            level,
            tin,
            tout,
            node_edge,
        })
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    /// Nodes of degree one.
    pub fn leaves(&self) -> Vec<usize> {
        let mut degree = vec![0usize; self.node_count()];
        for e in &self.edges {
            degree[e.a] += 1;
            degree[e.b] += 1;
        }
        (0..self.node_count()).filter(|&v| degree[v] == 1).collect()
    }

    pub fn node(&self, v: usize) -> Result<TreeLocus> {
        if v >= self.node_count() {
            return Err(Error::InvalidTree(format!("no node {v}")));
        }
        let e = self.node_edge[v];
        let edge = self.edges[e];
        Ok(TreeLocus {
            edge: e,
            offset: if edge.a == v { 0.0 } else { edge.length },
        })
    }

    /// Canonical locus at `offset` from the lower-indexed endpoint of `edge`.
    pub fn locus(&self, edge: usize, offset: f64) -> Result<TreeLocus> {
        let e = *self
            .edges
            .get(edge)
            .ok_or_else(|| Error::InvalidTree(format!("no edge {edge}")))?;
        let tol = SNAP * e.length;
        if !offset.is_finite() || offset < -tol || offset > e.length + tol {
            return Err(Error::NotOnManifold {
                space: "metric tree",
                reason: format!("offset {offset} outside edge {edge} of length {}", e.length),
            });
        }
        if offset <= tol {
            self.node(e.a)
        } else if offset >= e.length - tol {
            self.node(e.b)
        } else {
            Ok(TreeLocus { edge, offset })
        }
    }

    fn rooted(&self, x: &TreeLocus) -> Result<Rooted> {
        let e = *self
            .edges
            .get(x.edge)
            .ok_or_else(|| Error::InvalidTree(format!("no edge {}", x.edge)))?;
        if self.parent_edge[e.a] == Some(x.edge) {
            Ok(Rooted {
                child: e.a,
                h: x.offset,
            })
        } else {
            Ok(Rooted {
                child: e.b,
                h: e.length - x.offset,
            })
        }
    }

    fn edge_len_above(&self, v: usize) -> Option<f64> {
        self.parent_edge[v].map(|e| self.edges[e].length)
    }

    fn unrooted(&self, r: Rooted) -> TreeLocus {
        match self.parent_edge[r.child] {
            None => self.node(r.child).expect("valid node"),
            Some(e) => {
                let edge = self.edges[e];
                let off = if edge.a == r.child {
                    r.h
                } else {
                    edge.length - r.h
                };
                self.locus(e, off.clamp(0.0, edge.length))
                    .expect("offset clamped to edge")
            }
        }
    }

    fn is_ancestor(&self, u: usize, v: usize) -> bool {
        self.tin[u] <= self.tin[v] && self.tout[v] <= self.tout[u]
    }

    fn lca(&self, mut u: usize, mut v: usize) -> usize {
        while self.level[u] > self.level[v] {
            u = self.parent[u].unwrap();
        }
        while self.level[v] > self.level[u] {
            v = self.parent[v].unwrap();
        }
        while u != v {
            u = self.parent[u].unwrap();
            v = self.parent[v].unwrap();
        }
        u
    }

    fn point_depth(&self, r: Rooted) -> f64 {
        self.depth[r.child] - r.h
    }

    /// Depth of the highest point on the path between two loci.
    fn meeting_depth(&self, p: Rooted, q: Rooted) -> f64 {
        let w = self.lca(p.child, q.child);
        match (w == p.child, w == q.child) {
            (true, true) => self.point_depth(p).min(self.point_depth(q)),
            (true, false) => self.point_depth(p),
            (false, true) => self.point_depth(q),
            (false, false) => self.depth[w],
        }
    }

    fn rooted_distance(&self, p: Rooted, q: Rooted) -> f64 {
        if p.child == q.child {
            return (p.h - q.h).abs();
        }
        let m = self.meeting_depth(p, q);
        ((self.point_depth(p) - m) + (self.point_depth(q) - m)).max(0.0)
    }

    /// Moves `s` towards the root from `p`.
    fn ascend(&self, mut p: Rooted, mut s: f64) -> Rooted {
        loop {
            let Some(len) = self.edge_len_above(p.child) else {
                return Rooted { child: p.child, h: 0.0 };
            };
            if p.h + s <= len {
                return Rooted {
                    child: p.child,
                    h: p.h + s,
                };
            }
            s -= len - p.h;
            p = Rooted {
                child: self.parent[p.child].unwrap(),
                h: 0.0,
            };
        }
    }

    /// Minimizes the weighted Fréchet function restricted to the edge above
    /// `child`, returning the height and the objective value there.
    fn edge_minimizer(&self, child: usize, pts: &[Rooted], weights: &[f64]) -> (f64, f64) {
        let len = self.edge_len_above(child).unwrap();
        let node = Rooted { child, h: 0.0 };
        // Along this edge the distance to each point is |h - tau| for a fixed tau.
        let taus: Vec<f64> = pts
            .iter()
            .map(|p| {
                if p.child == child {
                    p.h
                } else {
                    let dc = self.rooted_distance(*p, node);
                    if self.is_ancestor(child, p.child) {
                        -dc
                    } else {
                        dc
                    }
                }
            })
            .collect();
        let total: f64 = weights.iter().sum();
        let mean = taus.iter().zip(weights).map(|(t, w)| t * w).sum::<f64>() / total;
        let h = mean.clamp(0.0, len);
        let value = taus
            .iter()
            .zip(weights)
            .map(|(t, w)| w * (h - t) * (h - t))
            .sum::<f64>()
            / total;
        (h, value)
    }
}

impl GeodesicSpace for MetricTree {
    type Point = TreeLocus;

    fn name(&self) -> &'static str {
        "metric tree"
    }

    fn geometry(&self) -> GeometrySpec {
        GeometrySpec::new(0.0, None)
    }

    fn check_point(&self, x: &TreeLocus) -> Result<()> {
        let canon = self.locus(x.edge, x.offset)?;
        if canon != *x {
            return Err(Error::NotOnManifold {
                space: self.name(),
                reason: format!("locus {x:?} is not canonical (expected {canon:?})"),
            });
        }
        Ok(())
    }

    fn distance(&self, x: &TreeLocus, y: &TreeLocus) -> Result<f64> {
        Ok(self.rooted_distance(self.rooted(x)?, self.rooted(y)?))
    }

    fn interpolate(&self, x: &TreeLocus, y: &TreeLocus, t: f64) -> Result<TreeLocus> {
        let (p, q) = (self.rooted(x)?, self.rooted(y)?);
        if t == 0.0 {
            return Ok(*x);
        }
        if t == 1.0 {
            return Ok(*y);
        }
        if p.child == q.child {
            return Ok(self.unrooted(Rooted {
                child: p.child,
                h: p.h + t * (q.h - p.h),
            }));
        }
        let d = self.rooted_distance(p, q);
        let up = self.point_depth(p) - self.meeting_depth(p, q);
        let s = t * d;
        let r = if s <= up {
            self.ascend(p, s)
        } else {
            self.ascend(q, (d - s).max(0.0))
        };
        Ok(self.unrooted(r))
    }

    /// Exact minimizer: the objective is a quadratic along each edge, so the
    /// minimum is found edge by edge.
    fn exact_barycenter(&self, points: &[TreeLocus], weights: &[f64]) -> Result<TreeLocus> {
        check_weights(points.len(), weights)?;
        let pts = points
            .iter()
            .map(|x| self.rooted(x))
            .collect::<Result<Vec<_>>>()?;
        let mut best: Option<(f64, Rooted)> = None;
        for child in 0..self.node_count() {
            if self.parent_edge[child].is_none() {
                continue;
            }
            let (h, value) = self.edge_minimizer(child, &pts, weights);
            if best.is_none_or(|(v, _)| value < v) {
                best = Some((value, Rooted { child, h }));
            }
        }
        Ok(self.unrooted(best.expect("tree has an edge").1))
    }

    fn base_point(&self) -> TreeLocus {
        self.node(0).expect("node 0 exists")
    }
}

/// Star tree with a root (node 0) and three leaves (nodes 1, 2, 3) whose
/// arm lengths are `arms`, together with `3p` points: `p` copies of each
/// leaf in the order leaf 1, leaf 2, leaf 3. Along this order the iterated
/// barycenter with harmonic steps stays away from the true barycenter.
pub fn build_figure1_tree(p: usize, arms: [f64; 3]) -> Result<(MetricTree, Vec<TreeLocus>)> {
    if p == 0 {
        return Err(Error::param("p", "must be at least 1"));
    }
    let tree = MetricTree::new(&[(0, 1, arms[0]), (0, 2, arms[1]), (0, 3, arms[2])])?;
    let mut list = Vec::with_capacity(3 * p);
    for leaf in 1..=3 {
        let l = tree.node(leaf)?;
        list.extend(std::iter::repeat_n(l, p));
    }
    Ok((tree, list))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_tree() -> MetricTree {
        // 0 - 1 - 2 - 3 with a branch 1 - 4
        MetricTree::new(&[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 0.5), (4, 1, 1.5)]).unwrap()
    }

    #[test]
    fn rejects_invalid_graphs() {
        assert!(MetricTree::new(&[]).is_err());
        assert!(MetricTree::new(&[(0, 1, 0.0)]).is_err());
        assert!(MetricTree::new(&[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]).is_err());
        assert!(MetricTree::new(&[(0, 1, 1.0), (2, 3, 1.0), (3, 4, 1.0)]).is_err());
    }

    #[test]
    fn canonical_nodes() {
        let t = path_tree();
        // node 1 as end of edge 0 and start of edge 1
        assert_eq!(t.locus(0, 1.0).unwrap(), t.locus(1, 0.0).unwrap());
        assert_eq!(t.locus(3, 0.0).unwrap(), t.node(1).unwrap());
        assert!(t.locus(0, 1.5).is_err());
        assert!(t.check_point(&TreeLocus { edge: 1, offset: 0.0 }).is_err());
    }

    #[test]
    fn junction_distance() {
        let t = path_tree();
        // a on edge 1-2 at 0.3 from node 1, b on edge 1-4 at 0.7 from node 1
        let a = t.locus(1, 0.3).unwrap();
        let b = t.locus(3, 0.7).unwrap();
        assert!((t.distance(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        let c = t.locus(2, 0.25).unwrap();
        assert!((t.distance(&b, &c).unwrap() - (0.7 + 2.0 + 0.25)).abs() < 1e-15);
        assert!((t.distance(&c, &b).unwrap() - (0.7 + 2.0 + 0.25)).abs() < 1e-15);
    }

    #[test]
    fn interpolate_through_junction() {
        let t = path_tree();
        let a = t.node(0).unwrap();
        let b = t.node(4).unwrap();
        let m = t.interpolate(&a, &b, 0.4).unwrap();
        assert_eq!(m, t.node(1).unwrap());
        let q = t.interpolate(&a, &b, 0.2).unwrap();
        assert!((t.distance(&a, &q).unwrap() - 0.5).abs() < 1e-15);
        assert!((t.distance(&q, &b).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn figure1_construction() {
        let (t, pts) = build_figure1_tree(2, [1.0, 1.0, 1.0]).unwrap();
        assert_eq!(pts.len(), 6);
        let leaves: Vec<_> = (1..=3).map(|v| t.node(v).unwrap()).collect();
        assert_eq!(pts, vec![leaves[0], leaves[0], leaves[1], leaves[1], leaves[2], leaves[2]]);
        let (t, pts) = build_figure1_tree(1, [1.0, 1.0, 1.0]).unwrap();
        let b = t.exact_barycenter(&pts, &[1.0; 3]).unwrap();
        assert_eq!(b, t.node(0).unwrap());
        assert_eq!(build_figure1_tree(10, [1.0; 3]).unwrap().1.len(), 30);
        assert!(build_figure1_tree(0, [1.0; 3]).is_err());
    }

    #[test]
    fn exact_barycenter_on_an_arm() {
        // Two points at leaf 1 and one at leaf 2 of a unit star: the minimizer
        // lies on arm 1 at distance 1/3 from the root.
        let (t, _) = build_figure1_tree(1, [1.0, 1.0, 1.0]).unwrap();
        let l1 = t.node(1).unwrap();
        let l2 = t.node(2).unwrap();
        let b = t.exact_barycenter(&[l1, l1, l2], &[1.0; 3]).unwrap();
        assert!((t.distance(&b, &t.node(0).unwrap()).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((t.distance(&b, &l1).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn leaves_of_path_tree() {
        assert_eq!(path_tree().leaves(), vec![0, 3, 4]);
    }
}
