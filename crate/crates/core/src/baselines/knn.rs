//! Exact nearest-neighbour queries under the max-norm.

use crate::error::{Error, Result};

const LEAF_SIZE: usize = 16;
/// Above this dimension queries scan every point instead of walking the tree.
const BRUTE_FORCE_DIM: usize = 15;
const NO_CHILD: usize = usize::MAX;

/// A neighbour returned by [`KnnIndex::knn`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub dist: f64,
}

#[derive(Debug, Clone)]
struct KdNode {
    start: usize,
    end: usize,
    left: usize,
    right: usize,
}

/// Exact k-d tree over `n` points of dimension `dim`, stored row-major.
#[derive(Debug, Clone)]
pub struct KnnIndex {
    points: Vec<f64>,
    dim: usize,
    n: usize,
    order: Vec<usize>,
    nodes: Vec<KdNode>,
    /// Per-node bounding boxes: `dim` lower bounds followed by `dim` upper bounds.
    bounds: Vec<f64>,
    brute: bool,
}

#[inline]
pub fn max_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

impl KnnIndex {
    pub fn new(points: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || !points.len().is_multiple_of(dim) {
            return Err(Error::Input(format!(
                "{} values do not form rows of dimension {dim}",
                points.len()
            )));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("points must be finite".into()));
        }
        let n = points.len() / dim;
        let mut index = Self {
            points,
            dim,
            n,
            order: (0..n).collect(),
            nodes: Vec::new(),
            bounds: Vec::new(),
            brute: dim > BRUTE_FORCE_DIM,
        };
        if !index.brute && n > 0 {
            index.build(0, n);
        }
        Ok(index)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(KdNode {
            start,
            end,
            left: NO_CHILD,
            right: NO_CHILD,
        });
        let d = self.dim;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for &i in &self.order[start..end] {
            let p = &self.points[i * d..(i + 1) * d];
            for j in 0..d {
                lo[j] = lo[j].min(p[j]);
                hi[j] = hi[j].max(p[j]);
            }
        }
        let (axis, spread) = (0..d)
            .map(|j| (j, hi[j] - lo[j]))
            .fold((0, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        self.bounds.extend_from_slice(&lo);
        self.bounds.extend_from_slice(&hi);
        if end - start <= LEAF_SIZE || spread <= 0.0 {
            return id;
        }
        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a * d + axis]
                .total_cmp(&points[b * d + axis])
                .then(a.cmp(&b))
        });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id].left = left;
        self.nodes[id].right = right;
        id
    }

    fn node_bounds(&self, node: usize) -> (&[f64], &[f64]) {
        let base = node * 2 * self.dim;
        let b = &self.bounds[base..base + 2 * self.dim];
        b.split_at(self.dim)
    }

    /// Smallest and largest max-norm distance from `q` to the node's box.
    fn box_range(&self, node: usize, q: &[f64]) -> (f64, f64) {
        let (lo, hi) = self.node_bounds(node);
        let mut near = 0.0f64;
        let mut far = 0.0f64;
        for j in 0..self.dim {
            near = near.max(lo[j] - q[j]).max(q[j] - hi[j]);
            far = far.max((q[j] - lo[j]).abs()).max((hi[j] - q[j]).abs());
        }
        (near, far)
    }

    /// The `k` nearest points to `query`, sorted by distance then index.
    /// `exclude` drops one point (usually the query itself) from the search.
    pub fn knn(&self, query: &[f64], k: usize, exclude: Option<usize>) -> Result<Vec<Neighbor>> {
        if query.len() != self.dim {
            return Err(Error::Input(format!(
                "query has dimension {}, index has {}",
                query.len(),
                self.dim
            )));
        }
        let available = self.n - usize::from(exclude.is_some_and(|e| e < self.n));
        if k == 0 || k > available {
            return Err(Error::Input(format!("k = {k} must lie in 1..={available}")));
        }
        let mut best: Vec<Neighbor> = Vec::with_capacity(k + 1);
        if self.brute {
            for i in 0..self.n {
                if Some(i) != exclude {
                    offer(&mut best, k, i, max_norm(query, self.point(i)));
                }
            }
        } else {
            self.search(0, query, k, exclude, &mut best);
        }
        Ok(best)
    }

    fn search(
        &self,
        node: usize,
        q: &[f64],
        k: usize,
        exclude: Option<usize>,
        best: &mut Vec<Neighbor>,
    ) {
        let n = &self.nodes[node];
        if n.left == NO_CHILD {
            for &i in &self.order[n.start..n.end] {
                if Some(i) != exclude {
                    offer(best, k, i, max_norm(q, self.point(i)));
                }
            }
            return;
        }
        let (l, r) = (n.left, n.right);
        let dl = self.box_range(l, q).0;
        let dr = self.box_range(r, q).0;
        let order = if dl <= dr {
            [(l, dl), (r, dr)]
        } else {
            [(r, dr), (l, dl)]
        };
        for (child, lower) in order {
            if best.len() < k || lower <= best[k - 1].dist {
                self.search(child, q, k, exclude, best);
            }
        }
    }

    /// Number of points within `radius` of `query`: `dist < radius` when
    /// `strict`, otherwise `dist <= radius`. The query point itself is counted
    /// if it is in the index.
    pub fn count_within(&self, query: &[f64], radius: f64, strict: bool) -> usize {
        let inside = |dist: f64| {
            if strict {
                dist < radius
            } else {
                dist <= radius
            }
        };
        if self.brute || self.nodes.is_empty() {
            return (0..self.n)
                .filter(|&i| inside(max_norm(query, self.point(i))))
                .count();
        }
        let mut count = 0;
        let mut stack = vec![0usize];
        while let Some(node) = stack.pop() {
            let (near, far) = self.box_range(node, query);
            if !inside(near) {
                continue;
            }
            let n = &self.nodes[node];
            if inside(far) {
                count += n.end - n.start;
            } else if n.left == NO_CHILD {
                count += self.order[n.start..n.end]
                    .iter()
                    .filter(|&&i| inside(max_norm(query, self.point(i))))
                    .count();
            } else {
                stack.push(n.left);
                stack.push(n.right);
            }
        }
        count
    }
}

/// Inserts `(dist, index)` into the sorted candidate list if it beats the
/// current `k`-th entry.
#[inline]
fn offer(best: &mut Vec<Neighbor>, k: usize, index: usize, dist: f64) {
    let before = |a: &Neighbor| a.dist < dist || (a.dist == dist && a.index < index);
    if best.len() == k {
        let last = best[k - 1];
        if !(dist < last.dist || (dist == last.dist && index < last.index)) {
            return;
        }
        best.pop();
    }
    let pos = best.partition_point(before);
    best.insert(pos, Neighbor { index, dist });
}
