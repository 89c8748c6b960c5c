//! k-d tree over points in R^d under the Chebyshev (max-coordinate) metric.

const LEAF_SIZE: usize = 12;

enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        axis: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

pub struct KdTree {
    dim: usize,
    /// Coordinates reordered to match `ids`.
    pts: Vec<f64>,
    ids: Vec<usize>,
    nodes: Vec<Node>,
}

pub fn chebyshev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

impl KdTree {
    /// `points` is `n × dim`, row-major.
    pub fn new(points: &[f64], dim: usize) -> Self {
        assert!(dim > 0 && points.len().is_multiple_of(dim));
        let n = points.len() / dim;
        let mut ids: Vec<usize> = (0..n).collect();
        let mut nodes = Vec::new();
        if n > 0 {
            build(points, dim, &mut ids, 0, &mut nodes);
        }
        let mut pts = Vec::with_capacity(points.len());
        for &i in &ids {
            pts.extend_from_slice(&points[i * dim..(i + 1) * dim]);
        }
        Self { dim, pts, ids, nodes }
    }

    fn point(&self, slot: usize) -> &[f64] {
        &self.pts[slot * self.dim..(slot + 1) * self.dim]
    }

    /// Distance from `q` to its k-th nearest point, ignoring the point with id `skip`.
    pub fn kth_distance(&self, q: &[f64], k: usize, skip: usize) -> f64 {
        let mut best: Vec<f64> = Vec::with_capacity(k + 1);
        if !self.nodes.is_empty() {
            self.knn(0, q, k, skip, &mut best);
        }
        best.get(k - 1).copied().unwrap_or(f64::INFINITY)
    }

    fn knn(&self, node: usize, q: &[f64], k: usize, skip: usize, best: &mut Vec<f64>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for slot in start..end {
                    if self.ids[slot] == skip {
                        continue;
                    }
                    let d = chebyshev(q, self.point(slot));
                    if best.len() < k || d < best[k - 1] {
                        let pos = best.partition_point(|&b| b <= d);
                        best.insert(pos, d);
                        best.truncate(k);
                    }
                }
            }
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let diff = q[axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.knn(near, q, k, skip, best);
                if best.len() < k || diff.abs() < best[k - 1] {
                    self.knn(far, q, k, skip, best);
                }
            }
        }
    }

    /// Number of points strictly closer than `r` to `q`, excluding id `skip`.
    pub fn count_within(&self, q: &[f64], r: f64, skip: usize) -> usize {
        if self.nodes.is_empty() {
            return 0;
        }
        self.count(0, q, r, skip)
    }

    fn count(&self, node: usize, q: &[f64], r: f64, skip: usize) -> usize {
        match self.nodes[node] {
            Node::Leaf { start, end } => (start..end)
                .filter(|&slot| self.ids[slot] != skip && chebyshev(q, self.point(slot)) < r)
                .count(),
            Node::Split {
                axis,
                value,
                left,
                right,
            } => {
                let mut c = 0;
                if q[axis] - value < r {
                    c += self.count(left, q, r, skip);
                }
                if value - q[axis] < r {
                    c += self.count(right, q, r, skip);
                }
                c
            }
        }
    }
}

/// Recursively split `ids[..]` (slots `offset..offset + ids.len()`) on the widest axis.
fn build(points: &[f64], dim: usize, ids: &mut [usize], offset: usize, nodes: &mut Vec<Node>) -> usize {
    let me = nodes.len();
    let n = ids.len();
    if n <= LEAF_SIZE {
        nodes.push(Node::Leaf {
            start: offset,
            end: offset + n,
        });
        return me;
    }
    let coord = |i: usize, a: usize| points[i * dim + a];
    let mut axis = 0;
    let mut widest = f64::NEG_INFINITY;
    for a in 0..dim {
        let (lo, hi) = ids.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
            (lo.min(coord(i, a)), hi.max(coord(i, a)))
        });
        if hi - lo > widest {
            widest = hi - lo;
            axis = a;
        }
    }
    if widest <= 0.0 {
        // all points identical
        nodes.push(Node::Leaf {
            start: offset,
            end: offset + n,
        });
        return me;
    }
    let mid = n / 2;
    ids.select_nth_unstable_by(mid, |&a, &b| coord(a, axis).total_cmp(&coord(b, axis)));
    let value = coord(ids[mid], axis);
    nodes.push(Node::Leaf { start: 0, end: 0 });
    let (lo, hi) = ids.split_at_mut(mid);
    let left = build(points, dim, lo, offset, nodes);
    let right = build(points, dim, hi, offset + mid, nodes);
    nodes[me] = Node::Split {
        axis,
        value,
        left,
        right,
    };
    me
}
