use crate::Vec3;

/// Static 3D tree for nearest-neighbour queries.
pub struct KdTree<'a> {
    points: &'a [Vec3],
    nodes: Vec<Node>,
}

struct Node {
    point: usize,
    axis: usize,
    left: Option<usize>,
    right: Option<usize>,
}

impl<'a> KdTree<'a> {
    pub fn new(points: &'a [Vec3]) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        let mut tree = Self { points, nodes: Vec::with_capacity(points.len()) };
        tree.build(&mut order, 0);
        tree
    }

    fn build(&mut self, idx: &mut [usize], depth: usize) -> Option<usize> {
        if idx.is_empty() {
            return None;
        }
        let axis = depth % 3;
        let mid = idx.len() / 2;
        let pts = self.points;
        idx.select_nth_unstable_by(mid, |&a, &b| pts[a][axis].total_cmp(&pts[b][axis]).then(a.cmp(&b)));
        let node = self.nodes.len();
        self.nodes.push(Node { point: idx[mid], axis, left: None, right: None });
        let (lo, rest) = idx.split_at_mut(mid);
        let left = self.build(lo, depth + 1);
        let right = self.build(&mut rest[1..], depth + 1);
        self.nodes[node].left = left;
        self.nodes[node].right = right;
        Some(node)
    }

    /// Squared distance from `q` to its nearest point.
    pub fn nearest_sq(&self, q: &Vec3) -> f64 {
        let mut best = f64::INFINITY;
        if !self.nodes.is_empty() {
            self.search(0, q, &mut best);
        }
        best
    }

    fn search(&self, node: usize, q: &Vec3, best: &mut f64) {
        let n = &self.nodes[node];
        let p = &self.points[n.point];
        let d = (p - q).norm_squared();
        if d < *best {
            *best = d;
        }
        let diff = q[n.axis] - p[n.axis];
        let (near, far) = if diff < 0.0 { (n.left, n.right) } else { (n.right, n.left) };
        if let Some(c) = near {
            self.search(c, q, best);
        }
        if diff * diff < *best {
            if let Some(c) = far {
                self.search(c, q, best);
            }
        }
    }
}
