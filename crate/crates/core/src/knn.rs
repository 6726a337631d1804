//! Exact Euclidean nearest-neighbour search over a fixed point cloud.

/// Point cloud in `dim` dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>) -> Self {
        assert!(dim > 0, "point dimension must be positive");
        assert_eq!(coords.len() % dim, 0, "coordinate count not a multiple of dim");
        Self { dim, coords }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone)]
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

/// Kd-tree returning exact k-th nearest neighbour distances.
#[derive(Debug, Clone)]
pub struct KdTree<'a> {
    cloud: &'a PointCloud,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl<'a> KdTree<'a> {
    pub fn build(cloud: &'a PointCloud) -> Self {
        let mut tree = KdTree {
            cloud,
            order: (0..cloud.len()).collect(),
            nodes: Vec::new(),
        };
        if !cloud.is_empty() {
            tree.build_node(0, cloud.len());
        }
        tree
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { start, end });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let cloud = self.cloud;
        let d = cloud.dim();
        let mut axis = 0;
        let mut widest = -1.0;
        for a in 0..d {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in &self.order[start..end] {
                let x = cloud.point(i)[a];
                lo = lo.min(x);
                hi = hi.max(x);
            }
            if hi - lo > widest {
                widest = hi - lo;
                axis = a;
            }
        }
        if widest <= 0.0 {
            return id;
        }
        let mid = start + (end - start) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&i, &j| {
            cloud.point(i)[axis].total_cmp(&cloud.point(j)[axis])
        });
        let value = cloud.point(self.order[mid])[axis];
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id] = Node::Split {
            axis,
            value,
            left,
            right,
        };
        id
    }

    /// Distance from `query` to its `k`-th nearest point, skipping the point
    /// with index `exclude`. Returns `None` if fewer than `k` candidates exist.
    pub fn kth_distance(&self, query: &[f64], k: usize, exclude: Option<usize>) -> Option<f64> {
        assert!(k >= 1);
        if self.nodes.is_empty() {
            return None;
        }
        // Ascending squared distances of the best k so far.
        let mut best: Vec<f64> = Vec::with_capacity(k + 1);
        self.search(0, query, k, exclude, &mut best);
        (best.len() == k).then(|| best[k - 1].sqrt())
    }

    fn search(&self, node: usize, q: &[f64], k: usize, exclude: Option<usize>, best: &mut Vec<f64>) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    if Some(i) == exclude {
                        continue;
                    }
                    let d2 = squared_distance(q, self.cloud.point(i));
                    if best.len() < k || d2 < best[k - 1] {
                        let pos = best.partition_point(|&b| b <= d2);
                        best.insert(pos, d2);
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
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, k, exclude, best);
                if best.len() < k || diff * diff <= best[k - 1] {
                    self.search(far, q, k, exclude, best);
                }
            }
        }
    }
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Brute-force reference for [`KdTree::kth_distance`].
pub fn kth_distance_brute(
    cloud: &PointCloud,
    query: &[f64],
    k: usize,
    exclude: Option<usize>,
) -> Option<f64> {
    let mut d: Vec<f64> = (0..cloud.len())
        .filter(|&i| Some(i) != exclude)
        .map(|i| squared_distance(query, cloud.point(i)))
        .collect();
    if d.len() < k {
        return None;
    }
    d.select_nth_unstable_by(k - 1, f64::total_cmp);
    Some(d[k - 1].sqrt())
}
