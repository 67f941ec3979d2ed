//! Exact kd-tree neighbor search.
//!
//! Queries are exact, boundary-inclusive and fully deterministic: results
//! are ordered by distance with ties broken by lower point index, and
//! subtree pruning is only applied on strict inequality so equal-distance
//! candidates are never lost.

use super::{CloudError, Point3, PointCloud};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, Copy)]
struct Node {
    point: u32,
    axis: u8,
    left: i32,
    right: i32,
}

#[derive(Debug, Clone)]
pub struct KdTree {
    coords: Vec<[f64; 3]>,
    nodes: Vec<Node>,
    root: i32,
}

// Max-heap entry ordered by (distance^2, index); the heap top is the
// current worst of the k best.
#[derive(PartialEq)]
struct HeapItem {
    dist2: f64,
    index: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .partial_cmp(&other.dist2)
            .expect("finite distances")
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl KdTree {
    pub fn build(cloud: &PointCloud) -> Self {
        let coords: Vec<[f64; 3]> = cloud.points().iter().map(|p| [p.x, p.y, p.z]).collect();
        let mut indices: Vec<u32> = (0..coords.len() as u32).collect();
        let mut nodes = Vec::with_capacity(coords.len());
        let root = build_recursive(&coords, &mut indices, &mut nodes);
        Self {
            coords,
            nodes,
            root,
        }
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// The `k` exact nearest neighbors of `query`, sorted ascending by
    /// distance with ties broken by lower index. The query point itself is
    /// returned (at distance 0) when it belongs to the indexed cloud.
    pub fn knn(&self, query: &Point3, k: usize) -> Result<Vec<Neighbor>, CloudError> {
        if k == 0 || k > self.len() {
            return Err(CloudError::InvalidK { k, len: self.len() });
        }
        let q = [query.x, query.y, query.z];
        let mut heap: BinaryHeap<HeapItem> = BinaryHeap::with_capacity(k + 1);
        self.knn_visit(self.root, &q, k, &mut heap);
        let mut out: Vec<Neighbor> = heap
            .into_sorted_vec()
            .into_iter()
            .map(|item| Neighbor {
                index: item.index,
                distance: item.dist2.sqrt(),
            })
            .collect();
        debug_assert_eq!(out.len(), k);
        out.shrink_to_fit();
        Ok(out)
    }

    /// Every point with distance <= `radius` (inclusive), sorted ascending
    /// by distance with ties broken by lower index. The acceptance test is
    /// on the same computed distance `knn` reports, so a radius equal to a
    /// k-th neighbor distance is guaranteed to include that neighbor.
    pub fn radius_search(&self, query: &Point3, radius: f64) -> Result<Vec<Neighbor>, CloudError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(CloudError::InvalidRadius { radius });
        }
        let q = [query.x, query.y, query.z];
        let mut found: Vec<HeapItem> = Vec::new();
        self.radius_visit(self.root, &q, radius, &mut found);
        found.sort_by(|a, b| a.cmp(b));
        Ok(found
            .into_iter()
            .map(|item| Neighbor {
                index: item.index,
                distance: item.dist2.sqrt(),
            })
            .collect())
    }

    fn knn_visit(&self, node: i32, q: &[f64; 3], k: usize, heap: &mut BinaryHeap<HeapItem>) {
        if node < 0 {
            return;
        }
        let n = self.nodes[node as usize];
        let p = self.coords[n.point as usize];
        let d2 = dist2(&p, q);
        let candidate = HeapItem {
            dist2: d2,
            index: n.point as usize,
        };
        if heap.len() < k {
            heap.push(candidate);
        } else if candidate < *heap.peek().expect("non-empty heap") {
            heap.pop();
            heap.push(candidate);
        }

        let axis = n.axis as usize;
        let delta = q[axis] - p[axis];
        let (near, far) = if delta < 0.0 {
            (n.left, n.right)
        } else {
            (n.right, n.left)
        };
        self.knn_visit(near, q, k, heap);
        // Visit the far side unless it is strictly farther than the current
        // worst candidate; on exact ties a lower-index point may still win.
        let worst = heap.peek().map(|w| w.dist2).unwrap_or(f64::INFINITY);
        if heap.len() < k || delta * delta <= worst {
            self.knn_visit(far, q, k, heap);
        }
    }

    fn radius_visit(&self, node: i32, q: &[f64; 3], radius: f64, out: &mut Vec<HeapItem>) {
        if node < 0 {
            return;
        }
        let n = self.nodes[node as usize];
        let p = self.coords[n.point as usize];
        let d2 = dist2(&p, q);
        if d2.sqrt() <= radius {
            out.push(HeapItem {
                dist2: d2,
                index: n.point as usize,
            });
        }
        let axis = n.axis as usize;
        let delta = q[axis] - p[axis];
        let (near, far) = if delta < 0.0 {
            (n.left, n.right)
        } else {
            (n.right, n.left)
        };
        self.radius_visit(near, q, radius, out);
        // One-ulp slack so a point whose rounded distance equals the
        // radius is never pruned away on the far side.
        if delta.abs() <= radius * (1.0 + 1e-12) {
            self.radius_visit(far, q, radius, out);
        }
    }
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

fn build_recursive(coords: &[[f64; 3]], indices: &mut [u32], nodes: &mut Vec<Node>) -> i32 {
    if indices.is_empty() {
        return -1;
    }
    // Split the axis of largest extent; degenerate extents fall back to x.
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &i in indices.iter() {
        for a in 0..3 {
            lo[a] = lo[a].min(coords[i as usize][a]);
            hi[a] = hi[a].max(coords[i as usize][a]);
        }
    }
    let mut axis = 0;
    let mut best = hi[0] - lo[0];
    for a in 1..3 {
        if hi[a] - lo[a] > best {
            best = hi[a] - lo[a];
            axis = a;
        }
    }

    let mid = indices.len() / 2;
    indices.select_nth_unstable_by(mid, |&a, &b| {
        coords[a as usize][axis]
            .partial_cmp(&coords[b as usize][axis])
            .expect("finite coordinates")
            .then(a.cmp(&b))
    });
    let point = indices[mid];
    let slot = nodes.len();
    nodes.push(Node {
        point,
        axis: axis as u8,
        left: -1,
        right: -1,
    });
    let (left_half, right_half) = indices.split_at_mut(mid);
    let left = build_recursive(coords, left_half, nodes);
    let right = build_recursive(coords, &mut right_half[1..], nodes);
    nodes[slot].left = left;
    nodes[slot].right = right;
    slot as i32
}
