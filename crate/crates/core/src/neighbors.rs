//! Exact k-nearest-neighbour search and stencil selection.
//!
//! Neighbours are ordered by `(squared distance, node index)`, so ties are
//! always broken towards the smaller node index and a stencil of size `n` is a
//! prefix of the stencil of size `n + 1`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{input, Result};
use crate::nodegen::{NodeRole, NodeSet};
use crate::point::{self, Point};

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum KdNode {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

/// Immutable k-d tree over a point cloud.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    points: Vec<Point>,
    dim: usize,
    order: Vec<usize>,
    nodes: Vec<KdNode>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Candidate {
    d2: f64,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.d2.total_cmp(&other.d2).then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl SpatialIndex {
    pub fn new(points: &[Point], dim: usize) -> Result<Self> {
        if points.is_empty() {
            return input("cannot index an empty point set");
        }
        if !(1..=3).contains(&dim) {
            return input(format!("unsupported dimension {dim}"));
        }
        let mut index = SpatialIndex {
            points: points.to_vec(),
            dim,
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
        };
        index.build_range(0, points.len());
        Ok(index)
    }

    /// Index over every node of a node set, ghosts included.
    pub fn build(nodes: &NodeSet) -> Result<Self> {
        Self::new(&nodes.positions, nodes.dim)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &Point {
        &self.points[i]
    }

    fn build_range(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(KdNode::Leaf { start, end });
            return id;
        }
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in &self.order[start..end] {
            for k in 0..self.dim {
                lo[k] = lo[k].min(self.points[i][k]);
                hi[k] = hi[k].max(self.points[i][k]);
            }
        }
        let axis = (0..self.dim)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
            .unwrap_or(0);
        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b))
        });
        let value = self.points[self.order[mid]][axis];
        self.nodes.push(KdNode::Split { axis, value, left: 0, right: 0 });
        let left = self.build_range(start, mid);
        let right = self.build_range(mid, end);
        self.nodes[id] = KdNode::Split { axis, value, left, right };
        id
    }

    /// The `k` nearest points to `query` as `(index, squared distance)`,
    /// ascending by distance then index.
    pub fn knn(&self, query: &Point, k: usize) -> Vec<(usize, f64)> {
        let k = k.min(self.points.len());
        if k == 0 {
            return Vec::new();
        }
        let mut heap = BinaryHeap::with_capacity(k + 1);
        self.search(0, query, k, &mut heap);
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        out.into_iter().map(|c| (c.index, c.d2)).collect()
    }

    fn search(&self, node: usize, q: &Point, k: usize, heap: &mut BinaryHeap<Candidate>) {
        match self.nodes[node] {
            KdNode::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let c = Candidate { d2: point::dist2(q, &self.points[i]), index: i };
                    if heap.len() < k {
                        heap.push(c);
                    } else if c < *heap.peek().unwrap() {
                        heap.pop();
                        heap.push(c);
                    }
                }
            }
            KdNode::Split { axis, value, left, right } => {
                let diff = q[axis] - value;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, k, heap);
                // Equal distances must still be visited for the index tie-break.
                if heap.len() < k || diff * diff <= heap.peek().unwrap().d2 {
                    self.search(far, q, k, heap);
                }
            }
        }
    }

    /// Index of the nearest point and its distance.
    pub fn nearest(&self, query: &Point) -> (usize, f64) {
        let r = self.knn(query, 1);
        (r[0].0, r[0].1.sqrt())
    }
}

/// A node's `n` nearest neighbours, itself first.
#[derive(Clone, Debug, PartialEq)]
pub struct Stencil {
    pub center: usize,
    pub members: Vec<usize>,
    pub radius: f64,
}

impl Stencil {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Selects the `n` nearest nodes to node `center`, including `center` itself.
pub fn stencil_of(index: &SpatialIndex, center: usize, n: usize) -> Result<Stencil> {
    if n == 0 || n > index.len() {
        return input(format!("stencil size {n} not in 1..={}", index.len()));
    }
    if center >= index.len() {
        return input(format!("node {center} out of range"));
    }
    let found = index.knn(index.point(center), n);
    let mut members: Vec<usize> = Vec::with_capacity(n);
    // The center sits at distance zero; it leads unless an exact duplicate
    // with a lower index exists.
    members.push(center);
    members.extend(found.iter().map(|&(i, _)| i).filter(|&i| i != center).take(n - 1));
    let radius = point::dist(index.point(center), index.point(*members.last().unwrap()));
    Ok(Stencil { center, members, radius })
}

/// Whether a node gets a stencil: interior and derivative-condition boundary nodes.
pub fn needs_stencil(role: NodeRole) -> bool {
    matches!(role, NodeRole::Interior | NodeRole::Neumann | NodeRole::Robin)
}

/// Stencils for every node that needs one, with per-node sizes `n_map[i]`.
pub fn stencils_all(index: &SpatialIndex, nodes: &NodeSet, n_map: &[usize]) -> Result<Vec<Stencil>> {
    if n_map.len() != nodes.len() {
        return input("n_map length differs from node count");
    }
    let centers: Vec<usize> = (0..nodes.len()).filter(|&i| needs_stencil(nodes.roles[i])).collect();
    centers.par_iter().map(|&c| stencil_of(index, c, n_map[c])).collect()
}

/// Neighbour lists of size `n_max` for the given centers; stencils of any
/// smaller size are prefixes of these.
#[derive(Clone, Debug)]
pub struct NeighborTable {
    pub centers: Vec<usize>,
    lists: Vec<Vec<usize>>,
    positions: Vec<Point>,
}

impl NeighborTable {
    pub fn new(index: &SpatialIndex, centers: Vec<usize>, n_max: usize) -> Result<Self> {
        let lists = centers
            .par_iter()
            .map(|&c| stencil_of(index, c, n_max).map(|s| s.members))
            .collect::<Result<Vec<_>>>()?;
        Ok(NeighborTable { centers, lists, positions: index.points.clone() })
    }

    pub fn n_max(&self) -> usize {
        self.lists.first().map_or(0, Vec::len)
    }

    /// Stencil of row `row` truncated to `n` members.
    pub fn stencil(&self, row: usize, n: usize) -> Result<Stencil> {
        let list = &self.lists[row];
        if n == 0 || n > list.len() {
            return input(format!("stencil size {n} exceeds the table size {}", list.len()));
        }
        let members = list[..n].to_vec();
        let c = self.centers[row];
        let radius = point::dist(&self.positions[c], &self.positions[members[n - 1]]);
        Ok(Stencil { center: c, members, radius })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(points: &[Point], q: &Point, k: usize) -> Vec<usize> {
        let mut all: Vec<(f64, usize)> =
            points.iter().enumerate().map(|(i, p)| (point::dist2(q, p), i)).collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        all.into_iter().take(k).map(|(_, i)| i).collect()
    }

    fn cross(h: f64) -> Vec<Point> {
        vec![[0.0, 0.0, 0.0], [h, 0.0, 0.0], [-h, 0.0, 0.0], [0.0, h, 0.0], [0.0, -h, 0.0]]
    }

    #[test]
    fn single_node() {
        let idx = SpatialIndex::new(&[[0.3, 0.1, 0.0]], 2).unwrap();
        let s = stencil_of(&idx, 0, 1).unwrap();
        assert_eq!(s.members, vec![0]);
        assert_eq!(s.radius, 0.0);
    }

    #[test]
    fn cross_stencil() {
        let pts = cross(0.1);
        let idx = SpatialIndex::new(&pts, 2).unwrap();
        let s = stencil_of(&idx, 0, 5).unwrap();
        assert_eq!(s.members, vec![0, 1, 2, 3, 4]);
        assert!((s.radius - 0.1).abs() < 1e-15);
        for q in &pts {
            let got: Vec<usize> = idx.knn(q, 3).into_iter().map(|x| x.0).collect();
            assert_eq!(got, brute(&pts, q, 3));
        }
    }

    #[test]
    fn tie_break_by_index() {
        // 3x3 grid; the four edge-neighbours of the middle are equidistant.
        let mut pts = Vec::new();
        for j in 0..3 {
            for i in 0..3 {
                pts.push([i as f64, j as f64, 0.0]);
            }
        }
        let idx = SpatialIndex::new(&pts, 2).unwrap();
        let s = stencil_of(&idx, 4, 2).unwrap();
        assert_eq!(s.members, vec![4, 1]);
        let s = stencil_of(&idx, 4, 5).unwrap();
        assert_eq!(s.members, vec![4, 1, 3, 5, 7]);
    }

    #[test]
    fn oversized_stencil_is_error() {
        let idx = SpatialIndex::new(&cross(1.0), 2).unwrap();
        assert!(stencil_of(&idx, 0, 6).is_err());
        assert!(stencil_of(&idx, 0, 0).is_err());
    }

    #[test]
    fn random_queries_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in 1..=3 {
            let n = 600;
            let pts: Vec<Point> = (0..n)
                .map(|_| {
                    let mut p = [0.0; 3];
                    for k in 0..dim {
                        // coarse lattice values force many exact ties
                        p[k] = (rng.random_range(0..20) as f64) * 0.05;
                    }
                    p
                })
                .collect();
            let idx = SpatialIndex::new(&pts, dim).unwrap();
            for _ in 0..200 {
                let mut q = [0.0; 3];
                for k in 0..dim {
                    q[k] = rng.random::<f64>();
                }
                let k = rng.random_range(1..40);
                let got: Vec<usize> = idx.knn(&q, k).into_iter().map(|x| x.0).collect();
                assert_eq!(got, brute(&pts, &q, k));
            }
        }
    }

    #[test]
    fn table_prefixes_match_direct_stencils() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let pts: Vec<Point> = (0..300).map(|_| [rng.random(), rng.random(), 0.0]).collect();
        let idx = SpatialIndex::new(&pts, 2).unwrap();
        let table = NeighborTable::new(&idx, (0..300).collect(), 30).unwrap();
        for row in [0, 17, 299] {
            for n in [1, 10, 30] {
                assert_eq!(table.stencil(row, n).unwrap(), stencil_of(&idx, row, n).unwrap());
            }
        }
    }
}
