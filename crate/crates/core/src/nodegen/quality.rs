use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{halton, NodeSet};
use crate::error::{input, Result};
use crate::geometry::Domain;
use crate::neighbors::SpatialIndex;
use crate::point::{self, Point};

/// Quasi-uniformity metrics of a node set.
///
/// `rho` is a lower estimate of the fill distance: the largest distance to
/// the nearest node over the probe points tried (see [`quality`]).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityMetrics {
    pub rho: f64,
    pub delta: f64,
    pub gamma: f64,
}

/// Exact minimum pairwise distance.
pub fn separation_distance(nodes: &NodeSet) -> Result<f64> {
    if nodes.len() < 2 {
        return input("separation distance needs at least two nodes");
    }
    let index = SpatialIndex::build(nodes)?;
    let d2 = (0..nodes.len())
        .into_par_iter()
        .map(|i| index.knn(&nodes.positions[i], 2)[1].1)
        .reduce(|| f64::INFINITY, f64::min);
    Ok(d2.sqrt())
}

/// Probes with the largest distances that are refined by [`climb`].
const REFINED_PROBES: usize = 64;

/// Circumcenters of small subsets of the nodes around `p` that lie inside
/// the domain, with their distance to the nearest node. Interior maxima of
/// the distance function sit at such points.
fn voronoi_candidates(index: &SpatialIndex, domain: &Domain, p: &Point) -> Vec<(f64, Point)> {
    let dim = domain.dim();
    let near: Vec<Point> = index.knn(p, if dim == 3 { 8 } else { 6 }).iter().map(|&(i, _)| *index.point(i)).collect();
    let mut out = Vec::new();
    let mut push = |c: Option<Point>| {
        if let Some(c) = c.filter(|c| domain.inside(c)) {
            out.push((index.nearest(&c).1, c));
        }
    };
    let n = near.len();
    for a in 0..n {
        for b in a + 1..n {
            match dim {
                1 => push(Some(point::scale(&point::add(&near[a], &near[b]), 0.5))),
                2 => (b + 1..n).for_each(|c| push(circumcenter(&[near[a], near[b], near[c]], 2))),
                _ => (b + 1..n).for_each(|c| {
                    (c + 1..n).for_each(|e| push(circumcenter(&[near[a], near[b], near[c], near[e]], 3)))
                }),
            }
        }
    }
    out
}

/// Point equidistant from the `dim + 1` given points, if they are in
/// general position.
fn circumcenter(pts: &[Point], dim: usize) -> Option<Point> {
    let a = pts[0];
    let mut m = [[0.0; 3]; 3];
    let mut r = [0.0; 3];
    for i in 0..dim {
        let d = point::sub(&pts[i + 1], &a);
        for k in 0..dim {
            m[i][k] = 2.0 * d[k];
        }
        r[i] = point::dot(&d, &d);
    }
    let det = |m: &[[f64; 3]; 3]| match dim {
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
    };
    let full = det(&m);
    let scale: f64 = m.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    if full.abs() <= 1e-12 * scale.powi(dim as i32) {
        return None;
    }
    let mut x = a;
    for k in 0..dim {
        let mut mk = m;
        for i in 0..dim {
            mk[i][k] = r[i];
        }
        x[k] += det(&mk) / full;
    }
    Some(x)
}

/// Compass search for a local maximum of the distance to the nearest node,
/// starting at probe `p` with distance `d` and step `step`.
fn climb(index: &SpatialIndex, domain: &Domain, mut p: Point, mut d: f64, mut step: f64) -> f64 {
    let dim = domain.dim();
    let stop = step * 1e-3;
    while step > stop {
        let mut moved = false;
        for k in 0..dim {
            for s in [-1.0, 1.0] {
                let mut q = p;
                q[k] += s * step;
                if domain.inside(&q) {
                    let dq = index.nearest(&q).1;
                    if dq > d {
                        (p, d, moved) = (q, dq, true);
                    }
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    d
}

/// Separation `delta`, fill distance `rho` and `gamma = rho / delta`. `rho`
/// comes from `probe_density^dim` Halton probes over the bounding box, the
/// best of which are refined by a local search.
pub fn quality(nodes: &NodeSet, domain: &Domain, probe_density: usize) -> Result<QualityMetrics> {
    if probe_density == 0 {
        return input("probe_density must be positive");
    }
    let delta = separation_distance(nodes)?;
    let index = SpatialIndex::build(nodes)?;
    let dim = domain.dim();
    let (lo, hi) = domain.bounding_box();
    let probes = (probe_density as u64).pow(dim as u32);
    let mut scanned: Vec<(f64, Point)> = (1..=probes)
        .into_par_iter()
        .filter_map(|i| {
            let u = halton(i, dim);
            let mut p = [0.0; 3];
            for k in 0..dim {
                p[k] = lo[k] + u[k] * (hi[k] - lo[k]);
            }
            domain.inside(&p).then(|| (index.nearest(&p).1, p))
        })
        .collect();
    if scanned.is_empty() {
        return input("no probe landed inside the domain");
    }
    let keep = REFINED_PROBES.min(scanned.len());
    scanned.select_nth_unstable_by(keep - 1, |a, b| b.0.total_cmp(&a.0));
    let spacing = (0..dim).map(|k| hi[k] - lo[k]).fold(0.0, f64::max) / probe_density as f64;
    let rho = scanned[..keep]
        .par_iter()
        .map(|&(d, p)| {
            let (d, p) = voronoi_candidates(&index, domain, &p)
                .into_iter()
                .fold((d, p), |best, c| if c.0 > best.0 { c } else { best });
            climb(&index, domain, p, d, spacing)
        })
        .reduce(|| 0.0, f64::max);
    if !(rho > 0.0) {
        return input("nodes cover no part of the domain");
    }
    Ok(QualityMetrics { rho, delta, gamma: rho / delta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nodegen::{fill_advancing_front, fill_halton, DEFAULT_SKIP};

    #[test]
    fn uniform_1d_grid() {
        let d = Domain::unit_interval();
        let mut nodes = NodeSet::empty(1, 0.25, 0);
        for k in 0..=4 {
            nodes.push_interior([k as f64 * 0.25, 0.0, 0.0]);
        }
        let q = quality(&nodes, &d, 64).unwrap();
        assert_eq!(q.delta, 0.25);
        assert_eq!(q.rho, 0.125);
        assert_eq!(q.gamma, 0.5);
    }

    #[test]
    fn refined_rho_is_exact_on_a_grid_with_few_probes() {
        let d = Domain::named("triangle").unwrap();
        let mut nodes = NodeSet::empty(2, 0.1, 0);
        for i in 0..=10 {
            for j in 0..=10 - i {
                nodes.push_interior([i as f64 * 0.1, j as f64 * 0.1, 0.0]);
            }
        }
        let q = quality(&nodes, &d, 8).unwrap();
        assert!((q.rho - 0.1 / 2f64.sqrt()).abs() < 1e-9, "{}", q.rho);
    }

    #[test]
    fn two_nodes() {
        let mut nodes = NodeSet::empty(2, 0.01, 0);
        nodes.push_interior([0.0, 0.0, 0.0]);
        nodes.push_interior([0.01, 0.0, 0.0]);
        assert!((separation_distance(&nodes).unwrap() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn single_node_is_error() {
        let mut nodes = NodeSet::empty(2, 0.01, 0);
        nodes.push_interior([0.5, 0.5, 0.0]);
        assert!(quality(&nodes, &Domain::unit_disc(), 10).is_err());
    }

    #[test]
    fn halton_worse_than_advancing_front() {
        let d = Domain::unit_disc();
        let h = 0.02;
        let b = d.discretize_boundary(h).unwrap();
        let af = fill_advancing_front(&d, &b, h, 1).unwrap();
        let count = af.interior_indices().len();
        let ht = fill_halton(&d, &b, count, DEFAULT_SKIP).unwrap();
        let qa = quality(&af, &d, 200).unwrap();
        let qh = quality(&ht, &d, 200).unwrap();
        assert!(qa.gamma <= 2.0);
        assert!(qh.gamma > qa.gamma);
    }
}
