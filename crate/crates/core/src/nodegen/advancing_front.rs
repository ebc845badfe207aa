use std::collections::VecDeque;
use std::f64::consts::{PI, TAU};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::NodeSet;
use crate::error::{config, Result};
use crate::geometry::{BoundaryPoint, Domain};
use crate::point::{self, Point};

/// Candidates proposed around each expanded node in 2D.
pub const CANDIDATES_2D: usize = 15;
/// Candidates proposed around each expanded node in 3D.
pub const CANDIDATES_3D: usize = 30;
/// Candidates closer than `SPACING_FACTOR * h` to an existing node are rejected.
pub const SPACING_FACTOR: f64 = 1.0;
/// Boundary samples closer than this multiple of `h` to an already kept
/// sample (corners first) are dropped.
pub const BOUNDARY_THINNING: f64 = 0.9;

/// Uniform background grid with cell size `h` for proximity queries.
pub(crate) struct Grid {
    lo: Point,
    cell: f64,
    dims: [usize; 3],
    cells: Vec<Vec<u32>>,
}

impl Grid {
    pub(crate) fn new(lo: Point, hi: Point, cell: f64, dim: usize) -> Self {
        let pad = 2.0 * cell;
        let lo = [lo[0] - pad, lo[1] - pad, lo[2] - pad];
        let mut dims = [1usize; 3];
        for k in 0..dim {
            dims[k] = (((hi[k] + pad - lo[k]) / cell).ceil() as usize).max(1) + 1;
        }
        Grid { lo, cell, dims, cells: vec![Vec::new(); dims[0] * dims[1] * dims[2]] }
    }

    fn coords(&self, p: &Point) -> [isize; 3] {
        let mut c = [0isize; 3];
        for k in 0..3 {
            if self.dims[k] > 1 {
                c[k] = ((p[k] - self.lo[k]) / self.cell).floor() as isize;
            }
        }
        c
    }

    fn flat(&self, c: [isize; 3]) -> Option<usize> {
        for k in 0..3 {
            if c[k] < 0 || c[k] as usize >= self.dims[k] {
                return None;
            }
        }
        Some((c[2] as usize * self.dims[1] + c[1] as usize) * self.dims[0] + c[0] as usize)
    }

    pub(crate) fn insert(&mut self, p: &Point, id: u32) {
        if let Some(f) = self.flat(self.coords(p)) {
            self.cells[f].push(id);
        }
    }

    /// Whether any stored point lies strictly closer than `r` (`r <= cell`).
    pub(crate) fn any_within(&self, p: &Point, r: f64, positions: &[Point]) -> bool {
        let c = self.coords(p);
        let r2 = r * r;
        let span = |k: usize| if self.dims[k] > 1 { -1..=1isize } else { 0..=0isize };
        for dz in span(2) {
            for dy in span(1) {
                for dx in span(0) {
                    if let Some(f) = self.flat([c[0] + dx, c[1] + dy, c[2] + dz]) {
                        if self.cells[f]
                            .iter()
                            .any(|&j| point::dist2(p, &positions[j as usize]) < r2)
                        {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }
}

/// Fills a domain by advancing a front from the boundary nodes: each queued
/// node proposes candidates on the sphere of radius `h` around itself, and a
/// candidate is accepted iff it lies inside the domain and no existing node is
/// closer than `h`.
pub fn fill_advancing_front(
    domain: &Domain,
    boundary: &[BoundaryPoint],
    h: f64,
    seed: u64,
) -> Result<NodeSet> {
    fill_advancing_front_with(domain, boundary, h, seed, SPACING_FACTOR)
}

/// [`fill_advancing_front`] with a custom rejection radius
/// `spacing_factor * h`, `spacing_factor` in `(0.5, 1]`.
pub fn fill_advancing_front_with(
    domain: &Domain,
    boundary: &[BoundaryPoint],
    h: f64,
    seed: u64,
    spacing_factor: f64,
) -> Result<NodeSet> {
    if !(h > 0.0) || !h.is_finite() {
        return config("spacing h must be positive");
    }
    if !(spacing_factor > 0.5 && spacing_factor <= 1.0) {
        return config("spacing factor must lie in (0.5, 1]");
    }
    let dim = domain.dim();
    let min_dist = spacing_factor * h * (1.0 - 1e-10);
    let (lo, hi) = domain.bounding_box();
    let mut grid = Grid::new(lo, hi, h, dim);
    let mut nodes = NodeSet::empty(dim, h, seed);

    // Corners first so thinning at sharp corners drops their neighbours.
    let mut order: Vec<usize> = (0..boundary.len()).collect();
    order.sort_by_key(|&i| !boundary[i].corner);
    let mut keep = vec![false; boundary.len()];
    let mut accepted: Vec<Point> = Vec::new();
    {
        let mut probe = Grid::new(lo, hi, h, dim);
        for &i in &order {
            let p = boundary[i].position;
            if !probe.any_within(&p, BOUNDARY_THINNING * h, &accepted) {
                probe.insert(&p, accepted.len() as u32);
                accepted.push(p);
                keep[i] = true;
            }
        }
    }
    let dropped = keep.iter().filter(|k| !**k).count();
    if dropped > 0 {
        nodes.warnings.push(format!("dropped {dropped} boundary samples closer than {}", BOUNDARY_THINNING * h));
    }
    for (b, _) in boundary.iter().zip(&keep).filter(|(_, k)| **k) {
        grid.insert(&b.position, nodes.len() as u32);
        nodes.push_boundary(b);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut queue: VecDeque<usize> = (0..nodes.len()).collect();
    let sphere = fibonacci_sphere(CANDIDATES_3D);
    let mut candidates = Vec::with_capacity(CANDIDATES_3D);
    while let Some(i) = queue.pop_front() {
        let p = nodes.positions[i];
        candidates.clear();
        match dim {
            1 => {
                candidates.push([p[0] - h, 0.0, 0.0]);
                candidates.push([p[0] + h, 0.0, 0.0]);
            }
            2 => {
                let theta0 = rng.random::<f64>() * TAU;
                for k in 0..CANDIDATES_2D {
                    let a = theta0 + TAU * k as f64 / CANDIDATES_2D as f64;
                    candidates.push([p[0] + h * a.cos(), p[1] + h * a.sin(), 0.0]);
                }
            }
            _ => {
                let rot = random_rotation(&mut rng);
                for d in &sphere {
                    let v = mat_vec(&rot, d);
                    candidates.push(point::add(&p, &point::scale(&v, h)));
                }
            }
        }
        for c in &candidates {
            if domain.inside(c) && !grid.any_within(c, min_dist, &nodes.positions) {
                let id = nodes.len();
                grid.insert(c, id as u32);
                nodes.push_interior(*c);
                queue.push_back(id);
            }
        }
    }
    if nodes.interior_indices().is_empty() {
        nodes.warnings.push(format!("domain too thin for spacing {h}: no interior nodes"));
    }
    Ok(nodes)
}

fn fibonacci_sphere(n: usize) -> Vec<Point> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let a = golden * i as f64;
            [r * a.cos(), r * a.sin(), z]
        })
        .collect()
}

/// Uniformly random rotation matrix from a random unit quaternion.
fn random_rotation(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random::<f64>() * TAU;
    let u3: f64 = rng.random::<f64>() * TAU;
    let (a, b) = ((1.0 - u1).sqrt(), u1.sqrt());
    let (w, x, y, z) = (a * u2.sin(), a * u2.cos(), b * u3.sin(), b * u3.cos());
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
        [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
        [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

fn mat_vec(m: &[[f64; 3]; 3], v: &Point) -> Point {
    [point::dot(&m[0], v), point::dot(&m[1], v), point::dot(&m[2], v)]
}
