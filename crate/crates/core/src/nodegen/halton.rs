use super::NodeSet;
use crate::error::{input, Result};
use crate::geometry::{BoundaryPoint, Domain};
use crate::point::Point;

/// Leading Halton entries skipped by default.
pub const DEFAULT_SKIP: usize = 20;

const BASES: [u64; 3] = [2, 3, 5];

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += (index % base) as f64 * f;
        index /= base;
        f *= inv;
    }
    r
}

/// The `index`-th Halton point in `dim` dimensions (bases 2, 3, 5), zero-padded.
pub fn halton(index: u64, dim: usize) -> Point {
    let mut p = [0.0; 3];
    for k in 0..dim {
        p[k] = radical_inverse(index, BASES[k]);
    }
    p
}

/// Boundary nodes followed by the first `target_count` Halton points (after
/// `skip`) that fall inside the domain, mapped from its bounding box.
/// There is no minimal-spacing guarantee.
pub fn fill_halton(
    domain: &Domain,
    boundary: &[BoundaryPoint],
    target_count: usize,
    skip: usize,
) -> Result<NodeSet> {
    if target_count == 0 {
        return input("target_count must be positive");
    }
    let dim = domain.dim();
    let (lo, hi) = domain.bounding_box();
    let h = (domain.measure() / target_count as f64).powf(1.0 / dim as f64);
    let mut nodes = NodeSet::empty(dim, h, skip as u64);
    for b in boundary {
        nodes.push_boundary(b);
    }
    let mut accepted = 0;
    let mut index = skip as u64 + 1;
    // Guard against degenerate domains that reject every sample.
    let limit = index + 1000 * target_count as u64 + 100_000;
    while accepted < target_count && index < limit {
        let u = halton(index, dim);
        let mut p = [0.0; 3];
        for k in 0..dim {
            p[k] = lo[k] + u[k] * (hi[k] - lo[k]);
        }
        if domain.inside(&p) {
            nodes.push_interior(p);
            accepted += 1;
        }
        index += 1;
    }
    Ok(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base2_prefix() {
        let v: Vec<f64> = (1..=3).map(|i| radical_inverse(i, 2)).collect();
        assert_eq!(v, vec![0.5, 0.25, 0.75]);
    }

    #[test]
    fn base3_prefix() {
        assert!((radical_inverse(1, 3) - 1.0 / 3.0).abs() < 1e-15);
        assert!((radical_inverse(2, 3) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn fills_requested_count_inside() {
        let d = Domain::unit_disc();
        let b = d.discretize_boundary(0.05).unwrap();
        let nodes = fill_halton(&d, &b, 300, DEFAULT_SKIP).unwrap();
        assert_eq!(nodes.interior_indices().len(), 300);
        assert_eq!(nodes.len(), 300 + b.len());
        assert!(nodes.interior_indices().iter().all(|&i| d.inside(&nodes.positions[i])));
        assert!(fill_halton(&d, &b, 0, 0).is_err());
    }
}
