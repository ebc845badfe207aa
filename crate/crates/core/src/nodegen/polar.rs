use std::f64::consts::TAU;

use super::NodeSet;
use crate::error::{input, Result};
use crate::geometry::{Domain, Shape};

/// Center node plus concentric rings at radii `h, 2h, ..., R - h`, each ring
/// split into `ceil(2 pi r / h)` equal arcs, plus the boundary circle.
pub fn fill_polar(domain: &Domain, h: f64) -> Result<NodeSet> {
    let Shape::Disc { center, radius } = *domain.shape() else {
        return input("polar fill requires a disc");
    };
    let boundary = domain.discretize_boundary(h)?;
    let mut nodes = NodeSet::empty(2, h, 0);
    for b in &boundary {
        nodes.push_boundary(b);
    }
    nodes.push_interior([center[0], center[1], 0.0]);
    let rings = ((radius / h).round() as usize).saturating_sub(1);
    for k in 1..=rings {
        let r = k as f64 * h;
        let count = (TAU * r / h - 1e-9).ceil() as usize;
        for j in 0..count {
            let a = TAU * j as f64 / count as f64;
            nodes.push_interior([center[0] + r * a.cos(), center[1] + r * a.sin(), 0.0]);
        }
    }
    Ok(nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nodegen::fill_advancing_front;

    #[test]
    fn coarse_rings() {
        let d = Domain::unit_disc();
        let nodes = fill_polar(&d, 0.25).unwrap();
        let interior = nodes.interior_indices();
        // center + one ring of ceil(2 pi) = 7 nodes
        assert_eq!(interior.len(), 8);
        for &i in &interior[1..] {
            let p = nodes.positions[i];
            let r = (p[0] - 0.5).hypot(p[1] - 0.5);
            assert!((r - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn density_matches_advancing_front() {
        let d = Domain::unit_disc();
        let h = 0.01;
        let polar = fill_polar(&d, h).unwrap();
        let b = d.discretize_boundary(h).unwrap();
        let af = fill_advancing_front(&d, &b, h, 0).unwrap();
        let ratio = polar.len() as f64 / af.len() as f64;
        assert!((ratio - 1.0).abs() < 0.15, "ratio {ratio}");
    }

    #[test]
    fn rejects_non_disc() {
        assert!(fill_polar(&Domain::unit_ball(), 0.1).is_err());
    }
}
