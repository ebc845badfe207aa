//! Scattered node generation and node-set quality metrics.

mod advancing_front;
mod halton;
mod io;
mod polar;
mod quality;

pub use advancing_front::{fill_advancing_front, fill_advancing_front_with, CANDIDATES_2D, CANDIDATES_3D, SPACING_FACTOR};
pub use halton::{fill_halton, halton, radical_inverse, DEFAULT_SKIP};
pub use io::{read_csv, write_csv, write_csv_with_values};
pub use polar::fill_polar;
pub use quality::{quality, separation_distance, QualityMetrics};

use serde::{Deserialize, Serialize};

use crate::geometry::BoundaryPoint;
use crate::point::{Point, ORIGIN};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    Interior,
    Dirichlet,
    Neumann,
    Robin,
    Ghost,
}

impl NodeRole {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeRole::Interior => "interior",
            NodeRole::Dirichlet => "dirichlet",
            NodeRole::Neumann => "neumann",
            NodeRole::Robin => "robin",
            NodeRole::Ghost => "ghost",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "interior" => NodeRole::Interior,
            "dirichlet" => NodeRole::Dirichlet,
            "neumann" => NodeRole::Neumann,
            "robin" => NodeRole::Robin,
            "ghost" => NodeRole::Ghost,
            _ => return None,
        })
    }

    pub fn is_boundary(self) -> bool {
        matches!(self, NodeRole::Dirichlet | NodeRole::Neumann | NodeRole::Robin)
    }
}

/// A discretisation: positions with roles and (for boundary/ghost nodes)
/// outward normals. Boundary nodes start out as Dirichlet; boundary
/// conditions may reassign them.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeSet {
    pub dim: usize,
    pub positions: Vec<Point>,
    pub roles: Vec<NodeRole>,
    /// Unit normal for boundary and ghost nodes, zero for interior nodes.
    pub normals: Vec<Point>,
    pub corners: Vec<bool>,
    /// For ghost nodes, the boundary node they were created for.
    pub ghost_parent: Vec<Option<usize>>,
    /// Nominal spacing.
    pub h: f64,
    pub seed: u64,
    pub warnings: Vec<String>,
}

impl NodeSet {
    pub fn empty(dim: usize, h: f64, seed: u64) -> Self {
        NodeSet {
            dim,
            positions: Vec::new(),
            roles: Vec::new(),
            normals: Vec::new(),
            corners: Vec::new(),
            ghost_parent: Vec::new(),
            h,
            seed,
            warnings: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn push_boundary(&mut self, b: &BoundaryPoint) {
        self.positions.push(b.position);
        self.roles.push(NodeRole::Dirichlet);
        self.normals.push(b.normal);
        self.corners.push(b.corner);
        self.ghost_parent.push(None);
    }

    pub fn push_interior(&mut self, p: Point) {
        self.positions.push(p);
        self.roles.push(NodeRole::Interior);
        self.normals.push(ORIGIN);
        self.corners.push(false);
        self.ghost_parent.push(None);
    }

    pub fn push_ghost(&mut self, p: Point, normal: Point, parent: usize) {
        self.positions.push(p);
        self.roles.push(NodeRole::Ghost);
        self.normals.push(normal);
        self.corners.push(false);
        self.ghost_parent.push(Some(parent));
    }

    pub fn interior_indices(&self) -> Vec<usize> {
        self.indices_with(|r| r == NodeRole::Interior)
    }

    pub fn boundary_indices(&self) -> Vec<usize> {
        self.indices_with(NodeRole::is_boundary)
    }

    pub fn indices_with(&self, pred: impl Fn(NodeRole) -> bool) -> Vec<usize> {
        (0..self.len()).filter(|&i| pred(self.roles[i])).collect()
    }

    pub fn count(&self, role: NodeRole) -> usize {
        self.roles.iter().filter(|&&r| r == role).count()
    }
}
