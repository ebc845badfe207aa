//! Global assembly with Dirichlet, Neumann and Robin boundary conditions,
//! and sparse solvers.

mod solve;
mod sparse;

pub use solve::{bicgstab, solve, SolutionField, SolverKind};
pub use sparse::CsrMatrix;

use std::fmt;
use std::sync::Arc;

use crate::basis::{LinearOperator, RadialKernel};
use crate::error::{config, Error, Result};
use crate::geometry::Domain;
use crate::neighbors::Stencil;
use crate::nodegen::{NodeRole, NodeSet};
use crate::point::{self, Point};
use crate::weights::{build_rows, DiffWeights};

pub type ScalarField = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
pub type RegionPredicate = Arc<dyn Fn(&Point) -> bool + Send + Sync>;

#[derive(Clone)]
pub enum BcKind {
    Dirichlet(ScalarField),
    Neumann(ScalarField),
    /// `u + alpha du/dn = g`.
    Robin { alpha: f64, g: ScalarField },
}

impl BcKind {
    pub fn role(&self) -> NodeRole {
        match self {
            BcKind::Dirichlet(_) => NodeRole::Dirichlet,
            BcKind::Neumann(_) => NodeRole::Neumann,
            BcKind::Robin { .. } => NodeRole::Robin,
        }
    }

    pub fn data(&self, x: &Point) -> f64 {
        match self {
            BcKind::Dirichlet(g) | BcKind::Neumann(g) | BcKind::Robin { g, .. } => g(x),
        }
    }

    /// The boundary operator at a node with the given outward normal.
    fn operator(&self, normal: &Point, dim: usize) -> LinearOperator {
        match self {
            BcKind::Dirichlet(_) => LinearOperator::identity(dim),
            BcKind::Neumann(_) => LinearOperator::normal_derivative(normal, dim),
            BcKind::Robin { alpha, .. } => LinearOperator::robin(*alpha, normal, dim),
        }
    }
}

impl fmt::Debug for BcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BcKind::Dirichlet(_) => write!(f, "Dirichlet"),
            BcKind::Neumann(_) => write!(f, "Neumann"),
            BcKind::Robin { alpha, .. } => write!(f, "Robin(alpha={alpha})"),
        }
    }
}

#[derive(Clone)]
pub struct BcRegion {
    pub predicate: RegionPredicate,
    pub kind: BcKind,
}

impl BcRegion {
    pub fn new(predicate: impl Fn(&Point) -> bool + Send + Sync + 'static, kind: BcKind) -> Self {
        BcRegion { predicate: Arc::new(predicate), kind }
    }

    pub fn everywhere(kind: BcKind) -> Self {
        Self::new(|_| true, kind)
    }
}

/// `L u = f` in the domain with boundary conditions by region. The first
/// region whose predicate accepts a boundary node applies.
#[derive(Clone)]
pub struct ProblemSpec {
    pub domain: Domain,
    pub operator: LinearOperator,
    pub rhs: ScalarField,
    pub bc: Vec<BcRegion>,
}

impl ProblemSpec {
    pub fn new(
        domain: Domain,
        operator: LinearOperator,
        rhs: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        bc: Vec<BcRegion>,
    ) -> Self {
        ProblemSpec { domain, operator, rhs: Arc::new(rhs), bc }
    }

    /// Dirichlet data `g` on the whole boundary.
    pub fn dirichlet(
        domain: Domain,
        operator: LinearOperator,
        rhs: impl Fn(&Point) -> f64 + Send + Sync + 'static,
        g: impl Fn(&Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let bc = vec![BcRegion::everywhere(BcKind::Dirichlet(Arc::new(g)))];
        Self::new(domain, operator, rhs, bc)
    }

    /// Index of the region governing boundary node `i`.
    fn region_of(&self, nodes: &NodeSet, i: usize) -> Result<usize> {
        let x = &nodes.positions[i];
        match self.bc.iter().position(|r| (r.predicate)(x)) {
            Some(k) => Ok(k),
            None => config(format!("boundary node {i} at {:?} is not covered by any condition", &x[..nodes.dim])),
        }
    }
}

/// Assigns boundary roles from the problem's regions. Neumann and Robin
/// conditions are refused at flagged corners.
pub fn apply_boundary_conditions(problem: &ProblemSpec, nodes: &NodeSet) -> Result<NodeSet> {
    let mut out = nodes.clone();
    for i in 0..out.len() {
        if !out.roles[i].is_boundary() {
            continue;
        }
        let kind = &problem.bc[problem.region_of(nodes, i)?].kind;
        let role = kind.role();
        if role != NodeRole::Dirichlet && out.corners[i] {
            return config(format!("only Dirichlet conditions are allowed at corner node {i}"));
        }
        out.roles[i] = role;
    }
    Ok(out)
}

/// Appends one ghost node at `b + h n` for every Neumann and Robin node.
pub fn add_ghosts(nodes: &NodeSet, domain: &Domain) -> NodeSet {
    let mut out = nodes.clone();
    let parents = nodes.indices_with(|r| matches!(r, NodeRole::Neumann | NodeRole::Robin));
    let mut inside = 0;
    for &i in &parents {
        let n = nodes.normals[i];
        let g = point::add(&nodes.positions[i], &point::scale(&n, nodes.h));
        if domain.inside(&g) {
            inside += 1;
        }
        out.push_ghost(g, n, i);
    }
    if inside > 0 {
        out.warnings.push(format!("{inside} ghost nodes lie inside the domain"));
    }
    out
}

/// Roles from the boundary conditions, then ghosts.
pub fn prepare_nodes(problem: &ProblemSpec, nodes: &NodeSet) -> Result<NodeSet> {
    let with_bc = apply_boundary_conditions(problem, nodes)?;
    Ok(add_ghosts(&with_bc, &problem.domain))
}

/// Square sparse system over all nodes (ghosts included).
#[derive(Clone, Debug)]
pub struct GlobalSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Column of each node's unknown.
    pub unknown_index: Vec<usize>,
    /// PDE-operator rows at every stencil center.
    pub operator_weights: DiffWeights,
}

/// Assembles the global system. `nodes` must already carry boundary roles
/// and ghosts (see [`prepare_nodes`]); `stencils` must cover every interior,
/// Neumann and Robin node.
///
/// Row `i` belongs to node `i`: interior rows hold the PDE, Dirichlet rows
/// `u_i = g`, Neumann/Robin rows the boundary operator. The PDE row of a
/// Neumann/Robin node occupies the row of its ghost.
pub fn assemble(
    problem: &ProblemSpec,
    nodes: &NodeSet,
    stencils: &[Stencil],
    kernel: &RadialKernel,
    m: u32,
) -> Result<GlobalSystem> {
    let n = nodes.len();
    let dim = nodes.dim;
    if problem.operator.dim() != dim {
        return config(format!(
            "operator is {}D but the nodes are {dim}D",
            problem.operator.dim()
        ));
    }
    let mut ghost_of = vec![None; n];
    for (g, p) in nodes.ghost_parent.iter().enumerate() {
        if let Some(p) = *p {
            ghost_of[p] = Some(g);
        }
    }
    let mut region = vec![usize::MAX; n];
    for i in 0..n {
        match nodes.roles[i] {
            NodeRole::Interior | NodeRole::Ghost => {}
            NodeRole::Dirichlet => region[i] = problem.region_of(nodes, i)?,
            r @ (NodeRole::Neumann | NodeRole::Robin) => {
                region[i] = problem.region_of(nodes, i)?;
                if problem.bc[region[i]].kind.role() != r {
                    return config(format!("node {i} has role {} but its region says otherwise", r.as_str()));
                }
                if ghost_of[i].is_none() {
                    return config(format!("{} node {i} has no ghost", r.as_str()));
                }
            }
        }
    }

    let ops_for = |c: usize| {
        let mut ops = vec![problem.operator.clone()];
        if matches!(nodes.roles[c], NodeRole::Neumann | NodeRole::Robin) {
            ops.push(problem.bc[region[c]].kind.operator(&nodes.normals[c], dim));
        }
        ops
    };
    let rows = build_rows(nodes, stencils, kernel, m, ops_for)?;

    let mut mat_rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut rhs = vec![0.0; n];
    let mut filled = vec![false; n];
    let mut op_rows = Vec::with_capacity(stencils.len());
    let mut set = |row: usize, entries: Vec<(usize, f64)>, value: f64| -> Result<()> {
        if std::mem::replace(&mut filled[row], true) {
            return Err(Error::Config(format!("row {row} assigned twice")));
        }
        mat_rows[row] = entries;
        rhs[row] = value;
        Ok(())
    };
    for (s, ws) in stencils.iter().zip(rows) {
        let c = s.center;
        let x = &nodes.positions[c];
        let pde: Vec<(usize, f64)> = ws[0].members.iter().copied().zip(ws[0].weights.iter().copied()).collect();
        match nodes.roles[c] {
            NodeRole::Interior => set(c, pde, (problem.rhs)(x))?,
            NodeRole::Neumann | NodeRole::Robin => {
                let bc: Vec<(usize, f64)> =
                    ws[1].members.iter().copied().zip(ws[1].weights.iter().copied()).collect();
                set(c, bc, problem.bc[region[c]].kind.data(x))?;
                set(ghost_of[c].unwrap(), pde, (problem.rhs)(x))?;
            }
            r => return config(format!("{} node {c} must not have a stencil", r.as_str())),
        }
        op_rows.push(ws.into_iter().next().unwrap());
    }
    for i in 0..n {
        if nodes.roles[i] == NodeRole::Dirichlet {
            let g = problem.bc[region[i]].kind.data(&nodes.positions[i]);
            set(i, vec![(i, 1.0)], g)?;
        }
    }
    drop(set);
    if let Some(i) = filled.iter().position(|f| !f) {
        return config(format!("no equation for node {i} ({}); missing stencil", nodes.roles[i].as_str()));
    }
    op_rows.sort_by_key(|r| r.node);
    Ok(GlobalSystem {
        matrix: CsrMatrix::from_rows(n, mat_rows),
        rhs,
        unknown_index: (0..n).collect(),
        operator_weights: DiffWeights { rows: op_rows, order: problem.operator.order() },
    })
}
