use crate::basis::{basis_size, RadialKernel};
use crate::error::{config, input, Result};
use crate::neighbors::{stencil_of, SpatialIndex, Stencil};
use crate::nodegen::{NodeRole, NodeSet};
use crate::pde::ProblemSpec;
use crate::weights::build_rows;

/// Stencil inflation over the minimal `C(m_high + d, d)` points.
pub const IMEX_INFLATION: f64 = 1.5;

/// `max(n, ceil(1.5 C(m_high + d, d)))`.
pub fn imex_stencil_size(n: usize, m_high: u32, dim: usize) -> usize {
    n.max((IMEX_INFLATION * basis_size(m_high, dim) as f64).ceil() as usize)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImexReport {
    /// `(node, |L_high u_hat - f|)` for every interior node.
    pub per_node: Vec<(usize, f64)>,
    /// Mean over interior nodes.
    pub average: f64,
}

/// Residual of the computed solution under a higher-order discretisation of
/// the same operator. `nodes` must be the node set the solution lives on
/// (ghosts included); `n` is the stencil size used for the solve.
pub fn imex_indicator(
    problem: &ProblemSpec,
    nodes: &NodeSet,
    u_hat: &[f64],
    kernel: &RadialKernel,
    m_high: u32,
    n: usize,
) -> Result<ImexReport> {
    let n_high = imex_stencil_size(n, m_high, nodes.dim);
    if n_high > nodes.len() {
        return config(format!(
            "IMEX stencils need {n_high} nodes but only {} exist",
            nodes.len()
        ));
    }
    let index = SpatialIndex::build(nodes)?;
    let stencils = nodes
        .interior_indices()
        .into_iter()
        .map(|c| stencil_of(&index, c, n_high))
        .collect::<Result<Vec<_>>>()?;
    imex_from_stencils(problem, nodes, &stencils, u_hat, kernel, m_high)
}

/// IMEX indicator from prepared stencils; non-interior centers are skipped.
pub(crate) fn imex_from_stencils(
    problem: &ProblemSpec,
    nodes: &NodeSet,
    stencils: &[Stencil],
    u_hat: &[f64],
    kernel: &RadialKernel,
    m_high: u32,
) -> Result<ImexReport> {
    if u_hat.len() != nodes.len() {
        return input("solution length differs from node count");
    }
    let interior: Vec<Stencil> =
        stencils.iter().filter(|s| nodes.roles[s.center] == NodeRole::Interior).cloned().collect();
    let rows = build_rows(nodes, &interior, kernel, m_high, |_| vec![problem.operator.clone()])?;
    let per_node: Vec<(usize, f64)> = rows
        .iter()
        .map(|r| {
            let row = &r[0];
            (row.node, (row.apply(u_hat) - (problem.rhs)(&nodes.positions[row.node])).abs())
        })
        .collect();
    let average = if per_node.is_empty() {
        0.0
    } else {
        per_node.iter().map(|p| p.1).sum::<f64>() / per_node.len() as f64
    };
    Ok(ImexReport { per_node, average })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::LinearOperator;
    use crate::geometry::Domain;
    use crate::nodegen::fill_advancing_front;

    #[test]
    fn vanishes_on_polynomials_of_high_degree() {
        let d = Domain::disc([0.5, 0.5], 0.5).unwrap();
        let b = d.discretize_boundary(0.05).unwrap();
        let nodes = fill_advancing_front(&d, &b, 0.05, 2).unwrap();
        // degree 5, Laplacian by hand
        let u = |x: &crate::point::Point| x[0].powi(5) - 2.0 * x[0] * x[0] * x[1].powi(3) + x[1];
        let f = |x: &crate::point::Point| 20.0 * x[0].powi(3) - 4.0 * x[1].powi(3) - 12.0 * x[0] * x[0] * x[1];
        let p = ProblemSpec::dirichlet(d, LinearOperator::laplacian(2), f, u);
        let values: Vec<f64> = nodes.positions.iter().map(u).collect();
        let r = imex_indicator(&p, &nodes, &values, &RadialKernel::CUBIC, 5, 28).unwrap();
        assert_eq!(r.per_node.len(), nodes.interior_indices().len());
        assert!(r.per_node.iter().all(|e| e.1 <= 1e-8), "{}", r.average);
        assert_eq!(imex_stencil_size(28, 5, 2), 32);
        assert_eq!(imex_stencil_size(40, 5, 2), 40);
    }
}
