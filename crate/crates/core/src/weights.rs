//! RBF-FD differentiation weights.
//!
//! For a stencil `x_1..x_n` around center `c`, the weights of an operator `L`
//! solve the augmented system
//!
//! ```text
//! [ A   P ] [ w      ]   [ L phi(|x - x_i|) at c ]
//! [ P^T 0 ] [ lambda ] = [ L p_j at c            ]
//! ```
//!
//! with `A_ij = phi(|x_i - x_j|)` and `P_ij = p_j(x_i)`. Coordinates are
//! shifted to the center and divided by the stencil radius `s`; each operator
//! term of order `|alpha|` is then rescaled by `s^-|alpha|`.

use std::io::Write;

use rayon::prelude::*;

use crate::basis::{monomial_derivative, LinearOperator, MonomialBasis, MultiIndex, RadialKernel};
use crate::error::{config, Error, Result};
use crate::linalg::{condition_estimate_1, DenseLu, DenseMatrix};
use crate::neighbors::Stencil;
use crate::nodegen::NodeSet;
use crate::point::{self, Point};

/// Local systems with a condition estimate above this are rejected.
pub const SINGULARITY_THRESHOLD: f64 = 1e14;

/// Assembled local saddle-point system.
#[derive(Clone, Debug)]
pub struct LocalSystem {
    pub matrix: DenseMatrix,
    /// One right-hand side per requested operator, length `n + M`.
    pub rhs: Vec<Vec<f64>>,
    pub n: usize,
    pub basis_len: usize,
    /// Coordinate scale (stencil radius, or 1 when unscaled).
    pub scale: f64,
}

pub fn assemble_local(
    points: &[Point],
    center: &Point,
    kernel: &RadialKernel,
    m: u32,
    dim: usize,
    ops: &[&LinearOperator],
    scaled: bool,
) -> Result<LocalSystem> {
    let n = points.len();
    let basis = MonomialBasis::new(m, dim);
    let nm = basis.len();
    if n < nm {
        return config(format!(
            "stencil size {n} is below the {nm} monomials of degree {m} in {dim}D"
        ));
    }
    let radius = points.iter().map(|p| point::dist(p, center)).fold(0.0, f64::max);
    let scale = if scaled && radius > 0.0 { radius } else { 1.0 };
    let local: Vec<Point> =
        points.iter().map(|p| point::scale(&point::sub(p, center), 1.0 / scale)).collect();

    let size = n + nm;
    let mut a = DenseMatrix::zeros(size);
    for i in 0..n {
        for j in i..n {
            let v = kernel.value(point::dist(&local[i], &local[j]));
            a.set(i, j, v);
            a.set(j, i, v);
        }
        for (k, &e) in basis.exponents.iter().enumerate() {
            let v = monomial_derivative(e, MultiIndex::ZERO, &local[i]);
            a.set(i, n + k, v);
            a.set(n + k, i, v);
        }
    }

    let mut rhs = Vec::with_capacity(ops.len());
    for op in ops {
        let terms: Vec<(f64, MultiIndex)> = op
            .terms()
            .iter()
            .map(|t| (t.coefficient.at(center) * scale.powi(-(t.alpha.order() as i32)), t.alpha))
            .collect();
        let mut b = vec![0.0; size];
        for i in 0..n {
            let v = point::scale(&local[i], -1.0);
            let mut s = 0.0;
            for &(c, alpha) in &terms {
                if c != 0.0 {
                    s += c * kernel.derivative(alpha, &v)?;
                }
            }
            b[i] = s;
        }
        for (k, &e) in basis.exponents.iter().enumerate() {
            b[n + k] = terms
                .iter()
                .map(|&(c, alpha)| c * monomial_derivative(e, alpha, &point::ORIGIN))
                .sum();
        }
        rhs.push(b);
    }
    Ok(LocalSystem { matrix: a, rhs, n, basis_len: nm, scale })
}

/// 1-norm condition estimate of the full saddle-point matrix.
pub fn condition_estimate(system: &LocalSystem) -> f64 {
    let lu = DenseLu::factor(system.matrix.clone());
    condition_estimate_1(&system.matrix, &lu)
}

/// Weights of several operators on one stencil, sharing the factorization.
/// `node` only labels diagnostics.
pub fn compute_weights_multi(
    points: &[Point],
    center: &Point,
    kernel: &RadialKernel,
    m: u32,
    ops: &[&LinearOperator],
    node: usize,
) -> Result<Vec<Vec<f64>>> {
    let dim = ops.first().map_or(2, |o| o.dim());
    let sys = assemble_local(points, center, kernel, m, dim, ops, true)?;
    let lu = DenseLu::factor(sys.matrix.clone());
    let condition = condition_estimate_1(&sys.matrix, &lu);
    if !(condition <= SINGULARITY_THRESHOLD) {
        return Err(Error::SingularLocal { node, condition });
    }
    Ok(sys
        .rhs
        .iter()
        .map(|b| {
            let mut x = lu.solve(b);
            x.truncate(sys.n);
            x
        })
        .collect())
}

/// Weights `w_i` with `sum_i w_i u(x_i) ~ (L u)(center)`.
pub fn compute_weights(
    stencil_points: &[Point],
    center: &Point,
    kernel: &RadialKernel,
    m: u32,
    op: &LinearOperator,
) -> Result<Vec<f64>> {
    Ok(compute_weights_multi(stencil_points, center, kernel, m, &[op], 0)?.remove(0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightRow {
    pub node: usize,
    pub members: Vec<usize>,
    pub weights: Vec<f64>,
}

impl WeightRow {
    pub fn apply(&self, values: &[f64]) -> f64 {
        self.members.iter().zip(&self.weights).map(|(&j, w)| w * values[j]).sum()
    }
}

/// Sparse differentiation operator, one row per stencil center.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffWeights {
    pub rows: Vec<WeightRow>,
    pub order: u32,
}

impl DiffWeights {
    pub fn row_for(&self, node: usize) -> Option<&WeightRow> {
        self.rows
            .binary_search_by_key(&node, |r| r.node)
            .ok()
            .map(|i| &self.rows[i])
    }

    /// `(node, (L u)_node)` for every row.
    pub fn apply(&self, values: &[f64]) -> Vec<(usize, f64)> {
        self.rows.iter().map(|r| (r.node, r.apply(values))).collect()
    }

    /// Debug dump as `row,col,value` triplets.
    pub fn write_triplets(&self, out: &mut impl Write) -> Result<()> {
        writeln!(out, "row,col,value")?;
        for r in &self.rows {
            for (&c, w) in r.members.iter().zip(&r.weights) {
                writeln!(out, "{},{},{:.16e}", r.node, c, w)?;
            }
        }
        Ok(())
    }
}

/// Weight rows of `op` for every stencil, in stencil order.
pub fn build_diff_matrix(
    nodes: &NodeSet,
    stencils: &[Stencil],
    kernel: &RadialKernel,
    m: u32,
    op: &LinearOperator,
) -> Result<DiffWeights> {
    let rows = build_rows(nodes, stencils, kernel, m, |_| vec![op.clone()])?;
    Ok(DiffWeights {
        rows: rows.into_iter().map(|mut r| r.remove(0)).collect(),
        order: op.order(),
    })
}

/// Computes, for every stencil, the weights of each operator returned by
/// `ops_for(center)`. Result is indexed `[stencil][operator]`. Failures are
/// collected across all stencils.
pub(crate) fn build_rows(
    nodes: &NodeSet,
    stencils: &[Stencil],
    kernel: &RadialKernel,
    m: u32,
    ops_for: impl Fn(usize) -> Vec<LinearOperator> + Sync,
) -> Result<Vec<Vec<WeightRow>>> {
    let results: Vec<Result<Vec<WeightRow>>> = stencils
        .par_iter()
        .map(|s| {
            let pts: Vec<Point> = s.members.iter().map(|&j| nodes.positions[j]).collect();
            let ops = ops_for(s.center);
            let refs: Vec<&LinearOperator> = ops.iter().collect();
            let ws = compute_weights_multi(&pts, &nodes.positions[s.center], kernel, m, &refs, s.center)?;
            Ok(ws
                .into_iter()
                .map(|w| WeightRow { node: s.center, members: s.members.clone(), weights: w })
                .collect())
        })
        .collect();
    let mut failures = Vec::new();
    let mut out = Vec::with_capacity(stencils.len());
    for (s, r) in stencils.iter().zip(results) {
        match r {
            Ok(rows) => out.push(rows),
            Err(e) => failures.push((s.center, e)),
        }
    }
    if !failures.is_empty() {
        return Err(Error::WeightFailures(failures));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::monomial_exponents;

    #[test]
    fn identity_weights_are_kronecker() {
        let pts = vec![[0.1, 0.2, 0.0], [0.3, 0.2, 0.0], [0.1, 0.45, 0.0], [0.0, 0.0, 0.0], [0.2, 0.35, 0.0]];
        for k in ["phs3", "tps4", "gauss:1"] {
            let kernel: RadialKernel = k.parse().unwrap();
            let w = compute_weights(&pts, &pts[0], &kernel, 1, &LinearOperator::identity(2)).unwrap();
            assert!((w[0] - 1.0).abs() < 1e-12);
            assert!(w[1..].iter().all(|v| v.abs() < 1e-12), "{k}: {w:?}");
        }
    }

    #[test]
    fn five_point_cross_laplacian() {
        let h = 0.1;
        let pts = vec![[0.0, 0.0, 0.0], [h, 0.0, 0.0], [-h, 0.0, 0.0], [0.0, h, 0.0], [0.0, -h, 0.0]];
        let w = compute_weights(&pts, &pts[0], &RadialKernel::CUBIC, 1, &LinearOperator::laplacian(2)).unwrap();
        let sum: f64 = w.iter().sum();
        assert!(sum.abs() < 1e-10);
        for k in 2..5 {
            assert!((w[k] - w[1]).abs() < 1e-10 * w[1].abs());
        }
    }

    #[test]
    fn quadratic_exactness_2d() {
        let pts: Vec<Point> = (0..12)
            .map(|i| {
                let a = i as f64 * 2.4;
                let r = 0.01 * (i as f64).sqrt();
                [0.4 + r * a.cos(), 0.3 + r * a.sin(), 0.0]
            })
            .collect();
        let w = compute_weights(&pts, &pts[0], &RadialKernel::CUBIC, 2, &LinearOperator::laplacian(2)).unwrap();
        let lap: f64 = pts.iter().zip(&w).map(|(p, w)| w * (p[0] * p[0] + p[1] * p[1])).sum();
        assert!((lap - 4.0).abs() < 1e-9, "{lap}");
    }

    #[test]
    fn too_small_stencil_is_config_error() {
        let pts = vec![[0.0; 3], [1.0, 0.0, 0.0]];
        let r = compute_weights(&pts, &pts[0], &RadialKernel::CUBIC, 2, &LinearOperator::laplacian(2));
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn duplicated_point_is_singular() {
        let pts = vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0]];
        let sys = assemble_local(&pts, &pts[0], &RadialKernel::CUBIC, 1, 2, &[&LinearOperator::laplacian(2)], true)
            .unwrap();
        assert!(condition_estimate(&sys) > SINGULARITY_THRESHOLD);
        let r = compute_weights(&pts, &pts[0], &RadialKernel::CUBIC, 1, &LinearOperator::laplacian(2));
        assert!(matches!(r, Err(Error::SingularLocal { .. })));
    }

    #[test]
    fn scaling_improves_conditioning() {
        let h = 0.001;
        let pts: Vec<Point> = (0..15)
            .map(|i| {
                let a = i as f64 * 2.4;
                let r = h * (1.0 + (i as f64).sqrt());
                [0.5 + r * a.cos(), 0.5 + r * a.sin(), 0.0]
            })
            .collect();
        let op = LinearOperator::laplacian(2);
        let scaled = assemble_local(&pts, &pts[0], &RadialKernel::CUBIC, 2, 2, &[&op], true).unwrap();
        let raw = assemble_local(&pts, &pts[0], &RadialKernel::CUBIC, 2, 2, &[&op], false).unwrap();
        assert!(condition_estimate(&scaled) < condition_estimate(&raw));
    }

    #[test]
    fn exactness_on_all_basis_monomials_3d() {
        let pts: Vec<Point> = (0..25)
            .map(|i| {
                let t = i as f64;
                [0.1 * (t * 0.7).sin(), 0.1 * (t * 1.3).cos(), 0.1 * (t * 0.37).sin() * (t * 0.11).cos()]
            })
            .collect();
        let op = LinearOperator::laplacian(3);
        let w = compute_weights(&pts, &pts[0], &RadialKernel::Phs { k: 2 }, 2, &op).unwrap();
        for e in monomial_exponents(2, 3) {
            let approx: f64 = pts.iter().zip(&w).map(|(p, w)| w * monomial_derivative(e, MultiIndex::ZERO, p)).sum();
            let exact = op.apply_monomial(e, &pts[0]);
            assert!((approx - exact).abs() <= 1e-8 * exact.abs().max(1.0), "{e:?}");
        }
    }
}
