use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use serde::{Deserialize, Serialize};

use super::{CsrMatrix, GlobalSystem};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolverKind {
    /// Sparse LU factorization.
    #[serde(rename = "direct", alias = "direct_lu")]
    DirectLu,
    /// BiCGSTAB to relative residual `tol`. `max_iter` defaults to ten times
    /// the system size; `jacobi` scales rows by the inverse diagonal first.
    #[serde(rename = "bicgstab")]
    BiCgStab {
        tol: f64,
        #[serde(default)]
        max_iter: Option<usize>,
        #[serde(default)]
        jacobi: bool,
    },
}

impl SolverKind {
    pub fn tag(&self) -> &'static str {
        match self {
            SolverKind::DirectLu => "direct_lu",
            SolverKind::BiCgStab { .. } => "bicgstab",
        }
    }
}

impl Default for SolverKind {
    fn default() -> Self {
        SolverKind::DirectLu
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolutionField {
    pub values: Vec<f64>,
    /// `||A u - b||_2`, recomputed after the solve.
    pub residual_norm: f64,
    pub solver_used: &'static str,
    pub iterations: Option<usize>,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    a.mul_vec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect()
}

pub fn solve(system: &GlobalSystem, method: &SolverKind) -> Result<SolutionField> {
    let (values, iterations) = match method {
        SolverKind::DirectLu => (sparse_lu(&system.matrix, &system.rhs)?, None),
        SolverKind::BiCgStab { tol, max_iter, jacobi } => {
            let max_iter = max_iter.unwrap_or(10 * system.rhs.len());
            let (x, it) = bicgstab(&system.matrix, &system.rhs, *tol, max_iter, *jacobi)?;
            (x, Some(it))
        }
    };
    let residual_norm = norm2(&residual(&system.matrix, &values, &system.rhs));
    Ok(SolutionField { values, residual_norm, solver_used: method.tag(), iterations })
}

fn sparse_lu(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.nrows;
    let mut trips = Vec::with_capacity(a.nnz());
    for i in 0..n {
        trips.extend(a.row(i).map(|(c, v)| Triplet::new(i, c, v)));
    }
    let m = SparseColMat::<usize, f64>::try_new_from_triplets(n, a.ncols, &trips)
        .map_err(|e| Error::SingularSystem(format!("{e:?}")))?;
    let lu = m.sp_lu().map_err(|e| Error::SingularSystem(format!("{e:?}")))?;
    let rhs = faer::Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
    let x = lu.solve(&rhs);
    let out: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem("non-finite solution from LU".into()));
    }
    Ok(out)
}

/// BiCGSTAB from a zero initial guess. With `jacobi`, iterates on
/// `D^-1 A x = D^-1 b` and measures the residual of that scaled system.
/// Returns the solution and the iteration count.
pub fn bicgstab(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize, jacobi: bool) -> Result<(Vec<f64>, usize)> {
    let n = b.len();
    let scale: Vec<f64> = if jacobi {
        a.diagonal().iter().map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 }).collect()
    } else {
        vec![1.0; n]
    };
    let op = |x: &[f64]| -> Vec<f64> { a.mul_vec(x).iter().zip(&scale).map(|(v, s)| v * s).collect() };
    let b: Vec<f64> = b.iter().zip(&scale).map(|(v, s)| v * s).collect();
    let bnorm = norm2(&b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let mut r = b.clone();
    let r0 = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut rel = 1.0;
    for it in 1..=max_iter {
        let rho_new = dot(&r0, &r);
        if rho_new == 0.0 || !rho_new.is_finite() {
            break;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        v = op(&p);
        let r0v = dot(&r0, &v);
        if r0v == 0.0 {
            break;
        }
        alpha = rho / r0v;
        let s: Vec<f64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        let snorm = norm2(&s);
        if snorm / bnorm <= tol {
            for i in 0..n {
                x[i] += alpha * p[i];
            }
            return Ok((x, it));
        }
        let t = op(&s);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            break;
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * p[i] + omega * s[i];
            r[i] = s[i] - omega * t[i];
        }
        rel = norm2(&r) / bnorm;
        if rel <= tol {
            return Ok((x, it));
        }
        if omega == 0.0 || !rel.is_finite() {
            break;
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, residual: rel })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::DiffWeights;

    fn system(matrix: CsrMatrix, rhs: Vec<f64>) -> GlobalSystem {
        let n = rhs.len();
        GlobalSystem {
            matrix,
            rhs,
            unknown_index: (0..n).collect(),
            operator_weights: DiffWeights { rows: vec![], order: 0 },
        }
    }

    #[test]
    fn identity_returns_rhs() {
        let s = system(CsrMatrix::identity(4), vec![1.0, -2.0, 3.5, 0.0]);
        for m in [SolverKind::DirectLu, SolverKind::BiCgStab { tol: 1e-12, max_iter: None, jacobi: false }] {
            let sol = solve(&s, &m).unwrap();
            assert_eq!(sol.values, s.rhs);
            assert_eq!(sol.residual_norm, 0.0);
        }
    }

    #[test]
    fn nonsymmetric_tridiagonal() {
        let n = 50;
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![(i, 4.0 + i as f64 * 0.01)];
                if i > 0 {
                    r.push((i - 1, -1.5));
                }
                if i + 1 < n {
                    r.push((i + 1, -0.7));
                }
                r
            })
            .collect();
        let a = CsrMatrix::from_rows(n, rows);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let s = system(a, b);
        let lu = solve(&s, &SolverKind::DirectLu).unwrap();
        let it = solve(&s, &SolverKind::BiCgStab { tol: 1e-13, max_iter: None, jacobi: true }).unwrap();
        for (x, y) in lu.values.iter().zip(&it.values) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!(lu.residual_norm < 1e-12);
    }

    #[test]
    fn singular_and_stalled() {
        let a = CsrMatrix::from_rows(2, vec![vec![(0, 1.0), (1, 1.0)], vec![(0, 1.0), (1, 1.0)]]);
        let s = system(a, vec![1.0, 2.0]);
        assert!(matches!(solve(&s, &SolverKind::DirectLu), Err(Error::SingularSystem(_))));
        let r = solve(&s, &SolverKind::BiCgStab { tol: 1e-12, max_iter: Some(20), jacobi: false });
        assert!(matches!(r, Err(Error::NoConvergence { .. })));
    }
}
