//! Analytic solutions with hand-coded first and second derivatives.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use crate::basis::{LinearOperator, MultiIndex};
use crate::error::{config, Result};
use crate::nodegen::halton;
use crate::pde::ScalarField;
use crate::point::Point;

type Hessian = [[f64; 3]; 3];

/// An analytic solution `u` with its gradient and Hessian, from which the
/// right-hand side of any registry operator follows.
#[derive(Clone, Copy)]
pub struct Solution {
    pub id: &'static str,
    pub dim: usize,
    value: fn(&Point) -> f64,
    gradient: fn(&Point) -> Point,
    hessian: fn(&Point) -> Hessian,
}

impl std::fmt::Debug for Solution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Solution({}, {}D)", self.id, self.dim)
    }
}

impl Solution {
    pub fn value(&self, x: &Point) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &Point) -> Point {
        (self.gradient)(x)
    }

    /// `D^alpha u` for `|alpha| <= 2`.
    pub fn derivative(&self, alpha: MultiIndex, x: &Point) -> f64 {
        match alpha.order() {
            0 => self.value(x),
            1 => self.gradient(x)[alpha.axes()[0]],
            2 => {
                let [i, j] = alpha.axes();
                (self.hessian)(x)[i][j]
            }
            _ => f64::NAN,
        }
    }

    /// `(L u)(x)`.
    pub fn apply(&self, op: &LinearOperator, x: &Point) -> f64 {
        let h = (self.hessian)(x);
        let g = self.gradient(x);
        let u = self.value(x);
        op.apply(x, |a| match a.order() {
            0 => u,
            1 => g[a.axes()[0]],
            _ => {
                let [i, j] = a.axes();
                h[i][j]
            }
        })
    }

    pub fn field(&self) -> ScalarField {
        let s = *self;
        Arc::new(move |x| s.value(x))
    }

    pub fn rhs_field(&self, op: &LinearOperator) -> ScalarField {
        let s = *self;
        let op = op.clone();
        Arc::new(move |x| s.apply(&op, x))
    }

    /// Largest deviation of the closed-form `L u` from central differences
    /// (step `step`) at `points`, relative to `max(1, |L u|)`.
    pub fn finite_difference_mismatch(&self, op: &LinearOperator, points: &[Point], step: f64) -> f64 {
        let e = |k: usize| {
            let mut v = [0.0; 3];
            v[k] = step;
            v
        };
        let shift = |x: &Point, a: &Point, s: f64| [x[0] + s * a[0], x[1] + s * a[1], x[2] + s * a[2]];
        let u = |x: &Point| self.value(x);
        let mut worst = 0.0f64;
        for x in points {
            let fd = op.apply(x, |a| match a.order() {
                0 => u(x),
                1 => {
                    let k = a.axes()[0];
                    (u(&shift(x, &e(k), 1.0)) - u(&shift(x, &e(k), -1.0))) / (2.0 * step)
                }
                _ => {
                    let [i, j] = a.axes();
                    if i == j {
                        (u(&shift(x, &e(i), 1.0)) - 2.0 * u(x) + u(&shift(x, &e(i), -1.0))) / (step * step)
                    } else {
                        let (ei, ej) = (e(i), e(j));
                        let pp = shift(&shift(x, &ei, 1.0), &ej, 1.0);
                        let pm = shift(&shift(x, &ei, 1.0), &ej, -1.0);
                        let mp = shift(&shift(x, &ei, -1.0), &ej, 1.0);
                        let mm = shift(&shift(x, &ei, -1.0), &ej, -1.0);
                        (u(&pp) - u(&pm) - u(&mp) + u(&mm)) / (4.0 * step * step)
                    }
                }
            });
            let exact = self.apply(op, x);
            worst = worst.max((fd - exact).abs() / exact.abs().max(1.0));
        }
        worst
    }
}

fn diag(a: f64, b: f64, c: f64) -> Hessian {
    [[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]]
}

fn sin1(x: &Point) -> f64 {
    (PI * x[0]).sin()
}

fn sin2(x: &Point) -> f64 {
    (PI * x[0]).sin() * (PI * x[1]).sin()
}

fn sin3(x: &Point) -> f64 {
    (PI * x[0]).sin() * (PI * x[1]).sin() * (PI * x[2]).sin()
}

/// Gradient and Hessian of `prod_k sin(pi x_k)` over the first `d` axes.
fn sin_derivs(x: &Point, d: usize) -> (Point, Hessian) {
    let s: Vec<f64> = (0..d).map(|k| (PI * x[k]).sin()).collect();
    let c: Vec<f64> = (0..d).map(|k| PI * (PI * x[k]).cos()).collect();
    let prod_except = |skip: &[usize]| -> f64 { (0..d).filter(|k| !skip.contains(k)).map(|k| s[k]).product() };
    let mut g = [0.0; 3];
    let mut h = [[0.0; 3]; 3];
    for i in 0..d {
        g[i] = c[i] * prod_except(&[i]);
        for j in 0..d {
            h[i][j] = if i == j {
                -PI * PI * prod_except(&[])
            } else {
                c[i] * c[j] * prod_except(&[i, j])
            };
        }
    }
    (g, h)
}

fn franke_terms(x: &Point) -> [(f64, f64, f64, f64, f64); 4] {
    // (T, gx, gxx, ky, kyy) for each term c exp(g(x) + k(y))
    let (a, b) = (9.0 * x[0], 9.0 * x[1]);
    let t1 = 0.75 * (-((a - 2.0).powi(2) + (b - 2.0).powi(2)) / 4.0).exp();
    let t2 = 0.75 * (-(a + 1.0).powi(2) / 49.0 - (b + 1.0) / 10.0).exp();
    let t3 = 0.5 * (-((a - 7.0).powi(2) + (b - 3.0).powi(2)) / 4.0).exp();
    let t4 = -0.2 * (-(a - 4.0).powi(2) - (b - 7.0).powi(2)).exp();
    [
        (t1, -4.5 * (a - 2.0), -40.5, -4.5 * (b - 2.0), -40.5),
        (t2, -18.0 * (a + 1.0) / 49.0, -162.0 / 49.0, -0.9, 0.0),
        (t3, -4.5 * (a - 7.0), -40.5, -4.5 * (b - 3.0), -40.5),
        (t4, -18.0 * (a - 4.0), -162.0, -18.0 * (b - 7.0), -162.0),
    ]
}

fn franke(x: &Point) -> f64 {
    franke_terms(x).iter().map(|t| t.0).sum()
}

fn franke_grad(x: &Point) -> Point {
    franke_terms(x).iter().fold([0.0; 3], |g, &(t, gx, _, ky, _)| [g[0] + gx * t, g[1] + ky * t, 0.0])
}

fn franke_hess(x: &Point) -> Hessian {
    let mut h = [[0.0; 3]; 3];
    for &(t, gx, gxx, ky, kyy) in &franke_terms(x) {
        h[0][0] += (gxx + gx * gx) * t;
        h[1][1] += (kyy + ky * ky) * t;
        h[0][1] += gx * ky * t;
    }
    h[1][0] = h[0][1];
    h
}

fn asinh_parts(x: &Point) -> (f64, f64) {
    let s = x[0] + 2.0 * x[1];
    let q = 1.0 / (1.0 + s * s).sqrt();
    (s, q)
}

/// Every registered solution. `sin` is registered once per dimension.
pub fn registry_solutions() -> Vec<Solution> {
    let mut out = vec![
        Solution {
            id: "sin",
            dim: 1,
            value: sin1,
            gradient: |x| [PI * (PI * x[0]).cos(), 0.0, 0.0],
            hessian: |x| diag(-PI * PI * sin1(x), 0.0, 0.0),
        },
        Solution {
            id: "sin",
            dim: 2,
            value: sin2,
            gradient: |x| sin_derivs(x, 2).0,
            hessian: |x| sin_derivs(x, 2).1,
        },
        Solution {
            id: "sin",
            dim: 3,
            value: sin3,
            gradient: |x| sin_derivs(x, 3).0,
            hessian: |x| sin_derivs(x, 3).1,
        },
        Solution {
            id: "u1",
            dim: 2,
            value: |x| x[0].powi(4) * x[1].powi(5),
            gradient: |x| [4.0 * x[0].powi(3) * x[1].powi(5), 5.0 * x[0].powi(4) * x[1].powi(4), 0.0],
            hessian: |x| {
                let xy = 20.0 * x[0].powi(3) * x[1].powi(4);
                [
                    [12.0 * x[0].powi(2) * x[1].powi(5), xy, 0.0],
                    [xy, 20.0 * x[0].powi(4) * x[1].powi(3), 0.0],
                    [0.0; 3],
                ]
            },
        },
        Solution {
            id: "u2",
            dim: 2,
            value: |x| 1.0 + (4.0 * x[0]).sin() + (3.0 * x[0]).cos() + (2.0 * x[1]).sin(),
            gradient: |x| [4.0 * (4.0 * x[0]).cos() - 3.0 * (3.0 * x[0]).sin(), 2.0 * (2.0 * x[1]).cos(), 0.0],
            hessian: |x| {
                diag(-16.0 * (4.0 * x[0]).sin() - 9.0 * (3.0 * x[0]).cos(), -4.0 * (2.0 * x[1]).sin(), 0.0)
            },
        },
        Solution {
            id: "u3",
            dim: 2,
            value: |x| (x[0] * x[0]).exp(),
            gradient: |x| [2.0 * x[0] * (x[0] * x[0]).exp(), 0.0, 0.0],
            hessian: |x| diag((2.0 + 4.0 * x[0] * x[0]) * (x[0] * x[0]).exp(), 0.0, 0.0),
        },
        Solution {
            id: "u4",
            dim: 2,
            value: |x| (x[0] + 2.0 * x[1]).asinh(),
            gradient: |x| {
                let (_, q) = asinh_parts(x);
                [q, 2.0 * q, 0.0]
            },
            hessian: |x| {
                let (s, q) = asinh_parts(x);
                let d = -s * q * q * q;
                [[d, 2.0 * d, 0.0], [2.0 * d, 4.0 * d, 0.0], [0.0; 3]]
            },
        },
        Solution {
            id: "u5",
            dim: 2,
            value: |x| (PI * x[0]).cos() * (PI * x[1]).cos(),
            gradient: |x| {
                let (cx, cy, sx, sy) = ((PI * x[0]).cos(), (PI * x[1]).cos(), (PI * x[0]).sin(), (PI * x[1]).sin());
                [-PI * sx * cy, -PI * cx * sy, 0.0]
            },
            hessian: |x| {
                let (cx, cy, sx, sy) = ((PI * x[0]).cos(), (PI * x[1]).cos(), (PI * x[0]).sin(), (PI * x[1]).sin());
                let xy = PI * PI * sx * sy;
                [[-PI * PI * cx * cy, xy, 0.0], [xy, -PI * PI * cx * cy, 0.0], [0.0; 3]]
            },
        },
        Solution { id: "u6", dim: 2, value: franke, gradient: franke_grad, hessian: franke_hess },
        Solution { id: "saddle", dim: 2, value: |x| x[0] * x[0] - x[1] * x[1], gradient: |x| [2.0 * x[0], -2.0 * x[1], 0.0], hessian: |_| diag(2.0, -2.0, 0.0) },
        Solution { id: "saddle", dim: 3, value: |x| x[0] * x[0] - x[1] * x[1], gradient: |x| [2.0 * x[0], -2.0 * x[1], 0.0], hessian: |_| diag(2.0, -2.0, 0.0) },
    ];
    for dim in 1..=3 {
        out.push(Solution { id: "const", dim, value: |_| 1.0, gradient: |_| [0.0; 3], hessian: |_| [[0.0; 3]; 3] });
        out.push(Solution { id: "linear", dim, value: |x| x[0], gradient: |_| [1.0, 0.0, 0.0], hessian: |_| [[0.0; 3]; 3] });
    }
    out
}

/// Ids accepted by [`solution`]; `franke` aliases `u6`.
pub const SOLUTION_IDS: [&str; 10] = ["sin", "u1", "u2", "u3", "u4", "u5", "u6", "const", "linear", "saddle"];

pub fn solution(id: &str, dim: usize) -> Result<Solution> {
    let id = if id == "franke" { "u6" } else { id };
    match registry_solutions().into_iter().find(|s| s.id == id && s.dim == dim) {
        Some(s) => Ok(s),
        None => config(format!("no solution '{id}' in {dim}D (known: {})", SOLUTION_IDS.join(", "))),
    }
}

/// Relative tolerance of the finite-difference check on every closed-form
/// right-hand side.
pub const FD_TOLERANCE: f64 = 1e-5;

/// 100 quasi-random points of the unit box, kept 0.1 away from its faces.
pub fn probe_points(dim: usize) -> Vec<Point> {
    (1..=100)
        .map(|i| {
            let h = halton(i, dim);
            let mut p = [0.0; 3];
            for k in 0..dim {
                p[k] = 0.1 + 0.8 * h[k];
            }
            p
        })
        .collect()
}

/// Compares every hand-coded `L u` (all registry operators of the
/// solution's dimension, plus first derivatives) with central differences.
/// Second-order terms use step 1e-4, first-order terms 1e-5.
pub fn check_solution(s: &Solution) -> Result<()> {
    let pts = probe_points(s.dim);
    let mut ops = vec![LinearOperator::laplacian(s.dim), LinearOperator::identity(s.dim)];
    if s.dim == 2 {
        for name in ["L1", "L2", "L3", "L4", "L5"] {
            ops.push(LinearOperator::named(name, 2)?);
        }
    }
    for k in 0..s.dim {
        let mut n = [0.0; 3];
        n[k] = 1.0;
        ops.push(LinearOperator::normal_derivative(&n, s.dim));
    }
    for op in &ops {
        let step = if op.order() == 2 { 1e-4 } else { 1e-5 };
        let err = s.finite_difference_mismatch(op, &pts, step);
        if !(err < FD_TOLERANCE) {
            return config(format!("solution {} ({}D) fails the finite-difference check for {}: {err:e}", s.id, s.dim, op.name()));
        }
    }
    Ok(())
}

/// Runs [`check_solution`] on the whole registry once per process.
pub fn validate_registry() -> Result<()> {
    static CHECKED: OnceLock<std::result::Result<(), String>> = OnceLock::new();
    CHECKED
        .get_or_init(|| registry_solutions().iter().try_for_each(check_solution).map_err(|e| e.to_string()))
        .clone()
        .map_err(crate::error::Error::Config)
}

#[cfg(test)]
mod tests {
    use super::*;
    #[test]
    fn closed_forms_match_finite_differences() {
        for s in registry_solutions() {
            check_solution(&s).unwrap();
        }
        validate_registry().unwrap();
    }

    #[test]
    fn table_values() {
        let u1 = solution("u1", 2).unwrap();
        let x = [0.3, 0.7, 0.0];
        let lap = LinearOperator::laplacian(2);
        let want = 12.0 * 0.09 * 0.7f64.powi(5) + 20.0 * 0.3f64.powi(4) * 0.7f64.powi(3);
        assert!((u1.apply(&lap, &x) - want).abs() < 1e-14);
        let u5 = solution("u5", 2).unwrap();
        assert!(u5.value(&[0.5, 0.5, 0.0]).abs() < 1e-15);
        let s = solution("sin", 2).unwrap();
        let f = s.apply(&lap, &x);
        assert!((f + 2.0 * PI * PI * s.value(&x)).abs() < 1e-12);
        assert!(solution("u1", 3).is_err());
        assert!(solution("nope", 2).is_err());
        assert_eq!(solution("franke", 2).unwrap().id, "u6");
    }
}
