use std::fmt;
use std::sync::Arc;

use super::{monomial_derivative, MultiIndex};
use crate::error::{config, Result};
use crate::point::Point;

/// Term coefficient: constant, or a function of the physical position.
#[derive(Clone)]
pub enum Coefficient {
    Const(f64),
    Func(Arc<dyn Fn(&Point) -> f64 + Send + Sync>),
}

impl Coefficient {
    pub fn at(&self, x: &Point) -> f64 {
        match self {
            Coefficient::Const(c) => *c,
            Coefficient::Func(f) => f(x),
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Coefficient::Const(_))
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Const(c) => write!(f, "{c}"),
            Coefficient::Func(_) => write!(f, "c(x)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Term {
    pub coefficient: Coefficient,
    pub alpha: MultiIndex,
}

/// `L = sum_t c_t(x) D^alpha_t`.
#[derive(Clone, Debug)]
pub struct LinearOperator {
    name: String,
    dim: usize,
    terms: Vec<Term>,
}

impl LinearOperator {
    pub fn new(name: impl Into<String>, dim: usize, terms: Vec<Term>) -> Result<Self> {
        if terms.is_empty() {
            return config("operator needs at least one term");
        }
        if let Some(t) = terms.iter().find(|t| t.alpha.order() > 2) {
            return config(format!("derivative order {} is not supported", t.alpha.order()));
        }
        if let Some(t) = terms.iter().find(|t| t.alpha.0[dim..].iter().any(|&c| c > 0)) {
            return config(format!("term {:?} differentiates beyond dimension {dim}", t.alpha));
        }
        Ok(LinearOperator { name: name.into(), dim, terms })
    }

    fn constant(name: &str, dim: usize, terms: &[(f64, MultiIndex)]) -> Self {
        let terms = terms
            .iter()
            .map(|&(c, alpha)| Term { coefficient: Coefficient::Const(c), alpha })
            .collect();
        LinearOperator { name: name.to_string(), dim, terms }
    }

    pub fn identity(dim: usize) -> Self {
        Self::constant("identity", dim, &[(1.0, MultiIndex::ZERO)])
    }

    pub fn laplacian(dim: usize) -> Self {
        let terms: Vec<_> = (0..dim).map(|i| (1.0, MultiIndex::d2(i, i))).collect();
        Self::constant("laplacian", dim, &terms)
    }

    /// `n . grad`.
    pub fn normal_derivative(normal: &Point, dim: usize) -> Self {
        let terms: Vec<_> = (0..dim).map(|i| (normal[i], MultiIndex::d1(i))).collect();
        Self::constant("normal_derivative", dim, &terms)
    }

    /// `I + alpha n . grad`.
    pub fn robin(alpha: f64, normal: &Point, dim: usize) -> Self {
        let mut terms = vec![(1.0, MultiIndex::ZERO)];
        terms.extend((0..dim).map(|i| (alpha * normal[i], MultiIndex::d1(i))));
        Self::constant("robin", dim, &terms)
    }

    /// Operators addressable by name: `laplacian`, `identity`, and the
    /// planar `L1`..`L5`.
    pub fn named(name: &str, dim: usize) -> Result<Self> {
        let lap2 = [(1.0, MultiIndex::d2(0, 0)), (1.0, MultiIndex::d2(1, 1))];
        let planar = |terms: &[(f64, MultiIndex)]| {
            if dim != 2 {
                config(format!("operator {name} is only defined in 2D"))
            } else {
                Ok(Self::constant(name, 2, terms))
            }
        };
        match name {
            "laplacian" => Ok(Self::laplacian(dim)),
            "identity" => Ok(Self::identity(dim)),
            "L1" => planar(&[lap2[0], lap2[1], (1.0, MultiIndex::d2(0, 1))]),
            "L2" => planar(&[lap2[0], lap2[1], (1.0, MultiIndex::d1(0)), (1.0, MultiIndex::d1(1))]),
            "L3" => {
                if dim != 2 {
                    return config("operator L3 is only defined in 2D");
                }
                Self::new(
                    "L3",
                    2,
                    vec![
                        Term { coefficient: Coefficient::Func(Arc::new(|x: &Point| x[0])), alpha: MultiIndex::d2(0, 0) },
                        Term {
                            coefficient: Coefficient::Func(Arc::new(|x: &Point| x[1] * x[1])),
                            alpha: MultiIndex::d2(1, 1),
                        },
                    ],
                )
            }
            "L4" => planar(&[lap2[0], lap2[1], (1.0, MultiIndex::ZERO)]),
            "L5" => planar(&[lap2[0], lap2[1], (10.0, MultiIndex::ZERO)]),
            other => config(format!("unknown operator '{other}'")),
        }
    }

    pub const NAMES: [&'static str; 7] = ["laplacian", "identity", "L1", "L2", "L3", "L4", "L5"];

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Highest derivative order over all terms.
    pub fn order(&self) -> u32 {
        self.terms.iter().map(|t| t.alpha.order()).max().unwrap_or(0)
    }

    pub fn has_constant_coefficients(&self) -> bool {
        self.terms.iter().all(|t| t.coefficient.is_const())
    }

    /// Whether any term is a zeroth-order (identity) term.
    pub fn has_identity_term(&self) -> bool {
        self.terms.iter().any(|t| t.alpha.order() == 0)
    }

    /// `(L u)(x)` given the partial derivatives of `u` at `x`.
    pub fn apply(&self, x: &Point, derivative: impl Fn(MultiIndex) -> f64) -> f64 {
        self.terms.iter().map(|t| t.coefficient.at(x) * derivative(t.alpha)).sum()
    }

    /// `(L x^exponent)(x)`.
    pub fn apply_monomial(&self, exponent: MultiIndex, x: &Point) -> f64 {
        self.apply(x, |alpha| monomial_derivative(exponent, alpha, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn laplacian_terms() {
        let l = LinearOperator::named("laplacian", 2).unwrap();
        assert_eq!(l.order(), 2);
        let alphas: Vec<_> = l.terms().iter().map(|t| t.alpha).collect();
        assert_eq!(alphas, vec![MultiIndex::new(&[2, 0]), MultiIndex::new(&[0, 2])]);
        assert!(l.terms().iter().all(|t| t.coefficient.at(&[0.0; 3]) == 1.0));
    }

    #[test]
    fn l3_on_x_squared() {
        let l = LinearOperator::named("L3", 2).unwrap();
        let v = l.apply_monomial(MultiIndex::new(&[2, 0]), &[0.5, 0.3, 0.0]);
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn l5_on_sine_product() {
        let l = LinearOperator::named("L5", 2).unwrap();
        let x = [0.23, 0.71, 0.0];
        let u = (PI * x[0]).sin() * (PI * x[1]).sin();
        let d = |a: MultiIndex| match a.0 {
            [0, 0, 0] => u,
            [2, 0, 0] | [0, 2, 0] => -PI * PI * u,
            _ => panic!("unexpected derivative"),
        };
        let got = l.apply(&x, d);
        assert!((got - (-2.0 * PI * PI * u + 10.0 * u)).abs() < 1e-12);
    }

    #[test]
    fn unknown_and_dimension_errors() {
        assert!(LinearOperator::named("L7", 2).is_err());
        assert!(LinearOperator::named("L1", 3).is_err());
        assert!(LinearOperator::named("L3", 1).is_err());
        assert!(LinearOperator::new("x", 2, vec![]).is_err());
    }

    #[test]
    fn linearity_on_monomial_sums() {
        let x = [0.37, 0.81, 0.0];
        let exps = super::super::monomial_exponents(4, 2);
        for name in ["laplacian", "L1", "L2", "L3", "L4", "L5"] {
            let l = LinearOperator::named(name, 2).unwrap();
            let sum_of_apps: f64 = exps.iter().map(|&e| l.apply_monomial(e, &x)).sum();
            let app_of_sum = l.apply(&x, |a| {
                exps.iter().map(|&e| monomial_derivative(e, a, &x)).sum()
            });
            assert!((sum_of_apps - app_of_sum).abs() < 1e-12);
        }
    }

    #[test]
    fn normal_and_robin() {
        let n = [0.6, 0.8, 0.0];
        let dn = LinearOperator::normal_derivative(&n, 2);
        // u = 2x + 3y
        let d = |a: MultiIndex| match a.0 {
            [1, 0, 0] => 2.0,
            [0, 1, 0] => 3.0,
            _ => 0.0,
        };
        assert!((dn.apply(&[0.0; 3], d) - 3.6).abs() < 1e-15);
        let r = LinearOperator::robin(2.0, &n, 2);
        let d0 = |a: MultiIndex| if a == MultiIndex::ZERO { 1.5 } else { d(a) };
        assert!((r.apply(&[0.0; 3], d0) - (1.5 + 7.2)).abs() < 1e-12);
    }
}
