//! Radial kernels, monomial augmentation bases and linear differential
//! operators.

mod kernel;
mod operator;

pub use kernel::RadialKernel;
pub use operator::{Coefficient, LinearOperator, Term};

use crate::point::Point;

/// Per-axis derivative orders (or monomial exponents), zero-padded to 3 axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex(pub [u8; 3]);

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex([0; 3]);

    pub fn new(orders: &[u8]) -> Self {
        let mut a = [0u8; 3];
        for (dst, src) in a.iter_mut().zip(orders) {
            *dst = *src;
        }
        MultiIndex(a)
    }

    /// First derivative along `axis`.
    pub fn d1(axis: usize) -> Self {
        let mut a = [0u8; 3];
        a[axis] = 1;
        MultiIndex(a)
    }

    /// Second derivative along `i` then `j`.
    pub fn d2(i: usize, j: usize) -> Self {
        let mut a = [0u8; 3];
        a[i] += 1;
        a[j] += 1;
        MultiIndex(a)
    }

    pub fn order(&self) -> u32 {
        self.0.iter().map(|&c| c as u32).sum()
    }

    /// The (at most two) differentiated axes in ascending order; for first
    /// order both entries are equal.
    pub(crate) fn axes(&self) -> [usize; 2] {
        let mut out = [0usize; 2];
        let mut n = 0;
        for (ax, &c) in self.0.iter().enumerate() {
            for _ in 0..c {
                if n < 2 {
                    out[n] = ax;
                }
                n += 1;
            }
        }
        if n == 1 {
            out[1] = out[0];
        }
        out
    }
}

/// Exponents of all monomials of total degree `<= m` in `d` variables,
/// graded by degree, then lexicographically descending.
pub fn monomial_exponents(m: u32, d: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for deg in 0..=m {
        match d {
            1 => out.push(MultiIndex::new(&[deg as u8])),
            2 => {
                for a in (0..=deg).rev() {
                    out.push(MultiIndex::new(&[a as u8, (deg - a) as u8]));
                }
            }
            _ => {
                for a in (0..=deg).rev() {
                    for b in (0..=deg - a).rev() {
                        out.push(MultiIndex::new(&[a as u8, b as u8, (deg - a - b) as u8]));
                    }
                }
            }
        }
    }
    out
}

/// Number of monomials of degree `<= m` in `d` variables, `C(m + d, d)`.
pub fn basis_size(m: u32, d: usize) -> usize {
    let mut c = 1usize;
    for i in 1..=d {
        c = c * (m as usize + i) / i;
    }
    c
}

#[derive(Clone, Debug, PartialEq)]
pub struct MonomialBasis {
    pub m: u32,
    pub d: usize,
    pub exponents: Vec<MultiIndex>,
}

impl MonomialBasis {
    pub fn new(m: u32, d: usize) -> Self {
        MonomialBasis { m, d, exponents: monomial_exponents(m, d) }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }
}

/// `D^alpha x^exponent` at `x`.
pub fn monomial_derivative(exponent: MultiIndex, alpha: MultiIndex, x: &Point) -> f64 {
    let mut v = 1.0;
    for k in 0..3 {
        let e = exponent.0[k];
        let a = alpha.0[k];
        if a > e {
            return 0.0;
        }
        for f in 0..a {
            v *= (e - f) as f64;
        }
        v *= x[k].powi((e - a) as i32);
    }
    v
}
