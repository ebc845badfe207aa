use std::fmt;
use std::str::FromStr;

use super::MultiIndex;
use crate::error::{config, Error, Result};
use crate::point::{self, Point};

/// Radial basis functions `phi(r)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadialKernel {
    /// `r^(2k+1)`
    Phs { k: u32 },
    /// `r^(2k) log r`, zero at `r = 0`
    Tps { k: u32 },
    /// `exp(-(eps r)^2)`
    Gaussian { eps: f64 },
    /// `sqrt(1 + (eps r)^2)`
    Multiquadric { eps: f64 },
    /// `1 / sqrt(1 + (eps r)^2)`
    InverseMultiquadric { eps: f64 },
}

impl RadialKernel {
    pub const CUBIC: RadialKernel = RadialKernel::Phs { k: 1 };

    pub fn validate(&self) -> Result<()> {
        match *self {
            RadialKernel::Phs { k } | RadialKernel::Tps { k } if k == 0 => {
                config("polyharmonic order k must be at least 1")
            }
            RadialKernel::Gaussian { eps }
            | RadialKernel::Multiquadric { eps }
            | RadialKernel::InverseMultiquadric { eps }
                if !(eps > 0.0 && eps.is_finite()) =>
            {
                config("shape parameter must be positive")
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        match *self {
            RadialKernel::Phs { k } => r.powi(2 * k as i32 + 1),
            RadialKernel::Tps { k } => {
                if r == 0.0 {
                    0.0
                } else {
                    r.powi(2 * k as i32) * r.ln()
                }
            }
            RadialKernel::Gaussian { eps } => (-(eps * r).powi(2)).exp(),
            RadialKernel::Multiquadric { eps } => (1.0 + (eps * r).powi(2)).sqrt(),
            RadialKernel::InverseMultiquadric { eps } => 1.0 / (1.0 + (eps * r).powi(2)).sqrt(),
        }
    }

    /// Radial helpers `f1 = phi'(r) / r` and `f2 = (phi'' - phi'/r) / r^2`,
    /// so that `d_i phi = v_i f1` and `d_i d_j phi = delta_ij f1 + v_i v_j f2`.
    /// Only called with `r > 0` for the polyharmonic kinds.
    fn radial_helpers(&self, r: f64) -> (f64, f64) {
        match *self {
            RadialKernel::Phs { k } => {
                let p = 2 * k as i32 + 1;
                let pf = p as f64;
                (pf * r.powi(p - 2), pf * (pf - 2.0) * r.powi(p - 4))
            }
            RadialKernel::Tps { k } => {
                let k = k as i32;
                let kf = k as f64;
                let ln = r.ln();
                (
                    r.powi(2 * k - 2) * (2.0 * kf * ln + 1.0),
                    r.powi(2 * k - 4) * (4.0 * kf * (kf - 1.0) * ln + 4.0 * kf - 2.0),
                )
            }
            RadialKernel::Gaussian { eps } => {
                let e2 = eps * eps;
                let g = (-e2 * r * r).exp();
                (-2.0 * e2 * g, 4.0 * e2 * e2 * g)
            }
            RadialKernel::Multiquadric { eps } => {
                let e2 = eps * eps;
                let phi = (1.0 + e2 * r * r).sqrt();
                (e2 / phi, -e2 * e2 / phi.powi(3))
            }
            RadialKernel::InverseMultiquadric { eps } => {
                let e2 = eps * eps;
                let phi = 1.0 / (1.0 + e2 * r * r).sqrt();
                (-e2 * phi.powi(3), 3.0 * e2 * e2 * phi.powi(5))
            }
        }
    }

    fn polyharmonic(&self) -> bool {
        matches!(self, RadialKernel::Phs { .. } | RadialKernel::Tps { .. })
    }

    /// `D^alpha phi(|x|)` evaluated at displacement `v`, for `|alpha| <= 2`.
    ///
    /// At `v = 0` the polyharmonic kernels return 0 for every derivative. This
    /// is the analytic limit for `r^3`, `r^5` and `r^4 log r`; for `r^2 log r`
    /// the second derivatives diverge and 0 is used by convention.
    pub fn derivative(&self, alpha: MultiIndex, v: &Point) -> Result<f64> {
        let order = alpha.order();
        if order > 2 {
            return Err(Error::Input(format!("derivative order {order} > 2 not supported")));
        }
        let r = point::norm(v);
        if order == 0 {
            return Ok(self.value(r));
        }
        if r == 0.0 && self.polyharmonic() {
            return Ok(0.0);
        }
        let (f1, f2) = if r == 0.0 {
            // smooth kernels: f1(0), f2(0) are finite
            self.radial_helpers(0.0)
        } else {
            self.radial_helpers(r)
        };
        let axes = alpha.axes();
        Ok(match (order, axes) {
            (1, [i, _]) => v[i] * f1,
            (2, [i, j]) if i == j => f1 + v[i] * v[i] * f2,
            (2, [i, j]) => v[i] * v[j] * f2,
            _ => unreachable!(),
        })
    }
}

impl fmt::Display for RadialKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            RadialKernel::Phs { k } => write!(f, "phs{}", 2 * k + 1),
            RadialKernel::Tps { k } => write!(f, "tps{}", 2 * k),
            RadialKernel::Gaussian { eps } => write!(f, "gauss:{eps}"),
            RadialKernel::Multiquadric { eps } => write!(f, "mq:{eps}"),
            RadialKernel::InverseMultiquadric { eps } => write!(f, "imq:{eps}"),
        }
    }
}

impl FromStr for RadialKernel {
    type Err = Error;

    /// Parses `phs3`, `phs5`, ..., `tps2`, `tps4`, ..., `gauss:<eps>`,
    /// `mq:<eps>`, `imq:<eps>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown kernel '{s}'"));
        let eps = |rest: &str| rest.parse::<f64>().map_err(|_| bad());
        let kernel = if let Some(rest) = s.strip_prefix("gauss:") {
            RadialKernel::Gaussian { eps: eps(rest)? }
        } else if let Some(rest) = s.strip_prefix("imq:") {
            RadialKernel::InverseMultiquadric { eps: eps(rest)? }
        } else if let Some(rest) = s.strip_prefix("mq:") {
            RadialKernel::Multiquadric { eps: eps(rest)? }
        } else if let Some(rest) = s.strip_prefix("phs") {
            let p: u32 = rest.parse().map_err(|_| bad())?;
            if p % 2 == 0 || p < 3 {
                return Err(bad());
            }
            RadialKernel::Phs { k: (p - 1) / 2 }
        } else if let Some(rest) = s.strip_prefix("tps") {
            let p: u32 = rest.parse().map_err(|_| bad())?;
            if p % 2 == 1 || p < 2 {
                return Err(bad());
            }
            RadialKernel::Tps { k: p / 2 }
        } else {
            return Err(bad());
        };
        kernel.validate()?;
        Ok(kernel)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const ALL: [&str; 7] = ["phs3", "phs5", "tps2", "tps4", "gauss:1", "mq:1", "imq:1"];

    fn fd_oracle(k: &RadialKernel, alpha: MultiIndex, v: &Point, step: f64) -> f64 {
        let f = |p: &Point| k.value(point::norm(p));
        let axes = alpha.axes();
        let shift = |p: &Point, i: usize, s: f64| {
            let mut q = *p;
            q[i] += s;
            q
        };
        match alpha.order() {
            0 => f(v),
            1 => (f(&shift(v, axes[0], step)) - f(&shift(v, axes[0], -step))) / (2.0 * step),
            _ if axes[0] == axes[1] => {
                let i = axes[0];
                (f(&shift(v, i, step)) - 2.0 * f(v) + f(&shift(v, i, -step))) / (step * step)
            }
            _ => {
                let (i, j) = (axes[0], axes[1]);
                let pp = f(&shift(&shift(v, i, step), j, step));
                let pm = f(&shift(&shift(v, i, step), j, -step));
                let mp = f(&shift(&shift(v, i, -step), j, step));
                let mm = f(&shift(&shift(v, i, -step), j, -step));
                (pp - pm - mp + mm) / (4.0 * step * step)
            }
        }
    }

    fn all_alphas(d: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for o in 0..=2 {
            out.extend(super::super::monomial_exponents(o, d).into_iter().filter(|a| a.order() == o));
        }
        out
    }

    #[test]
    fn values() {
        assert_eq!(RadialKernel::Phs { k: 1 }.value(2.0), 8.0);
        assert_eq!(RadialKernel::Tps { k: 1 }.value(1.0), 0.0);
        assert_eq!(RadialKernel::Tps { k: 1 }.value(0.0), 0.0);
        assert_eq!(RadialKernel::Gaussian { eps: 1.0 }.value(0.0), 1.0);
    }

    #[test]
    fn cubic_laplacian_2d() {
        let k = RadialKernel::CUBIC;
        let v = [0.6, 0.8, 0.0];
        let lap = k.derivative(MultiIndex::new(&[2, 0]), &v).unwrap()
            + k.derivative(MultiIndex::new(&[0, 2]), &v).unwrap();
        assert!((lap - 9.0).abs() < 1e-12);
        // finite-difference cross-check of the same quantity
        let fd = fd_oracle(&k, MultiIndex::new(&[2, 0]), &v, 1e-5)
            + fd_oracle(&k, MultiIndex::new(&[0, 2]), &v, 1e-5);
        assert!((fd - 9.0).abs() < 1e-5);
    }

    #[test]
    fn cubic_vanishes_at_origin() {
        for a in all_alphas(3) {
            assert_eq!(RadialKernel::CUBIC.derivative(a, &[0.0; 3]).unwrap(), 0.0);
        }
    }

    #[test]
    fn gaussian_second_derivative_at_origin() {
        let g = RadialKernel::Gaussian { eps: 1.0 };
        let v = g.derivative(MultiIndex::new(&[2, 0]), &[0.0; 3]).unwrap();
        assert!((v + 2.0).abs() < 1e-15);
        let fd = fd_oracle(&g, MultiIndex::new(&[2, 0]), &[0.0; 3], 1e-4);
        assert!((fd + 2.0).abs() < 1e-6);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for name in ALL {
            let k: RadialKernel = name.parse().unwrap();
            for d in 1..=3 {
                for _ in 0..200 / 3 + 1 {
                    // random direction, radius in [0.1, 2]
                    let mut v = [0.0; 3];
                    for c in v.iter_mut().take(d) {
                        *c = rng.random::<f64>() * 2.0 - 1.0;
                    }
                    let Some(u) = point::normalized(&v) else { continue };
                    let v = point::scale(&u, 0.1 + 1.9 * rng.random::<f64>());
                    for a in all_alphas(d) {
                        let exact = k.derivative(a, &v).unwrap();
                        // second differences at 1e-5 drown in cancellation, so
                        // those use Richardson extrapolation from a wider step
                        let fd = if a.order() == 2 {
                            (4.0 * fd_oracle(&k, a, &v, 1e-3) - fd_oracle(&k, a, &v, 2e-3)) / 3.0
                        } else {
                            fd_oracle(&k, a, &v, 1e-5)
                        };
                        assert!(
                            (exact - fd).abs() <= 1e-6 * exact.abs().max(1.0),
                            "{name} {a:?} at {v:?}: {exact} vs {fd}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn parity_under_reflection() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for name in ALL {
            let k: RadialKernel = name.parse().unwrap();
            for _ in 0..20 {
                let v = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
                for flip in 0..8u8 {
                    let mut w = v;
                    for (ax, c) in w.iter_mut().enumerate() {
                        if flip >> ax & 1 == 1 {
                            *c = -*c;
                        }
                    }
                    for a in all_alphas(3) {
                        let flipped: u32 =
                            (0..3).filter(|&ax| flip >> ax & 1 == 1).map(|ax| a.0[ax] as u32).sum();
                        let sign = if flipped % 2 == 0 { 1.0 } else { -1.0 };
                        let lhs = k.derivative(a, &w).unwrap();
                        let rhs = sign * k.derivative(a, &v).unwrap();
                        assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn parse_roundtrip_and_errors() {
        for name in ALL {
            let k: RadialKernel = name.parse().unwrap();
            assert_eq!(k.to_string(), name);
        }
        assert_eq!("phs5".parse::<RadialKernel>().unwrap(), RadialKernel::Phs { k: 2 });
        assert_eq!("tps4".parse::<RadialKernel>().unwrap(), RadialKernel::Tps { k: 2 });
        for bad in ["phs4", "tps3", "gauss:-1", "gauss:x", "cubic", "phs1"] {
            assert!(bad.parse::<RadialKernel>().is_err(), "{bad}");
        }
    }

    #[test]
    fn third_order_rejected() {
        assert!(RadialKernel::CUBIC.derivative(MultiIndex::new(&[3]), &[1.0, 0.0, 0.0]).is_err());
    }
}
