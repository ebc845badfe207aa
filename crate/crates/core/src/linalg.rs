//! Small dense LU with partial pivoting and a Hager/Higham 1-norm condition
//! estimate. Sized for local RBF-FD systems (a few hundred unknowns at most).

/// Row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// `P A = L U` factors; `L` has a unit diagonal and shares storage with `U`.
#[derive(Clone, Debug)]
pub struct DenseLu {
    lu: DenseMatrix,
    perm: Vec<usize>,
    singular: bool,
}

impl DenseLu {
    pub fn factor(mut a: DenseMatrix) -> Self {
        let n = a.n;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut singular = false;
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, a.get(i, k).abs()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == 0.0 || !pmax.is_finite() {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = a.get(k, k);
            for i in k + 1..n {
                let f = a.get(i, k) / pivot;
                a.set(i, k, f);
                if f != 0.0 {
                    let (upper, lower) = a.data.split_at_mut(i * n);
                    let krow = &upper[k * n + k + 1..k * n + n];
                    let irow = &mut lower[k + 1..n];
                    for (x, y) in irow.iter_mut().zip(krow) {
                        *x -= f * y;
                    }
                }
            }
        }
        DenseLu { lu: a, perm, singular }
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu.data[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(a, b)| a * b).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu.data[i * n + i + 1..(i + 1) * n];
            let s: f64 = row.iter().zip(&x[i + 1..]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - s) / self.lu.get(i, i);
        }
        x
    }

    /// Solves `A^T x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.n;
        // U^T w = b
        let mut w = b.to_vec();
        for i in 0..n {
            let mut s = w[i];
            for k in 0..i {
                s -= self.lu.get(k, i) * w[k];
            }
            w[i] = s / self.lu.get(i, i);
        }
        // L^T v = w
        for i in (0..n).rev() {
            let mut s = w[i];
            for k in i + 1..n {
                s -= self.lu.get(k, i) * w[k];
            }
            w[i] = s;
        }
        let mut x = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = w[k];
        }
        x
    }

    /// Estimate of `||A^-1||_1` (Hager's method with Higham's safeguards).
    pub fn inverse_norm1_estimate(&self) -> f64 {
        let n = self.lu.n;
        if self.singular {
            return f64::INFINITY;
        }
        if n == 0 {
            return 0.0;
        }
        let mut x = vec![1.0 / n as f64; n];
        let mut est = 0.0;
        let mut last_j = usize::MAX;
        for _ in 0..5 {
            let y = self.solve(&x);
            let new_est: f64 = y.iter().map(|v| v.abs()).sum();
            if !new_est.is_finite() {
                return f64::INFINITY;
            }
            if new_est <= est {
                break;
            }
            est = new_est;
            let xi: Vec<f64> = y.iter().map(|&v| if v >= 0.0 { 1.0 } else { -1.0 }).collect();
            let z = self.solve_transpose(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.abs()))
                .fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if zmax <= ztx || j == last_j {
                break;
            }
            last_j = j;
            x = vec![0.0; n];
            x[j] = 1.0;
        }
        // Higham's alternating-sign vector guards against underestimation.
        let alt: Vec<f64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                s * (1.0 + i as f64 / (n as f64 - 1.0).max(1.0))
            })
            .collect();
        let y = self.solve(&alt);
        let alt_est = 2.0 * y.iter().map(|v| v.abs()).sum::<f64>() / (3.0 * n as f64);
        est.max(alt_est)
    }
}

/// 1-norm condition estimate `||A||_1 * est(||A^-1||_1)`.
pub fn condition_estimate_1(a: &DenseMatrix, lu: &DenseLu) -> f64 {
    a.norm1() * lu.inverse_norm1_estimate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                a.set(i, j, rng.random::<f64>() - 0.5);
            }
        }
        a
    }

    /// Exact 1-norm of the inverse via n solves.
    fn exact_inverse_norm(lu: &DenseLu, n: usize) -> f64 {
        (0..n)
            .map(|j| {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                lu.solve(&e).iter().map(|v| v.abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn solves_and_transposes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 2, 5, 40] {
            let a = random(n, &mut rng);
            let lu = DenseLu::factor(a.clone());
            let b: Vec<f64> = (0..n).map(|i| i as f64 - 1.0).collect();
            let x = lu.solve(&b);
            let r = a.mul_vec(&x);
            for (ri, bi) in r.iter().zip(&b) {
                assert!((ri - bi).abs() < 1e-10);
            }
            let xt = lu.solve_transpose(&b);
            for i in 0..n {
                let s: f64 = (0..n).map(|k| a.get(k, i) * xt[k]).sum();
                assert!((s - b[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn estimate_is_close_to_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [3, 10, 30] {
            let a = random(n, &mut rng);
            let lu = DenseLu::factor(a.clone());
            let exact = exact_inverse_norm(&lu, n);
            let est = lu.inverse_norm1_estimate();
            assert!(est <= exact * (1.0 + 1e-12) && est >= exact / 3.0, "{est} vs {exact}");
        }
    }

    #[test]
    fn identity_condition_is_one() {
        let mut a = DenseMatrix::zeros(1);
        a.set(0, 0, 1.0);
        let lu = DenseLu::factor(a.clone());
        assert!((condition_estimate_1(&a, &lu) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn singular_detected() {
        let mut a = DenseMatrix::zeros(2);
        a.set(0, 0, 1.0);
        a.set(0, 1, 2.0);
        a.set(1, 0, 2.0);
        a.set(1, 1, 4.0);
        let lu = DenseLu::factor(a.clone());
        assert!(condition_estimate_1(&a, &lu) > 1e14);
    }
}
