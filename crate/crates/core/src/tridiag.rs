//! Tridiagonal linear systems: Thomas-algorithm solves, reusable LU factors,
//! and matrix–vector products.
//!
//! Every linear solve in this crate — the Newton correction inside the
//! implicit diffusion step and the inverse-power eigenvalue iteration — is
//! tridiagonal, so this thin module is the only linear algebra needed.

use crate::error::{Error, Result};

/// A tridiagonal matrix stored by bands. `lower[0]` and `upper[n−1]` are
/// ignored padding so that all three bands have length `n`.
#[derive(Clone, Debug)]
pub struct Tridiagonal {
    /// Sub-diagonal `a_i = A[i][i−1]` (index 0 unused).
    pub lower: Vec<f64>,
    /// Main diagonal `b_i = A[i][i]`.
    pub diag: Vec<f64>,
    /// Super-diagonal `c_i = A[i][i+1]` (index n−1 unused).
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    /// Zero matrix of size `n × n`.
    pub fn zeros(n: usize) -> Tridiagonal {
        Tridiagonal {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
        }
    }

    /// Matrix dimension.
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    /// Dense product `A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        assert_eq!(x.len(), n, "matvec dimension mismatch");
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.lower[i] * x[i - 1];
            }
            if i + 1 < n {
                v += self.upper[i] * x[i + 1];
            }
            y[i] = v;
        }
        y
    }

    /// Solves `A x = rhs` by the Thomas algorithm (no pivoting; intended for
    /// the diagonally dominant systems this crate produces).
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        FactoredTridiagonal::factor(self)?.solve(rhs)
    }
}

/// LU factors of a tridiagonal matrix, for repeated solves against the same
/// matrix (e.g. inverse power iteration).
#[derive(Clone, Debug)]
pub struct FactoredTridiagonal {
    // Forward-elimination multipliers and modified diagonal.
    mult: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl FactoredTridiagonal {
    /// Computes the factorization, rejecting (near-)singular pivots.
    pub fn factor(a: &Tridiagonal) -> Result<FactoredTridiagonal> {
        let n = a.n();
        if n == 0 {
            return Err(Error::invalid("cannot factor an empty system"));
        }
        let mut mult = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let scale = a
            .diag
            .iter()
            .chain(&a.lower)
            .chain(&a.upper)
            .fold(0.0f64, |acc, &v| acc.max(v.abs()))
            .max(1.0);
        diag[0] = a.diag[0];
        for i in 1..n {
            let pivot = diag[i - 1];
            if pivot.abs() < 1e-300 * scale {
                return Err(Error::invalid(format!(
                    "singular tridiagonal system: pivot {pivot:e} at row {}",
                    i - 1
                )));
            }
            let m = a.lower[i] / pivot;
            mult[i] = m;
            diag[i] = a.diag[i] - m * a.upper[i - 1];
        }
        if diag[n - 1].abs() < 1e-300 * scale {
            return Err(Error::invalid(format!(
                "singular tridiagonal system: pivot {:e} at last row",
                diag[n - 1]
            )));
        }
        Ok(FactoredTridiagonal {
            mult,
            diag,
            upper: a.upper.clone(),
        })
    }

    /// Solves `A x = rhs` using the stored factors.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.diag.len();
        if rhs.len() != n {
            return Err(Error::invalid(format!(
                "right-hand side length {} does not match system size {n}",
                rhs.len()
            )));
        }
        let mut x = rhs.to_vec();
        for i in 1..n {
            x[i] -= self.mult[i] * x[i - 1];
        }
        x[n - 1] /= self.diag[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (x[i] - self.upper[i] * x[i + 1]) / self.diag[i];
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn toeplitz(n: usize, lo: f64, di: f64, up: f64) -> Tridiagonal {
        let mut a = Tridiagonal::zeros(n);
        for i in 0..n {
            a.diag[i] = di;
            if i > 0 {
                a.lower[i] = lo;
            }
            if i + 1 < n {
                a.upper[i] = up;
            }
        }
        a
    }

    #[test]
    fn solve_recovers_known_vector() {
        // Discrete 1D Laplacian plus identity: well conditioned, dominant.
        let n = 64;
        let a = toeplitz(n, -1.0, 3.0, -1.0);
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let rhs = a.matvec(&x_true);
        let x = a.solve(&rhs).unwrap();
        for i in 0..n {
            assert_relative_eq!(x[i], x_true[i], max_relative = 1e-12, epsilon = 1e-12);
        }
    }

    #[test]
    fn factored_solve_matches_direct_solve() {
        let n = 40;
        let mut a = toeplitz(n, -0.5, 2.0, -1.2);
        // Break symmetry and constancy.
        for i in 0..n {
            a.diag[i] += 0.01 * i as f64;
        }
        let f = FactoredTridiagonal::factor(&a).unwrap();
        for seed in 0..3 {
            let rhs: Vec<f64> = (0..n).map(|i| ((i + seed) as f64 * 0.11).cos()).collect();
            let x1 = a.solve(&rhs).unwrap();
            let x2 = f.solve(&rhs).unwrap();
            for i in 0..n {
                assert_relative_eq!(x1[i], x2[i], max_relative = 1e-14, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn singular_system_is_rejected() {
        let mut a = toeplitz(3, 0.0, 1.0, 0.0);
        a.diag[1] = 0.0;
        assert!(a.solve(&[1.0, 1.0, 1.0]).is_err(), "zero pivot must be reported");
        let wrong_len = toeplitz(3, -1.0, 2.0, -1.0);
        assert!(
            FactoredTridiagonal::factor(&wrong_len).unwrap().solve(&[1.0]).is_err(),
            "dimension mismatch must be reported"
        );
    }

    #[test]
    fn matvec_matches_dense_arithmetic() {
        let a = toeplitz(4, 2.0, -5.0, 3.0);
        let y = a.matvec(&[1.0, 2.0, 3.0, 4.0]);
        // Row 0: −5·1 + 3·2 = 1; row 1: 2·1 − 5·2 + 3·3 = 1;
        // row 2: 2·2 − 5·3 + 3·4 = 1; row 3: 2·3 − 5·4 = −14.
        assert_eq!(y, vec![1.0, 1.0, 1.0, -14.0]);
    }
}
