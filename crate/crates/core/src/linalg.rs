//! Small dense helpers: symmetric 2x2 matrices and a tridiagonal solver.

use serde::Serialize;

/// Symmetric matrix `[[a, b], [b, c]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sym2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Sym2 {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    /// `x ⊗ x`.
    pub fn outer(x: [f64; 2]) -> Self {
        Self::new(x[0] * x[0], x[0] * x[1], x[1] * x[1])
    }

    pub fn trace(&self) -> f64 {
        self.a + self.c
    }

    pub fn to_array(self) -> [[f64; 2]; 2] {
        [[self.a, self.b], [self.b, self.c]]
    }

    /// Eigenvalues `(max, min)` from the trace/discriminant closed form.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let mean = 0.5 * (self.a + self.c);
        let half_diff = 0.5 * (self.a - self.c);
        let rad = half_diff.hypot(self.b);
        (mean + rad, mean - rad)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().0
    }

    /// `Q^T M Q` for the rotation by `phi`.
    pub fn rotated(&self, phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        let m = self.to_array();
        let q = [[c, -s], [s, c]];
        let mut out = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = 0.0;
                for k in 0..2 {
                    for l in 0..2 {
                        acc += q[k][i] * m[k][l] * q[l][j];
                    }
                }
                out[i][j] = acc;
            }
        }
        Self::new(out[0][0], 0.5 * (out[0][1] + out[1][0]), out[1][1])
    }
}

impl std::ops::Sub for Sym2 {
    type Output = Sym2;
    fn sub(self, o: Sym2) -> Sym2 {
        Sym2::new(self.a - o.a, self.b - o.b, self.c - o.c)
    }
}

/// Thomas algorithm for `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
///
/// `lower[0]` and `upper[n-1]` are ignored. The matrix must be diagonally
/// dominant (no pivoting). `rhs` is overwritten with the solution.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64]) {
    let n = rhs.len();
    assert!(lower.len() == n && diag.len() == n && upper.len() == n);
    if n == 0 {
        return;
    }
    let mut c_prime = vec![0.0; n];
    let mut denom = diag[0];
    c_prime[0] = upper[0] / denom;
    rhs[0] /= denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c_prime[i - 1];
        c_prime[i] = upper[i] / denom;
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        rhs[i] -= c_prime[i] * rhs[i + 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eigenvalues_of_diagonal_and_offdiagonal() {
        let (hi, lo) = Sym2::new(3.0, 0.0, -1.0).eigenvalues();
        assert_eq!((hi, lo), (3.0, -1.0));
        let (hi, lo) = Sym2::new(0.5, 0.2, 0.5).eigenvalues();
        assert_abs_diff_eq!(hi, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(lo, 0.3, epsilon = 1e-15);
    }

    #[test]
    fn rotation_preserves_spectrum() {
        let m = Sym2::new(0.3, -0.7, 1.1);
        let r = m.rotated(0.9);
        let (a, b) = m.eigenvalues();
        let (c, d) = r.eigenvalues();
        assert_abs_diff_eq!(a, c, epsilon = 1e-14);
        assert_abs_diff_eq!(b, d, epsilon = 1e-14);
    }

    #[test]
    fn tridiagonal_against_dense() {
        let n = 6;
        let lower: Vec<f64> = (0..n).map(|i| -1.0 - 0.1 * i as f64).collect();
        let upper: Vec<f64> = (0..n).map(|i| -0.5 + 0.05 * i as f64).collect();
        let diag: Vec<f64> = (0..n).map(|i| 4.0 + i as f64).collect();
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 1.0).collect();
        let mut rhs: Vec<f64> = (0..n)
            .map(|i| {
                let mut v = diag[i] * x[i];
                if i > 0 {
                    v += lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    v += upper[i] * x[i + 1];
                }
                v
            })
            .collect();
        solve_tridiagonal(&lower, &diag, &upper, &mut rhs);
        for i in 0..n {
            assert_abs_diff_eq!(rhs[i], x[i], epsilon = 1e-14);
        }
    }
}
