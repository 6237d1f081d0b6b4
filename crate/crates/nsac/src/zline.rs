//! Dense LU factorization for the small wall-normal line systems.
//!
//! Every implicit solve in the crate decouples per Fourier wavenumber into an
//! almost-tridiagonal system along z (tridiagonal interior plus wider
//! boundary rows). At these sizes a dense factorization with partial
//! pivoting is simpler than banded storage and equally exact; factorizations
//! are built once per run and reused every step.

use num_complex::Complex;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("singular wall-normal system (pivot {pivot:.3e} at row {row})")]
pub struct SingularSystem {
    pub row: usize,
    pub pivot: f64,
}

/// Row-major dense real matrix with in-place LU (partial pivoting).
#[derive(Debug, Clone)]
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl DenseLu {
    pub fn factor(mut a: Vec<f64>, n: usize) -> Result<Self, SingularSystem> {
        assert_eq!(a.len(), n * n);
        let mut piv = vec![0usize; n];
        for col in 0..n {
            // pivot search
            let mut p = col;
            let mut best = a[col * n + col].abs();
            for r in col + 1..n {
                let v = a[r * n + col].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best < 1e-300 {
                return Err(SingularSystem {
                    row: col,
                    pivot: best,
                });
            }
            piv[col] = p;
            if p != col {
                for j in 0..n {
                    a.swap(col * n + j, p * n + j);
                }
            }
            let d = a[col * n + col];
            for r in col + 1..n {
                let m = a[r * n + col] / d;
                a[r * n + col] = m;
                if m != 0.0 {
                    for j in col + 1..n {
                        a[r * n + j] -= m * a[col * n + j];
                    }
                }
            }
        }
        Ok(Self { n, lu: a, piv })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        // apply the whole row permutation before the triangular solves; the
        // stored L entries live at their final (fully pivoted) positions
        for col in 0..n {
            b.swap(col, self.piv[col]);
        }
        for col in 0..n {
            let bc = b[col];
            if bc != 0.0 {
                for r in col + 1..n {
                    b[r] -= self.lu[r * n + col] * bc;
                }
            }
        }
        for col in (0..n).rev() {
            b[col] /= self.lu[col * n + col];
            let bc = b[col];
            if bc != 0.0 {
                for r in 0..col {
                    b[r] -= self.lu[r * n + col] * bc;
                }
            }
        }
    }

    /// Solves a complex right-hand side against the real factorization.
    pub fn solve_complex(&self, b: &mut [Complex<f64>]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        for col in 0..n {
            b.swap(col, self.piv[col]);
        }
        for col in 0..n {
            let bc = b[col];
            for r in col + 1..n {
                b[r] -= self.lu[r * n + col] * bc;
            }
        }
        for col in (0..n).rev() {
            b[col] /= self.lu[col * n + col];
            let bc = b[col];
            for r in 0..col {
                b[r] -= self.lu[r * n + col] * bc;
            }
        }
    }
}

/// Dense matrix accumulation helper for assembling line systems.
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    pub n: usize,
    pub a: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            a: vec![0.0; n * n],
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] += v;
    }

    /// C = A * B.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.a[i * n + k];
                if aik != 0.0 {
                    for j in 0..n {
                        out.a[i * n + j] += aik * other.a[k * n + j];
                    }
                }
            }
        }
        out
    }

    pub fn factor(self) -> Result<DenseLu, SingularSystem> {
        DenseLu::factor(self.a, self.n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_known_system() {
        // 3x3 with known solution
        let a = vec![4.0, 1.0, 0.0, 1.0, 4.0, 1.0, 0.0, 1.0, 4.0];
        let lu = DenseLu::factor(a.clone(), 3).unwrap();
        let x_true = [1.0, -2.0, 0.5];
        let mut b = [0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                b[i] += a[i * 3 + j] * x_true[j];
            }
        }
        lu.solve(&mut b);
        for i in 0..3 {
            assert!((b[i] - x_true[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn lu_complex_rhs() {
        let a = vec![2.0, 1.0, -1.0, 3.0];
        let lu = DenseLu::factor(a.clone(), 2).unwrap();
        let x = [Complex::new(1.0, 2.0), Complex::new(-0.5, 1.0)];
        let mut b = [a[0] * x[0] + a[1] * x[1], a[2] * x[0] + a[3] * x[1]];
        lu.solve_complex(&mut b);
        assert!((b[0] - x[0]).norm() < 1e-14);
        assert!((b[1] - x[1]).norm() < 1e-14);
    }

    #[test]
    fn singular_detected() {
        let a = vec![1.0, 2.0, 2.0, 4.0];
        assert!(DenseLu::factor(a, 2).is_err());
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        let a = vec![0.0, 1.0, 1.0, 0.0];
        let lu = DenseLu::factor(a, 2).unwrap();
        let mut b = [3.0, 7.0];
        lu.solve(&mut b);
        assert!((b[0] - 7.0).abs() < 1e-14);
        assert!((b[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn random_systems_solve_to_rounding() {
        let mut seed = 0x2545f4914f6cdd1du64;
        let mut rnd = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for n in [3usize, 5, 9, 17, 33, 65] {
            for _ in 0..5 {
                let a: Vec<f64> = (0..n * n).map(|_| rnd()).collect();
                let x_true: Vec<f64> = (0..n).map(|_| rnd()).collect();
                let mut b = vec![0.0; n];
                for i in 0..n {
                    for j in 0..n {
                        b[i] += a[i * n + j] * x_true[j];
                    }
                }
                let lu = DenseLu::factor(a, n).unwrap();
                lu.solve(&mut b);
                let err = b
                    .iter()
                    .zip(&x_true)
                    .fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
                assert!(err < 1e-10, "n={n}: error {err:.3e}");
            }
        }
    }
}
