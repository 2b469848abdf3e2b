use crate::error::{invalid, Error, Result};

/// Pivots below this multiple of the largest diagonal entry are treated as
/// zero.
const PIVOT_RTOL: f64 = 1e-12;

/// Cholesky factor `M = L Lᵀ` of a small dense SPD matrix, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    dim: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    /// Factor a row-major `dim × dim` matrix. Only the lower triangle is read.
    pub fn factor(matrix: &[f64], dim: usize) -> Result<Self> {
        if dim == 0 || matrix.len() != dim * dim {
            return Err(invalid(format!(
                "expected a {dim}x{dim} matrix, got {} entries",
                matrix.len()
            )));
        }
        let scale = (0..dim)
            .map(|i| matrix[i * dim + i].abs())
            .fold(0.0_f64, f64::max);
        let floor = PIVOT_RTOL * scale.max(f64::MIN_POSITIVE);

        let mut l = vec![0.0; dim * dim];
        for j in 0..dim {
            let mut d = matrix[j * dim + j];
            for k in 0..j {
                d -= l[j * dim + k] * l[j * dim + k];
            }
            if !(d > floor) {
                return Err(Error::SingularMatrix { pivot: j, value: d });
            }
            let d = d.sqrt();
            l[j * dim + j] = d;
            for i in (j + 1)..dim {
                let mut s = matrix[i * dim + j];
                for k in 0..j {
                    s -= l[i * dim + k] * l[j * dim + k];
                }
                l[i * dim + j] = s / d;
            }
        }
        Ok(Self { dim, lower: l })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Solve `M z = y` in place.
    pub fn solve_in_place(&self, y: &mut [f64]) {
        let n = self.dim;
        debug_assert_eq!(y.len(), n);
        let l = &self.lower;
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l[k * n + i] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
    }

    pub fn solve(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.dim {
            return Err(invalid(format!(
                "right-hand side has length {}, expected {}",
                y.len(),
                self.dim
            )));
        }
        let mut z = y.to_vec();
        self.solve_in_place(&mut z);
        Ok(z)
    }

    /// Column `j` of `M⁻¹`.
    pub fn inverse_column(&self, j: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.dim];
        e[j] = 1.0;
        self.solve_in_place(&mut e);
        e
    }
}

/// Solve `M z = y` for a row-major symmetric positive-definite `M`.
pub fn solve_spd(matrix: &[f64], dim: usize, y: &[f64]) -> Result<Vec<f64>> {
    Cholesky::factor(matrix, dim)?.solve(y)
}
