//! Small dense matrices and their spectral norm.

pub mod dd;

use thiserror::Error;

use dd::Dd;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("shape mismatch: expected {expected} entries, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("non-finite matrix entry")]
    NonFinite,
}

/// Row-major dense matrix of doubles.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::Shape {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(LinalgError::Shape {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Shape {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut s = Dd::ZERO;
                for k in 0..self.cols {
                    s = s + Dd::new(self.get(i, k)) * Dd::new(other.get(k, j));
                }
                out.set(i, j, s.to_f64());
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        crate::relmetric::euclid(&self.data)
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> Result<f64, LinalgError> {
        spectral_norm(self)
    }
}

/// Relative off-diagonal threshold of the Jacobi sweeps.
pub const JACOBI_TOLERANCE: f64 = 1e-30;

/// Largest singular value by one-sided cyclic Jacobi in double-double
/// arithmetic.
pub fn spectral_norm(a: &Matrix) -> Result<f64, LinalgError> {
    if a.data.iter().any(|v| !v.is_finite()) {
        return Err(LinalgError::NonFinite);
    }
    // rotate the shorter side's vectors
    let m = if a.cols > a.rows { a.transpose() } else { a.clone() };
    if m.cols == 0 || m.rows == 0 {
        return Ok(0.0);
    }
    let scale = m.data.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let mut cols: Vec<Vec<Dd>> = (0..m.cols)
        .map(|j| (0..m.rows).map(|i| Dd::new(m.get(i, j) / scale)).collect())
        .collect();
    let dot = |x: &[Dd], y: &[Dd]| x.iter().zip(y).fold(Dd::ZERO, |s, (a, b)| s + *a * *b);
    for _sweep in 0..80 {
        let mut rotated = false;
        for i in 0..cols.len() {
            for j in i + 1..cols.len() {
                let alpha = dot(&cols[i], &cols[i]);
                let beta = dot(&cols[j], &cols[j]);
                let gamma = dot(&cols[i], &cols[j]);
                if gamma.hi == 0.0
                    || gamma.hi.abs() <= JACOBI_TOLERANCE * (alpha.hi * beta.hi).sqrt()
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (gamma + gamma);
                let t = if zeta.hi.abs() > 1e100 {
                    Dd::ONE / (zeta + zeta)
                } else {
                    let r = (Dd::ONE + zeta * zeta).sqrt();
                    let t = Dd::ONE / (zeta.abs() + r);
                    if zeta.hi < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = Dd::ONE / (Dd::ONE + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(j);
                for (x, y) in left[i].iter_mut().zip(right[0].iter_mut()) {
                    let (xi, yj) = (*x, *y);
                    *x = c * xi - s * yj;
                    *y = s * xi + c * yj;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let best = cols
        .iter()
        .map(|c| dot(c, c).sqrt().to_f64())
        .fold(0.0f64, f64::max);
    Ok(best * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_and_rank_one() {
        let d = Matrix::from_rows(&[vec![3.0, 0.0], vec![0.0, -7.0]]).unwrap();
        assert_eq!(spectral_norm(&d).unwrap(), 7.0);
        // [1 1] has norm sqrt(2)
        let r = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        assert!((spectral_norm(&r).unwrap() - 2f64.sqrt()).abs() < 1e-16);
    }

    #[test]
    fn known_two_by_two() {
        // [[1,2],[3,4]]: sigma_max^2 = 15 + sqrt(221)
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let expect = (15.0 + 221f64.sqrt()).sqrt();
        assert!((spectral_norm(&m).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn zero_matrix() {
        assert_eq!(spectral_norm(&Matrix::zeros(3, 2)).unwrap(), 0.0);
    }
}
