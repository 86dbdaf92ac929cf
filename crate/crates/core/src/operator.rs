//! Dense matrices, positive operators and exact operator norms out of
//! `(ℝⁿ, ‖·‖_∞)`.

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{LatticeVector, NormedLattice};
use crate::scalar::Scalar;

/// Largest domain dimension for which [`operator_norm_general`] enumerates
/// sign vectors unless told otherwise.
pub const DEFAULT_N_MAX: usize = 22;

/// Row-major `rows × cols` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyDimension);
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|e| !e.is_finite_value()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch {
                expected: c,
                found: bad.len(),
            });
        }
        let data = rows.iter().flatten().copied().collect::<Vec<_>>();
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Self::from_row_major(r, c, data.into_iter().map(S::lift).collect())
    }

    /// Builds a matrix from its columns (the images of the basis vectors).
    pub fn from_columns(columns: &[Vec<S>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows, cols);
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    found: col.len(),
                });
            }
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        Self::from_row_major(rows, cols, m.data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row_major(&self) -> &[S] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows_f64(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.cols)
            .map(|r| r.iter().map(Scalar::approx).collect())
            .collect()
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn apply(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.cols, "operand dimension");
        self.data
            .chunks(self.cols)
            .map(|row| {
                row.iter()
                    .zip(x)
                    .filter(|(_, xj)| !xj.is_zero())
                    .fold(S::zero(), |acc, (a, xj)| acc + a.clone() * xj.clone())
            })
            .collect()
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        })
    }

    pub fn scale(&self, factor: &S) -> Self {
        self.map_scalar(|e| e.clone() * factor.clone())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|e| !e.is_negative())
    }

    fn first_negative(&self) -> Option<(usize, usize, f64)> {
        self.data
            .iter()
            .position(Signed::is_negative)
            .map(|k| (k / self.cols, k % self.cols, self.data[k].approx()))
    }
}

/// An entrywise nonnegative matrix acting from `(ℝⁿ, sup)` into a normed lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveOperator<S> {
    matrix: Matrix<S>,
    codomain: NormedLattice<S>,
}

impl<S: Scalar> PositiveOperator<S> {
    pub fn new(matrix: Matrix<S>, codomain: NormedLattice<S>) -> Result<Self> {
        if matrix.rows() != codomain.dim() {
            return Err(Error::DimensionMismatch {
                expected: codomain.dim(),
                found: matrix.rows(),
            });
        }
        if let Some((row, col, value)) = matrix.first_negative() {
            return Err(Error::NegativeEntry { row, col, value });
        }
        Ok(Self { matrix, codomain })
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.matrix
    }

    pub fn codomain(&self) -> &NormedLattice<S> {
        &self.codomain
    }

    pub fn domain_dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn codomain_dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn apply(&self, x: &LatticeVector<S>) -> LatticeVector<S> {
        LatticeVector::new(self.matrix.apply(x.entries())).expect("nonempty image")
    }

    /// `‖T x‖` in the codomain norm.
    pub fn norm_at(&self, x: &LatticeVector<S>) -> S {
        self.codomain.norm_of(&self.apply(x))
    }

    /// `T(χ_mask)`.
    pub fn image_of_indicator(&self, mask: &[bool]) -> LatticeVector<S> {
        self.apply(&LatticeVector::indicator(mask))
    }

    pub fn norm(&self) -> S {
        operator_norm_positive(self)
    }

    /// Multiplies by a positive scalar.
    pub fn scaled(&self, factor: &S) -> Result<Self> {
        Self::new(self.matrix.scale(factor), self.codomain.clone())
    }

    pub fn map_scalar<T: Scalar>(&self, f: impl Fn(&S) -> T + Copy) -> Result<PositiveOperator<T>> {
        PositiveOperator::new(self.matrix.map_scalar(f), self.codomain.map_scalar(f)?)
    }
}

/// Norm of a positive operator out of a sup-norm space: `‖T‖ = ‖T(𝟙)‖`.
pub fn operator_norm_positive<S: Scalar>(t: &PositiveOperator<S>) -> S {
    t.norm_at(&LatticeVector::ones(t.domain_dim()))
}

/// Same as [`operator_norm_positive`] for a raw matrix, rejecting negative entries.
pub fn operator_norm_positive_matrix<S: Scalar>(
    matrix: &Matrix<S>,
    codomain: &NormedLattice<S>,
) -> Result<S> {
    Ok(operator_norm_positive(&PositiveOperator::new(
        matrix.clone(),
        codomain.clone(),
    )?))
}

/// Exact norm of an arbitrary matrix from `(ℝⁿ, sup)` into `codomain`.
///
/// `x ↦ ‖Tx‖` is convex, so its maximum over the unit ball is attained at one
/// of the `2ⁿ` sign vectors; `σ` and `−σ` give the same value, so only half
/// are visited. Refuses above `n_max`.
pub fn operator_norm_general<S: Scalar>(
    matrix: &Matrix<S>,
    codomain: &NormedLattice<S>,
    n_max: usize,
) -> Result<S> {
    let n = matrix.cols();
    if n > n_max {
        return Err(Error::DimensionTooLarge { n, max: n_max });
    }
    if matrix.rows() != codomain.dim() {
        return Err(Error::DimensionMismatch {
            expected: codomain.dim(),
            found: matrix.rows(),
        });
    }
    let norm = codomain.norm();
    let columns: Vec<Vec<S>> = (0..n).map(|j| matrix.column(j)).collect();
    let fresh = |signs: &[bool]| -> Vec<S> {
        let x: Vec<S> = signs
            .iter()
            .map(|&neg| if neg { -S::one() } else { S::one() })
            .collect();
        matrix.apply(&x)
    };

    // Gray-code walk over the first n-1 signs; the last sign stays +1.
    let mut signs = vec![false; n];
    let mut image = fresh(&signs);
    let mut best = norm.eval(&image);
    let steps: u64 = 1u64 << (n - 1);
    for k in 1..steps {
        let j = k.trailing_zeros() as usize;
        signs[j] = !signs[j];
        if S::EXACT || k % 32 != 0 {
            // flipping σⱼ changes Tσ by ∓2·T eⱼ
            let two = S::two();
            for (yi, cij) in image.iter_mut().zip(&columns[j]) {
                let delta = two.clone() * cij.clone();
                *yi = if signs[j] {
                    yi.clone() - delta
                } else {
                    yi.clone() + delta
                };
            }
        } else {
            // resynchronise to keep rounding from accumulating
            image = fresh(&signs);
        }
        let value = norm.eval(&image);
        if value > best {
            best = value;
        }
    }
    Ok(best)
}
