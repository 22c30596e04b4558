//! Domain types shared by every solver: histograms, couplings, difference
//! plans, cost matrices and permutations.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Absolute threshold below which a coupling entry is treated as zero.
pub const DEFAULT_SUPPORT_TOL: f64 = 1e-12;

/// Marginal tolerance used by every coupling and difference-plan check.
pub const MARGINAL_TOL: f64 = 1e-9;

/// Entries in `[-CLAMP_TOL, 0)` are absorbed as solver round-off.
pub const CLAMP_TOL: f64 = 1e-12;

/// A probability vector on a finite support.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    weights: Vec<f64>,
}

impl Histogram {
    /// Normalizes nonnegative weights to unit mass.
    pub fn new(weights: &[f64]) -> Result<Self> {
        make_histogram(weights)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyWeights);
        }
        Ok(Histogram {
            weights: vec![1.0 / n as f64; n],
        })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.len() as f64;
        self.weights.iter().all(|w| (w - u).abs() <= MARGINAL_TOL)
    }
}

impl std::ops::Index<usize> for Histogram {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.weights[i]
    }
}

pub fn make_histogram(weights: &[f64]) -> Result<Histogram> {
    if weights.is_empty() {
        return Err(Error::EmptyWeights);
    }
    for (i, &w) in weights.iter().enumerate() {
        if !w.is_finite() {
            return Err(Error::NonFinite { row: i, col: 0 });
        }
        if w < 0.0 {
            return Err(Error::NegativeWeight { index: i, value: w });
        }
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroMass);
    }
    Ok(Histogram {
        weights: weights.iter().map(|w| w / total).collect(),
    })
}

/// A nonnegative matrix whose row and column sums match two histograms.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    matrix: DMatrix<f64>,
    row_marginal: Histogram,
    col_marginal: Histogram,
}

impl Coupling {
    /// Validates marginals and clamps round-off negatives to zero.
    pub fn new(mut matrix: DMatrix<f64>, a: &Histogram, b: &Histogram) -> Result<Self> {
        check_shape(&matrix, a.len(), b.len())?;
        clamp_nonnegative(&mut matrix)?;
        check_marginals(&matrix, a.weights(), b.weights())?;
        Ok(Coupling {
            matrix,
            row_marginal: a.clone(),
            col_marginal: b.clone(),
        })
    }

    /// Builds a coupling whose marginals are read off its own row and column
    /// sums. Total mass must be one.
    pub fn from_matrix(mut matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.ncols() == 0 {
            return Err(Error::EmptyWeights);
        }
        clamp_nonnegative(&mut matrix)?;
        let total = matrix.sum();
        if (total - 1.0).abs() > MARGINAL_TOL {
            return Err(Error::InvalidArgument(format!(
                "coupling has total mass {total}, expected 1"
            )));
        }
        let rows: Vec<f64> = matrix.row_iter().map(|r| r.sum()).collect();
        let cols: Vec<f64> = matrix.column_iter().map(|c| c.sum()).collect();
        let a = make_histogram(&rows)?;
        let b = make_histogram(&cols)?;
        Coupling::new(matrix, &a, &b)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn row_marginal(&self) -> &Histogram {
        &self.row_marginal
    }

    pub fn col_marginal(&self) -> &Histogram {
        &self.col_marginal
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn support(&self, tol: f64) -> Vec<(usize, usize)> {
        support(self, tol)
    }
}

/// A difference of two couplings sharing the same marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffPlan {
    matrix: DMatrix<f64>,
}

impl DiffPlan {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        for (i, row) in matrix.row_iter().enumerate() {
            let s = row.sum();
            if s.abs() > MARGINAL_TOL {
                return Err(Error::MarginalMismatch {
                    which: "row",
                    index: i,
                    actual: s,
                    expected: 0.0,
                });
            }
        }
        for (j, col) in matrix.column_iter().enumerate() {
            let s = col.sum();
            if s.abs() > MARGINAL_TOL {
                return Err(Error::MarginalMismatch {
                    which: "column",
                    index: j,
                    actual: s,
                    expected: 0.0,
                });
            }
        }
        Ok(DiffPlan { matrix })
    }

    pub fn between(p1: &Coupling, p2: &Coupling) -> Result<Self> {
        if p1.matrix.shape() != p2.matrix.shape() {
            return Err(Error::DimensionMismatch {
                expected: format!("{:?}", p1.matrix.shape()),
                found: format!("{:?}", p2.matrix.shape()),
            });
        }
        DiffPlan::new(&p1.matrix - &p2.matrix)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// A real cost matrix, optionally required to be symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    matrix: DMatrix<f64>,
    symmetric: bool,
}

impl CostMatrix {
    /// Rectangular cost with finite entries.
    pub fn general(matrix: DMatrix<f64>) -> Result<Self> {
        check_finite(&matrix)?;
        Ok(CostMatrix {
            matrix,
            symmetric: false,
        })
    }

    /// Square intra-space cost; `|C_ik - C_ki| <= 1e-12 * max(1, |C_ik|)`.
    pub fn symmetric(matrix: DMatrix<f64>) -> Result<Self> {
        check_finite(&matrix)?;
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: "square matrix".into(),
                found: format!("{}x{}", matrix.nrows(), matrix.ncols()),
            });
        }
        let n = matrix.nrows();
        for i in 0..n {
            for k in (i + 1)..n {
                let (x, y) = (matrix[(i, k)], matrix[(k, i)]);
                if (x - y).abs() > 1e-12 * x.abs().max(1.0) {
                    return Err(Error::NotSymmetric { row: i, col: k });
                }
            }
        }
        Ok(CostMatrix {
            matrix,
            symmetric: true,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }
}

/// A bijection on `0..n` stored as `sigma[i] = j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    sigma: Vec<usize>,
}

impl Permutation {
    pub fn new(sigma: Vec<usize>) -> Result<Self> {
        let n = sigma.len();
        let mut seen = vec![false; n];
        for &s in &sigma {
            if s >= n || seen[s] {
                return Err(Error::InvalidArgument(format!(
                    "{sigma:?} is not a permutation"
                )));
            }
            seen[s] = true;
        }
        Ok(Permutation { sigma })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            sigma: (0..n).collect(),
        }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.sigma
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// The coupling `P_ij = 1/n` when `j = sigma(i)`, zero elsewhere.
    pub fn to_coupling(&self) -> Coupling {
        let n = self.sigma.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &j) in self.sigma.iter().enumerate() {
            m[(i, j)] = 1.0 / n as f64;
        }
        let u = Histogram::uniform(n).expect("permutation of positive length");
        Coupling {
            matrix: m,
            row_marginal: u.clone(),
            col_marginal: u,
        }
    }
}

/// The independent coupling `P_ij = a_i b_j`.
pub fn product_coupling(a: &Histogram, b: &Histogram) -> Coupling {
    let m = DMatrix::from_fn(a.len(), b.len(), |i, j| a[i] * b[j]);
    Coupling {
        matrix: m,
        row_marginal: a.clone(),
        col_marginal: b.clone(),
    }
}

/// Index pairs with mass strictly above `tol`, in row-major order.
pub fn support(p: &Coupling, tol: f64) -> Vec<(usize, usize)> {
    matrix_support(&p.matrix, tol)
}

pub(crate) fn matrix_support(m: &DMatrix<f64>, tol: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if m[(i, j)] > tol {
                out.push((i, j));
            }
        }
    }
    out
}

/// Frobenius inner product.
pub fn inner(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    x.dot(y)
}

pub(crate) fn check_shape(m: &DMatrix<f64>, n: usize, k: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != k {
        return Err(Error::DimensionMismatch {
            expected: format!("{n}x{k}"),
            found: format!("{}x{}", m.nrows(), m.ncols()),
        });
    }
    Ok(())
}

pub(crate) fn check_finite(m: &DMatrix<f64>) -> Result<()> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if !m[(i, j)].is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

fn clamp_nonnegative(m: &mut DMatrix<f64>) -> Result<()> {
    check_finite(m)?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            if v < -CLAMP_TOL {
                return Err(Error::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
            if v < 0.0 {
                m[(i, j)] = 0.0;
            }
        }
    }
    Ok(())
}

fn check_marginals(m: &DMatrix<f64>, a: &[f64], b: &[f64]) -> Result<()> {
    for (i, row) in m.row_iter().enumerate() {
        let s = row.sum();
        if (s - a[i]).abs() > MARGINAL_TOL {
            return Err(Error::MarginalMismatch {
                which: "row",
                index: i,
                actual: s,
                expected: a[i],
            });
        }
    }
    for (j, col) in m.column_iter().enumerate() {
        let s = col.sum();
        if (s - b[j]).abs() > MARGINAL_TOL {
            return Err(Error::MarginalMismatch {
                which: "column",
                index: j,
                actual: s,
                expected: b[j],
            });
        }
    }
    Ok(())
}
