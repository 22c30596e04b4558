//! Four-index costs, the tensor-matrix product `L ⊗ P` and the GW objective
//! evaluated densely or through the separable factorization.
//!
//! Convention: `(L ⊗ P)_{kl} = Σ_{ij} L_{ijkl} P_{ij}`, so the result is
//! indexed like the second argument of the pairing `⟨L ⊗ P, Q⟩`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::loss::SeparableLoss;
use crate::types::{check_shape, inner, CostMatrix, Coupling, Histogram};

/// Dense tensors are only materialized up to this many index pairs `n·m`.
pub const DENSE_CAP: usize = 1024;

/// Tolerance on `|L_ijkl - L_klij|` for the symmetric flag.
pub const TENSOR_SYMMETRY_TOL: f64 = 1e-12;

/// Anything that can apply a four-index cost to an `n×m` matrix.
///
/// Implementations must be exact for arbitrary matrices, not only couplings,
/// since differences and sums of plans are fed through the same map.
pub trait QuadCost {
    /// `(n, m)`: the plan shape.
    fn shape(&self) -> (usize, usize);

    /// `L ⊗ X`.
    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64>;

    fn is_symmetric(&self) -> bool;

    /// `⟨L ⊗ X, Y⟩`.
    fn bilinear(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
        inner(&self.apply(x), y)
    }

    /// `⟨L ⊗ X, X⟩`.
    fn quadratic(&self, x: &DMatrix<f64>) -> f64 {
        self.bilinear(x, x)
    }

    fn check_plan_shape(&self, x: &DMatrix<f64>) -> Result<()> {
        let (n, m) = self.shape();
        check_shape(x, n, m)
    }
}

/// Dense `L_{ijkl}` with `i, k ∈ [n]` and `j, l ∈ [m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadTensor {
    n: usize,
    m: usize,
    entries: Vec<f64>,
    symmetric: bool,
}

impl QuadTensor {
    /// Builds a tensor from a generator. When `symmetric` is requested the
    /// flag is verified: exhaustively when `n·m <= 64`, otherwise on 10⁴
    /// sampled index tuples.
    pub fn from_fn<F>(n: usize, m: usize, symmetric: bool, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, usize, usize) -> f64,
    {
        check_dense_size(n, m)?;
        let mut entries = Vec::with_capacity(n * m * n * m);
        for i in 0..n {
            for j in 0..m {
                for k in 0..n {
                    for l in 0..m {
                        let v = f(i, j, k, l);
                        if !v.is_finite() {
                            return Err(Error::NonFinite {
                                row: i * m + j,
                                col: k * m + l,
                            });
                        }
                        entries.push(v);
                    }
                }
            }
        }
        let t = QuadTensor {
            n,
            m,
            entries,
            symmetric,
        };
        if symmetric {
            t.verify_symmetry()?;
        }
        Ok(t)
    }

    pub fn zeros(n: usize, m: usize) -> Result<Self> {
        Self::from_fn(n, m, true, |_, _, _, _| 0.0)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.m + j) * self.n + k) * self.m + l
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.entries[self.idx(i, j, k, l)]
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    /// `(L_{ijkl} + L_{klij}) / 2`; leaves the quadratic form unchanged.
    pub fn symmetrized(&self) -> Self {
        let mut entries = self.entries.clone();
        for i in 0..self.n {
            for j in 0..self.m {
                for k in 0..self.n {
                    for l in 0..self.m {
                        let a = self.idx(i, j, k, l);
                        let b = self.idx(k, l, i, j);
                        entries[a] = 0.5 * (self.entries[a] + self.entries[b]);
                    }
                }
            }
        }
        QuadTensor {
            n: self.n,
            m: self.m,
            entries,
            symmetric: true,
        }
    }

    fn verify_symmetry(&self) -> Result<()> {
        let (n, m) = (self.n, self.m);
        let check = |i, j, k, l| -> Result<()> {
            if (self.get(i, j, k, l) - self.get(k, l, i, j)).abs() > TENSOR_SYMMETRY_TOL {
                return Err(Error::TensorNotSymmetric { i, j, k, l });
            }
            Ok(())
        };
        if n * m <= 64 {
            for i in 0..n {
                for j in 0..m {
                    for k in 0..n {
                        for l in 0..m {
                            check(i, j, k, l)?;
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..10_000 {
                check(
                    rng.random_range(0..n),
                    rng.random_range(0..m),
                    rng.random_range(0..n),
                    rng.random_range(0..m),
                )?;
            }
        }
        Ok(())
    }
}

impl QuadCost for QuadTensor {
    fn shape(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let (n, m) = (self.n, self.m);
        let mut out = DMatrix::zeros(n, m);
        for i in 0..n {
            for j in 0..m {
                let w = x[(i, j)];
                if w == 0.0 {
                    continue;
                }
                let base = self.idx(i, j, 0, 0);
                let block = &self.entries[base..base + n * m];
                for k in 0..n {
                    for l in 0..m {
                        out[(k, l)] += block[k * m + l] * w;
                    }
                }
            }
        }
        out
    }

    fn is_symmetric(&self) -> bool {
        self.symmetric
    }
}

fn check_dense_size(n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::EmptyWeights);
    }
    if n * m > DENSE_CAP {
        return Err(Error::TooLarge {
            what: "dense tensor n*m",
            size: n * m,
            cap: DENSE_CAP,
        });
    }
    Ok(())
}

/// `result_{kl} = Σ_{ij} L_{ijkl} P_{ij}`.
pub fn tensor_apply(l: &QuadTensor, p: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    l.check_plan_shape(p)?;
    Ok(l.apply(p))
}

/// `L_{ijkl} = loss(C_ik, C̄_jl)`.
pub fn build_dense_tensor(
    loss: &SeparableLoss,
    c: &CostMatrix,
    cb: &CostMatrix,
) -> Result<QuadTensor> {
    check_intra_costs(c, cb)?;
    loss.check_domain(c, cb)?;
    let (cm, cbm) = (c.matrix(), cb.matrix());
    let symmetric = c.is_symmetric() && cb.is_symmetric();
    QuadTensor::from_fn(c.nrows(), cb.nrows(), symmetric, |i, j, k, l| {
        loss.eval(cm[(i, k)], cbm[(j, l)])
    })
}

/// `⟨L ⊗ P, P⟩` through the dense tensor.
pub fn gw_objective_dense(l: &QuadTensor, p: &Coupling) -> Result<f64> {
    let lp = tensor_apply(l, p.matrix())?;
    Ok(inner(&lp, p.matrix()))
}

/// Factored objective
/// `⟨f1(C) a 1ᵀ + 1 bᵀ f2(C̄)ᵀ, P⟩ - ⟨h1(C) P h2(C̄)ᵀ, P⟩`.
///
/// Fails if the marginals of `P` differ from `(a, b)` by more than 1e-6.
pub fn gw_objective_separable(
    loss: &SeparableLoss,
    c: &CostMatrix,
    cb: &CostMatrix,
    a: &Histogram,
    b: &Histogram,
    p: &Coupling,
) -> Result<f64> {
    check_intra_costs(c, cb)?;
    loss.check_domain(c, cb)?;
    let (n, m) = (c.nrows(), cb.nrows());
    check_shape(p.matrix(), n, m)?;
    if a.len() != n || b.len() != m {
        return Err(Error::DimensionMismatch {
            expected: format!("histograms of length {n} and {m}"),
            found: format!("{} and {}", a.len(), b.len()),
        });
    }
    let pm = p.matrix();
    for (i, row) in pm.row_iter().enumerate() {
        let s = row.sum();
        if (s - a[i]).abs() > 1e-6 {
            return Err(Error::MarginalMismatch {
                which: "row",
                index: i,
                actual: s,
                expected: a[i],
            });
        }
    }
    for (j, col) in pm.column_iter().enumerate() {
        let s = col.sum();
        if (s - b[j]).abs() > 1e-6 {
            return Err(Error::MarginalMismatch {
                which: "column",
                index: j,
                actual: s,
                expected: b[j],
            });
        }
    }
    let av = DVector::from_column_slice(a.weights());
    let bv = DVector::from_column_slice(b.weights());
    let row_term = loss.map_f1(c.matrix()) * av;
    let col_term = loss.map_f2(cb.matrix()) * bv;
    let linear: f64 = (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (row_term[i] + col_term[j]) * pm[(i, j)])
                .sum::<f64>()
        })
        .sum();
    let cross = loss.map_h1(c.matrix()) * pm * loss.map_h2(cb.matrix()).transpose();
    Ok(linear - inner(&cross, pm))
}

fn check_intra_costs(c: &CostMatrix, cb: &CostMatrix) -> Result<()> {
    for cost in [c, cb] {
        if !cost.is_symmetric() {
            return Err(Error::InvalidArgument(
                "intra-space costs must be symmetric".into(),
            ));
        }
    }
    Ok(())
}

/// A separable GW instance `L_{ijkl} = loss(C_ik, C̄_jl)` kept in factored
/// form. Applying it costs `O(n²m + nm²)`.
#[derive(Debug, Clone)]
pub struct SeparableCost {
    loss: SeparableLoss,
    c: CostMatrix,
    cb: CostMatrix,
    f1_c_t: DMatrix<f64>,
    f2_cb_t: DMatrix<f64>,
    h1_c_t: DMatrix<f64>,
    h2_cb: DMatrix<f64>,
}

impl SeparableCost {
    pub fn new(loss: SeparableLoss, c: CostMatrix, cb: CostMatrix) -> Result<Self> {
        check_intra_costs(&c, &cb)?;
        loss.check_domain(&c, &cb)?;
        let f1_c_t = loss.map_f1(c.matrix()).transpose();
        let f2_cb_t = loss.map_f2(cb.matrix()).transpose();
        let h1_c_t = loss.map_h1(c.matrix()).transpose();
        let h2_cb = loss.map_h2(cb.matrix());
        for m in [&f1_c_t, &f2_cb_t, &h1_c_t, &h2_cb] {
            crate::types::check_finite(m)?;
        }
        Ok(SeparableCost {
            loss,
            c,
            cb,
            f1_c_t,
            f2_cb_t,
            h1_c_t,
            h2_cb,
        })
    }

    pub fn loss(&self) -> &SeparableLoss {
        &self.loss
    }

    pub fn c(&self) -> &CostMatrix {
        &self.c
    }

    pub fn cb(&self) -> &CostMatrix {
        &self.cb
    }

    pub fn to_dense(&self) -> Result<QuadTensor> {
        build_dense_tensor(&self.loss, &self.c, &self.cb)
    }
}

impl QuadCost for SeparableCost {
    fn shape(&self) -> (usize, usize) {
        (self.c.nrows(), self.cb.nrows())
    }

    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let (n, m) = self.shape();
        let r = x.column_sum();
        let s = x.row_sum().transpose();
        let row_term = &self.f1_c_t * r;
        let col_term = &self.f2_cb_t * s;
        let mut out = &self.h1_c_t * x * &self.h2_cb;
        for k in 0..n {
            for l in 0..m {
                out[(k, l)] = row_term[k] + col_term[l] - out[(k, l)];
            }
        }
        out
    }

    fn is_symmetric(&self) -> bool {
        true
    }
}
