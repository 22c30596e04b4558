//! Conditional negative/positive definiteness of matrices, the concavity
//! criterion for separable GW losses and explicit non-concavity witnesses.
//!
//! A symmetric `C` is CND (CPD) when `uᵀCu <= 0` (`>= 0`) for every zero-sum
//! `u`, equivalently when `H C H` is negative (positive) semi-definite with
//! `H = I - 11ᵀ/n`. The spectrum is computed on the zero-sum subspace through
//! an orthonormal Helmert basis `U` (`H = UUᵀ`), so every eigenvector returned
//! here already sums to zero.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::loss::SeparableLoss;
use crate::sample::random_plan;
use crate::tensor::{QuadCost, SeparableCost};
use crate::types::{product_coupling, CostMatrix, Coupling, DiffPlan, Histogram};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CndVerdict {
    Cnd,
    Cpd,
    Both,
    Neither,
}

impl CndVerdict {
    pub fn is_cnd(self) -> bool {
        matches!(self, CndVerdict::Cnd | CndVerdict::Both)
    }

    pub fn is_cpd(self) -> bool {
        matches!(self, CndVerdict::Cpd | CndVerdict::Both)
    }

    pub fn name(self) -> &'static str {
        match self {
            CndVerdict::Cnd => "cnd",
            CndVerdict::Cpd => "cpd",
            CndVerdict::Both => "both",
            CndVerdict::Neither => "neither",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CndCertificate {
    pub verdict: CndVerdict,
    pub tol: f64,
    /// Eigenvalue the verdict rests on: the largest for CND/both/neither,
    /// the smallest for CPD.
    pub extreme_eigenvalue: f64,
    /// Unit zero-sum eigenvector for `extreme_eigenvalue`.
    pub witness_vector: DVector<f64>,
    pub max_eigenvalue: f64,
    pub max_vector: DVector<f64>,
    pub min_eigenvalue: f64,
    pub min_vector: DVector<f64>,
    /// Spectrum of the form restricted to zero-sum vectors, ascending.
    pub spectrum: Vec<f64>,
}

/// `H_n = I_n - 11ᵀ/n`.
pub fn centering_matrix(n: usize) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "centering matrix needs n >= 1".into(),
        ));
    }
    let k = 1.0 / n as f64;
    Ok(DMatrix::from_fn(
        n,
        n,
        |i, j| if i == j { 1.0 - k } else { -k },
    ))
}

/// Orthonormal basis of `{u : Σu = 0}` as the columns of an `n×(n-1)` matrix.
fn helmert_basis(n: usize) -> DMatrix<f64> {
    let mut u = DMatrix::zeros(n, n.saturating_sub(1));
    for k in 1..n {
        let norm = ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            u[(i, k - 1)] = 1.0 / norm;
        }
        u[(k, k - 1)] = -(k as f64) / norm;
    }
    u
}

/// Eigenpairs of the quadratic form restricted to zero-sum vectors, with the
/// vectors lifted back to `R^n`. Sorted by ascending eigenvalue.
pub(crate) fn centered_eigenpairs(c: &DMatrix<f64>) -> Vec<(f64, DVector<f64>)> {
    let n = c.nrows();
    if n < 2 {
        return Vec::new();
    }
    let u = helmert_basis(n);
    let restricted = u.transpose() * c * &u;
    let restricted = (&restricted + restricted.transpose()) * 0.5;
    let eig = SymmetricEigen::new(restricted);
    let mut pairs: Vec<(f64, DVector<f64>)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(t, &lam)| {
            let v = &u * eig.eigenvectors.column(t);
            let norm = v.norm();
            (lam, v / norm)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    pairs
}

pub fn default_tol(c: &DMatrix<f64>) -> f64 {
    1e-9 * c.amax().max(1.0)
}

/// Certifies a symmetric matrix as CND, CPD, both or neither.
///
/// `tol` defaults to `1e-9 · max(1, max|C_ij|)`.
pub fn certify_cnd(c: &DMatrix<f64>, tol: Option<f64>) -> Result<CndCertificate> {
    let n = c.nrows();
    if n != c.ncols() {
        return Err(Error::DimensionMismatch {
            expected: "square matrix".into(),
            found: format!("{}x{}", n, c.ncols()),
        });
    }
    if n == 0 {
        return Err(Error::EmptyWeights);
    }
    crate::types::check_finite(c)?;
    for i in 0..n {
        for k in (i + 1)..n {
            let (x, y) = (c[(i, k)], c[(k, i)]);
            if (x - y).abs() > 1e-12 * x.abs().max(1.0) {
                return Err(Error::NotSymmetric { row: i, col: k });
            }
        }
    }
    let tol = tol.unwrap_or_else(|| default_tol(c));
    let pairs = centered_eigenpairs(c);
    let zero = DVector::zeros(n);
    let (min_eigenvalue, min_vector) = pairs.first().cloned().unwrap_or((0.0, zero.clone()));
    let (max_eigenvalue, max_vector) = pairs.last().cloned().unwrap_or((0.0, zero));
    let cnd = max_eigenvalue <= tol;
    let cpd = min_eigenvalue >= -tol;
    let verdict = match (cnd, cpd) {
        (true, true) => CndVerdict::Both,
        (true, false) => CndVerdict::Cnd,
        (false, true) => CndVerdict::Cpd,
        (false, false) => CndVerdict::Neither,
    };
    let (extreme_eigenvalue, witness_vector) = if verdict == CndVerdict::Cpd {
        (min_eigenvalue, min_vector.clone())
    } else {
        (max_eigenvalue, max_vector.clone())
    };
    Ok(CndCertificate {
        verdict,
        tol,
        extreme_eigenvalue,
        witness_vector,
        max_eigenvalue,
        max_vector,
        min_eigenvalue,
        min_vector,
        spectrum: pairs.iter().map(|p| p.0).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConcavityPattern {
    BothCnd,
    BothCpd,
    Mixed,
}

#[derive(Debug, Clone)]
pub struct ConcavityReport {
    pub concave: bool,
    pub pattern: ConcavityPattern,
    /// Certificate for `h1(C)`.
    pub h1: CndCertificate,
    /// Certificate for `h2(C̄)`.
    pub h2: CndCertificate,
}

/// The separable GW objective is concave on `Π(a, b)` iff `h1(C)` and `h2(C̄)`
/// are both CND or both CPD.
pub fn separable_concavity_check(
    loss: &SeparableLoss,
    c: &CostMatrix,
    cb: &CostMatrix,
) -> Result<ConcavityReport> {
    loss.check_domain(c, cb)?;
    let h1 = certify_cnd(&loss.map_h1(c.matrix()), None)?;
    let h2 = certify_cnd(&loss.map_h2(cb.matrix()), None)?;
    let pattern = if h1.verdict.is_cnd() && h2.verdict.is_cnd() {
        ConcavityPattern::BothCnd
    } else if h1.verdict.is_cpd() && h2.verdict.is_cpd() {
        ConcavityPattern::BothCpd
    } else {
        ConcavityPattern::Mixed
    };
    Ok(ConcavityReport {
        concave: pattern != ConcavityPattern::Mixed,
        pattern,
        h1,
        h2,
    })
}

/// Two couplings whose midpoint strictly violates concavity.
#[derive(Debug, Clone)]
pub struct ConcavityWitness {
    pub p1: Coupling,
    pub p2: Coupling,
    /// `P1 - P2`.
    pub q: DiffPlan,
    /// `f((P1+P2)/2) - ½(f(P1) + f(P2))`.
    pub midpoint_gap: f64,
    pub epsilon: f64,
    /// Eigenvalue of `H h1(C) H` used for the row direction.
    pub mu: f64,
    /// Eigenvalue of `-H h2(C̄) H` used for the column direction.
    pub lambda: f64,
}

/// Builds `P1, P2 = abᵀ ± εQ` with `Q = u vᵀ`, where `u` and `v` are zero-sum
/// eigenvectors of `H h1(C) H` and `-H h2(C̄) H` whose eigenvalues have the
/// same sign. Then `tr(QᵀC1QC2) = μλ > 0` and the midpoint gap is
/// `-¼ (2ε)² μλ < 0`. `ε` is half of `min a_i b_j / |Q_ij|`.
///
/// Candidate pairs are tried by decreasing `|μλ|`.
pub fn build_concavity_witness(
    loss: &SeparableLoss,
    c: &CostMatrix,
    cb: &CostMatrix,
    a: &Histogram,
    b: &Histogram,
) -> Result<ConcavityWitness> {
    let report = separable_concavity_check(loss, c, cb)?;
    if report.concave {
        return Err(Error::NoWitness);
    }
    if a.len() != c.nrows() || b.len() != cb.nrows() {
        return Err(Error::DimensionMismatch {
            expected: format!("histograms of length {} and {}", c.nrows(), cb.nrows()),
            found: format!("{} and {}", a.len(), b.len()),
        });
    }
    if a.weights().iter().chain(b.weights()).any(|w| *w <= 0.0) {
        return Err(Error::InvalidArgument(
            "witness construction needs strictly positive weights".into(),
        ));
    }
    let cost = SeparableCost::new(*loss, c.clone(), cb.clone())?;
    let c1 = loss.map_h1(c.matrix());
    let c2 = -loss.map_h2(cb.matrix());
    let (tol1, tol2) = (report.h1.tol, report.h2.tol);
    let rows = centered_eigenpairs(&c1);
    let cols = centered_eigenpairs(&c2);

    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (s, (mu, _)) in rows.iter().enumerate() {
        for (t, (lam, _)) in cols.iter().enumerate() {
            if mu * lam > 0.0 && mu.abs() > tol1 && lam.abs() > tol2 {
                candidates.push((mu * lam, s, t));
            }
        }
    }
    candidates.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));

    let base = product_coupling(a, b);
    for (_, s, t) in candidates {
        let (mu, u) = &rows[s];
        let (lambda, v) = &cols[t];
        let q = u * v.transpose();
        if q.amax() < 1e-12 {
            continue;
        }
        let mut bound = f64::INFINITY;
        for i in 0..q.nrows() {
            for j in 0..q.ncols() {
                let qa = q[(i, j)].abs();
                if qa > 1e-15 {
                    bound = bound.min(a[i] * b[j] / qa);
                }
            }
        }
        let epsilon = 0.5 * bound;
        let p1 = Coupling::new(base.matrix() + &q * epsilon, a, b)?;
        let p2 = Coupling::new(base.matrix() - &q * epsilon, a, b)?;
        let mid = (p1.matrix() + p2.matrix()) * 0.5;
        let midpoint_gap = cost.quadratic(&mid)
            - 0.5 * (cost.quadratic(p1.matrix()) + cost.quadratic(p2.matrix()));
        if midpoint_gap < -1e-12 {
            let q = DiffPlan::between(&p1, &p2)?;
            return Ok(ConcavityWitness {
                p1,
                p2,
                q,
                midpoint_gap,
                epsilon,
                mu: *mu,
                lambda: *lambda,
            });
        }
    }
    Err(Error::InvalidArgument(
        "no eigenpair produced a numerically significant witness".into(),
    ))
}

#[derive(Debug, Clone)]
pub enum SampleVerdict {
    /// `⟨L ⊗ Q, Q⟩ > 1e-9` for the recorded difference plan.
    Refuted {
        trial: usize,
        q: DiffPlan,
        value: f64,
    },
    NotRefuted {
        trials: usize,
    },
}

impl SampleVerdict {
    pub fn is_refuted(&self) -> bool {
        matches!(self, SampleVerdict::Refuted { .. })
    }
}

/// Tries to refute the CND property of a symmetric tensor by sampling coupling
/// pairs (random vertices and random mixtures). A refuter only: surviving all
/// trials proves nothing.
pub fn tensor_cnd_sample_check<L: QuadCost + ?Sized>(
    l: &L,
    a: &Histogram,
    b: &Histogram,
    trials: usize,
    seed: u64,
) -> Result<SampleVerdict> {
    if !l.is_symmetric() {
        return Err(Error::InvalidArgument("tensor must be symmetric".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be >= 1".into()));
    }
    let (n, m) = l.shape();
    if a.len() != n || b.len() != m {
        return Err(Error::DimensionMismatch {
            expected: format!("histograms of length {n} and {m}"),
            found: format!("{} and {}", a.len(), b.len()),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let p1 = random_plan(&mut rng, a, b);
        let p2 = if rng.random_bool(0.1) {
            p1.clone()
        } else {
            random_plan(&mut rng, a, b)
        };
        let q = p1.matrix() - p2.matrix();
        if q.amax() <= 1e-14 {
            continue;
        }
        let value = l.quadratic(&q);
        if value > 1e-9 {
            return Ok(SampleVerdict::Refuted {
                trial,
                q: DiffPlan::new(q)?,
                value,
            });
        }
    }
    Ok(SampleVerdict::NotRefuted { trials })
}
