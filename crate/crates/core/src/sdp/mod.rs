//! Dense semidefinite programming over Hermitian matrices.
//!
//! Problems have the form
//!
//! ```text
//! maximize   Re tr(C Y)
//! subject to Re tr(A_k Y) = b_k,  k = 1..m
//!            Y ⪰ 0
//! ```
//!
//! and are solved by a primal-dual interior-point method on the real
//! symmetric embedding `[[Re H, -Im H], [Im H, Re H]]`. The dual is
//!
//! ```text
//! minimize   b^T y
//! subject to S = Σ_k y_k A_k - C ⪰ 0
//! ```
//!
//! Problems can be written to and read from a plain-text triplet format, see
//! [`triplet`].

mod solver;
pub mod triplet;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{invalid, Result};

pub use solver::solve;

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    m: DMatrix<Complex64>,
}

impl HermitianMatrix {
    /// Accepts a square matrix equal to its conjugate transpose up to
    /// `1e-12` relative to its largest entry, and symmetrizes it exactly.
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() {
            return Err(invalid(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
        }
        if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(invalid("matrix entries must be finite"));
        }
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let n = m.nrows();
        for i in 0..n {
            for j in i..n {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > 1e-12 * scale {
                    return Err(invalid(format!("matrix is not Hermitian at ({i}, {j})")));
                }
            }
        }
        let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(Self { m: h })
    }

    pub fn from_real(m: DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn zeros(n: usize) -> Self {
        Self { m: DMatrix::zeros(n, n) }
    }

    pub fn identity(n: usize) -> Self {
        Self { m: DMatrix::identity(n, n) }
    }

    /// Matrix with the given upper-triangle entries and their conjugate mirrors.
    /// Diagonal entries keep only their real part.
    pub fn from_entries(n: usize, entries: &[(usize, usize, Complex64)]) -> Result<Self> {
        let mut m = DMatrix::zeros(n, n);
        for &(i, j, z) in entries {
            if i >= n || j >= n {
                return Err(invalid(format!("entry ({i}, {j}) outside dimension {n}")));
            }
            if i == j {
                m[(i, i)] = Complex64::new(z.re, 0.0);
            } else {
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        Self::new(m)
    }

    /// Rank-one matrix `v v^H`.
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        Self { m: DMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj()) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    /// `Re tr(self · other)`, equal to the Frobenius inner product.
    pub fn inner(&self, other: &HermitianMatrix) -> f64 {
        self.m.iter().zip(other.m.iter()).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self { m: &self.m * Complex64::new(t, 0.0) }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.m.clone()).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Eigenvalues in ascending order with unit eigenvectors as columns.
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<Complex64>) {
        let e = SymmetricEigen::new(self.m.clone());
        let mut idx: Vec<usize> = (0..self.dim()).collect();
        idx.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
        let values = idx.iter().map(|&k| e.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |i, j| e.eigenvectors[(i, idx[j])]);
        (values, vectors)
    }
}

/// Real symmetric embedding `[[Re H, -Im H], [Im H, Re H]]`.
///
/// `tr(emb(A) emb(B)) = 2 Re tr(A B)`, and `emb(H)` is PSD exactly when
/// `H` is, with every eigenvalue of `H` appearing twice.
pub fn real_embedding(h: &HermitianMatrix) -> DMatrix<f64> {
    let n = h.dim();
    let mut r = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h.m[(i, j)];
            r[(i, j)] = z.re;
            r[(i + n, j + n)] = z.re;
            r[(i, j + n)] = -z.im;
            r[(i + n, j)] = z.im;
        }
    }
    r
}

/// Hermitian matrix whose embedding is closest to `r` in Frobenius norm.
pub fn real_unembedding(r: &DMatrix<f64>) -> HermitianMatrix {
    let n = r.nrows() / 2;
    let m = DMatrix::from_fn(n, n, |i, j| {
        Complex64::new(
            0.5 * (r[(i, j)] + r[(i + n, j + n)]),
            0.5 * (r[(i + n, j)] - r[(i, j + n)]),
        )
    });
    HermitianMatrix { m: (&m + m.adjoint()) * Complex64::new(0.5, 0.0) }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    objective: HermitianMatrix,
    constraints: Vec<(HermitianMatrix, f64)>,
}

impl SdpProblem {
    pub fn new(objective: HermitianMatrix, constraints: Vec<(HermitianMatrix, f64)>) -> Result<Self> {
        let n = objective.dim();
        if n == 0 {
            return Err(invalid("problem dimension must be at least 1"));
        }
        if constraints.is_empty() {
            return Err(invalid("at least one equality constraint is required"));
        }
        for (k, (a, b)) in constraints.iter().enumerate() {
            if a.dim() != n {
                return Err(invalid(format!("constraint {k} has dimension {}, expected {n}", a.dim())));
            }
            if !b.is_finite() {
                return Err(invalid(format!("constraint {k} has non-finite right-hand side")));
            }
        }
        Ok(Self { objective, constraints })
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &HermitianMatrix {
        &self.objective
    }

    pub fn constraints(&self) -> &[(HermitianMatrix, f64)] {
        &self.constraints
    }

    /// `Re tr(C Y)`.
    pub fn objective_at(&self, y: &HermitianMatrix) -> f64 {
        self.objective.inner(y)
    }

    /// Largest `|tr(A_k Y) - b_k| / (1 + |b_k|)`.
    pub fn primal_residual(&self, y: &HermitianMatrix) -> f64 {
        self.constraints
            .iter()
            .map(|(a, b)| (a.inner(y) - b).abs() / (1.0 + b.abs()))
            .fold(0.0, f64::max)
    }

    /// Dual slack `Σ_k y_k A_k - C`, returned unchecked for PSD-ness.
    pub fn dual_slack(&self, y: &[f64]) -> HermitianMatrix {
        let mut s = -self.objective.m.clone();
        for ((a, _), &yk) in self.constraints.iter().zip(y) {
            s += &a.m * Complex64::new(yk, 0.0);
        }
        HermitianMatrix { m: s }
    }

    pub fn dual_objective(&self, y: &[f64]) -> f64 {
        self.constraints.iter().zip(y).map(|((_, b), yk)| b * yk).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpTolerances {
    /// Relative duality gap at which iteration stops.
    pub gap: f64,
    /// Relative primal and dual infeasibility at which iteration stops.
    pub feasibility: f64,
    pub max_iterations: usize,
}

impl Default for SdpTolerances {
    fn default() -> Self {
        Self { gap: 1e-9, feasibility: 1e-10, max_iterations: 200 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub y: HermitianMatrix,
    /// Dual slack `S = Σ_k y_k A_k - C`.
    pub slack: HermitianMatrix,
    pub objective_value: f64,
    pub dual_objective: f64,
    pub dual_values: Vec<f64>,
    /// Largest `|tr(A_k Y) - b_k| / (1 + |b_k|)`.
    pub primal_residual: f64,
    /// `||smallest negative part of S||` relative to `1 + ||C||`, zero when `S ⪰ 0`.
    pub dual_residual: f64,
    /// `|b^T y - tr(C Y)|`.
    pub duality_gap: f64,
    pub status: SdpStatus,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SdpStatus::Optimal
    }
}
