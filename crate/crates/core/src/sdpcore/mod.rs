//! Dense primal-dual interior-point solver for block SDPs.
//!
//! Canonical problem form (minimization):
//!
//! ```text
//! min  sum_B <C_B, X_B> + c_f . x_f
//! s.t. sum_B <A_rB, X_B> + a_rf . x_f = b_r,  r = 1..m
//!      X_B >= 0 (PSD blocks),  x_f free
//! ```
//!
//! Symmetric matrices are addressed by their upper triangle: a coefficient
//! `c` on entry `(i, j)` with `i < j` denotes the linear term `c * X_ij` of
//! the symmetric matrix `X` (equivalently, the data matrix has
//! `A_ij = A_ji = c/2`), and a coefficient on `(i, i)` denotes `c * X_ii`.
//!
//! The algorithm is primal-dual path following with Nesterov-Todd scaling
//! and a Mehrotra predictor-corrector, assembling a dense Schur complement
//! each iteration. Free variables stay inside the Newton system: the
//! augmented KKT matrix `[[M, A_f], [A_f^T, -delta I]]` is factorized with
//! `delta = 1e-9` on the free diagonal whenever the Schur complement `M` is
//! not safely positive definite; otherwise the free block is eliminated
//! through two Cholesky solves. Intended scale: total PSD dimension in the
//! low hundreds, equality counts in the low thousands.

mod certificate;
mod solver;

pub use certificate::{check_certificate, CertificateReport};
pub use solver::solve;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Reference to one scalar entry of the block variable vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntryRef {
    /// Upper-triangle entry `(i, j)`, `i <= j`, of a PSD block.
    Psd { block: usize, i: usize, j: usize },
    /// Component `k` of a free block.
    Free { block: usize, k: usize },
}

/// One linear equality `sum coeff * entry = rhs`.
#[derive(Clone, Debug, Default)]
pub struct SparseRow {
    pub entries: Vec<(EntryRef, f64)>,
    pub rhs: f64,
}

/// Block SDP with PSD blocks, free blocks and linear equality rows.
#[derive(Clone, Debug, Default)]
pub struct SdpProblem {
    /// `(label, side length)` per PSD block.
    pub psd_blocks: Vec<(String, usize)>,
    /// `(label, length)` per free block.
    pub free_blocks: Vec<(String, usize)>,
    pub rows: Vec<SparseRow>,
    /// Linear objective, minimized.
    pub objective: Vec<(EntryRef, f64)>,
}

impl SdpProblem {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn psd_dim(&self) -> usize {
        self.psd_blocks.iter().map(|(_, k)| k).sum()
    }

    pub fn free_dim(&self) -> usize {
        self.free_blocks.iter().map(|(_, k)| k).sum()
    }

    fn check_entry(&self, e: &EntryRef) -> Result<(), SdpError> {
        match *e {
            EntryRef::Psd { block, i, j } => {
                let dim = self
                    .psd_blocks
                    .get(block)
                    .ok_or(SdpError::UnknownBlock(block))?
                    .1;
                if i > j || j >= dim {
                    return Err(SdpError::BadIndex(block, i, j));
                }
            }
            EntryRef::Free { block, k } => {
                let len = self
                    .free_blocks
                    .get(block)
                    .ok_or(SdpError::UnknownBlock(block))?
                    .1;
                if k >= len {
                    return Err(SdpError::BadIndex(block, k, k));
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), SdpError> {
        for row in &self.rows {
            for (e, c) in &row.entries {
                self.check_entry(e)?;
                if !c.is_finite() {
                    return Err(SdpError::NonFiniteData);
                }
            }
            if !row.rhs.is_finite() {
                return Err(SdpError::NonFiniteData);
            }
        }
        for (e, c) in &self.objective {
            self.check_entry(e)?;
            if !c.is_finite() {
                return Err(SdpError::NonFiniteData);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("row references undeclared block {0}")]
    UnknownBlock(usize),
    #[error("entry index out of range in block {0}: ({1}, {2})")]
    BadIndex(usize, usize, usize),
    #[error("problem data contains non-finite values")]
    NonFiniteData,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIter,
    NumericalFailure,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::MaxIter => "max_iter",
            SolveStatus::NumericalFailure => "numerical_failure",
        };
        write!(f, "{s}")
    }
}

/// Relative KKT residuals: primal feasibility, dual feasibility, duality gap.
#[derive(Clone, Copy, Debug)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

/// One line of the iteration log.
#[derive(Clone, Copy, Debug)]
pub struct IterationLog {
    pub iter: usize,
    pub mu: f64,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub primal_res: f64,
    pub dual_res: f64,
    pub gap: f64,
    pub step_primal: f64,
    pub step_dual: f64,
}

impl std::fmt::Display for IterationLog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "iter={} mu={:.3e} pobj={:.9e} dobj={:.9e} rp={:.3e} rd={:.3e} gap={:.3e} ap={:.3} ad={:.3}",
            self.iter,
            self.mu,
            self.primal_obj,
            self.dual_obj,
            self.primal_res,
            self.dual_res,
            self.gap,
            self.step_primal,
            self.step_dual
        )
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub psd_values: Vec<DMatrix<f64>>,
    pub free_values: Vec<DVector<f64>>,
    /// Dual slack matrix per PSD block.
    pub dual_slacks: Vec<DMatrix<f64>>,
    /// One dual multiplier per equality row.
    pub dual_multipliers: DVector<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub residuals: Residuals,
    pub iterations: usize,
    pub log: Vec<IterationLog>,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Target for all three relative residuals.
    pub tol: f64,
    pub max_iter: usize,
    /// Fraction of the step to the cone boundary.
    pub step_fraction: f64,
    /// Print iteration log lines to stdout.
    pub verbose: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-8,
            max_iter: 200,
            step_fraction: 0.98,
            verbose: false,
        }
    }
}
