use nalgebra::{DMatrix, DVector};

use super::{EntryRef, SdpProblem, SdpSolution};

/// KKT residuals recomputed from the raw problem data, independent of any
/// solver bookkeeping.
#[derive(Clone, Copy, Debug)]
pub struct CertificateReport {
    pub primal_residual_abs: f64,
    pub primal_residual_rel: f64,
    pub dual_residual_abs: f64,
    pub dual_residual_rel: f64,
    pub gap_abs: f64,
    pub gap_rel: f64,
    /// Smallest eigenvalue over all primal PSD blocks.
    pub min_primal_eig: f64,
    /// Smallest eigenvalue over all dual slack blocks.
    pub min_dual_eig: f64,
}

fn dense_sym(dim: usize, entries: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(dim, dim);
    for &(i, j, v) in entries {
        if i == j {
            a[(i, i)] += v;
        } else {
            a[(i, j)] += v / 2.0;
            a[(j, i)] += v / 2.0;
        }
    }
    a
}

/// Recompute all residuals of a solution from scratch.
pub fn check_certificate(problem: &SdpProblem, solution: &SdpSolution) -> CertificateReport {
    let m = problem.rows.len();
    let free_offsets: Vec<usize> = problem
        .free_blocks
        .iter()
        .scan(0usize, |acc, (_, len)| {
            let off = *acc;
            *acc += len;
            Some(off)
        })
        .collect();
    let nf: usize = problem.free_blocks.iter().map(|(_, l)| l).sum();
    let mut xf: DVector<f64> = DVector::zeros(nf);
    for (bi, v) in solution.free_values.iter().enumerate() {
        xf.rows_mut(free_offsets[bi], v.len()).copy_from(v);
    }

    // primal: A(X, xf) - b
    let mut b: DVector<f64> = DVector::zeros(m);
    let mut ax: DVector<f64> = DVector::zeros(m);
    for (r, row) in problem.rows.iter().enumerate() {
        b[r] = row.rhs;
        for (e, c) in &row.entries {
            ax[r] += match *e {
                EntryRef::Psd { block, i, j } => c * solution.psd_values[block][(i, j)],
                EntryRef::Free { block, k } => c * xf[free_offsets[block] + k],
            };
        }
    }
    let primal_residual_abs = (&ax - &b).norm();
    let primal_residual_rel = primal_residual_abs / (1.0 + b.norm());

    // dual: C - S - A^T lam per PSD block, c_f - Af^T lam for the free part
    let lam = &solution.dual_multipliers;
    let mut c_mats: Vec<DMatrix<f64>> = problem
        .psd_blocks
        .iter()
        .map(|(_, d)| DMatrix::zeros(*d, *d))
        .collect();
    let mut cf: DVector<f64> = DVector::zeros(nf);
    for (e, c) in &problem.objective {
        match *e {
            EntryRef::Psd { block, i, j } => {
                if i == j {
                    c_mats[block][(i, i)] += c;
                } else {
                    c_mats[block][(i, j)] += c / 2.0;
                    c_mats[block][(j, i)] += c / 2.0;
                }
            }
            EntryRef::Free { block, k } => cf[free_offsets[block] + k] += c,
        }
    }
    let mut rd: Vec<DMatrix<f64>> = c_mats
        .iter()
        .zip(&solution.dual_slacks)
        .map(|(c, s)| c - s)
        .collect();
    let mut rf = cf.clone();
    for (r, row) in problem.rows.iter().enumerate() {
        for (e, c) in &row.entries {
            match *e {
                EntryRef::Psd { block, i, j } => {
                    let entries = [(i, j, *c)];
                    let a = dense_sym(problem.psd_blocks[block].1, &entries);
                    rd[block] -= a * lam[r];
                }
                EntryRef::Free { block, k } => rf[free_offsets[block] + k] -= c * lam[r],
            }
        }
    }
    let c_norm = c_mats
        .iter()
        .map(|c| c.norm())
        .fold(cf.norm(), f64::max);
    let rd_sq: f64 = rd.iter().map(|m| m.norm_squared()).sum();
    let dual_residual_abs = (rd_sq + rf.norm_squared()).sqrt();
    let dual_residual_rel = dual_residual_abs / (1.0 + c_norm);

    let pobj: f64 = c_mats
        .iter()
        .zip(&solution.psd_values)
        .map(|(c, x)| c.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>())
        .sum::<f64>()
        + cf.dot(&xf);
    let dobj = b.dot(lam);
    let gap_abs = (pobj - dobj).abs();
    let gap_rel = gap_abs / (1.0 + pobj.abs() + dobj.abs());

    let min_eig = |mats: &[DMatrix<f64>]| {
        mats.iter()
            .filter(|m| m.nrows() > 0)
            .map(|m| m.clone().symmetric_eigenvalues().min())
            .fold(f64::INFINITY, f64::min)
    };

    CertificateReport {
        primal_residual_abs,
        primal_residual_rel,
        dual_residual_abs,
        dual_residual_rel,
        gap_abs,
        gap_rel,
        min_primal_eig: min_eig(&solution.psd_values),
        min_dual_eig: min_eig(&solution.dual_slacks),
    }
}
