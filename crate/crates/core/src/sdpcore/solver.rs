//! Nesterov-Todd predictor-corrector iteration.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{
    EntryRef, IterationLog, Residuals, SdpError, SdpProblem, SdpSolution, SolveOptions,
    SolveStatus,
};

/// Per-block constraint data in dense-friendly form.
struct BlockData {
    dim: usize,
    c: DMatrix<f64>,
    /// rows touching this block, ascending row index, with stored
    /// upper-triangle entries `(i, j, coeff)`
    rows: Vec<(usize, Vec<(usize, usize, f64)>)>,
}

struct Workspace {
    blocks: Vec<BlockData>,
    af: DMatrix<f64>,
    cf: DVector<f64>,
    b: DVector<f64>,
    m: usize,
    nf: usize,
    k_total: usize,
    /// Frobenius norm of each row's coefficient vector.
    row_norms: Vec<f64>,
    c_norm: f64,
}

impl Workspace {
    fn build(p: &SdpProblem) -> Self {
        let m = p.rows.len();
        let free_offsets: Vec<usize> = p
            .free_blocks
            .iter()
            .scan(0usize, |acc, (_, len)| {
                let off = *acc;
                *acc += len;
                Some(off)
            })
            .collect();
        let nf: usize = p.free_blocks.iter().map(|(_, l)| l).sum();

        let mut blocks: Vec<BlockData> = p
            .psd_blocks
            .iter()
            .map(|(_, dim)| BlockData {
                dim: *dim,
                c: DMatrix::zeros(*dim, *dim),
                rows: Vec::new(),
            })
            .collect();
        let mut af = DMatrix::zeros(m, nf);
        let mut b = DVector::zeros(m);
        let mut row_norms = vec![0.0f64; m];

        for (r, row) in p.rows.iter().enumerate() {
            b[r] = row.rhs;
            let mut per_block: Vec<Vec<(usize, usize, f64)>> =
                vec![Vec::new(); blocks.len()];
            for (e, coeff) in &row.entries {
                match *e {
                    EntryRef::Psd { block, i, j } => {
                        per_block[block].push((i, j, *coeff));
                        let sq = if i == j {
                            coeff * coeff
                        } else {
                            coeff * coeff / 2.0
                        };
                        row_norms[r] += sq;
                    }
                    EntryRef::Free { block, k } => {
                        af[(r, free_offsets[block] + k)] += coeff;
                        row_norms[r] += coeff * coeff;
                    }
                }
            }
            row_norms[r] = row_norms[r].sqrt();
            for (bidx, entries) in per_block.into_iter().enumerate() {
                if !entries.is_empty() {
                    blocks[bidx].rows.push((r, entries));
                }
            }
        }

        let mut cf = DVector::zeros(nf);
        for (e, coeff) in &p.objective {
            match *e {
                EntryRef::Psd { block, i, j } => {
                    let c = &mut blocks[block].c;
                    if i == j {
                        c[(i, i)] += coeff;
                    } else {
                        c[(i, j)] += coeff / 2.0;
                        c[(j, i)] += coeff / 2.0;
                    }
                }
                EntryRef::Free { block, k } => cf[free_offsets[block] + k] += coeff,
            }
        }

        let k_total: usize = p.psd_blocks.iter().map(|(_, d)| d).sum();
        let c_norm = blocks
            .iter()
            .map(|bd| bd.c.norm())
            .fold(cf.norm(), f64::max);
        Workspace {
            blocks,
            af,
            cf,
            b,
            m,
            nf,
            k_total,
            row_norms,
            c_norm,
        }
    }

    /// `sum_B <A_rB, X_B> + a_rf . x_f` for every row.
    fn apply_a(&self, x: &[DMatrix<f64>], xf: &DVector<f64>) -> DVector<f64> {
        let mut out = if self.nf > 0 {
            &self.af * xf
        } else {
            DVector::zeros(self.m)
        };
        for (bd, xb) in self.blocks.iter().zip(x) {
            for (r, entries) in &bd.rows {
                out[*r] += dot_entries(entries, xb);
            }
        }
        out
    }

    /// `C_B - S_B - sum_r lam_r A_rB` per block.
    fn dual_residual(&self, s: &[DMatrix<f64>], lam: &DVector<f64>) -> Vec<DMatrix<f64>> {
        self.blocks
            .iter()
            .zip(s)
            .map(|(bd, sb)| {
                let mut rd = &bd.c - sb;
                for (r, entries) in &bd.rows {
                    scatter_entries(entries, -lam[*r], &mut rd);
                }
                rd
            })
            .collect()
    }
}

/// `sum stored_coeff * t_ij` — the inner product `<A, T>` for symmetric `T`
/// under the upper-triangle storage convention.
fn dot_entries(entries: &[(usize, usize, f64)], t: &DMatrix<f64>) -> f64 {
    entries.iter().map(|&(i, j, v)| v * t[(i, j)]).sum()
}

/// Accumulate `scale * A` into `out` as a dense symmetric matrix.
fn scatter_entries(entries: &[(usize, usize, f64)], scale: f64, out: &mut DMatrix<f64>) {
    for &(i, j, v) in entries {
        if i == j {
            out[(i, i)] += scale * v;
        } else {
            out[(i, j)] += scale * v / 2.0;
            out[(j, i)] += scale * v / 2.0;
        }
    }
}

/// `W A W` via rank-one updates with the columns of `W` (`A` sparse
/// symmetric, `W` dense symmetric).
fn waw(w: &DMatrix<f64>, entries: &[(usize, usize, f64)]) -> DMatrix<f64> {
    let k = w.nrows();
    let mut t = DMatrix::zeros(k, k);
    for &(i, j, v) in entries {
        let wi = w.column(i);
        let wj = w.column(j);
        if i == j {
            t.ger(v, &wi, &wj, 1.0);
        } else {
            t.ger(v / 2.0, &wi, &wj, 1.0);
            t.ger(v / 2.0, &wj, &wi, 1.0);
        }
    }
    t
}

fn sym_dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let k = m.nrows();
    for i in 0..k {
        for j in (i + 1)..k {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Largest step `alpha <= 1` with `D + alpha * Mhat >= 0`, where `D` is the
/// diagonal NT point.
fn step_to_boundary(d: &DVector<f64>, mhat: &DMatrix<f64>) -> f64 {
    let k = d.len();
    let mut p = mhat.clone();
    for i in 0..k {
        for j in 0..k {
            p[(i, j)] /= (d[i] * d[j]).sqrt();
        }
    }
    symmetrize(&mut p);
    let eigs = p.symmetric_eigenvalues();
    let min = eigs.min();
    if min >= -1e-14 {
        1.0
    } else {
        (-1.0 / min).min(1.0)
    }
}

struct NtScaling {
    g: DMatrix<f64>,
    w: DMatrix<f64>,
    d: DVector<f64>,
}

/// NT scaling point: `G` with `W = G G^T`, `W S W = X`, and
/// `G^{-1} X G^{-T} = G^T S G = diag(d)`.
fn nt_scaling(x: &DMatrix<f64>, s: &DMatrix<f64>) -> Option<NtScaling> {
    let lx = Cholesky::new(x.clone())?.l();
    let ls = Cholesky::new(s.clone())?.l();
    let prod = ls.transpose() * &lx;
    let svd = prod.svd(true, true);
    let vt = svd.v_t?;
    let sv = svd.singular_values;
    if sv.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
        return None;
    }
    let k = x.nrows();
    let mut v_scaled = vt.transpose();
    for j in 0..k {
        let s_inv_sqrt = 1.0 / sv[j].sqrt();
        for i in 0..k {
            v_scaled[(i, j)] *= s_inv_sqrt;
        }
    }
    let g = lx * v_scaled;
    let w = &g * g.transpose();
    Some(NtScaling { g, w, d: sv })
}

enum KktKernel {
    /// Schur complement is PD: eliminate the free block with two Choleskys.
    Chol {
        chol_m: Cholesky<f64, Dyn>,
        f: DMatrix<f64>,
        chol_f: Option<Cholesky<f64, Dyn>>,
    },
    /// Augmented KKT `[[M, Af], [Af^T, -delta I]]` with LU.
    Lu {
        lu: nalgebra::LU<f64, Dyn, Dyn>,
        m_rows: usize,
    },
}

struct KktFactor {
    kernel: KktKernel,
    msc: DMatrix<f64>,
    af: DMatrix<f64>,
}

const FREE_REG: f64 = 1e-9;

fn factor_kkt(msc: DMatrix<f64>, af: &DMatrix<f64>, nf: usize) -> Option<KktFactor> {
    if let Some(chol_m) = Cholesky::new(msc.clone()) {
        match if nf > 0 {
            let f = chol_m.solve(af);
            let sf = af.transpose() * &f;
            Cholesky::new(sf).map(|c| (f, Some(c)))
        } else {
            Some((DMatrix::zeros(0, 0), None))
        } {
            Some((f, chol_f)) => {
                return Some(KktFactor {
                    kernel: KktKernel::Chol { chol_m, f, chol_f },
                    msc,
                    af: af.clone(),
                })
            }
            None => return factor_augmented(msc, af, nf),
        }
    }
    factor_augmented(msc, af, nf)
}

fn factor_augmented(msc: DMatrix<f64>, af: &DMatrix<f64>, nf: usize) -> Option<KktFactor> {
    let m = msc.nrows();
    let mut k = DMatrix::zeros(m + nf, m + nf);
    k.view_mut((0, 0), (m, m)).copy_from(&msc);
    if nf > 0 {
        k.view_mut((0, m), (m, nf)).copy_from(af);
        k.view_mut((m, 0), (nf, m)).copy_from(&af.transpose());
        for i in 0..nf {
            k[(m + i, m + i)] = -FREE_REG;
        }
    }
    // mild diagonal lift keeps the factorization alive near the optimum
    for i in 0..m {
        k[(i, i)] += 1e-13 * (1.0 + k[(i, i)].abs());
    }
    let lu = k.lu();
    Some(KktFactor {
        kernel: KktKernel::Lu { lu, m_rows: m },
        msc,
        af: af.clone(),
    })
}

impl KktFactor {
    fn solve_once(
        &self,
        rhs1: &DVector<f64>,
        rhs2: &DVector<f64>,
    ) -> Option<(DVector<f64>, DVector<f64>)> {
        match &self.kernel {
            KktKernel::Chol { chol_m, f, chol_f } => {
                let t1 = chol_m.solve(rhs1);
                match chol_f {
                    Some(cf) => {
                        let rhs_f = f.transpose() * rhs1 - rhs2;
                        let dxf = cf.solve(&rhs_f);
                        let dlam = t1 - f * &dxf;
                        Some((dlam, dxf))
                    }
                    None => Some((t1, DVector::zeros(0))),
                }
            }
            KktKernel::Lu { lu, m_rows } => {
                let m = *m_rows;
                let nf = rhs2.len();
                let mut rhs = DVector::zeros(m + nf);
                rhs.rows_mut(0, m).copy_from(rhs1);
                rhs.rows_mut(m, nf).copy_from(rhs2);
                let sol = lu.solve(&rhs)?;
                Some((sol.rows(0, m).into_owned(), sol.rows(m, nf).into_owned()))
            }
        }
    }

    /// Solve with two rounds of iterative refinement against the exact
    /// (unregularized) KKT system; this removes both the `delta`
    /// perturbation and the accuracy floor of an ill-conditioned Schur
    /// complement near the optimum.
    fn solve(
        &self,
        rhs1: &DVector<f64>,
        rhs2: &DVector<f64>,
    ) -> Option<(DVector<f64>, DVector<f64>)> {
        let nf = rhs2.len();
        let (mut dlam, mut dxf) = self.solve_once(rhs1, rhs2)?;
        for _ in 0..2 {
            let mut r1 = rhs1 - &self.msc * &dlam;
            if nf > 0 {
                r1 -= &self.af * &dxf;
            }
            let r2 = if nf > 0 {
                rhs2 - self.af.transpose() * &dlam
            } else {
                DVector::zeros(0)
            };
            let (e1, e2) = self.solve_once(&r1, &r2)?;
            dlam += e1;
            dxf += e2;
        }
        Some((dlam, dxf))
    }
}

/// Solve a block SDP.
///
/// Initial point: `X_B = xi_p I`, `S_B = xi_d I`, `x_f = 0`, `lambda = 0`
/// with `xi_p = min(1e6, max(10, sqrt(K), K * max_r (1+|b_r|)/(1+|A_r|_F)))`
/// and `xi_d = min(1e6, max(10, sqrt(K), |C|_F, max_r |A_r|_F / sqrt(K)))`,
/// where `K` is the total PSD dimension. Runs are deterministic: identical
/// input yields bit-identical iterates.
pub fn solve(problem: &SdpProblem, opts: &SolveOptions) -> Result<SdpSolution, SdpError> {
    problem.validate()?;
    let ws = Workspace::build(problem);
    let kt = ws.k_total.max(1) as f64;

    let ratio = ws
        .row_norms
        .iter()
        .zip(ws.b.iter())
        .map(|(an, bv)| (1.0 + bv.abs()) / (1.0 + an))
        .fold(0.0f64, f64::max);
    let max_row_norm = ws.row_norms.iter().fold(0.0f64, |a, &x| a.max(x));
    let xi_p = (10.0f64.max(kt.sqrt()).max(kt * ratio)).min(1e6);
    let xi_d = (10.0f64
        .max(kt.sqrt())
        .max(ws.c_norm)
        .max(max_row_norm / kt.sqrt()))
    .min(1e6);

    let mut x: Vec<DMatrix<f64>> = ws
        .blocks
        .iter()
        .map(|bd| DMatrix::identity(bd.dim, bd.dim) * xi_p)
        .collect();
    let mut s: Vec<DMatrix<f64>> = ws
        .blocks
        .iter()
        .map(|bd| DMatrix::identity(bd.dim, bd.dim) * xi_d)
        .collect();
    let mut xf = DVector::zeros(ws.nf);
    let mut lam = DVector::zeros(ws.m);

    let init_scale = xi_p * kt.sqrt() + xi_d * kt.sqrt() + 1.0;
    let b_norm = ws.b.norm();
    let mut log: Vec<IterationLog> = Vec::new();
    let mut status = SolveStatus::MaxIter;
    let mut residuals = Residuals {
        primal: f64::INFINITY,
        dual: f64::INFINITY,
        gap: f64::INFINITY,
    };
    let mut pobj = 0.0;
    let mut dobj = 0.0;
    let mut iterations = 0;
    let mut stall_count = 0usize;
    // best-so-far iterate by worst relative residual; restored if the final
    // iterations degrade (ill-conditioned Schur complement near optimum)
    let mut best: Option<(f64, Vec<DMatrix<f64>>, Vec<DMatrix<f64>>, DVector<f64>, DVector<f64>, Residuals, f64, f64)> = None;

    for iter in 0..opts.max_iter {
        iterations = iter;
        let ax = ws.apply_a(&x, &xf);
        let rp = &ws.b - &ax;
        let rd = ws.dual_residual(&s, &lam);
        let rf = if ws.nf > 0 {
            &ws.cf - ws.af.transpose() * &lam
        } else {
            DVector::zeros(0)
        };

        pobj = ws
            .blocks
            .iter()
            .zip(&x)
            .map(|(bd, xb)| sym_dot(&bd.c, xb))
            .sum::<f64>()
            + ws.cf.dot(&xf);
        dobj = ws.b.dot(&lam);

        let rel_p = rp.norm() / (1.0 + b_norm);
        let rd_norm_sq: f64 = rd.iter().map(|m| m.norm_squared()).sum::<f64>() + rf.norm_squared();
        let rel_d = rd_norm_sq.sqrt() / (1.0 + ws.c_norm);
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let mu = ws
            .blocks
            .iter()
            .zip(x.iter().zip(&s))
            .map(|(_, (xb, sb))| sym_dot(xb, sb))
            .sum::<f64>()
            / kt;

        residuals = Residuals {
            primal: rel_p,
            dual: rel_d,
            gap: rel_gap,
        };

        let worst = rel_p.max(rel_d).max(rel_gap);
        if best.as_ref().is_none_or(|b| worst < b.0) {
            best = Some((
                worst,
                x.clone(),
                s.clone(),
                xf.clone(),
                lam.clone(),
                residuals,
                pobj,
                dobj,
            ));
        }

        if rel_p <= opts.tol && rel_d <= opts.tol && rel_gap <= opts.tol {
            status = SolveStatus::Optimal;
            break;
        }

        // complementarity has collapsed without meeting the residual target:
        // further NT steps only destabilize the factorization
        if mu < 1e-14 * (1.0 + pobj.abs() + dobj.abs()) {
            status = SolveStatus::NumericalFailure;
            break;
        }

        // divergence: certificate ratios beyond 1e8 declare in/unboundedness
        let iterate_scale = x.iter().map(|m| m.norm()).sum::<f64>()
            + s.iter().map(|m| m.norm()).sum::<f64>()
            + lam.norm()
            + xf.norm();
        if iterate_scale > 1e8 * init_scale {
            // dual ray: sum lam_r A_r + S = 0 with b.lam > 0
            let ray_res: f64 = rd
                .iter()
                .zip(&ws.blocks)
                .map(|(rdb, bd)| (&bd.c - rdb).norm_squared())
                .sum::<f64>()
                .sqrt()
                + if ws.nf > 0 { (&ws.cf - &rf).norm() } else { 0.0 };
            status = if dobj > 0.0 && dobj / ray_res.max(1e-300) > 1e8 {
                SolveStatus::Infeasible
            } else if pobj < 0.0 && -pobj / ax.norm().max(1e-300) > 1e8 {
                SolveStatus::Unbounded
            } else if dobj > 0.0 {
                SolveStatus::Infeasible
            } else {
                SolveStatus::Unbounded
            };
            break;
        }

        // NT scaling per block
        let mut scalings = Vec::with_capacity(ws.blocks.len());
        let mut scaling_ok = true;
        for (xb, sb) in x.iter().zip(&s) {
            match nt_scaling(xb, sb) {
                Some(nt) => scalings.push(nt),
                None => {
                    scaling_ok = false;
                    break;
                }
            }
        }
        if !scaling_ok {
            status = SolveStatus::NumericalFailure;
            break;
        }

        // Schur complement M[r,q] = sum_B <A_rB, W A_qB W>
        let mut msc = DMatrix::zeros(ws.m, ws.m);
        for (bd, nt) in ws.blocks.iter().zip(&scalings) {
            for (ri, (r, entries_r)) in bd.rows.iter().enumerate() {
                let t = waw(&nt.w, entries_r);
                for (q, entries_q) in &bd.rows[ri..] {
                    msc[(*r, *q)] += dot_entries(entries_q, &t);
                }
            }
        }
        for r in 0..ws.m {
            for q in (r + 1)..ws.m {
                msc[(q, r)] = msc[(r, q)];
            }
        }

        let Some(factor) = factor_kkt(msc, &ws.af, ws.nf) else {
            status = SolveStatus::NumericalFailure;
            break;
        };

        // one Newton solve for a given centering matrix RC per block
        let newton = |rc_tilde: &[DMatrix<f64>]| -> Option<NewtonDir> {
            let mut rhs1 = rp.clone();
            for (bidx, (bd, nt)) in ws.blocks.iter().zip(&scalings).enumerate() {
                // Z = G RC~ G^T - W Rd W
                let mut z = &nt.g * &rc_tilde[bidx] * nt.g.transpose();
                z -= &nt.w * &rd[bidx] * &nt.w;
                for (r, entries) in &bd.rows {
                    rhs1[*r] -= dot_entries(entries, &z);
                }
            }
            let (dlam, dxf) = factor.solve(&rhs1, &rf)?;
            let mut dxh = Vec::with_capacity(ws.blocks.len());
            let mut dsh = Vec::with_capacity(ws.blocks.len());
            let mut dx = Vec::with_capacity(ws.blocks.len());
            let mut ds = Vec::with_capacity(ws.blocks.len());
            for (bidx, (bd, nt)) in ws.blocks.iter().zip(&scalings).enumerate() {
                let mut dsb = rd[bidx].clone();
                for (r, entries) in &bd.rows {
                    scatter_entries(entries, -dlam[*r], &mut dsb);
                }
                symmetrize(&mut dsb);
                let mut dshb = nt.g.transpose() * &dsb * &nt.g;
                symmetrize(&mut dshb);
                let mut dxhb = &rc_tilde[bidx] - &dshb;
                symmetrize(&mut dxhb);
                let mut dxb = &nt.g * &dxhb * nt.g.transpose();
                symmetrize(&mut dxb);
                dxh.push(dxhb);
                dsh.push(dshb);
                dx.push(dxb);
                ds.push(dsb);
            }
            Some(NewtonDir {
                dlam,
                dxf,
                dx,
                ds,
                dxh,
                dsh,
            })
        };

        // predictor (affine scaling): RC = -D^2, so RC~ = -D
        let rc_aff: Vec<DMatrix<f64>> = scalings
            .iter()
            .map(|nt| -DMatrix::from_diagonal(&nt.d))
            .collect();
        let Some(aff) = newton(&rc_aff) else {
            status = SolveStatus::NumericalFailure;
            break;
        };

        let mut ap_aff: f64 = 1.0;
        let mut ad_aff: f64 = 1.0;
        for (nt, (dxhb, dshb)) in scalings.iter().zip(aff.dxh.iter().zip(&aff.dsh)) {
            ap_aff = ap_aff.min(step_to_boundary(&nt.d, dxhb));
            ad_aff = ad_aff.min(step_to_boundary(&nt.d, dshb));
        }

        // mu after the full affine step, in scaled space
        let mut mu_aff = 0.0;
        for (nt, (dxhb, dshb)) in scalings.iter().zip(aff.dxh.iter().zip(&aff.dsh)) {
            let dmat = DMatrix::from_diagonal(&nt.d);
            let xa = &dmat + dxhb.scale(ap_aff);
            let sa = &dmat + dshb.scale(ad_aff);
            mu_aff += sym_dot(&xa, &sa);
        }
        mu_aff /= kt;
        let sigma = ((mu_aff / mu).powi(3)).clamp(0.0, 1.0);

        // corrector: RC = sigma mu I - D^2 - H(dXh_aff dSh_aff)
        let rc_corr: Vec<DMatrix<f64>> = scalings
            .iter()
            .zip(aff.dxh.iter().zip(&aff.dsh))
            .map(|(nt, (dxhb, dshb))| {
                let k = nt.d.len();
                let cross = dxhb * dshb;
                let mut rc = DMatrix::from_fn(k, k, |i, j| -0.5 * (cross[(i, j)] + cross[(j, i)]));
                for i in 0..k {
                    rc[(i, i)] += sigma * mu - nt.d[i] * nt.d[i];
                }
                // divide by the Lyapunov factor (d_i + d_j)/2
                for i in 0..k {
                    for j in 0..k {
                        rc[(i, j)] *= 2.0 / (nt.d[i] + nt.d[j]);
                    }
                }
                rc
            })
            .collect();

        let Some(dir) = newton(&rc_corr) else {
            status = SolveStatus::NumericalFailure;
            break;
        };

        let mut ap: f64 = 1.0;
        let mut ad: f64 = 1.0;
        for (nt, (dxhb, dshb)) in scalings.iter().zip(dir.dxh.iter().zip(&dir.dsh)) {
            ap = ap.min(opts.step_fraction * step_to_boundary(&nt.d, dxhb));
            ad = ad.min(opts.step_fraction * step_to_boundary(&nt.d, dshb));
        }
        ap = ap.min(1.0);
        ad = ad.min(1.0);

        for (xb, dxb) in x.iter_mut().zip(&dir.dx) {
            *xb += dxb.scale(ap);
        }
        xf += dir.dxf.scale(ap);
        for (sb, dsb) in s.iter_mut().zip(&dir.ds) {
            *sb += dsb.scale(ad);
        }
        lam += dir.dlam.scale(ad);

        let line = IterationLog {
            iter,
            mu,
            primal_obj: pobj,
            dual_obj: dobj,
            primal_res: rel_p,
            dual_res: rel_d,
            gap: rel_gap,
            step_primal: ap,
            step_dual: ad,
        };
        if opts.verbose {
            println!("{line}");
        }
        log.push(line);

        if ap < 1e-7 && ad < 1e-7 {
            stall_count += 1;
            if stall_count >= 3 {
                status = SolveStatus::NumericalFailure;
                break;
            }
        } else {
            stall_count = 0;
        }
    }

    // hand back the best iterate seen if the tail of the run degraded
    if status != SolveStatus::Infeasible && status != SolveStatus::Unbounded {
        if let Some((bw, bx, bs, bxf, blam, bres, bp, bd)) = best {
            let current = residuals.primal.max(residuals.dual).max(residuals.gap);
            if bw < current {
                x = bx;
                s = bs;
                xf = bxf;
                lam = blam;
                residuals = bres;
                pobj = bp;
                dobj = bd;
            }
            if status != SolveStatus::Optimal
                && residuals.primal <= opts.tol
                && residuals.dual <= opts.tol
                && residuals.gap <= opts.tol
            {
                status = SolveStatus::Optimal;
            }
        }
    }

    // split the flattened free vector back into blocks
    let mut free_values = Vec::with_capacity(problem.free_blocks.len());
    let mut off = 0;
    for (_, len) in &problem.free_blocks {
        free_values.push(xf.rows(off, *len).into_owned());
        off += len;
    }

    Ok(SdpSolution {
        status,
        psd_values: x,
        free_values,
        dual_slacks: s,
        dual_multipliers: lam,
        primal_objective: pobj,
        dual_objective: dobj,
        residuals,
        iterations,
        log,
    })
}

struct NewtonDir {
    dlam: DVector<f64>,
    dxf: DVector<f64>,
    dx: Vec<DMatrix<f64>>,
    ds: Vec<DMatrix<f64>>,
    dxh: Vec<DMatrix<f64>>,
    dsh: Vec<DMatrix<f64>>,
}

#[cfg(test)]
mod tests {
    use super::super::*;

    fn psd(block: usize, i: usize, j: usize) -> EntryRef {
        EntryRef::Psd { block, i, j }
    }

    fn free(block: usize, k: usize) -> EntryRef {
        EntryRef::Free { block, k }
    }

    /// min x s.t. x >= 1, written with a 1x1 PSD slack: x - xs = 1.
    pub(crate) fn lower_bound_problem() -> SdpProblem {
        SdpProblem {
            psd_blocks: vec![("slack".into(), 1)],
            free_blocks: vec![("x".into(), 1)],
            rows: vec![SparseRow {
                entries: vec![(free(0, 0), 1.0), (psd(0, 0, 0), -1.0)],
                rhs: 1.0,
            }],
            objective: vec![(free(0, 0), 1.0)],
        }
    }

    /// min tr(X) s.t. X11 = 1, X22 = 2, X >= 0.
    pub(crate) fn trace_problem() -> SdpProblem {
        SdpProblem {
            psd_blocks: vec![("X".into(), 2)],
            free_blocks: vec![],
            rows: vec![
                SparseRow {
                    entries: vec![(psd(0, 0, 0), 1.0)],
                    rhs: 1.0,
                },
                SparseRow {
                    entries: vec![(psd(0, 1, 1), 1.0)],
                    rhs: 2.0,
                },
            ],
            objective: vec![(psd(0, 0, 0), 1.0), (psd(0, 1, 1), 1.0)],
        }
    }

    /// max t s.t. [[1, t], [t, 1]] >= 0, via X11 = X22 = 1, X12 = t.
    pub(crate) fn correlation_problem() -> SdpProblem {
        SdpProblem {
            psd_blocks: vec![("X".into(), 2)],
            free_blocks: vec![("t".into(), 1)],
            rows: vec![
                SparseRow {
                    entries: vec![(psd(0, 0, 0), 1.0)],
                    rhs: 1.0,
                },
                SparseRow {
                    entries: vec![(psd(0, 1, 1), 1.0)],
                    rhs: 1.0,
                },
                SparseRow {
                    entries: vec![(psd(0, 0, 1), 1.0), (free(0, 0), -1.0)],
                    rhs: 0.0,
                },
            ],
            objective: vec![(free(0, 0), -1.0)],
        }
    }

    #[test]
    fn scalar_lower_bound() {
        let p = lower_bound_problem();
        let sol = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.free_values[0][0] - 1.0).abs() < 1e-6);
        assert!((sol.primal_objective - 1.0).abs() < 1e-6);
        assert!(sol.iterations < 50);
    }

    #[test]
    fn diagonal_trace() {
        let p = trace_problem();
        let sol = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.primal_objective - 3.0).abs() < 1e-6);
        let x = &sol.psd_values[0];
        assert!((x[(0, 0)] - 1.0).abs() < 1e-6);
        assert!((x[(1, 1)] - 2.0).abs() < 1e-6);
        assert!(x[(0, 1)].abs() < 1e-5);
        assert!(sol.iterations < 50);
    }

    #[test]
    fn correlation_extreme() {
        let p = correlation_problem();
        let sol = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.free_values[0][0] - 1.0).abs() < 1e-6, "t = {}", sol.free_values[0][0]);
        assert!(sol.iterations < 50);
    }

    #[test]
    fn residuals_meet_tolerance_on_optimal() {
        for p in [lower_bound_problem(), trace_problem(), correlation_problem()] {
            let sol = solve(&p, &SolveOptions::default()).unwrap();
            assert_eq!(sol.status, SolveStatus::Optimal);
            assert!(sol.residuals.primal <= 1e-8);
            assert!(sol.residuals.dual <= 1e-8);
            assert!(sol.residuals.gap <= 1e-8);
            let rep = check_certificate(&p, &sol);
            assert!(rep.primal_residual_rel <= 1e-7);
            assert!(rep.dual_residual_rel <= 1e-7);
            assert!(rep.min_primal_eig >= -1e-8);
            assert!(rep.min_dual_eig >= -1e-8);
        }
    }

    #[test]
    fn certificate_detects_perturbation() {
        let p = trace_problem();
        let mut sol = solve(&p, &SolveOptions::default()).unwrap();
        sol.psd_values[0][(0, 0)] += 1e-2;
        let rep = check_certificate(&p, &sol);
        assert!(rep.primal_residual_abs >= 1e-3);
    }

    #[test]
    fn certificate_zero_solution_reports_rhs_norm() {
        let p = trace_problem();
        let mut sol = solve(&p, &SolveOptions::default()).unwrap();
        sol.psd_values[0].fill(0.0);
        sol.free_values.iter_mut().for_each(|v| v.fill(0.0));
        sol.dual_multipliers.fill(0.0);
        sol.dual_slacks.iter_mut().for_each(|m| m.fill(0.0));
        let rep = check_certificate(&p, &sol);
        let b_norm = (1.0f64 + 4.0).sqrt();
        assert!((rep.primal_residual_abs - b_norm).abs() < 1e-12);
    }

    #[test]
    fn infeasible_problem_is_flagged() {
        // X11 = -1 with X >= 0 (1x1)
        let p = SdpProblem {
            psd_blocks: vec![("X".into(), 1)],
            free_blocks: vec![],
            rows: vec![SparseRow {
                entries: vec![(psd(0, 0, 0), 1.0)],
                rhs: -1.0,
            }],
            objective: vec![(psd(0, 0, 0), 1.0)],
        };
        let sol = solve(&p, &SolveOptions::default()).unwrap();
        assert!(
            matches!(
                sol.status,
                SolveStatus::Infeasible | SolveStatus::NumericalFailure | SolveStatus::MaxIter
            ),
            "status {:?}",
            sol.status
        );
        assert_ne!(sol.status, SolveStatus::Optimal);
    }

    #[test]
    fn unbounded_problem_is_flagged() {
        // min -x11, X >= 0, no constraints binding it above: add a harmless row x12 = 0
        let p = SdpProblem {
            psd_blocks: vec![("X".into(), 2)],
            free_blocks: vec![],
            rows: vec![SparseRow {
                entries: vec![(psd(0, 0, 1), 1.0)],
                rhs: 0.0,
            }],
            objective: vec![(psd(0, 0, 0), -1.0)],
        };
        let sol = solve(&p, &SolveOptions::default()).unwrap();
        assert!(
            matches!(sol.status, SolveStatus::Unbounded | SolveStatus::MaxIter),
            "status {:?}",
            sol.status
        );
        assert_ne!(sol.status, SolveStatus::Optimal);
    }

    #[test]
    fn deterministic_repeated_solves() {
        let p = correlation_problem();
        let a = solve(&p, &SolveOptions::default()).unwrap();
        let b = solve(&p, &SolveOptions::default()).unwrap();
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.primal_objective.to_bits(), b.primal_objective.to_bits());
        assert_eq!(a.dual_objective.to_bits(), b.dual_objective.to_bits());
    }

    #[test]
    fn validation_rejects_bad_entries() {
        let p = SdpProblem {
            psd_blocks: vec![("X".into(), 2)],
            free_blocks: vec![],
            rows: vec![SparseRow {
                entries: vec![(psd(0, 1, 0), 1.0)], // lower triangle: rejected
                rhs: 0.0,
            }],
            objective: vec![],
        };
        assert!(matches!(p.validate(), Err(SdpError::BadIndex(0, 1, 0))));
        assert!(solve(&p, &SolveOptions::default()).is_err());
    }
}
