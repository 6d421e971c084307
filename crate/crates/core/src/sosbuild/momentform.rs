use crate::polyalg::{enum_monomials, quad_form, Monomial, Polynomial};
use crate::sdpcore::{EntryRef, SdpProblem, SparseRow};

use super::reduce::sphere_reduce;
use super::{BuildError, DegreeAssignment, PmiProblem};

/// Moment-side program, the conic dual of the SOS program over the same
/// quotient basis: minimize `L_y(v^T P v)` over pseudo-moment vectors `y`
/// with PSD moment and localizing matrices and `L_y(x^a)` pinned to the
/// bounding-set moments.
#[derive(Clone, Debug)]
pub struct MomentBuild {
    pub sdp: SdpProblem,
    /// Quotient-basis monomials indexing the pseudo-moment vector.
    pub y_basis: Vec<Monomial>,
}

/// Assemble the moment form at the same degrees as the SOS form. Each SOS
/// Gram block dualizes to one localizing-matrix PSD block (the moment
/// matrix itself for the constant weight `a_0 = 1`), linked entrywise to
/// `y` through the sphere-reduced products `z_k z_l h`.
pub fn build_moment_sdp(
    problem: &PmiProblem,
    degrees: &DegreeAssignment,
) -> Result<MomentBuild, BuildError> {
    let u = *problem.universe();
    if problem.moment_source().dimension() != u.n {
        return Err(BuildError::MomentDimensionMismatch {
            src: problem.moment_source().dimension(),
            n: u.n,
        });
    }
    let vm = u.v(u.m - 1);
    let y_basis: Vec<Monomial> = enum_monomials(&u, &u.mask_all(), 2 * degrees.order)
        .into_iter()
        .filter(|m| m.degree_in(vm) <= 1)
        .collect();
    let y_index = |m: &Monomial| -> usize {
        y_basis
            .binary_search(m)
            .expect("reduced product stays inside the quotient basis")
    };

    let reduced_basis = |deg: u32| -> Vec<Monomial> {
        enum_monomials(&u, &u.mask_all(), deg)
            .into_iter()
            .filter(|m| m.degree_in(vm) <= 1)
            .collect()
    };

    let one = Polynomial::constant(&u, 1.0);
    let mut weights: Vec<(String, Vec<Monomial>, Polynomial)> = Vec::new();
    weights.push(("m0".to_string(), reduced_basis(degrees.d_s[0]), one));
    for (i, a) in problem.u_constraints().iter().enumerate() {
        weights.push((
            format!("ma{}", i + 1),
            reduced_basis(degrees.d_s[i + 1]),
            a.clone(),
        ));
    }
    for (j, b) in problem.b_constraints().iter().enumerate() {
        weights.push((
            format!("mb{}", j + 1),
            reduced_basis(degrees.d_t[j]),
            b.clone(),
        ));
    }

    let mut rows: Vec<SparseRow> = Vec::new();
    for (bi, (_, basis, h)) in weights.iter().enumerate() {
        for k in 0..basis.len() {
            for l in k..basis.len() {
                let pair = basis[k].mul(&basis[l]);
                let mut prod = Polynomial::zero(&u);
                for (wm, wc) in h.terms() {
                    prod.add_term(pair.mul(wm), wc);
                }
                let prod = sphere_reduce(&prod);
                let mut entries = vec![(
                    EntryRef::Psd {
                        block: bi,
                        i: k,
                        j: l,
                    },
                    1.0,
                )];
                for (mono, c) in prod.terms() {
                    entries.push((
                        EntryRef::Free {
                            block: 0,
                            k: y_index(mono),
                        },
                        -c,
                    ));
                }
                rows.push(SparseRow { entries, rhs: 0.0 });
            }
        }
    }

    // L_y(x^a) = int_B x^a dx for every pure-x monomial up to 2d
    for (idx, mono) in y_basis.iter().enumerate() {
        if mono.degree_over(|s| s >= u.n) == 0 {
            rows.push(SparseRow {
                entries: vec![(EntryRef::Free { block: 0, k: idx }, 1.0)],
                rhs: problem.moment_source().get(&mono.exponents()[..u.n]),
            });
        }
    }

    let objective: Vec<(EntryRef, f64)> = sphere_reduce(&quad_form(problem.matrix()))
        .terms()
        .map(|(mono, c)| {
            (
                EntryRef::Free {
                    block: 0,
                    k: y_index(mono),
                },
                c,
            )
        })
        .collect();

    let sdp = SdpProblem {
        psd_blocks: weights
            .iter()
            .map(|(label, basis, _)| (label.clone(), basis.len()))
            .collect(),
        free_blocks: vec![("y".to_string(), y_basis.len())],
        rows,
        objective,
    };
    Ok(MomentBuild { sdp, y_basis })
}
