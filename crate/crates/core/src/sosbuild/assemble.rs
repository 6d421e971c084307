use std::collections::BTreeMap;

use crate::polyalg::{enum_monomials, quad_form, Monomial, Polynomial, Universe};
use crate::sdpcore::{EntryRef, SdpProblem, SparseRow};

use super::reduce::sphere_reduce;
use super::{BuildError, DegreeAssignment, PmiProblem};

/// Which program to assemble on top of the base certificate identity.
#[derive(Clone, Debug)]
pub enum Variant {
    Plain,
    /// Adds `g - prev = c_0 + sum_j c_j b_j` with SOS `c_k`, forcing
    /// `G_d` to contain the previous superlevel set.
    Nested { prev: Polynomial },
    /// Adds `v^T grad^2 g(x) v = c_0 + sum_j c_j b_j + c_ball (1 - v^T v)`
    /// with SOS `c_k`, forcing `g` to be convex on `B`.
    Convex,
}

/// Role of one Gram block in the assembled program.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlockRole {
    /// SOS multiplier `s_i` of `a_i(u)` (index 0 is the constant `a_0 = 1`).
    S(usize),
    /// SOS multiplier `t_j` of `b_j(x)` (0-based).
    T(usize),
    /// Nested-variant multiplier `c_k` (`k = 0` unweighted, else `b_k`).
    NestedC(usize),
    /// Convex-variant multiplier `c_k` (`k = n_b + 1` weights `1 - v^T v`).
    ConvexC(usize),
}

/// Gram block descriptor: multiplier = `z^T Q z` over `basis` monomials,
/// entering the identity multiplied by `weight`.
#[derive(Clone, Debug)]
pub struct GramBlock {
    pub role: BlockRole,
    pub basis: Vec<Monomial>,
    pub weight: Polynomial,
    pub universe: Universe,
    /// Whether products were matched in the sphere-quotient basis.
    pub reduced: bool,
}

#[derive(Clone, Debug)]
pub struct BuildMeta {
    pub degrees: DegreeAssignment,
    /// Basis of `g` (pure-x monomials of the full universe, ascending).
    pub g_basis: Vec<Monomial>,
    /// Aligned with `sdp.psd_blocks`.
    pub blocks: Vec<GramBlock>,
    pub universe: Universe,
    /// Universe `(n, 0, n)` of the convex-variant identity, when present.
    pub hess_universe: Option<Universe>,
}

#[derive(Clone, Debug)]
pub struct SosBuild {
    pub sdp: SdpProblem,
    pub meta: BuildMeta,
}

/// Row accumulator for one polynomial identity, keyed by monomial.
struct IdentityGroup {
    rows: BTreeMap<Monomial, (Vec<(EntryRef, f64)>, f64)>,
}

impl IdentityGroup {
    fn new() -> Self {
        IdentityGroup {
            rows: BTreeMap::new(),
        }
    }

    fn push(&mut self, mono: &Monomial, entry: EntryRef, coeff: f64) {
        if coeff == 0.0 {
            return;
        }
        let row = self
            .rows
            .entry(mono.clone())
            .or_insert_with(|| (Vec::new(), 0.0));
        row.0.push((entry, coeff));
    }

    fn add_rhs(&mut self, mono: &Monomial, value: f64) {
        let row = self
            .rows
            .entry(mono.clone())
            .or_insert_with(|| (Vec::new(), 0.0));
        row.1 += value;
    }

    /// Emit rows in monomial order, scaled to unit infinity norm.
    fn emit(self, out: &mut Vec<SparseRow>) {
        for (_, (entries, rhs)) in self.rows {
            if entries.is_empty() && rhs == 0.0 {
                continue;
            }
            let scale = entries
                .iter()
                .map(|(_, c)| c.abs())
                .fold(0.0f64, f64::max)
                .max(1e-300);
            out.push(SparseRow {
                entries: entries
                    .into_iter()
                    .map(|(e, c)| (e, c / scale))
                    .collect(),
                rhs: rhs / scale,
            });
        }
    }
}

/// Monomials over the masked slots with total degree `<= deg`, keeping only
/// `v_m`-exponent `<= 1` when `reduce` is set.
fn gram_basis(u: &Universe, deg: u32, reduce: bool) -> Vec<Monomial> {
    let all = enum_monomials(u, &u.mask_all(), deg);
    if !reduce || u.m == 0 {
        return all;
    }
    let vm = u.v(u.m - 1);
    all.into_iter().filter(|m| m.degree_in(vm) <= 1).collect()
}

/// Scatter the Gram products of one block into an identity group:
/// `contribution(w) = mult * coeff_w(z_k z_l weight)` on entry `(k, l)`.
fn scatter_gram_block(
    group: &mut IdentityGroup,
    block_idx: usize,
    basis: &[Monomial],
    weight: &Polynomial,
    reduce: bool,
    sign: f64,
) {
    let universe = *weight.universe();
    for k in 0..basis.len() {
        for l in k..basis.len() {
            let pair = basis[k].mul(&basis[l]);
            let mut prod = Polynomial::zero(&universe);
            for (wm, wc) in weight.terms() {
                prod.add_term(pair.mul(wm), wc);
            }
            if reduce {
                prod = sphere_reduce(&prod);
            }
            let mult = if k == l { 1.0 } else { 2.0 };
            for (mono, c) in prod.terms() {
                group.push(
                    mono,
                    EntryRef::Psd {
                        block: block_idx,
                        i: k,
                        j: l,
                    },
                    sign * mult * c,
                );
            }
        }
    }
}

/// Compile the order-`degrees.order` program for `problem` into a block SDP.
///
/// The `g` coefficients form the single free block; every SOS multiplier is
/// a PSD Gram block; equality rows match coefficients of the certificate
/// identity in the sphere-quotient basis (plus the variant identity's rows).
/// The objective is `-(sum_a g_a y_a)`, i.e. minimization of `-int_B g`.
pub fn build_inner_sdp(
    problem: &PmiProblem,
    degrees: &DegreeAssignment,
    variant: &Variant,
) -> Result<SosBuild, BuildError> {
    let u = *problem.universe();
    if problem.moment_source().dimension() != u.n {
        return Err(BuildError::MomentDimensionMismatch {
            src: problem.moment_source().dimension(),
            n: u.n,
        });
    }

    let g_basis = enum_monomials(&u, &u.mask_x(), degrees.g_degree);
    let g_entry = |idx: usize| EntryRef::Free { block: 0, k: idx };

    let mut blocks: Vec<GramBlock> = Vec::new();
    let one = Polynomial::constant(&u, 1.0);
    blocks.push(GramBlock {
        role: BlockRole::S(0),
        basis: gram_basis(&u, degrees.d_s[0], true),
        weight: one.clone(),
        universe: u,
        reduced: true,
    });
    for (i, a) in problem.u_constraints().iter().enumerate() {
        blocks.push(GramBlock {
            role: BlockRole::S(i + 1),
            basis: gram_basis(&u, degrees.d_s[i + 1], true),
            weight: a.clone(),
            universe: u,
            reduced: true,
        });
    }
    for (j, b) in problem.b_constraints().iter().enumerate() {
        blocks.push(GramBlock {
            role: BlockRole::T(j),
            basis: gram_basis(&u, degrees.d_t[j], true),
            weight: b.clone(),
            universe: u,
            reduced: true,
        });
    }

    // main identity: v^T P v = g + sum_i s_i a_i + sum_j t_j b_j  (mod J)
    let mut main = IdentityGroup::new();
    let lhs = sphere_reduce(&quad_form(problem.matrix()));
    for (mono, c) in lhs.terms() {
        main.add_rhs(mono, c);
    }
    for (idx, mono) in g_basis.iter().enumerate() {
        main.push(mono, g_entry(idx), 1.0);
    }
    for (bi, gb) in blocks.iter().enumerate() {
        scatter_gram_block(&mut main, bi, &gb.basis, &gb.weight, true, 1.0);
    }

    let mut hess_universe = None;
    let mut extra = IdentityGroup::new();
    match variant {
        Variant::Plain => {}
        Variant::Nested { prev } => {
            let max_deg = 2 * degrees.order - 2;
            if prev.degree() > max_deg as i32 {
                return Err(BuildError::NestedPrevDegree {
                    deg: prev.degree(),
                    max: max_deg,
                });
            }
            let prev = if prev.universe() == &u {
                prev.clone()
            } else {
                prev.embed_x(&u)
            };
            // g - prev = c_0 + sum_j c_j b_j over pure-x monomials
            for (idx, mono) in g_basis.iter().enumerate() {
                extra.push(mono, g_entry(idx), 1.0);
            }
            for (mono, c) in prev.terms() {
                extra.add_rhs(mono, c);
            }
            let c0_idx = blocks.len();
            blocks.push(GramBlock {
                role: BlockRole::NestedC(0),
                basis: enum_monomials(&u, &u.mask_x(), degrees.order),
                weight: one.clone(),
                universe: u,
                reduced: false,
            });
            scatter_gram_block(
                &mut extra,
                c0_idx,
                &blocks[c0_idx].basis.clone(),
                &one,
                false,
                -1.0,
            );
            for (j, b) in problem.b_constraints().iter().enumerate() {
                let idx = blocks.len();
                blocks.push(GramBlock {
                    role: BlockRole::NestedC(j + 1),
                    basis: enum_monomials(&u, &u.mask_x(), degrees.d_t[j]),
                    weight: b.clone(),
                    universe: u,
                    reduced: false,
                });
                scatter_gram_block(&mut extra, idx, &blocks[idx].basis.clone(), b, false, -1.0);
            }
        }
        Variant::Convex => {
            // Hessian identity lives in its own universe (n, 0, n)
            let hu = Universe::new(u.n, 0, u.n);
            hess_universe = Some(hu);
            // v^T grad^2 g v: coefficient of x^(a-e_i-e_j) v_i v_j from g_a
            for (idx, mono) in g_basis.iter().enumerate() {
                let e = mono.exponents();
                for i in 0..u.n {
                    for j in i..u.n {
                        let coeff = if i == j {
                            (e[i] as f64) * (e[i] as f64 - 1.0)
                        } else {
                            2.0 * e[i] as f64 * e[j] as f64
                        };
                        if coeff == 0.0 {
                            continue;
                        }
                        let mut target = vec![0u32; hu.total()];
                        target[..u.n].copy_from_slice(&e[..u.n]);
                        target[hu.x(i)] -= 1;
                        target[hu.x(j)] -= 1;
                        target[hu.v(i)] += 1;
                        target[hu.v(j)] += 1;
                        extra.push(&Monomial::from_exponents(target), g_entry(idx), coeff);
                    }
                }
            }
            let hu_one = Polynomial::constant(&hu, 1.0);
            let c0_idx = blocks.len();
            blocks.push(GramBlock {
                role: BlockRole::ConvexC(0),
                basis: enum_monomials(&hu, &hu.mask_all(), degrees.order),
                weight: hu_one.clone(),
                universe: hu,
                reduced: false,
            });
            scatter_gram_block(
                &mut extra,
                c0_idx,
                &blocks[c0_idx].basis.clone(),
                &hu_one,
                false,
                -1.0,
            );
            for (j, b) in problem.b_constraints().iter().enumerate() {
                let idx = blocks.len();
                let w = b.embed_x(&hu);
                blocks.push(GramBlock {
                    role: BlockRole::ConvexC(j + 1),
                    basis: enum_monomials(&hu, &hu.mask_all(), degrees.d_t[j]),
                    weight: w.clone(),
                    universe: hu,
                    reduced: false,
                });
                scatter_gram_block(&mut extra, idx, &blocks[idx].basis.clone(), &w, false, -1.0);
            }
            // ball multiplier on 1 - v^T v
            let mut ball = hu_one.clone();
            for i in 0..hu.m {
                ball = &ball - &Polynomial::variable(&hu, hu.v(i)).pow(2);
            }
            let idx = blocks.len();
            blocks.push(GramBlock {
                role: BlockRole::ConvexC(problem.b_constraints().len() + 1),
                basis: enum_monomials(&hu, &hu.mask_all(), degrees.order - 1),
                weight: ball.clone(),
                universe: hu,
                reduced: false,
            });
            scatter_gram_block(&mut extra, idx, &blocks[idx].basis.clone(), &ball, false, -1.0);
        }
    }

    let mut rows = Vec::new();
    main.emit(&mut rows);
    extra.emit(&mut rows);

    let label = |role: &BlockRole| -> String {
        match role {
            BlockRole::S(i) => format!("s{i}"),
            BlockRole::T(j) => format!("t{}", j + 1),
            BlockRole::NestedC(k) => format!("c{k}"),
            BlockRole::ConvexC(k) => format!("h{k}"),
        }
    };
    let sdp = SdpProblem {
        psd_blocks: blocks
            .iter()
            .map(|gb| (label(&gb.role), gb.basis.len()))
            .collect(),
        free_blocks: vec![("g".to_string(), g_basis.len())],
        rows,
        objective: g_basis
            .iter()
            .enumerate()
            .map(|(idx, mono)| {
                let alpha = &mono.exponents()[..u.n];
                (g_entry(idx), -problem.moment_source().get(alpha))
            })
            .collect(),
    };

    Ok(SosBuild {
        sdp,
        meta: BuildMeta {
            degrees: degrees.clone(),
            g_basis,
            blocks,
            universe: u,
            hess_universe,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::super::degrees::{multiplier_degrees, tests::planar_box_problem};
    use super::*;

    #[test]
    fn planar_order_two_g_block_size() {
        let prob = planar_box_problem();
        let deg = multiplier_degrees(&prob, 2).unwrap();
        let build = build_inner_sdp(&prob, &deg, &Variant::Plain).unwrap();
        // dim R[x]_4 in 2 vars = C(6,2) = 15
        assert_eq!(build.sdp.free_blocks[0].1, 15);
        assert_eq!(build.meta.g_basis.len(), 15);
        // s0 basis: deg <= 2 monomials in (x1,x2,v1,v2) with v2-exp <= 1
        assert_eq!(build.meta.blocks[0].basis.len(), 14);
        // two box constraints: t-bases at degree 1 over (x,u,v) reduced
        assert_eq!(build.meta.blocks[1].basis.len(), 5);
        assert_eq!(build.sdp.validate().is_ok(), true);
    }

    #[test]
    fn nested_variant_adds_blocks_and_rows() {
        let prob = planar_box_problem();
        let deg = multiplier_degrees(&prob, 3).unwrap();
        let u = *prob.universe();
        let prev = crate::polyalg::parse_polynomial("0.1 - x1^2 - x2^2", &u).unwrap();
        let plain = build_inner_sdp(&prob, &deg, &Variant::Plain).unwrap();
        let nested = build_inner_sdp(
            &prob,
            &deg,
            &Variant::Nested { prev: prev.clone() },
        )
        .unwrap();
        assert_eq!(
            nested.sdp.psd_blocks.len(),
            plain.sdp.psd_blocks.len() + 1 + prob.b_constraints().len()
        );
        assert!(nested.sdp.rows.len() > plain.sdp.rows.len());
        assert!(nested.sdp.validate().is_ok());

        // degree cap: prev too big is rejected
        let big = crate::polyalg::parse_polynomial("x1^8", &u).unwrap();
        assert!(matches!(
            build_inner_sdp(&prob, &deg, &Variant::Nested { prev: big }),
            Err(BuildError::NestedPrevDegree { .. })
        ));
    }

    #[test]
    fn convex_variant_adds_hessian_identity() {
        let prob = planar_box_problem();
        let deg = multiplier_degrees(&prob, 2).unwrap();
        let build = build_inner_sdp(&prob, &deg, &Variant::Convex).unwrap();
        // blocks: s0, t1, t2 + convex c0, c1, c2, ball
        assert_eq!(build.sdp.psd_blocks.len(), 3 + prob.b_constraints().len() + 2);
        assert!(build.meta.hess_universe.is_some());
        assert!(build.sdp.validate().is_ok());
    }

    #[test]
    fn rows_have_unit_inf_norm() {
        let prob = planar_box_problem();
        let deg = multiplier_degrees(&prob, 2).unwrap();
        let build = build_inner_sdp(&prob, &deg, &Variant::Plain).unwrap();
        for row in &build.sdp.rows {
            let max = row
                .entries
                .iter()
                .map(|(_, c)| c.abs())
                .fold(0.0f64, f64::max);
            assert!((max - 1.0).abs() < 1e-12);
        }
    }
}
