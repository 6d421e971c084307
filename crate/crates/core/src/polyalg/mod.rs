//! Sparse multivariate polynomial arithmetic over a fixed variable universe.
//!
//! Every polynomial lives in a [`Universe`] with `n` decision variables
//! `x1..xn`, `p` parameter variables `u1..up` and `m` auxiliary variables
//! `v1..vm` (the eigenvector directions of the PMI). Fixing the universe at
//! problem load keeps exponent vectors aligned across all operations, so
//! polynomials from different parts of a problem can be combined without
//! remapping.
//!
//! Monomials are ordered graded-lexicographically; this single canonical
//! order drives SDP assembly, printing and file output, making every
//! artifact deterministic.

mod matpoly;
mod monomial;
mod poly;
mod text;

pub use matpoly::{hessian, quad_form, MatrixPolynomial};
pub use monomial::Monomial;
pub use poly::Polynomial;
pub use text::{parse_polynomial, ParseError};

use std::fmt;

/// Variable counts of the ambient polynomial ring: `n` x-slots, `p` u-slots,
/// `m` v-slots, in that order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Universe {
    pub n: usize,
    pub p: usize,
    pub m: usize,
}

impl Universe {
    pub const fn new(n: usize, p: usize, m: usize) -> Self {
        Universe { n, p, m }
    }

    /// Total number of variable slots.
    pub const fn total(&self) -> usize {
        self.n + self.p + self.m
    }

    /// Slot index of `x_{i+1}` (0-based `i < n`).
    pub const fn x(&self, i: usize) -> usize {
        i
    }

    /// Slot index of `u_{i+1}`.
    pub const fn u(&self, i: usize) -> usize {
        self.n + i
    }

    /// Slot index of `v_{i+1}`.
    pub const fn v(&self, i: usize) -> usize {
        self.n + self.p + i
    }

    /// Printable name of a slot (`x1`, `u2`, `v3`, ...).
    pub fn var_name(&self, slot: usize) -> String {
        if slot < self.n {
            format!("x{}", slot + 1)
        } else if slot < self.n + self.p {
            format!("u{}", slot - self.n + 1)
        } else {
            format!("v{}", slot - self.n - self.p + 1)
        }
    }

    /// Resolve a variable name to its slot, if it exists in this universe.
    pub fn slot_of(&self, name: &str) -> Option<usize> {
        let (kind, idx) = name.split_at(1);
        let idx: usize = idx.parse().ok()?;
        if idx == 0 {
            return None;
        }
        match kind {
            "x" if idx <= self.n => Some(self.x(idx - 1)),
            "u" if idx <= self.p => Some(self.u(idx - 1)),
            "v" if idx <= self.m => Some(self.v(idx - 1)),
            _ => None,
        }
    }

    /// Mask selecting only the x-slots.
    pub fn mask_x(&self) -> VarMask {
        VarMask::from_ranges(self, true, false, false)
    }

    /// Mask selecting x- and u-slots.
    pub fn mask_xu(&self) -> VarMask {
        VarMask::from_ranges(self, true, true, false)
    }

    /// Mask selecting every slot.
    pub fn mask_all(&self) -> VarMask {
        VarMask::from_ranges(self, true, true, true)
    }

    /// Mask selecting x- and v-slots.
    pub fn mask_xv(&self) -> VarMask {
        VarMask::from_ranges(self, true, false, true)
    }
}

impl fmt::Display for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={}, p={}, m={})", self.n, self.p, self.m)
    }
}

/// Subset of universe slots, used to restrict monomial enumeration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarMask {
    allowed: Vec<bool>,
}

impl VarMask {
    fn from_ranges(u: &Universe, x: bool, uu: bool, v: bool) -> Self {
        let mut allowed = Vec::with_capacity(u.total());
        allowed.extend(std::iter::repeat(x).take(u.n));
        allowed.extend(std::iter::repeat(uu).take(u.p));
        allowed.extend(std::iter::repeat(v).take(u.m));
        VarMask { allowed }
    }

    pub fn allows(&self, slot: usize) -> bool {
        self.allowed[slot]
    }

    pub fn len(&self) -> usize {
        self.allowed.len()
    }

    pub fn is_empty(&self) -> bool {
        self.allowed.is_empty()
    }
}

/// All monomials over the masked variables with total degree `<= max_degree`,
/// in ascending graded-lexicographic order. Deterministic: the order is a
/// pure function of the universe and the mask.
pub fn enum_monomials(universe: &Universe, mask: &VarMask, max_degree: u32) -> Vec<Monomial> {
    assert_eq!(mask.len(), universe.total(), "mask/universe size mismatch");
    let slots: Vec<usize> = (0..universe.total()).filter(|&s| mask.allows(s)).collect();
    let mut out = Vec::new();
    let mut exps = vec![0u32; universe.total()];
    fn rec(slots: &[usize], budget: u32, exps: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        match slots.split_first() {
            None => out.push(Monomial::from_exponents(exps.clone())),
            Some((&s, rest)) => {
                for e in 0..=budget {
                    exps[s] = e;
                    rec(rest, budget - e, exps, out);
                }
                exps[s] = 0;
            }
        }
    }
    rec(&slots, max_degree, &mut exps, &mut out);
    out.sort();
    out
}
