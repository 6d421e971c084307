use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::{Monomial, Universe};

/// Sparse multivariate polynomial with `f64` coefficients.
///
/// Terms are kept in a `BTreeMap` keyed by the graded-lexicographic monomial
/// order, so iteration, printing and SDP assembly are deterministic. No
/// stored term has coefficient exactly `0.0`; arithmetic prunes exact zeros
/// only (tolerance-based cleanup is reserved for I/O boundaries, see
/// [`Polynomial::cleaned`]).
#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    universe: Universe,
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    pub fn zero(universe: &Universe) -> Self {
        Polynomial {
            universe: *universe,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(universe: &Universe, c: f64) -> Self {
        let mut p = Self::zero(universe);
        if c != 0.0 {
            p.terms.insert(Monomial::one(universe.total()), c);
        }
        p
    }

    /// The variable in `slot` as a polynomial.
    pub fn variable(universe: &Universe, slot: usize) -> Self {
        Self::term(universe, 1.0, Monomial::var(universe.total(), slot, 1))
    }

    pub fn term(universe: &Universe, coeff: f64, monomial: Monomial) -> Self {
        assert_eq!(monomial.num_vars(), universe.total());
        let mut p = Self::zero(universe);
        if coeff != 0.0 {
            p.terms.insert(monomial, coeff);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, f64)>>(
        universe: &Universe,
        terms: I,
    ) -> Self {
        let mut p = Self::zero(universe);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `-1` for the zero polynomial.
    pub fn degree(&self) -> i32 {
        self.terms
            .keys()
            .map(|m| m.degree() as i32)
            .max()
            .unwrap_or(-1)
    }

    /// Max degree counted over the slots selected by `included`.
    pub fn degree_over<F: Fn(usize) -> bool + Copy>(&self, included: F) -> i32 {
        self.terms
            .keys()
            .map(|m| m.degree_over(included) as i32)
            .max()
            .unwrap_or(-1)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coeff(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.abs()))
    }

    /// Accumulate `c * m` into the polynomial, pruning exact zeros.
    pub fn add_term(&mut self, m: Monomial, c: f64) {
        if c == 0.0 {
            return;
        }
        debug_assert_eq!(m.num_vars(), self.universe.total());
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == 0.0 {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        if s == 0.0 {
            return Self::zero(&self.universe);
        }
        Polynomial {
            universe: self.universe,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * s)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        let mut acc = Self::constant(&self.universe, 1.0);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Evaluate at a point with one coordinate per universe slot.
    pub fn eval(&self, point: &[f64]) -> f64 {
        assert_eq!(point.len(), self.universe.total(), "point/universe size mismatch");
        self.terms.iter().map(|(m, c)| c * m.eval(point)).sum()
    }

    /// Partial derivative with respect to the variable in `slot`.
    pub fn differentiate(&self, slot: usize) -> Polynomial {
        let mut out = Self::zero(&self.universe);
        for (m, c) in &self.terms {
            let e = m.degree_in(slot);
            if e > 0 {
                out.add_term(m.div_var(slot, 1), c * e as f64);
            }
        }
        out
    }

    /// Substitute every universe variable by the corresponding polynomial
    /// (all in a common target universe). `subs.len()` must equal the number
    /// of slots of `self`'s universe.
    pub fn substitute(&self, subs: &[Polynomial]) -> Polynomial {
        assert_eq!(subs.len(), self.universe.total());
        let target = *subs
            .first()
            .map(|p| p.universe())
            .unwrap_or(&self.universe);
        debug_assert!(subs.iter().all(|p| *p.universe() == target));
        // Memoize per-variable powers; exponents stay small at desk scale.
        let mut powers: Vec<Vec<Polynomial>> = subs
            .iter()
            .map(|p| vec![Polynomial::constant(&target, 1.0), p.clone()])
            .collect();
        let mut out = Polynomial::zero(&target);
        for (m, c) in &self.terms {
            let mut term = Polynomial::constant(&target, *c);
            for (slot, &e) in m.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let cache = &mut powers[slot];
                while cache.len() <= e as usize {
                    let next = cache.last().unwrap() * &subs[slot];
                    cache.push(next);
                }
                term = &term * &cache[e as usize];
            }
            out = &out + &term;
        }
        out
    }

    /// Re-home a polynomial into `target`, sending old slot `s` to
    /// `slot_map[s]`. Every slot with a nonzero exponent must be mapped.
    pub fn embed(&self, target: &Universe, slot_map: &[Option<usize>]) -> Polynomial {
        assert_eq!(slot_map.len(), self.universe.total());
        let mut out = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let mut exps = vec![0u32; target.total()];
            for (s, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    let t = slot_map[s].unwrap_or_else(|| {
                        panic!("variable {} not representable in target universe", s)
                    });
                    exps[t] += e;
                }
            }
            out.add_term(Monomial::from_exponents(exps), *c);
        }
        out
    }

    /// Embed a pure-x polynomial into another universe with at least as many
    /// x-slots.
    pub fn embed_x(&self, target: &Universe) -> Polynomial {
        let u = &self.universe;
        assert!(u.n <= target.n);
        let map: Vec<Option<usize>> = (0..u.total())
            .map(|s| if s < u.n { Some(s) } else { None })
            .collect();
        self.embed(target, &map)
    }

    /// Drop terms with `|c| < tol * max(1, max|c|)`. I/O-boundary cleanup
    /// only; arithmetic never calls this.
    pub fn cleaned(&self, tol: f64) -> Polynomial {
        let cutoff = tol * 1.0_f64.max(self.max_abs_coeff());
        Polynomial {
            universe: self.universe,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() >= cutoff)
                .map(|(m, c)| (m.clone(), *c))
                .collect(),
        }
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        debug_assert_eq!(self.universe, rhs.universe, "universe mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        debug_assert_eq!(self.universe, rhs.universe, "universe mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        debug_assert_eq!(self.universe, rhs.universe, "universe mismatch");
        let mut out = Polynomial::zero(&self.universe);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        super::text::write_polynomial(self, f)
    }
}
