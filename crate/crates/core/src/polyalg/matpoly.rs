use nalgebra::DMatrix;

use super::{Polynomial, Universe};

/// Symmetric matrix of polynomials, stored as the upper triangle.
///
/// `entry(i, j)` and `entry(j, i)` resolve to the same stored polynomial, so
/// the matrix is symmetric by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPolynomial {
    size: usize,
    universe: Universe,
    entries: Vec<Polynomial>,
}

impl MatrixPolynomial {
    pub fn zero(universe: &Universe, size: usize) -> Self {
        MatrixPolynomial {
            size,
            universe: *universe,
            entries: vec![Polynomial::zero(universe); size * (size + 1) / 2],
        }
    }

    pub fn identity(universe: &Universe, size: usize) -> Self {
        let mut m = Self::zero(universe, size);
        for i in 0..size {
            m.set_entry(i, i, Polynomial::constant(universe, 1.0));
        }
        m
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.size - i * (i + 1) / 2 + j
    }

    pub fn entry(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[self.idx(i, j)]
    }

    pub fn set_entry(&mut self, i: usize, j: usize, p: Polynomial) {
        assert_eq!(*p.universe(), self.universe);
        let k = self.idx(i, j);
        self.entries[k] = p;
    }

    /// Max total degree over all entries (`-1` for the zero matrix).
    pub fn degree(&self) -> i32 {
        self.entries.iter().map(|p| p.degree()).max().unwrap_or(-1)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.entries.iter().fold(0.0, |a, p| a.max(p.max_abs_coeff()))
    }

    /// Evaluate every entry; the result is exactly symmetric.
    pub fn eval(&self, point: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.size, self.size);
        for i in 0..self.size {
            for j in i..self.size {
                let v = self.entry(i, j).eval(point);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }

    /// Substitute every universe variable of the entries by the given
    /// polynomials (entrywise [`Polynomial::substitute`]).
    pub fn substitute(&self, subs: &[Polynomial]) -> MatrixPolynomial {
        let target = *subs
            .first()
            .map(|p| p.universe())
            .unwrap_or(&self.universe);
        MatrixPolynomial {
            size: self.size,
            universe: target,
            entries: self.entries.iter().map(|p| p.substitute(subs)).collect(),
        }
    }
}

/// `v^T P(x,u) v` as a polynomial of degree 2 in the v-slots.
///
/// The universe must carry exactly `P.size()` v-slots.
pub fn quad_form(p: &MatrixPolynomial) -> Polynomial {
    let u = *p.universe();
    assert_eq!(u.m, p.size(), "universe must have one v-slot per matrix row");
    let mut out = Polynomial::zero(&u);
    for i in 0..p.size() {
        for j in i..p.size() {
            let vij = &Polynomial::variable(&u, u.v(i)) * &Polynomial::variable(&u, u.v(j));
            let w = if i == j { 1.0 } else { 2.0 };
            out = &out + &(&p.entry(i, j).scale(w) * &vij);
        }
    }
    out
}

/// Hessian of a polynomial in the x-slots: `entry(i,j) = d^2 g / dx_i dx_j`.
pub fn hessian(g: &Polynomial) -> MatrixPolynomial {
    let u = *g.universe();
    debug_assert_eq!(g.degree_over(|s| s >= u.n), 0, "hessian input must be pure x");
    let mut h = MatrixPolynomial::zero(&u, u.n);
    for i in 0..u.n {
        let gi = g.differentiate(u.x(i));
        for j in i..u.n {
            h.set_entry(i, j, gi.differentiate(u.x(j)));
        }
    }
    h
}
