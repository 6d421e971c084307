use crate::polyalg::{MatrixPolynomial, Polynomial, Universe};

/// Hermite matrix `P(x)` of the monic polynomial
/// `z^n + x_1 z^{n-1} + ... + x_n`, over the universe `(n, 0, n)`.
///
/// `P(x) > 0` iff the polynomial has all roots in the open unit disk; the
/// universe carries `n` v-slots so `v^T P(x) v` can be formed directly.
#[derive(Clone, Debug)]
pub struct HermiteInstance {
    pub n: usize,
    pub matrix: MatrixPolynomial,
}

/// Build the Hermite matrix `P = T1^T T1 - T2^T T2` from the pair of
/// upper-right triangular Toeplitz matrices with first rows
/// `(1, x_1, x_2, ...)` and `(x_n, x_{n-1}, x_{n-2}, ...)`.
pub fn hermite_matrix(n: usize) -> HermiteInstance {
    assert!(n >= 1);
    let u = Universe::new(n, 0, n);
    // coefficient by index: c(0) = 1, c(k) = x_k
    let coeff = |k: usize| -> Polynomial {
        if k == 0 {
            Polynomial::constant(&u, 1.0)
        } else {
            Polynomial::variable(&u, u.x(k - 1))
        }
    };
    let zero = Polynomial::zero(&u);
    let t1 = |i: usize, j: usize| if j >= i { coeff(j - i) } else { zero.clone() };
    let t2 = |i: usize, j: usize| if j >= i { coeff(n - (j - i)) } else { zero.clone() };

    let mut p = MatrixPolynomial::zero(&u, n);
    for i in 0..n {
        for j in i..n {
            let mut e = Polynomial::zero(&u);
            for k in 0..n {
                e = &e + &(&t1(k, i) * &t1(k, j));
                e = &e - &(&t2(k, i) * &t2(k, j));
            }
            p.set_entry(i, j, e);
        }
    }
    HermiteInstance { n, matrix: p }
}

impl HermiteInstance {
    /// Evaluate `P` at a coefficient vector `x` (length `n`); the universe's
    /// u/v slots are padded with zeros.
    pub fn eval(&self, x: &[f64]) -> nalgebra::DMatrix<f64> {
        assert_eq!(x.len(), self.n);
        let mut point = vec![0.0; self.matrix.universe().total()];
        point[..self.n].copy_from_slice(x);
        self.matrix.eval(&point)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::parse_polynomial;

    #[test]
    fn n3_matches_displayed_matrix() {
        let h = hermite_matrix(3);
        let u = *h.matrix.universe();
        let entries = [
            (0, 0, "1 - x3^2"),
            (0, 1, "x1 - x2*x3"),
            (0, 2, "x2 - x1*x3"),
            (1, 1, "1 + x1^2 - x2^2 - x3^2"),
            (1, 2, "x1 - x2*x3"),
            (2, 2, "1 - x3^2"),
        ];
        for (i, j, s) in entries {
            let expected = parse_polynomial(s, &u).unwrap();
            assert_eq!(*h.matrix.entry(i, j), expected, "entry ({i},{j})");
        }
    }

    #[test]
    fn identity_at_origin() {
        for n in 1..=5 {
            let h = hermite_matrix(n);
            let m = h.eval(&vec![0.0; n]);
            assert_eq!(m, nalgebra::DMatrix::identity(n, n));
        }
    }

    #[test]
    fn entries_quadratic_in_x() {
        for n in 1..=5 {
            let h = hermite_matrix(n);
            assert!(h.matrix.degree() <= 2);
        }
    }

    #[test]
    fn n4_design_substitution_matches_displayed_matrix() {
        // z^4 - (2x1+x2) z^3 + 2x1 z + x2 via x -> (-(2x1+x2), 0, 2x1, x2)
        let h = hermite_matrix(4);
        let target = Universe::new(2, 0, 4);
        let parse = |s: &str| parse_polynomial(s, &target).unwrap();
        let subs = vec![
            parse("-2*x1 - x2"),
            parse("0"),
            parse("2*x1"),
            parse("x2"),
            // v-slots map through unchanged
            parse("v1"),
            parse("v2"),
            parse("v3"),
            parse("v4"),
        ];
        let p = h.matrix.substitute(&subs);
        let expected = [
            (0, 0, "1 - x2^2"),
            (0, 1, "-2*x1 - x2 - 2*x1*x2"),
            (0, 2, "0"),
            (0, 3, "2*x1 + 2*x1*x2 + x2^2"),
            (1, 1, "1 + 4*x1*x2"),
            (1, 2, "-2*x1 - x2 - 2*x1*x2"),
            (1, 3, "0"),
            (2, 2, "1 + 4*x1*x2"),
            (2, 3, "-2*x1 - x2 - 2*x1*x2"),
            (3, 3, "1 - x2^2"),
        ];
        for (i, j, s) in expected {
            assert_eq!(*p.entry(i, j), parse(s), "entry ({i},{j})");
        }
    }
}

/// Scalar polynomial description of the closed Schur stability body in
/// coefficient space: `closure(P) = {x : all constraints >= 0}`. Available
/// for `n <= 3` (the Jury conditions stay quadratic there); higher degrees
/// are better bounded by the hull simplex.
pub fn stability_body_constraints(n: usize) -> Option<Vec<Polynomial>> {
    let u = Universe::new(n, 0, 0);
    let parse = |s: &str| crate::polyalg::parse_polynomial(s, &u).unwrap();
    match n {
        1 => Some(vec![parse("1 + x1"), parse("1 - x1")]),
        2 => Some(vec![
            parse("1 + x1 + x2"),
            parse("1 - x1 + x2"),
            parse("1 - x2"),
        ]),
        3 => Some(vec![
            parse("1 + x1 + x2 + x3"),
            parse("1 - x1 + x2 - x3"),
            parse("1 - x3^2"),
            parse("1 - x2 - x3^2 + x1*x3"),
        ]),
        _ => None,
    }
}
