use crate::polyalg::Polynomial;

/// Reduce a polynomial modulo the ideal of `1 - v^T v` by substituting
/// `v_m^2 = 1 - sum_{j != m} v_j^2` until no monomial carries a
/// `v_m`-exponent of 2 or more. The result is the canonical representative
/// of `p` in the quotient basis; `sphere_reduce` is a fixed point of itself.
pub fn sphere_reduce(p: &Polynomial) -> Polynomial {
    sphere_reduce_with_quotient(p).0
}

/// Like [`sphere_reduce`], also returning the quotient `q` with
/// `p = reduced + q * (1 - v^T v)` exactly.
pub fn sphere_reduce_with_quotient(p: &Polynomial) -> (Polynomial, Polynomial) {
    let u = *p.universe();
    if u.m == 0 {
        return (p.clone(), Polynomial::zero(&u));
    }
    let vm = u.v(u.m - 1);
    let mut work: Vec<(crate::polyalg::Monomial, f64)> =
        p.terms().map(|(m, c)| (m.clone(), c)).collect();
    let mut reduced = Polynomial::zero(&u);
    let mut quotient = Polynomial::zero(&u);
    while let Some((mono, c)) = work.pop() {
        if mono.degree_in(vm) < 2 {
            reduced.add_term(mono, c);
            continue;
        }
        // v_m^2 = (1 - sum_{j != m} v_j^2) - (1 - v^T v)
        let base = mono.div_var(vm, 2);
        quotient.add_term(base.clone(), -c);
        for j in 0..u.m - 1 {
            work.push((base.mul_var(u.v(j), 2), -c));
        }
        work.push((base, c));
    }
    (reduced, quotient)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::{parse_polynomial, Universe};
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn vm_squared_substitution() {
        // m = 3: v3^2 -> 1 - v1^2 - v2^2
        let u = Universe::new(0, 0, 3);
        let p = parse_polynomial("v3^2", &u).unwrap();
        let expected = parse_polynomial("1 - v1^2 - v2^2", &u).unwrap();
        assert_eq!(sphere_reduce(&p), expected);
    }

    #[test]
    fn circle_collapses_to_one() {
        let u = Universe::new(0, 0, 2);
        let p = parse_polynomial("v1^2 + v2^2", &u).unwrap();
        assert_eq!(sphere_reduce(&p), Polynomial::constant(&u, 1.0));
    }

    #[test]
    fn constants_are_fixed_points() {
        let u = Universe::new(1, 0, 2);
        let p = Polynomial::constant(&u, 5.0);
        assert_eq!(sphere_reduce(&p), p);
    }

    #[test]
    fn idempotent_and_exponent_bounded() {
        let u = Universe::new(1, 0, 3);
        let p = parse_polynomial("x1*v3^4 - 2*v1^2*v3^3 + v2*v3", &u).unwrap();
        let r = sphere_reduce(&p);
        for (m, _) in r.terms() {
            assert!(m.degree_in(u.v(2)) <= 1);
        }
        assert_eq!(sphere_reduce(&r), r);
    }

    #[test]
    fn quotient_reconstructs_input() {
        let u = Universe::new(2, 0, 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let monos = crate::polyalg::enum_monomials(&u, &u.mask_all(), 5);
        for _ in 0..20 {
            let terms: Vec<_> = monos
                .iter()
                .filter_map(|m| {
                    if rng.random_range(0.0..1.0) < 0.3 {
                        Some((m.clone(), rng.random_range(-2.0..2.0)))
                    } else {
                        None
                    }
                })
                .collect();
            let p = Polynomial::from_terms(&u, terms);
            let (red, quo) = sphere_reduce_with_quotient(&p);
            // p == red + quo * (1 - v^T v)
            let mut sphere = Polynomial::constant(&u, 1.0);
            for j in 0..u.m {
                sphere = &sphere - &Polynomial::variable(&u, u.v(j)).pow(2);
            }
            let recon = &red + &(&quo * &sphere);
            let diff = &recon - &p;
            assert!(diff.max_abs_coeff() < 1e-12, "{diff}");
        }
    }
}
