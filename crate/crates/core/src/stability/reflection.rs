use crate::polyalg::{Polynomial, Universe};

/// Multiaffine map `f : (-1,1)^n -> R^n` sending reflection coefficients `k`
/// to the coefficients `x` of a Schur-stable monic polynomial, together with
/// the symbolic determinant of its Jacobian.
///
/// Components live in an `n`-variable universe whose x-slots are read as
/// `k_1..k_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReflectionMap {
    pub n: usize,
    pub components: Vec<Polynomial>,
    pub jacobian_det: Polynomial,
}

impl ReflectionMap {
    pub fn universe(&self) -> &Universe {
        self.components[0].universe()
    }

    pub fn eval(&self, k: &[f64]) -> Vec<f64> {
        assert_eq!(k.len(), self.n);
        self.components.iter().map(|f| f.eval(k)).collect()
    }

    pub fn jacobian_det_at(&self, k: &[f64]) -> f64 {
        self.jacobian_det.eval(k)
    }
}

/// Build the degree-`n` reflection map by the monic lattice recursion
/// `a_j(z) = z a_{j-1}(z) + k_j a*_{j-1}(z)`, where `a*` reverses the
/// coefficients. Each step is affine in `k_j`, so the resulting map is
/// multiaffine; `f_i(k)` is the coefficient of `z^{n-i}` in `a_n`.
pub fn reflection_map(n: usize) -> ReflectionMap {
    assert!(n >= 1);
    let u = Universe::new(n, 0, 0);
    // coeffs[t] = coefficient of z^{j-t}; coeffs[0] = 1 stays monic.
    let mut coeffs: Vec<Polynomial> = vec![Polynomial::constant(&u, 1.0)];
    for j in 1..=n {
        let kj = Polynomial::variable(&u, u.x(j - 1));
        let mut next: Vec<Polynomial> = Vec::with_capacity(j + 1);
        for s in 0..=j {
            let shifted = if s < j {
                coeffs[s].clone()
            } else {
                Polynomial::zero(&u)
            };
            let reversed = if s >= 1 {
                &kj * &coeffs[j - s]
            } else {
                Polynomial::zero(&u)
            };
            next.push(&shifted + &reversed);
        }
        coeffs = next;
    }
    let components: Vec<Polynomial> = coeffs[1..].to_vec();

    // Symbolic Jacobian determinant by minor expansion.
    let jac: Vec<Vec<Polynomial>> = components
        .iter()
        .map(|f| (0..n).map(|j| f.differentiate(u.x(j))).collect())
        .collect();
    let jacobian_det = poly_det(&jac, &u);

    ReflectionMap {
        n,
        components,
        jacobian_det,
    }
}

fn poly_det(m: &[Vec<Polynomial>], u: &Universe) -> Polynomial {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut det = Polynomial::zero(u);
    for j in 0..n {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Polynomial>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let cof = &m[0][j] * &poly_det(&minor, u);
        det = if j % 2 == 0 { &det + &cof } else { &det - &cof };
    }
    det
}

/// Vertices of `conv P`: the coefficient vectors `(x_1..x_n)` of
/// `(z-1)^j (z+1)^{n-j}`, listed for `j = n` down to `0`.
pub fn stable_simplex_vertices(n: usize) -> Vec<Vec<f64>> {
    assert!(n >= 1);
    (0..=n)
        .rev()
        .map(|j| {
            // expand (z-1)^j (z+1)^{n-j}; c[t] = coefficient of z^{n-t}
            let mut c = vec![0.0; 1];
            c[0] = 1.0;
            for root in 0..n {
                let r = if root < j { -1.0 } else { 1.0 };
                // multiply by (z + r)
                let mut next = vec![0.0; c.len() + 1];
                for (t, &ct) in c.iter().enumerate() {
                    next[t] += ct;
                    next[t + 1] += ct * r;
                }
                c = next;
            }
            c[1..].to_vec()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyalg::parse_polynomial;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn n3_closed_form_matches() {
        let f = reflection_map(3);
        let u = *f.universe();
        let expected = [
            "x2*x3 + x1 + x1*x2", // k2k3 + k1(1+k2)
            "x2 + x1*x3 + x1*x2*x3",
            "x3",
        ];
        for (i, s) in expected.iter().enumerate() {
            assert_eq!(f.components[i], parse_polynomial(s, &u).unwrap());
        }
    }

    #[test]
    fn n3_jacobian_closed_form() {
        let f = reflection_map(3);
        let u = *f.universe();
        // (1 + k2)(1 - k3^2)
        let expected = parse_polynomial("1 + x2 - x3^2 - x2*x3^2", &u).unwrap();
        assert_eq!(f.jacobian_det, expected);
    }

    #[test]
    fn point_images() {
        let f = reflection_map(3);
        assert_eq!(f.eval(&[0.0, 0.0, 0.0]), vec![0.0, 0.0, 0.0]);
        assert_eq!(f.eval(&[1.0, 1.0, 1.0]), vec![3.0, 3.0, 1.0]);
    }

    #[test]
    fn multiaffine_in_each_coordinate() {
        for n in 1..=5 {
            let f = reflection_map(n);
            for c in &f.components {
                for (m, _) in c.terms() {
                    assert!(m.exponents().iter().all(|&e| e <= 1));
                }
            }
        }
    }

    #[test]
    fn vertex_lists_match() {
        assert_eq!(stable_simplex_vertices(1), vec![vec![-1.0], vec![1.0]]);
        assert_eq!(
            stable_simplex_vertices(3),
            vec![
                vec![-3.0, 3.0, -1.0],
                vec![-1.0, -1.0, 1.0],
                vec![1.0, -1.0, -1.0],
                vec![3.0, 3.0, 1.0],
            ]
        );
        assert_eq!(
            stable_simplex_vertices(4),
            vec![
                vec![-4.0, 6.0, -4.0, 1.0],
                vec![-2.0, 0.0, 2.0, -1.0],
                vec![0.0, -2.0, 0.0, 1.0],
                vec![2.0, 0.0, -2.0, -1.0],
                vec![4.0, 6.0, 4.0, 1.0],
            ]
        );
    }

    #[test]
    fn vertices_are_box_corner_images() {
        // f maps the 2^n corners of the box onto the n+1 simplex vertices.
        for n in 1..=4 {
            let f = reflection_map(n);
            let verts = stable_simplex_vertices(n);
            let mut seen = vec![false; verts.len()];
            for corner in 0..(1u32 << n) {
                let k: Vec<f64> = (0..n)
                    .map(|i| if corner >> i & 1 == 1 { 1.0 } else { -1.0 })
                    .collect();
                let x = f.eval(&k);
                let hit = verts
                    .iter()
                    .position(|v| v.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-12));
                let idx = hit.expect("corner image must be a simplex vertex");
                seen[idx] = true;
            }
            assert!(seen.iter().all(|&s| s), "all vertices covered at n={n}");
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in 2..=4 {
            let f = reflection_map(n);
            for _ in 0..100 {
                let k: Vec<f64> = (0..n).map(|_| rng.random_range(-0.9..0.9)).collect();
                let h = 1e-5;
                let mut jac = nalgebra::DMatrix::zeros(n, n);
                for j in 0..n {
                    let mut kp = k.clone();
                    let mut km = k.clone();
                    kp[j] += h;
                    km[j] -= h;
                    let fp = f.eval(&kp);
                    let fm = f.eval(&km);
                    for i in 0..n {
                        jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
                    }
                }
                let num = jac.determinant();
                let sym = f.jacobian_det_at(&k);
                assert!(
                    (num - sym).abs() <= 1e-6 * (1.0 + sym.abs()),
                    "n={n}: {num} vs {sym}"
                );
            }
        }
    }
}
