use super::{BuildError, PmiProblem};

/// Multiplier degree assignment for one rung of the hierarchy.
///
/// `order` is the certificate order `d`; the Gram basis of `s_i` spans
/// degrees up to `d_s[i]`, of `t_j` up to `d_t[j]`, and `g` ranges over
/// `R[x]` up to `g_degree`. By default `g_degree = 2 * order`; the paper's
/// low-degree figures (`2t < 2 d_0`) are produced by capping `g_degree`
/// below the order's natural bound, which restricts the feasible set and so
/// keeps the hierarchy monotone.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeAssignment {
    pub order: u32,
    pub g_degree: u32,
    pub d_r: u32,
    /// Per `a_i`, with the constant `a_0 = 1` at index 0.
    pub d_s: Vec<u32>,
    pub d_t: Vec<u32>,
}

impl DegreeAssignment {
    /// Restrict `g` to degree `<= g_degree` (must not exceed `2 * order`).
    pub fn with_g_cap(mut self, g_degree: u32) -> Self {
        assert!(g_degree <= 2 * self.order);
        self.g_degree = g_degree;
        self
    }
}

/// Minimum relaxation order `d_0`:
/// `2 d_0 >= max(2 + deg P, max_i deg a_i, max_j deg b_j)`.
pub fn min_order(problem: &PmiProblem) -> u32 {
    let deg_p = problem.matrix().degree().max(0) as u32;
    let deg_a = problem
        .u_constraints()
        .iter()
        .map(|a| a.degree().max(0) as u32)
        .max()
        .unwrap_or(0);
    let deg_b = problem
        .b_constraints()
        .iter()
        .map(|b| b.degree().max(0) as u32)
        .max()
        .unwrap_or(0);
    let bound = (2 + deg_p).max(deg_a).max(deg_b);
    bound.div_ceil(2)
}

/// The lowest admissible multiplier degrees at order `d`:
/// `d_r = d - 1`, `d_{s_i} = d - ceil(deg a_i / 2)`,
/// `d_{t_j} = d - ceil(deg b_j / 2)`. Fails when `d` is below [`min_order`].
pub fn multiplier_degrees(problem: &PmiProblem, d: u32) -> Result<DegreeAssignment, BuildError> {
    let d0 = min_order(problem);
    if d < d0 {
        return Err(BuildError::OrderTooSmall { d, d0 });
    }
    let half = |deg: i32| (deg.max(0) as u32).div_ceil(2);
    let mut d_s = vec![d];
    d_s.extend(
        problem
            .u_constraints()
            .iter()
            .map(|a| d - half(a.degree())),
    );
    let d_t = problem
        .b_constraints()
        .iter()
        .map(|b| d - half(b.degree()))
        .collect();
    Ok(DegreeAssignment {
        order: d,
        g_degree: 2 * d,
        d_r: d - 1,
        d_s,
        d_t,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::moments::MomentSource;
    use crate::polyalg::{parse_polynomial, MatrixPolynomial, Universe};

    pub(crate) fn planar_box_problem() -> PmiProblem {
        let u = Universe::new(2, 0, 2);
        let mut p = MatrixPolynomial::zero(&u, 2);
        p.set_entry(0, 0, parse_polynomial("1 - 16*x1*x2", &u).unwrap());
        p.set_entry(0, 1, parse_polynomial("x1", &u).unwrap());
        p.set_entry(1, 1, parse_polynomial("1 - x1^2 - x2^2", &u).unwrap());
        let b = vec![
            parse_polynomial("1 - x1^2", &u).unwrap(),
            parse_polynomial("1 - x2^2", &u).unwrap(),
        ];
        PmiProblem::new(
            p,
            vec![],
            b,
            MomentSource::new_box(vec![(-1.0, 1.0), (-1.0, 1.0)]),
            None,
        )
        .unwrap()
    }

    #[test]
    fn planar_lowest_degrees_at_order_two() {
        let prob = planar_box_problem();
        assert_eq!(min_order(&prob), 2);
        let deg = multiplier_degrees(&prob, 2).unwrap();
        assert_eq!(deg.d_r, 1);
        assert_eq!(deg.d_s, vec![2]);
        assert_eq!(deg.d_t, vec![1, 1]);
        assert_eq!(deg.g_degree, 4);
    }

    #[test]
    fn below_minimum_order_errors() {
        let prob = planar_box_problem();
        assert!(matches!(
            multiplier_degrees(&prob, 1),
            Err(BuildError::OrderTooSmall { d: 1, d0: 2 })
        ));
    }

    #[test]
    fn quadratic_u_constraint_at_order_three() {
        let u = Universe::new(1, 1, 1);
        let mut p = MatrixPolynomial::zero(&u, 1);
        p.set_entry(0, 0, parse_polynomial("1 + x1*u1", &u).unwrap());
        let prob = PmiProblem::new(
            p,
            vec![parse_polynomial("1 - u1^2", &u).unwrap()],
            vec![parse_polynomial("1 - x1^2", &u).unwrap()],
            MomentSource::new_box(vec![(-1.0, 1.0)]),
            None,
        )
        .unwrap();
        let deg = multiplier_degrees(&prob, 3).unwrap();
        assert_eq!(deg.d_s, vec![3, 2]);
    }
}
