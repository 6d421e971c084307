//! Closed-form Lebesgue moments `y_a = int_B x^a dx` of the supported
//! bounding sets: axis-aligned boxes, balls, simplices, and the discrete-time
//! stability body via the reflection-coefficient pushforward.
//!
//! Moments are computed on demand and memoized per `(source, alpha)`; the
//! cache is shared across clones and safe for concurrent readers.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use thiserror::Error;

use crate::polyalg::{Polynomial, Universe};
use crate::stability::{reflection_map, ReflectionMap};

#[derive(Debug, Error)]
pub enum MomentError {
    #[error("degenerate simplex: vertex matrix is rank-deficient")]
    DegenerateSimplex,
}

/// Description of a bounding set with known moments.
#[derive(Clone, Debug, PartialEq)]
pub enum MomentKind {
    /// Axis-aligned box given by per-axis intervals.
    Box { bounds: Vec<(f64, f64)> },
    /// Euclidean ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// Full-dimensional simplex given by its `n+1` vertices.
    Simplex { vertices: Vec<Vec<f64>> },
    /// Schur stability body of degree `n`, the image of the unit box under
    /// the reflection-coefficient map.
    StabilityBody { n: usize, map: ReflectionMap },
}

/// Uniform moment-source interface consumed by the SDP objective.
#[derive(Clone, Debug)]
pub struct MomentSource {
    kind: MomentKind,
    cache: Arc<RwLock<HashMap<Vec<u32>, f64>>>,
}

impl PartialEq for MomentSource {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl MomentSource {
    pub fn new_box(bounds: Vec<(f64, f64)>) -> Self {
        assert!(!bounds.is_empty());
        assert!(bounds.iter().all(|(lo, hi)| lo < hi), "empty box interval");
        Self::from_kind(MomentKind::Box { bounds })
    }

    pub fn new_ball(center: Vec<f64>, radius: f64) -> Self {
        assert!(radius > 0.0);
        Self::from_kind(MomentKind::Ball { center, radius })
    }

    pub fn new_simplex(vertices: Vec<Vec<f64>>) -> Result<Self, MomentError> {
        // reject rank-deficient vertex matrices up front
        simplex_moments(&vertices, &vec![0u32; vertices[0].len()])?;
        Ok(Self::from_kind(MomentKind::Simplex { vertices }))
    }

    pub fn new_stability_body(n: usize) -> Self {
        Self::from_kind(MomentKind::StabilityBody {
            n,
            map: reflection_map(n),
        })
    }

    fn from_kind(kind: MomentKind) -> Self {
        MomentSource {
            kind,
            cache: Arc::new(RwLock::new(HashMap::new())),
        }
    }

    pub fn kind(&self) -> &MomentKind {
        &self.kind
    }

    pub fn dimension(&self) -> usize {
        match &self.kind {
            MomentKind::Box { bounds } => bounds.len(),
            MomentKind::Ball { center, .. } => center.len(),
            MomentKind::Simplex { vertices } => vertices[0].len(),
            MomentKind::StabilityBody { n, .. } => *n,
        }
    }

    /// Lebesgue moment `int_B x^alpha dx`; deterministic and memoized.
    pub fn get(&self, alpha: &[u32]) -> f64 {
        assert_eq!(alpha.len(), self.dimension());
        if let Some(&v) = self.cache.read().unwrap().get(alpha) {
            return v;
        }
        let v = match &self.kind {
            MomentKind::Box { bounds } => box_moments(bounds, alpha),
            MomentKind::Ball { center, radius } => shifted_ball_moments(center, *radius, alpha),
            MomentKind::Simplex { vertices } => {
                simplex_moments(vertices, alpha).expect("validated at construction")
            }
            MomentKind::StabilityBody { map, .. } => pushforward_moments(map, alpha),
        };
        self.cache.write().unwrap().insert(alpha.to_vec(), v);
        v
    }

    /// `get(0)`, the volume of the bounding set.
    pub fn volume(&self) -> f64 {
        self.get(&vec![0; self.dimension()])
    }
}

/// Product of one-dimensional integrals `int_lo^hi t^a dt` over the axes.
pub fn box_moments(bounds: &[(f64, f64)], alpha: &[u32]) -> f64 {
    assert_eq!(bounds.len(), alpha.len());
    bounds
        .iter()
        .zip(alpha)
        .map(|(&(lo, hi), &a)| {
            let e = a as i32 + 1;
            (hi.powi(e) - lo.powi(e)) / e as f64
        })
        .product()
}

/// `Gamma(k/2)` for integer `k >= 1`.
fn gamma_half(k: u32) -> f64 {
    assert!(k >= 1);
    let (mut s, mut g) = if k % 2 == 1 {
        (0.5, PI.sqrt())
    } else {
        (1.0, 1.0)
    };
    while s < k as f64 / 2.0 {
        g *= s;
        s += 1.0;
    }
    g
}

/// Moments of the ball of given radius centered at the origin in `R^n`:
/// zero when any exponent is odd, otherwise
/// `2 prod_i Gamma((a_i+1)/2) / ((n+|a|) Gamma((n+|a|)/2))` scaled by
/// `radius^(n+|a|)`.
pub fn ball_moments(n: usize, radius: f64, alpha: &[u32]) -> f64 {
    assert_eq!(alpha.len(), n);
    assert!(radius > 0.0);
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let total: u32 = alpha.iter().sum();
    let num: f64 = alpha.iter().map(|&a| gamma_half(a + 1)).product();
    let denom = (n as u32 + total) as f64 * gamma_half(n as u32 + total);
    2.0 * num / denom * radius.powi((n as u32 + total) as i32)
}

fn shifted_ball_moments(center: &[f64], radius: f64, alpha: &[u32]) -> f64 {
    if center.iter().all(|&c| c == 0.0) {
        return ball_moments(center.len(), radius, alpha);
    }
    // binomial shift: int_{B(c,r)} x^a dx = sum_{b <= a} C(a,b) c^{a-b} m_b
    let n = center.len();
    let mut total = 0.0;
    let mut beta = vec![0u32; n];
    loop {
        let mut coef = 1.0;
        for i in 0..n {
            coef *= binomial(alpha[i], beta[i]) * center[i].powi((alpha[i] - beta[i]) as i32);
        }
        if coef != 0.0 {
            total += coef * ball_moments(n, radius, &beta);
        }
        // odometer over beta <= alpha
        let mut i = 0;
        loop {
            if i == n {
                return total;
            }
            if beta[i] < alpha[i] {
                beta[i] += 1;
                break;
            }
            beta[i] = 0;
            i += 1;
        }
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Moments of a full-dimensional simplex, via the affine map from the
/// standard simplex and the Dirichlet integral
/// `int_D l^b dl = prod b_i! / (n + |b|)!`.
pub fn simplex_moments(vertices: &[Vec<f64>], alpha: &[u32]) -> Result<f64, MomentError> {
    let n = vertices[0].len();
    assert_eq!(vertices.len(), n + 1, "need n+1 vertices in R^n");
    assert_eq!(alpha.len(), n);
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| vertices[j + 1][i] - vertices[0][i]);
    let det = m.determinant();
    let scale = m.amax().max(1.0);
    if det.abs() <= 1e-12 * scale.powi(n as i32) {
        return Err(MomentError::DegenerateSimplex);
    }

    // expand x^alpha composed with x = v0 + M*l as a polynomial in l
    let u = Universe::new(n, 0, 0);
    let mut integrand = Polynomial::constant(&u, 1.0);
    for i in 0..n {
        if alpha[i] == 0 {
            continue;
        }
        let mut xi = Polynomial::constant(&u, vertices[0][i]);
        for j in 0..n {
            xi = &xi + &Polynomial::variable(&u, j).scale(m[(i, j)]);
        }
        integrand = &integrand * &xi.pow(alpha[i]);
    }

    let mut total = 0.0;
    for (mono, c) in integrand.terms() {
        let beta = mono.exponents();
        let num: f64 = beta.iter().map(|&b| factorial(b)).product();
        total += c * num / factorial(n as u32 + mono.degree());
    }
    Ok(det.abs() * total)
}

/// Moments of the stability body `P = f(K)` by symbolic expansion of
/// `x^alpha` composed with `f` times `det grad f`, integrated term by term
/// over the unit box `K`.
pub fn pushforward_moments(map: &ReflectionMap, alpha: &[u32]) -> f64 {
    assert_eq!(alpha.len(), map.n);
    let mut integrand = map.jacobian_det.clone();
    for (i, &a) in alpha.iter().enumerate() {
        if a > 0 {
            integrand = &integrand * &map.components[i].pow(a);
        }
    }
    let mut total = 0.0;
    'terms: for (mono, c) in integrand.terms() {
        let mut w = c;
        for &e in mono.exponents() {
            if e % 2 == 1 {
                continue 'terms;
            }
            w *= 2.0 / (e + 1) as f64;
        }
        total += w;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_box_moments() {
        let b = [(-1.0, 1.0), (-1.0, 1.0)];
        assert_eq!(box_moments(&b, &[0, 0]), 4.0);
        assert_eq!(box_moments(&b, &[1, 0]), 0.0);
        assert!((box_moments(&b, &[2, 2]) - 4.0 / 9.0).abs() < 1e-15);
        // 4 / ((a1+1)(a2+1)) for even exponents
        for a1 in [0u32, 2, 4] {
            for a2 in [0u32, 2, 6] {
                let expect = 4.0 / ((a1 + 1) as f64 * (a2 + 1) as f64);
                assert!((box_moments(&b, &[a1, a2]) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unit_disk_moments() {
        assert!((ball_moments(2, 1.0, &[0, 0]) - PI).abs() < 1e-12);
        assert_eq!(ball_moments(2, 1.0, &[1, 0]), 0.0);
        // oracle: polar integral of x^2 over the disk = pi/4
        assert!((ball_moments(2, 1.0, &[2, 0]) - PI / 4.0).abs() < 1e-12);
        // Gamma-quotient form for the disk: G((a1+1)/2) G((a2+1)/2) / G(2 + (a1+a2)/2)
        for a1 in [0u32, 2, 4] {
            for a2 in [0u32, 2] {
                let expect =
                    gamma_half(a1 + 1) * gamma_half(a2 + 1) / gamma_half(4 + a1 + a2);
                assert!((ball_moments(2, 1.0, &[a1, a2]) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn radius_scaling() {
        let r: f64 = 1.7;
        let a = [2u32, 4];
        let total = 2 + a.iter().sum::<u32>();
        let expect = ball_moments(2, 1.0, &a) * r.powi(total as i32);
        assert!((ball_moments(2, r, &a) - expect).abs() < 1e-12 * expect.abs().max(1.0));
    }

    #[test]
    fn standard_triangle() {
        let verts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!((simplex_moments(&verts, &[0, 0]).unwrap() - 0.5).abs() < 1e-15);
        // oracle: int_0^1 int_0^{1-x} x dy dx = 1/6
        assert!((simplex_moments(&verts, &[1, 0]).unwrap() - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn design_triangle_area() {
        let verts = vec![vec![-0.25, 1.0], vec![0.875, -0.5], vec![-0.625, -0.5]];
        // shoelace oracle: 9/8
        assert!((simplex_moments(&verts, &[0, 0]).unwrap() - 1.125).abs() < 1e-12);
    }

    #[test]
    fn degenerate_simplex_rejected() {
        let verts = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]];
        assert!(matches!(
            simplex_moments(&verts, &[0, 0]),
            Err(MomentError::DegenerateSimplex)
        ));
        assert!(MomentSource::new_simplex(verts).is_err());
    }

    #[test]
    fn simplex_translation_binomial_identity() {
        let verts = vec![vec![-0.25, 1.0], vec![0.875, -0.5], vec![-0.625, -0.5]];
        let t = [0.3, -0.8];
        let shifted: Vec<Vec<f64>> = verts
            .iter()
            .map(|v| v.iter().zip(&t).map(|(a, b)| a + b).collect())
            .collect();
        for alpha in [[1u32, 0], [2, 1], [3, 2], [0, 4]] {
            let lhs = simplex_moments(&shifted, &alpha).unwrap();
            let mut rhs = 0.0;
            for b1 in 0..=alpha[0] {
                for b2 in 0..=alpha[1] {
                    rhs += binomial(alpha[0], b1)
                        * binomial(alpha[1], b2)
                        * t[0].powi((alpha[0] - b1) as i32)
                        * t[1].powi((alpha[1] - b2) as i32)
                        * simplex_moments(&verts, &[b1, b2]).unwrap();
                }
            }
            assert!((lhs - rhs).abs() < 1e-10, "alpha={alpha:?}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn stability_body_volume_n3() {
        let map = reflection_map(3);
        // symbolic integral of (1+k2)(1-k3^2) over [-1,1]^3 = 2*2*(4/3)
        assert!((pushforward_moments(&map, &[0, 0, 0]) - 16.0 / 3.0).abs() < 1e-12);
        assert_eq!(pushforward_moments(&map, &[0, 0, 1]), 0.0);
        assert_eq!(pushforward_moments(&map, &[1, 0, 0]), 0.0);
    }

    #[test]
    fn source_memoizes_and_shares() {
        let s = MomentSource::new_stability_body(3);
        let v1 = s.get(&[2, 0, 0]);
        let s2 = s.clone();
        let v2 = s2.get(&[2, 0, 0]);
        assert_eq!(v1, v2);
        assert!(s.volume() > 0.0);
    }

    #[test]
    fn shifted_ball_against_box_bound() {
        // volume independent of center
        let v0 = shifted_ball_moments(&[0.0, 0.0], 2.0, &[0, 0]);
        let v1 = shifted_ball_moments(&[0.5, -1.0], 2.0, &[0, 0]);
        assert!((v0 - v1).abs() < 1e-12);
        // first moment of a shifted ball = center * volume
        let m1 = shifted_ball_moments(&[0.5, -1.0], 2.0, &[1, 0]);
        assert!((m1 - 0.5 * v0).abs() < 1e-12);
    }
}
