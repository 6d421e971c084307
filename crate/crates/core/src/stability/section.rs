use nalgebra::{DMatrix, DVector};

use super::{reflection::stable_simplex_vertices, StabilityError};

/// Affine functionals `l_i(x) = c_i . x + d_i` with `l_i(v_j) = delta_ij`:
/// the barycentric coordinate functions of a full-dimensional simplex in
/// `R^n`. The simplex is exactly `{x : l_i(x) >= 0 for all i}`.
pub fn barycentric_functionals(
    vertices: &[Vec<f64>],
) -> Result<Vec<(Vec<f64>, f64)>, StabilityError> {
    let n = vertices[0].len();
    assert_eq!(vertices.len(), n + 1, "need n+1 vertices in R^n");
    let v0 = DVector::from_column_slice(&vertices[0]);
    let m = DMatrix::from_fn(n, n, |i, j| vertices[j + 1][i] - vertices[0][i]);
    let scale = m.amax().max(1.0);
    let inv = m
        .clone()
        .try_inverse()
        .filter(|_| m.determinant().abs() > 1e-12 * scale.powi(n as i32))
        .ok_or(StabilityError::DegenerateSimplex)?;

    let mut out = Vec::with_capacity(n + 1);
    // l_{i+1}(x) = row i of inv * (x - v0); l_0 = 1 - sum of the others
    let mut c0 = vec![0.0; n];
    let mut d0 = 1.0;
    for i in 0..n {
        let row: Vec<f64> = (0..n).map(|j| inv[(i, j)]).collect();
        let d = -row
            .iter()
            .zip(v0.iter())
            .map(|(a, b)| a * b)
            .sum::<f64>();
        for j in 0..n {
            c0[j] -= row[j];
        }
        d0 -= d;
        out.push((row, d));
    }
    out.insert(0, (c0, d0));
    Ok(out)
}

/// Design-space section of the degree-`n` stability simplex.
///
/// Given the affine substitution `x_full = a * x_design + b` (with `a` of
/// size `n x k`), returns the vertices of the polytope
/// `{x_design : a x_design + b in conv P}`, sorted lexicographically. For
/// the design problems of interest the result is a `k`-simplex.
pub fn section_bounding_simplex(
    n: usize,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
) -> Result<Vec<Vec<f64>>, StabilityError> {
    assert_eq!(a.nrows(), n);
    assert_eq!(b.len(), n);
    let k = a.ncols();
    let hull = stable_simplex_vertices(n);
    let functionals = barycentric_functionals(&hull)?;

    // compose with the substitution: l'(y) = (a^T c) . y + (c . b + d)
    let composed: Vec<(Vec<f64>, f64)> = functionals
        .iter()
        .map(|(c, d)| {
            let cv = DVector::from_column_slice(c);
            let cy = a.transpose() * &cv;
            (cy.iter().copied().collect(), cv.dot(b) + d)
        })
        .collect();

    let feas_tol = 1e-9;
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    for subset in combinations(composed.len(), k) {
        let m = DMatrix::from_fn(k, k, |i, j| composed[subset[i]].0[j]);
        let rhs = DVector::from_fn(k, |i, _| -composed[subset[i]].1);
        let lu = m.lu();
        let Some(x) = lu.solve(&rhs) else { continue };
        if !x.iter().all(|v| v.is_finite()) {
            continue;
        }
        let xs: Vec<f64> = x.iter().copied().collect();
        let scale = 1.0 + x.amax();
        let feasible = composed.iter().all(|(c, d)| {
            c.iter().zip(&xs).map(|(ci, xi)| ci * xi).sum::<f64>() + d >= -feas_tol * scale
        });
        if feasible
            && !vertices
                .iter()
                .any(|v| v.iter().zip(&xs).all(|(a, b)| (a - b).abs() < 1e-8 * scale))
        {
            vertices.push(xs);
        }
    }
    if vertices.is_empty() {
        return Err(StabilityError::InfeasibleSection);
    }
    vertices.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.partial_cmp(y).unwrap())
            .find(|o| !o.is_eq())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(vertices)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}
