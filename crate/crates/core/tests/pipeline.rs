//! End-to-end pipeline checks: assemble the inner-approximation SDP for
//! small instances, solve it, extract the certificate, and verify it with
//! the sampling oracles.

use pmi_core::moments::MomentSource;
use pmi_core::polyalg::{parse_polynomial, MatrixPolynomial, Universe};
use pmi_core::sdpcore::{solve, SolveOptions};
use pmi_core::sosbuild::{
    build_inner_sdp, build_moment_sdp, extract_solution, multiplier_degrees, PmiProblem, Variant,
};
use pmi_core::verify::{l1_gap, mc_volume, soundness_grid, u_samples};

fn planar_problem(disk: bool) -> PmiProblem {
    let u = Universe::new(2, 0, 2);
    let mut p = MatrixPolynomial::zero(&u, 2);
    p.set_entry(0, 0, parse_polynomial("1 - 16*x1*x2", &u).unwrap());
    p.set_entry(0, 1, parse_polynomial("x1", &u).unwrap());
    p.set_entry(1, 1, parse_polynomial("1 - x1^2 - x2^2", &u).unwrap());
    let (b, source) = if disk {
        (
            vec![parse_polynomial("1 - x1^2 - x2^2", &u).unwrap()],
            MomentSource::new_ball(vec![0.0, 0.0], 1.0),
        )
    } else {
        (
            vec![
                parse_polynomial("1 - x1^2", &u).unwrap(),
                parse_polynomial("1 - x2^2", &u).unwrap(),
            ],
            MomentSource::new_box(vec![(-1.0, 1.0), (-1.0, 1.0)]),
        )
    };
    let mut prob = PmiProblem::new(p, vec![], b, source, None).unwrap();
    prob.add_archimedean_guards();
    prob
}

fn solve_planar(disk: bool, order: u32) -> pmi_core::sosbuild::InnerApprox {
    let prob = planar_problem(disk);
    let deg = multiplier_degrees(&prob, order).unwrap();
    let build = build_inner_sdp(&prob, &deg, &Variant::Plain).unwrap();
    let sol = solve(&build.sdp, &SolveOptions::default()).unwrap();
    extract_solution(&prob, &build, &sol).expect("planar instance solves to optimality")
}

#[test]
fn trivial_identity_matrix_gives_constant_one() {
    // P = I: lambda == 1, so the optimal g is the constant 1
    let u = Universe::new(2, 0, 2);
    let p = MatrixPolynomial::identity(&u, 2);
    let b = vec![
        parse_polynomial("1 - x1^2", &u).unwrap(),
        parse_polynomial("1 - x2^2", &u).unwrap(),
    ];
    let mut prob = PmiProblem::new(
        p,
        vec![],
        b,
        MomentSource::new_box(vec![(-1.0, 1.0), (-1.0, 1.0)]),
        None,
    )
    .unwrap();
    prob.add_archimedean_guards();
    let deg = multiplier_degrees(&prob, 2).unwrap();
    let build = build_inner_sdp(&prob, &deg, &Variant::Plain).unwrap();
    let sol = solve(&build.sdp, &SolveOptions::default()).unwrap();
    let approx = extract_solution(&prob, &build, &sol).unwrap();
    // int_B g over the 2x2 box should be 4 (g == 1)
    assert!(
        (approx.objective_value - 4.0).abs() < 1e-5,
        "objective {}",
        approx.objective_value
    );
    let mut point = vec![0.0; 4];
    for x1 in [-0.9, -0.3, 0.0, 0.4, 0.8] {
        for x2 in [-0.7, 0.1, 0.9] {
            point[0] = x1;
            point[1] = x2;
            let v = approx.g.eval(&point);
            assert!((v - 1.0).abs() < 1e-4, "g({x1},{x2}) = {v}");
        }
    }
}

#[test]
fn planar_box_order_two_certificate() {
    let approx = solve_planar(false, 2);
    assert!(approx.g.degree() <= 4);
    assert_eq!(approx.order, 2);
    assert!(
        approx.diagnostics.identity_residual < 1e-6,
        "identity residual {}",
        approx.diagnostics.identity_residual
    );

    // soundness on a grid: g >= 1e-6 implies sampled lambda >= -1e-6
    let prob = planar_problem(false);
    let report = soundness_grid(&prob, &approx.g, 100, 7, 1e-6, 1e-6).unwrap();
    assert!(report.samples > 100, "approximation is nonempty");
    assert_eq!(report.violations, 0, "worst margin {}", report.worst_margin);

    // the PMI holds at the origin and fails at (0.25, 0.25)
    let us = u_samples(&prob, 1).unwrap();
    let (inside, margin) = pmi_core::verify::membership(&prob, &[0.0, 0.0], &us);
    assert!(inside && (margin - 1.0).abs() < 1e-12);
    let (outside, margin) = pmi_core::verify::membership(&prob, &[0.25, 0.25], &us);
    assert!(!outside && margin < -0.06);
}

#[test]
fn disk_embedding_is_tighter_than_box() {
    let box_approx = solve_planar(false, 2);
    let disk_approx = solve_planar(true, 2);
    let box_prob = planar_problem(false);
    let disk_prob = planar_problem(true);

    let n = 200_000;
    let vol_box = {
        let g = box_approx.g.clone();
        let u = *box_prob.universe();
        mc_volume(
            move |x| {
                let mut p = vec![0.0; u.total()];
                p[..2].copy_from_slice(x);
                g.eval(&p) >= 0.0
            },
            box_prob.moment_source(),
            n,
            99,
        )
    };
    let vol_disk = {
        let g = disk_approx.g.clone();
        let u = *disk_prob.universe();
        mc_volume(
            move |x| {
                let mut p = vec![0.0; u.total()];
                p[..2].copy_from_slice(x);
                g.eval(&p) >= 0.0
            },
            disk_prob.moment_source(),
            n,
            99,
        )
    };
    let sigma = (vol_box.std_error.powi(2) + vol_disk.std_error.powi(2)).sqrt();
    assert!(
        vol_disk.value > vol_box.value + 3.0 * sigma,
        "disk {} +- {} vs box {} +- {}",
        vol_disk.value,
        vol_disk.std_error,
        vol_box.value,
        vol_box.std_error
    );
}

#[test]
fn moment_form_closes_the_duality_gap() {
    let prob = planar_problem(false);
    let deg = multiplier_degrees(&prob, 2).unwrap();
    let sos = build_inner_sdp(&prob, &deg, &Variant::Plain).unwrap();
    let mom = build_moment_sdp(&prob, &deg).unwrap();
    let sos_sol = solve(&sos.sdp, &SolveOptions::default()).unwrap();
    let mom_sol = solve(&mom.sdp, &SolveOptions::default()).unwrap();
    assert_eq!(sos_sol.status, pmi_core::sdpcore::SolveStatus::Optimal);
    assert_eq!(mom_sol.status, pmi_core::sdpcore::SolveStatus::Optimal);
    // max int g (SOS side) == min L_y(v^T P v) (moment side)
    let sos_value = -sos_sol.primal_objective;
    let mom_value = mom_sol.primal_objective;
    let rel = (sos_value - mom_value).abs() / (1.0 + sos_value.abs() + mom_value.abs());
    assert!(
        rel <= 1e-5,
        "sos {} vs moment {} (rel {rel:.3e})",
        sos_value,
        mom_value
    );
}

#[test]
fn l1_gap_shrinks_with_order() {
    let prob = planar_problem(false);
    let g2 = solve_planar(false, 2);
    let g3 = solve_planar(false, 3);
    let n = 100_000;
    let gap2 = l1_gap(&g2.g, &prob, n, 5).unwrap();
    let gap3 = l1_gap(&g3.g, &prob, n, 5).unwrap();
    assert_eq!(gap2.violations, 0);
    assert_eq!(gap3.violations, 0);
    let sigma = (gap2.std_error.powi(2) + gap3.std_error.powi(2)).sqrt();
    assert!(
        gap3.value <= gap2.value + 3.0 * sigma,
        "rho_3 {} vs rho_2 {}",
        gap3.value,
        gap2.value
    );
    // exact integral comparison: common samples make int g monotone
    assert!(g3.objective_value >= g2.objective_value - 1e-7);
}
