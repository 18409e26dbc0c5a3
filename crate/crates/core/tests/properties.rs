use altproj::alternating::{make_corrupting_projector, run_exact, InexactProjector, IterationTrace, SolveOptions};
use altproj::diagnostics::{angles_from_trace, fit_rate, fit_rate_from_gaps};
use altproj::inclusion::ManifoldChart;
use altproj::linalg::svd;
use altproj::linconstr::{check_licq, linearized_projection, linearized_step, newton_feasibility_step, ConstraintSystem, ACTIVE_TOL};
use altproj::qp::{solve_projection_qp, ProjectionQp};
use altproj::{Matrix, Monomial, PolyMap, ProjectableSet, Vector};
use proptest::prelude::*;

fn v(x: &[f64]) -> Vector {
    Vector::from_slice(x).unwrap()
}

fn coords(n: usize, r: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-r..r, n)
}

fn arb_vector(n: usize) -> impl Strategy<Value = Vector> {
    coords(n, 3.0).prop_map(|x| v(&x))
}

fn arb_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(coords(cols, 1.0), rows).prop_map(move |r| Matrix::from_rows(&r, cols).unwrap())
}

fn arb_convex(n: usize) -> BoxedStrategy<ProjectableSet> {
    prop_oneof![
        (coords(n, 2.0), coords(n, 2.0)).prop_map(|(a, b)| {
            let lo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.min(*y)).collect();
            let hi: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x.max(*y) + 0.1).collect();
            ProjectableSet::boxed(v(&lo), v(&hi)).unwrap()
        }),
        (arb_vector(n), 0.1..2.0f64).prop_map(|(c, r)| ProjectableSet::ball(c, r).unwrap()),
        (arb_vector(n), prop::collection::vec(arb_vector(n), 0..n))
            .prop_map(|(a, d)| ProjectableSet::affine_span(a, &d).unwrap()),
        (arb_vector(n), -1.0..1.0f64)
            .prop_filter("nonzero normal", |(a, _)| a.norm() > 0.1)
            .prop_map(|(a, b)| ProjectableSet::hyperplane(a, b).unwrap()),
        (arb_vector(n), -1.0..1.0f64)
            .prop_filter("nonzero normal", |(a, _)| a.norm() > 0.1)
            .prop_map(|(a, b)| ProjectableSet::halfspace(a, b).unwrap()),
        (arb_matrix(3, n), arb_vector(n), coords(3, 1.0)).prop_map(move |(a, x0, s)| {
            let b = &a.mul_vec(&x0).unwrap() + &v(&s.iter().map(|x| x.abs()).collect::<Vec<_>>());
            ProjectableSet::polyhedron(a, b, Matrix::zeros(0, n), Vector::zeros(0)).unwrap()
        }),
    ]
    .boxed()
}

fn arb_nonconvex(n: usize) -> BoxedStrategy<ProjectableSet> {
    prop_oneof![
        (arb_vector(n), 0.1..2.0f64).prop_map(|(c, r)| ProjectableSet::sphere(c, r).unwrap()),
        prop::collection::vec(arb_vector(n), 1..6).prop_map(|p| ProjectableSet::finite_points(p).unwrap()),
    ]
    .boxed()
}

/// A set together with a point of its ambient space.
fn arb_set_and_point() -> impl Strategy<Value = (ProjectableSet, Vector)> {
    let vector_sets = (1usize..=4).prop_flat_map(|n| {
        (prop_oneof![arb_convex(n), arb_nonconvex(n)], arb_vector(n))
    });
    let matrices = (2usize..=3, 2usize..=3).prop_flat_map(|(r, c)| {
        (1..=r.min(c)).prop_flat_map(move |k| {
            (Just(ProjectableSet::fixed_rank(r, c, k).unwrap()), arb_vector(r * c))
        })
    });
    prop_oneof![4 => vector_sets, 1 => matrices]
}

fn circle() -> PolyMap {
    PolyMap::new(
        2,
        vec![vec![
            Monomial::power(1.0, 2, 0, 2),
            Monomial::power(1.0, 2, 1, 2),
            Monomial::constant(-1.0, 2),
        ]],
    )
    .unwrap()
}

fn lines_at(theta: f64) -> (ProjectableSet, ProjectableSet) {
    let q = ProjectableSet::affine_subspace(v(&[0.0, 0.0]), vec![v(&[1.0, 0.0])]).unwrap();
    let m = ProjectableSet::affine_subspace(v(&[0.0, 0.0]), vec![v(&[theta.cos(), theta.sin()])]).unwrap();
    (q, m)
}

proptest! {
    #[test]
    fn projection_is_idempotent((set, z) in arb_set_and_point()) {
        let p = set.project(&z).unwrap();
        let pp = set.project(&p).unwrap();
        prop_assert!(p.distance(&pp) <= 1e-10 * (1.0 + p.norm()), "{}: {}", set.variant_name(), p.distance(&pp));
        prop_assert!(set.contains(&p, 1e-9).unwrap());
        prop_assert!((set.distance(&z).unwrap() - z.distance(&p)).abs() <= 1e-12);
    }

    #[test]
    fn convex_projection_is_nonexpansive(
        (set, a, b) in (1usize..=4).prop_flat_map(|n| (arb_convex(n), arb_vector(n), arb_vector(n)))
    ) {
        let pa = set.project(&a).unwrap();
        let pb = set.project(&b).unwrap();
        prop_assert!(set.is_convex());
        prop_assert!(pa.distance(&pb) <= a.distance(&b) + 1e-9, "{}", set.variant_name());
    }

    #[test]
    fn residual_lies_in_normal_cone(
        (set, z) in (1usize..=4).prop_flat_map(|n| (prop_oneof![arb_convex(n), arb_nonconvex(n)], arb_vector(n)))
    ) {
        let p = set.project(&z).unwrap();
        let residual = &z - &p;
        if residual.norm() > 1e-8 {
            let cone = set.normal_cone(&p).unwrap();
            prop_assert!(cone.contains(&residual, 1e-6), "{}", set.variant_name());
        }
    }

    #[test]
    fn finite_points_match_brute_force(
        (points, z) in (1usize..=4).prop_flat_map(|n| (prop::collection::vec(arb_vector(n), 1..8), arb_vector(n)))
    ) {
        let set = ProjectableSet::finite_points(points.clone()).unwrap();
        let best = points.iter().map(|p| p.distance(&z)).fold(f64::INFINITY, f64::min);
        prop_assert_eq!(set.distance(&z).unwrap(), best);
    }

    #[test]
    fn fixed_rank_projection_keeps_leading_singular_values(
        (k, z) in (1usize..=2).prop_flat_map(|k| (Just(k), arb_vector(6)))
    ) {
        let set = ProjectableSet::fixed_rank(2, 3, k).unwrap();
        let p = Matrix::from_flat(&set.project(&z).unwrap(), 2, 3).unwrap();
        let full = svd(&Matrix::from_flat(&z, 2, 3).unwrap()).unwrap();
        let trunc = svd(&p).unwrap();
        for i in 0..k {
            prop_assert!((full.sigma[i] - trunc.sigma[i]).abs() <= 1e-9);
        }
        for i in k..2 {
            prop_assert!(trunc.sigma[i] <= 1e-9);
        }
    }

    #[test]
    fn qp_solution_is_certified_and_optimal(
        (n, a, x0, slack, target) in (1usize..=5).prop_flat_map(|n| {
            (Just(n), arb_matrix(4, n), arb_vector(n), coords(4, 1.0), arb_vector(n))
        })
    ) {
        let s = v(&slack.iter().map(|x| x.abs()).collect::<Vec<_>>());
        let b = &a.mul_vec(&x0).unwrap() + &s;
        let qp = ProjectionQp::new(target.clone(), a, b, Matrix::zeros(0, n), Vector::zeros(0)).unwrap();
        let cert = solve_projection_qp(&qp).unwrap();
        prop_assert!(cert.is_valid(&qp, 1e-8));
        // x0 is feasible, so the projection cannot be farther away.
        prop_assert!(cert.solution.distance(&target) <= x0.distance(&target) + 1e-9);
    }

    #[test]
    fn linearized_projection_is_min_norm_step(z in arb_vector(2)) {
        let line = PolyMap::affine(&Matrix::from_rows(&[vec![1.0, -1.0]], 2).unwrap(), &v(&[0.25])).unwrap();
        let sys = ConstraintSystem::new(circle(), PolyMap::empty(2), line, ProjectableSet::whole_space(2), 2).unwrap();
        let (x, cert) = linearized_projection(&sys, &z).unwrap();
        let s = linearized_step(&sys, &z).unwrap();
        prop_assert!(x.distance(&(&z + &s)) <= 1e-10);
        prop_assert!(!cert.solution.iter().any(|c| c.is_nan()));
    }

    #[test]
    fn newton_point_is_no_closer_than_linearized_projection(z in arb_vector(2)) {
        prop_assume!(z.norm() > 1.05);
        let line = PolyMap::affine(&Matrix::from_rows(&[vec![1.0, 2.0]], 2).unwrap(), &v(&[-0.5])).unwrap();
        let sys = ConstraintSystem::new(circle(), PolyMap::empty(2), line, ProjectableSet::whole_space(2), 2).unwrap();
        if let Ok(newton) = newton_feasibility_step(&sys, &z) {
            let (x, _) = linearized_projection(&sys, &z).unwrap();
            prop_assert!(z.distance(&x) <= z.distance(&newton) + 1e-9);
        }
    }

    #[test]
    fn licq_is_invariant_under_reordering(z in arb_vector(2), shift in -1.0..1.0f64) {
        let g1 = circle();
        let g2 = PolyMap::affine(&Matrix::from_rows(&[vec![1.0, 0.0]], 2).unwrap(), &v(&[shift])).unwrap();
        let forward = PolyMap::stack(&[&g1, &g2]).unwrap();
        let backward = PolyMap::stack(&[&g2, &g1]).unwrap();
        let mk = |g: PolyMap| ConstraintSystem::new(g, PolyMap::empty(2), PolyMap::empty(2), ProjectableSet::whole_space(2), 2).unwrap();
        let a = check_licq(&mk(forward), &z, ACTIVE_TOL).unwrap();
        let b = check_licq(&mk(backward), &z, ACTIVE_TOL).unwrap();
        prop_assert_eq!(a.holds(), b.holds());
        prop_assert_eq!(a.active.len(), b.active.len());
        match (a.smallest_singular_value, b.smallest_singular_value) {
            (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-12),
            (x, y) => prop_assert_eq!(x, y),
        }
    }

    #[test]
    fn chart_normal_basis_is_orthogonal_to_jacobian(x in arb_vector(2)) {
        // (u, w) ↦ (u, w, u² + w³)
        let f = PolyMap::new(2, vec![
            vec![Monomial::power(1.0, 2, 0, 1)],
            vec![Monomial::power(1.0, 2, 1, 1)],
            vec![Monomial::power(1.0, 2, 0, 2), Monomial::power(1.0, 2, 1, 3)],
        ]).unwrap();
        let chart = ManifoldChart::unbounded(f.clone());
        let basis = chart.normal_basis(&x).unwrap();
        prop_assert_eq!(basis.len(), 1);
        let j = f.jacobian(&x).unwrap();
        for c in 0..j.cols() {
            prop_assert!(basis[0].dot(&j.column(c)).abs() <= 1e-10 * (1.0 + j.column(c).norm()));
        }
        prop_assert!((basis[0].norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn jacobian_matches_central_differences(x in arb_vector(2)) {
        let f = PolyMap::stack(&[&circle(), &PolyMap::new(2, vec![vec![
            Monomial::new(0.5, vec![2, 1]),
            Monomial::new(-1.0, vec![0, 3]),
        ]]).unwrap()]).unwrap();
        prop_assert!(f.check_jacobian(&x, 1e-5).unwrap() <= 1e-6 * (1.0 + x.norm().powi(3)));
    }

    #[test]
    fn angles_are_scale_invariant(theta in 0.2..1.4f64, scale_exp in 0i32..=3) {
        let (q, m) = lines_at(theta);
        let opts = SolveOptions { max_iters: 20, ..SolveOptions::default() };
        let base = run_exact(&q, &m, &v(&[1.0, 0.0]), &opts).unwrap();
        let factor = 10f64.powi(scale_exp);
        let scaled = run_exact(&q, &m, &v(&[factor, 0.0]), &opts).unwrap();
        let a = angles_from_trace(&base).unwrap();
        let b = angles_from_trace(&scaled).unwrap();
        prop_assert!((a.min_separability - b.min_separability).abs() <= 1e-9);
        prop_assert!((a.min_super_regularity - b.min_super_regularity).abs() <= 1e-9);
        prop_assert!((a.min_separability - theta).abs() <= 1e-6);
    }

    #[test]
    fn geometric_gaps_give_exact_rate(c in 0.1..10.0f64, r in 0.05..0.95f64, len in 8usize..40) {
        let gaps: Vec<f64> = (0..len).map(|k| c * r.powi(k as i32)).collect();
        let report = fit_rate_from_gaps(&gaps).unwrap();
        prop_assert!((report.rate - r).abs() <= 1e-12);
        prop_assert!(report.fit_good && report.contracting);
    }

    #[test]
    fn rate_respects_cosine_of_measured_angle(theta in 0.3..1.2f64) {
        let (q, m) = lines_at(theta);
        let trace = run_exact(&q, &m, &v(&[1.0, 0.0]), &SolveOptions::default()).unwrap();
        let alpha = angles_from_trace(&trace).unwrap().min_separability;
        let rate = fit_rate(&trace).unwrap().rate;
        prop_assert!(rate <= alpha.cos() + 0.05);
    }

    #[test]
    fn corruption_has_prescribed_size(z in arb_vector(3), eps in 0.0..0.5f64, seed in any::<u64>(), k in 0usize..100) {
        let set = ProjectableSet::sphere(Vector::zeros(3), 1.0).unwrap();
        prop_assume!(z.norm() > 0.1);
        let proj = make_corrupting_projector(set.clone(), eps, seed).unwrap();
        let x = proj.project_inexact(&z, k).unwrap();
        let exact = set.project(&z).unwrap();
        let d = set.distance(&z).unwrap();
        prop_assert!((x.distance(&exact) - eps * d).abs() <= 1e-12 * (1.0 + d));
        prop_assert_eq!(proj.project_inexact(&z, k).unwrap(), x);
    }

    #[test]
    fn svd_reconstructs(a in (1usize..=4, 1usize..=4).prop_flat_map(|(r, c)| arb_matrix(r, c))) {
        let s = svd(&a).unwrap();
        let back = s.reconstruct();
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                prop_assert!((back[(i, j)] - a[(i, j)]).abs() <= 1e-12);
            }
        }
        prop_assert!(s.sigma.as_slice().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn sets_round_trip_through_json((set, _) in arb_set_and_point()) {
        let json = serde_json::to_string(&set).unwrap();
        let back: ProjectableSet = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(back.variant_name(), set.variant_name());
        prop_assert_eq!(back.ambient_dim(), set.ambient_dim());
    }
}

#[test]
fn exact_trace_is_reproducible() {
    let (q, m) = lines_at(0.7);
    let run = || -> IterationTrace { run_exact(&q, &m, &v(&[2.0, 0.0]), &SolveOptions::default()).unwrap() };
    assert_eq!(run(), run());
}
