//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line; exits nonzero if any fails.

#![allow(clippy::needless_range_loop)]

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_3, FRAC_PI_4};
use std::process::ExitCode;
use std::time::Instant;

use altproj::alternating::{make_corrupting_projector, run_exact, run_inexact, SolveOptions, Status};
use altproj::diagnostics::fit_rate;
use altproj::inclusion::{solve_inclusion, verify_faithfulness, InclusionProblem, ManifoldChart, DEFAULT_ANGLE_FLOOR};
use altproj::linconstr::{decay_samples, geometric_path, measure_quadratic_decay, solve_constraint_system, ConstraintSystem, QuadraticDecay};
use altproj::qp::{solve_projection_qp, KktCertificate, ProjectionQp, QpError};
use altproj::{Matrix, Monomial, PolyMap, ProjectableSet, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn v(x: &[f64]) -> Vector {
    Vector::from_slice(x).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn line_through_origin(theta: f64) -> ProjectableSet {
    ProjectableSet::affine_subspace(v(&[0.0, 0.0]), vec![v(&[theta.cos(), theta.sin()])]).unwrap()
}

fn x_axis() -> ProjectableSet {
    line_through_origin(0.0)
}

fn measured_rate(q: &ProjectableSet, m: &ProjectableSet, z0: &Vector) -> Result<f64, String> {
    let trace = run_exact(q, m, z0, &SolveOptions::default()).map_err(|e| e.to_string())?;
    if trace.status != Status::Converged {
        return Err(format!("status {}", trace.status));
    }
    fit_rate(&trace).map(|r| r.rate).map_err(|e| e.to_string())
}

fn two_lines_rate() -> Outcome {
    let z0 = v(&[1.0, 0.0]);
    let mut details = Vec::new();
    let mut ok = true;
    for (theta, tol) in [(FRAC_PI_4, 0.02), (FRAC_PI_3, 0.02)] {
        // Each cycle scales the iterate by cos²θ.
        let oracle = theta.cos().powi(2);
        let rate = measured_rate(&x_axis(), &line_through_origin(theta), &z0)?;
        ok &= (rate - oracle).abs() <= tol;
        details.push(format!("theta={theta:.4} rate={rate:.6} oracle={oracle:.6}"));
    }
    check(ok, details.join(", "))
}

fn circle_line_rate() -> Outcome {
    let q = ProjectableSet::hyperplane(v(&[0.0, 1.0]), 0.5).unwrap();
    let m = ProjectableSet::sphere(v(&[0.0, 0.0]), 1.0).unwrap();
    let rate = measured_rate(&q, &m, &v(&[0.75f64.sqrt() + 0.1, 0.5]))?;
    // At (√0.75, 0.5) the circle's tangent makes 60° with the line.
    let oracle = (60f64.to_radians()).cos().powi(2);
    check((rate - oracle).abs() <= 0.05, format!("rate={rate:.6} oracle={oracle:.6}"))
}

fn unit_circle_equality() -> ConstraintSystem {
    let h = PolyMap::new(
        2,
        vec![vec![
            Monomial::power(1.0, 2, 0, 2),
            Monomial::power(1.0, 2, 1, 2),
            Monomial::constant(-1.0, 2),
        ]],
    )
    .unwrap();
    ConstraintSystem::new(PolyMap::empty(2), PolyMap::empty(2), h, ProjectableSet::whole_space(2), 2).unwrap()
}

fn quadratic_decay() -> Outcome {
    let sys = unit_circle_equality();
    let circle = ProjectableSet::sphere(v(&[0.0, 0.0]), 1.0).unwrap();
    let path = geometric_path(&v(&[1.0, 0.0]), &v(&[1.0, 0.0]), 1..=10);
    let samples = decay_samples(&sys, &circle, &path).map_err(|e| e.to_string())?;
    // Closed form for the linearized step from (z, 0).
    let worst = path
        .iter()
        .zip(&samples)
        .map(|(p, s)| {
            let z = p[0];
            (s.error - (z - 1.0).powi(2) / (2.0 * z)).abs()
        })
        .fold(0.0f64, f64::max);
    let QuadraticDecay::Fitted {
        slope,
        tail_slope,
        last_ratio,
        ..
    } = measure_quadratic_decay(&sys, &circle, &path).map_err(|e| e.to_string())?
    else {
        return Err("linearization reported exact".into());
    };
    let detail = format!(
        "slope={slope:.4} (target 2.00±0.05) tail_slope={tail_slope:.4} ratio@t=10={last_ratio:.5} (target 0.50±0.01) closed-form max err={worst:.1e}"
    );
    check(
        (slope - 2.0).abs() <= 0.05 && (last_ratio - 0.5).abs() <= 0.01 && worst <= 1e-12,
        detail,
    )
}

fn inexact_recovery() -> Outcome {
    let q = x_axis();
    let m = line_through_origin(FRAC_PI_4);
    let z0 = v(&[1.0, 0.0]);
    let opts = SolveOptions::default();
    let exact = run_exact(&q, &m, &z0, &opts).map_err(|e| e.to_string())?;
    let zero = make_corrupting_projector(m.clone(), 0.0, 42).map_err(|e| e.to_string())?;
    let same = run_inexact(&q, &zero, &z0, &opts).map_err(|e| e.to_string())? == exact;
    let noisy = make_corrupting_projector(m, 0.05, 42).map_err(|e| e.to_string())?;
    let trace = run_inexact(&q, &noisy, &z0, &opts).map_err(|e| e.to_string())?;
    let rate = fit_rate(&trace).map(|r| r.rate).map_err(|e| e.to_string())?;
    check(
        same && trace.status == Status::Converged && rate <= 0.55 + 0.05,
        format!("eps=0 identical={same}, eps=0.05 status={} rate={rate:.6} bound=0.60", trace.status),
    )
}

/// Sparse polynomial used by the test-side Gauss–Newton oracle.
struct Poly {
    terms: Vec<(f64, Vec<u32>)>,
}

impl Poly {
    fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, e)| c * e.iter().zip(x).map(|(&p, &xi)| xi.powi(p as i32)).product::<f64>())
            .sum()
    }

    fn partial(&self, x: &[f64], j: usize) -> f64 {
        self.terms
            .iter()
            .filter(|(_, e)| e[j] > 0)
            .map(|(c, e)| {
                let mut t = c * e[j] as f64;
                for (i, (&p, &xi)) in e.iter().zip(x).enumerate() {
                    t *= xi.powi(if i == j { p as i32 - 1 } else { p as i32 });
                }
                t
            })
            .sum()
    }

    fn to_monomials(&self) -> Vec<Monomial> {
        self.terms.iter().map(|(c, e)| Monomial::new(*c, e.clone())).collect()
    }
}

/// Gaussian elimination with partial pivoting.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Textbook Gauss–Newton on `|F|²` via the normal equations.
fn gauss_newton_oracle(f: &[Poly], x0: &[f64], iters: usize) -> Vec<Vec<f64>> {
    let n = x0.len();
    let mut xs = vec![x0.to_vec()];
    for _ in 0..iters {
        let x = xs.last().unwrap();
        let r: Vec<f64> = f.iter().map(|p| p.eval(x)).collect();
        let jac: Vec<Vec<f64>> = f.iter().map(|p| (0..n).map(|j| p.partial(x, j)).collect()).collect();
        let jtj: Vec<Vec<f64>> = (0..n)
            .map(|a| (0..n).map(|b| jac.iter().map(|row| row[a] * row[b]).sum()).collect())
            .collect();
        let jtr: Vec<f64> = (0..n).map(|a| -jac.iter().zip(&r).map(|(row, ri)| row[a] * ri).sum::<f64>()).collect();
        let s = gauss_solve(jtj, jtr);
        xs.push(x.iter().zip(&s).map(|(a, b)| a + b).collect());
    }
    xs
}

fn gn_match(f: &[Poly], x0: &[f64]) -> Result<(f64, usize), String> {
    let n = x0.len();
    let map = PolyMap::new(n, f.iter().map(Poly::to_monomials).collect()).unwrap();
    let problem = InclusionProblem::new(map, ProjectableSet::singleton(Vector::zeros(f.len()))).unwrap();
    let opts = SolveOptions {
        gap_tol: f64::MIN_POSITIVE,
        max_iters: 20,
        epsilon: 0.0,
    };
    let trace = solve_inclusion(&problem, &v(x0), &opts).map_err(|e| e.to_string())?;
    let oracle = gauss_newton_oracle(f, x0, 20);
    let mut worst = 0.0f64;
    for rec in &trace.records {
        let coords = rec.coords.as_ref().ok_or("record without coordinates")?;
        let d = coords.iter().zip(&oracle[rec.k]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(d);
    }
    Ok((worst, trace.iterations()))
}

fn random_cubic(rng: &mut ChaCha8Rng) -> (Vec<Poly>, Vec<f64>) {
    let root: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut system = Vec::new();
    for i in 0..3 {
        let mut terms = Vec::new();
        for j in 0..3 {
            let mut e = vec![0; 3];
            e[j] = 1;
            let diag = if i == j { 2.0 } else { 0.0 };
            terms.push((diag + rng.random_range(-0.5..0.5), e));
        }
        for _ in 0..4 {
            let mut e = vec![0u32; 3];
            for _ in 0..rng.random_range(2..=3) {
                e[rng.random_range(0..3)] += 1;
            }
            terms.push((rng.random_range(-0.3..0.3), e));
        }
        // Shift so that `root` is a zero.
        let at_root = Poly { terms: terms.clone() }.eval(&root);
        terms.push((-at_root, vec![0, 0, 0]));
        system.push(Poly { terms });
    }
    let x0 = root.iter().map(|r| r + rng.random_range(-0.05..0.05)).collect();
    (system, x0)
}

fn gauss_newton_equivalence() -> Outcome {
    let parabola = vec![
        Poly { terms: vec![(1.0, vec![1])] },
        Poly { terms: vec![(1.0, vec![2]), (-1.0, vec![0])] },
    ];
    let (d1, n1) = gn_match(&parabola, &[2.0])?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (cubic, x0) = random_cubic(&mut rng);
    let (d2, n2) = gn_match(&cubic, &x0)?;
    check(
        d1 <= 1e-10 && d2 <= 1e-10 && n1 == 20 && n2 == 20,
        format!("parabola max dev={d1:.1e} over {n1} iters, cubic max dev={d2:.1e} over {n2} iters"),
    )
}

/// Nearest point of `{(t, t²)}` to `y`: dense sampling, then bisection on
/// the stationarity condition.
fn parabola_projection(y: &Vector) -> Vector {
    let phi = |t: f64| (t - y[0]).powi(2) + (t * t - y[1]).powi(2);
    let dphi = |t: f64| 2.0 * (t - y[0]) + 4.0 * t * (t * t - y[1]);
    let (lo, hi, n) = (-3.0, 3.0, 10_000);
    let h = (hi - lo) / n as f64;
    let best = (0..=n).min_by(|&i, &j| phi(lo + i as f64 * h).total_cmp(&phi(lo + j as f64 * h))).unwrap();
    let mut a = lo + (best as f64 - 1.0) * h;
    let mut b = lo + (best as f64 + 1.0) * h;
    for _ in 0..50 {
        let mid = 0.5 * (a + b);
        if dphi(a) * dphi(mid) <= 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    let t = 0.5 * (a + b);
    v(&[t, t * t])
}

fn faithfulness() -> Outcome {
    let f = PolyMap::new(
        1,
        vec![vec![Monomial::power(1.0, 1, 0, 1)], vec![Monomial::power(1.0, 1, 0, 2)]],
    )
    .unwrap();
    let chart = ManifoldChart::unbounded(f);
    let ks: Vec<i32> = (3..=12).collect();
    let mut bases = Vec::new();
    let mut queries = Vec::new();
    for &k in &ks {
        let h = 2f64.powi(-k);
        bases.push(v(&[2.0 * h]));
        let normal = v(&[-2.0 * h, 1.0]).normalized().unwrap();
        queries.push(v(&[h, h * h]).add_scaled(h, &normal));
    }
    let exact: Vec<Vector> = queries.iter().map(parabola_projection).collect();
    let report = verify_faithfulness(&chart, &bases, &queries, &exact, DEFAULT_ANGLE_FLOOR).map_err(|e| e.to_string())?;
    let ratios = report.ratios();
    let monotone = ratios.windows(2).all(|w| w[1] < w[0]);
    let last = *ratios.last().unwrap();
    check(
        report.filtered.is_empty() && ratios.len() == ks.len() && monotone && last < 0.01,
        format!(
            "{} ratios, monotone={monotone}, first={:.3e}, at k=12 {last:.3e}",
            ratios.len(),
            ratios[0]
        ),
    )
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    let data: Vec<Vec<f64>> = (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    Matrix::from_rows(&data, cols).unwrap()
}

/// Nearest feasible point among projections onto every face's affine hull.
fn enumeration_oracle(qp: &ProjectionQp) -> Option<Vector> {
    let n = qp.target().len();
    let mi = qp.a_ineq().rows();
    let mut best: Option<Vector> = None;
    for mask in 0u32..(1 << mi) {
        let mut rows: Vec<Vec<f64>> = qp.a_eq().to_rows();
        let mut rhs: Vec<f64> = qp.b_eq().to_vec();
        for i in (0..mi).filter(|i| mask >> i & 1 == 1) {
            rows.push(qp.a_ineq().row(i).to_vec());
            rhs.push(qp.b_ineq()[i]);
        }
        let z = qp.target();
        let x = if rows.is_empty() {
            z.clone()
        } else {
            // x = z − Aᵀ(AAᵀ)⁻¹(Az − b)
            let gram: Vec<Vec<f64>> = rows
                .iter()
                .map(|a| rows.iter().map(|b| a.iter().zip(b).map(|(p, q)| p * q).sum()).collect())
                .collect();
            let det_scale: f64 = gram.iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).product();
            let resid: Vec<f64> = rows
                .iter()
                .zip(&rhs)
                .map(|(a, b)| a.iter().zip(z.iter()).map(|(p, q)| p * q).sum::<f64>() - b)
                .collect();
            if rows.len() > n || determinant(gram.clone()).abs() <= 1e-12 * det_scale.max(1e-300) {
                continue;
            }
            let lam = gauss_solve(gram, resid);
            let mut x = z.to_vec();
            for (a, l) in rows.iter().zip(&lam) {
                for (xi, ai) in x.iter_mut().zip(a) {
                    *xi -= l * ai;
                }
            }
            v(&x)
        };
        if qp.max_violation(&x) <= 1e-9 && best.as_ref().is_none_or(|b| x.distance(z) < b.distance(z)) {
            best = Some(x);
        }
    }
    best
}

fn determinant(mut a: Vec<Vec<f64>>) -> f64 {
    let n = a.len();
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if a[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            a.swap(col, piv);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

/// KKT residuals recomputed from scratch.
fn kkt_violation(qp: &ProjectionQp, cert: &KktCertificate) -> f64 {
    let x = &cert.solution;
    let n = x.len();
    let mut stat = x.to_vec();
    for i in 0..qp.a_ineq().rows() {
        for j in 0..n {
            stat[j] += cert.ineq_multipliers[i] * qp.a_ineq()[(i, j)];
        }
    }
    for i in 0..qp.a_eq().rows() {
        for j in 0..n {
            stat[j] += cert.eq_multipliers[i] * qp.a_eq()[(i, j)];
        }
    }
    let mut worst = stat.iter().zip(qp.target().iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    for i in 0..qp.a_ineq().rows() {
        let slack = qp.b_ineq()[i] - qp.a_ineq().row(i).iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>();
        let w = cert.ineq_multipliers[i];
        worst = worst.max(-slack).max(-w).max((w * slack).abs());
    }
    for i in 0..qp.a_eq().rows() {
        let r = qp.b_eq()[i] - qp.a_eq().row(i).iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>();
        worst = worst.max(r.abs());
    }
    worst
}

fn qp_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_err, mut worst_kkt, mut infeasible) = (0.0f64, 0.0f64, 0);
    for case in 0..200 {
        let n = rng.random_range(1..=5);
        let total = rng.random_range(1..=6);
        let me = rng.random_range(0..=total.min(n - 1).min(2));
        let mi = total - me;
        let a_ineq = random_matrix(&mut rng, mi, n);
        let a_eq = random_matrix(&mut rng, me, n);
        let anchor = v(&(0..n).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>());
        let slack: Vec<f64> = (0..mi).map(|_| rng.random_range(0.0..1.0)).collect();
        let b_ineq = &a_ineq.mul_vec(&anchor).unwrap() + &v(&slack);
        // Every tenth case gets a contradictory pair of rows.
        let (a_ineq, b_ineq) = if case % 10 == 9 && mi >= 1 {
            let neg: Vec<f64> = a_ineq.row(0).iter().map(|x| -x).collect();
            let mut rows = a_ineq.to_rows();
            rows.push(neg);
            let mut b = b_ineq.to_vec();
            b.push(-b_ineq[0] - 0.5);
            (Matrix::from_rows(&rows, n).unwrap(), v(&b))
        } else {
            (a_ineq, b_ineq)
        };
        let b_eq = a_eq.mul_vec(&anchor).unwrap();
        let target = v(&(0..n).map(|_| rng.random_range(-3.0..3.0)).collect::<Vec<_>>());
        let qp = ProjectionQp::new(target, a_ineq, b_ineq, a_eq, b_eq).unwrap();
        match (solve_projection_qp(&qp), enumeration_oracle(&qp)) {
            (Ok(cert), Some(x)) => {
                worst_err = worst_err.max(cert.solution.distance(&x));
                worst_kkt = worst_kkt.max(kkt_violation(&qp, &cert));
            }
            (Err(QpError::Infeasible(farkas)), None) => {
                if farkas.certify(&qp, 1e-9).is_none_or(|gap| gap >= 0.0) {
                    return Err(format!("case {case}: invalid infeasibility certificate"));
                }
                infeasible += 1;
            }
            (got, want) => return Err(format!("case {case}: solver {got:?}, oracle {want:?}")),
        }
    }
    check(
        worst_err <= 1e-8 && worst_kkt <= 1e-8,
        format!("200 cases ({infeasible} infeasible), max |x − oracle|={worst_err:.1e}, max KKT residual={worst_kkt:.1e}"),
    )
}

fn linearized_end_to_end() -> Outcome {
    let g = PolyMap::new(
        2,
        vec![vec![
            Monomial::power(1.0, 2, 0, 2),
            Monomial::power(1.0, 2, 1, 2),
            Monomial::constant(-1.0, 2),
        ]],
    )
    .unwrap();
    let diag = ProjectableSet::affine_subspace(v(&[0.0, 0.0]), vec![v(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2])]).unwrap();
    let sys = ConstraintSystem::new(g, PolyMap::empty(2), PolyMap::empty(2), diag, 2).unwrap();
    let trace = solve_constraint_system(&sys, &v(&[2.0, 2.0]), &SolveOptions::default()).map_err(|e| e.to_string())?;
    // On the diagonal x = (a, a) the linearized step gives a ← (2a² + 1)/(4a).
    let mut a = 2.0f64;
    let mut oracle_dev = 0.0f64;
    for rec in &trace.records {
        oracle_dev = oracle_dev.max((rec.z[0] - a).abs()).max((rec.z[1] - a).abs());
        if 2.0 * a * a > 1.0 {
            a = (2.0 * a * a + 1.0) / (4.0 * a);
        }
    }
    let end = &trace.last().partner;
    let err = end.distance(&v(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]));
    let gaps = trace.gaps();
    let ratios: Vec<f64> = gaps.windows(2).map(|w| w[1] / w[0]).collect();
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    check(
        trace.status == Status::Converged && err <= 1e-8 && !ratios.is_empty() && max_ratio < 1.0 && oracle_dev <= 1e-12,
        format!(
            "status={} after {} iters, |x − x*|={err:.1e}, max gap ratio={max_ratio:.3e}, oracle dev={oracle_dev:.1e}",
            trace.status,
            trace.iterations()
        ),
    )
}

fn parallel_lines_control() -> Outcome {
    let q = x_axis();
    let m = ProjectableSet::hyperplane(v(&[0.0, 1.0]), 1.0).unwrap();
    let opts = SolveOptions {
        max_iters: 1000,
        ..SolveOptions::default()
    };
    let trace = run_exact(&q, &m, &v(&[0.0, 0.0]), &opts).map_err(|e| e.to_string())?;
    let gap = trace.final_gap();
    check(
        trace.status == Status::MaxIters && (gap - 1.0).abs() <= 1e-9,
        format!("status={} final gap={gap:.12}", trace.status),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("two-lines rate", two_lines_rate),
        ("line/circle rate", circle_line_rate),
        ("quadratic decay of the linearized projection", quadratic_decay),
        ("inexact recovery and degradation", inexact_recovery),
        ("Gauss-Newton equivalence", gauss_newton_equivalence),
        ("faithfulness of the chart step", faithfulness),
        ("QP correctness", qp_correctness),
        ("linearized scheme end to end", linearized_end_to_end),
        ("parallel lines negative control", parallel_lines_control),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    println!("{} of {} criteria passed in {elapsed:.2} s", criteria.len() - failed, criteria.len());
    if elapsed >= 5.0 {
        println!("FAIL time budget: {elapsed:.2} s exceeds 5 s");
        failed += 1;
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
