//! Nearest-point quadratic programs over polyhedra.
//!
//! Solves
//!
//! ```text
//! minimize ½|x − z|²  subject to  A_ineq x ≤ b_ineq,  A_eq x = b_eq
//! ```
//!
//! with a dual active-set method (Goldfarb–Idnani) specialized to the identity
//! Hessian. The method starts at the unconstrained minimizer `x = z` and adds
//! violated constraints one at a time while keeping the multipliers dual
//! feasible, so it needs no phase-one problem and an empty polyhedron is
//! detected with an explicit Farkas certificate.
//!
//! Ties are broken by lowest index: the entering constraint is the first
//! violated row, and among blocking multipliers the first in row order leaves.

use thiserror::Error;

use crate::linalg::{self, LinalgError, Matrix, Vector};

/// Absolute feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-9;
/// A new normal within this relative distance of the active span is dependent.
const DEPENDENCE_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QpError {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("constraints are infeasible")]
    Infeasible(FarkasCertificate),
    #[error("active-set pivot limit of {limit} reached")]
    MaxPivots { limit: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Multipliers proving `{A_ineq x ≤ b_ineq, A_eq x = b_eq}` is empty:
/// `A_ineqᵀλ + A_eqᵀμ = 0`, `λ ≥ 0` and `b_ineqᵀλ + b_eqᵀμ < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FarkasCertificate {
    pub ineq: Vector,
    pub eq: Vector,
}

impl FarkasCertificate {
    /// Returns `b_ineqᵀλ + b_eqᵀμ` when the combination annihilates the
    /// constraint normals to `tol` and `λ ≥ 0`; a negative value proves
    /// infeasibility.
    pub fn certify(&self, qp: &ProjectionQp, tol: f64) -> Option<f64> {
        if self.ineq.iter().any(|&l| l < 0.0) {
            return None;
        }
        let combo = &qp.a_ineq.tr_mul_vec(&self.ineq).ok()? + &qp.a_eq.tr_mul_vec(&self.eq).ok()?;
        let scale = self.ineq.norm() + self.eq.norm();
        (combo.norm() <= tol * scale.max(1.0))
            .then(|| self.ineq.dot(&qp.b_ineq) + self.eq.dot(&qp.b_eq))
    }
}

/// Projection of `target` onto the polyhedron `{A_ineq x ≤ b_ineq, A_eq x = b_eq}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionQp {
    target: Vector,
    a_ineq: Matrix,
    b_ineq: Vector,
    a_eq: Matrix,
    b_eq: Vector,
}

impl ProjectionQp {
    pub fn new(
        target: Vector,
        a_ineq: Matrix,
        b_ineq: Vector,
        a_eq: Matrix,
        b_eq: Vector,
    ) -> Result<Self, QpError> {
        let n = target.len();
        check("A_ineq columns", n, a_ineq.cols())?;
        check("A_eq columns", n, a_eq.cols())?;
        check("b_ineq length", a_ineq.rows(), b_ineq.len())?;
        check("b_eq length", a_eq.rows(), b_eq.len())?;
        Ok(ProjectionQp {
            target,
            a_ineq,
            b_ineq,
            a_eq,
            b_eq,
        })
    }

    pub fn target(&self) -> &Vector {
        &self.target
    }

    pub fn a_ineq(&self) -> &Matrix {
        &self.a_ineq
    }

    pub fn b_ineq(&self) -> &Vector {
        &self.b_ineq
    }

    pub fn a_eq(&self) -> &Matrix {
        &self.a_eq
    }

    pub fn b_eq(&self) -> &Vector {
        &self.b_eq
    }

    pub fn with_target(&self, target: Vector) -> Result<Self, QpError> {
        ProjectionQp::new(
            target,
            self.a_ineq.clone(),
            self.b_ineq.clone(),
            self.a_eq.clone(),
            self.b_eq.clone(),
        )
    }

    pub fn constraint_count(&self) -> usize {
        self.a_ineq.rows() + self.a_eq.rows()
    }

    /// Largest violation of any constraint at `x` (0 when feasible).
    pub fn max_violation(&self, x: &Vector) -> f64 {
        let ineq = (0..self.a_ineq.rows())
            .map(|i| linalg::dot(self.a_ineq.row(i), x) - self.b_ineq[i])
            .fold(0.0f64, f64::max);
        let eq = (0..self.a_eq.rows())
            .map(|j| (linalg::dot(self.a_eq.row(j), x) - self.b_eq[j]).abs())
            .fold(0.0f64, f64::max);
        ineq.max(eq)
    }
}

fn check(what: &'static str, expected: usize, found: usize) -> Result<(), QpError> {
    if expected == found {
        Ok(())
    } else {
        Err(QpError::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}

/// Solution of a [`ProjectionQp`] with its first-order certificate.
///
/// `solution + A_ineqᵀ w + A_eqᵀ y = target`, `w ≥ 0`, `s = b_ineq − A_ineq x ≥ 0`
/// and `⟨w, s⟩ = 0` up to tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct KktCertificate {
    pub solution: Vector,
    pub ineq_multipliers: Vector,
    pub slacks: Vector,
    pub eq_multipliers: Vector,
    /// Indices of inequality rows held active at the solution.
    pub active_set: Vec<usize>,
    pub pivots: usize,
}

/// Residuals of a KKT certificate measured against the problem data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub primal: f64,
    pub dual: f64,
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.primal)
            .max(self.dual)
            .max(self.complementarity)
    }
}

impl KktCertificate {
    /// Recomputes every optimality residual from the problem data alone.
    pub fn residuals(&self, qp: &ProjectionQp) -> KktResiduals {
        let stationarity = {
            let aw = qp.a_ineq.tr_mul_vec(&self.ineq_multipliers);
            let ay = qp.a_eq.tr_mul_vec(&self.eq_multipliers);
            match (aw, ay) {
                (Ok(aw), Ok(ay)) => (&(&self.solution + &aw) + &ay).distance(&qp.target),
                _ => f64::INFINITY,
            }
        };
        let actual_slack: Vec<f64> = (0..qp.a_ineq.rows())
            .map(|i| qp.b_ineq[i] - linalg::dot(qp.a_ineq.row(i), &self.solution))
            .collect();
        let complementarity = self
            .ineq_multipliers
            .iter()
            .zip(&actual_slack)
            .map(|(w, s)| (w * s).abs())
            .sum();
        KktResiduals {
            stationarity,
            primal: qp.max_violation(&self.solution),
            dual: self.ineq_multipliers.iter().fold(0.0f64, |m, &w| m.max(-w)),
            complementarity,
        }
    }

    pub fn is_valid(&self, qp: &ProjectionQp, tol: f64) -> bool {
        self.residuals(qp).max() <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Row {
    Eq(usize),
    Ineq(usize),
}

#[derive(Debug, Clone, Copy)]
struct Active {
    row: Row,
    /// +1 or −1: equalities may enter with either orientation.
    sign: f64,
    multiplier: f64,
}

struct Solver<'a> {
    qp: &'a ProjectionQp,
    x: Vector,
    active: Vec<Active>,
    pivots: usize,
    limit: usize,
}

impl<'a> Solver<'a> {
    fn normal(&self, row: Row, sign: f64) -> Vector {
        match row {
            Row::Eq(j) => self.qp.a_eq.row_vector(j).scale(sign),
            Row::Ineq(i) => self.qp.a_ineq.row_vector(i).scale(sign),
        }
    }

    fn rhs(&self, row: Row, sign: f64) -> f64 {
        match row {
            Row::Eq(j) => sign * self.qp.b_eq[j],
            Row::Ineq(i) => sign * self.qp.b_ineq[i],
        }
    }

    fn row_order(row: Row) -> (usize, usize) {
        match row {
            Row::Eq(j) => (0, j),
            Row::Ineq(i) => (1, i),
        }
    }

    fn active_normals(&self) -> Vec<Vector> {
        self.active
            .iter()
            .map(|a| self.normal(a.row, a.sign))
            .collect()
    }

    /// Brings `row` (oriented by `sign`) into the active set, dropping
    /// blocking inequalities along the way.
    ///
    /// Returns `Ok(false)` for a redundant equality that was left out.
    fn add(&mut self, row: Row, sign: f64) -> Result<bool, QpError> {
        let n_p = self.normal(row, sign);
        let rhs_p = self.rhs(row, sign);
        let n_norm = n_p.norm();
        let mut entering = 0.0;
        loop {
            self.pivots += 1;
            if self.pivots > self.limit {
                return Err(QpError::MaxPivots { limit: self.limit });
            }
            let normals = self.active_normals();
            let r = if normals.is_empty() {
                Vector::zeros(0)
            } else {
                let big_n = Matrix::from_columns(&normals, n_p.len())?;
                linalg::least_squares(&big_n, &n_p)?
            };
            let mut z = n_p.clone();
            for (k, q) in normals.iter().enumerate() {
                z = z.add_scaled(-r[k], q);
            }
            let dependent = z.norm() <= DEPENDENCE_TOL * n_norm.max(f64::MIN_POSITIVE);
            let violation = n_p.dot(&self.x) - rhs_p;

            let full = if dependent {
                f64::INFINITY
            } else {
                violation.max(0.0) / z.dot(&z)
            };
            let mut block: Option<(usize, f64)> = None;
            for (k, a) in self.active.iter().enumerate() {
                if matches!(a.row, Row::Ineq(_)) && r[k] > 0.0 {
                    let t = a.multiplier / r[k];
                    let better = match block {
                        None => true,
                        Some((kb, tb)) => {
                            t < tb
                                || (t == tb
                                    && Self::row_order(a.row) < Self::row_order(self.active[kb].row))
                        }
                    };
                    if better {
                        block = Some((k, t));
                    }
                }
            }

            if dependent {
                if matches!(row, Row::Eq(_)) && violation.abs() <= FEAS_TOL {
                    return Ok(false);
                }
                if block.is_none() {
                    return Err(QpError::Infeasible(self.farkas(row, sign, &r)));
                }
            }

            let (t, drop) = match block {
                Some((k, tb)) if tb < full => (tb, Some(k)),
                _ => (full, None),
            };
            if !dependent {
                self.x = self.x.add_scaled(-t, &z);
            }
            for (k, a) in self.active.iter_mut().enumerate() {
                a.multiplier -= t * r[k];
            }
            entering += t;
            match drop {
                Some(k) => {
                    self.active.remove(k);
                }
                None => {
                    self.active.push(Active {
                        row,
                        sign,
                        multiplier: entering,
                    });
                    return Ok(true);
                }
            }
        }
    }

    /// With `n_p = Σ r_k n_k` and no positive `r_k` on active inequalities,
    /// `λ_p = 1, λ_k = −r_k` is a Farkas combination.
    fn farkas(&self, row: Row, sign: f64, r: &Vector) -> FarkasCertificate {
        let mut ineq = vec![0.0; self.qp.a_ineq.rows()];
        let mut eq = vec![0.0; self.qp.a_eq.rows()];
        let mut put = |row: Row, value: f64| match row {
            Row::Eq(j) => eq[j] += value,
            Row::Ineq(i) => ineq[i] += value,
        };
        put(row, sign);
        for (k, a) in self.active.iter().enumerate() {
            put(a.row, -r[k] * a.sign);
        }
        for l in ineq.iter_mut() {
            *l = l.max(0.0);
        }
        FarkasCertificate {
            ineq: Vector::from_vec(ineq),
            eq: Vector::from_vec(eq),
        }
    }

    fn first_violated(&self) -> Option<usize> {
        (0..self.qp.a_ineq.rows())
            .find(|&i| linalg::dot(self.qp.a_ineq.row(i), &self.x) - self.qp.b_ineq[i] > FEAS_TOL)
    }

    /// Re-solves the equality system of the final active set in one shot.
    fn polish(&self) -> Option<(Vector, Vec<f64>)> {
        if self.active.is_empty() {
            return None;
        }
        let normals = self.active_normals();
        let n = self.qp.target.len();
        let big_n = Matrix::from_columns(&normals, n).ok()?;
        let gram = big_n.transpose().matmul(&big_n).ok()?;
        let mut rhs = big_n.tr_mul_vec(&self.qp.target).ok()?;
        for (k, a) in self.active.iter().enumerate() {
            rhs[k] -= self.rhs(a.row, a.sign);
        }
        let u = linalg::solve_spd(&gram, &rhs).ok()?;
        let x = &self.qp.target - &big_n.mul_vec(&u).ok()?;
        let signs_ok = self
            .active
            .iter()
            .zip(u.iter())
            .all(|(a, &m)| matches!(a.row, Row::Eq(_)) || m >= -FEAS_TOL);
        (signs_ok && self.qp.max_violation(&x) <= FEAS_TOL).then(|| (x, u.into_vec()))
    }

    fn certificate(mut self) -> KktCertificate {
        if let Some((x, u)) = self.polish() {
            self.x = x;
            for (a, m) in self.active.iter_mut().zip(u) {
                a.multiplier = m;
            }
        }
        let mut w = vec![0.0; self.qp.a_ineq.rows()];
        let mut y = vec![0.0; self.qp.a_eq.rows()];
        let mut active_set = Vec::new();
        for a in &self.active {
            match a.row {
                Row::Eq(j) => y[j] = a.sign * a.multiplier,
                Row::Ineq(i) => {
                    w[i] = a.multiplier.max(0.0);
                    active_set.push(i);
                }
            }
        }
        active_set.sort_unstable();
        let slacks = (0..self.qp.a_ineq.rows())
            .map(|i| (self.qp.b_ineq[i] - linalg::dot(self.qp.a_ineq.row(i), &self.x)).max(0.0))
            .collect();
        KktCertificate {
            solution: self.x,
            ineq_multipliers: Vector::from_vec(w),
            slacks: Vector::from_vec(slacks),
            eq_multipliers: Vector::from_vec(y),
            active_set,
            pivots: self.pivots,
        }
    }
}

/// Projects `qp.target` onto the polyhedron and returns the certified minimizer.
pub fn solve_projection_qp(qp: &ProjectionQp) -> Result<KktCertificate, QpError> {
    let mut solver = Solver {
        qp,
        x: qp.target.clone(),
        active: Vec::new(),
        pivots: 0,
        limit: 100 * qp.constraint_count().max(1),
    };
    for j in 0..qp.a_eq.rows() {
        let v = linalg::dot(qp.a_eq.row(j), &solver.x) - qp.b_eq[j];
        let sign = if v >= 0.0 { 1.0 } else { -1.0 };
        solver.add(Row::Eq(j), sign)?;
    }
    while let Some(i) = solver.first_violated() {
        solver.add(Row::Ineq(i), 1.0)?;
    }
    Ok(solver.certificate())
}

/// Minimal-norm `s` with `A_ineq s ≤ b_ineq` and `A_eq s = b_eq`.
pub fn min_norm_step(
    a_ineq: &Matrix,
    b_ineq: &Vector,
    a_eq: &Matrix,
    b_eq: &Vector,
) -> Result<Vector, QpError> {
    check("A_eq columns", a_ineq.cols(), a_eq.cols())?;
    let qp = ProjectionQp::new(
        Vector::zeros(a_ineq.cols()),
        a_ineq.clone(),
        b_ineq.clone(),
        a_eq.clone(),
        b_eq.clone(),
    )?;
    Ok(solve_projection_qp(&qp)?.solution)
}
