//! Smooth constraint sets `M = {G ≤ 0, P ≤ 0, H = 0}` and projection onto
//! their linearizations.
//!
//! `G` lists inequalities expected to be active near the solution and `P`
//! those expected to be inactive. The split only matters for LICQ reporting:
//! every linearized QP includes all three blocks.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alternating::{self, AltError, InexactProjector, IterationTrace, SolveOptions, Status};
use crate::linalg::{self, LinalgError, Matrix, Vector};
use crate::polymap::{PolyError, PolyMap};
use crate::qp::{self, FarkasCertificate, KktCertificate, ProjectionQp, QpError};
use crate::sets::{ProjectableSet, SetError};

pub const ACTIVE_TOL: f64 = 1e-6;
pub const LICQ_TOL: f64 = 1e-8;
/// Errors at or below this are treated as an exact linearization.
pub const EXACT_LINEARIZATION_TOL: f64 = 1e-12;
const MIN_DECAY_POINTS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinconstrError {
    #[error("{what} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("linearized constraints are infeasible")]
    LinearizationInfeasible(FarkasCertificate),
    #[error("constraint Jacobian is rank deficient")]
    RankDeficient,
    #[error("only {usable} path points carry a measurable error; need {MIN_DECAY_POINTS}")]
    InsufficientData { usable: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Qp(QpError),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Alternating(#[from] AltError),
}

impl From<QpError> for LinconstrError {
    fn from(e: QpError) -> Self {
        match e {
            QpError::Infeasible(cert) => LinconstrError::LinearizationInfeasible(cert),
            other => LinconstrError::Qp(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSystem", into = "RawSystem")]
pub struct ConstraintSystem {
    g: PolyMap,
    p: PolyMap,
    h: PolyMap,
    q: ProjectableSet,
    ambient_dim: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    #[serde(rename = "G", default)]
    g: Option<PolyMap>,
    #[serde(rename = "P", default)]
    p: Option<PolyMap>,
    #[serde(rename = "H", default)]
    h: Option<PolyMap>,
    #[serde(rename = "Q")]
    q: ProjectableSet,
    ambient_dim: usize,
}

impl TryFrom<RawSystem> for ConstraintSystem {
    type Error = LinconstrError;

    fn try_from(raw: RawSystem) -> Result<Self, LinconstrError> {
        let n = raw.ambient_dim;
        let or_empty = |m: Option<PolyMap>| m.unwrap_or_else(|| PolyMap::empty(n));
        ConstraintSystem::new(or_empty(raw.g), or_empty(raw.p), or_empty(raw.h), raw.q, n)
    }
}

impl From<ConstraintSystem> for RawSystem {
    fn from(sys: ConstraintSystem) -> Self {
        RawSystem {
            g: Some(sys.g),
            p: Some(sys.p),
            h: Some(sys.h),
            q: sys.q,
            ambient_dim: sys.ambient_dim,
        }
    }
}

impl ConstraintSystem {
    pub fn new(
        g: PolyMap,
        p: PolyMap,
        h: PolyMap,
        q: ProjectableSet,
        ambient_dim: usize,
    ) -> Result<Self, LinconstrError> {
        for (what, found) in [
            ("G", g.input_dim()),
            ("P", p.input_dim()),
            ("H", h.input_dim()),
            ("Q", q.ambient_dim()),
        ] {
            if found != ambient_dim {
                return Err(LinconstrError::DimensionMismatch {
                    what,
                    expected: ambient_dim,
                    found,
                });
            }
        }
        Ok(ConstraintSystem {
            g,
            p,
            h,
            q,
            ambient_dim,
        })
    }

    pub fn g(&self) -> &PolyMap {
        &self.g
    }

    pub fn p(&self) -> &PolyMap {
        &self.p
    }

    pub fn h(&self) -> &PolyMap {
        &self.h
    }

    pub fn q(&self) -> &ProjectableSet {
        &self.q
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    fn check(&self, z: &Vector) -> Result<(), LinconstrError> {
        if z.len() != self.ambient_dim {
            return Err(LinconstrError::DimensionMismatch {
                what: "point",
                expected: self.ambient_dim,
                found: z.len(),
            });
        }
        Ok(())
    }

    /// `max(max G, max P, max |H|, 0)` at `x`.
    pub fn violation(&self, x: &Vector) -> Result<f64, LinconstrError> {
        self.check(x)?;
        let ineq = self
            .g
            .eval(x)?
            .iter()
            .chain(self.p.eval(x)?.iter())
            .fold(0.0f64, |m, &v| m.max(v));
        let eq = self.h.eval(x)?.norm_inf();
        Ok(ineq.max(eq))
    }

    /// Linearized rows at `z` in step form: `J_I s ≤ r_I`, `J_E s = r_E`.
    fn linearized_rows(&self, z: &Vector) -> Result<(Matrix, Vector, Matrix, Vector), LinconstrError> {
        self.check(z)?;
        let j_ineq = Matrix::vstack(&[&self.g.jacobian(z)?, &self.p.jacobian(z)?])?;
        let r_ineq = Vector::concat(&[&self.g.eval(z)?, &self.p.eval(z)?]).scale(-1.0);
        let j_eq = self.h.jacobian(z)?;
        let r_eq = self.h.eval(z)?.scale(-1.0);
        Ok((j_ineq, r_ineq, j_eq, r_eq))
    }
}

/// Projects `z` onto the linearization of all constraints at `z`.
pub fn linearized_projection(
    sys: &ConstraintSystem,
    z: &Vector,
) -> Result<(Vector, KktCertificate), LinconstrError> {
    let (j_ineq, r_ineq, j_eq, r_eq) = sys.linearized_rows(z)?;
    // J s ≤ r with s = x − z becomes J x ≤ r + J z.
    let b_ineq = &r_ineq + &j_ineq.mul_vec(z)?;
    let b_eq = &r_eq + &j_eq.mul_vec(z)?;
    let problem = ProjectionQp::new(z.clone(), j_ineq, b_ineq, j_eq, b_eq)?;
    let cert = qp::solve_projection_qp(&problem)?;
    Ok((cert.solution.clone(), cert))
}

/// Minimal-norm `s` with `G(z) + ∇G(z)s ≤ 0`, `P(z) + ∇P(z)s ≤ 0`,
/// `H(z) + ∇H(z)s = 0`.
pub fn linearized_step(sys: &ConstraintSystem, z: &Vector) -> Result<Vector, LinconstrError> {
    let (j_ineq, r_ineq, j_eq, r_eq) = sys.linearized_rows(z)?;
    Ok(qp::min_norm_step(&j_ineq, &r_ineq, &j_eq, &r_eq)?)
}

/// `z − ∇A(z)ᵀ (∇A(z)∇A(z)ᵀ)⁻¹ A(z)` with `A = (G, H)`.
pub fn newton_feasibility_step(sys: &ConstraintSystem, z: &Vector) -> Result<Vector, LinconstrError> {
    sys.check(z)?;
    let a = Vector::concat(&[&sys.g.eval(z)?, &sys.h.eval(z)?]);
    if a.iter().all(|&v| v == 0.0) {
        return Ok(z.clone());
    }
    let j = Matrix::vstack(&[&sys.g.jacobian(z)?, &sys.h.jacobian(z)?])?;
    let gram = j.matmul(&j.transpose())?;
    let w = match linalg::solve_spd(&gram, &a) {
        Ok(w) => w,
        Err(LinalgError::NotPositiveDefinite { .. }) => return Err(LinconstrError::RankDeficient),
        Err(e) => return Err(e.into()),
    };
    Ok(z - &j.tr_mul_vec(&w)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum LicqVerdict {
    Holds,
    /// `∇G_activeᵀ w + ∇Hᵀ y = 0` with `(w, y) ≠ 0`, scaled to max-abs 1.
    Fails { w: Vector, y: Vector },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LicqReport {
    pub point: Vector,
    /// Indices of `G` components with `|G_i(x)| ≤ active_tol`.
    pub active: Vec<usize>,
    /// Smallest singular value of the stacked active Jacobian; `None` when
    /// no rows are active.
    pub smallest_singular_value: Option<f64>,
    pub verdict: LicqVerdict,
}

impl LicqReport {
    pub fn holds(&self) -> bool {
        self.verdict == LicqVerdict::Holds
    }
}

pub fn check_licq(
    sys: &ConstraintSystem,
    x: &Vector,
    active_tol: f64,
) -> Result<LicqReport, LinconstrError> {
    sys.check(x)?;
    let g = sys.g.eval(x)?;
    let active: Vec<usize> = (0..g.len()).filter(|&i| g[i].abs() <= active_tol).collect();
    let j = Matrix::vstack(&[&sys.g.jacobian(x)?.select_rows(&active), &sys.h.jacobian(x)?])?;
    let k = j.rows();
    let n = j.cols();
    let report = |smallest, verdict| LicqReport {
        point: x.clone(),
        active: active.clone(),
        smallest_singular_value: smallest,
        verdict,
    };
    if k == 0 {
        return Ok(report(None, LicqVerdict::Holds));
    }

    // J = U Σ Vᵀ; a left null vector of J is a dependence among its rows.
    let svd = linalg::svd(&j)?;
    let (smallest, dependence) = if k > n {
        let u: Vec<Vector> = (0..svd.u.cols()).map(|c| svd.u.column(c)).collect();
        let null = linalg::orthonormal_complement(&u, k);
        (0.0, null.into_iter().next().expect("k > n leaves a left null space"))
    } else {
        let last = svd.sigma.len() - 1;
        (svd.sigma[last], svd.u.column(last))
    };
    if smallest > LICQ_TOL {
        return Ok(report(Some(smallest), LicqVerdict::Holds));
    }
    let c = canonical_sign(&dependence);
    let w = Vector::from_vec(c.as_slice()[..active.len()].to_vec());
    let y = Vector::from_vec(c.as_slice()[active.len()..].to_vec());
    Ok(report(Some(smallest), LicqVerdict::Fails { w, y }))
}

/// Scales to max-abs 1 with the first significant entry positive.
fn canonical_sign(v: &Vector) -> Vector {
    let m = v.norm_inf();
    if m == 0.0 {
        return v.clone();
    }
    let lead = v
        .iter()
        .copied()
        .find(|x| x.abs() > 1e-9 * m)
        .unwrap_or(1.0);
    v.scale(lead.signum() / m)
}

/// [`linearized_projection`] as an inexact projector onto `M`.
#[derive(Debug, Clone)]
pub struct LinearizedProjector<'a> {
    sys: &'a ConstraintSystem,
}

impl<'a> LinearizedProjector<'a> {
    pub fn new(sys: &'a ConstraintSystem) -> Self {
        LinearizedProjector { sys }
    }
}

impl InexactProjector for LinearizedProjector<'_> {
    fn ambient_dim(&self) -> usize {
        self.sys.ambient_dim
    }

    fn project_inexact(&self, z: &Vector, _iteration: usize) -> Result<Vector, AltError> {
        match linearized_projection(self.sys, z) {
            Ok((x, _)) => Ok(x),
            Err(LinconstrError::LinearizationInfeasible(_)) => Err(AltError::Terminal {
                status: Status::LinearizationInfeasible,
                reason: "linearized constraints are infeasible".into(),
            }),
            Err(LinconstrError::Set(e)) => Err(AltError::Set(e)),
            Err(e) => Err(AltError::Terminal {
                status: Status::RankDeficient,
                reason: e.to_string(),
            }),
        }
    }

    fn distance(&self, _z: &Vector) -> Option<f64> {
        None
    }
}

/// Alternates a linearized step onto `M` with an exact projection onto `Q`.
///
/// Record `k` holds `x_k ∈ Q`, `x_k + s_k` and the gap `|s_k|`.
pub fn solve_constraint_system(
    sys: &ConstraintSystem,
    x0: &Vector,
    opts: &SolveOptions,
) -> Result<IterationTrace, LinconstrError> {
    sys.check(x0)?;
    Ok(alternating::run_inexact(
        &sys.q,
        &LinearizedProjector::new(sys),
        x0,
        opts,
    )?)
}

/// Fit of `log|Φ(z) − P_M(z)|` against `log d_M(z)` along a path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum QuadraticDecay {
    Fitted {
        /// Least-squares slope over all usable points.
        slope: f64,
        /// `exp` of the least-squares intercept.
        constant: f64,
        /// Local slope between the two points nearest the limit.
        tail_slope: f64,
        /// `error / d²` at the last usable point.
        last_ratio: f64,
        points: usize,
    },
    ExactLinearization {
        max_error: f64,
    },
}

/// Per-point data used by [`measure_quadratic_decay`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecaySample {
    pub distance: f64,
    pub error: f64,
}

pub fn decay_samples(
    sys: &ConstraintSystem,
    oracle_m: &ProjectableSet,
    path: &[Vector],
) -> Result<Vec<DecaySample>, LinconstrError> {
    path.iter()
        .map(|z| {
            let (phi, _) = linearized_projection(sys, z)?;
            let exact = oracle_m.project(z)?;
            Ok(DecaySample {
                distance: exact.distance(z),
                error: phi.distance(&exact),
            })
        })
        .collect()
}

pub fn measure_quadratic_decay(
    sys: &ConstraintSystem,
    oracle_m: &ProjectableSet,
    path: &[Vector],
) -> Result<QuadraticDecay, LinconstrError> {
    let floor = 100.0 * f64::EPSILON;
    let samples: Vec<DecaySample> = decay_samples(sys, oracle_m, path)?
        .into_iter()
        .filter(|s| s.distance > floor)
        .collect();
    if !samples.is_empty() && samples.iter().all(|s| s.error <= EXACT_LINEARIZATION_TOL) {
        let max_error = samples.iter().fold(0.0f64, |m, s| m.max(s.error));
        return Ok(QuadraticDecay::ExactLinearization { max_error });
    }
    let usable: Vec<DecaySample> = samples.into_iter().filter(|s| s.error > floor).collect();
    if usable.len() < MIN_DECAY_POINTS {
        return Err(LinconstrError::InsufficientData {
            usable: usable.len(),
        });
    }
    let xs: Vec<f64> = usable.iter().map(|s| s.distance.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|s| s.error.ln()).collect();
    let (slope, intercept) = least_squares_line(&xs, &ys);
    let m = usable.len();
    let tail_slope = (ys[m - 1] - ys[m - 2]) / (xs[m - 1] - xs[m - 2]);
    let last = usable[m - 1];
    Ok(QuadraticDecay::Fitted {
        slope,
        constant: intercept.exp(),
        tail_slope,
        last_ratio: last.error / (last.distance * last.distance),
        points: m,
    })
}

/// Ordinary least-squares line `y ≈ slope·x + intercept`.
pub(crate) fn least_squares_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// `x̄ + 2^{-t} v` for `t` in `ts`.
pub fn geometric_path(xbar: &Vector, direction: &Vector, ts: impl IntoIterator<Item = i32>) -> Vec<Vector> {
    ts.into_iter()
        .map(|t| xbar.add_scaled(2f64.powi(-t), direction))
        .collect()
}
