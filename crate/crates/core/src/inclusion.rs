//! Linearized alternating projections for `F(x) ∈ Q` and the chart-based
//! approximate projection `Φ(F(x), y) = F(x + s)`, with
//! `s = argmin |F(x) + ∇F(x)s − y|`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alternating::{self, AltError, FaithfulApproximation, IterationTrace, SolveOptions, Status};
use crate::linalg::{self, LinalgError, Vector};
use crate::polymap::{PolyError, PolyMap};
use crate::sets::{ProjectableSet, SetError};

/// Default angle floor for [`verify_faithfulness`], in radians.
pub const DEFAULT_ANGLE_FLOOR: f64 = 0.1;
/// A query sequence must close at least this fraction of its initial gap.
pub const APPROACH_FACTOR: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InclusionError {
    #[error("{what} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("Jacobian is not one-to-one at {0:?}")]
    RankDeficient(Vector),
    #[error("coordinates {0:?} lie outside the chart domain")]
    OutsideChart(Vector),
    #[error("step leaves the chart domain at {0:?}")]
    LeftChart(Vector),
    #[error("chart domain needs lower < upper in every coordinate")]
    InvalidDomain,
    #[error("no samples left after angle filtering ({filtered} removed)")]
    InsufficientData { filtered: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Linalg(LinalgError),
    #[error(transparent)]
    Alternating(#[from] AltError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProblem", into = "RawProblem")]
pub struct InclusionProblem {
    f: PolyMap,
    q: ProjectableSet,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    #[serde(rename = "F")]
    f: PolyMap,
    #[serde(rename = "Q")]
    q: ProjectableSet,
}

impl TryFrom<RawProblem> for InclusionProblem {
    type Error = InclusionError;

    fn try_from(raw: RawProblem) -> Result<Self, InclusionError> {
        InclusionProblem::new(raw.f, raw.q)
    }
}

impl From<InclusionProblem> for RawProblem {
    fn from(p: InclusionProblem) -> Self {
        RawProblem { f: p.f, q: p.q }
    }
}

impl InclusionProblem {
    pub fn new(f: PolyMap, q: ProjectableSet) -> Result<Self, InclusionError> {
        if f.output_dim() != q.ambient_dim() {
            return Err(InclusionError::DimensionMismatch {
                what: "Q",
                expected: f.output_dim(),
                found: q.ambient_dim(),
            });
        }
        Ok(InclusionProblem { f, q })
    }

    pub fn f(&self) -> &PolyMap {
        &self.f
    }

    pub fn q(&self) -> &ProjectableSet {
        &self.q
    }

    /// The chart of `F` over all of coordinate space.
    pub fn chart(&self) -> ManifoldChart {
        ManifoldChart {
            f: self.f.clone(),
            domain: None,
        }
    }
}

/// `M = F(U)` for an open coordinate box `U`, or all of coordinate space.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifoldChart {
    f: PolyMap,
    domain: Option<(Vector, Vector)>,
}

/// A point of `M` with its chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPoint {
    pub coords: Vector,
    pub image: Vector,
}

impl ManifoldChart {
    pub fn new(f: PolyMap, lower: Vector, upper: Vector) -> Result<Self, InclusionError> {
        let n = f.input_dim();
        for (what, found) in [("U_lower", lower.len()), ("U_upper", upper.len())] {
            if found != n {
                return Err(InclusionError::DimensionMismatch {
                    what,
                    expected: n,
                    found,
                });
            }
        }
        if (0..n).any(|i| lower[i] >= upper[i]) {
            return Err(InclusionError::InvalidDomain);
        }
        Ok(ManifoldChart {
            f,
            domain: Some((lower, upper)),
        })
    }

    pub fn unbounded(f: PolyMap) -> Self {
        ManifoldChart { f, domain: None }
    }

    pub fn f(&self) -> &PolyMap {
        &self.f
    }

    pub fn contains(&self, x: &Vector) -> bool {
        match &self.domain {
            None => true,
            Some((lo, hi)) => (0..x.len()).all(|i| lo[i] < x[i] && x[i] < hi[i]),
        }
    }

    pub fn point(&self, coords: Vector) -> Result<ChartPoint, InclusionError> {
        self.check_coords(&coords)?;
        if !self.contains(&coords) {
            return Err(InclusionError::OutsideChart(coords));
        }
        let image = self.f.eval(&coords)?;
        Ok(ChartPoint { coords, image })
    }

    fn check_coords(&self, x: &Vector) -> Result<(), InclusionError> {
        if x.len() != self.f.input_dim() {
            return Err(InclusionError::DimensionMismatch {
                what: "coordinates",
                expected: self.f.input_dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `argmin_s |F(x) + ∇F(x)s − y|`.
    pub fn least_squares_step(&self, x: &Vector, y: &Vector) -> Result<Vector, InclusionError> {
        self.check_coords(x)?;
        if y.len() != self.f.output_dim() {
            return Err(InclusionError::DimensionMismatch {
                what: "query",
                expected: self.f.output_dim(),
                found: y.len(),
            });
        }
        let j = self.f.jacobian(x)?;
        let residual = y - &self.f.eval(x)?;
        match linalg::least_squares(&j, &residual) {
            Ok(s) => Ok(s),
            Err(LinalgError::RankDeficient { .. }) => Err(InclusionError::RankDeficient(x.clone())),
            Err(e) => Err(InclusionError::Linalg(e)),
        }
    }

    /// Orthonormal basis of `Null(∇F(x)ᵀ)`, the normal space of `M` at `F(x)`.
    pub fn normal_basis(&self, x: &Vector) -> Result<Vec<Vector>, InclusionError> {
        self.check_coords(x)?;
        let j = self.f.jacobian(x)?;
        let cols: Vec<Vector> = (0..j.cols()).map(|c| j.column(c)).collect();
        let range = linalg::orthonormal_basis(&cols);
        if range.len() < cols.len() {
            return Err(InclusionError::RankDeficient(x.clone()));
        }
        Ok(linalg::orthonormal_complement(&range, j.rows()))
    }
}

/// `y = P_Q(F(x))` and the least-squares step toward it.
pub fn gauss_newton_step(
    p: &InclusionProblem,
    x: &Vector,
) -> Result<(Vector, Vector), InclusionError> {
    let chart = p.chart();
    chart.check_coords(x)?;
    let y = p.q.project(&p.f.eval(x)?)?;
    let s = chart.least_squares_step(x, &y)?;
    Ok((s, y))
}

/// `Φ(F(x), y) = F(x + s)`.
pub fn faithful_projection(
    chart: &ManifoldChart,
    x: &Vector,
    y: &Vector,
) -> Result<Vector, InclusionError> {
    let base = chart.point(x.clone())?;
    Ok(step_on_chart(chart, &base, y)?.image)
}

fn step_on_chart(chart: &ManifoldChart, base: &ChartPoint, y: &Vector) -> Result<ChartPoint, InclusionError> {
    let s = chart.least_squares_step(&base.coords, y)?;
    let next = &base.coords + &s;
    if !chart.contains(&next) {
        return Err(InclusionError::LeftChart(next));
    }
    let image = chart.f.eval(&next)?;
    Ok(ChartPoint { coords: next, image })
}

impl FaithfulApproximation for ManifoldChart {
    type Point = ChartPoint;

    fn ambient_dim(&self) -> usize {
        self.f.output_dim()
    }

    fn embed(&self, point: &ChartPoint) -> Vector {
        point.image.clone()
    }

    fn approximate(&self, base: &ChartPoint, y: &Vector) -> Result<ChartPoint, AltError> {
        step_on_chart(self, base, y).map_err(|e| {
            let status = match e {
                InclusionError::LeftChart(_) | InclusionError::OutsideChart(_) => Status::LeftChart,
                _ => Status::RankDeficient,
            };
            AltError::Terminal {
                status,
                reason: e.to_string(),
            }
        })
    }

    fn distance(&self, _z: &Vector) -> Option<f64> {
        None
    }

    fn coords(&self, point: &ChartPoint) -> Option<Vector> {
        Some(point.coords.clone())
    }
}

/// Iterates `x ← x + s` on `chart`; record `k` holds `F(x_k)`, `P_Q(F(x_k))`
/// and the coordinates `x_k`.
pub fn solve_on_chart(
    chart: &ManifoldChart,
    q: &ProjectableSet,
    x0: &Vector,
    opts: &SolveOptions,
) -> Result<IterationTrace, InclusionError> {
    let start = chart.point(x0.clone())?;
    Ok(alternating::run_approximate(chart, q, &start, opts)?)
}

pub fn solve_inclusion(
    p: &InclusionProblem,
    x0: &Vector,
    opts: &SolveOptions,
) -> Result<IterationTrace, InclusionError> {
    solve_on_chart(&p.chart(), &p.q, x0, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FaithfulnessSample {
    pub k: usize,
    /// `|ẑ_k − Φ(z_k, y_k)| / |y_k − z_k|`.
    pub ratio: f64,
    /// Angle between `z_k − y_k` and `ẑ_k − y_k`.
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaithfulnessReport {
    pub samples: Vec<FaithfulnessSample>,
    /// Indices dropped by the angle floor.
    pub filtered: Vec<usize>,
}

impl FaithfulnessReport {
    pub fn ratios(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.ratio).collect()
    }
}

fn angle_between(a: &Vector, b: &Vector) -> f64 {
    let na = a.norm();
    let nb = b.norm();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (a.dot(b) / (na * nb)).clamp(-1.0, 1.0).acos()
}

/// Ratios `|ẑ_k − Φ(z_k, y_k)| / |y_k − z_k|` for bases `z_k = F(x_k)`.
///
/// Samples whose angle is below `alpha` are dropped, except those with
/// `z_k = ẑ_k`, which are kept. The queries must approach the bases: the
/// last separation has to be at most [`APPROACH_FACTOR`] times the first.
pub fn verify_faithfulness(
    chart: &ManifoldChart,
    base_coords: &[Vector],
    queries: &[Vector],
    exact: &[Vector],
    alpha: f64,
) -> Result<FaithfulnessReport, InclusionError> {
    let m = base_coords.len();
    for (what, len) in [("queries", queries.len()), ("exact projections", exact.len())] {
        if len != m {
            return Err(InclusionError::DimensionMismatch {
                what,
                expected: m,
                found: len,
            });
        }
    }
    if m == 0 {
        return Err(InclusionError::InsufficientData { filtered: 0 });
    }
    let bases = base_coords
        .iter()
        .map(|x| chart.point(x.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    let first = queries[0].distance(&bases[0].image);
    let last = queries[m - 1].distance(&bases[m - 1].image);
    if last.is_nan() || last > APPROACH_FACTOR * first {
        return Err(InclusionError::PreconditionViolated(format!(
            "queries do not approach the bases (separation {first:e} to {last:e})"
        )));
    }

    let mut samples = Vec::new();
    let mut filtered = Vec::new();
    for k in 0..m {
        let z = &bases[k].image;
        let y = &queries[k];
        let zhat = &exact[k];
        let sep = y.distance(z);
        let angle = angle_between(&(z - y), &(zhat - y));
        let coincident = z.distance(zhat) <= 1e-15 * (1.0 + z.norm());
        if sep == 0.0 || (angle < alpha && !coincident) {
            filtered.push(k);
            continue;
        }
        let phi = step_on_chart(chart, &bases[k], y)?.image;
        samples.push(FaithfulnessSample {
            k,
            ratio: zhat.distance(&phi) / sep,
            angle,
        });
    }
    if samples.is_empty() {
        return Err(InclusionError::InsufficientData {
            filtered: filtered.len(),
        });
    }
    Ok(FaithfulnessReport { samples, filtered })
}
