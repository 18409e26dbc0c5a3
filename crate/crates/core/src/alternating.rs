//! Alternating-projection drivers.
//!
//! Three loops share one trace format:
//!
//! * [`run_exact`]: `z ∈ Q`, `x = P_M(z)`, `z' = P_Q(x)`;
//! * [`run_inexact`]: the same with `x` produced by an [`InexactProjector`];
//! * [`run_approximate`]: `z ∈ M`, `y = P_Q(z)`, `z' = Φ(z, y)` for a
//!   [`FaithfulApproximation`] `Φ` that stays on `M`.
//!
//! Record `k` holds the iterate `z_k`, its partner point and the gap
//! `|z_k − partner|`. The loop stops once a gap is at most `gap_tol`, after
//! `max_iters` updates, or when the gap grows more than tenfold over 20
//! updates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Vector;
use crate::sets::{ProjectableSet, SetError};

pub const DIVERGENCE_WINDOW: usize = 20;
pub const DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AltError {
    #[error("invalid options: {0}")]
    InvalidOptions(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Set(#[from] SetError),
    /// Raised by a projector to end the run with `status`.
    #[error("{reason}")]
    Terminal { status: Status, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub gap_tol: f64,
    pub max_iters: usize,
    pub epsilon: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            gap_tol: 1e-10,
            max_iters: 10_000,
            epsilon: 0.0,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<(), AltError> {
        if !(self.gap_tol > 0.0 && self.gap_tol.is_finite()) {
            return Err(AltError::InvalidOptions(format!(
                "gap_tol must be positive, got {}",
                self.gap_tol
            )));
        }
        if self.max_iters < 1 {
            return Err(AltError::InvalidOptions("max_iters must be at least 1".into()));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(AltError::InvalidOptions(format!(
                "epsilon must be nonnegative, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Converged,
    MaxIters,
    Diverged,
    LinearizationInfeasible,
    RankDeficient,
    LeftChart,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "Converged",
            Status::MaxIters => "MaxIters",
            Status::Diverged => "Diverged",
            Status::LinearizationInfeasible => "LinearizationInfeasible",
            Status::RankDeficient => "RankDeficient",
            Status::LeftChart => "LeftChart",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub k: usize,
    /// The iterate.
    pub z: Vector,
    /// Its partner on the other set (`x_k` or `y_k`).
    pub partner: Vector,
    pub gap: f64,
    /// Distance of `z` to `Q`.
    pub dist_q: f64,
    /// Distance of `z` to `M`, when the manifold can measure it.
    pub dist_m: Option<f64>,
    /// Chart coordinates of `z`, for chart-based runs.
    pub coords: Option<Vector>,
}

/// The raw start and its projection, when the start was off its set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticStart {
    pub raw: Vector,
    pub projected: Vector,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub status: Status,
    pub start: Option<SyntheticStart>,
}

impl IterationTrace {
    /// Number of completed updates.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn gaps(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.gap).collect()
    }

    pub fn last(&self) -> &IterationRecord {
        self.records.last().expect("traces hold at least one record")
    }

    pub fn final_gap(&self) -> f64 {
        self.last().gap
    }

    pub fn is_converged(&self) -> bool {
        self.status == Status::Converged
    }
}

/// Produces `x` with `d_{P_M(z)}(x) ≤ ε d_M(z)`.
pub trait InexactProjector {
    fn ambient_dim(&self) -> usize;

    /// `iteration` lets randomized projectors derive reproducible noise.
    fn project_inexact(&self, z: &Vector, iteration: usize) -> Result<Vector, AltError>;

    /// `d_M(z)`, if it can be computed.
    fn distance(&self, z: &Vector) -> Option<f64>;
}

impl InexactProjector for ProjectableSet {
    fn ambient_dim(&self) -> usize {
        ProjectableSet::ambient_dim(self)
    }

    fn project_inexact(&self, z: &Vector, _iteration: usize) -> Result<Vector, AltError> {
        Ok(self.project(z)?)
    }

    fn distance(&self, z: &Vector) -> Option<f64> {
        ProjectableSet::distance(self, z).ok()
    }
}

/// Exact projection followed by a reproducible perturbation of size `ε d_M(z)`.
#[derive(Debug, Clone)]
pub struct CorruptingProjector {
    set: ProjectableSet,
    eps: f64,
    seed: u64,
}

pub fn make_corrupting_projector(
    set: ProjectableSet,
    eps: f64,
    direction_seed: u64,
) -> Result<CorruptingProjector, AltError> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(AltError::InvalidOptions(format!(
            "eps must be nonnegative, got {eps}"
        )));
    }
    Ok(CorruptingProjector {
        set,
        eps,
        seed: direction_seed,
    })
}

impl CorruptingProjector {
    pub fn set(&self) -> &ProjectableSet {
        &self.set
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// The unit perturbation direction used at `iteration`.
    pub fn direction(&self, iteration: usize) -> Vector {
        let n = self.set.ambient_dim();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(iteration as u64);
        loop {
            let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            if let Some(u) = Vector::new(g).ok().and_then(|g| g.normalized()) {
                return u;
            }
            if n == 0 {
                return Vector::zeros(0);
            }
        }
    }
}

impl InexactProjector for CorruptingProjector {
    fn ambient_dim(&self) -> usize {
        self.set.ambient_dim()
    }

    fn project_inexact(&self, z: &Vector, iteration: usize) -> Result<Vector, AltError> {
        let exact = self.set.project(z)?;
        if self.eps == 0.0 {
            return Ok(exact);
        }
        let d = exact.distance(z);
        Ok(exact.add_scaled(self.eps * d, &self.direction(iteration)))
    }

    fn distance(&self, z: &Vector) -> Option<f64> {
        self.set.distance(z).ok()
    }
}

/// A map `Φ(z, y)` onto `M` that approximates `P_M(y)` near `M`.
pub trait FaithfulApproximation {
    /// A point of `M` plus whatever parametrization the map needs.
    type Point: Clone;

    fn ambient_dim(&self) -> usize;

    fn embed(&self, point: &Self::Point) -> Vector;

    fn approximate(&self, base: &Self::Point, y: &Vector) -> Result<Self::Point, AltError>;

    /// `d_M(z)`, if it can be computed.
    fn distance(&self, z: &Vector) -> Option<f64>;

    fn coords(&self, _point: &Self::Point) -> Option<Vector> {
        None
    }
}

impl FaithfulApproximation for ProjectableSet {
    type Point = Vector;

    fn ambient_dim(&self) -> usize {
        ProjectableSet::ambient_dim(self)
    }

    fn embed(&self, point: &Vector) -> Vector {
        point.clone()
    }

    fn approximate(&self, _base: &Vector, y: &Vector) -> Result<Vector, AltError> {
        Ok(self.project(y)?)
    }

    fn distance(&self, z: &Vector) -> Option<f64> {
        ProjectableSet::distance(self, z).ok()
    }
}

fn same_dim(expected: usize, found: usize) -> Result<(), AltError> {
    if expected == found {
        Ok(())
    } else {
        Err(AltError::DimensionMismatch { expected, found })
    }
}

/// Bookkeeping shared by the drivers.
struct Recorder {
    opts: SolveOptions,
    records: Vec<IterationRecord>,
}

impl Recorder {
    /// Appends a record and returns the terminal status, if any.
    fn push(&mut self, record: IterationRecord) -> Option<Status> {
        let k = record.k;
        let gap = record.gap;
        self.records.push(record);
        if !gap.is_finite() || !self.records[k].z.is_finite() {
            return Some(Status::Diverged);
        }
        if gap <= self.opts.gap_tol {
            return Some(Status::Converged);
        }
        if k >= DIVERGENCE_WINDOW && gap > DIVERGENCE_FACTOR * self.records[k - DIVERGENCE_WINDOW].gap {
            return Some(Status::Diverged);
        }
        if k >= self.opts.max_iters {
            return Some(Status::MaxIters);
        }
        None
    }

    fn finish(self, status: Status, start: Option<SyntheticStart>) -> IterationTrace {
        IterationTrace {
            records: self.records,
            status,
            start,
        }
    }
}

/// Ends the run on a projector's terminal signal; propagates other errors.
fn terminal_or<T>(result: Result<T, AltError>) -> Result<Result<T, Status>, AltError> {
    match result {
        Ok(v) => Ok(Ok(v)),
        Err(AltError::Terminal { status, .. }) => Ok(Err(status)),
        Err(e) => Err(e),
    }
}

/// Exact alternating projections between `q` and `m`.
pub fn run_exact(
    q: &ProjectableSet,
    m: &ProjectableSet,
    z0: &Vector,
    opts: &SolveOptions,
) -> Result<IterationTrace, AltError> {
    run_inexact(q, m, z0, opts)
}

/// Alternating projections with an inexact projector onto `M`.
///
/// A start off `Q` is first projected onto `Q`; both points are kept in
/// [`IterationTrace::start`].
pub fn run_inexact<P: InexactProjector + ?Sized>(
    q: &ProjectableSet,
    m: &P,
    z0: &Vector,
    opts: &SolveOptions,
) -> Result<IterationTrace, AltError> {
    opts.validate()?;
    let n = q.ambient_dim();
    same_dim(n, m.ambient_dim())?;
    same_dim(n, z0.len())?;

    let mut z = z0.clone();
    let mut start = None;
    if q.distance(&z)? > 0.0 {
        let projected = q.project(&z)?;
        start = Some(SyntheticStart {
            raw: z,
            projected: projected.clone(),
        });
        z = projected;
    }

    let mut rec = Recorder {
        opts: *opts,
        records: Vec::new(),
    };
    for k in 0.. {
        let x = match terminal_or(m.project_inexact(&z, k))? {
            Ok(x) => x,
            Err(status) => return Ok(rec.finish(status, start)),
        };
        let record = IterationRecord {
            k,
            gap: z.distance(&x),
            dist_q: q.distance(&z)?,
            dist_m: m.distance(&z),
            coords: None,
            partner: x,
            z,
        };
        if let Some(status) = rec.push(record) {
            return Ok(rec.finish(status, start));
        }
        z = q.project(&rec.records[k].partner)?;
    }
    unreachable!("the loop only exits by returning")
}

/// `z ← Φ(z, y)` with `y = P_Q(z)`, starting from a point of `M`.
pub fn run_approximate<A: FaithfulApproximation + ?Sized>(
    m: &A,
    q: &ProjectableSet,
    start: &A::Point,
    opts: &SolveOptions,
) -> Result<IterationTrace, AltError> {
    opts.validate()?;
    let n = q.ambient_dim();
    same_dim(n, m.ambient_dim())?;

    let mut point = start.clone();
    let mut rec = Recorder {
        opts: *opts,
        records: Vec::new(),
    };
    for k in 0.. {
        let z = m.embed(&point);
        same_dim(n, z.len())?;
        let y = q.project(&z)?;
        let gap = z.distance(&y);
        let record = IterationRecord {
            k,
            gap,
            dist_q: gap,
            dist_m: m.distance(&z),
            coords: m.coords(&point),
            partner: y,
            z,
        };
        if let Some(status) = rec.push(record) {
            return Ok(rec.finish(status, None));
        }
        point = match terminal_or(m.approximate(&point, &rec.records[k].partner))? {
            Ok(p) => p,
            Err(status) => return Ok(rec.finish(status, None)),
        };
    }
    unreachable!("the loop only exits by returning")
}
