//! Closed sets with exact nearest-point maps.
//!
//! Nonconvex sets may have several nearest points. Projections here are
//! always single-valued, using these tie-breaks:
//!
//! * sphere, point at the center: `center + radius · e₀`;
//! * finite point set: equidistant candidates resolve to the lowest index;
//! * fixed-rank matrices: a repeated singular value at the cut keeps the
//!   columns that come first in the Jacobi SVD ordering.
//!
//! Matrices in [`ProjectableSet::fixed_rank`] are flattened row-major.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, LinalgError, Matrix, Vector};
use crate::qp::{self, FarkasCertificate, ProjectionQp, QpError};

/// Distance below which a probe point counts as lying on its set.
pub const ON_SET_TOL: f64 = 1e-9;
const BASIS_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SetError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("box bounds must satisfy lower ≤ upper (coordinate {0})")]
    InvalidBounds(usize),
    #[error("affine basis is not orthonormal (Gram deviation {0:e})")]
    BasisNotOrthonormal(f64),
    #[error("normal vector must be nonzero")]
    ZeroNormal,
    #[error("finite point set must contain at least one point")]
    EmptyPointSet,
    #[error("rank {rank} must lie in 1..={max}")]
    InvalidRank { rank: usize, max: usize },
    #[error("polyhedron is empty")]
    EmptyPolyhedron(FarkasCertificate),
    #[error("polyhedron needs \"dim\" when it has no constraint rows")]
    MissingDimension,
    #[error("probe point is at distance {0:e} from its set")]
    PointNotOnSet(f64),
    #[error("probes are at different points (gap {0:e})")]
    ProbeMismatch(f64),
    #[error("matrix has rank {found} < {expected}; the fixed-rank normal space is undefined there")]
    RankDrop { expected: usize, found: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Qp(#[from] QpError),
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Box {
        lower: Vector,
        upper: Vector,
    },
    Ball {
        center: Vector,
        radius: f64,
    },
    AffineSubspace {
        anchor: Vector,
        basis: Vec<Vector>,
    },
    Hyperplane {
        normal: Vector,
        offset: f64,
    },
    Halfspace {
        normal: Vector,
        offset: f64,
    },
    Sphere {
        center: Vector,
        radius: f64,
    },
    FinitePointSet {
        points: Vec<Vector>,
    },
    FixedRankMatrices {
        rows: usize,
        cols: usize,
        rank: usize,
    },
    Polyhedron {
        dim: usize,
        a_ineq: Matrix,
        b_ineq: Vector,
        a_eq: Matrix,
        b_eq: Vector,
    },
}

/// A closed subset of `R^n` with a deterministic projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetSpec", into = "SetSpec")]
pub struct ProjectableSet {
    kind: Kind,
}

fn same_dim(expected: usize, found: usize) -> Result<(), SetError> {
    if expected == found {
        Ok(())
    } else {
        Err(SetError::DimensionMismatch { expected, found })
    }
}

fn check_radius(radius: f64) -> Result<(), SetError> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(SetError::InvalidRadius(radius))
    }
}

impl ProjectableSet {
    pub fn boxed(lower: Vector, upper: Vector) -> Result<Self, SetError> {
        same_dim(lower.len(), upper.len())?;
        if let Some(i) = (0..lower.len()).find(|&i| lower[i] > upper[i]) {
            return Err(SetError::InvalidBounds(i));
        }
        Ok(Self::from_kind(Kind::Box { lower, upper }))
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self, SetError> {
        check_radius(radius)?;
        Ok(Self::from_kind(Kind::Ball { center, radius }))
    }

    pub fn sphere(center: Vector, radius: f64) -> Result<Self, SetError> {
        check_radius(radius)?;
        Ok(Self::from_kind(Kind::Sphere { center, radius }))
    }

    /// `anchor + span(basis)` for an orthonormal `basis`.
    pub fn affine_subspace(anchor: Vector, basis: Vec<Vector>) -> Result<Self, SetError> {
        let n = anchor.len();
        let mut worst = 0.0f64;
        for (i, b) in basis.iter().enumerate() {
            same_dim(n, b.len())?;
            for (j, c) in basis.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((b.dot(c) - target).abs());
            }
        }
        if worst > BASIS_TOL {
            return Err(SetError::BasisNotOrthonormal(worst));
        }
        Ok(Self::from_kind(Kind::AffineSubspace { anchor, basis }))
    }

    /// `anchor + span(directions)`, orthonormalizing the directions first.
    pub fn affine_span(anchor: Vector, directions: &[Vector]) -> Result<Self, SetError> {
        for d in directions {
            same_dim(anchor.len(), d.len())?;
        }
        Self::affine_subspace(anchor, linalg::orthonormal_basis(directions))
    }

    /// All of `R^dim`.
    pub fn whole_space(dim: usize) -> Self {
        Self::from_kind(Kind::AffineSubspace {
            anchor: Vector::zeros(dim),
            basis: (0..dim).map(|i| Vector::unit(dim, i)).collect(),
        })
    }

    /// `{x : ⟨normal, x⟩ = offset}`.
    pub fn hyperplane(normal: Vector, offset: f64) -> Result<Self, SetError> {
        if normal.norm() == 0.0 {
            return Err(SetError::ZeroNormal);
        }
        Ok(Self::from_kind(Kind::Hyperplane { normal, offset }))
    }

    /// `{x : ⟨normal, x⟩ ≤ offset}`.
    pub fn halfspace(normal: Vector, offset: f64) -> Result<Self, SetError> {
        if normal.norm() == 0.0 {
            return Err(SetError::ZeroNormal);
        }
        Ok(Self::from_kind(Kind::Halfspace { normal, offset }))
    }

    pub fn finite_points(points: Vec<Vector>) -> Result<Self, SetError> {
        let first = points.first().ok_or(SetError::EmptyPointSet)?;
        let n = first.len();
        for p in &points {
            same_dim(n, p.len())?;
        }
        Ok(Self::from_kind(Kind::FinitePointSet { points }))
    }

    pub fn singleton(point: Vector) -> Self {
        Self::from_kind(Kind::FinitePointSet {
            points: vec![point],
        })
    }

    /// `rows × cols` matrices of rank at most `rank`.
    pub fn fixed_rank(rows: usize, cols: usize, rank: usize) -> Result<Self, SetError> {
        let max = rows.min(cols);
        if rank < 1 || rank > max {
            return Err(SetError::InvalidRank { rank, max });
        }
        Ok(Self::from_kind(Kind::FixedRankMatrices { rows, cols, rank }))
    }

    /// `{x : A_ineq x ≤ b_ineq, A_eq x = b_eq}`; rejected if empty.
    pub fn polyhedron(
        a_ineq: Matrix,
        b_ineq: Vector,
        a_eq: Matrix,
        b_eq: Vector,
    ) -> Result<Self, SetError> {
        let dim = a_ineq.cols();
        let qp = ProjectionQp::new(Vector::zeros(dim), a_ineq, b_ineq, a_eq, b_eq)?;
        match qp::solve_projection_qp(&qp) {
            Ok(_) => {}
            Err(QpError::Infeasible(cert)) => return Err(SetError::EmptyPolyhedron(cert)),
            Err(e) => return Err(e.into()),
        }
        Ok(Self::from_kind(Kind::Polyhedron {
            dim,
            a_ineq: qp.a_ineq().clone(),
            b_ineq: qp.b_ineq().clone(),
            a_eq: qp.a_eq().clone(),
            b_eq: qp.b_eq().clone(),
        }))
    }

    fn from_kind(kind: Kind) -> Self {
        ProjectableSet { kind }
    }

    pub fn variant_name(&self) -> &'static str {
        match &self.kind {
            Kind::Box { .. } => "box",
            Kind::Ball { .. } => "ball",
            Kind::AffineSubspace { .. } => "affine_subspace",
            Kind::Hyperplane { .. } => "hyperplane",
            Kind::Halfspace { .. } => "halfspace",
            Kind::Sphere { .. } => "sphere",
            Kind::FinitePointSet { .. } => "finite_point_set",
            Kind::FixedRankMatrices { .. } => "fixed_rank_matrices",
            Kind::Polyhedron { .. } => "polyhedron",
        }
    }

    pub fn is_convex(&self) -> bool {
        match &self.kind {
            Kind::Sphere { .. } | Kind::FixedRankMatrices { .. } => false,
            Kind::FinitePointSet { points } => points.len() == 1,
            _ => true,
        }
    }

    pub fn ambient_dim(&self) -> usize {
        match &self.kind {
            Kind::Box { lower, .. } => lower.len(),
            Kind::Ball { center, .. } | Kind::Sphere { center, .. } => center.len(),
            Kind::AffineSubspace { anchor, .. } => anchor.len(),
            Kind::Hyperplane { normal, .. } | Kind::Halfspace { normal, .. } => normal.len(),
            Kind::FinitePointSet { points } => points[0].len(),
            Kind::FixedRankMatrices { rows, cols, .. } => rows * cols,
            Kind::Polyhedron { dim, .. } => *dim,
        }
    }

    fn check(&self, z: &Vector) -> Result<(), SetError> {
        same_dim(self.ambient_dim(), z.len())
    }

    /// The nearest point of the set to `z`.
    pub fn project(&self, z: &Vector) -> Result<Vector, SetError> {
        self.check(z)?;
        let p = match &self.kind {
            Kind::Box { lower, upper } => Vector::from_vec(
                z.iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .map(|(&v, (&lo, &hi))| v.clamp(lo, hi))
                    .collect(),
            ),
            Kind::Ball { center, radius } => {
                let d = z - center;
                let r = d.norm();
                if r <= *radius {
                    z.clone()
                } else {
                    center.add_scaled(radius / r, &d)
                }
            }
            Kind::Sphere { center, radius } => {
                let d = z - center;
                let r = d.norm();
                if r == 0.0 {
                    center.add_scaled(*radius, &Vector::unit(z.len(), 0))
                } else {
                    center.add_scaled(radius / r, &d)
                }
            }
            Kind::AffineSubspace { anchor, basis } => {
                let d = z - anchor;
                basis
                    .iter()
                    .fold(anchor.clone(), |acc, b| acc.add_scaled(b.dot(&d), b))
            }
            Kind::Hyperplane { normal, offset } => {
                let excess = normal.dot(z) - offset;
                z.add_scaled(-excess / normal.dot(normal), normal)
            }
            Kind::Halfspace { normal, offset } => {
                let excess = normal.dot(z) - offset;
                if excess <= 0.0 {
                    z.clone()
                } else {
                    z.add_scaled(-excess / normal.dot(normal), normal)
                }
            }
            Kind::FinitePointSet { points } => {
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (i, p) in points.iter().enumerate() {
                    let d = p.distance(z);
                    if d < best_d {
                        best = i;
                        best_d = d;
                    }
                }
                points[best].clone()
            }
            Kind::FixedRankMatrices { rows, cols, rank } => {
                let m = Matrix::from_flat(z, *rows, *cols)?;
                let svd = linalg::svd(&m)?;
                if svd.sigma.iter().skip(*rank).all(|&s| s == 0.0) {
                    z.clone()
                } else {
                    let mut truncated = Matrix::zeros(*rows, *cols);
                    for k in 0..*rank {
                        let s = svd.sigma[k];
                        for i in 0..*rows {
                            for j in 0..*cols {
                                truncated[(i, j)] += s * svd.u[(i, k)] * svd.v[(j, k)];
                            }
                        }
                    }
                    truncated.flatten()
                }
            }
            Kind::Polyhedron {
                a_ineq,
                b_ineq,
                a_eq,
                b_eq,
                ..
            } => {
                let qp = ProjectionQp::new(
                    z.clone(),
                    a_ineq.clone(),
                    b_ineq.clone(),
                    a_eq.clone(),
                    b_eq.clone(),
                )?;
                qp::solve_projection_qp(&qp)?.solution
            }
        };
        Ok(p)
    }

    /// `d_S(z) = |z − P_S(z)|`.
    pub fn distance(&self, z: &Vector) -> Result<f64, SetError> {
        Ok(self.project(z)?.distance(z))
    }

    pub fn contains(&self, z: &Vector, tol: f64) -> Result<bool, SetError> {
        Ok(self.distance(z)? <= tol)
    }

    /// Generators of the normal cone at a point of the set.
    pub fn normal_cone(&self, point: &Vector) -> Result<NormalCone, SetError> {
        let probe = NormalConeProbe::new(self.clone(), point.clone())?;
        normal_vectors(&probe)
    }
}

/// Normal cone description: a subspace, or a finitely generated cone.
#[derive(Debug, Clone, PartialEq)]
pub enum NormalCone {
    /// The span of an orthonormal basis.
    Subspace { basis: Vec<Vector> },
    /// `cone(rays) + span(lines)`.
    Polyhedral { rays: Vec<Vector>, lines: Vec<Vector> },
}

impl NormalCone {
    fn generators(&self) -> (&[Vector], &[Vector]) {
        match self {
            NormalCone::Subspace { basis } => (&[], basis),
            NormalCone::Polyhedral { rays, lines } => (rays, lines),
        }
    }

    pub fn is_trivial(&self) -> bool {
        let (rays, lines) = self.generators();
        rays.is_empty() && lines.is_empty()
    }

    /// Whether `v` is in the cone, up to `tol · |v|`.
    pub fn contains(&self, v: &Vector, tol: f64) -> bool {
        match self {
            NormalCone::Subspace { basis } => {
                let proj = basis
                    .iter()
                    .fold(Vector::zeros(v.len()), |acc, b| acc.add_scaled(b.dot(v), b));
                proj.distance(v) <= tol * v.norm().max(f64::MIN_POSITIVE)
            }
            NormalCone::Polyhedral { rays, lines } => cone_distance(rays, lines, v)
                .map(|d| d <= tol * v.norm().max(f64::MIN_POSITIVE))
                .unwrap_or(false),
        }
    }
}

/// Distance from `v` to `cone(rays) + span(lines)`: by Moreau decomposition it
/// equals the norm of the projection of `v` onto the polar cone
/// `{u : ⟨r, u⟩ ≤ 0, ⟨l, u⟩ = 0}`.
fn cone_distance(rays: &[Vector], lines: &[Vector], v: &Vector) -> Result<f64, SetError> {
    let n = v.len();
    let to_rows = |gens: &[Vector]| -> Vec<Vec<f64>> { gens.iter().map(|g| g.to_vec()).collect() };
    let qp = ProjectionQp::new(
        v.clone(),
        Matrix::from_rows(&to_rows(rays), n)?,
        Vector::zeros(rays.len()),
        Matrix::from_rows(&to_rows(lines), n)?,
        Vector::zeros(lines.len()),
    )?;
    Ok(qp::solve_projection_qp(&qp)?.solution.norm())
}

/// A set together with a point on it, for normal-cone queries.
#[derive(Debug, Clone)]
pub struct NormalConeProbe {
    set: ProjectableSet,
    point: Vector,
}

impl NormalConeProbe {
    pub fn new(set: ProjectableSet, point: Vector) -> Result<Self, SetError> {
        let d = set.distance(&point)?;
        if d > ON_SET_TOL {
            return Err(SetError::PointNotOnSet(d));
        }
        Ok(NormalConeProbe { set, point })
    }

    pub fn set(&self) -> &ProjectableSet {
        &self.set
    }

    pub fn point(&self) -> &Vector {
        &self.point
    }
}

/// The normal cone of the probed set at the probe point.
///
/// Smooth variants (sphere, affine subspace, hyperplane, fixed rank at exact
/// rank) give an orthonormal basis of the normal space; convex polyhedral
/// variants give generators. An isolated point of a finite set has the whole
/// space as normal cone.
pub fn normal_vectors(probe: &NormalConeProbe) -> Result<NormalCone, SetError> {
    let x = &probe.point;
    let n = x.len();
    let on = |gap: f64| gap.abs() <= ON_SET_TOL;
    let cone = match &probe.set.kind {
        Kind::Sphere { center, radius } => NormalCone::Subspace {
            basis: vec![(x - center).scale(1.0 / radius)
                .normalized()
                .unwrap_or_else(|| Vector::unit(n, 0))],
        },
        Kind::Hyperplane { normal, .. } => NormalCone::Subspace {
            basis: vec![normal.normalized().ok_or(SetError::ZeroNormal)?],
        },
        Kind::AffineSubspace { basis, .. } => NormalCone::Subspace {
            basis: linalg::orthonormal_complement(basis, n),
        },
        Kind::FinitePointSet { .. } => NormalCone::Subspace {
            basis: (0..n).map(|i| Vector::unit(n, i)).collect(),
        },
        Kind::FixedRankMatrices { rows, cols, rank } => {
            fixed_rank_normal_space(x, *rows, *cols, *rank)?
        }
        Kind::Box { lower, upper } => {
            let mut rays = Vec::new();
            let mut lines = Vec::new();
            for i in 0..n {
                let at_lo = on(x[i] - lower[i]);
                let at_hi = on(upper[i] - x[i]);
                match (at_lo, at_hi) {
                    (true, true) => lines.push(Vector::unit(n, i)),
                    (false, true) => rays.push(Vector::unit(n, i)),
                    (true, false) => rays.push(Vector::unit(n, i).scale(-1.0)),
                    (false, false) => {}
                }
            }
            NormalCone::Polyhedral { rays, lines }
        }
        Kind::Ball { center, radius } => {
            let d = x - center;
            let rays = if on(d.norm() - radius) {
                vec![d.scale(1.0 / d.norm())]
            } else {
                Vec::new()
            };
            NormalCone::Polyhedral {
                rays,
                lines: Vec::new(),
            }
        }
        Kind::Halfspace { normal, offset } => {
            let rays = if on((normal.dot(x) - offset) / normal.norm()) {
                vec![normal.normalized().ok_or(SetError::ZeroNormal)?]
            } else {
                Vec::new()
            };
            NormalCone::Polyhedral {
                rays,
                lines: Vec::new(),
            }
        }
        Kind::Polyhedron {
            a_ineq,
            b_ineq,
            a_eq,
            ..
        } => {
            let rays = (0..a_ineq.rows())
                .filter(|&i| on(linalg::dot(a_ineq.row(i), x) - b_ineq[i]))
                .filter_map(|i| a_ineq.row_vector(i).normalized())
                .collect();
            let lines = (0..a_eq.rows())
                .filter_map(|j| a_eq.row_vector(j).normalized())
                .collect();
            NormalCone::Polyhedral { rays, lines }
        }
    };
    Ok(cone)
}

fn fixed_rank_normal_space(
    x: &Vector,
    rows: usize,
    cols: usize,
    rank: usize,
) -> Result<NormalCone, SetError> {
    let m = Matrix::from_flat(x, rows, cols)?;
    let svd = linalg::svd(&m)?;
    let top = svd.sigma.first().copied().unwrap_or(0.0);
    let found = svd
        .sigma
        .iter()
        .filter(|&&s| s > linalg::RANK_TOL * top && s > 0.0)
        .count();
    if found < rank {
        return Err(SetError::RankDrop {
            expected: rank,
            found,
        });
    }
    let u: Vec<Vector> = (0..rank).map(|k| svd.u.column(k)).collect();
    let v: Vec<Vector> = (0..rank).map(|k| svd.v.column(k)).collect();
    let u_perp = linalg::orthonormal_complement(&u, rows);
    let v_perp = linalg::orthonormal_complement(&v, cols);
    let mut basis = Vec::with_capacity(u_perp.len() * v_perp.len());
    for a in &u_perp {
        for b in &v_perp {
            let mut e = Vector::zeros(rows * cols);
            for i in 0..rows {
                for j in 0..cols {
                    e[i * cols + j] = a[i] * b[j];
                }
            }
            basis.push(e);
        }
    }
    Ok(NormalCone::Subspace { basis })
}

/// Outcome of checking `N_A(x̄) ∩ −N_B(x̄) = {0}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Transversality {
    Transversal,
    /// A unit vector in `N_A(x̄) ∩ −N_B(x̄)`.
    Degenerate { witness: Vector },
}

impl Transversality {
    pub fn is_transversal(&self) -> bool {
        matches!(self, Transversality::Transversal)
    }
}

/// Decides whether the two normal cones meet only at the origin.
///
/// Writes a common vector as `R_A λ + L_A μ = −(R_B κ + L_B ν)` with
/// `λ, κ ≥ 0`. The cone of such vectors is nontrivial exactly when one of
/// the `2n` homogeneous systems `±v_i = 1` is feasible, and each system is a
/// small polyhedral feasibility problem.
pub fn check_transversality(
    a: &NormalConeProbe,
    b: &NormalConeProbe,
) -> Result<Transversality, SetError> {
    same_dim(a.point.len(), b.point.len())?;
    let gap = a.point.distance(&b.point);
    if gap > ON_SET_TOL {
        return Err(SetError::ProbeMismatch(gap));
    }
    let n = a.point.len();
    let cone_a = normal_vectors(a)?;
    let cone_b = normal_vectors(b)?;
    let (rays_a, lines_a) = cone_a.generators();
    let (rays_b, lines_b) = cone_b.generators();

    // Coefficient order: rays_a, rays_b, lines_a, lines_b.
    let gens: Vec<&Vector> = rays_a
        .iter()
        .chain(rays_b)
        .chain(lines_a)
        .chain(lines_b)
        .collect();
    let p = gens.len();
    let n_rays = rays_a.len() + rays_b.len();
    let a_part: Vec<usize> = (0..rays_a.len())
        .chain(n_rays..n_rays + lines_a.len())
        .collect();

    let mut sum_rows = Matrix::zeros(n, p);
    let mut a_rows = Matrix::zeros(n, p);
    for (k, g) in gens.iter().enumerate() {
        for i in 0..n {
            sum_rows[(i, k)] = g[i];
        }
    }
    for &k in &a_part {
        for i in 0..n {
            a_rows[(i, k)] = gens[k][i];
        }
    }
    let mut nonneg = Matrix::zeros(n_rays, p);
    for k in 0..n_rays {
        nonneg[(k, k)] = -1.0;
    }

    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut eq_rows = sum_rows.to_rows();
            eq_rows.push(a_rows.row(i).iter().map(|v| sign * v).collect());
            let mut rhs = vec![0.0; n];
            rhs.push(1.0);
            let a_eq = Matrix::from_rows(&eq_rows, p)?;
            match qp::min_norm_step(&nonneg, &Vector::zeros(n_rays), &a_eq, &Vector::from_vec(rhs)) {
                Ok(theta) => {
                    let mut w = Vector::zeros(n);
                    for &k in &a_part {
                        w = w.add_scaled(theta[k], gens[k]);
                    }
                    if let Some(witness) = w.normalized() {
                        return Ok(Transversality::Degenerate { witness });
                    }
                }
                Err(QpError::Infeasible(_)) => {}
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(Transversality::Transversal)
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum SetSpec {
    Box {
        lower: Vector,
        upper: Vector,
    },
    Ball {
        center: Vector,
        radius: f64,
    },
    AffineSubspace {
        anchor: Vector,
        basis: Vec<Vector>,
    },
    Hyperplane {
        normal: Vector,
        offset: f64,
    },
    Halfspace {
        normal: Vector,
        offset: f64,
    },
    Sphere {
        center: Vector,
        radius: f64,
    },
    FinitePointSet {
        points: Vec<Vector>,
    },
    FixedRankMatrices {
        rows: usize,
        cols: usize,
        rank: usize,
    },
    Polyhedron {
        #[serde(rename = "A_ineq", default)]
        a_ineq: Vec<Vec<f64>>,
        #[serde(default)]
        b_ineq: Vector,
        #[serde(rename = "A_eq", default)]
        a_eq: Vec<Vec<f64>>,
        #[serde(default)]
        b_eq: Vector,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
}

impl TryFrom<SetSpec> for ProjectableSet {
    type Error = SetError;

    fn try_from(spec: SetSpec) -> Result<Self, SetError> {
        match spec {
            SetSpec::Box { lower, upper } => Self::boxed(lower, upper),
            SetSpec::Ball { center, radius } => Self::ball(center, radius),
            SetSpec::AffineSubspace { anchor, basis } => Self::affine_subspace(anchor, basis),
            SetSpec::Hyperplane { normal, offset } => Self::hyperplane(normal, offset),
            SetSpec::Halfspace { normal, offset } => Self::halfspace(normal, offset),
            SetSpec::Sphere { center, radius } => Self::sphere(center, radius),
            SetSpec::FinitePointSet { points } => Self::finite_points(points),
            SetSpec::FixedRankMatrices { rows, cols, rank } => Self::fixed_rank(rows, cols, rank),
            SetSpec::Polyhedron {
                a_ineq,
                b_ineq,
                a_eq,
                b_eq,
                dim,
            } => {
                let dim = dim
                    .or_else(|| a_ineq.first().map(Vec::len))
                    .or_else(|| a_eq.first().map(Vec::len))
                    .ok_or(SetError::MissingDimension)?;
                Self::polyhedron(
                    Matrix::from_rows(&a_ineq, dim)?,
                    b_ineq,
                    Matrix::from_rows(&a_eq, dim)?,
                    b_eq,
                )
            }
        }
    }
}

impl From<ProjectableSet> for SetSpec {
    fn from(set: ProjectableSet) -> Self {
        match set.kind {
            Kind::Box { lower, upper } => SetSpec::Box { lower, upper },
            Kind::Ball { center, radius } => SetSpec::Ball { center, radius },
            Kind::AffineSubspace { anchor, basis } => SetSpec::AffineSubspace { anchor, basis },
            Kind::Hyperplane { normal, offset } => SetSpec::Hyperplane { normal, offset },
            Kind::Halfspace { normal, offset } => SetSpec::Halfspace { normal, offset },
            Kind::Sphere { center, radius } => SetSpec::Sphere { center, radius },
            Kind::FinitePointSet { points } => SetSpec::FinitePointSet { points },
            Kind::FixedRankMatrices { rows, cols, rank } => {
                SetSpec::FixedRankMatrices { rows, cols, rank }
            }
            Kind::Polyhedron {
                dim,
                a_ineq,
                b_ineq,
                a_eq,
                b_eq,
            } => SetSpec::Polyhedron {
                dim: (a_ineq.rows() + a_eq.rows() == 0).then_some(dim),
                a_ineq: a_ineq.to_rows(),
                b_ineq,
                a_eq: a_eq.to_rows(),
                b_eq,
            },
        }
    }
}
