//! Problem files.
//!
//! ```json
//! {"name": "…", "kind": "two_sets", "problem": {"Q": {…}, "M": {…}},
//!  "start": [1.0, 1.0], "options": {"gap_tol": 1e-10}, "scheme": "exact",
//!  "bench": [{"scheme": "exact", "status": "Converged", "rate": 0.5, "tolerance": 0.02}]}
//! ```
//!
//! `problem` follows the owning module's schema for `constraint_system`; the
//! `inclusion` payload adds optional `U_lower`/`U_upper` chart bounds.

use std::fmt;
use std::path::Path;

use altproj::alternating::{
    self, make_corrupting_projector, IterationTrace, SolveOptions, Status, SyntheticStart,
};
use altproj::inclusion::{self, InclusionProblem, ManifoldChart};
use altproj::linconstr::{self, ConstraintSystem};
use altproj::{PolyMap, ProjectableSet, Vector};
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Exact,
    Inexact,
    Approximate,
    Linconstr,
    Inclusion,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Exact => "exact",
            Scheme::Inexact => "inexact",
            Scheme::Approximate => "approximate",
            Scheme::Linconstr => "linconstr",
            Scheme::Inclusion => "inclusion",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoSets {
    #[serde(rename = "Q")]
    pub q: ProjectableSet,
    #[serde(rename = "M")]
    pub m: ProjectableSet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInclusion", into = "RawInclusion")]
pub struct InclusionSpec {
    pub problem: InclusionProblem,
    pub bounds: Option<(Vector, Vector)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInclusion {
    #[serde(rename = "F")]
    f: PolyMap,
    #[serde(rename = "Q")]
    q: ProjectableSet,
    #[serde(rename = "U_lower", default, skip_serializing_if = "Option::is_none")]
    u_lower: Option<Vector>,
    #[serde(rename = "U_upper", default, skip_serializing_if = "Option::is_none")]
    u_upper: Option<Vector>,
}

impl TryFrom<RawInclusion> for InclusionSpec {
    type Error = String;

    fn try_from(raw: RawInclusion) -> Result<Self, String> {
        let problem = InclusionProblem::new(raw.f, raw.q).map_err(|e| e.to_string())?;
        let bounds = match (raw.u_lower, raw.u_upper) {
            (None, None) => None,
            (Some(lo), Some(hi)) => {
                ManifoldChart::new(problem.f().clone(), lo.clone(), hi.clone())
                    .map_err(|e| e.to_string())?;
                Some((lo, hi))
            }
            _ => return Err("U_lower and U_upper must be given together".into()),
        };
        Ok(InclusionSpec { problem, bounds })
    }
}

impl From<InclusionSpec> for RawInclusion {
    fn from(spec: InclusionSpec) -> Self {
        let (u_lower, u_upper) = match spec.bounds {
            Some((lo, hi)) => (Some(lo), Some(hi)),
            None => (None, None),
        };
        RawInclusion {
            f: spec.problem.f().clone(),
            q: spec.problem.q().clone(),
            u_lower,
            u_upper,
        }
    }
}

impl InclusionSpec {
    pub fn chart(&self) -> ManifoldChart {
        match &self.bounds {
            Some((lo, hi)) => ManifoldChart::new(self.problem.f().clone(), lo.clone(), hi.clone())
                .expect("bounds validated at load"),
            None => self.problem.chart(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "problem", rename_all = "snake_case")]
pub enum Payload {
    TwoSets(TwoSets),
    ConstraintSystem(ConstraintSystem),
    Inclusion(InclusionSpec),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::TwoSets(_) => "two_sets",
            Payload::ConstraintSystem(_) => "constraint_system",
            Payload::Inclusion(_) => "inclusion",
        }
    }

    pub fn default_scheme(&self) -> Scheme {
        match self {
            Payload::TwoSets(_) => Scheme::Exact,
            Payload::ConstraintSystem(_) => Scheme::Linconstr,
            Payload::Inclusion(_) => Scheme::Inclusion,
        }
    }

    pub fn supports(&self, scheme: Scheme) -> bool {
        matches!(
            (self, scheme),
            (Payload::TwoSets(_), Scheme::Exact | Scheme::Inexact | Scheme::Approximate)
                | (Payload::ConstraintSystem(_), Scheme::Linconstr)
                | (Payload::Inclusion(_), Scheme::Inclusion | Scheme::Approximate)
        )
    }

    /// Dimension of the start point.
    pub fn start_dim(&self) -> usize {
        match self {
            Payload::TwoSets(s) => s.q.ambient_dim(),
            Payload::ConstraintSystem(s) => s.ambient_dim(),
            Payload::Inclusion(s) => s.problem.f().input_dim(),
        }
    }

    /// Dimension of the recorded iterates.
    pub fn iterate_dim(&self) -> usize {
        match self {
            Payload::TwoSets(s) => s.q.ambient_dim(),
            Payload::ConstraintSystem(s) => s.ambient_dim(),
            Payload::Inclusion(s) => s.problem.f().output_dim(),
        }
    }
}

/// Expected outcome of one bench run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchCase {
    pub scheme: Scheme,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub payload: Payload,
    pub start: Vector,
    #[serde(default)]
    pub options: SolveOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bench: Vec<BenchCase>,
}

impl ProblemFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: ProblemFile = serde_json::from_str(text)?;
        file.validate()?;
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read problem file {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid problem file {}", path.display()))
    }

    fn validate(&self) -> Result<()> {
        if let Payload::TwoSets(s) = &self.payload {
            if s.q.ambient_dim() != s.m.ambient_dim() {
                bail!(
                    "field \"M\": dimension {} does not match \"Q\" dimension {}",
                    s.m.ambient_dim(),
                    s.q.ambient_dim()
                );
            }
        }
        if self.start.len() != self.payload.start_dim() {
            bail!(
                "field \"start\": expected {} coordinates, found {}",
                self.payload.start_dim(),
                self.start.len()
            );
        }
        self.options
            .validate()
            .context("field \"options\"")?;
        if let Some(scheme) = self.scheme {
            self.check_scheme(scheme).context("field \"scheme\"")?;
        }
        for case in &self.bench {
            self.check_scheme(case.scheme).context("field \"bench\"")?;
        }
        Ok(())
    }

    pub fn check_scheme(&self, scheme: Scheme) -> Result<()> {
        if !self.payload.supports(scheme) {
            bail!(
                "scheme {scheme} is not available for kind {}",
                self.payload.kind()
            );
        }
        Ok(())
    }

    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or("problem")
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme.unwrap_or_else(|| self.payload.default_scheme())
    }

    /// Runs `scheme` from the file's start point.
    pub fn run(&self, scheme: Scheme, opts: &SolveOptions, seed: u64) -> Result<IterationTrace> {
        self.check_scheme(scheme)?;
        let trace = match (&self.payload, scheme) {
            (Payload::TwoSets(s), Scheme::Exact) => {
                alternating::run_exact(&s.q, &s.m, &self.start, opts)?
            }
            (Payload::TwoSets(s), Scheme::Inexact) => {
                let projector = make_corrupting_projector(s.m.clone(), opts.epsilon, seed)?;
                alternating::run_inexact(&s.q, &projector, &self.start, opts)?
            }
            (Payload::TwoSets(s), Scheme::Approximate) => {
                let z0 = s.m.project(&self.start)?;
                let mut trace = alternating::run_approximate(&s.m, &s.q, &z0, opts)?;
                if z0 != self.start {
                    trace.start = Some(SyntheticStart {
                        raw: self.start.clone(),
                        projected: z0,
                    });
                }
                trace
            }
            (Payload::ConstraintSystem(sys), Scheme::Linconstr) => {
                linconstr::solve_constraint_system(sys, &self.start, opts)?
            }
            (Payload::Inclusion(spec), Scheme::Inclusion | Scheme::Approximate) => {
                inclusion::solve_on_chart(&spec.chart(), spec.problem.q(), &self.start, opts)?
            }
            _ => unreachable!("scheme compatibility checked above"),
        };
        Ok(trace)
    }

    /// The partner point a run of `scheme` pairs with iterate `z`.
    pub fn partner(&self, scheme: Scheme, z: &Vector) -> Result<Vector> {
        Ok(match (&self.payload, scheme) {
            (Payload::TwoSets(s), Scheme::Exact | Scheme::Inexact) => s.m.project(z)?,
            (Payload::TwoSets(s), _) => s.q.project(z)?,
            (Payload::ConstraintSystem(sys), _) => linconstr::linearized_projection(sys, z)?.0,
            (Payload::Inclusion(spec), _) => spec.problem.q().project(z)?,
        })
    }

    /// One-cycle contraction predicted from the intersection angle, if the
    /// bench data carries one.
    pub fn expected_rate(&self, scheme: Scheme) -> Option<f64> {
        self.bench
            .iter()
            .find(|c| c.scheme == scheme && c.eps.is_none())
            .and_then(|c| c.rate)
    }
}

/// Problems shipped with the binary.
pub const BUNDLED: &[(&str, &str)] = &[
    ("two_lines_45deg", include_str!("../problems/two_lines_45deg.json")),
    ("two_lines_60deg", include_str!("../problems/two_lines_60deg.json")),
    ("circle_line", include_str!("../problems/circle_line.json")),
    ("parallel_lines", include_str!("../problems/parallel_lines.json")),
    ("circle_constraint_line", include_str!("../problems/circle_constraint_line.json")),
    ("parabola_level", include_str!("../problems/parabola_level.json")),
    ("rank_one_completion", include_str!("../problems/rank_one_completion.json")),
];

pub fn bundled() -> Result<Vec<ProblemFile>> {
    BUNDLED
        .iter()
        .map(|(name, text)| ProblemFile::parse(text).with_context(|| format!("bundled problem {name}")))
        .collect()
}
