//! Angles and contraction rates measured from iteration traces.
//!
//! Rates are per full cycle and measured on gaps `|z_k − partner_k|`.

use serde::Serialize;
use thiserror::Error;

use crate::alternating::IterationTrace;
use crate::linalg::Vector;
use crate::linconstr::least_squares_line;

/// Segments and gaps at or below this are treated as zero.
pub const DEGENERATE_LENGTH: f64 = 100.0 * f64::EPSILON;
pub const MIN_RATE_POINTS: usize = 6;
/// Relative disagreement allowed between the two rate estimates.
pub const FIT_AGREEMENT: f64 = 0.05;
pub const CONTRACTION_MARGIN: f64 = 1e-6;
/// Excess over `cos α̂` that counts as a bound violation.
pub const VIOLATION_SLACK: f64 = 0.1;
const ORTHOGONAL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagError {
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("angle must lie in (0, π/2], got {0}")]
    InvalidAngle(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleReport {
    /// Angle at `x_k` between `z_k − x_k` and `z_{k+1} − x_k`.
    pub separability: Vec<f64>,
    /// Angle at `z_{k+1}` between `z_k − z_{k+1}` and `x_k − z_{k+1}`.
    pub super_regularity: Vec<f64>,
    pub min_separability: f64,
    pub min_super_regularity: f64,
    /// Triples skipped for a near-zero segment.
    pub skipped: usize,
}

fn angle(a: &Vector, b: &Vector) -> Option<f64> {
    let na = a.norm();
    let nb = b.norm();
    if na <= DEGENERATE_LENGTH || nb <= DEGENERATE_LENGTH {
        return None;
    }
    Some((a.dot(b) / (na * nb)).clamp(-1.0, 1.0).acos())
}

/// Both angle families over the triples `(z_k, x_k, z_{k+1})`.
pub fn angles_from_trace(trace: &IterationTrace) -> Result<AngleReport, DiagError> {
    if trace.records.len() < 2 {
        return Err(DiagError::InsufficientData(
            "need at least two records to form a triple".into(),
        ));
    }
    let mut separability = Vec::new();
    let mut super_regularity = Vec::new();
    let mut skipped = 0;
    for pair in trace.records.windows(2) {
        let (z, x, z1) = (&pair[0].z, &pair[0].partner, &pair[1].z);
        let sep = angle(&(z - x), &(z1 - x));
        let sup = angle(&(z - z1), &(x - z1));
        match (sep, sup) {
            (Some(a), Some(b)) => {
                separability.push(a);
                super_regularity.push(b);
            }
            _ => skipped += 1,
        }
    }
    if separability.is_empty() {
        return Err(DiagError::InsufficientData(format!(
            "all {skipped} triples are degenerate"
        )));
    }
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(AngleReport {
        min_separability: min(&separability),
        min_super_regularity: min(&super_regularity),
        separability,
        super_regularity,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    /// `gap_{k+1} / gap_k` over the usable leading run of gaps.
    pub ratios: Vec<f64>,
    /// Index of the first gap in the trailing window.
    pub window_start: usize,
    /// Geometric-mean ratio over the trailing window.
    pub rate: f64,
    /// `exp` of the least-squares slope of `log gap` against `k` on the window.
    pub regression_rate: f64,
    pub r_squared: f64,
    /// The two estimates agree within [`FIT_AGREEMENT`].
    pub fit_good: bool,
    pub contracting: bool,
    pub predicted: Option<f64>,
}

impl RateReport {
    pub fn with_predicted(mut self, predicted: f64) -> Self {
        self.predicted = Some(predicted);
        self
    }
}

pub fn fit_rate(trace: &IterationTrace) -> Result<RateReport, DiagError> {
    fit_rate_from_gaps(&trace.gaps())
}

/// Uses the leading run of gaps above [`DEGENERATE_LENGTH`] and its trailing
/// half.
pub fn fit_rate_from_gaps(gaps: &[f64]) -> Result<RateReport, DiagError> {
    let usable: Vec<f64> = gaps
        .iter()
        .copied()
        .take_while(|&g| g > DEGENERATE_LENGTH && g.is_finite())
        .collect();
    if usable.len() < MIN_RATE_POINTS {
        return Err(DiagError::InsufficientData(format!(
            "{} gaps above {DEGENERATE_LENGTH:e}, need {MIN_RATE_POINTS}",
            usable.len()
        )));
    }
    let ratios: Vec<f64> = usable.windows(2).map(|w| w[1] / w[0]).collect();
    let window_start = ratios.len() / 2;
    let window = &usable[window_start..];
    let steps = (window.len() - 1) as f64;
    let logs: Vec<f64> = window.iter().map(|g| g.ln()).collect();
    let rate = ((logs[logs.len() - 1] - logs[0]) / steps).exp();

    let ks: Vec<f64> = (0..window.len()).map(|k| k as f64).collect();
    let (slope, intercept) = least_squares_line(&ks, &logs);
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    let ss_tot: f64 = logs.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = ks
        .iter()
        .zip(&logs)
        .map(|(k, y)| (y - (slope * k + intercept)).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    let regression_rate = slope.exp();

    Ok(RateReport {
        ratios,
        window_start,
        rate,
        regression_rate,
        r_squared,
        fit_good: (regression_rate - rate).abs() <= FIT_AGREEMENT * rate,
        contracting: rate < 1.0 - CONTRACTION_MARGIN,
        predicted: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// Measured rate within the slack of `cos α̂`.
    Consistent,
    /// Measured rate exceeds `cos α̂ + VIOLATION_SLACK`.
    BoundViolation,
    /// `cos α̂ ≈ 0`: no positive rate can beat the bound.
    OrthogonalCase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateComparison {
    pub measured: f64,
    /// `cos α̂`.
    pub bound: f64,
    /// `measured / bound`, absent in the orthogonal case.
    pub ratio: Option<f64>,
    pub verdict: Verdict,
}

pub fn compare_predicted(report: &RateReport, alpha_hat: f64) -> Result<RateComparison, DiagError> {
    if !(alpha_hat > 0.0 && alpha_hat <= std::f64::consts::FRAC_PI_2) {
        return Err(DiagError::InvalidAngle(alpha_hat));
    }
    let measured = report.rate;
    let bound = alpha_hat.cos();
    if bound.abs() < ORTHOGONAL_TOL {
        return Ok(RateComparison {
            measured,
            bound,
            ratio: None,
            verdict: Verdict::OrthogonalCase,
        });
    }
    let verdict = if measured > bound + VIOLATION_SLACK {
        Verdict::BoundViolation
    } else {
        Verdict::Consistent
    };
    Ok(RateComparison {
        measured,
        bound,
        ratio: Some(measured / bound),
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alternating::{run_exact, SolveOptions, Status};
    use crate::sets::ProjectableSet;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn v(x: &[f64]) -> Vector {
        Vector::from_slice(x).unwrap()
    }

    fn line(angle: f64) -> ProjectableSet {
        ProjectableSet::affine_subspace(v(&[0.0, 0.0]), vec![v(&[angle.cos(), angle.sin()])])
            .unwrap()
    }

    fn lines_trace() -> IterationTrace {
        run_exact(&line(FRAC_PI_4), &line(0.0), &v(&[1.0, 1.0]), &SolveOptions::default()).unwrap()
    }

    #[test]
    fn line_angles() {
        let report = angles_from_trace(&lines_trace()).unwrap();
        for a in &report.separability {
            assert_abs_diff_eq!(*a, FRAC_PI_4, epsilon = 1e-9);
        }
        assert!(report.min_super_regularity >= FRAC_PI_2 - 1e-9);
    }

    #[test]
    fn single_record_is_insufficient() {
        let axis = line(0.0);
        let t = run_exact(&axis, &axis, &v(&[1.0, 0.0]), &SolveOptions::default()).unwrap();
        assert!(matches!(angles_from_trace(&t), Err(DiagError::InsufficientData(_))));
    }

    #[test]
    fn geometric_gaps() {
        let gaps: Vec<f64> = (0..20).map(|k| 2f64.powi(-k)).collect();
        let r = fit_rate_from_gaps(&gaps).unwrap();
        assert_abs_diff_eq!(r.rate, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.r_squared, 1.0, epsilon = 1e-12);
        assert!(r.fit_good && r.contracting);
    }

    #[test]
    fn line_trace_rate() {
        let r = fit_rate(&lines_trace()).unwrap();
        assert_abs_diff_eq!(r.rate, 0.5, epsilon = 0.02);
    }

    #[test]
    fn stagnant_gaps() {
        let q = ProjectableSet::hyperplane(v(&[0.0, 1.0]), 1.0).unwrap();
        let m = ProjectableSet::hyperplane(v(&[0.0, 1.0]), 0.0).unwrap();
        let opts = SolveOptions {
            max_iters: 30,
            ..SolveOptions::default()
        };
        let t = run_exact(&q, &m, &v(&[0.0, 1.0]), &opts).unwrap();
        assert_eq!(t.status, Status::MaxIters);
        let r = fit_rate(&t).unwrap();
        assert_abs_diff_eq!(r.rate, 1.0, epsilon = 1e-12);
        assert!(!r.contracting);
        assert_eq!(r.r_squared, 1.0);
    }

    #[test]
    fn too_few_gaps() {
        assert!(matches!(
            fit_rate_from_gaps(&[1.0, 0.5, 0.25, 0.0, 0.0, 0.0, 0.0]),
            Err(DiagError::InsufficientData(_))
        ));
    }

    #[test]
    fn comparisons() {
        let report = fit_rate_from_gaps(&(0..20).map(|k| 2f64.powi(-k)).collect::<Vec<_>>()).unwrap();
        let c = compare_predicted(&report, FRAC_PI_4).unwrap();
        assert_abs_diff_eq!(c.ratio.unwrap(), 0.5 / FRAC_PI_4.cos(), epsilon = 1e-12);
        assert_eq!(c.verdict, Verdict::Consistent);
        assert_eq!(compare_predicted(&report, FRAC_PI_2).unwrap().verdict, Verdict::OrthogonalCase);
        assert_eq!(compare_predicted(&report, 1.4).unwrap().verdict, Verdict::BoundViolation);
        assert!(compare_predicted(&report, 0.0).is_err());
        assert!(compare_predicted(&report, 2.0).is_err());
    }
}
