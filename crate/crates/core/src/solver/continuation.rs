//! Continuation in the exponent `p` toward the critical value 3.

use serde::{Deserialize, Serialize};

use crate::asymptotics::log_spaced;
use crate::error::{Error, Result};
use crate::geometry::{GeometryKind, RadialGeometry};
use crate::solver::kfamily::KFamily;
use crate::solver::shooting::{
    multi_start_count, nearest, try_slope, Problem, RadialSolution, SolutionSummary, SolverOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ContinuationOptions {
    /// Growth of `max_u` (last over first) that counts as blow-up evidence.
    pub growth_threshold: f64,
    /// Largest last-over-first ratio still called bounded.
    pub bounded_ratio: f64,
    /// Initial half-width (as a factor) of the local slope window.
    pub window: f64,
    pub window_points: usize,
    pub max_expansions: usize,
    /// `argmax` below this value of the radial coordinate sits at the orbifold point.
    pub orbifold_side: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            growth_threshold: 10.0,
            bounded_ratio: 10.0,
            window: 2.0,
            window_points: 40,
            max_expansions: 4,
            orbifold_side: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContinuationClass {
    /// Solved up to `p = 3` with bounded growth.
    Compact,
    BlowUpEvidence,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationStep {
    pub p: f64,
    pub solution: Option<SolutionSummary>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationReport {
    pub steps: Vec<ContinuationStep>,
    /// `(p, max_u)` for every solved step.
    pub max_u_trace: Vec<(f64, f64)>,
    pub growth_ratio: f64,
    pub monotone: bool,
    pub argmax_at_orbifold_point: bool,
    pub classification: ContinuationClass,
}

#[derive(Debug, Clone)]
pub struct Continuation {
    pub report: ContinuationReport,
    pub solutions: Vec<Option<RadialSolution>>,
}

/// Solves along `p_grid`, warm-starting every step from the previous slope.
pub fn continuation_in_p(
    geom: &RadialGeometry,
    k: &KFamily,
    p_grid: &[f64],
    opts: &SolverOptions,
    copts: &ContinuationOptions,
) -> Result<Continuation> {
    if p_grid.is_empty() {
        return Err(Error::InvalidInput("empty exponent grid".into()));
    }
    if p_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("exponent grid must be increasing".into()));
    }
    if let Some(p) = p_grid.iter().find(|p| !(**p > 1.0 && **p <= 3.0)) {
        return Err(Error::InvalidInput(format!("exponent {p} is outside (1, 3]")));
    }

    let mut steps = Vec::with_capacity(p_grid.len());
    let mut solutions = Vec::with_capacity(p_grid.len());
    let mut previous: Option<f64> = None;
    for &p in p_grid {
        let problem = Problem::new(geom, k, p)?;
        let found = match previous {
            Some(a) => warm_solve(&problem, a, opts, copts),
            None => cold_solve(&problem, opts),
        };
        match found {
            Ok(Some(sol)) => {
                previous = Some(sol.shooting_parameter);
                steps.push(ContinuationStep {
                    p,
                    solution: Some(sol.summary()),
                    error: None,
                });
                solutions.push(Some(sol));
            }
            Ok(None) => {
                steps.push(ContinuationStep {
                    p,
                    solution: None,
                    error: Some("no solution found near the continued branch".into()),
                });
                solutions.push(None);
            }
            Err(e) => {
                steps.push(ContinuationStep {
                    p,
                    solution: None,
                    error: Some(e.to_string()),
                });
                solutions.push(None);
            }
        }
    }

    let max_u_trace: Vec<(f64, f64)> = steps
        .iter()
        .filter_map(|s| s.solution.as_ref().map(|sol| (s.p, sol.max_u)))
        .collect();
    let growth_ratio = match (max_u_trace.first(), max_u_trace.last()) {
        (Some(a), Some(b)) => b.1 / a.1,
        _ => f64::NAN,
    };
    let monotone = max_u_trace.windows(2).all(|w| w[1].1 >= w[0].1);
    let at_orbifold = |x: f64| match geom.kind() {
        GeometryKind::Football => x < copts.orbifold_side || std::f64::consts::PI - x < copts.orbifold_side,
        _ => x < copts.orbifold_side,
    };
    let argmax_at_orbifold_point = steps
        .iter()
        .rev()
        .find_map(|s| s.solution.as_ref())
        .is_some_and(|s| at_orbifold(s.argmax));
    // bounded only counts when the branch actually reaches the critical exponent
    let reaches_critical = steps.last().is_some_and(|s| s.p == 3.0 && s.solution.is_some());
    let classification = if max_u_trace.is_empty() {
        ContinuationClass::Inconclusive
    } else if monotone && growth_ratio > copts.growth_threshold && argmax_at_orbifold_point {
        ContinuationClass::BlowUpEvidence
    } else if reaches_critical && growth_ratio <= copts.bounded_ratio {
        ContinuationClass::Compact
    } else {
        ContinuationClass::Inconclusive
    };
    Ok(Continuation {
        report: ContinuationReport {
            steps,
            max_u_trace,
            growth_ratio,
            monotone,
            argmax_at_orbifold_point,
            classification,
        },
        solutions,
    })
}

fn cold_solve(problem: &Problem, opts: &SolverOptions) -> Result<Option<RadialSolution>> {
    let guess = problem.guess_slope();
    if let Some(sol) = try_slope(problem, guess, opts)? {
        return Ok(Some(sol));
    }
    let count = multi_start_count(problem, &opts.slope_grid(), opts)?;
    Ok(nearest(count.solutions, guess))
}

fn warm_solve(
    problem: &Problem,
    slope: f64,
    opts: &SolverOptions,
    copts: &ContinuationOptions,
) -> Result<Option<RadialSolution>> {
    if let Some(sol) = try_slope(problem, slope, opts)? {
        return Ok(Some(sol));
    }
    let mut width = copts.window;
    for _ in 0..=copts.max_expansions {
        let grid = log_spaced(slope / width, slope * width, copts.window_points);
        let count = multi_start_count(problem, &grid, opts)?;
        if let Some(sol) = nearest(count.solutions, slope) {
            return Ok(Some(sol));
        }
        width *= 4.0;
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn football_constant_branch() {
        let g = RadialGeometry::football(2).unwrap();
        let k = KFamily::constant(2.0).unwrap();
        let c = continuation_in_p(&g, &k, &[2.0, 2.5, 3.0], &SolverOptions::default(), &ContinuationOptions::default())
            .unwrap();
        for s in &c.report.steps {
            let sol = s.solution.as_ref().unwrap();
            assert_relative_eq!(sol.max_u, 1.0, epsilon = 1e-9);
        }
        assert_eq!(c.report.classification, ContinuationClass::Compact);
    }

    #[test]
    fn rejects_bad_grids() {
        let g = RadialGeometry::football(2).unwrap();
        let k = KFamily::constant(2.0).unwrap();
        let o = SolverOptions::default();
        let c = ContinuationOptions::default();
        assert!(continuation_in_p(&g, &k, &[], &o, &c).is_err());
        assert!(continuation_in_p(&g, &k, &[2.5, 2.0], &o, &c).is_err());
        assert!(continuation_in_p(&g, &k, &[2.0, 3.5], &o, &c).is_err());
    }
}
