//! Shooting from the orbifold point (or the north pole of the football) for
//! the radial equation `Δu - (R/6) u + K u^p = 0`.
//!
//! On the LeBrun metrics the unknown is `v(t) = u / (n + s^-2)`, which turns
//! the equation into `v'' = -K w_n (n + s^-2)^{p-3} |v|^{p-1} v` with
//! `w_n = e^{-t}(1 + (n-1)e^{-t}) / (4(1 - e^{-t})³)` and `v(0) = 0`,
//! `v'(0) = u(q)/n`.

use num_dual::{Dual2_64, DualNum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Coordinate, GeometryKind, RadialGeometry};
use crate::jet::jet;
use crate::ode::{integrate, OdeOptions, Outcome, Trajectory};
use crate::solver::kfamily::KFamily;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub rtol: f64,
    /// Far end in `t` standing in for the regular center.
    pub far_end_t: f64,
    /// The football is integrated up to `π - football_gap`.
    pub football_gap: f64,
    pub slope_min: f64,
    pub slope_max: f64,
    pub slope_count: usize,
    pub bisection_steps: usize,
    /// Accepted residual is `residual_factor · (1 + max_u^p)`.
    pub residual_factor: f64,
    /// Relative size of the terminal objective below which a shot counts as regular.
    pub regular_tolerance: f64,
    /// Max-norm distance under which two solutions are identified.
    pub dedup_tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            far_end_t: 25.0,
            football_gap: 1e-3,
            slope_min: 1e-3,
            slope_max: 1e2,
            slope_count: 200,
            bisection_steps: 80,
            residual_factor: 1e-8,
            regular_tolerance: 1e-9,
            dedup_tolerance: 1e-6,
        }
    }
}

impl SolverOptions {
    pub fn slope_grid(&self) -> Vec<f64> {
        crate::asymptotics::log_spaced(self.slope_min, self.slope_max, self.slope_count)
    }
}

/// A radial prescribed-curvature problem in its integration coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    geom: RadialGeometry,
    k: KFamily,
    p: f64,
}

impl Problem {
    pub fn new(geom: &RadialGeometry, k: &KFamily, p: f64) -> Result<Self> {
        if !(p > 1.0 && p <= 3.0) {
            return Err(Error::InvalidInput(format!("exponent p = {p} is outside (1, 3]")));
        }
        if geom.kind() == GeometryKind::LebrunAle && p != 3.0 {
            return Err(Error::InvalidInput(
                "the scalar-flat ALE form is only conformal to the compact problem at p = 3".into(),
            ));
        }
        k.validate()?;
        let coordinate = match geom.kind() {
            GeometryKind::Football => Coordinate::Theta,
            _ => Coordinate::T,
        };
        Ok(Self {
            geom: geom.with_coordinate(coordinate)?,
            k: k.clone(),
            p,
        })
    }

    pub fn geometry(&self) -> &RadialGeometry {
        &self.geom
    }

    pub fn k(&self) -> &KFamily {
        &self.k
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    fn n(&self) -> f64 {
        self.geom.order() as f64
    }

    fn is_football(&self) -> bool {
        self.geom.kind() == GeometryKind::Football
    }

    /// Value of `u` at the starting point implied by the shooting parameter.
    pub fn u_at_start(&self, slope: f64) -> f64 {
        if self.is_football() {
            slope
        } else {
            self.n() * slope
        }
    }

    /// Shooting parameter of the constant-curvature guess `u = (R/6 K)^{1/(p-1)}`
    /// at the starting point.
    pub fn guess_slope(&self) -> f64 {
        let k0 = self.k.at_origin();
        if self.is_football() {
            (2.0 / k0).powf(1.0 / (self.p - 1.0))
        } else {
            let n = self.n();
            (4.0 * n / k0).powf(1.0 / (self.p - 1.0)) / n
        }
    }

    fn second_derivative(&self, x: f64, v: f64, dv: f64) -> f64 {
        let n = self.n();
        let vp = signed_pow(v, self.p);
        if self.is_football() {
            let k = self.k.value(x);
            -3.0 * dv / x.tan() + 2.0 * v - k * vp
        } else {
            let kbar = self.k.value_s2(x.exp_m1() / n);
            -kbar * self.weight(x) * vp
        }
    }

    /// `w_n(t) (n + s^-2)^{p-3}`; the second factor is absent on the ALE form.
    fn weight(&self, t: f64) -> f64 {
        let n = self.n();
        let e = (-t).exp();
        let om = -(-t).exp_m1();
        let w = e * (1.0 + (n - 1.0) * e) / (4.0 * om * om * om);
        if self.geom.kind() == GeometryKind::LebrunCompact && self.p != 3.0 {
            w * (n / om).powf(self.p - 3.0)
        } else {
            w
        }
    }

    /// Series start `(x0, [v, v'])`.
    fn start(&self, slope: f64) -> (f64, [f64; 2], f64) {
        let k0 = self.k.at_origin();
        if self.is_football() {
            let c = (2.0 * slope - k0 * signed_pow(slope, self.p)) / 4.0;
            let x0 = 1e-5;
            (x0, [slope + 0.5 * c * x0 * x0, c * x0], c)
        } else {
            let n = self.n();
            let c = -k0 * n.powf(self.p - 2.0) * slope.powf(self.p) / 4.0;
            let scale = 4.0 / (k0 * n.powf(self.p - 2.0) * slope.powf(self.p - 1.0));
            let x0 = 1e-6 * scale.min(1.0);
            (x0, [slope * x0 + 0.5 * c * x0 * x0, slope + c * x0], c)
        }
    }

    fn end(&self, opts: &SolverOptions) -> f64 {
        if self.is_football() {
            std::f64::consts::PI - opts.football_gap
        } else {
            opts.far_end_t
        }
    }

    /// `u` and `du/dx` from the integrated state.
    pub fn u_from_state(&self, x: f64, v: f64, dv: f64) -> (f64, f64) {
        if self.is_football() {
            return (v, dv);
        }
        if self.geom.kind() == GeometryKind::LebrunAle {
            return (v, dv);
        }
        let n = self.n();
        let om = -(-x).exp_m1();
        let phi = n / om;
        let dphi = -n * (-x).exp() / (om * om);
        (phi * v, dphi * v + phi * dv)
    }

    /// Residual of the unreduced equation at `x`, using the geometry's generic
    /// Laplacian, closed-form curvature, and `v''` from the reduced equation.
    pub fn residual(&self, x: f64, v: f64, dv: f64) -> Result<f64> {
        let vpp = self.second_derivative(x, v, dv);
        let (g_inv, drift) = self.geom.laplacian_coefficients(x)?;
        let r = self.geom.scalar_curvature(x)?;
        let k = self.k.value_on(&self.geom, x);
        let (u, du, ddu) = match self.geom.kind() {
            GeometryKind::LebrunCompact => {
                let n = self.n();
                let phi = jet(|t: Dual2_64| (-(-t).exp_m1()).recip() * n, x);
                (
                    phi.value * v,
                    phi.d1 * v + phi.value * dv,
                    phi.d2 * v + 2.0 * phi.d1 * dv + phi.value * vpp,
                )
            }
            _ => (v, dv, vpp),
        };
        Ok(g_inv * ddu + drift * du - r / 6.0 * u + k * signed_pow(u, self.p))
    }
}

/// Magnitude against which the far-end objective is judged.  On the LeBrun
/// metrics a concentrating shot leaves a small terminal slope together with a
/// small terminal value, so the value sets the scale.
fn objective_scale(problem: &Problem, slope: f64, terminal_value: f64) -> f64 {
    if problem.is_football() {
        slope.max(terminal_value.abs())
    } else {
        terminal_value.abs()
    }
}

fn signed_pow(v: f64, p: f64) -> f64 {
    if p == 3.0 {
        v * v * v
    } else {
        v.abs().powf(p - 1.0) * v
    }
}

/// Right-hand side `v''` of the radial ODE.
///
/// For the LeBrun metrics `x` is `t` and `v` the reduced unknown; for the
/// football `x` is the polar angle and `v = u`.
pub fn ode_rhs(geom: &RadialGeometry, k: &KFamily, p: f64, x: f64, v: f64, dv: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::InvalidInput(format!("exponent p = {p} must exceed 1")));
    }
    let coordinate = match geom.kind() {
        GeometryKind::Football => Coordinate::Theta,
        _ => Coordinate::T,
    };
    let g = geom.with_coordinate(coordinate)?;
    g.check_interior(x)?;
    let prob = Problem {
        geom: g,
        k: k.clone(),
        p,
    };
    Ok(prob.second_derivative(x, v, dv))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotKind {
    /// `u` reaches zero before the far end.
    ZeroCrossing,
    /// `u` grows without bound at the far end (or the integration overflowed).
    Divergent,
    /// The far-end condition holds to the regular tolerance.
    NearRegular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shot {
    pub slope: f64,
    pub terminal_x: f64,
    pub terminal_value: f64,
    pub terminal_derivative: f64,
    pub crossing: Option<f64>,
    pub diverged: bool,
    /// Far-end objective; a regular solution has `objective = 0`.
    pub objective: f64,
    pub kind: ShotKind,
}

/// A shot together with its trajectory.
#[derive(Debug, Clone)]
pub struct ShotTrajectory {
    pub shot: Shot,
    pub trajectory: Trajectory<2>,
    /// Second derivative used in the series start.
    pub series_curvature: f64,
}

/// Integrates one shot with shooting parameter `slope`.
pub fn shoot(problem: &Problem, slope: f64, opts: &SolverOptions) -> Result<ShotTrajectory> {
    if !(slope > 0.0 && slope.is_finite()) {
        return Err(Error::InvalidInput(format!("slope must be positive, got {slope}")));
    }
    let (x0, y0, c) = problem.start(slope);
    let x_end = problem.end(opts);
    let ode = OdeOptions {
        rtol: opts.rtol,
        atol: 1e-14 * slope.max(1e-300),
        h_init: Some(x0),
        h_max: 0.25,
        blowup: 1e150,
        ..OdeOptions::default()
    };
    let rhs = |x: f64, y: &[f64; 2]| [y[1], problem.second_derivative(x, y[0], y[1])];
    let traj = integrate(rhs, x0, y0, x_end, &ode, Some(|y: &[f64; 2]| y[0]))?;
    let (xt, yt) = traj.last();
    let (crossing, diverged) = match traj.outcome {
        Outcome::Completed => (None, false),
        Outcome::Event { t } => (Some(t), false),
        Outcome::Diverged { .. } => (None, true),
    };
    let objective = if diverged {
        f64::INFINITY
    } else if problem.is_football() && crossing.is_none() {
        let gap = std::f64::consts::PI - xt;
        let k = problem.k.value(xt);
        yt[1] + gap * (2.0 * yt[0] - k * signed_pow(yt[0], problem.p)) / 4.0
    } else {
        yt[1]
    };
    let scale = objective_scale(problem, slope, yt[0]);
    let kind = if crossing.is_some() {
        ShotKind::ZeroCrossing
    } else if diverged || objective > opts.regular_tolerance * scale {
        ShotKind::Divergent
    } else if objective.abs() <= opts.regular_tolerance * scale {
        ShotKind::NearRegular
    } else {
        // decreasing at the truncation point: the zero lies beyond it
        ShotKind::ZeroCrossing
    };
    Ok(ShotTrajectory {
        shot: Shot {
            slope,
            terminal_x: xt,
            terminal_value: yt[0],
            terminal_derivative: yt[1],
            crossing,
            diverged,
            objective,
            kind,
        },
        trajectory: traj,
        series_curvature: c,
    })
}

/// A positive radial solution validated against the unreduced equation.
#[derive(Debug, Clone)]
pub struct RadialSolution {
    pub geometry: RadialGeometry,
    pub k: KFamily,
    pub p: f64,
    /// Integration nodes (`t` on LeBrun metrics, `θ` on the football).
    pub grid: Vec<f64>,
    pub u_values: Vec<f64>,
    pub u_derivs: Vec<f64>,
    /// Reduced unknown `v` (equal to `u` on the football).
    pub v_values: Vec<f64>,
    pub v_derivs: Vec<f64>,
    /// Residual of the unreduced equation at each node (`NaN` inside the seam region).
    pub residuals: Vec<f64>,
    pub max_u: f64,
    pub argmax: f64,
    pub min_u: f64,
    /// Sup of the residual on the node grid refined by midpoints.
    pub residual_sup: f64,
    pub residual_tolerance: f64,
    pub shooting_parameter: f64,
    pub terminal_objective: f64,
    /// Relative mismatch between the series start and the integrator at the seam.
    pub seam_jump: f64,
    trajectory: Trajectory<2>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SolutionSummary {
    pub p: f64,
    pub slope: f64,
    pub u_at_start: f64,
    pub max_u: f64,
    pub argmax: f64,
    pub min_u: f64,
    pub residual_sup: f64,
    pub residual_tolerance: f64,
    pub terminal_objective: f64,
    pub seam_jump: f64,
}

impl RadialSolution {
    pub fn accepted(&self) -> bool {
        self.residual_sup <= self.residual_tolerance && self.min_u > 0.0
    }

    pub fn summary(&self) -> SolutionSummary {
        SolutionSummary {
            p: self.p,
            slope: self.shooting_parameter,
            u_at_start: self.u_values[0],
            max_u: self.max_u,
            argmax: self.argmax,
            min_u: self.min_u,
            residual_sup: self.residual_sup,
            residual_tolerance: self.residual_tolerance,
            terminal_objective: self.terminal_objective,
            seam_jump: self.seam_jump,
        }
    }

    /// Reduced unknown and its derivative at `x`, interpolated.
    pub fn state_at(&self, x: f64) -> [f64; 2] {
        self.trajectory.interpolate(x)
    }

    /// `u` at `x`, interpolated.
    pub fn u_at(&self, x: f64) -> f64 {
        let problem = self.problem();
        let y = self.trajectory.interpolate(x);
        problem.u_from_state(x, y[0], y[1]).0
    }

    pub fn problem(&self) -> Problem {
        Problem {
            geom: self.geometry,
            k: self.k.clone(),
            p: self.p,
        }
    }

    /// Start and end of the integrated range.
    pub fn range(&self) -> (f64, f64) {
        (self.grid[0], *self.grid.last().unwrap())
    }

    /// Max-norm distance between the `u` profiles on a common set of points.
    pub fn distance(&self, other: &RadialSolution) -> f64 {
        let (a0, a1) = self.range();
        let (b0, b1) = other.range();
        let (lo, hi) = (a0.max(b0), a1.min(b1));
        (0..=64)
            .map(|k| lo + (hi - lo) * k as f64 / 64.0)
            .map(|x| (self.u_at(x) - other.u_at(x)).abs())
            .fold((self.u_values[0] - other.u_values[0]).abs(), f64::max)
    }
}

/// Builds and validates the solution carried by a shot.
pub fn solution_from_shot(problem: &Problem, st: ShotTrajectory, opts: &SolverOptions) -> Result<RadialSolution> {
    let traj = st.trajectory;
    let p = problem.p;
    let mut u_values = Vec::with_capacity(traj.ts.len());
    let mut u_derivs = Vec::with_capacity(traj.ts.len());
    for (x, y) in traj.ts.iter().zip(&traj.ys) {
        let (u, du) = problem.u_from_state(*x, y[0], y[1]);
        u_values.push(u);
        u_derivs.push(du);
    }
    let (mut max_u, mut argmax) = (f64::NEG_INFINITY, 0.0);
    for (x, u) in traj.ts.iter().zip(&u_values) {
        if *u > max_u {
            max_u = *u;
            argmax = *x;
        }
    }
    let min_u = u_values.iter().copied().fold(f64::INFINITY, f64::min);

    // residual grid: nodes past the seam region plus midpoints
    let x_first = traj.ts[0];
    let x_lo = if problem.is_football() {
        1e-3
    } else {
        1e-3 * (1.0f64).min(traj.ts[0] * 1e6)
    };
    let mut residuals = vec![f64::NAN; traj.ts.len()];
    let mut residual_sup: f64 = 0.0;
    for k in 0..traj.ts.len() {
        let x = traj.ts[k];
        if x >= x_lo {
            let y = traj.ys[k];
            let r = problem.residual(x, y[0], y[1])?;
            residuals[k] = r;
            residual_sup = residual_sup.max(r.abs());
        }
        if k + 1 < traj.ts.len() {
            let xm = 0.5 * (x + traj.ts[k + 1]);
            if xm >= x_lo && xm > x_first {
                let y = traj.interpolate(xm);
                let r = problem.residual(xm, y[0], y[1])?;
                residual_sup = residual_sup.max(r.abs());
            }
        }
    }
    if residual_sup.is_nan() {
        residual_sup = f64::INFINITY;
    }

    // seam: compare the series continuation with the integrator at a nearby node
    let seam_jump = {
        let k = traj.ts.len().min(2) - 1;
        let x = traj.ts[k];
        let a = st.shot.slope;
        let c = st.series_curvature;
        let series = if problem.is_football() {
            a + 0.5 * c * x * x
        } else {
            a * x + 0.5 * c * x * x
        };
        let series_d = if problem.is_football() { c * x } else { a + c * x };
        let (us, _) = problem.u_from_state(x, series, series_d);
        let (ui, _) = problem.u_from_state(x, traj.ys[k][0], traj.ys[k][1]);
        (us - ui).abs() / ui.abs().max(1e-300)
    };

    Ok(RadialSolution {
        geometry: problem.geom,
        k: problem.k.clone(),
        p,
        grid: traj.ts.clone(),
        u_values,
        u_derivs,
        v_values: traj.ys.iter().map(|y| y[0]).collect(),
        v_derivs: traj.ys.iter().map(|y| y[1]).collect(),
        residuals,
        max_u,
        argmax,
        min_u,
        residual_sup,
        residual_tolerance: opts.residual_factor * (1.0 + max_u.powf(p)),
        shooting_parameter: st.shot.slope,
        terminal_objective: st.shot.objective,
        seam_jump,
        trajectory: traj,
    })
}

/// Terminal diagnostics of every shot in a slope scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEvidence {
    pub shots: Vec<Shot>,
    /// Indices `i` with a sign change of the objective between shots `i` and `i + 1`.
    pub brackets: Vec<usize>,
    /// Shots whose integration failed, with the error message.
    pub failures: Vec<(f64, String)>,
}

impl ScanEvidence {
    pub fn count(&self, kind: ShotKind) -> usize {
        self.shots.iter().filter(|s| s.kind == kind).count()
    }
}

/// Shoots every slope of `slopes` in parallel; results keep the input order.
pub fn scan(problem: &Problem, slopes: &[f64], opts: &SolverOptions) -> ScanEvidence {
    let results: Vec<std::result::Result<Shot, (f64, String)>> = slopes
        .par_iter()
        .map(|&a| shoot(problem, a, opts).map(|st| st.shot).map_err(|e| (a, e.to_string())))
        .collect();
    let mut shots = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(s) => shots.push(s),
            Err(f) => failures.push(f),
        }
    }
    let brackets = (0..shots.len().saturating_sub(1))
        .filter(|&i| sign_change(shots[i].objective, shots[i + 1].objective))
        .collect();
    ScanEvidence {
        shots,
        brackets,
        failures,
    }
}

fn sign_change(a: f64, b: f64) -> bool {
    !a.is_nan() && !b.is_nan() && ((a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0))
}

/// Bisection on the objective inside `[lo, hi]`, followed by a secant polish.
pub fn refine_bracket(problem: &Problem, lo: f64, hi: f64, opts: &SolverOptions) -> Result<ShotTrajectory> {
    let mut a = shoot(problem, lo, opts)?;
    let mut b = shoot(problem, hi, opts)?;
    if !sign_change(a.shot.objective, b.shot.objective) {
        return Err(Error::Shooting(format!("[{lo}, {hi}] does not bracket a sign change")));
    }
    for _ in 0..opts.bisection_steps {
        let mid = 0.5 * (a.shot.slope + b.shot.slope);
        if mid <= a.shot.slope || mid >= b.shot.slope {
            break;
        }
        let m = shoot(problem, mid, opts)?;
        if m.shot.objective == 0.0 {
            return Ok(m);
        }
        if sign_change(a.shot.objective, m.shot.objective) {
            b = m;
        } else {
            a = m;
        }
    }
    let best = if a.shot.objective.abs() <= b.shot.objective.abs() {
        a.clone()
    } else {
        b.clone()
    };
    // secant polish between the final bracket ends
    let (fa, fb) = (a.shot.objective, b.shot.objective);
    if fa.is_finite() && fb.is_finite() && fa != fb {
        let x = a.shot.slope - fa * (b.shot.slope - a.shot.slope) / (fb - fa);
        if x > a.shot.slope.min(b.shot.slope) && x < a.shot.slope.max(b.shot.slope) {
            let s = shoot(problem, x, opts)?;
            if s.shot.objective.abs() < best.shot.objective.abs() {
                return Ok(s);
            }
        }
    }
    Ok(best)
}

/// Outcome of a boundary-value solve.
#[derive(Debug, Clone)]
pub enum SolveOutcome {
    Found(Box<RadialSolution>),
    NotFound(ScanEvidence),
}

impl SolveOutcome {
    pub fn solution(&self) -> Option<&RadialSolution> {
        match self {
            SolveOutcome::Found(s) => Some(s),
            SolveOutcome::NotFound(_) => None,
        }
    }
}

/// Solves the boundary-value problem; the solution nearest the constant-curvature
/// guess is returned when several exist.
pub fn solve_bvp(geom: &RadialGeometry, k: &KFamily, p: f64, opts: &SolverOptions) -> Result<SolveOutcome> {
    let problem = Problem::new(geom, k, p)?;
    let guess = problem.guess_slope();
    if let Some(sol) = try_slope(&problem, guess, opts)? {
        return Ok(SolveOutcome::Found(Box::new(sol)));
    }
    let count = multi_start_count(&problem, &opts.slope_grid(), opts)?;
    match nearest(count.solutions, guess) {
        Some(sol) => Ok(SolveOutcome::Found(Box::new(sol))),
        None => Ok(SolveOutcome::NotFound(count.evidence)),
    }
}

/// Accepted solution whose shot at exactly `slope` is already regular, if any.
pub fn try_slope(problem: &Problem, slope: f64, opts: &SolverOptions) -> Result<Option<RadialSolution>> {
    if !(slope.is_finite() && slope > 0.0) {
        return Ok(None);
    }
    let st = shoot(problem, slope, opts)?;
    if st.shot.kind != ShotKind::NearRegular {
        return Ok(None);
    }
    let sol = solution_from_shot(problem, st, opts)?;
    Ok(sol.accepted().then_some(sol))
}

pub(crate) fn nearest(solutions: Vec<RadialSolution>, slope: f64) -> Option<RadialSolution> {
    solutions.into_iter().min_by(|a, b| {
        let da = (a.shooting_parameter.ln() - slope.ln()).abs();
        let db = (b.shooting_parameter.ln() - slope.ln()).abs();
        da.partial_cmp(&db).unwrap()
    })
}

#[derive(Debug, Clone)]
pub struct CountResult {
    pub count: usize,
    pub solutions: Vec<RadialSolution>,
    pub evidence: ScanEvidence,
    /// Brackets whose refined shot failed validation.
    pub rejected: usize,
}

/// Counts distinct validated solutions over a slope scan.
pub fn multi_start_count(problem: &Problem, slopes: &[f64], opts: &SolverOptions) -> Result<CountResult> {
    let evidence = scan(problem, slopes, opts);
    let mut candidates: Vec<(f64, f64)> = evidence
        .brackets
        .iter()
        .map(|&i| (evidence.shots[i].slope, evidence.shots[i + 1].slope))
        .collect();
    for s in &evidence.shots {
        if s.kind == ShotKind::NearRegular {
            candidates.push((s.slope, s.slope));
        }
    }
    let refined: Vec<Result<Option<RadialSolution>>> = candidates
        .par_iter()
        .map(|&(lo, hi)| {
            let st = if lo == hi {
                shoot(problem, lo, opts)?
            } else {
                refine_bracket(problem, lo, hi, opts)?
            };
            let scale = objective_scale(problem, st.shot.slope, st.shot.terminal_value);
            if st.shot.crossing.is_some() || st.shot.objective.abs() > opts.regular_tolerance * scale {
                return Ok(None);
            }
            let sol = solution_from_shot(problem, st, opts)?;
            Ok(sol.accepted().then_some(sol))
        })
        .collect();
    let mut solutions: Vec<RadialSolution> = Vec::new();
    let mut rejected = 0;
    for r in refined {
        match r {
            Ok(Some(sol)) => {
                let tol = opts.dedup_tolerance * sol.max_u.max(1.0);
                if !solutions.iter().any(|s| s.distance(&sol) <= tol) {
                    solutions.push(sol);
                }
            }
            Ok(None) | Err(_) => rejected += 1,
        }
    }
    solutions.sort_by(|a, b| a.shooting_parameter.partial_cmp(&b.shooting_parameter).unwrap());
    Ok(CountResult {
        count: solutions.len(),
        solutions,
        evidence,
        rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rhs_examples() {
        let one = KFamily::constant(1.0).unwrap();
        let t = 2f64.ln();
        let ale2 = RadialGeometry::lebrun_ale(2).unwrap();
        assert_relative_eq!(ode_rhs(&ale2, &one, 3.0, t, 1.0, 0.0).unwrap(), -1.5, max_relative = 1e-14);
        let ale1 = RadialGeometry::lebrun_ale(1).unwrap();
        assert_relative_eq!(ode_rhs(&ale1, &one, 3.0, t, 1.0, 0.0).unwrap(), -1.0, max_relative = 1e-14);
        assert_eq!(ode_rhs(&ale2, &one, 3.0, t, 0.0, 0.3).unwrap(), 0.0);
        assert!(ode_rhs(&ale2, &one, 3.0, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn football_constant_solution() {
        let g = RadialGeometry::football(1).unwrap();
        let k = KFamily::constant(2.0).unwrap();
        let opts = SolverOptions::default();
        let sol = match solve_bvp(&g, &k, 3.0, &opts).unwrap() {
            SolveOutcome::Found(s) => s,
            SolveOutcome::NotFound(_) => panic!("no solution"),
        };
        for u in &sol.u_values {
            assert!((u - 1.0).abs() < 1e-9, "{u}");
        }
        assert!(sol.residual_sup <= 1e-9);
    }

    #[test]
    fn tiny_slope_stays_small() {
        let g = RadialGeometry::lebrun_compact(3).unwrap();
        let k = KFamily::constant(1.0).unwrap();
        let prob = Problem::new(&g, &k, 3.0).unwrap();
        let st = shoot(&prob, 1e-6, &SolverOptions::default()).unwrap();
        assert!(st.shot.terminal_value.abs() < 1e-3, "{:?}", st.shot);
    }

    #[test]
    fn invalid_exponents() {
        let g = RadialGeometry::lebrun_compact(3).unwrap();
        let k = KFamily::constant(1.0).unwrap();
        assert!(Problem::new(&g, &k, 1.0).is_err());
        assert!(Problem::new(&g, &k, 3.5).is_err());
        let ale = RadialGeometry::lebrun_ale(3).unwrap();
        assert!(Problem::new(&ale, &k, 2.5).is_err());
    }
}
