//! Radial Pohozaev balance on a ball `{|x| ≤ r}/Γ` around the orbifold point.
//!
//! The equation is written as `a^{ij}∂_{ij}u + b^i∂_i u + c u + K u^p = 0` in
//! flat coordinates. For radial data `a^{ij} = δ^{ij} + α x_i x_j/|x|²` and
//! `b^i = β x_i/|x|`, so only the functions `α`, `β`, `c`, `K` enter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Coordinate, GeometryKind, RadialGeometry, VOL_S3};
use crate::jet::{jet, Jet};
use crate::quadrature::integrate_to_tolerance;
use crate::solver::{KFamily, RadialSolution};

/// Radial coefficient functions of a second-order equation on a punctured ball.
pub trait RadialEquation: Sync {
    /// `α(r)`: deviation of the radial principal coefficient from 1.
    fn principal_deviation(&self, r: f64) -> f64;
    /// `β(r)`: radial drift on top of the flat `3/r`.
    fn drift_deviation(&self, r: f64) -> f64;
    /// Zeroth-order coefficient `c` with its radial derivatives.
    fn potential(&self, r: f64) -> Jet;
    fn curvature(&self, r: f64) -> Jet;
    fn exponent(&self) -> f64;
}

/// `Δu + c u + K u^p = 0` on the flat cone with constant `c` and `K`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatEquation {
    pub potential: f64,
    pub curvature: f64,
    pub p: f64,
}

impl RadialEquation for FlatEquation {
    fn principal_deviation(&self, _: f64) -> f64 {
        0.0
    }
    fn drift_deviation(&self, _: f64) -> f64 {
        0.0
    }
    fn potential(&self, _: f64) -> Jet {
        Jet::constant(self.potential)
    }
    fn curvature(&self, _: f64) -> Jet {
        Jet::constant(self.curvature)
    }
    fn exponent(&self) -> f64 {
        self.p
    }
}

/// `Δu - (R/6)u + K u^p = 0` for the compactified LeBrun metric in the `s` coordinate.
#[derive(Debug, Clone)]
pub struct LebrunEquation {
    geom: RadialGeometry,
    k: KFamily,
    p: f64,
}

impl LebrunEquation {
    pub fn new(n: u32, k: KFamily, p: f64) -> Result<Self> {
        k.validate()?;
        Ok(Self {
            geom: RadialGeometry::lebrun_compact(n)?.with_coordinate(Coordinate::S)?,
            k,
            p,
        })
    }

    /// `u''` in `s` implied by the equation, given `u` and `u'`.
    pub fn second_derivative(&self, s: f64, u: f64, du: f64) -> f64 {
        let (g_inv, drift) = self.geom.laplacian_coefficients_unchecked(s);
        let c = self.potential(s).value;
        let k = self.k.value_s2(s * s);
        -(drift * du + c * u + k * u.abs().powf(self.p - 1.0) * u) / g_inv
    }
}

impl RadialEquation for LebrunEquation {
    fn principal_deviation(&self, s: f64) -> f64 {
        self.geom.laplacian_coefficients_unchecked(s).0 - 1.0
    }
    fn drift_deviation(&self, s: f64) -> f64 {
        self.geom.laplacian_coefficients_unchecked(s).1 - 3.0 / s
    }
    fn potential(&self, s: f64) -> Jet {
        let n = self.geom.order() as f64;
        // -R/6 with R = 24n(1 + n s²)/(1 + s²)
        jet(|x| -(x * x * n + 1.0) / (x * x + 1.0) * (4.0 * n), s)
    }
    fn curvature(&self, s: f64) -> Jet {
        jet(|x| self.k.value_s2(x * x), s)
    }
    fn exponent(&self) -> f64 {
        self.p
    }
}

/// Quadrature used for the ball integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallQuadrature {
    /// Composite Gauss–Legendre with panel doubling on `[ε, r]`.
    Adaptive { tol: f64 },
    /// Trapezoid rule on `points` uniform nodes of `[0, r]`.
    Trapezoid { points: usize },
}

/// The six right-hand groups of the balance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PohozaevTerms {
    pub coefficient_deviation: f64,
    pub potential_volume: f64,
    pub potential_boundary: f64,
    pub curvature_gradient: f64,
    pub exponent_deficit: f64,
    pub curvature_boundary: f64,
}

impl PohozaevTerms {
    pub fn sum(&self) -> f64 {
        self.as_array().iter().sum()
    }

    pub fn as_array(&self) -> [f64; 6] {
        [
            self.coefficient_deviation,
            self.potential_volume,
            self.potential_boundary,
            self.curvature_gradient,
            self.exponent_deficit,
            self.curvature_boundary,
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PohozaevReport {
    pub r: f64,
    pub boundary_p: f64,
    pub terms: PohozaevTerms,
    /// `|P - Σ terms|`.
    pub residual: f64,
    /// Largest magnitude among `P` and the terms.
    pub scale: f64,
}

impl PohozaevReport {
    pub fn relative_residual(&self) -> f64 {
        if self.scale == 0.0 {
            self.residual
        } else {
            self.residual / self.scale
        }
    }
}

/// Lower cut of the adaptive quadrature; the integrands vanish like `r³` there.
pub const BALL_EPSILON: f64 = 1e-6;

fn check_gamma(gamma_order: u32) -> Result<f64> {
    if gamma_order == 0 {
        return Err(Error::InvalidInput("group order must be positive".into()));
    }
    Ok(VOL_S3 / gamma_order as f64)
}

/// `P(r, u) = (Vol(S³)/|Γ|) r³ (u u' + (r/2) u'²)` for radial `u` in dimension four.
pub fn pohozaev_boundary(u: Jet, r: f64, gamma_order: u32) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(format!("radius {r} must be positive")));
    }
    let omega = check_gamma(gamma_order)?;
    Ok(omega * r.powi(3) * (u.value * u.d1 + 0.5 * r * u.d1 * u.d1))
}

/// Right-hand side groups of the balance on `{|x| ≤ r}/Γ`.
pub fn pohozaev_volume_terms(
    eq: &dyn RadialEquation,
    u: &dyn Fn(f64) -> Jet,
    r: f64,
    gamma_order: u32,
    quadrature: BallQuadrature,
) -> Result<PohozaevTerms> {
    let omega = check_gamma(gamma_order)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidInput(format!("radius {r} must be positive")));
    }
    let p = eq.exponent();
    let integrands = |x: f64| -> [f64; 4] {
        if x <= 0.0 {
            return [0.0; 4];
        }
        let j = u(x);
        let c = eq.potential(x);
        let k = eq.curvature(x);
        let up = j.value.abs().powf(p + 1.0);
        let w = x.powi(3);
        [
            -(x * j.d1 + j.value) * (eq.principal_deviation(x) * j.d2 + eq.drift_deviation(x) * j.d1) * w,
            (0.5 * x * c.d1 + c.value) * j.value * j.value * w,
            x * k.d1 * up * w,
            k.value * up * w,
        ]
    };
    let integrals: [f64; 4] = match quadrature {
        BallQuadrature::Adaptive { tol } => {
            let mut out = [0.0; 4];
            for (i, o) in out.iter_mut().enumerate() {
                *o = integrate_to_tolerance(BALL_EPSILON.min(0.5 * r), r, tol, |x| integrands(x)[i])?;
            }
            out
        }
        BallQuadrature::Trapezoid { points } => {
            if points < 2 {
                return Err(Error::InvalidInput("trapezoid rule needs two nodes".into()));
            }
            let h = r / (points - 1) as f64;
            let mut out = [0.0; 4];
            for i in 0..points {
                let w = if i == 0 || i == points - 1 { 0.5 * h } else { h };
                let vals = integrands(h * i as f64);
                for (o, v) in out.iter_mut().zip(vals) {
                    *o += w * v;
                }
            }
            out
        }
    };
    let j = u(r);
    let c = eq.potential(r).value;
    let k = eq.curvature(r).value;
    let r4 = r.powi(4);
    Ok(PohozaevTerms {
        coefficient_deviation: omega * integrals[0],
        potential_volume: omega * integrals[1],
        potential_boundary: -0.5 * omega * r4 * c * j.value * j.value,
        curvature_gradient: omega * integrals[2] / (p + 1.0),
        exponent_deficit: omega * (4.0 / (p + 1.0) - 1.0) * integrals[3],
        curvature_boundary: -omega * r4 * k * j.value.abs().powf(p + 1.0) / (p + 1.0),
    })
}

/// Both sides of the balance with their residual.
pub fn pohozaev_report(
    eq: &dyn RadialEquation,
    u: &dyn Fn(f64) -> Jet,
    r: f64,
    gamma_order: u32,
    quadrature: BallQuadrature,
) -> Result<PohozaevReport> {
    let boundary_p = pohozaev_boundary(u(r), r, gamma_order)?;
    let terms = pohozaev_volume_terms(eq, u, r, gamma_order, quadrature)?;
    let scale = terms
        .as_array()
        .iter()
        .fold(boundary_p.abs(), |m, t| m.max(t.abs()));
    Ok(PohozaevReport {
        r,
        boundary_p,
        terms,
        residual: (boundary_p - terms.sum()).abs(),
        scale,
    })
}

/// Equation and `s`-profile of a solution on the compactified LeBrun metric.
/// The second derivative is taken from the equation itself.
pub fn solution_profile(sol: &RadialSolution) -> Result<(LebrunEquation, impl Fn(f64) -> Jet + '_)> {
    let g = sol.geometry;
    if g.kind() != GeometryKind::LebrunCompact {
        return Err(Error::InvalidGeometry("Pohozaev checks use the compactified LeBrun metric".into()));
    }
    let n = g.order() as f64;
    let eq = LebrunEquation::new(g.order(), sol.k.clone(), sol.p)?;
    let problem = sol.problem();
    let (lo, _) = sol.range();
    let at_start = problem.u_at_start(sol.shooting_parameter);
    let eq2 = eq.clone();
    let profile = move |s: f64| {
        let t = (n * s * s).ln_1p();
        if t <= lo {
            // below the series start u is flat to first order
            let u = at_start;
            return Jet::new(u, 0.0, eq2.second_derivative(s.max(1e-12), u, 0.0));
        }
        let [v, dv] = sol.state_at(t);
        let (u, du_dt) = problem.u_from_state(t, v, dv);
        let du = du_dt * 2.0 * n * s / (1.0 + n * s * s);
        Jet::new(u, du, eq2.second_derivative(s, u, du))
    };
    Ok((eq, profile))
}

/// Balance for a solver-produced solution on `{s ≤ r}` with the trapezoid rule.
pub fn pohozaev_of_solution(sol: &RadialSolution, r: f64, points: usize) -> Result<PohozaevReport> {
    let (eq, u) = solution_profile(sol)?;
    pohozaev_report(&eq, &u, r, sol.geometry.gamma_order(), BallQuadrature::Trapezoid { points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementStudy {
    pub points: Vec<usize>,
    pub reports: Vec<PohozaevReport>,
    /// `log2` of successive relative-residual ratios when the node count doubles.
    pub orders: Vec<f64>,
}

/// Residuals of the sampled balance as the trapezoid grid is doubled.
pub fn refinement_study(sol: &RadialSolution, r: f64, coarsest: usize, levels: usize) -> Result<RefinementStudy> {
    if levels < 2 {
        return Err(Error::InvalidInput("refinement needs at least two levels".into()));
    }
    let points: Vec<usize> = (0..levels).map(|i| (coarsest - 1) * (1 << i) + 1).collect();
    let reports = points
        .iter()
        .map(|&m| pohozaev_of_solution(sol, r, m))
        .collect::<Result<Vec<_>>>()?;
    let orders = reports
        .windows(2)
        .map(|w| (w[0].relative_residual() / w[1].relative_residual()).log2())
        .collect();
    Ok(RefinementStudy { points, reports, orders })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bubble::bubble_jet;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn boundary_examples() {
        assert_eq!(pohozaev_boundary(Jet::constant(3.0), 2.0, 1).unwrap(), 0.0);
        let b = pohozaev_boundary(bubble_jet(8.0, 1.0), 1.0, 1).unwrap();
        assert_relative_eq!(b, -PI * PI / 4.0, max_relative = 1e-14);
        // the harmonic kernel r^{-2} carries no boundary quantity at any radius
        for r in [0.5f64, 1.0, 3.0] {
            let k = Jet::new(r.powi(-2), -2.0 * r.powi(-3), 6.0 * r.powi(-4));
            assert!(pohozaev_boundary(k, r, 1).unwrap().abs() < 1e-13);
        }
    }

    #[test]
    fn bubble_balances() {
        let eq = FlatEquation { potential: 0.0, curvature: 8.0, p: 3.0 };
        let u = |r: f64| bubble_jet(8.0, r);
        for r in [0.3, 1.0, 4.0] {
            let rep = pohozaev_report(&eq, &u, r, 1, BallQuadrature::Adaptive { tol: 1e-12 }).unwrap();
            assert!(rep.relative_residual() < 1e-10, "{rep:?}");
            assert_eq!(rep.terms.exponent_deficit, 0.0);
        }
    }

    #[test]
    fn non_solution_is_detected() {
        let eq = FlatEquation { potential: 0.0, curvature: 8.0, p: 3.0 };
        let u = |r: f64| Jet::new(1.0 + r * r, 2.0 * r, 2.0);
        let rep = pohozaev_report(&eq, &u, 1.0, 1, BallQuadrature::Adaptive { tol: 1e-12 }).unwrap();
        assert!(rep.relative_residual() > 0.1);
    }

    #[test]
    fn lebrun_coefficients_vanish_at_the_orbifold_point() {
        let eq = LebrunEquation::new(3, KFamily::constant(1.0).unwrap(), 3.0).unwrap();
        assert!(eq.principal_deviation(1e-4).abs() < 1e-6);
        assert!(eq.drift_deviation(1e-4).abs() < 1e-2);
        assert_relative_eq!(eq.potential(0.0).value, -12.0);
    }
}
