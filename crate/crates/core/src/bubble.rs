//! Standard bubbles, Sobolev constants, the Yamabe-type energy quotient and
//! concentrating test functions on the compactified LeBrun metric.

use serde::{Deserialize, Serialize};

use crate::asymptotics::{green_function_radial, GreenOptions};
use crate::error::{Error, Result};
use crate::fit::{fit_basis, log_log_slope};
use crate::geometry::{sphere_volume, Coordinate, GeometryKind, RadialGeometry, VOL_S3};
use crate::jet::Jet;
use crate::quadrature::{integrate_half_line, integrate_to_tolerance};
use crate::solver::{KFamily, RadialSolution};

/// `c(n) = (n-2)/(4(n-1))`, the curvature weight of the conformal Laplacian.
pub fn conformal_constant(n: u32) -> f64 {
    let n = n as f64;
    (n - 2.0) / (4.0 * (n - 1.0))
}

/// Four-dimensional bubble `U_c(r) = √(8/c)/(1 + r²)`.
pub fn bubble_eval(c: f64, r: f64) -> f64 {
    (8.0 / c).sqrt() / (1.0 + r * r)
}

/// Bubble value with exact first and second radial derivatives.
pub fn bubble_jet(c: f64, r: f64) -> Jet {
    let a = (8.0 / c).sqrt();
    let q = 1.0 + r * r;
    Jet::new(a / q, -2.0 * a * r / (q * q), a * (6.0 * r * r - 2.0) / (q * q * q))
}

/// `max |u'' + 3u'/r + c u³|` over `grid` for the radial profile `u`.
pub fn flat_radial_residual(c: f64, grid: &[f64], u: impl Fn(f64) -> Jet) -> f64 {
    grid.iter()
        .map(|&r| {
            let j = u(r);
            // u'/r → u''(0) at the centre
            let lap = if r == 0.0 { 4.0 * j.d2 } else { j.d2 + 3.0 * j.d1 / r };
            (lap + c * j.value.powi(3)).abs()
        })
        .fold(0.0, f64::max)
}

/// Residual of the bubble equation `ΔU + c U³ = 0` on `grid`.
pub fn bubble_residual(c: f64, grid: &[f64]) -> f64 {
    flat_radial_residual(c, grid, |r| bubble_jet(c, r))
}

/// Same residual for `factor · U_c`, a negative control for `factor ≠ 1`.
pub fn scaled_bubble_residual(c: f64, factor: f64, grid: &[f64]) -> f64 {
    flat_radial_residual(c, grid, |r| {
        let j = bubble_jet(c, r);
        Jet::new(factor * j.value, factor * j.d1, factor * j.d2)
    })
}

/// `Q(S^n) = n(n-2)/4 · Vol(S^n)^{2/n}`.
pub fn sobolev_quotient(n: u32) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("Sobolev quotient needs n >= 3, got {n}")));
    }
    let nf = n as f64;
    Ok(nf * (nf - 2.0) / 4.0 * sphere_volume(n).powf(2.0 / nf))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HatConstants {
    pub c0: f64,
    pub c2: f64,
    pub d1: f64,
}

/// Radial integrals over `R^n` of powers of `(1 + r²)`, evaluated by quadrature.
pub fn hat_constants(n: u32) -> Result<HatConstants> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("hat constants need n >= 3, got {n}")));
    }
    let nf = n as f64;
    let area = sphere_volume(n - 1);
    let tol = 1e-12;
    let radial = |k: i32, power: f64| {
        integrate_half_line(tol, move |r| area * r.powi(k + n as i32 - 1) * (1.0 + r * r).powf(-power))
    };
    let base = radial(0, nf)?;
    let second = radial(2, nf)?;
    let top = radial(n as i32, nf + 1.0)?;
    Ok(HatConstants {
        c0: 4.0 * nf * (nf - 1.0) * base.powf(2.0 / nf),
        c2: second / (2.0 * nf * base),
        d1: 2.0 * nf * top / ((nf - 2.0) * base),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub p: f64,
    pub gradient_term: f64,
    pub curvature_term: f64,
    /// `∫|∇u|² + c(4) R u²`.
    pub numerator: f64,
    /// `(∫ K |u|^{p+1})^{2/(p+1)}`.
    pub denominator: f64,
    pub value: f64,
    pub gamma_order: u32,
}

/// Energy quotient of the radial function `u` (value and coordinate derivative)
/// over `range` in the coordinate of `geom`. Integrals carry `Vol(S³)/|Γ|`.
pub fn energy_j(
    u: impl Fn(f64) -> (f64, f64),
    k: &KFamily,
    p: f64,
    geom: &RadialGeometry,
    range: (f64, f64),
) -> Result<EnergyReport> {
    if !(p > 1.0) {
        return Err(Error::InvalidInput(format!("exponent {p} must exceed 1")));
    }
    let (lo, hi) = range;
    if !(lo < hi) {
        return Err(Error::InvalidInput(format!("empty integration range [{lo}, {hi}]")));
    }
    geom.check_interior(lo)?;
    geom.check_interior(hi)?;
    let cn = conformal_constant(4);
    let weight = VOL_S3 / geom.gamma_order() as f64;
    let tol = 1e-10;
    let densities = |x: f64| -> [f64; 3] {
        let (value, deriv) = u(x);
        let density = geom.volume_density(x).unwrap_or(0.0);
        let (g_inv, _) = geom.laplacian_coefficients(x).unwrap_or((0.0, 0.0));
        let r = geom.scalar_curvature(x).unwrap_or(0.0);
        [
            g_inv * deriv * deriv * density,
            cn * r * value * value * density,
            k.value_on(geom, x) * value.abs().powf(p + 1.0) * density,
        ]
    };
    let integrate = |i: usize| -> Result<f64> {
        let v = if geom.coordinate() == Coordinate::Theta {
            integrate_to_tolerance(lo, hi, tol, |x| densities(x)[i])?
        } else {
            // positive half-line coordinates: integrate in log x
            integrate_to_tolerance(lo.ln(), hi.ln(), tol, |y| {
                let x = y.exp();
                densities(x)[i] * x
            })?
        };
        Ok(weight * v)
    };
    let gradient_term = integrate(0)?;
    let curvature_term = integrate(1)?;
    let power = integrate(2)?;
    if !(power > 0.0) {
        return Err(Error::InvalidInput("zero denominator in the energy quotient".into()));
    }
    let numerator = gradient_term + curvature_term;
    let denominator = power.powf(2.0 / (p + 1.0));
    Ok(EnergyReport {
        p,
        gradient_term,
        curvature_term,
        numerator,
        denominator,
        value: numerator / denominator,
        gamma_order: geom.gamma_order(),
    })
}

/// Energy quotient of a solver-produced solution over its sampled range.
pub fn energy_of_solution(sol: &RadialSolution) -> Result<EnergyReport> {
    let problem = sol.problem();
    let (lo, hi) = sol.range();
    energy_j(
        |x| {
            let [v, dv] = sol.state_at(x);
            problem.u_from_state(x, v, dv)
        },
        &sol.k,
        sol.p,
        &sol.geometry,
        (lo, hi),
    )
}

/// `max(sup K, |Γ| · K at the orbifold points)`, the four-dimensional modified maximum.
pub fn modified_max_bk(k: &KFamily, geom: &RadialGeometry) -> f64 {
    let gamma = geom.gamma_order() as f64;
    match geom.kind() {
        GeometryKind::Football => {
            let pi = std::f64::consts::PI;
            let sup = (0..=2000)
                .map(|i| k.value(pi * i as f64 / 2000.0))
                .fold(f64::NEG_INFINITY, f64::max);
            sup.max(gamma * k.value(0.0).max(k.value(pi)))
        }
        _ => k.supremum().max(gamma * k.at_origin()),
    }
}

/// Concentrating test function `λ / (1 + λ² (s⁻² + H)⁻¹)` at the orbifold point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub lambda: f64,
    /// Regular term of the Green's function in the `s` coordinate.
    pub regular_term: f64,
}

impl TestFunction {
    pub fn new(lambda: f64, regular_term: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidInput(format!("concentration {lambda} must be positive")));
        }
        Ok(Self { lambda, regular_term })
    }

    /// Value and `s`-derivative.
    pub fn eval(&self, s: f64) -> (f64, f64) {
        let l = self.lambda;
        let h = self.regular_term;
        let d = 1.0 + (h + l * l) * s * s;
        (l * (1.0 + h * s * s) / d, -2.0 * l * l * l * s / (d * d))
    }

    pub fn samples(&self, grid: &[f64]) -> Vec<f64> {
        grid.iter().map(|&s| self.eval(s).0).collect()
    }
}

/// Test function built from the computed Green's function of the compactified metric.
pub fn test_function(geom: &RadialGeometry, lambda: f64, green: &crate::asymptotics::GreensFunctionSolution) -> Result<TestFunction> {
    if geom.kind() != GeometryKind::LebrunCompact {
        return Err(Error::InvalidGeometry("test functions live on the compactified LeBrun metric".into()));
    }
    TestFunction::new(lambda, green.regular_term_s)
}

/// `s`-range used for energy integrals of test functions.
pub const TEST_FUNCTION_RANGE: (f64, f64) = (1e-10, 1e8);

/// `J_3(φ_λ)` on the compactified LeBrun metric.
pub fn test_function_energy(geom: &RadialGeometry, k: &KFamily, phi: &TestFunction) -> Result<EnergyReport> {
    let g = geom.with_coordinate(Coordinate::S)?;
    energy_j(|s| phi.eval(s), k, 3.0, &g, TEST_FUNCTION_RANGE)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseSquareFit {
    pub limit: f64,
    pub coefficient: f64,
    pub r_squared: f64,
}

/// Least-squares fit of `J(λ) = J_∞ + b/λ²`.
pub fn fit_inverse_square(lambdas: &[f64], values: &[f64]) -> Result<InverseSquareFit> {
    let fit = fit_basis(lambdas, values, &[&|_| 1.0, &|l| 1.0 / (l * l)])?;
    Ok(InverseSquareFit {
        limit: fit.coefficients[0],
        coefficient: fit.coefficients[1],
        r_squared: fit.r_squared,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub lambdas: Vec<f64>,
    pub energies: Vec<f64>,
    pub fit: InverseSquareFit,
    /// Sign of the `λ⁻²` coefficient.
    pub coefficient_sign: i8,
    /// Decay exponent of successive differences `|J(λ_i) - J(λ_{i+1})|`.
    pub observed_order: Option<f64>,
    /// `Q(S⁴)/√(|Γ| K(q̌))`, the energy of a bubble concentrated at the orbifold point.
    pub threshold: f64,
    pub regular_term: f64,
}

/// Energies of test functions along `lambdas` and their `λ⁻²` expansion.
pub fn energy_expansion_check(geom: &RadialGeometry, k: &KFamily, lambdas: &[f64]) -> Result<ExpansionReport> {
    if lambdas.len() < 4 {
        return Err(Error::InvalidInput("need at least four concentration values".into()));
    }
    if lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("concentration values must increase".into()));
    }
    let green = green_function_radial(geom, &GreenOptions::default())?;
    let energies = lambdas
        .iter()
        .map(|&l| test_function_energy(geom, k, &test_function(geom, l, &green)?).map(|e| e.value))
        .collect::<Result<Vec<f64>>>()?;
    let fit = fit_inverse_square(lambdas, &energies)?;
    let diffs: Vec<f64> = energies.windows(2).map(|w| (w[0] - w[1]).abs()).collect();
    let observed_order = log_log_slope(&lambdas[..diffs.len()], &diffs).ok().map(|q| -q);
    let threshold = sobolev_quotient(4)? / (geom.gamma_order() as f64 * k.at_origin()).sqrt();
    Ok(ExpansionReport {
        lambdas: lambdas.to_vec(),
        energies,
        coefficient_sign: if fit.coefficient > 0.0 {
            1
        } else if fit.coefficient < 0.0 {
            -1
        } else {
            0
        },
        fit,
        observed_order,
        threshold,
        regular_term: green.regular_term_s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    /// Closed form of `J_3(φ_λ)` for constant `K` on the compactified metric.
    fn closed_form(n: f64, lambda: f64) -> f64 {
        let q = sobolev_quotient(4).unwrap();
        let e = 1.0 / (lambda * lambda + n);
        q / n.sqrt() * (1.0 + 0.5 * n * e) / (1.0 + 2.0 * e).sqrt()
    }

    #[test]
    fn bubble_values() {
        assert_eq!(bubble_eval(8.0, 0.0), 1.0);
        assert_eq!(bubble_eval(8.0, 1.0), 0.5);
        assert_eq!(bubble_eval(2.0, 0.0), 2.0);
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 10.0).collect();
        assert!(bubble_residual(8.0, &grid) < 1e-12);
        assert!(scaled_bubble_residual(8.0, 2.0, &grid) > 1.0);
    }

    #[test]
    fn constants() {
        let q = sobolev_quotient(4).unwrap();
        assert_relative_eq!(q, 2.0 * (8.0 * PI * PI / 3.0).sqrt(), max_relative = 1e-14);
        assert_relative_eq!(sobolev_quotient(3).unwrap(), 0.75 * (2.0 * PI * PI).powf(2.0 / 3.0), max_relative = 1e-14);
        let h = hat_constants(4).unwrap();
        assert_relative_eq!(h.c2, 0.25, epsilon = 1e-10);
        assert_relative_eq!(h.d1, 6.0, epsilon = 1e-10);
        assert_relative_eq!(conformal_constant(4) * h.c0, q, max_relative = 1e-10);
    }

    #[test]
    fn round_football_energy() {
        let g = RadialGeometry::football(1).unwrap();
        let k = KFamily::constant(2.0).unwrap();
        let e = energy_j(|_| (1.0, 0.0), &k, 3.0, &g, (1e-9, PI - 1e-9)).unwrap();
        let vol = 8.0 * PI * PI / 3.0;
        assert_relative_eq!(e.numerator, 2.0 * vol, max_relative = 1e-9);
        assert_relative_eq!(e.value, (2.0 * vol).sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn test_function_energy_matches_closed_form() {
        for n in [1u32, 2, 3] {
            let g = RadialGeometry::lebrun_compact(n).unwrap();
            let one = KFamily::constant(1.0).unwrap();
            for l in [3.0, 50.0] {
                let phi = TestFunction::new(l, n as f64).unwrap();
                let e = test_function_energy(&g, &one, &phi).unwrap();
                assert_relative_eq!(e.value, closed_form(n as f64, l), max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn test_function_limits() {
        let phi = TestFunction::new(40.0, 2.0).unwrap();
        assert_relative_eq!(phi.eval(1e-9).0, 40.0, max_relative = 1e-9);
        assert!(TestFunction::new(1e6, 2.0).unwrap().eval(1.0).0 < 1e-5);
        let (v, d) = phi.eval(0.3);
        let h = 1e-6;
        let fd = (phi.eval(0.3 + h).0 - phi.eval(0.3 - h).0) / (2.0 * h);
        assert!(v > 0.0);
        assert_relative_eq!(d, fd, max_relative = 1e-7);
    }

    #[test]
    fn modified_maximum() {
        let one = KFamily::constant(1.0).unwrap();
        assert_eq!(modified_max_bk(&one, &RadialGeometry::lebrun_compact(3).unwrap()), 3.0);
        assert_eq!(modified_max_bk(&one, &RadialGeometry::football(2).unwrap()), 2.0);
        let tall = KFamily::Bump { base: 1.0, amplitude: 9.0, width: 1.0 };
        assert_relative_eq!(modified_max_bk(&tall, &RadialGeometry::lebrun_compact(2).unwrap()), 20.0);
        let decaying = KFamily::RationalDecay { base: 10.0, amplitude: -9.0 };
        assert_relative_eq!(modified_max_bk(&decaying, &RadialGeometry::lebrun_compact(2).unwrap()), 10.0);
    }

    #[test]
    fn inverse_square_fit_recovers_synthetic_data() {
        let l = [20.0, 40.0, 80.0, 160.0];
        let j: Vec<f64> = l.iter().map(|x| 5.0 + 3.0 / (x * x)).collect();
        let f = fit_inverse_square(&l, &j).unwrap();
        assert_relative_eq!(f.limit, 5.0, epsilon = 1e-10);
        assert_relative_eq!(f.coefficient, 3.0, epsilon = 1e-8);
    }
}
