//! ADM mass of radial ALE metrics by flux quadrature over `S^3`, the radial
//! Green's function of the conformal Laplacian at the orbifold point, and the
//! conformal blow-up it generates.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chebyshev::ChebPanel;
use crate::error::{Error, Result};
use crate::fit::{fit_basis, log_log_slope};
use crate::geometry::{frame_scalar_curvature, Coordinate, GeometryKind, RadialGeometry, VOL_S3};
use crate::jet::Jet;
use crate::ode::{integrate, OdeOptions, Outcome};
use crate::quadrature::Rule;

/// Smallest radius at which the Cartesian chart is used by default.
pub const DEFAULT_R_MIN: f64 = 5.0;

/// A radial metric `A dr² + B(σ1² + σ2²) + C σ3²` in a chart whose Euclidean
/// radius is `r`.
pub trait RadialProfile: Sync {
    fn coeffs_at(&self, r: f64) -> [f64; 3];
}

/// The Euclidean metric `dr² + r²(σ1² + σ2² + σ3²)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlatProfile;

impl RadialProfile for FlatProfile {
    fn coeffs_at(&self, r: f64) -> [f64; 3] {
        [1.0, r * r, r * r]
    }
}

/// `g_LEB(n)` in its own radius `r`.
#[derive(Debug, Clone, Copy)]
pub struct LebrunAleProfile {
    geom: RadialGeometry,
}

impl LebrunAleProfile {
    pub fn new(geom: RadialGeometry) -> Result<Self> {
        if geom.kind() != GeometryKind::LebrunAle {
            return Err(Error::InvalidGeometry(format!(
                "the ALE chart needs the LeBrun ALE metric, got {:?}",
                geom.kind()
            )));
        }
        Ok(Self {
            geom: geom.with_coordinate(Coordinate::HatR)?,
        })
    }
}

impl RadialProfile for LebrunAleProfile {
    fn coeffs_at(&self, r: f64) -> [f64; 3] {
        self.geom.coeffs_generic(r)
    }
}

/// Left-invariant forms on `R^4 = H`, scaled so that `σ_k = η_k / |z|²`.
fn eta(z: &[f64; 4]) -> [[f64; 4]; 3] {
    let [x0, x1, x2, x3] = *z;
    [
        [-x1, x0, -x3, x2],
        [-x2, x3, x0, -x1],
        [-x3, -x2, x1, x0],
    ]
}

/// Components `g_ij(z)` of a radial profile in Cartesian coordinates.
pub fn cartesian_metric_components(
    profile: &dyn RadialProfile,
    z: &[f64; 4],
    r_min: f64,
) -> Result<[[f64; 4]; 4]> {
    let r2: f64 = z.iter().map(|x| x * x).sum();
    let r = r2.sqrt();
    if !(r >= r_min) {
        return Err(Error::Domain {
            value: r,
            endpoint: format!("chart radius must be at least {r_min}"),
        });
    }
    Ok(metric_components_unchecked(profile, z))
}

fn metric_components_unchecked(profile: &dyn RadialProfile, z: &[f64; 4]) -> [[f64; 4]; 4] {
    let r2: f64 = z.iter().map(|x| x * x).sum();
    let r = r2.sqrt();
    let [a, b, c] = profile.coeffs_at(r);
    let e = eta(z);
    let r4 = r2 * r2;
    let mut g = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in i..4 {
            let v = a * z[i] * z[j] / r2
                + b / r4 * (e[0][i] * e[0][j] + e[1][i] * e[1][j])
                + c / r4 * e[2][i] * e[2][j];
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    g
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MassOptions {
    /// Gauss–Legendre nodes per Euler angle.
    pub nodes_per_angle: usize,
    /// Finite-difference step relative to the radius.
    pub relative_step: f64,
    pub r_min: f64,
    /// Largest accepted RMS residual of the `m + c r^-2` fit, relative to `max(1, |m|)`.
    pub fit_tolerance: f64,
    /// Rotates the quadrature nodes by a fixed element of `SO(4)`.
    pub rotate_nodes: bool,
}

impl Default for MassOptions {
    fn default() -> Self {
        Self {
            nodes_per_angle: 32,
            relative_step: 1e-3,
            r_min: DEFAULT_R_MIN,
            fit_tolerance: 1e-4,
            rotate_nodes: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassEstimate {
    pub radii: Vec<f64>,
    pub flux: Vec<f64>,
    pub extrapolated: f64,
    pub fit_model: String,
    pub fit_residual: f64,
    /// Limit from the model with an extra `r^-4` term.
    pub secondary_extrapolated: f64,
    /// Exponent `q` of `|m(r) - m| ~ r^-q`, when the deviation is resolvable.
    pub convergence_exponent: Option<f64>,
    pub accepted: bool,
}

impl MassEstimate {
    pub fn residuals(&self) -> Vec<f64> {
        self.radii
            .iter()
            .zip(&self.flux)
            .map(|(r, m)| m - self.extrapolated - self.fitted_slope() / (r * r))
            .collect()
    }

    fn fitted_slope(&self) -> f64 {
        // recover c from the first point; the fit is linear in (1, r^-2)
        let n = self.radii.len() as f64;
        let mean_x: f64 = self.radii.iter().map(|r| r.powi(-2)).sum::<f64>() / n;
        let mean_y: f64 = self.flux.iter().sum::<f64>() / n;
        if mean_x == 0.0 {
            0.0
        } else {
            (mean_y - self.extrapolated) / mean_x
        }
    }
}

/// A fixed rotation of `R^4` (product of two plane rotations) used to build
/// a second, independent node set.
fn node_rotation() -> [[f64; 4]; 4] {
    let (a, b) = (0.7_f64, 1.9_f64);
    let r1 = [
        [a.cos(), 0.0, -a.sin(), 0.0],
        [0.0, b.cos(), 0.0, -b.sin()],
        [a.sin(), 0.0, a.cos(), 0.0],
        [0.0, b.sin(), 0.0, b.cos()],
    ];
    let c = 0.4_f64;
    let r2 = [
        [c.cos(), -c.sin(), 0.0, 0.0],
        [c.sin(), c.cos(), 0.0, 0.0],
        [0.0, 0.0, c.cos(), c.sin()],
        [0.0, 0.0, -c.sin(), c.cos()],
    ];
    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = (0..4).map(|k| r1[i][k] * r2[k][j]).sum();
        }
    }
    m
}

/// Unit-sphere nodes and weights (weights sum to `2π²`) from a product rule
/// in Euler angles.
pub fn s3_nodes(per_angle: usize, rotate: bool) -> Result<Vec<([f64; 4], f64)>> {
    let rule = Rule::new(per_angle)?;
    let rot = node_rotation();
    let thetas: Vec<_> = rule.mapped(0.0, PI).collect();
    let phis: Vec<_> = rule.mapped(0.0, 2.0 * PI).collect();
    let psis: Vec<_> = rule.mapped(0.0, 4.0 * PI).collect();
    let mut out = Vec::with_capacity(per_angle.pow(3));
    for &(th, wt) in &thetas {
        let (ch, sh) = ((th / 2.0).cos(), (th / 2.0).sin());
        for &(ph, wp) in &phis {
            for &(ps, ws) in &psis {
                let a1 = 0.5 * (ps + ph);
                let a2 = 0.5 * (ps - ph);
                let z = [ch * a1.cos(), ch * a1.sin(), sh * a2.cos(), sh * a2.sin()];
                let z = if rotate {
                    std::array::from_fn(|i| (0..4).map(|k| rot[i][k] * z[k]).sum())
                } else {
                    z
                };
                out.push((z, 0.125 * th.sin() * wt * wp * ws));
            }
        }
    }
    Ok(out)
}

/// Normalised mass flux `(1/2π²) ∮ (∂_i g_ij - ∂_j g_ii) ν_j dA` on `|z| = r`.
pub fn mass_flux(profile: &dyn RadialProfile, r: f64, nodes: &[([f64; 4], f64)], step: f64) -> f64 {
    let h = step * r;
    let partial = nodes
        .par_iter()
        .map(|(unit, w)| {
            let z: [f64; 4] = std::array::from_fn(|i| r * unit[i]);
            let mut div = 0.0;
            let mut trace_grad = 0.0;
            for i in 0..4 {
                let at = |d: f64| {
                    let mut y = z;
                    y[i] += d;
                    metric_components_unchecked(profile, &y)
                };
                let (m2, m1, p1, p2) = (at(-2.0 * h), at(-h), at(h), at(2.0 * h));
                let dg = |j: usize, k: usize| {
                    (m2[j][k] - 8.0 * m1[j][k] + 8.0 * p1[j][k] - p2[j][k]) / (12.0 * h)
                };
                for j in 0..4 {
                    div += dg(i, j) * unit[j];
                }
                let dtrace: f64 = (0..4).map(|k| dg(k, k)).sum();
                trace_grad += dtrace * unit[i];
            }
            w * (div - trace_grad)
        })
        .collect::<Vec<_>>();
    // fixed summation order regardless of scheduling
    let total: f64 = partial.iter().sum();
    total * r.powi(3) / VOL_S3
}

/// Mass from flux values at `radii`, extrapolated with `m + c r^-2`.
pub fn adm_mass(profile: &dyn RadialProfile, radii: &[f64], opts: &MassOptions) -> Result<MassEstimate> {
    if radii.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "mass extrapolation needs at least 3 radii, got {}",
            radii.len()
        )));
    }
    if radii.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("radii must be strictly increasing".into()));
    }
    if let Some(r) = radii.iter().find(|r| !(**r >= opts.r_min)) {
        return Err(Error::Domain {
            value: *r,
            endpoint: format!("chart radius must be at least {}", opts.r_min),
        });
    }
    let nodes = s3_nodes(opts.nodes_per_angle, opts.rotate_nodes)?;
    let flux: Vec<f64> = radii
        .iter()
        .map(|&r| mass_flux(profile, r, &nodes, opts.relative_step))
        .collect();

    let primary = fit_basis(radii, &flux, &[&|_| 1.0, &|r| r.powi(-2)])?;
    let extrapolated = primary.coefficients[0];
    let secondary_extrapolated = if radii.len() >= 4 {
        fit_basis(radii, &flux, &[&|_| 1.0, &|r| r.powi(-2), &|r| r.powi(-4)])?.coefficients[0]
    } else {
        extrapolated
    };
    let deviations: Vec<f64> = flux.iter().map(|m| m - extrapolated).collect();
    let resolvable = deviations
        .iter()
        .all(|d| d.abs() > 1e-9 * extrapolated.abs().max(1.0));
    let convergence_exponent = if resolvable {
        log_log_slope(radii, &deviations).ok().map(|q| -q)
    } else {
        None
    };
    let scale = extrapolated.abs().max(1.0);
    Ok(MassEstimate {
        radii: radii.to_vec(),
        flux,
        extrapolated,
        fit_model: "m + c r^-2 (secondary: + c2 r^-4)".into(),
        fit_residual: primary.rms_residual,
        secondary_extrapolated,
        convergence_exponent,
        accepted: primary.rms_residual <= opts.fit_tolerance * scale,
    })
}

/// `count` log-spaced radii in `[lo, hi]`.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Default radii for mass extrapolation: 10 log-spaced values in `[20, 200]`.
pub fn default_radii() -> Vec<f64> {
    log_spaced(20.0, 200.0, 10)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GreenOptions {
    /// Start of the integration in `t`.
    pub t_start: f64,
    /// Truncated far end standing in for the regular center.
    pub t_end: f64,
    /// Chebyshev degree per unit-length panel in `t`.
    pub panel_degree: usize,
    pub sample_count: usize,
    pub s_min: f64,
    pub s_max: f64,
    pub rtol: f64,
}

impl Default for GreenOptions {
    fn default() -> Self {
        Self {
            t_start: 1e-7,
            t_end: 25.0,
            panel_degree: 24,
            sample_count: 200,
            s_min: 1e-3,
            s_max: 1e3,
            rtol: 1e-12,
        }
    }
}

/// Radial Green's function `ψ` of `L = Δ - R/6` with pole at the orbifold
/// point, stored as `ψ = s^-2 f(t)` with `f` in piecewise Chebyshev form.
#[derive(Debug, Clone, PartialEq)]
pub struct GreensFunctionSolution {
    pub order: u32,
    /// `(s, ψ(s))` on a log-spaced grid.
    pub samples: Vec<(f64, f64)>,
    pub leading_coefficient: f64,
    /// Constant term of `ψ` in the `s` expansion.
    pub regular_term_s: f64,
    /// `t · c0(t)` at small `t`; non-zero values signal a logarithmic term.
    pub log_term_indicator: f64,
    panels: Vec<ChebPanel>,
    t_end: f64,
}

impl GreensFunctionSolution {
    /// `f = s² ψ` and `df/dt` at `t`.
    fn f_at(&self, t: f64) -> Result<(f64, f64)> {
        if !(t >= 0.0 && t <= self.t_end) {
            return Err(Error::Domain {
                value: t,
                endpoint: format!("t in [0, {}]", self.t_end),
            });
        }
        let k = ((t.floor() as usize).min(self.panels.len() - 1)).max(0);
        Ok(self.panels[k].eval(t))
    }

    /// `ψ(s)`.
    pub fn psi(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::Domain {
                value: s,
                endpoint: "s = 0 (pole)".into(),
            });
        }
        let n = self.order as f64;
        let t = (n * s * s).ln_1p();
        Ok(self.f_at(t)?.0 / (s * s))
    }

    /// `ψ` and `dψ/dt` at `t`.
    pub fn psi_t(&self, t: f64) -> Result<(f64, f64)> {
        let n = self.order as f64;
        let (f, df) = self.f_at(t)?;
        let em1 = t.exp_m1();
        let sigma = n / em1;
        let dlog_sigma = -t.exp() / em1;
        Ok((sigma * f, sigma * (df + dlog_sigma * f)))
    }
}

/// Coefficients of the ODE for `f = s² ψ`: `f'' + p f' + q f = 0` in `t`.
fn green_f_coefficients(geom: &RadialGeometry, t: f64) -> (f64, f64) {
    let (g_inv, drift) = geom.laplacian_coefficients_unchecked(t);
    let r = geom
        .scalar_curvature(t)
        .unwrap_or_else(|_| frame_scalar_curvature(geom.coefficient_jets(t)));
    let p = drift / g_inv;
    let q = r / (6.0 * g_inv);
    let em1 = t.exp_m1();
    let et = t.exp();
    let ds = -et / em1;
    let dds = et * (et + 1.0) / (em1 * em1);
    (p + 2.0 * ds, dds + p * ds - q)
}

/// Solves `L ψ = 0` on the compactified LeBrun metric with `ψ ~ s^-2` at the
/// orbifold point and `ψ' = 0` at the far end.
pub fn green_function_radial(geom: &RadialGeometry, opts: &GreenOptions) -> Result<GreensFunctionSolution> {
    if geom.kind() != GeometryKind::LebrunCompact {
        return Err(Error::InvalidGeometry(format!(
            "the Green's function is built on the compact LeBrun metric, got {:?}",
            geom.kind()
        )));
    }
    let tg = geom.with_coordinate(Coordinate::T)?;
    let n = geom.order() as f64;
    let t0 = opts.t_start;
    let t_end = opts.t_end.floor().max(1.0);

    let log_term_indicator = {
        let t = 1e-4;
        let (_, q) = green_f_coefficients(&tg, t);
        t * q
    };
    if log_term_indicator.abs() > 1e-2 {
        return Err(Error::Shooting(format!(
            "ψ expansion has a logarithmic term (t·c0 = {log_term_indicator:e})"
        )));
    }

    let rhs = |t: f64, y: &[f64; 4]| {
        let (p, q) = green_f_coefficients(&tg, t);
        [y[1], -p * y[1] - q * y[0], y[3], -p * y[3] - q * y[2]]
    };
    let ode = OdeOptions {
        rtol: opts.rtol,
        atol: 1e-14,
        blowup: f64::INFINITY,
        ..OdeOptions::default()
    };
    // f1 carries the pole, f2 is the solution with s² ψ ~ s² (ψ regular)
    let y0 = [1.0, 0.0, t0.exp_m1() / n, t0.exp() / n];

    // integrate through the Chebyshev nodes of each unit panel
    let mut stops: Vec<f64> = Vec::new();
    let panel_count = t_end as usize;
    for k in 0..panel_count {
        let a = k as f64;
        stops.extend(ChebPanel::nodes(a, a + 1.0, opts.panel_degree));
    }
    stops.push(t_end);
    let mut states: Vec<[f64; 4]> = Vec::with_capacity(stops.len());
    let mut t = t0;
    let mut y = y0;
    for &ts in &stops {
        if ts > t {
            let tr = integrate(rhs, t, y, ts, &ode, None::<fn(&[f64; 4]) -> f64>)?;
            if tr.outcome != Outcome::Completed {
                return Err(Error::Shooting(format!("Green's function integration stopped: {:?}", tr.outcome)));
            }
            y = tr.last().1;
            t = ts;
        }
        states.push(y);
    }
    let y_end = *states.last().unwrap();

    // ψ_i' = σ (f_i' + (σ'/σ) f_i)
    let dlog_sigma = -t_end.exp() / t_end.exp_m1();
    let d1 = y_end[1] + dlog_sigma * y_end[0];
    let d2 = y_end[3] + dlog_sigma * y_end[2];
    if d2 == 0.0 || !d2.is_finite() {
        return Err(Error::Shooting("regular solution has vanishing far-end slope".into()));
    }
    let a = -d1 / d2;
    if !a.is_finite() {
        return Err(Error::Shooting("far-end condition could not be met".into()));
    }

    let m = opts.panel_degree + 1;
    let mut panels = Vec::with_capacity(panel_count);
    for k in 0..panel_count {
        let vals: Vec<f64> = states[k * m..(k + 1) * m]
            .iter()
            .map(|y| y[0] + a * y[2])
            .collect();
        panels.push(ChebPanel::from_values(k as f64, k as f64 + 1.0, &vals));
    }

    let mut sol = GreensFunctionSolution {
        order: geom.order(),
        samples: Vec::new(),
        leading_coefficient: 1.0,
        regular_term_s: a,
        log_term_indicator,
        panels,
        t_end,
    };
    let s_hi = opts.s_max.min(((t_end.exp_m1()) / n).sqrt());
    let mut samples = Vec::with_capacity(opts.sample_count);
    for s in log_spaced(opts.s_min, s_hi, opts.sample_count) {
        let psi = sol.psi(s)?;
        if !(psi > 0.0) {
            return Err(Error::Shooting(format!("ψ({s}) = {psi} is not positive")));
        }
        samples.push((s, psi));
    }
    // leading coefficient from ψ s² = c0 + c1 s² at small s
    let small: Vec<(f64, f64)> = samples.iter().copied().take(20).collect();
    let xs: Vec<f64> = small.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = small.iter().map(|p| p.1 * p.0 * p.0).collect();
    sol.leading_coefficient = fit_basis(&xs, &ys, &[&|_| 1.0, &|s| s * s])?.coefficients[0];
    sol.samples = samples;
    Ok(sol)
}

/// `ψ² ǧ` expressed in the inverted radius `r = 1/s`.
pub struct ConformalBlowup<'a> {
    base: &'a (dyn Fn(f64) -> [f64; 3] + Sync),
    psi: &'a (dyn Fn(f64) -> f64 + Sync),
}

impl<'a> ConformalBlowup<'a> {
    /// `base` gives the compact metric coefficients in `s`, `psi` the conformal factor.
    pub fn new(
        base: &'a (dyn Fn(f64) -> [f64; 3] + Sync),
        psi: &'a (dyn Fn(f64) -> f64 + Sync),
    ) -> Self {
        Self { base, psi }
    }
}

impl RadialProfile for ConformalBlowup<'_> {
    fn coeffs_at(&self, r: f64) -> [f64; 3] {
        let s = 1.0 / r;
        let [a, b, c] = (self.base)(s);
        let w = (self.psi)(s).powi(2);
        // ds² = s⁴ dr²
        [a * s.powi(4) * w, b * w, c * w]
    }
}

/// The blow-up of the compact LeBrun metric with a computed Green's function.
pub struct LebrunBlowup {
    geom: RadialGeometry,
    green: GreensFunctionSolution,
}

impl LebrunBlowup {
    pub fn new(geom: &RadialGeometry, green: GreensFunctionSolution) -> Result<Self> {
        if geom.kind() != GeometryKind::LebrunCompact || geom.order() != green.order {
            return Err(Error::InvalidGeometry(
                "blow-up needs the compact LeBrun metric of the Green's function".into(),
            ));
        }
        Ok(Self {
            geom: geom.with_coordinate(Coordinate::S)?,
            green,
        })
    }

    pub fn green(&self) -> &GreensFunctionSolution {
        &self.green
    }

    /// Numeric scalar curvature of the blown-up metric at radius `r`.
    pub fn numeric_scalar_curvature(&self, r: f64, step: f64) -> f64 {
        profile_numeric_curvature(self, r, step)
    }
}

impl RadialProfile for LebrunBlowup {
    fn coeffs_at(&self, r: f64) -> [f64; 3] {
        let s = 1.0 / r;
        let [a, b, c] = self.geom.coeffs_generic(s);
        let n = self.green.order as f64;
        let t = (n * s * s).ln_1p();
        let f = self.green.f_at(t).map(|v| v.0).unwrap_or(f64::NAN);
        // ψ² s⁴ = f², so the radial coefficient needs no cancellation
        let psi2 = (f / (s * s)).powi(2);
        [a * f * f, b * psi2, c * psi2]
    }
}

/// Scalar curvature of a profile from fourth-order differences of its coefficients.
pub fn profile_numeric_curvature(profile: &dyn RadialProfile, r: f64, step: f64) -> f64 {
    let h = step * r;
    let f = |x: f64| profile.coeffs_at(x);
    let (m2, m1, c0, p1, p2) = (f(r - 2.0 * h), f(r - h), f(r), f(r + h), f(r + 2.0 * h));
    let jets: [Jet; 3] = std::array::from_fn(|k| {
        let d1 = (m2[k] - 8.0 * m1[k] + 8.0 * p1[k] - p2[k]) / (12.0 * h);
        let d2 = (-m2[k] + 16.0 * m1[k] - 30.0 * c0[k] + 16.0 * p1[k] - p2[k]) / (12.0 * h * h);
        Jet::new(c0[k], d1, d2)
    });
    frame_scalar_curvature(jets)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassRegularCheck {
    pub order: u32,
    pub mass: MassEstimate,
    /// `m / 12`.
    pub implied_regular_term: f64,
    /// The `s`-coordinate constant term of ψ, for comparison.
    pub regular_term_s: f64,
}

/// Mass of the blow-up of the compact LeBrun metric and the implied `A = m/12`.
pub fn mass_regular_term_check(
    geom: &RadialGeometry,
    radii: &[f64],
    green_opts: &GreenOptions,
    mass_opts: &MassOptions,
) -> Result<MassRegularCheck> {
    let green = green_function_radial(geom, green_opts)?;
    let regular_term_s = green.regular_term_s;
    let blowup = LebrunBlowup::new(geom, green)?;
    let mass = adm_mass(&blowup, radii, mass_opts)?;
    Ok(MassRegularCheck {
        order: geom.order(),
        implied_regular_term: mass.extrapolated / 12.0,
        regular_term_s,
        mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn det4(m: &[[f64; 4]; 4]) -> f64 {
        let mut a = *m;
        let mut det = 1.0;
        for c in 0..4 {
            let p = (c..4).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap()).unwrap();
            if a[p][c] == 0.0 {
                return 0.0;
            }
            if p != c {
                a.swap(p, c);
                det = -det;
            }
            det *= a[c][c];
            for r in c + 1..4 {
                let f = a[r][c] / a[c][c];
                for k in c..4 {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
        det
    }

    #[test]
    fn flat_profile_is_identity() {
        let g = cartesian_metric_components(&FlatProfile, &[3.0, -4.0, 1.0, 7.0], 5.0).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((g[i][j] - e).abs() < 1e-14, "{i}{j}: {}", g[i][j]);
            }
        }
        assert!(cartesian_metric_components(&FlatProfile, &[1.0, 0.0, 0.0, 0.0], 5.0).is_err());
    }

    #[test]
    fn lebrun_chart_is_asymptotically_flat() {
        let p = LebrunAleProfile::new(RadialGeometry::lebrun_ale(3).unwrap()).unwrap();
        let z = [6.0, 0.0, 8.0, 0.0];
        let g = cartesian_metric_components(&p, &z, 5.0).unwrap();
        let mut dev = 0.0_f64;
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(g[i][j], g[j][i]);
                let e = if i == j { 1.0 } else { 0.0 };
                dev = dev.max((g[i][j] - e).abs());
            }
        }
        assert!(dev <= 0.1, "{dev}");
        assert!(det4(&g) > 0.0);

        let p1 = LebrunAleProfile::new(RadialGeometry::lebrun_ale(1).unwrap()).unwrap();
        let dev_at = |r: f64| {
            let g = cartesian_metric_components(&p1, &[r, 0.0, 0.0, 0.0], 5.0).unwrap();
            (0..4).map(|i| (g[i][i] - 1.0).abs()).fold(0.0, f64::max)
        };
        // O(r^-2) decay
        let ratio = dev_at(50.0) / dev_at(100.0);
        assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn sphere_weights_sum_to_volume() {
        let nodes = s3_nodes(8, false).unwrap();
        let total: f64 = nodes.iter().map(|p| p.1).sum();
        assert_relative_eq!(total, VOL_S3, max_relative = 1e-13);
        for (z, _) in nodes.iter().take(50) {
            let n: f64 = z.iter().map(|x| x * x).sum();
            assert_relative_eq!(n, 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn euclidean_mass_vanishes() {
        let opts = MassOptions {
            nodes_per_angle: 8,
            ..MassOptions::default()
        };
        let est = adm_mass(&FlatProfile, &[10.0, 20.0, 40.0], &opts).unwrap();
        for m in &est.flux {
            assert!(m.abs() < 1e-9, "{m}");
        }
        assert!(est.extrapolated.abs() < 1e-9);
    }

    #[test]
    fn adm_mass_rejects_bad_radii() {
        let opts = MassOptions::default();
        assert!(adm_mass(&FlatProfile, &[10.0, 20.0], &opts).is_err());
        assert!(adm_mass(&FlatProfile, &[10.0, 5.0, 20.0], &opts).is_err());
        assert!(adm_mass(&FlatProfile, &[1.0, 10.0, 20.0], &opts).is_err());
    }

    #[test]
    fn green_function_matches_closed_form() {
        for n in [1u32, 2, 5] {
            let g = RadialGeometry::lebrun_compact(n).unwrap();
            let sol = green_function_radial(&g, &GreenOptions::default()).unwrap();
            assert_relative_eq!(sol.regular_term_s, n as f64, max_relative = 1e-9);
            for s in [0.01_f64, 0.37, 1.0, 5.0, 100.0] {
                let exact = s.powi(-2) + n as f64;
                assert_relative_eq!(sol.psi(s).unwrap(), exact, max_relative = 1e-9);
            }
            assert_relative_eq!(sol.leading_coefficient, 1.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn blowup_reproduces_ale_metric() {
        let g = RadialGeometry::lebrun_compact(2).unwrap();
        let sol = green_function_radial(&g, &GreenOptions::default()).unwrap();
        let b = LebrunBlowup::new(&g, sol).unwrap();
        let ale = LebrunAleProfile::new(RadialGeometry::lebrun_ale(2).unwrap()).unwrap();
        for r in [0.2, 1.0, 30.0] {
            let x = b.coeffs_at(r);
            let y = ale.coeffs_at(r);
            for k in 0..3 {
                assert_relative_eq!(x[k], y[k], max_relative = 1e-9);
            }
        }
        assert!(b.numeric_scalar_curvature(3.0, 1e-3).abs() < 1e-6);
    }

    #[test]
    fn kelvin_inversion_of_flat_cone() {
        let base = |s: f64| [1.0, s * s, s * s];
        let psi = |s: f64| s.powi(-2);
        let b = ConformalBlowup::new(&base, &psi);
        for r in [0.5, 2.0, 9.0] {
            let [a, bb, c] = b.coeffs_at(r);
            assert_relative_eq!(a, 1.0, max_relative = 1e-14);
            assert_relative_eq!(bb, r * r, max_relative = 1e-14);
            assert_relative_eq!(c, r * r, max_relative = 1e-14);
        }
    }
}
