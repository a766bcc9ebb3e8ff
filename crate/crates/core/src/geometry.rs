//! Cohomogeneity-one backgrounds: the LeBrun metrics on `O(-n)`, their orbifold
//! compactification, and the round football `S^4/Γ`.
//!
//! Every metric is diagonal in a radial coordinate `x` and a left-invariant
//! coframe `σ1, σ2, σ3` of `S^3 = SU(2)`:
//!
//! ```text
//! g = A(x) dx² + B(x) (σ1² + σ2²) + C(x) σ3²
//! ```
//!
//! The coframe is normalised so that `dρ² + ρ²(σ1² + σ2² + σ3²)` is the flat
//! metric on `R^4`, i.e. `dσ1 = 2 σ2 ∧ σ3` and cyclic.  With this normalisation
//! the unit three-sphere has volume `2π²`; the volume densities below omit that
//! constant and the `1/|Γ|` of the quotient.

use std::f64::consts::PI;

use num_dual::{Dual2_64, DualNum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{cst, jet, Jet, Real};

/// Volume of the unit round three-sphere.
pub const VOL_S3: f64 = 2.0 * PI * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKind {
    /// Scalar-flat ALE metric `g_LEB(n)`.
    LebrunAle,
    /// Compact orbifold `(n + r²)^{-2} g_LEB(n)` with orbifold point at `r = ∞`.
    LebrunCompact,
    /// Round `S^4/Γ` with two orbifold poles.
    Football,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinate {
    /// LeBrun radius `r`.
    HatR,
    /// Inverted radius `s = 1/r`.
    S,
    /// `t = log(n s² + 1)`.
    T,
    /// Polar angle on the football.
    Theta,
}

impl std::fmt::Display for Coordinate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Coordinate::HatR => "hat_r",
            Coordinate::S => "s",
            Coordinate::T => "t",
            Coordinate::Theta => "theta",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointKind {
    /// Smooth point or smooth bolt: radial functions are even there.
    RegularCenter,
    /// Isolated `R^4/Γ` singularity.
    OrbifoldPoint,
    /// Asymptotically locally Euclidean end.
    AleEnd,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Endpoint {
    pub value: f64,
    pub kind: EndpointKind,
}

/// Radial interval of a geometry in its active coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub lower: Endpoint,
    pub upper: Endpoint,
}

impl Domain {
    pub fn contains_interior(&self, x: f64) -> bool {
        x.is_finite() && x > self.lower.value && x < self.upper.value
    }
}

/// Coefficients of the metric at one radial value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    pub radial_value: f64,
    /// Coefficient of `dx²`.
    pub coeff_radial: f64,
    /// Coefficient of `σ1² + σ2²` (of `sin²θ`-type round factor on the football).
    pub coeff_s12: f64,
    /// Coefficient of `σ3²`.
    pub coeff_s3: f64,
}

impl MetricSample {
    pub fn coefficients(&self) -> [f64; 3] {
        [self.coeff_radial, self.coeff_s12, self.coeff_s3]
    }
}

/// A cohomogeneity-one background in a chosen radial coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RadialGeometry {
    kind: GeometryKind,
    order: u32,
    coordinate: Coordinate,
}

impl RadialGeometry {
    /// `g_LEB(n)` in the `r` coordinate.
    pub fn lebrun_ale(n: u32) -> Result<Self> {
        Self::new(GeometryKind::LebrunAle, n, Coordinate::HatR)
    }

    /// The compactified metric in the `s` coordinate (orbifold point at `s = 0`).
    pub fn lebrun_compact(n: u32) -> Result<Self> {
        Self::new(GeometryKind::LebrunCompact, n, Coordinate::S)
    }

    /// Round `S^4/Γ` with `|Γ| = gamma_order`.
    pub fn football(gamma_order: u32) -> Result<Self> {
        Self::new(GeometryKind::Football, gamma_order, Coordinate::Theta)
    }

    pub fn new(kind: GeometryKind, order: u32, coordinate: Coordinate) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidGeometry(format!(
                "{kind:?} needs a positive integer parameter"
            )));
        }
        let geom = Self {
            kind,
            order,
            coordinate,
        };
        geom.check_coordinate(coordinate)?;
        Ok(geom)
    }

    /// Same geometry expressed in another radial coordinate.
    pub fn with_coordinate(self, coordinate: Coordinate) -> Result<Self> {
        self.check_coordinate(coordinate)?;
        Ok(Self { coordinate, ..self })
    }

    fn check_coordinate(&self, c: Coordinate) -> Result<()> {
        let ok = match self.kind {
            GeometryKind::Football => c == Coordinate::Theta,
            _ => c != Coordinate::Theta,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Coordinate(format!("{c} on {:?}", self.kind)))
        }
    }

    pub fn kind(&self) -> GeometryKind {
        self.kind
    }

    pub fn coordinate(&self) -> Coordinate {
        self.coordinate
    }

    /// `n` for the LeBrun family, `|Γ|` for the football.
    pub fn order(&self) -> u32 {
        self.order
    }

    /// Order of the group acting on the `S^3` fibres.
    pub fn gamma_order(&self) -> u32 {
        self.order
    }

    pub fn is_lebrun(&self) -> bool {
        matches!(
            self.kind,
            GeometryKind::LebrunAle | GeometryKind::LebrunCompact
        )
    }

    pub fn domain(&self) -> Domain {
        use EndpointKind::*;
        let inf = f64::INFINITY;
        let (lo, hi) = match (self.kind, self.coordinate) {
            (GeometryKind::LebrunAle, Coordinate::HatR) => ((0.0, RegularCenter), (inf, AleEnd)),
            (GeometryKind::LebrunAle, _) => ((0.0, AleEnd), (inf, RegularCenter)),
            (GeometryKind::LebrunCompact, Coordinate::HatR) => {
                ((0.0, RegularCenter), (inf, OrbifoldPoint))
            }
            (GeometryKind::LebrunCompact, _) => ((0.0, OrbifoldPoint), (inf, RegularCenter)),
            (GeometryKind::Football, _) => {
                let pole = if self.order > 1 {
                    OrbifoldPoint
                } else {
                    RegularCenter
                };
                ((0.0, pole), (PI, pole))
            }
        };
        Domain {
            lower: Endpoint {
                value: lo.0,
                kind: lo.1,
            },
            upper: Endpoint {
                value: hi.0,
                kind: hi.1,
            },
        }
    }

    /// Rejects values outside the open radial interval, naming the endpoint.
    pub fn check_interior(&self, x: f64) -> Result<()> {
        let d = self.domain();
        if d.contains_interior(x) {
            return Ok(());
        }
        let endpoint = if x.is_nan() || x <= d.lower.value {
            d.lower
        } else {
            d.upper
        };
        Err(Error::Domain {
            value: x,
            endpoint: format!(
                "{} = {} ({:?})",
                self.coordinate, endpoint.value, endpoint.kind
            ),
        })
    }

    /// Closed-form `(A, B, C)` at `x`, generic over plain and dual numbers.
    pub fn coeffs_generic<D: Real>(&self, x: D) -> [D; 3] {
        let n = self.order as f64;
        let compact = self.kind == GeometryKind::LebrunCompact;
        match self.coordinate {
            Coordinate::HatR => {
                let r2 = x * x;
                let one_r2 = r2 + 1.0;
                let n_r2 = r2 + n;
                let a = one_r2 / n_r2;
                let b = one_r2;
                let c = r2 * n_r2 / one_r2;
                if compact {
                    let w = n_r2 * n_r2;
                    [a / w, b / w, c / w]
                } else {
                    [a, b, c]
                }
            }
            Coordinate::S => lebrun_s2_coeffs(n, x * x, compact),
            Coordinate::T => {
                let em1 = x.exp_m1();
                let [a_s, b, c] = lebrun_s2_coeffs(n, em1 / n, compact);
                // (ds/dt)² = e^{2t} / (4 n (e^t - 1))
                let ds_dt2 = (x * 2.0).exp() / (em1 * (4.0 * n));
                [a_s * ds_dt2, b, c]
            }
            Coordinate::Theta => {
                let s = x.sin();
                let s2 = s * s;
                [cst(1.0), s2, s2]
            }
        }
    }

    /// Metric coefficients at an interior radial value.
    pub fn metric_coeffs(&self, x: f64) -> Result<MetricSample> {
        self.check_interior(x)?;
        let [a, b, c] = self.coeffs_generic(x);
        Ok(MetricSample {
            radial_value: x,
            coeff_radial: a,
            coeff_s12: b,
            coeff_s3: c,
        })
    }

    /// Maps a radial value between the `r`, `s` and `t` coordinates.
    ///
    /// Closed endpoints are accepted: `s = 0` maps to `t = 0` and `r = ∞`.
    pub fn coord_transform(&self, value: f64, from: Coordinate, to: Coordinate) -> Result<f64> {
        self.check_coordinate(from)?;
        self.check_coordinate(to)?;
        if from == to {
            return Ok(value);
        }
        if value.is_nan() || value < 0.0 {
            return Err(Error::Domain {
                value,
                endpoint: format!("{from} = 0"),
            });
        }
        let n = self.order as f64;
        let s = match from {
            Coordinate::HatR => 1.0 / value,
            Coordinate::S => value,
            Coordinate::T => (value.exp_m1() / n).sqrt(),
            Coordinate::Theta => unreachable!("checked above"),
        };
        Ok(match to {
            Coordinate::HatR => 1.0 / s,
            Coordinate::S => s,
            Coordinate::T => (n * s * s).ln_1p(),
            Coordinate::Theta => unreachable!("checked above"),
        })
    }

    /// Scalar curvature: closed form where one is known, otherwise the
    /// orthonormal-frame formula fed with exact (automatic) derivatives.
    pub fn scalar_curvature(&self, x: f64) -> Result<f64> {
        self.check_interior(x)?;
        let n = self.order as f64;
        Ok(match self.kind {
            GeometryKind::Football => 12.0,
            GeometryKind::LebrunCompact => {
                let s2 = match self.coordinate {
                    Coordinate::HatR => 1.0 / (x * x),
                    Coordinate::S => x * x,
                    _ => x.exp_m1() / n,
                };
                24.0 * n * (1.0 + n * s2) / (1.0 + s2)
            }
            GeometryKind::LebrunAle => {
                let jets = self.coefficient_jets(x);
                frame_scalar_curvature(jets)
            }
        })
    }

    /// Scalar curvature from fourth-order central differences of the sampled
    /// coefficients.  The step is relative: `h = step * |x|`.
    pub fn numeric_scalar_curvature(&self, x: f64, step: f64) -> Result<f64> {
        self.check_interior(x)?;
        if !(step > 0.0) {
            return Err(Error::InvalidInput(format!("step must be positive, got {step}")));
        }
        let h = step * x.abs();
        let d = self.domain();
        if x - 2.0 * h <= d.lower.value || x + 2.0 * h >= d.upper.value {
            return Err(Error::Stencil(format!(
                "x = {x} with step {h} reaches the domain boundary"
            )));
        }
        let f = |y: f64| self.coeffs_generic(y);
        let (m2, m1, c0, p1, p2) = (f(x - 2.0 * h), f(x - h), f(x), f(x + h), f(x + 2.0 * h));
        let mut jets = [Jet::constant(0.0); 3];
        for k in 0..3 {
            let d1 = (m2[k] - 8.0 * m1[k] + 8.0 * p1[k] - p2[k]) / (12.0 * h);
            let d2 = (-m2[k] + 16.0 * m1[k] - 30.0 * c0[k] + 16.0 * p1[k] - p2[k]) / (12.0 * h * h);
            jets[k] = Jet::new(c0[k], d1, d2);
        }
        Ok(frame_scalar_curvature(jets))
    }

    /// `sqrt(det g)` on a radial slice, without the `Vol(S^3)/|Γ|` factor.
    pub fn volume_density(&self, x: f64) -> Result<f64> {
        self.check_interior(x)?;
        Ok(volume_density_generic(self.coeffs_generic(x)))
    }

    /// Coefficients of `Δu = g^{xx} u'' + drift · u'` for radial `u`.
    pub fn laplacian_coefficients(&self, x: f64) -> Result<(f64, f64)> {
        self.check_interior(x)?;
        Ok(self.laplacian_coefficients_unchecked(x))
    }

    pub(crate) fn laplacian_coefficients_unchecked(&self, x: f64) -> (f64, f64) {
        let flux = jet(
            |y: Dual2_64| {
                let [a, b, c] = self.coeffs_generic(y);
                b * c.sqrt() / a.sqrt()
            },
            x,
        );
        let [a, b, c] = self.coeffs_generic(x);
        let density = volume_density_generic([a, b, c]);
        (1.0 / a, flux.d1 / density)
    }

    /// Laplacian of a radial function given its value and derivatives at `x`.
    pub fn laplacian_of(&self, x: f64, u: Jet) -> Result<f64> {
        let (g_inv, drift) = self.laplacian_coefficients(x)?;
        Ok(g_inv * u.d2 + drift * u.d1)
    }

    pub(crate) fn coefficient_jets(&self, x: f64) -> [Jet; 3] {
        let mut out = [Jet::constant(0.0); 3];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = jet(|y: Dual2_64| self.coeffs_generic(y)[k], x);
        }
        out
    }
}

fn lebrun_s2_coeffs<D: Real>(n: f64, s2: D, compact: bool) -> [D; 3] {
    let one_s2 = s2 + 1.0;
    let ns = s2 * n + 1.0;
    if compact {
        [
            one_s2 / (ns * ns * ns),
            s2 * one_s2 / (ns * ns),
            s2 / (ns * one_s2),
        ]
    } else {
        [
            one_s2 / (ns * s2 * s2),
            one_s2 / s2,
            ns / (s2 * one_s2),
        ]
    }
}

pub(crate) fn volume_density_generic<D: Real>(c: [D; 3]) -> D {
    c[0].sqrt() * c[1] * c[2].sqrt()
}

/// Scalar curvature of `A dx² + B(σ1² + σ2²) + C σ3²` from the values and the
/// first two `x`-derivatives of `A`, `B`, `C`.
///
/// With proper radial distance `τ`, `a = √B`, `c = √C`:
/// `R = -2(2a''/a + c''/c) - 2(a'²/a² + 2a'c'/(ac)) + 8/a² - 2c²/a⁴`.
pub fn frame_scalar_curvature(coeffs: [Jet; 3]) -> f64 {
    let [big_a, big_b, big_c] = coeffs;
    let sqrt_a = big_a.value.sqrt();
    // proper-distance derivatives of sqrt(F)
    let proper = |f: Jet| -> (f64, f64, f64) {
        let r = f.value.sqrt();
        let fx = f.d1 / (2.0 * r);
        let fxx = f.d2 / (2.0 * r) - f.d1 * f.d1 / (4.0 * f.value * r);
        let ft = fx / sqrt_a;
        let ftt = (fxx - fx * big_a.d1 / (2.0 * big_a.value)) / big_a.value;
        (r, ft, ftt)
    };
    let (a, a1, a2) = proper(big_b);
    let (c, c1, c2) = proper(big_c);
    let kinetic = -2.0 * (2.0 * a2 / a + c2 / c) - 2.0 * (a1 * a1 / (a * a) + 2.0 * a1 * c1 / (a * c));
    let fibre = 8.0 / big_b.value - 2.0 * big_c.value / (big_b.value * big_b.value);
    kinetic + fibre
}

/// Radial samples on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSamples {
    pub x0: f64,
    pub h: f64,
    pub values: Vec<f64>,
}

impl UniformSamples {
    pub fn from_fn(x0: f64, h: f64, len: usize, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..len).map(|i| f(x0 + h * i as f64)).collect();
        Self { x0, h, values }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + self.h * i as f64
    }
}

/// `Δu` at sample `index` using five-point central differences.
pub fn radial_laplacian(geom: &RadialGeometry, u: &UniformSamples, index: usize) -> Result<f64> {
    if index < 2 || index + 2 >= u.values.len() {
        return Err(Error::Stencil(format!(
            "index {index} needs two neighbours on each side (len {})",
            u.values.len()
        )));
    }
    let v = &u.values;
    let h = u.h;
    let d1 = (v[index - 2] - 8.0 * v[index - 1] + 8.0 * v[index + 1] - v[index + 2]) / (12.0 * h);
    let d2 = (-v[index - 2] + 16.0 * v[index - 1] - 30.0 * v[index] + 16.0 * v[index + 1]
        - v[index + 2])
        / (12.0 * h * h);
    geom.laplacian_of(u.x(index), Jet::new(v[index], d1, d2))
}

/// Volume of the unit round `S^n`.
pub fn sphere_volume(n: u32) -> f64 {
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 1.0) * sphere_volume(n - 2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ale_coefficients_at_unit_radius() {
        let g = RadialGeometry::lebrun_ale(2).unwrap();
        let m = g.metric_coeffs(1.0).unwrap();
        assert_relative_eq!(m.coeff_radial, 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(m.coeff_s12, 2.0, epsilon = 1e-15);
        assert_relative_eq!(m.coeff_s3, 1.5, epsilon = 1e-15);

        let g1 = RadialGeometry::lebrun_ale(1).unwrap();
        let m = g1.metric_coeffs(1.0).unwrap();
        assert_eq!(m.coefficients(), [1.0, 2.0, 1.0]);
    }

    #[test]
    fn compact_s_form() {
        let g = RadialGeometry::lebrun_compact(2).unwrap();
        let m = g.metric_coeffs(1.0).unwrap();
        assert_relative_eq!(m.coeff_radial, 2.0 / 27.0, epsilon = 1e-15);
        // s-form = r-form pulled back through s = 1/r
        let gr = g.with_coordinate(Coordinate::HatR).unwrap();
        let mr = gr.metric_coeffs(2.0).unwrap();
        let ms = g.metric_coeffs(0.5).unwrap();
        assert_relative_eq!(ms.coeff_radial, mr.coeff_radial * 16.0, max_relative = 1e-14);
        assert_relative_eq!(ms.coeff_s12, mr.coeff_s12, max_relative = 1e-14);
        assert_relative_eq!(ms.coeff_s3, mr.coeff_s3, max_relative = 1e-14);
    }

    #[test]
    fn domain_errors_name_the_endpoint() {
        let g = RadialGeometry::lebrun_compact(3).unwrap();
        match g.metric_coeffs(0.0) {
            Err(Error::Domain { endpoint, .. }) => assert!(endpoint.contains("OrbifoldPoint")),
            other => panic!("unexpected {other:?}"),
        }
        let f = RadialGeometry::football(2).unwrap();
        assert!(f.metric_coeffs(PI).is_err());
        assert!(f.metric_coeffs(-1.0).is_err());
        assert!(RadialGeometry::lebrun_ale(0).is_err());
        assert!(f.with_coordinate(Coordinate::S).is_err());
    }

    #[test]
    fn coordinate_examples() {
        let g2 = RadialGeometry::lebrun_compact(2).unwrap();
        assert_relative_eq!(
            g2.coord_transform(1.0, Coordinate::S, Coordinate::T).unwrap(),
            3f64.ln(),
            epsilon = 1e-15
        );
        assert_eq!(g2.coord_transform(0.0, Coordinate::S, Coordinate::T).unwrap(), 0.0);
        let g3 = RadialGeometry::lebrun_ale(3).unwrap();
        assert_relative_eq!(
            g3.coord_transform(4f64.ln(), Coordinate::T, Coordinate::S).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_eq!(g3.coord_transform(0.7, Coordinate::T, Coordinate::T).unwrap(), 0.7);
        assert!(g3.coord_transform(-1.0, Coordinate::S, Coordinate::T).is_err());
    }

    #[test]
    fn curvature_examples() {
        let g1 = RadialGeometry::lebrun_compact(1)
            .unwrap()
            .with_coordinate(Coordinate::HatR)
            .unwrap();
        // closed form at r → 0 is 24; evaluate just inside the domain
        assert_relative_eq!(g1.scalar_curvature(1e-9).unwrap(), 24.0, max_relative = 1e-12);
        let ale = RadialGeometry::lebrun_ale(4).unwrap();
        for r in [0.3, 1.0, 7.0] {
            assert!(ale.scalar_curvature(r).unwrap().abs() < 1e-9);
        }
        let f = RadialGeometry::football(1).unwrap();
        assert_eq!(f.scalar_curvature(1.0).unwrap(), 12.0);
        let r = f.numeric_scalar_curvature(PI / 2.0, 1e-4).unwrap();
        assert!((r - 12.0).abs() < 1e-6, "{r}");
    }

    #[test]
    fn numeric_curvature_matches_closed_form() {
        let g = RadialGeometry::lebrun_compact(2)
            .unwrap()
            .with_coordinate(Coordinate::HatR)
            .unwrap();
        let exact = g.scalar_curvature(1.0).unwrap();
        let num = g.numeric_scalar_curvature(1.0, 1e-4).unwrap();
        assert_relative_eq!(num, exact, max_relative = 1e-6);
        let ale = RadialGeometry::lebrun_ale(3).unwrap();
        assert!(ale.numeric_scalar_curvature(2.0, 1e-4).unwrap().abs() < 1e-6);
        let t = RadialGeometry::lebrun_compact(5)
            .unwrap()
            .with_coordinate(Coordinate::T)
            .unwrap();
        let x = 0.8;
        assert_relative_eq!(
            t.numeric_scalar_curvature(x, 1e-3).unwrap(),
            t.scalar_curvature(x).unwrap(),
            max_relative = 1e-7
        );
    }

    #[test]
    fn numeric_curvature_rejects_tight_stencil() {
        let f = RadialGeometry::football(1).unwrap();
        assert!(matches!(
            f.numeric_scalar_curvature(3.1, 0.01),
            Err(Error::Stencil(_))
        ));
    }

    #[test]
    fn volume_densities() {
        let f = RadialGeometry::football(3).unwrap();
        assert_relative_eq!(f.volume_density(0.4).unwrap(), 0.4f64.sin().powi(3), epsilon = 1e-15);
        let ale = RadialGeometry::lebrun_ale(3).unwrap();
        let r: f64 = 1e3;
        assert_relative_eq!(ale.volume_density(r).unwrap() / r.powi(3), 1.0, max_relative = 2e-6);
        let cpt = RadialGeometry::lebrun_compact(3).unwrap();
        let s: f64 = 1e-3;
        assert_relative_eq!(cpt.volume_density(s).unwrap() / s.powi(3), 1.0, max_relative = 5e-5);
    }

    #[test]
    fn laplacian_examples() {
        // u(r) = r² on g_LEB(1) at r = 1
        let ale = RadialGeometry::lebrun_ale(1).unwrap();
        let lap = ale.laplacian_of(1.0, Jet::new(1.0, 2.0, 2.0)).unwrap();
        assert_relative_eq!(lap, 6.0, epsilon = 1e-13);

        // cos θ is a first harmonic: Δ cos = -4 cos
        let f = RadialGeometry::football(1).unwrap();
        let u = UniformSamples::from_fn(0.2, 1e-3, 2001, f64::cos);
        for i in [5, 700, 1500] {
            let lap = radial_laplacian(&f, &u, i).unwrap();
            assert_relative_eq!(lap, -4.0 * u.x(i).cos(), epsilon = 1e-7);
        }
        assert!(radial_laplacian(&f, &u, 1).is_err());
        assert!(radial_laplacian(&f, &u, 1999).is_err());

        // u(t) = t is harmonic in the t-form of g_LEB(2)
        let t = RadialGeometry::lebrun_ale(2)
            .unwrap()
            .with_coordinate(Coordinate::T)
            .unwrap();
        let lap = t.laplacian_of(0.9, Jet::new(0.9, 1.0, 0.0)).unwrap();
        assert!(lap.abs() < 1e-12, "{lap}");
    }

    #[test]
    fn t_form_laplacian_matches_closed_form() {
        for n in [1u32, 2, 5] {
            let g = RadialGeometry::lebrun_ale(n)
                .unwrap()
                .with_coordinate(Coordinate::T)
                .unwrap();
            for t in [0.05, 0.7, 3.0, 12.0] {
                let (g_inv, drift) = g.laplacian_coefficients(t).unwrap();
                let e = (-t as f64).exp();
                let closed = 4.0 * (1.0 - e).powi(3) / (e * (1.0 + (n as f64 - 1.0) * e));
                assert_relative_eq!(g_inv, closed, max_relative = 1e-12);
                assert!(drift.abs() < 1e-9 * g_inv.max(1.0), "drift {drift}");
            }
        }
    }

    #[test]
    fn sphere_volumes() {
        assert_relative_eq!(sphere_volume(3), VOL_S3, epsilon = 1e-14);
        assert_relative_eq!(sphere_volume(4), 8.0 * PI * PI / 3.0, epsilon = 1e-14);
        assert_relative_eq!(sphere_volume(2), 4.0 * PI, epsilon = 1e-14);
    }
}
