//! Gauss–Legendre rules: composite panels on finite intervals and the
//! `r = tan ζ` map for `[0, ∞)`.

use std::f64::consts::FRAC_PI_2;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};

/// A Gauss–Legendre rule with its nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Rule {
    pairs: Vec<(f64, f64)>,
}

impl Rule {
    pub fn new(points: usize) -> Result<Self> {
        let degree = NonZeroUsize::new(points)
            .ok_or_else(|| Error::InvalidInput("quadrature needs at least one node".into()))?;
        if points < 2 {
            return Err(Error::InvalidInput(
                "quadrature needs at least two nodes".into(),
            ));
        }
        let rule = GaussLegendre::new(degree);
        Ok(Self {
            pairs: rule.as_node_weight_pairs().to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.pairs.iter().map(move |&(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Sum over `panels` equal sub-intervals of `[a, b]`.
    pub fn composite(&self, a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + h * k as f64;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }
}

/// Integrates over `[a, b]`, doubling the panel count until two successive
/// estimates agree to `tol` (relative to `max(1, |I|)`).
pub fn integrate_to_tolerance(a: f64, b: f64, tol: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    let rule = Rule::new(20)?;
    let mut panels = 4;
    let mut prev = rule.composite(a, b, panels, &f);
    for _ in 0..12 {
        panels *= 2;
        let next = rule.composite(a, b, panels, &f);
        if !next.is_finite() {
            return Err(Error::Quadrature(format!(
                "non-finite integral on [{a}, {b}]"
            )));
        }
        if (next - prev).abs() <= tol * next.abs().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::Quadrature(format!(
        "no convergence to {tol} on [{a}, {b}] after {panels} panels"
    )))
}

/// `∫_0^∞ f(r) dr` for algebraically decaying `f`, through `r = tan ζ`.
pub fn integrate_half_line(tol: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    integrate_to_tolerance(0.0, FRAC_PI_2, tol, |z| {
        let c = z.cos();
        if c <= 0.0 {
            return 0.0;
        }
        f(z.tan()) / (c * c)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exactness() {
        let rule = Rule::new(5).unwrap();
        let v = rule.integrate(-1.0, 2.0, |x| x.powi(9));
        assert_relative_eq!(v, (2f64.powi(10) - 1.0) / 10.0, max_relative = 1e-13);
        assert!(Rule::new(0).is_err());
    }

    #[test]
    fn half_line_integrals() {
        let v = integrate_half_line(1e-12, |r| 1.0 / (1.0 + r * r)).unwrap();
        assert_relative_eq!(v, PI / 2.0, max_relative = 1e-12);
        // ∫ r³ (1+r²)^{-4} dr = 1/12
        let v = integrate_half_line(1e-12, |r| r.powi(3) / (1.0 + r * r).powi(4)).unwrap();
        assert_relative_eq!(v, 1.0 / 12.0, max_relative = 1e-12);
    }
}
