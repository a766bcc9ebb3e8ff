//! Piecewise Chebyshev representation of a smooth function sampled at
//! Chebyshev points, with derivative evaluation.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct ChebPanel {
    pub a: f64,
    pub b: f64,
    coeffs: Vec<f64>,
}

impl ChebPanel {
    /// Chebyshev points of the first kind on `[a, b]`, in increasing order.
    pub fn nodes(a: f64, b: f64, degree: usize) -> Vec<f64> {
        let m = degree + 1;
        (0..m)
            .rev()
            .map(|k| {
                let x = (PI * (k as f64 + 0.5) / m as f64).cos();
                0.5 * (a + b) + 0.5 * (b - a) * x
            })
            .collect()
    }

    /// Builds the interpolant from values at [`ChebPanel::nodes`].
    pub fn from_values(a: f64, b: f64, values: &[f64]) -> Self {
        let m = values.len();
        let coeffs = (0..m)
            .map(|j| {
                let s: f64 = values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| {
                        // nodes are stored increasing, i.e. k = m - 1 - i
                        let k = (m - 1 - i) as f64;
                        v * (PI * j as f64 * (k + 0.5) / m as f64).cos()
                    })
                    .sum();
                let scale = if j == 0 { 1.0 } else { 2.0 };
                scale * s / m as f64
            })
            .collect();
        Self { a, b, coeffs }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    /// Value and first derivative at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let u = (2.0 * x - self.a - self.b) / (self.b - self.a);
        // T_k and T_k' by forward recurrence; adequate for the degrees used here
        let (mut t0, mut t1) = (1.0, u);
        let (mut d0, mut d1) = (0.0, 1.0);
        let mut value = self.coeffs[0];
        let mut deriv = 0.0;
        if self.coeffs.len() > 1 {
            value += self.coeffs[1] * t1;
            deriv += self.coeffs[1] * d1;
        }
        for c in self.coeffs.iter().skip(2) {
            let t2 = 2.0 * u * t1 - t0;
            let d2 = 2.0 * t1 + 2.0 * u * d1 - d0;
            value += c * t2;
            deriv += c * d2;
            t0 = t1;
            t1 = t2;
            d0 = d1;
            d1 = d2;
        }
        (value, deriv * 2.0 / (self.b - self.a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reproduces_exponential() {
        let nodes = ChebPanel::nodes(0.0, 1.0, 20);
        let vals: Vec<f64> = nodes.iter().map(|x| x.exp()).collect();
        let p = ChebPanel::from_values(0.0, 1.0, &vals);
        for x in [0.0, 0.013, 0.5, 0.99, 1.0] {
            let (v, d) = p.eval(x);
            assert_relative_eq!(v, x.exp(), max_relative = 1e-14);
            assert_relative_eq!(d, x.exp(), max_relative = 1e-11);
        }
    }
}
