//! Small linear least-squares fits used for extrapolation and order estimates.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    /// Root-mean-square residual of the fit.
    pub rms_residual: f64,
    /// Coefficient of determination (1 when the data vary only through the model).
    pub r_squared: f64,
}

/// Fits `y ≈ Σ c_j basis_j(x)` by least squares (SVD).
pub fn fit_basis(xs: &[f64], ys: &[f64], basis: &[&dyn Fn(f64) -> f64]) -> Result<LinearFit> {
    let m = xs.len();
    let k = basis.len();
    if m != ys.len() {
        return Err(Error::Fit(format!("{m} abscissae vs {} values", ys.len())));
    }
    if m < k || k == 0 {
        return Err(Error::Fit(format!("{m} points cannot determine {k} coefficients")));
    }
    let a = DMatrix::from_fn(m, k, |i, j| basis[j](xs[i]));
    let b = DVector::from_column_slice(ys);
    let svd = a.clone().svd(true, true);
    let c = svd
        .solve(&b, 1e-14)
        .map_err(|e| Error::Fit(e.to_string()))?;
    let resid = &a * &c - &b;
    let rms = (resid.norm_squared() / m as f64).sqrt();
    let mean = ys.iter().sum::<f64>() / m as f64;
    let total: f64 = ys.iter().map(|y| (y - mean).powi(2)).sum();
    let r_squared = if total == 0.0 {
        1.0
    } else {
        1.0 - resid.norm_squared() / total
    };
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite coefficients".into()));
    }
    Ok(LinearFit {
        coefficients: c.iter().copied().collect(),
        rms_residual: rms,
        r_squared,
    })
}

/// Slope of `log|y|` against `log x`, i.e. the exponent `q` in `|y| ≈ C x^q`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.iter().chain(ys).any(|v| *v == 0.0 || !v.is_finite()) {
        return Err(Error::Fit("log-log fit needs finite non-zero data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.abs().ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    let fit = fit_basis(&lx, &ly, &[&|_| 1.0, &|x| x])?;
    Ok(fit.coefficients[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn recovers_exact_model() {
        let xs: Vec<f64> = (1..=6).map(|k| 10.0 * k as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 5.0 + 3.0 / (x * x)).collect();
        let fit = fit_basis(&xs, &ys, &[&|_| 1.0, &|x| x.powi(-2)]).unwrap();
        assert_relative_eq!(fit.coefficients[0], 5.0, epsilon = 1e-12);
        assert_relative_eq!(fit.coefficients[1], 3.0, epsilon = 1e-9);
        assert!(fit.rms_residual < 1e-13);
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 7.0 * x.powf(-2.0)).collect();
        assert_relative_eq!(log_log_slope(&xs, &ys).unwrap(), -2.0, epsilon = 1e-12);
        assert!(log_log_slope(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn underdetermined_is_rejected() {
        assert!(fit_basis(&[1.0], &[1.0], &[&|_| 1.0, &|x| x]).is_err());
    }
}
