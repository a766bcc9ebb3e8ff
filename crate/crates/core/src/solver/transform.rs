//! Rewriting the critical equation on `O(-n)` as an equation on `O(-2)`.
//!
//! In the `t` coordinate both forms read `v'' + K̄ w v³ = 0`; multiplying the
//! curvature by `(1 + (n-1)e^{-t})/(1 + e^{-t})` turns `w_n` into `w_2`, so the
//! same function `v(t)` solves both, with `v_2(s) = v(log(2s² + 1))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::GeometryKind;
use crate::jet::Jet;
use crate::solver::kfamily::KFamily;
use crate::solver::shooting::RadialSolution;

/// `w_n(t) = e^{-t}(1 + (n-1)e^{-t}) / (4(1 - e^{-t})³)`.
pub fn weight(n: f64, t: f64) -> f64 {
    let e = (-t).exp();
    let om = -(-t).exp_m1();
    e * (1.0 + (n - 1.0) * e) / (4.0 * om * om * om)
}

/// Curvature factor `K̄_2 / K̄_n`.
pub fn curvature_factor(n: f64, t: f64) -> f64 {
    let e = (-t).exp();
    (1.0 + (n - 1.0) * e) / (1.0 + e)
}

/// Residuals `(v'' + K̄_n w_n v^p, v'' + K̄_2 w_2 v^p)` at `t` for a jet of `v`.
pub fn transform_residuals(v: Jet, kbar_n: f64, n: u32, t: f64, p: f64) -> (f64, f64) {
    let n = n as f64;
    let vp = v.value.abs().powf(p - 1.0) * v.value;
    let r_n = v.d2 + kbar_n * weight(n, t) * vp;
    let kbar_2 = curvature_factor(n, t) * kbar_n;
    let r_2 = v.d2 + kbar_2 * weight(2.0, t) * vp;
    (r_n, r_2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformReport {
    pub n: u32,
    /// `t` nodes of the comparison grid.
    pub t: Vec<f64>,
    /// `(s_2, v_2(s_2))` on the `O(-2)` side.
    pub v2_samples: Vec<(f64, f64)>,
    /// `K̄_2(t)` on the grid.
    pub k2_samples: Vec<f64>,
    pub residual_n_sup: f64,
    pub residual_2_sup: f64,
    pub max_residual_difference: f64,
}

/// Moves a critical solution on `O(-n)` to `O(-2)` and compares the residuals
/// of both forms, using fourth-order differences of the interpolated profile.
pub fn transform_n_to_2(sol: &RadialSolution, k: &KFamily, n: u32, points: usize) -> Result<TransformReport> {
    let g = sol.geometry;
    if g.kind() == GeometryKind::Football || g.order() != n {
        return Err(Error::InvalidGeometry(format!(
            "transform needs a LeBrun solution on O(-{n})"
        )));
    }
    if sol.p != 3.0 {
        return Err(Error::InvalidInput("the transform relates the critical equations (p = 3)".into()));
    }
    if points < 8 {
        return Err(Error::InvalidInput("need at least 8 comparison points".into()));
    }
    let (lo, hi) = sol.range();
    let lo = lo.max(1e-2);
    let h = (hi - lo) / (points - 1) as f64;
    let xs: Vec<f64> = (0..points).map(|i| lo + h * i as f64).collect();
    let vs: Vec<f64> = xs.iter().map(|&x| sol.state_at(x)[0]).collect();
    let nf = n as f64;
    let mut t = Vec::new();
    let mut v2_samples = Vec::new();
    let mut k2_samples = Vec::new();
    let (mut rn_sup, mut r2_sup, mut diff): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for i in 2..points - 2 {
        let x = xs[i];
        let d1 = (vs[i - 2] - 8.0 * vs[i - 1] + 8.0 * vs[i + 1] - vs[i + 2]) / (12.0 * h);
        let d2 = (-vs[i - 2] + 16.0 * vs[i - 1] - 30.0 * vs[i] + 16.0 * vs[i + 1] - vs[i + 2]) / (12.0 * h * h);
        let kbar = k.value_s2(x.exp_m1() / nf);
        let (rn, r2) = transform_residuals(Jet::new(vs[i], d1, d2), kbar, n, x, 3.0);
        rn_sup = rn_sup.max(rn.abs());
        r2_sup = r2_sup.max(r2.abs());
        diff = diff.max((rn - r2).abs());
        t.push(x);
        v2_samples.push(((x.exp_m1() / 2.0).sqrt(), vs[i]));
        k2_samples.push(curvature_factor(nf, x) * kbar);
    }
    Ok(TransformReport {
        n,
        t,
        v2_samples,
        k2_samples,
        residual_n_sup: rn_sup,
        residual_2_sup: r2_sup,
        max_residual_difference: diff,
    })
}

/// Random smooth profile `c0 + c1 sin(ω t + φ) + c2 e^{-μ t}` with exact derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothProfile {
    pub c: [f64; 3],
    pub omega: f64,
    pub phase: f64,
    pub mu: f64,
}

impl SmoothProfile {
    pub fn random(rng: &mut impl Rng) -> Self {
        Self {
            c: [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
            omega: rng.gen_range(0.1..3.0),
            phase: rng.gen_range(0.0..std::f64::consts::TAU),
            mu: rng.gen_range(0.1..2.0),
        }
    }

    pub fn jet(&self, t: f64) -> Jet {
        let (sn, cs) = (self.omega * t + self.phase).sin_cos();
        let e = (-self.mu * t).exp();
        let [c0, c1, c2] = self.c;
        Jet::new(
            c0 + c1 * sn + c2 * e,
            c1 * self.omega * cs - c2 * self.mu * e,
            -c1 * self.omega * self.omega * sn + c2 * self.mu * self.mu * e,
        )
    }
}

/// Random positive curvature candidate from the bump or rational families.
pub fn random_family(rng: &mut impl Rng) -> KFamily {
    let base = rng.gen_range(0.5..2.0);
    if rng.gen_bool(0.5) {
        KFamily::Bump {
            base,
            amplitude: rng.gen_range(-0.4..2.0) * base,
            width: rng.gen_range(0.3..3.0),
        }
    } else {
        KFamily::RationalDecay {
            base,
            amplitude: rng.gen_range(-0.4..2.0) * base,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub n: u32,
    pub samples: usize,
    pub evaluations: usize,
    /// `max |r_n - r_2| / (|w''| + |K̄ w_n w^p|)`.
    pub max_relative_difference: f64,
}

/// Compares both residual forms on `samples` random profiles and families,
/// each at `points` random `t`; deterministic for a given seed.
pub fn transform_identity_check(n: u32, seed: u64, samples: usize, points: usize) -> Result<IdentityCheck> {
    if n == 0 {
        return Err(Error::InvalidInput("order must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nf = n as f64;
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let w = SmoothProfile::random(&mut rng);
        let k = random_family(&mut rng);
        k.validate()?;
        for _ in 0..points {
            let t = rng.gen_range(0.05..12.0);
            let v = w.jet(t);
            let kbar = k.value_s2(t.exp_m1() / nf);
            let (r_n, r_2) = transform_residuals(v, kbar, n, t, 3.0);
            let scale = v.d2.abs() + (kbar * weight(nf, t) * v.value.powi(3)).abs();
            if scale > 0.0 {
                worst = worst.max((r_n - r_2).abs() / scale);
            }
        }
    }
    Ok(IdentityCheck {
        n,
        samples,
        evaluations: samples * points,
        max_relative_difference: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_at_half() {
        let t = 2f64.ln();
        assert_relative_eq!(weight(2.0, t), 1.5, max_relative = 1e-14);
        assert_relative_eq!(weight(1.0, t), 1.0, max_relative = 1e-14);
        assert_eq!(curvature_factor(2.0, 0.7), 1.0);
    }

    #[test]
    fn identity_for_n_two() {
        let v = Jet::new(0.8, -0.1, -0.4);
        let (a, b) = transform_residuals(v, 1.3, 2, 0.9, 3.0);
        assert_eq!(a, b);
    }

    #[test]
    fn random_identity_is_reproducible() {
        let a = transform_identity_check(3, 7, 20, 10).unwrap();
        let b = transform_identity_check(3, 7, 20, 10).unwrap();
        assert_eq!(a, b);
        assert!(a.max_relative_difference < 1e-12, "{a:?}");
    }

    #[test]
    fn profile_derivatives() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = SmoothProfile::random(&mut rng);
        let h = 1e-5;
        let j = w.jet(1.3);
        assert!((j.d1 - (w.jet(1.3 + h).value - w.jet(1.3 - h).value) / (2.0 * h)).abs() < 1e-8);
        assert!((j.d2 - (w.jet(1.3 + h).d1 - w.jet(1.3 - h).d1) / (2.0 * h)).abs() < 1e-8);
    }
}
