//! Radial curvature candidates `K(s)` and their position relative to the wall
//! `K''(0)/K(0) = n - 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Coordinate, GeometryKind, RadialGeometry};
use crate::jet::{cst, Real};

/// A positive radial function of the distance-like variable `s` (the polar
/// angle on the football).  Every kind depends on `s` only through `s²`, so
/// `K'(0) = 0` holds by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KFamily {
    Constant {
        value: f64,
    },
    /// `base + amplitude · exp(-(s/width)²)`.
    Bump {
        base: f64,
        amplitude: f64,
        #[serde(default = "unit_width")]
        width: f64,
    },
    /// `base + amplitude / (1 + s²)`.
    RationalDecay { base: f64, amplitude: f64 },
    /// `(2 + n s²)/(n + n s²) · inner(s)` for a nonincreasing `inner`.
    KMinusTransform { n: u32, inner: Box<KFamily> },
}

fn unit_width() -> f64 {
    1.0
}

impl KFamily {
    pub fn constant(value: f64) -> Result<Self> {
        let k = KFamily::Constant { value };
        k.validate()?;
        Ok(k)
    }

    /// `1 + a·exp(-s²)`, the amplitude family used for wall-crossing sweeps.
    pub fn bump(amplitude: f64) -> Result<Self> {
        let k = KFamily::Bump {
            base: 1.0,
            amplitude,
            width: 1.0,
        };
        k.validate()?;
        Ok(k)
    }

    /// `K` as a function of `s²`, generic over dual numbers.
    pub fn value_s2<D: Real>(&self, s2: D) -> D {
        match self {
            KFamily::Constant { value } => cst(*value),
            KFamily::Bump {
                base,
                amplitude,
                width,
            } => (s2 / (-width * width)).exp() * *amplitude + *base,
            KFamily::RationalDecay { base, amplitude } => (s2 + 1.0).recip() * *amplitude + *base,
            KFamily::KMinusTransform { n, inner } => {
                let n = *n as f64;
                (s2 * n + 2.0) / (s2 * n + n) * inner.value_s2(s2)
            }
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        self.value_s2(s * s)
    }

    pub fn value_generic<D: Real>(&self, s: D) -> D {
        self.value_s2(s * s)
    }

    /// `K(0)`.
    pub fn at_origin(&self) -> f64 {
        self.value_s2(0.0)
    }

    /// `K'(0)`, zero for every radial family.
    pub fn d1_at_origin(&self) -> f64 {
        0.0
    }

    /// Exact `K''(0)`.
    pub fn d2_at_origin(&self) -> f64 {
        match self {
            KFamily::Constant { .. } => 0.0,
            KFamily::Bump {
                amplitude, width, ..
            } => -2.0 * amplitude / (width * width),
            KFamily::RationalDecay { amplitude, .. } => -2.0 * amplitude,
            KFamily::KMinusTransform { n, inner } => {
                let n = *n as f64;
                // prefactor 2/n + (n-2)/n · s² + O(s⁴)
                2.0 * (n - 2.0) / n * inner.at_origin() + 2.0 / n * inner.d2_at_origin()
            }
        }
    }

    /// `lim_{s→∞} K(s)`, the value at the regular center.
    pub fn limit_at_infinity(&self) -> f64 {
        match self {
            KFamily::Constant { value } => *value,
            KFamily::Bump { base, .. } | KFamily::RationalDecay { base, .. } => *base,
            KFamily::KMinusTransform { inner, .. } => inner.limit_at_infinity(),
        }
    }

    /// Infimum over `[0, ∞]`.
    pub fn infimum(&self) -> f64 {
        match self {
            KFamily::Constant { value } => *value,
            KFamily::Bump {
                base, amplitude, ..
            }
            | KFamily::RationalDecay { base, amplitude } => base + amplitude.min(0.0),
            // both factors are monotone and positive, so the extremes sit at the ends
            KFamily::KMinusTransform { .. } => self.at_origin().min(self.limit_at_infinity()),
        }
    }

    /// Supremum over `[0, ∞]`.
    pub fn supremum(&self) -> f64 {
        match self {
            KFamily::Constant { value } => *value,
            KFamily::Bump {
                base, amplitude, ..
            }
            | KFamily::RationalDecay { base, amplitude } => base + amplitude.max(0.0),
            KFamily::KMinusTransform { .. } => {
                // not monotone in general: sample on s = tan ζ
                let mut sup = self.at_origin().max(self.limit_at_infinity());
                for k in 1..4000 {
                    let s = (std::f64::consts::FRAC_PI_2 * k as f64 / 4000.0).tan();
                    sup = sup.max(self.value(s));
                }
                sup
            }
        }
    }

    /// Whether `K` is nonincreasing in `s`.
    pub fn is_nonincreasing(&self) -> bool {
        match self {
            KFamily::Constant { .. } => true,
            KFamily::Bump { amplitude, .. } | KFamily::RationalDecay { amplitude, .. } => {
                *amplitude >= 0.0
            }
            KFamily::KMinusTransform { .. } => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64, name: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidFamily(format!("{name} must be finite")))
            }
        };
        match self {
            KFamily::Constant { value } => finite(*value, "value")?,
            KFamily::Bump {
                base,
                amplitude,
                width,
            } => {
                finite(*base, "base")?;
                finite(*amplitude, "amplitude")?;
                if !(*width > 0.0 && width.is_finite()) {
                    return Err(Error::InvalidFamily(format!("width must be positive, got {width}")));
                }
            }
            KFamily::RationalDecay { base, amplitude } => {
                finite(*base, "base")?;
                finite(*amplitude, "amplitude")?;
            }
            KFamily::KMinusTransform { n, inner } => {
                if *n == 0 {
                    return Err(Error::InvalidFamily("transform order must be positive".into()));
                }
                inner.validate()?;
                if !inner.is_nonincreasing() {
                    return Err(Error::InvalidFamily(
                        "the transformed family must be nonincreasing".into(),
                    ));
                }
            }
        }
        let inf = self.infimum();
        if !(inf > 0.0) {
            return Err(Error::InvalidFamily(format!(
                "K must be positive on [0, ∞] including the limit, infimum is {inf}"
            )));
        }
        Ok(())
    }

    /// `K` at radial value `x` of `geom`'s active coordinate.
    pub fn value_on<D: Real>(&self, geom: &RadialGeometry, x: D) -> D {
        let n = geom.order() as f64;
        match (geom.kind(), geom.coordinate()) {
            (GeometryKind::Football, _) | (_, Coordinate::S) => self.value_generic(x),
            (_, Coordinate::HatR) => self.value_s2((x * x).recip()),
            (_, Coordinate::T) => self.value_s2(x.exp_m1() / n),
            (_, Coordinate::Theta) => self.value_generic(x),
        }
    }
}

/// Builds `K_{n,-}(s) = (2 + n s²)/(n + n s²) · K2(s)` from a nonincreasing
/// positive `K2`.
pub fn make_k_minus(n: u32, k2: KFamily) -> Result<KFamily> {
    let k = KFamily::KMinusTransform {
        n,
        inner: Box::new(k2),
    };
    k.validate()?;
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WallLabel {
    Plus,
    Zero,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallClass {
    pub label: WallLabel,
    /// `K''(0)/K(0) - (n - 2)`.
    pub margin: f64,
}

pub const WALL_TOLERANCE: f64 = 1e-12;

pub fn classify_wall(k: &KFamily, n: u32) -> WallClass {
    let margin = k.d2_at_origin() / k.at_origin() - (n as f64 - 2.0);
    let label = if margin.abs() <= WALL_TOLERANCE {
        WallLabel::Zero
    } else if margin > 0.0 {
        WallLabel::Plus
    } else {
        WallLabel::Minus
    };
    WallClass { label, margin }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::jet;
    use approx::assert_relative_eq;
    use num_dual::Dual2_64;

    fn families() -> Vec<KFamily> {
        vec![
            KFamily::constant(2.5).unwrap(),
            KFamily::bump(-0.6).unwrap(),
            KFamily::Bump {
                base: 2.0,
                amplitude: 1.5,
                width: 0.7,
            },
            KFamily::RationalDecay {
                base: 1.0,
                amplitude: 3.0,
            },
            make_k_minus(3, KFamily::RationalDecay { base: 1.0, amplitude: 1.0 }).unwrap(),
            make_k_minus(5, KFamily::bump(2.0).unwrap()).unwrap(),
        ]
    }

    #[test]
    fn exact_second_derivative_matches_dual() {
        for k in families() {
            let j = jet(|s: Dual2_64| k.value_generic(s), 0.0);
            assert_relative_eq!(j.value, k.at_origin(), max_relative = 1e-15);
            assert!(j.d1.abs() < 1e-15);
            assert_relative_eq!(j.d2, k.d2_at_origin(), max_relative = 1e-13, epsilon = 1e-14);
        }
    }

    #[test]
    fn wall_examples() {
        let one = KFamily::constant(1.0).unwrap();
        assert_eq!(classify_wall(&one, 2).label, WallLabel::Zero);
        let c = classify_wall(&one, 3);
        assert_eq!(c.label, WallLabel::Minus);
        assert_relative_eq!(c.margin, -1.0);
        assert_relative_eq!(classify_wall(&one, 1).margin, 1.0);
        // K''(0) = 2 with K(0) = 1
        let k = KFamily::RationalDecay {
            base: 2.0,
            amplitude: -1.0,
        };
        let c = classify_wall(&k, 3);
        assert_eq!(c.label, WallLabel::Plus);
        assert_relative_eq!(c.margin, 1.0);
    }

    #[test]
    fn bump_margin_is_a_ratio() {
        for a in [-0.9, -0.5, -1.0 / 3.0, 0.0, 2.0] {
            let c = classify_wall(&KFamily::bump(a).unwrap(), 3);
            assert_relative_eq!(c.margin, -2.0 * a / (1.0 + a) - 1.0, epsilon = 1e-14);
        }
        assert!(KFamily::bump(-1.0).is_err());
        assert!(KFamily::bump(-1.5).is_err());
    }

    #[test]
    fn k_minus_examples() {
        let c = KFamily::constant(1.7).unwrap();
        let k = make_k_minus(2, c).unwrap();
        for s in [0.0, 0.3, 4.0] {
            assert_relative_eq!(k.value(s), 1.7, max_relative = 1e-15);
        }
        assert!(make_k_minus(
            3,
            KFamily::RationalDecay {
                base: 0.0,
                amplitude: 1.0
            }
        )
        .is_err());
        let k = make_k_minus(3, KFamily::RationalDecay { base: 1.0, amplitude: 1.0 }).unwrap();
        assert_relative_eq!(k.at_origin(), 4.0 / 3.0, max_relative = 1e-15);
        let k = make_k_minus(5, KFamily::constant(1.0).unwrap()).unwrap();
        assert_relative_eq!(k.at_origin(), 0.4);
        assert_relative_eq!(k.limit_at_infinity(), 1.0);
        assert_relative_eq!(k.value(1.0), 7.0 / 10.0, max_relative = 1e-15);
        // non-monotone input is refused
        assert!(make_k_minus(3, KFamily::bump(-0.5).unwrap()).is_err());
    }

    #[test]
    fn k_minus_transform_is_minus_when_inner_is_concave() {
        for n in [3u32, 4, 6] {
            for a in [0.1, 1.0, 3.0] {
                let k = make_k_minus(n, KFamily::bump(a).unwrap()).unwrap();
                let c = classify_wall(&k, n);
                assert_eq!(c.label, WallLabel::Minus);
                // margin equals inner K''(0)/K(0)
                assert_relative_eq!(c.margin, -2.0 * a / (1.0 + a), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn serde_round_trip() {
        for k in families() {
            let s = serde_json::to_string(&k).unwrap();
            let back: KFamily = serde_json::from_str(&s).unwrap();
            assert_eq!(back, k);
        }
        let k: KFamily = serde_json::from_str(r#"{"kind":"bump","base":1,"amplitude":0.5}"#).unwrap();
        assert_eq!(k, KFamily::bump(0.5).unwrap());
    }
}
