//! Second-order forward-mode derivatives of closed-form radial functions.

use num_dual::{Dual2_64, DualNum};

/// Scalar type accepted by the closed-form coefficient functions: plain `f64`
/// or a second-order dual number.
pub trait Real: DualNum<Primitive = f64> + Copy {}

impl<T: DualNum<Primitive = f64> + Copy> Real for T {}

/// Value, first and second derivative of a scalar function at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub fn new(value: f64, d1: f64, d2: f64) -> Self {
        Self { value, d1, d2 }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(value, 0.0, 0.0)
    }
}

/// Evaluates `f` together with its exact first and second derivative at `x`.
pub fn jet<F>(f: F, x: f64) -> Jet
where
    F: Fn(Dual2_64) -> Dual2_64,
{
    let r = f(Dual2_64::from_re(x).derivative());
    Jet::new(r.re, r.v1, r.v2)
}

/// Constant lifted into the generic scalar type.
#[inline]
pub fn cst<D: Real>(c: f64) -> D {
    D::from(c)
}
