//! Dormand–Prince 5(4) integrator with dense (cubic Hermite) output and a
//! sign-change event.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; `None` picks `1e-3 · |t1 - t0|`.
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
    /// State magnitude treated as divergence.
    pub blowup: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            h_min: 1e-14,
            h_max: f64::INFINITY,
            max_steps: 200_000,
            blowup: 1e12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    /// Reached the requested end point.
    Completed,
    /// The event function changed sign from positive to non-positive at `t`.
    Event { t: f64 },
    /// The state overflowed or became non-finite near `t`.
    Diverged { t: f64 },
}

/// Accepted steps of an integration, with derivative samples for dense output.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    pub ts: Vec<f64>,
    pub ys: Vec<[f64; N]>,
    pub fs: Vec<[f64; N]>,
    pub outcome: Outcome,
}

impl<const N: usize> Trajectory<N> {
    pub fn last(&self) -> (f64, [f64; N]) {
        (*self.ts.last().unwrap(), *self.ys.last().unwrap())
    }

    pub fn t_end(&self) -> f64 {
        *self.ts.last().unwrap()
    }

    /// State at `t` from the cubic Hermite interpolant of the accepted steps.
    pub fn interpolate(&self, t: f64) -> [f64; N] {
        let k = self.segment(t);
        hermite(
            self.ts[k],
            self.ts[k + 1],
            &self.ys[k],
            &self.ys[k + 1],
            &self.fs[k],
            &self.fs[k + 1],
            t,
        )
    }

    fn segment(&self, t: f64) -> usize {
        let m = self.ts.len();
        if m < 2 {
            return 0;
        }
        match self.ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(m - 2),
            Err(i) => i.saturating_sub(1).min(m - 2),
        }
    }
}

fn hermite<const N: usize>(
    t0: f64,
    t1: f64,
    y0: &[f64; N],
    y1: &[f64; N],
    f0: &[f64; N],
    f1: &[f64; N],
    t: f64,
) -> [f64; N] {
    let h = t1 - t0;
    if h == 0.0 {
        return *y0;
    }
    let x = (t - t0) / h;
    let h00 = (1.0 + 2.0 * x) * (1.0 - x) * (1.0 - x);
    let h10 = x * (1.0 - x) * (1.0 - x);
    let h01 = x * x * (3.0 - 2.0 * x);
    let h11 = x * x * (x - 1.0);
    std::array::from_fn(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i])
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `t0` to `t1 > t0`.
///
/// When `event` is given, integration stops at the first point where it turns
/// non-positive after being positive; the crossing is located on the dense
/// output and appended as the final sample.
pub fn integrate<const N: usize, F, G>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: &OdeOptions,
    event: Option<G>,
) -> Result<Trajectory<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    G: Fn(&[f64; N]) -> f64,
{
    if !(t1 > t0) {
        return Err(Error::InvalidInput(format!(
            "integration interval [{t0}, {t1}] is empty"
        )));
    }
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut traj = Trajectory {
        ts: vec![t],
        ys: vec![y],
        fs: vec![k1],
        outcome: Outcome::Completed,
    };
    if !finite(&y) || !finite(&k1) {
        traj.outcome = Outcome::Diverged { t };
        return Ok(traj);
    }
    let mut h = opts
        .h_init
        .unwrap_or(1e-3 * (t1 - t0))
        .min(opts.h_max)
        .min(t1 - t0);
    let mut g_prev = event.as_ref().map(|g| g(&y));

    for _ in 0..opts.max_steps {
        if t >= t1 {
            return Ok(traj);
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        let mut k = [[0.0; N]; 7];
        k[0] = k1;
        for s in 1..7 {
            let mut ys = y;
            for i in 0..N {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                ys[i] += h * acc;
            }
            // the seventh stage sits at the proposed step (FSAL)
            k[s] = f(t + C[s] * h, &ys);
        }
        let y_new = stage_state(&y, &k, h);
        let mut err = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for (s, ks) in k.iter().enumerate() {
                e += E[s] * ks[i];
            }
            let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err += (h * e / scale).powi(2);
        }
        let err = (err / N as f64).sqrt();

        if !err.is_finite() || !finite(&y_new) {
            h *= 0.2;
            if h < opts.h_min * t.abs().max(1.0) {
                traj.outcome = Outcome::Diverged { t };
                return Ok(traj);
            }
            continue;
        }
        if err > 1.0 {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            if h < opts.h_min * t.abs().max(1.0) {
                return Err(Error::Integrator {
                    t,
                    reason: format!("step size underflow (h = {h:e})"),
                });
            }
            continue;
        }

        let t_new = if last { t1 } else { t + h };
        let f_new = k[6];
        if let (Some(g), Some(gp)) = (event.as_ref(), g_prev) {
            let g_new = g(&y_new);
            if gp > 0.0 && g_new <= 0.0 {
                let (tc, yc) = locate_crossing(g, t, t_new, &y, &y_new, &k1, &f_new);
                traj.ts.push(tc);
                traj.ys.push(yc);
                traj.fs.push(f(tc, &yc));
                traj.outcome = Outcome::Event { t: tc };
                return Ok(traj);
            }
            g_prev = Some(g_new);
        }

        t = t_new;
        y = y_new;
        k1 = f_new;
        traj.ts.push(t);
        traj.ys.push(y);
        traj.fs.push(k1);

        if y.iter().any(|v| v.abs() > opts.blowup) {
            traj.outcome = Outcome::Diverged { t };
            return Ok(traj);
        }
        let fac = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (h * fac).min(opts.h_max);
    }
    Err(Error::Integrator {
        t,
        reason: format!("exceeded {} steps", opts.max_steps),
    })
}

fn stage_state<const N: usize>(y: &[f64; N], k: &[[f64; N]; 7], h: f64) -> [f64; N] {
    std::array::from_fn(|i| {
        let mut acc = 0.0;
        for (j, kj) in k.iter().enumerate().take(6) {
            acc += A[6][j] * kj[i];
        }
        y[i] + h * acc
    })
}

fn locate_crossing<const N: usize, G: Fn(&[f64; N]) -> f64>(
    g: &G,
    t0: f64,
    t1: f64,
    y0: &[f64; N],
    y1: &[f64; N],
    f0: &[f64; N],
    f1: &[f64; N],
) -> (f64, [f64; N]) {
    let (mut lo, mut hi) = (t0, t1);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let ym = hermite(t0, t1, y0, y1, f0, f1, mid);
        if g(&ym) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (hi, hermite(t0, t1, y0, y1, f0, f1, hi))
}

fn finite<const N: usize>(y: &[f64; N]) -> bool {
    y.iter().all(|v| v.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    type NoEvent = fn(&[f64; 2]) -> f64;

    #[test]
    fn harmonic_oscillator() {
        let opts = OdeOptions::default();
        let tr = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [0.0, 1.0],
            10.0,
            &opts,
            None::<NoEvent>,
        )
        .unwrap();
        assert_eq!(tr.outcome, Outcome::Completed);
        let (t, y) = tr.last();
        assert_eq!(t, 10.0);
        assert!((y[0] - 10f64.sin()).abs() < 1e-9);
        assert!((tr.interpolate(3.3)[0] - 3.3f64.sin()).abs() < 1e-6);
    }

    #[test]
    fn event_stops_at_zero() {
        let opts = OdeOptions::default();
        let tr = integrate(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [0.0, 1.0],
            10.0,
            &opts,
            Some(|y: &[f64; 2]| y[0]),
        )
        .unwrap();
        // starts at 0, so the first positive-to-nonpositive change is at π
        match tr.outcome {
            Outcome::Event { t } => assert_relative_eq!(t, std::f64::consts::PI, epsilon = 1e-8),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn blowup_is_flagged() {
        let opts = OdeOptions::default();
        // y' = y², y(0) = 1 blows up at t = 1
        let tr = integrate(
            |_, y: &[f64; 1]| [y[0] * y[0]],
            0.0,
            [1.0],
            2.0,
            &opts,
            None::<fn(&[f64; 1]) -> f64>,
        );
        match tr {
            Ok(tr) => assert!(matches!(tr.outcome, Outcome::Diverged { .. })),
            Err(Error::Integrator { t, .. }) => assert!((t - 1.0).abs() < 1e-3),
            Err(e) => panic!("{e}"),
        }
    }
}
