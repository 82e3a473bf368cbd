//! Adaptive Dormand-Prince 5(4) integrator for scalar ODEs `dy/dt = f(t, y)`,
//! with a cubic Hermite interpolant and sign-change event location.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            max_steps: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeFailure {
    MaxSteps { t: f64, y: f64 },
    NonFinite { t: f64, y: f64 },
    StepUnderflow { t: f64, y: f64 },
}

/// Accepted states plus the located event.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub ts: Vec<f64>,
    pub ys: Vec<f64>,
    /// `(t, y)` where the event function changed sign.
    pub event: (f64, f64),
    pub steps: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;
const BISECTION_LIMIT: usize = 200;

/// Cubic Hermite interpolant over one accepted step, used only to bracket
/// the event time.
#[derive(Debug, Clone, Copy)]
struct Hermite {
    t0: f64,
    h: f64,
    y0: f64,
    y1: f64,
    f0: f64,
    f1: f64,
}

impl Hermite {
    fn eval(&self, t: f64) -> f64 {
        let s = (t - self.t0) / self.h;
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.y0
            + (s3 - 2.0 * s2 + s) * self.h * self.f0
            + (-2.0 * s3 + 3.0 * s2) * self.y1
            + (s3 - s2) * self.h * self.f1
    }
}

/// One Dormand-Prince step: `(y_new, f(t + h, y_new), error estimate)`.
fn dopri_step<F: Fn(f64, f64) -> f64>(f: &F, t: f64, y: f64, k1: f64, h: f64) -> (f64, f64, f64) {
    let k2 = f(t + C2 * h, y + h * (A21 * k1));
    let k3 = f(t + C3 * h, y + h * (A31 * k1 + A32 * k2));
    let k4 = f(t + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
    let k5 = f(
        t + C5 * h,
        y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4),
    );
    let k6 = f(
        t + h,
        y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
    );
    let y_new = y + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
    let k7 = f(t + h, y_new);
    let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
    (y_new, k7, err)
}

impl Dopri5 {
    /// Integrate from `(t0, y0)` in the direction of `sign(direction)` until
    /// `event(t, y)` changes sign, then bisect on the interpolant until the
    /// bracketing interval is no wider than `event_tol`.
    #[allow(clippy::too_many_arguments)]
    pub fn integrate_until<F, G>(
        &self,
        f: F,
        t0: f64,
        y0: f64,
        direction: f64,
        h_max: f64,
        event: G,
        event_tol: f64,
    ) -> Result<Trajectory, OdeFailure>
    where
        F: Fn(f64, f64) -> f64,
        G: Fn(f64, f64) -> f64,
    {
        let dir = if direction < 0.0 { -1.0 } else { 1.0 };
        let h_max = h_max.abs().max(f64::MIN_POSITIVE);
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, y);
        if !(k1.is_finite() && y.is_finite()) {
            return Err(OdeFailure::NonFinite { t, y });
        }
        let mut h = dir * self.initial_step(&f, t, y, k1, dir).min(h_max);
        let mut g_prev = event(t, y);

        let mut out = Trajectory {
            ts: vec![t],
            ys: vec![y],
            event: (t, y),
            steps: 0,
            rejected: 0,
        };
        let order_exp = 1.0 / 5.0;

        loop {
            if out.steps + out.rejected >= self.max_steps {
                return Err(OdeFailure::MaxSteps { t, y });
            }
            if h.abs() <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
                return Err(OdeFailure::StepUnderflow { t, y });
            }

            let (y_new, k7, err_est) = dopri_step(&f, t, y, k1, h);
            let t_new = t + h;
            let scale = self.atol + self.rtol * y.abs().max(y_new.abs());
            let err = (err_est / scale).abs();

            if !err.is_finite() || !y_new.is_finite() {
                // Shrink hard and retry; a persistent blow-up ends in underflow.
                out.rejected += 1;
                h *= FAC_MIN;
                if out.rejected > self.max_steps / 2 {
                    return Err(OdeFailure::NonFinite { t, y: y_new });
                }
                continue;
            }

            if err > 1.0 {
                out.rejected += 1;
                let fac = (SAFETY * err.powf(-order_exp)).max(FAC_MIN);
                h *= fac;
                continue;
            }

            out.steps += 1;
            let g_new = event(t_new, y_new);
            if g_prev.signum() != g_new.signum() || g_new == 0.0 {
                let interp = Hermite {
                    t0: t,
                    h,
                    y0: y,
                    y1: y_new,
                    f0: k1,
                    f1: k7,
                };
                let (t_e, _) = locate_event(&interp, t, t_new, y, y_new, &event, event_tol);
                // Re-take the step exactly to the event time for a full-order state.
                let y_e = if t_e == t_new {
                    y_new
                } else if t_e == t {
                    y
                } else {
                    dopri_step(&f, t, y, k1, t_e - t).0
                };
                out.event = (t_e, y_e);
                out.ts.push(out.event.0);
                out.ys.push(out.event.1);
                return Ok(out);
            }

            out.ts.push(t_new);
            out.ys.push(y_new);
            t = t_new;
            y = y_new;
            k1 = k7;
            g_prev = g_new;

            let fac = if err == 0.0 {
                FAC_MAX
            } else {
                (SAFETY * err.powf(-order_exp)).clamp(FAC_MIN, FAC_MAX)
            };
            h = dir * (h.abs() * fac).min(h_max);
        }
    }

    fn initial_step<F: Fn(f64, f64) -> f64>(&self, f: &F, t: f64, y: f64, k1: f64, dir: f64) -> f64 {
        let sk = self.atol + self.rtol * y.abs();
        let d0 = (y / sk).abs();
        let d1 = (k1 / sk).abs();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let k2 = f(t + dir * h0, y + dir * h0 * k1);
        let d2 = ((k2 - k1) / sk).abs() / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 5.0)
        };
        (100.0 * h0).min(h1)
    }
}

fn locate_event<G: Fn(f64, f64) -> f64>(
    interp: &Hermite,
    t_a: f64,
    t_b: f64,
    y_a: f64,
    y_b: f64,
    event: &G,
    tol: f64,
) -> (f64, f64) {
    let (mut lo, mut hi) = (t_a, t_b);
    let (mut y_lo, mut y_hi) = (y_a, y_b);
    let mut g_lo = event(lo, y_lo);
    let mut g_hi = event(hi, y_hi);
    if g_hi == 0.0 {
        return (hi, y_hi);
    }
    for _ in 0..BISECTION_LIMIT {
        if (hi - lo).abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let y_mid = interp.eval(mid);
        let g_mid = event(mid, y_mid);
        if g_mid == 0.0 {
            return (mid, y_mid);
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            y_lo = y_mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            y_hi = y_mid;
            g_hi = g_mid;
        }
    }
    if g_lo.abs() <= g_hi.abs() {
        (lo, y_lo)
    } else {
        (hi, y_hi)
    }
}
