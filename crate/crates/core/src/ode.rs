//! Dormand-Prince 5(4) stepper with continuous output for planar systems.

pub type Vec2 = [f64; 2];

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

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[inline]
fn axpy(y: &Vec2, h: f64, terms: &[(f64, &Vec2)]) -> Vec2 {
    let mut out = *y;
    for (w, k) in terms {
        out[0] += h * w * k[0];
        out[1] += h * w * k[1];
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

/// One accepted step together with its continuous extension.
#[derive(Debug, Clone)]
pub struct DenseStep {
    pub t0: f64,
    pub t1: f64,
    pub y0: Vec2,
    pub y1: Vec2,
    rcont: [Vec2; 5],
}

impl DenseStep {
    pub fn h(&self) -> f64 {
        self.t1 - self.t0
    }

    /// Fourth-order interpolant, valid for `t` between `t0` and `t1`.
    pub fn eval(&self, t: f64) -> Vec2 {
        let h = self.h();
        if h == 0.0 {
            return self.y0;
        }
        let th = (t - self.t0) / h;
        let th1 = 1.0 - th;
        let r = &self.rcont;
        let mut out = [0.0; 2];
        for i in 0..2 {
            out[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        out
    }

    /// Locates a sign change of `g` from `> 0` to `<= 0` inside the step.
    ///
    /// A few interior probes catch crossings that re-cross before `t1`.
    /// Returns the earliest bracket refined by bisection.
    pub fn locate<G: Fn(&Vec2) -> f64>(&self, g: G) -> Option<(f64, Vec2)> {
        const PROBES: usize = 4;
        let mut ta = self.t0;
        if !(g(&self.y0) > 0.0) {
            return None;
        }
        for k in 1..=PROBES {
            let tb = if k == PROBES {
                self.t1
            } else {
                self.t0 + self.h() * k as f64 / PROBES as f64
            };
            let yb = if k == PROBES { self.y1 } else { self.eval(tb) };
            let gb = g(&yb);
            if gb <= 0.0 {
                return Some(self.bisect(&g, ta, tb));
            }
            ta = tb;
        }
        None
    }

    fn bisect<G: Fn(&Vec2) -> f64>(&self, g: &G, mut ta: f64, mut tb: f64) -> (f64, Vec2) {
        // g(ta) > 0 >= g(tb)
        let mut yb = self.eval(tb);
        let mut ya = self.eval(ta);
        for _ in 0..200 {
            let tm = 0.5 * (ta + tb);
            if tm == ta || tm == tb {
                break;
            }
            let ym = self.eval(tm);
            if g(&ym) > 0.0 {
                ta = tm;
                ya = ym;
            } else {
                tb = tm;
                yb = ym;
            }
        }
        if g(&ya).abs() < g(&yb).abs() {
            (ta, ya)
        } else {
            (tb, yb)
        }
    }
}

pub enum StepAction {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrationEnd {
    /// Reached the requested final time.
    Reached,
    /// The observer asked to stop.
    Stopped,
}

#[derive(Debug, Clone, Copy)]
pub struct Failure {
    pub t: f64,
    pub y: Vec2,
    pub kind: FailureKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    StepBudget,
    StepUnderflow,
    NonFinite,
}

/// Adaptive integrator carrying its step-size state across calls.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub tol: Tolerances,
    pub h_max: f64,
    pub max_steps: usize,
    pub steps_taken: usize,
    h_next: Option<f64>,
}

impl Dopri5 {
    pub fn new(tol: Tolerances, max_steps: usize) -> Self {
        Self {
            tol,
            h_max: f64::INFINITY,
            max_steps,
            steps_taken: 0,
            h_next: None,
        }
    }

    pub fn with_h_max(mut self, h_max: f64) -> Self {
        self.h_max = h_max;
        self
    }

    fn err_norm(&self, y0: &Vec2, y1: &Vec2, err: &Vec2) -> f64 {
        let mut acc = 0.0;
        for i in 0..2 {
            let sc = self.tol.abs + self.tol.rel * y0[i].abs().max(y1[i].abs());
            acc += (err[i] / sc).powi(2);
        }
        (acc / 2.0).sqrt()
    }

    fn initial_step<F: Fn(f64, &Vec2) -> Vec2>(&self, f: &F, t0: f64, y0: &Vec2, f0: &Vec2) -> f64 {
        let sc = |i: usize| self.tol.abs + self.tol.rel * y0[i].abs();
        let d0 = ((y0[0] / sc(0)).powi(2) + (y0[1] / sc(1)).powi(2)).sqrt() / 2f64.sqrt();
        let d1 = ((f0[0] / sc(0)).powi(2) + (f0[1] / sc(1)).powi(2)).sqrt() / 2f64.sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1 = axpy(y0, h0, &[(1.0, f0)]);
        let f1 = f(t0 + h0, &y1);
        let d2 = (((f1[0] - f0[0]) / sc(0)).powi(2) + ((f1[1] - f0[1]) / sc(1)).powi(2)).sqrt()
            / 2f64.sqrt()
            / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 5.0)
        };
        (100.0 * h0).min(h1).min(self.h_max)
    }

    /// Integrates `y' = f(t, y)` from `t0` to `t1 > t0`, handing every
    /// accepted step to `observer`.
    pub fn integrate<F, O>(
        &mut self,
        f: F,
        t0: f64,
        y0: Vec2,
        t1: f64,
        mut observer: O,
    ) -> Result<IntegrationEnd, Failure>
    where
        F: Fn(f64, &Vec2) -> Vec2,
        O: FnMut(&DenseStep) -> StepAction,
    {
        let mut t = t0;
        let mut y = y0;
        if t1 <= t0 {
            return Ok(IntegrationEnd::Reached);
        }
        let mut k1 = f(t, &y);
        let mut h = match self.h_next {
            Some(h) => h.min(self.h_max),
            None => self.initial_step(&f, t, &y, &k1),
        };
        loop {
            if self.steps_taken >= self.max_steps {
                return Err(Failure {
                    t,
                    y,
                    kind: FailureKind::StepBudget,
                });
            }
            let remaining = t1 - t;
            let h_planned = h;
            let last = h >= remaining * (1.0 - 1e-12);
            if last {
                h = remaining;
            }
            let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
            let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(
                t + C5 * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            );
            let k6 = f(
                t + h,
                &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let t_new = if last { t1 } else { t + h };
            let k7 = f(t_new, &y_new);
            let mut err = [0.0; 2];
            for i in 0..2 {
                err[i] = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            let en = self.err_norm(&y, &y_new, &err);
            self.steps_taken += 1;
            if !en.is_finite() || !y_new[0].is_finite() || !y_new[1].is_finite() {
                h *= 0.1;
                if h.abs() < 1e-14 * t.abs().max(1.0) {
                    return Err(Failure {
                        t,
                        y,
                        kind: FailureKind::NonFinite,
                    });
                }
                continue;
            }
            let factor = if en == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * en.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if en <= 1.0 {
                let mut rcont = [[0.0; 2]; 5];
                for i in 0..2 {
                    let dy = y_new[i] - y[i];
                    let bspl = h * k1[i] - dy;
                    rcont[0][i] = y[i];
                    rcont[1][i] = dy;
                    rcont[2][i] = bspl;
                    rcont[3][i] = dy - h * k7[i] - bspl;
                    rcont[4][i] = h
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i]
                            + D7 * k7[i]);
                }
                let step = DenseStep {
                    t0: t,
                    t1: t_new,
                    y0: y,
                    y1: y_new,
                    rcont,
                };
                let h_suggest = (h * factor).min(self.h_max);
                self.h_next = Some(if last {
                    h_suggest.max(h_planned).min(self.h_max)
                } else {
                    h_suggest
                });
                t = t_new;
                y = y_new;
                k1 = k7;
                if let StepAction::Stop = observer(&step) {
                    return Ok(IntegrationEnd::Stopped);
                }
                if last {
                    return Ok(IntegrationEnd::Reached);
                }
                h = h_suggest;
            } else {
                h *= factor.min(1.0);
                if h.abs() < 1e-15 * t.abs().max(1.0) {
                    return Err(Failure {
                        t,
                        y,
                        kind: FailureKind::StepUnderflow,
                    });
                }
            }
        }
    }
}
