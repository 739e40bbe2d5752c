//! The separatrix between the extinction basin and the basin of `(0, 1)`.

use crate::equilibria::{eigenvalues_2x2, saddle_limit, saddle_point};
use crate::error::{Error, Result};
use crate::integrator::SimOptions;
use crate::model::{jacobian, vector_field, State, StructParams};
use crate::ode::{Dopri5, FailureKind, StepAction, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    pub sim: SimOptions,
    /// Seed offset from the equilibrium along the manifold direction.
    pub delta: f64,
    /// Seed offset along the center direction when `ac = 1`; the slow
    /// algebraic escape from the origin makes `delta` impractically small.
    pub center_delta: f64,
    /// Half-width of the band treated as lying on the curve.
    pub curve_tol: f64,
    /// Dense-output samples stored per accepted step.
    pub samples_per_step: usize,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            sim: SimOptions::default(),
            delta: 1e-7,
            center_delta: 1e-3,
            curve_tol: 1e-4,
            samples_per_step: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeparatrixRegime {
    /// `ac < 1`: stable manifold of the interior saddle.
    SaddleInterior,
    /// `ac > 1`: stable manifold of the origin.
    SaddleOrigin,
    /// `ac = 1`: center manifold of the origin.
    CenterDegenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasinClass {
    InE,
    InB,
    OnM,
}

/// Increasing graph `v = gamma(u)` on `[0, u_M]`, evaluated by monotone
/// piecewise-cubic Hermite interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatrixCurve {
    pub u_samples: Vec<f64>,
    pub v_samples: Vec<f64>,
    pub endpoint: State,
    pub regime: SeparatrixRegime,
    pub curve_tol: f64,
    slopes: Vec<f64>,
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let del: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    if n == 2 {
        return vec![del[0]; 2];
    }
    let mut d = vec![0.0; n];
    for k in 1..n - 1 {
        if del[k - 1] * del[k] <= 0.0 {
            continue;
        }
        let w1 = 2.0 * h[k] + h[k - 1];
        let w2 = h[k] + 2.0 * h[k - 1];
        d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s.signum() != d0.signum() {
            0.0
        } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    d[0] = end(h[0], h[1], del[0], del[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    d
}

impl SeparatrixCurve {
    pub fn from_samples(
        u: Vec<f64>,
        v: Vec<f64>,
        endpoint: State,
        regime: SeparatrixRegime,
        curve_tol: f64,
    ) -> Result<Self> {
        if u.len() != v.len() || u.len() < 2 {
            return Err(Error::Trace("need at least two matching samples".into()));
        }
        if u.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Trace("u samples must be strictly increasing".into()));
        }
        let slopes = pchip_slopes(&u, &v);
        Ok(Self {
            u_samples: u,
            v_samples: v,
            endpoint,
            regime,
            curve_tol,
            slopes,
        })
    }

    pub fn u_max(&self) -> f64 {
        *self.u_samples.last().unwrap()
    }

    /// `gamma(u)` for `u` in `[0, u_M]`, `None` outside. Abscissae past
    /// `u_M` by less than `1e-9` are clamped to it.
    pub fn eval(&self, u: f64) -> Option<f64> {
        let x = &self.u_samples;
        if !(u >= x[0]) || u > self.u_max() + 1e-9 {
            return None;
        }
        let u = u.min(self.u_max());
        let k = match x.partition_point(|&xi| xi <= u) {
            0 => 0,
            i if i >= x.len() => x.len() - 2,
            i => i - 1,
        };
        let h = x[k + 1] - x[k];
        let s = (u - x[k]) / h;
        let (y0, y1) = (self.v_samples[k], self.v_samples[k + 1]);
        let (d0, d1) = (self.slopes[k], self.slopes[k + 1]);
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        Some(h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1)
    }

    /// Vertical comparison against the curve; points right of `u_M`
    /// belong to the extinction basin.
    pub fn classify(&self, s: State) -> BasinClass {
        let tol = self.curve_tol;
        match self.eval(s.u.max(0.0)) {
            Some(g) => {
                let d = s.v - g;
                if d.abs() < tol {
                    BasinClass::OnM
                } else if d < 0.0 {
                    BasinClass::InE
                } else {
                    BasinClass::InB
                }
            }
            None if s.u - self.u_max() < tol && (s.v - self.endpoint.v).abs() < tol => {
                BasinClass::OnM
            }
            None => BasinClass::InE,
        }
    }

    /// Euclidean distance from `s` to the sampled polyline.
    pub fn distance(&self, s: State) -> f64 {
        let (x, y) = (&self.u_samples, &self.v_samples);
        let mut best = f64::INFINITY;
        for k in 0..x.len() - 1 {
            let (ax, ay) = (x[k], y[k]);
            let (dx, dy) = (x[k + 1] - ax, y[k + 1] - ay);
            if s.u < ax - best || s.u > x[k + 1] + best {
                continue;
            }
            let l2 = dx * dx + dy * dy;
            let t = if l2 > 0.0 {
                (((s.u - ax) * dx + (s.v - ay) * dy) / l2).clamp(0.0, 1.0)
            } else {
                0.0
            };
            best = best.min((s.u - ax - t * dx).hypot(s.v - ay - t * dy));
        }
        best
    }

    /// Intersection with the segment `u + v = 1`.
    pub fn diagonal_crossing(&self) -> Option<State> {
        let g = |u: f64| self.eval(u).map(|v| v + u - 1.0);
        let (mut lo, mut hi) = (0.0, self.u_max());
        if !(g(hi)? >= 0.0) || !(g(lo)? < 0.0) {
            return None;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid)? < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        let u = 0.5 * (lo + hi);
        Some(State::new(u, self.eval(u)?))
    }
}

enum Stop {
    Boundary(State),
    Origin,
}

/// Follows the reversed flow from `start` until it leaves the unit square
/// through `u = 1` or `v = 1`, or collapses onto the origin.
fn shoot(start: State, a: f64, p: &StructParams, opts: &TraceOptions) -> Result<(Vec<State>, Stop)> {
    let rhs = |_t: f64, y: &Vec2| {
        let (du, dv) = vector_field(State::from_array(*y), a, p);
        [-du, -dv]
    };
    let mut solver = Dopri5::new(opts.sim.tolerances(), opts.sim.max_steps);
    let mut pts = vec![start];
    let mut stop: Option<Stop> = None;
    let n = opts.samples_per_step.max(1);
    let origin_radius = 1e-3 * opts.delta;
    let res = solver.integrate(rhs, 0.0, start.to_array(), 1e15, |step| {
        let exit = |y: &Vec2| (1.0 - y[0]).min(1.0 - y[1]);
        if let Some((t, y)) = step.locate(exit) {
            for i in 1..n {
                let ti = step.t0 + (t - step.t0) * i as f64 / n as f64;
                pts.push(State::from_array(step.eval(ti)));
            }
            let s = State::new(y[0].min(1.0), y[1].min(1.0));
            pts.push(s);
            stop = Some(Stop::Boundary(s));
            return StepAction::Stop;
        }
        for i in 1..=n {
            let ti = step.t0 + step.h() * i as f64 / n as f64;
            pts.push(State::from_array(step.eval(ti)));
        }
        let y = step.y1;
        if y[0].hypot(y[1]) < origin_radius || y[0] < 0.0 || y[1] < 0.0 {
            stop = Some(Stop::Origin);
            return StepAction::Stop;
        }
        StepAction::Continue
    });
    match res {
        Ok(_) => {}
        Err(f) if f.kind == FailureKind::StepBudget => {
            return Err(Error::Trace(format!(
                "step budget exhausted at t = {} before reaching the boundary",
                f.t
            )))
        }
        Err(f) => return Err(Error::Trace(format!("integration failed ({:?})", f.kind))),
    }
    match stop {
        Some(s) => Ok((pts, s)),
        None => Err(Error::Trace("trace horizon reached".into())),
    }
}

fn regime_of(a: f64, p: &StructParams) -> SeparatrixRegime {
    let ac = a * p.c;
    if (ac - 1.0).abs() <= 1e-12 {
        SeparatrixRegime::CenterDegenerate
    } else if ac < 1.0 {
        SeparatrixRegime::SaddleInterior
    } else {
        SeparatrixRegime::SaddleOrigin
    }
}

fn stable_direction(s: State, a: f64, p: &StructParams) -> (f64, f64) {
    let j = jacobian(s, a, p);
    let eig = eigenvalues_2x2(j);
    let lam = eig[0].re.min(eig[1].re);
    let c1 = (j[0][1], lam - j[0][0]);
    let c2 = (lam - j[1][1], j[1][0]);
    let (x, y) = if c1.0.hypot(c1.1) >= c2.0.hypot(c2.1) { c1 } else { c2 };
    let n = x.hypot(y);
    let (x, y) = (x / n, y / n);
    if x < 0.0 {
        (-x, -y)
    } else {
        (x, y)
    }
}

/// Traces the separatrix for constant `a > 0` and `rho > 0`.
pub fn trace_gamma(a: f64, p: &StructParams, opts: &TraceOptions) -> Result<SeparatrixCurve> {
    p.validate()?;
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Precondition(format!("trace needs a > 0, got {a}")));
    }
    if !(p.rho > 0.0) || !(p.c > 0.0) {
        return Err(Error::Precondition("trace needs rho > 0 and c > 0".into()));
    }
    let regime = regime_of(a, p);
    let d = opts.delta;
    let mut pts = vec![State::ORIGIN];
    let end = match regime {
        SeparatrixRegime::SaddleInterior => {
            let s = saddle_point(a, p).expect("interior saddle");
            let (ex, ey) = stable_direction(s, a, p);
            let (inner, stop) = shoot(State::new(s.u - d * ex, s.v - d * ey), a, p, opts)?;
            if let Stop::Boundary(b) = stop {
                return Err(Error::Trace(format!("inner branch left the square at {b:?}")));
            }
            pts.extend(inner.into_iter().rev());
            pts.push(s);
            let (outer, stop) = shoot(State::new(s.u + d * ex, s.v + d * ey), a, p, opts)?;
            pts.extend(outer);
            stop
        }
        _ => {
            let (x, y) = (p.rho - 1.0 + a * p.c, a);
            let n = x.hypot(y);
            let d = if regime == SeparatrixRegime::CenterDegenerate {
                opts.center_delta
            } else {
                d
            };
            for k in (1..=20).rev() {
                let r = d * 0.5f64.powi(k);
                pts.push(State::new(r * x / n, r * y / n));
            }
            let (branch, stop) = shoot(State::new(d * x / n, d * y / n), a, p, opts)?;
            pts.extend(branch);
            stop
        }
    };
    let endpoint = match end {
        Stop::Boundary(b) => b,
        Stop::Origin => return Err(Error::Trace("outer branch collapsed onto the origin".into())),
    };

    let mut u = Vec::with_capacity(pts.len());
    let mut v: Vec<f64> = Vec::with_capacity(pts.len());
    for s in pts {
        if let Some(&last) = u.last() {
            if !(s.u > last + 1e-13) {
                continue;
            }
        }
        if let Some(&lv) = v.last() {
            if s.v < lv - opts.curve_tol {
                return Err(Error::Trace(format!(
                    "traced curve not increasing near u = {}",
                    s.u
                )));
            }
        }
        let vv = v.last().map_or(s.v, |&lv: &f64| s.v.max(lv));
        u.push(s.u);
        v.push(vv);
    }
    if let (Some(lu), Some(lv)) = (u.last_mut(), v.last_mut()) {
        *lu = endpoint.u.max(*lu);
        *lv = endpoint.v;
    }
    SeparatrixCurve::from_samples(u, v, endpoint, regime, opts.curve_tol)
}

/// Classifies `s0` by tracing the separatrix for `a` first.
pub fn classify_point(s0: State, a: f64, p: &StructParams, opts: &TraceOptions) -> Result<BasinClass> {
    Ok(trace_gamma(a, p, opts)?.classify(s0))
}

/// The `a -> 0` limit of the separatrix, `v_s0 (u / u_s0)^rho`.
pub fn gamma0(u: f64, p: &StructParams) -> f64 {
    let l = saddle_limit(p);
    l.v * (u / l.u).powf(p.rho)
}

/// Right end of the limit curve: `min{1, u_s0 / v_s0^(1/rho)}`.
pub fn gamma0_u_max(p: &StructParams) -> f64 {
    let l = saddle_limit(p);
    (l.u / l.v.powf(1.0 / p.rho)).min(1.0)
}

/// Rest point reached with `a = 0`: the flow conserves `v / u^rho`, so the
/// limit `(x, 1 - x)` solves `mu x^rho + x - 1 = 0`.
pub fn a0_limit_equilibrium(s0: State, p: &StructParams) -> Result<State> {
    if !(s0.u > 0.0) || !(s0.v > 0.0) || !s0.is_finite() {
        return Err(Error::InvalidInput(format!(
            "start {s0:?} must have u > 0 and v > 0"
        )));
    }
    let mu = s0.v / s0.u.powf(p.rho);
    let g = |x: f64| mu * x.powf(p.rho) + x - 1.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let x = 0.5 * (lo + hi);
    Ok(State::new(x, 1.0 - x))
}
