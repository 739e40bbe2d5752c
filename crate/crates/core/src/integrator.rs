//! Forward simulation to extinction or sink, and backward adjoint sweeps.

use crate::error::{Error, Result};
use crate::model::{jacobian, vector_field, State, Strategy, StructParams};
use crate::ode::{Dopri5, FailureKind, StepAction, Tolerances, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub t_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Radius around `(0, 1)` inside which a trajectory counts as converged.
    pub sink_eps: f64,
    /// Bound on `|v(T_s)|` at a located extinction.
    pub event_tol: f64,
    pub max_steps: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            t_max: 1.0e4,
            rel_tol: 1e-11,
            abs_tol: 1e-12,
            sink_eps: 1e-6,
            event_tol: 1e-12,
            max_steps: 2_000_000,
        }
    }
}

impl SimOptions {
    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("t_max", self.t_max),
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("sink_eps", self.sink_eps),
            ("event_tol", self.event_tol),
        ];
        for (name, x) in pos {
            if !(x > 0.0) || x.is_nan() {
                return Err(Error::InvalidInput(format!("{name} = {x} must be > 0")));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidInput("max_steps must be > 0".into()));
        }
        if self.event_tol > self.abs_tol {
            return Err(Error::InvalidInput(format!(
                "event_tol = {} must not exceed abs_tol = {}",
                self.event_tol, self.abs_tol
            )));
        }
        Ok(())
    }

    pub(crate) fn tolerances(&self) -> Tolerances {
        Tolerances {
            rel: self.rel_tol,
            abs: self.abs_tol,
        }
    }
}

/// Sampled path `(t, u, v, a)`; `times` is strictly increasing from 0.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub controls: Vec<f64>,
}

impl Trajectory {
    fn push(&mut self, t: f64, s: State, a: f64) {
        if self.times.last().is_some_and(|&last| t <= last) {
            return;
        }
        self.times.push(t);
        self.states.push(s);
        self.controls.push(a);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> Option<State> {
        self.states.last().copied()
    }

    pub fn end_time(&self) -> Option<f64> {
        self.times.last().copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    /// `v` reached zero at `t_s` with `u_final > 0`.
    Extinction { t_s: f64, u_final: f64 },
    ConvergedToSink { t_enter: f64 },
    Undecided { t_max: f64 },
    /// The initial state already has `v <= 0` or `u < 0`.
    DegenerateStart,
}

impl Outcome {
    pub fn is_extinction(&self) -> bool {
        matches!(self, Outcome::Extinction { .. })
    }

    pub fn stopping_time(&self) -> f64 {
        match self {
            Outcome::Extinction { t_s, .. } => *t_s,
            _ => f64::INFINITY,
        }
    }
}

/// Extra stopping condition: integration halts when `g` turns from
/// positive to non-positive.
pub(crate) struct Watch<'a> {
    pub g: &'a dyn Fn(State) -> f64,
}

pub(crate) enum SimEnd {
    Outcome(Outcome),
    Watched { t: f64, state: State },
}

fn inward_at_sink(s: State, a: f64, p: &StructParams) -> bool {
    let (du, dv) = vector_field(s, a, p);
    du * (0.0 - s.u) + dv * (1.0 - s.v) > 0.0
}

fn control_at(strat: &Strategy, level: Option<f64>, t: f64, s: State, p: &StructParams) -> f64 {
    match (level, strat) {
        (Some(a), _) => a,
        // a_s -> inf as u -> 0+
        (None, Strategy::SingularFeedback { max, .. }) if !(s.u > 0.0) => *max,
        (None, _) => strat.value(t, s, p).unwrap_or(0.0),
    }
}

pub(crate) fn simulate_watch(
    s0: State,
    strat: &Strategy,
    p: &StructParams,
    opts: &SimOptions,
    watch: Option<Watch<'_>>,
) -> Result<(Trajectory, SimEnd)> {
    opts.validate()?;
    p.validate()?;
    strat.validate()?;
    if !s0.is_finite() {
        return Err(Error::InvalidInput(format!("initial state {s0:?} not finite")));
    }
    let mut traj = Trajectory::default();
    let a0 = control_at(strat, None, 0.0, s0, p);
    traj.push(0.0, s0, a0);
    if s0.v <= 0.0 || s0.u < 0.0 {
        return Ok((traj, SimEnd::Outcome(Outcome::DegenerateStart)));
    }
    if let Some(w) = &watch {
        if !((w.g)(s0) > 0.0) {
            return Ok((traj, SimEnd::Watched { t: 0.0, state: s0 }));
        }
    }
    if s0.dist(&State::SINK) < opts.sink_eps && inward_at_sink(s0, a0, p) {
        return Ok((traj, SimEnd::Outcome(Outcome::ConvergedToSink { t_enter: 0.0 })));
    }

    let mut bounds = vec![0.0];
    bounds.extend(strat.breakpoints().into_iter().filter(|&t| t < opts.t_max));
    bounds.push(opts.t_max);

    let mut solver = Dopri5::new(opts.tolerances(), opts.max_steps);
    let mut y: Vec2 = s0.to_array();
    let mut end: Option<SimEnd> = None;

    for seg in bounds.windows(2) {
        let (ta, tb) = (seg[0], seg[1]);
        let level = if strat.is_feedback() {
            None
        } else {
            Some(strat.value(ta, State::from_array(y), p)?)
        };
        let rhs = |t: f64, y: &Vec2| {
            let s = State::from_array(*y);
            let a = control_at(strat, level, t, s, p);
            let (du, dv) = vector_field(s, a, p);
            [du, dv]
        };
        let mut last_y = y;
        let res = solver.integrate(rhs, ta, y, tb, |step| {
            if let Some((t, yy)) = step.locate(|y| y[1]) {
                if yy[0] > 0.0 {
                    let s = State::from_array(yy);
                    traj.push(t, s, control_at(strat, level, t, s, p));
                    end = Some(SimEnd::Outcome(Outcome::Extinction {
                        t_s: t,
                        u_final: yy[0],
                    }));
                    return StepAction::Stop;
                }
            }
            if let Some(w) = &watch {
                if let Some((t, yy)) = step.locate(|y| (w.g)(State::from_array(*y))) {
                    let s = State::from_array(yy);
                    traj.push(t, s, control_at(strat, level, t, s, p));
                    end = Some(SimEnd::Watched { t, state: s });
                    return StepAction::Stop;
                }
            }
            let s = State::from_array(step.y1);
            let a = control_at(strat, level, step.t1, s, p);
            traj.push(step.t1, s, a);
            last_y = step.y1;
            if s.dist(&State::SINK) < opts.sink_eps && inward_at_sink(s, a, p) {
                end = Some(SimEnd::Outcome(Outcome::ConvergedToSink { t_enter: step.t1 }));
                return StepAction::Stop;
            }
            if !(s.u > 0.0) && s.v > 0.0 {
                end = Some(SimEnd::Outcome(Outcome::ConvergedToSink { t_enter: step.t1 }));
                return StepAction::Stop;
            }
            StepAction::Continue
        });
        match res {
            Ok(_) => {}
            Err(f) if f.kind == FailureKind::StepBudget => {
                return Err(Error::StepBudget {
                    max_steps: opts.max_steps,
                    t: f.t,
                    partial: Box::new(traj),
                });
            }
            Err(f) => {
                return Err(Error::Numeric(format!(
                    "integration failed at t = {} ({:?})",
                    f.t, f.kind
                )))
            }
        }
        if let Some(e) = end {
            return Ok((traj, e));
        }
        y = last_y;
        if tb < opts.t_max && traj.times.last() == Some(&tb) {
            // controls are right-continuous at switching times
            let s = State::from_array(y);
            *traj.controls.last_mut().unwrap() = control_at(strat, None, tb, s, p);
        }
    }
    Ok((
        traj,
        SimEnd::Outcome(Outcome::Undecided { t_max: opts.t_max }),
    ))
}

/// Integrates the model from `s0` under `strat` until extinction of `v`,
/// arrival at the sink `(0, 1)`, or `t_max`.
pub fn simulate(
    s0: State,
    strat: &Strategy,
    p: &StructParams,
    opts: &SimOptions,
) -> Result<(Trajectory, Outcome)> {
    let (traj, end) = simulate_watch(s0, strat, p, opts, None)?;
    match end {
        SimEnd::Outcome(o) => Ok((traj, o)),
        SimEnd::Watched { .. } => unreachable!("no watch installed"),
    }
}

/// `T_s` on extinction, `+inf` otherwise.
pub fn stopping_time(s0: State, strat: &Strategy, p: &StructParams, opts: &SimOptions) -> Result<f64> {
    Ok(simulate(s0, strat, p, opts)?.1.stopping_time())
}

/// Adjoint samples aligned with the trajectory they were computed on.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AdjointPath {
    pub times: Vec<f64>,
    pub p_u: Vec<f64>,
    pub p_v: Vec<f64>,
}

fn hermite(t0: f64, t1: f64, y0: Vec2, y1: Vec2, d0: Vec2, d1: Vec2, t: f64) -> Vec2 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    let mut out = [0.0; 2];
    for i in 0..2 {
        out[i] = h00 * y0[i] + h10 * h * d0[i] + h01 * y1[i] + h11 * h * d1[i];
    }
    out
}

/// Integrates `p' = -J(x, a)^T p` backward from the end of `traj` with
/// `p(T) = terminal`.
///
/// Between stored samples the state is reconstructed by cubic Hermite
/// interpolation using the field as the derivative.
pub fn integrate_adjoint(
    traj: &Trajectory,
    strat: &Strategy,
    p: &StructParams,
    terminal: (f64, f64),
    opts: &SimOptions,
) -> Result<AdjointPath> {
    if traj.is_empty() {
        return Err(Error::InvalidInput("empty trajectory".into()));
    }
    let n = traj.len();
    let mut pu = vec![0.0; n];
    let mut pv = vec![0.0; n];
    pu[n - 1] = terminal.0;
    pv[n - 1] = terminal.1;
    let t_end = traj.times[n - 1];
    let mut solver = Dopri5::new(opts.tolerances(), opts.max_steps);
    let mut lam: Vec2 = [terminal.0, terminal.1];
    for k in (0..n - 1).rev() {
        let (t0, t1) = (traj.times[k], traj.times[k + 1]);
        let (x0, x1) = (traj.states[k], traj.states[k + 1]);
        let mid = 0.5 * (t0 + t1);
        let level = if strat.is_feedback() {
            None
        } else {
            Some(strat.value(mid, x0, p)?)
        };
        let a0 = control_at(strat, level, t0, x0, p);
        let a1 = control_at(strat, level, t1, x1, p);
        let f0 = vector_field(x0, a0, p);
        let f1 = vector_field(x1, a1, p);
        let state_at = |t: f64| {
            State::from_array(hermite(
                t0,
                t1,
                x0.to_array(),
                x1.to_array(),
                [f0.0, f0.1],
                [f1.0, f1.1],
                t,
            ))
        };
        // tau = t_end - t runs forward while t runs backward
        let rhs = |tau: f64, l: &Vec2| {
            let t = t_end - tau;
            let s = state_at(t);
            let a = control_at(strat, level, t, s, p);
            let j = jacobian(s, a, p);
            [j[0][0] * l[0] + j[1][0] * l[1], j[0][1] * l[0] + j[1][1] * l[1]]
        };
        let mut out = lam;
        solver
            .integrate(rhs, t_end - t1, lam, t_end - t0, |step| {
                out = step.y1;
                StepAction::Continue
            })
            .map_err(|f| Error::Numeric(format!("adjoint sweep failed ({:?})", f.kind)))?;
        lam = out;
        pu[k] = lam[0];
        pv[k] = lam[1];
    }
    Ok(AdjointPath {
        times: traj.times.clone(),
        p_u: pu,
        p_v: pv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: f64, rho: f64) -> StructParams {
        StructParams::new(c, rho).unwrap()
    }

    #[test]
    fn rho_one_extinction_time() {
        let (traj, out) = simulate(
            State::new(0.5, 0.2),
            &Strategy::Constant(1.0),
            &p(2.0, 1.0),
            &SimOptions::default(),
        )
        .unwrap();
        let t_s = out.stopping_time();
        assert!((t_s - 5f64.ln() / 2.0).abs() < 1e-4, "T_s = {t_s}");
        let last = traj.last_state().unwrap();
        assert!(last.v.abs() <= SimOptions::default().event_tol && last.u > 0.0);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn v_axis_goes_to_sink() {
        let opts = SimOptions::default();
        for strat in [Strategy::Constant(0.0), Strategy::Constant(3.0)] {
            let t = stopping_time(State::new(0.0, 0.5), &strat, &p(1.0, 1.0), &opts).unwrap();
            assert!(t.is_infinite());
        }
        let t = stopping_time(State::new(0.1, 0.9), &Strategy::Constant(0.5), &p(1.0, 1.0), &opts)
            .unwrap();
        assert!(t.is_infinite());
    }

    #[test]
    fn degenerate_start() {
        let (_, out) = simulate(
            State::new(0.5, 0.0),
            &Strategy::Constant(1.0),
            &p(1.0, 1.0),
            &SimOptions::default(),
        )
        .unwrap();
        assert_eq!(out, Outcome::DegenerateStart);
    }

    #[test]
    fn breakpoints_are_sampled() {
        let strat = Strategy::heaviside(0.2, 0.7, 1.25).unwrap();
        let (traj, _) = simulate(
            State::new(0.3, 0.6),
            &strat,
            &p(1.0, 2.0),
            &SimOptions::default().with_t_max(3.0),
        )
        .unwrap();
        let k = traj.times.iter().position(|&t| t == 1.25).expect("breakpoint stored");
        assert_eq!(traj.controls[k], 0.7);
        assert_eq!(traj.controls[k - 1], 0.2);
    }

    #[test]
    fn budget_error_carries_partial_path() {
        let opts = SimOptions {
            max_steps: 3,
            ..SimOptions::default()
        };
        match simulate(State::new(0.3, 0.6), &Strategy::Constant(0.5), &p(1.0, 2.0), &opts) {
            Err(Error::StepBudget { partial, .. }) => assert!(partial.len() >= 1),
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn invalid_options_rejected() {
        let opts = SimOptions {
            event_tol: 1.0,
            ..SimOptions::default()
        };
        assert!(simulate(State::new(0.3, 0.6), &Strategy::Constant(0.5), &p(1.0, 2.0), &opts).is_err());
    }

    #[test]
    fn zero_terminal_adjoint_stays_zero() {
        let traj = Trajectory {
            times: vec![0.0, 0.5, 1.0],
            states: vec![State::new(0.0, 1.0); 3],
            controls: vec![1.0; 3],
        };
        let adj = integrate_adjoint(
            &traj,
            &Strategy::Constant(1.0),
            &p(1.0, 1.0),
            (0.0, 0.0),
            &SimOptions::default(),
        )
        .unwrap();
        assert!(adj.p_u.iter().chain(&adj.p_v).all(|&x| x == 0.0));
        assert!(integrate_adjoint(
            &Trajectory::default(),
            &Strategy::Constant(1.0),
            &p(1.0, 1.0),
            (0.0, 0.0),
            &SimOptions::default()
        )
        .is_err());
    }

    #[test]
    fn adjoint_conserves_hamiltonian_for_constant_control() {
        // with constant control H = p.f is a first integral of the joint flow
        let pp = p(4.0, 0.5);
        let strat = Strategy::Constant(1.5);
        let (traj, out) = simulate(State::new(0.6, 0.15), &strat, &pp, &SimOptions::default()).unwrap();
        assert!(out.is_extinction());
        let adj = integrate_adjoint(&traj, &strat, &pp, (0.3, -1.0), &SimOptions::default()).unwrap();
        let h: Vec<f64> = (0..traj.len())
            .map(|k| {
                let (du, dv) = vector_field(traj.states[k], 1.5, &pp);
                adj.p_u[k] * du + adj.p_v[k] * dv
            })
            .collect();
        let spread = h.iter().cloned().fold(f64::MIN, f64::max) - h.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread < 1e-6, "H spread {spread}");
    }
}
