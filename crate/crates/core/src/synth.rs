//! Winning strategies: constant search and Heaviside constructions.

use crate::equilibria::saddle_limit;
use crate::error::{Error, Result};
use crate::integrator::{simulate, simulate_watch, Outcome, SimEnd, SimOptions, Trajectory, Watch};
use crate::model::{State, Strategy, StructParams};
use crate::separatrix::{a0_limit_equilibrium, gamma0, trace_gamma, BasinClass, TraceOptions};
use crate::victory::{in_victory_set, shifted_line, u_inf, zeta};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthResult {
    pub strategy: Strategy,
    /// Simulation of `strategy` from the start reached extinction.
    pub verified: bool,
    pub t_s: f64,
    pub witness: Trajectory,
    /// Slope margin used by the `rho < 1` construction.
    pub xi: Option<f64>,
    /// State at the switching time of a Heaviside construction.
    pub switch_state: Option<State>,
}

fn check_unit(s0: State) -> Result<()> {
    if !(0.0..=1.0).contains(&s0.u) || !(0.0..=1.0).contains(&s0.v) {
        return Err(Error::InvalidInput(format!("{s0:?} outside the unit square")));
    }
    Ok(())
}

/// `gamma0(u) <= v < u/c + (1 - rho)/(1 + rho c)` with `u > u_s0`; both
/// curves pass through the saddle limit at `u_s0`.
pub fn in_p(s0: State, p: &StructParams) -> Result<bool> {
    if !(p.rho < 1.0) || !(p.rho > 0.0) || !(p.c > 0.0) {
        return Err(Error::Regime { expected: "0 < rho < 1", rho: p.rho });
    }
    let u_s0 = saddle_limit(p).u;
    Ok(s0.u > u_s0 && s0.u <= 1.0 && gamma0(s0.u, p) <= s0.v && s0.v < shifted_line(s0.u, p))
}

/// `u/c <= v < zeta(u)` with `u > u_inf`; the interval is empty at
/// `u_inf`, where `zeta` meets `u/c`.
pub fn in_q(s0: State, p: &StructParams) -> Result<bool> {
    if !(p.rho > 1.0) || !(p.c > 0.0) {
        return Err(Error::Regime { expected: "rho > 1", rho: p.rho });
    }
    Ok(s0.u > u_inf(p) && s0.u <= 1.0 && s0.u / p.c <= s0.v && s0.v < zeta(s0.u, p))
}

/// `n` log-spaced values from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n)
            .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (n - 1) as f64).exp())
            .collect(),
    }
}

/// 25 log-spaced constants on `[1e-3, 1e3]`.
pub fn default_constant_grid() -> Vec<f64> {
    log_grid(1e-3, 1e3, 25)
}

fn verify(s0: State, strategy: Strategy, p: &StructParams, opts: &SimOptions) -> Result<SynthResult> {
    let (witness, out) = simulate(s0, &strategy, p, opts)?;
    Ok(SynthResult {
        verified: out.is_extinction(),
        t_s: out.stopping_time(),
        strategy,
        witness,
        xi: None,
        switch_state: None,
    })
}

/// First grid value whose constant strategy reaches extinction.
pub fn find_constant_winner(
    s0: State,
    p: &StructParams,
    a_grid: &[f64],
    opts: &SimOptions,
) -> Result<Option<(f64, SynthResult)>> {
    for &a in a_grid {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::InvalidInput(format!("grid value {a} must be finite and > 0")));
        }
        let r = match verify(s0, Strategy::Constant(a), p, opts) {
            Ok(r) => r,
            Err(Error::StepBudget { .. }) => continue,
            Err(e) => return Err(e),
        };
        if r.verified {
            return Ok(Some((a, r)));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthOptions {
    pub sim: SimOptions,
    pub trace: TraceOptions,
    /// Lower bound `M > 1` for the large level.
    pub m_floor: f64,
    pub attempts: usize,
    pub factor: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            sim: SimOptions::default(),
            trace: TraceOptions::default(),
            m_floor: 2.0,
            attempts: 12,
            factor: 4.0,
        }
    }
}

enum Phase {
    Reached(State, f64, Trajectory),
    Won(SynthResult),
}

fn run_until(
    s0: State,
    a: f64,
    g: &dyn Fn(State) -> f64,
    p: &StructParams,
    opts: &SimOptions,
    what: &'static str,
) -> Result<Phase> {
    let strat = Strategy::Constant(a);
    let (traj, end) = simulate_watch(s0, &strat, p, opts, Some(Watch { g }))?;
    match end {
        SimEnd::Watched { t, state } => Ok(Phase::Reached(state, t, traj)),
        SimEnd::Outcome(out @ Outcome::Extinction { .. }) => Ok(Phase::Won(SynthResult {
            strategy: strat,
            verified: true,
            t_s: out.stopping_time(),
            witness: traj,
            xi: None,
            switch_state: None,
        })),
        SimEnd::Outcome(_) => Err(Error::EventNotReached { what, t_max: opts.t_max }),
    }
}

fn search_tail(
    s0: State,
    head: f64,
    t_switch: f64,
    switch_state: State,
    first: f64,
    grow: bool,
    p: &StructParams,
    opts: &SynthOptions,
) -> Result<SynthResult> {
    let mut a = first;
    for _ in 0..opts.attempts {
        let inside = match trace_gamma(a, p, &opts.trace) {
            Ok(curve) => curve.classify(switch_state) != BasinClass::InB,
            Err(Error::Trace(_)) => false,
            Err(e) => return Err(e),
        };
        if inside {
            let strat = Strategy::heaviside(head, a, t_switch)?;
            let sim = opts.sim.with_t_max(opts.sim.t_max.max(t_switch + 10.0 / a));
            let mut r = match verify(s0, strat, p, &sim) {
                Ok(r) => r,
                Err(Error::StepBudget { .. }) => {
                    a = if grow { a * opts.factor } else { a / opts.factor };
                    continue;
                }
                Err(e) => return Err(e),
            };
            if r.verified {
                r.switch_state = Some(switch_state);
                return Ok(r);
            }
        }
        a = if grow { a * opts.factor } else { a / opts.factor };
    }
    Err(Error::SearchExhausted {
        what: "no winning second level",
        attempts: opts.attempts,
    })
}

/// The two-level construction without the membership precondition.
///
/// For `rho < 1` it only needs `u > u_s0` and `v` below the shifted
/// line; for `rho > 1` it needs the `a = 0` flow to cross `v = u/c`.
pub fn heaviside_construction(s0: State, p: &StructParams, opts: &SynthOptions) -> Result<SynthResult> {
    check_unit(s0)?;
    if !(opts.m_floor > 1.0) {
        return Err(Error::InvalidInput(format!("M = {} must exceed 1", opts.m_floor)));
    }
    let (c, rho) = (p.c, p.rho);
    if rho < 1.0 {
        let l = saddle_limit(p);
        let bound = (l.v - s0.v - (l.u - s0.u) / c) / (s0.u - l.u);
        if !(s0.u > l.u) || !(bound > 0.0) {
            return Err(Error::Precondition(format!(
                "{s0:?} is not right of u_s0 and below the shifted line"
            )));
        }
        let xi = 0.5 * bound;
        let a_head = [2.0 / c, (1.0 + rho * c) / (4.0 * c), (rho + 1.0 / c + xi) * 2.0 / (l.u * c * xi), opts.m_floor]
            .into_iter()
            .fold(0.0, f64::max);
        let u_s0 = l.u;
        let g = move |s: State| s.u - u_s0;
        let (state, t, _) = match run_until(s0, a_head, &g, p, &opts.sim, "u = u_s0")? {
            Phase::Won(r) => return Ok(r),
            Phase::Reached(s, t, tr) => (s, t, tr),
        };
        let mut r = search_tail(s0, a_head, t, state, 0.5 / opts.m_floor, false, p, opts)?;
        r.xi = Some(xi);
        Ok(r)
    } else if rho > 1.0 {
        // switch halfway between v = u/c and the a = 0 rest point
        let rest = a0_limit_equilibrium(s0, p)?;
        let eta = 0.5 * (rest.u / c - rest.v);
        if !(eta > 0.0) {
            return Err(Error::Precondition(format!(
                "the a = 0 flow from {s0:?} does not cross v = u/c"
            )));
        }
        let g = move |s: State| s.v - s.u / c + eta;
        let (state, t, _) = match run_until(s0, 0.0, &g, p, &opts.sim, "v < u/c under a = 0")? {
            Phase::Won(r) => return Ok(r),
            Phase::Reached(s, t, tr) => (s, t, tr),
        };
        search_tail(s0, 0.0, t, state, opts.m_floor, true, p, opts)
    } else {
        Err(Error::Regime { expected: "rho != 1", rho })
    }
}

/// Heaviside winner for starts where constant strategies fail: the set
/// `P` when `rho < 1`, `Q` when `rho > 1`.
pub fn synth_heaviside(s0: State, p: &StructParams, opts: &SynthOptions) -> Result<SynthResult> {
    check_unit(s0)?;
    let member = if p.rho < 1.0 { in_p(s0, p)? } else { in_q(s0, p)? };
    if !member {
        return Err(Error::Precondition(format!(
            "{s0:?} lies outside the Heaviside construction set"
        )));
    }
    heaviside_construction(s0, p, opts)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Synthesis {
    Constant { a: f64, result: SynthResult },
    Heaviside(SynthResult),
    NotInVictorySet,
}

/// Constant grid first, then the Heaviside construction.
pub fn synthesize(s0: State, p: &StructParams, a_grid: &[f64], opts: &SynthOptions) -> Result<Synthesis> {
    check_unit(s0)?;
    if !in_victory_set(s0, p)? {
        return Ok(Synthesis::NotInVictorySet);
    }
    if let Some((a, result)) = find_constant_winner(s0, p, a_grid, &opts.sim)? {
        return Ok(Synthesis::Constant { a, result });
    }
    if p.rho == 1.0 {
        return Err(Error::SearchExhausted {
            what: "constant grid",
            attempts: a_grid.len(),
        });
    }
    heaviside_construction(s0, p, opts).map(Synthesis::Heaviside)
}
