//! Time-minimal strategies on `[m, M]` by direct transcription, plus the
//! Pontryagin checks along the result.
//!
//! The control is piecewise constant on `n` uniform intervals of the
//! scaled clock `s = t / T`. For fixed node values the final time is the
//! root of `v(1) = 0`, so the search runs over the nodes alone with the
//! reduced gradient `dT/da = -(dv/da) / (dv/dT)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrator::{integrate_adjoint, simulate, AdjointPath, SimOptions, Trajectory};
use crate::model::{control_direction, jacobian, singular_control, vector_field, State, Strategy, StructParams};
use crate::synth::{default_constant_grid, heaviside_construction, SynthOptions};

/// Feedback control along a singular arc; requires `u > 0`.
pub fn singular_arc_value(s: State, p: &StructParams) -> Result<f64> {
    singular_control(s, p)
}

/// Residual of the singular surface `u(2c+1-rho c) + c v(1-rho c-2 rho) + c(rho-1)`.
pub fn singular_surface(s: State, p: &StructParams) -> f64 {
    let (c, r) = (p.c, p.rho);
    s.u * (2.0 * c + 1.0 - r * c) + c * s.v * (1.0 - r * c - 2.0 * r) + c * (r - 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlGrid {
    pub values: Vec<f64>,
    pub t_final: f64,
}

impl ControlGrid {
    pub fn n_nodes(&self) -> usize {
        self.values.len()
    }

    pub fn validate(&self, m: f64, big_m: f64) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidInput("control grid has no nodes".into()));
        }
        if let Some(a) = self.values.iter().find(|&&a| !(a >= m && a <= big_m)) {
            return Err(Error::InvalidInput(format!("node value {a} outside [{m}, {big_m}]")));
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(Error::InvalidInput(format!("final time {} must be > 0", self.t_final)));
        }
        Ok(())
    }

    /// Left piecewise-constant strategy in physical time.
    pub fn to_strategy(&self) -> Strategy {
        let n = self.values.len();
        let times = (0..n).map(|i| self.t_final * i as f64 / n as f64).collect();
        Strategy::Sampled {
            times,
            values: self.values.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalOptions {
    pub n_nodes: usize,
    /// RK4 steps per control interval; even so interval midpoints are grid points.
    pub substeps: usize,
    pub max_iter: usize,
    pub memory: usize,
    /// Projected-gradient tolerance relative to `T`. The search also stops,
    /// as converged, after 20 steps that leave `T` unchanged to rounding.
    pub grad_tol: f64,
    /// Arc labeling tolerance as a fraction of `M - m`.
    pub tol_arc: f64,
    /// Upper limit on the final time.
    pub t_cap: f64,
    pub sim: SimOptions,
    pub synth: SynthOptions,
}

impl Default for OptimalOptions {
    fn default() -> Self {
        Self {
            n_nodes: 64,
            substeps: 8,
            max_iter: 3000,
            memory: 12,
            grad_tol: 1e-10,
            tol_arc: 0.02,
            t_cap: 1e4,
            sim: SimOptions::default(),
            synth: SynthOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcLabel {
    Min,
    Max,
    Singular,
    /// Interior value matching neither bound nor the singular feedback.
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub t0: f64,
    pub t1: f64,
    pub label: ArcLabel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StartReport {
    pub name: &'static str,
    /// Extinction time of the initializing strategy itself.
    pub t_initial: f64,
    /// Final time reached by the search from this start.
    pub t_final: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimalResult {
    pub strategy: Strategy,
    pub grid: ControlGrid,
    /// Extinction time of `strategy` under the adaptive integrator.
    pub t_opt: f64,
    /// Final time of the fixed-step transcription.
    pub t_transcription: f64,
    /// Transcribed state at the midpoint of each control interval.
    pub node_states: Vec<State>,
    pub node_labels: Vec<ArcLabel>,
    pub arcs: Vec<Arc>,
    pub trajectory: Trajectory,
    pub adjoint: AdjointPath,
    pub hamiltonian_residual: f64,
    pub converged: bool,
    pub iterations: usize,
    pub starts: Vec<StartReport>,
    pub m: f64,
    pub big_m: f64,
}

struct Transcription<'a> {
    s0: State,
    p: &'a StructParams,
    n: usize,
    sub: usize,
}

struct Rollout {
    end: State,
    mid: Vec<State>,
    /// `d v(1) / d a_i`.
    dv_da: Vec<f64>,
    dv_dt: f64,
}

type M2 = [[f64; 2]; 2];

fn mv(m: &M2, x: [f64; 2]) -> [f64; 2] {
    [m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]]
}

impl Transcription<'_> {
    fn rollout(&self, a: &[f64], t: f64, grad: bool) -> Option<Rollout> {
        let p = self.p;
        let h = 1.0 / (self.n * self.sub) as f64;
        let mut x = self.s0.to_array();
        let mut mid = Vec::with_capacity(self.n);
        // per step: (Phi_x, Phi_a, Phi_T)
        let mut tape: Vec<(M2, [f64; 2], [f64; 2])> = Vec::new();
        if grad {
            tape.reserve(self.n * self.sub);
        }
        let f = |y: [f64; 2], ai: f64| {
            let (du, dv) = vector_field(State::from_array(y), ai, p);
            [du, dv]
        };
        for &ai in a {
            for k in 0..self.sub {
                if k == self.sub / 2 {
                    mid.push(State::from_array(x));
                }
                let cs = [0.0, 0.5, 0.5, 1.0];
                let mut ys = [[0.0; 2]; 4];
                let mut ks = [[0.0; 2]; 4];
                // tangents: columns dx_u, dx_v, da, dT
                let mut dk = [[[0.0; 2]; 4]; 4];
                for j in 0..4 {
                    let prev = if j == 0 { [0.0; 2] } else { ks[j - 1] };
                    ys[j] = [x[0] + h * cs[j] * t * prev[0], x[1] + h * cs[j] * t * prev[1]];
                    let fy = f(ys[j], ai);
                    ks[j] = fy;
                    if grad {
                        let jm = jacobian(State::from_array(ys[j]), ai, p);
                        let g = control_direction(State::from_array(ys[j]), p);
                        for col in 0..4 {
                            let base = match col {
                                0 => [1.0, 0.0],
                                1 => [0.0, 1.0],
                                _ => [0.0, 0.0],
                            };
                            // y_j = x + h c_j T k_{j-1}
                            let (pk, pdk) = if j == 0 {
                                ([0.0; 2], [0.0; 2])
                            } else {
                                (ks[j - 1], dk[j - 1][col])
                            };
                            let dt_here = if col == 3 { 1.0 } else { 0.0 };
                            let d = [
                                base[0] + h * cs[j] * (t * pdk[0] + dt_here * pk[0]),
                                base[1] + h * cs[j] * (t * pdk[1] + dt_here * pk[1]),
                            ];
                            let jd = mv(&jm, d);
                            let da = if col == 2 { 1.0 } else { 0.0 };
                            dk[j][col] = [jd[0] + da * g.0, jd[1] + da * g.1];
                        }
                    }
                }
                let comb = |v: [[f64; 2]; 4]| {
                    [
                        (v[0][0] + 2.0 * v[1][0] + 2.0 * v[2][0] + v[3][0]) / 6.0,
                        (v[0][1] + 2.0 * v[1][1] + 2.0 * v[2][1] + v[3][1]) / 6.0,
                    ]
                };
                let incr = comb(ks);
                if grad {
                    let col = |c: usize| comb([dk[0][c], dk[1][c], dk[2][c], dk[3][c]]);
                    let (cu, cv, ca, ct) = (col(0), col(1), col(2), col(3));
                    let phi_x = [
                        [1.0 + h * t * cu[0], h * t * cv[0]],
                        [h * t * cu[1], 1.0 + h * t * cv[1]],
                    ];
                    let phi_a = [h * t * ca[0], h * t * ca[1]];
                    let phi_t = [h * (incr[0] + t * ct[0]), h * (incr[1] + t * ct[1])];
                    tape.push((phi_x, phi_a, phi_t));
                }
                x = [x[0] + h * t * incr[0], x[1] + h * t * incr[1]];
                if !(x[0].is_finite() && x[1].is_finite()) {
                    return None;
                }
            }
        }
        let mut dv_da = vec![0.0; self.n];
        let mut dv_dt = 0.0;
        if grad {
            let mut lam = [0.0, 1.0];
            for (step, (phi_x, phi_a, phi_t)) in tape.iter().enumerate().rev() {
                let i = step / self.sub;
                dv_da[i] += lam[0] * phi_a[0] + lam[1] * phi_a[1];
                dv_dt += lam[0] * phi_t[0] + lam[1] * phi_t[1];
                lam = [
                    phi_x[0][0] * lam[0] + phi_x[1][0] * lam[1],
                    phi_x[0][1] * lam[0] + phi_x[1][1] * lam[1],
                ];
            }
        }
        Some(Rollout {
            end: State::from_array(x),
            mid,
            dv_da,
            dv_dt,
        })
    }

    /// Final time with `v(1) = 0` for node values `a`, starting near `t0`.
    fn solve_t(&self, a: &[f64], t0: f64, t_cap: f64) -> Option<(f64, Rollout)> {
        let tol = 1e-15;
        let mut t = t0.min(t_cap);
        for _ in 0..60 {
            let r = self.rollout(a, t, true)?;
            let v = r.end.v;
            if v.abs() <= tol {
                return Some((t, r));
            }
            if !(r.dv_dt < 0.0) {
                break;
            }
            let tn = (t - v / r.dv_dt).clamp(0.5 * t, 2.0 * t);
            if (tn - t).abs() <= 1e-15 * t {
                return Some((tn, self.rollout(a, tn, true)?));
            }
            t = tn;
        }
        // bracket [lo, hi] with v(lo) > 0 > v(hi), then bisect
        let vt = |t: f64| self.rollout(a, t, false).map(|r| r.end.v);
        let (mut lo, mut hi);
        if vt(t)? > 0.0 {
            lo = t;
            hi = t;
            loop {
                hi *= 2.0;
                if hi > t_cap {
                    return None;
                }
                if vt(hi)? < 0.0 {
                    break;
                }
                lo = hi;
            }
        } else {
            hi = t;
            lo = t;
            loop {
                lo *= 0.5;
                if lo < 1e-12 {
                    return None;
                }
                if vt(lo)? > 0.0 {
                    break;
                }
                hi = lo;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if vt(mid)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        let t = 0.5 * (lo + hi);
        Some((t, self.rollout(a, t, true)?))
    }
}

struct Search {
    a: Vec<f64>,
    t: f64,
    rollout: Rollout,
    iterations: usize,
    converged: bool,
}

fn reduced_grad(r: &Rollout) -> Vec<f64> {
    r.dv_da.iter().map(|d| -d / r.dv_dt).collect()
}

fn project(a: &mut [f64], m: f64, big_m: f64) {
    for x in a {
        *x = x.clamp(m, big_m);
    }
}

fn proj_grad_norm(a: &[f64], g: &[f64], m: f64, big_m: f64) -> f64 {
    a.iter()
        .zip(g)
        .map(|(&x, &gi)| ((x - gi).clamp(m, big_m) - x).abs())
        .fold(0.0, f64::max)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projected L-BFGS over the node values with the final time eliminated.
fn search(tr: &Transcription, a0: Vec<f64>, t0: f64, m: f64, big_m: f64, o: &OptimalOptions) -> Option<Search> {
    let mut a = a0;
    project(&mut a, m, big_m);
    let (mut t, mut r) = tr.solve_t(&a, t0, o.t_cap)?;
    let mut g = reduced_grad(&r);
    let mut mem: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let n = a.len();
    let span = (big_m - m).max(1e-300);
    let mut converged = false;
    let mut iterations = 0;
    let mut stall = 0;
    for it in 0..o.max_iter {
        iterations = it + 1;
        if proj_grad_norm(&a, &g, m, big_m) <= o.grad_tol * t.max(1.0) {
            converged = true;
            break;
        }
        let binding: Vec<bool> = (0..n)
            .map(|i| (a[i] <= m && g[i] > 0.0) || (a[i] >= big_m && g[i] < 0.0))
            .collect();
        let masked = |v: &[f64]| -> Vec<f64> {
            v.iter().zip(&binding).map(|(&x, &b)| if b { 0.0 } else { x }).collect()
        };
        // two-loop recursion on the free coordinates
        let mut q = masked(&g);
        let mut alphas = Vec::with_capacity(mem.len());
        for (s, y) in mem.iter().rev() {
            let (s, y) = (masked(s), masked(y));
            let sy = dot(&s, &y);
            if sy <= 0.0 {
                alphas.push(0.0);
                continue;
            }
            let al = dot(&s, &q) / sy;
            for i in 0..n {
                q[i] -= al * y[i];
            }
            alphas.push(al);
        }
        let gamma = match mem.last() {
            Some((s, y)) => {
                let (s, y) = (masked(s), masked(y));
                let yy = dot(&y, &y);
                if yy > 0.0 && dot(&s, &y) > 0.0 {
                    dot(&s, &y) / yy
                } else {
                    0.0
                }
            }
            None => 0.0,
        };
        let gmax = q.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        let gamma = if gamma > 0.0 { gamma } else { 0.1 * span / gmax.max(1e-300) };
        for x in q.iter_mut() {
            *x *= gamma;
        }
        for ((s, y), al) in mem.iter().zip(alphas.iter().rev()) {
            let (s, y) = (masked(s), masked(y));
            let sy = dot(&s, &y);
            if sy <= 0.0 {
                continue;
            }
            let be = dot(&y, &q) / sy;
            for i in 0..n {
                q[i] += (al - be) * s[i];
            }
        }
        let mut d: Vec<f64> = q.iter().map(|x| -x).collect();
        if dot(&d, &g) >= 0.0 {
            mem.clear();
            let s = 0.1 * span / gmax.max(1e-300);
            d = masked(&g).iter().map(|x| -s * x).collect();
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let mut an: Vec<f64> = a.iter().zip(&d).map(|(x, di)| x + step * di).collect();
            project(&mut an, m, big_m);
            let moved: Vec<f64> = an.iter().zip(&a).map(|(x, y)| x - y).collect();
            if moved.iter().all(|x| *x == 0.0) {
                break;
            }
            if let Some((tn, rn)) = tr.solve_t(&an, t, o.t_cap) {
                if tn <= t + 1e-4 * dot(&g, &moved) {
                    accepted = Some((an, tn, rn, moved));
                    break;
                }
            }
            step *= 0.5;
        }
        let Some((an, tn, rn, s)) = accepted else {
            if mem.is_empty() {
                break;
            }
            mem.clear();
            continue;
        };
        let gn = reduced_grad(&rn);
        let y: Vec<f64> = gn.iter().zip(&g).map(|(x, y)| x - y).collect();
        if dot(&s, &y) > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            mem.push((s, y));
            if mem.len() > o.memory {
                mem.remove(0);
            }
        }
        if t - tn <= 1e-15 * t {
            stall += 1;
        } else {
            stall = 0;
        }
        a = an;
        t = tn;
        r = rn;
        g = gn;
        if stall >= 20 {
            converged = true;
            break;
        }
    }
    Some(Search {
        a,
        t,
        rollout: r,
        iterations,
        converged,
    })
}

fn sample_onto_grid(strat: &Strategy, traj: &Trajectory, t_s: f64, n: usize, p: &StructParams) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = t_s * (i as f64 + 0.5) / n as f64;
            let k = traj.times.partition_point(|&x| x <= t).saturating_sub(1);
            let s = traj.states[k.min(traj.len() - 1)];
            strat.value(t, s, p).unwrap_or(0.0)
        })
        .collect()
}

struct Start {
    name: &'static str,
    t_initial: f64,
    nodes: Vec<f64>,
}

fn initializers(s0: State, p: &StructParams, m: f64, big_m: f64, o: &OptimalOptions) -> Result<Vec<Start>> {
    let sim = &o.sim;
    let n = o.n_nodes;
    let mut out = Vec::new();

    let mut consts: Vec<f64> = default_constant_grid()
        .into_iter()
        .filter(|&a| a >= m && a <= big_m)
        .collect();
    consts.extend([m, big_m, 0.5 * (m + big_m)]);
    let runs: Vec<(f64, f64)> = consts
        .par_iter()
        .filter(|&&a| a > 0.0)
        .map(|&a| {
            let t = simulate(s0, &Strategy::Constant(a), p, sim)
                .map(|(_, o)| o.stopping_time())
                .unwrap_or(f64::INFINITY);
            (a, t)
        })
        .collect();
    if let Some(&(a, t)) = runs
        .iter()
        .filter(|(_, t)| t.is_finite())
        .min_by(|x, y| x.1.total_cmp(&y.1))
    {
        out.push(Start { name: "constant", t_initial: t, nodes: vec![a; n] });
    }

    let fb = Strategy::SingularFeedback { min: m, max: big_m };
    if let Ok((traj, outc)) = simulate(s0, &fb, p, sim) {
        if outc.is_extinction() {
            let t = outc.stopping_time();
            out.push(Start {
                name: "singular-feedback",
                t_initial: t,
                nodes: sample_onto_grid(&fb, &traj, t, n, p),
            });
        }
    }

    if p.rho != 1.0 {
        if let Ok(r) = heaviside_construction(s0, p, &o.synth) {
            let clipped = match &r.strategy {
                Strategy::Heaviside { before, after, t_switch } => {
                    Strategy::heaviside(before.clamp(m, big_m), after.clamp(m, big_m), *t_switch).ok()
                }
                Strategy::Constant(a) => Some(Strategy::Constant(a.clamp(m, big_m))),
                _ => None,
            };
            if let Some(st) = clipped {
                if let Ok((traj, outc)) = simulate(s0, &st, p, sim) {
                    if outc.is_extinction() {
                        let t = outc.stopping_time();
                        out.push(Start {
                            name: "heaviside",
                            t_initial: t,
                            nodes: sample_onto_grid(&st, &traj, t, n, p),
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}

fn label_nodes(a: &[f64], states: &[State], p: &StructParams, m: f64, big_m: f64, tol_arc: f64) -> Vec<ArcLabel> {
    let tol = tol_arc * (big_m - m);
    a.iter()
        .zip(states)
        .map(|(&ai, &s)| {
            let mut best = (ArcLabel::Other, f64::INFINITY);
            let mut offer = |label, d: f64| {
                if d <= tol && d < best.1 {
                    best = (label, d);
                }
            };
            offer(ArcLabel::Min, ai - m);
            offer(ArcLabel::Max, big_m - ai);
            if let Ok(a_s) = singular_control(s, p) {
                if a_s >= m && a_s <= big_m {
                    offer(ArcLabel::Singular, (ai - a_s).abs());
                }
            }
            best.0
        })
        .collect()
}

fn merge_arcs(labels: &[ArcLabel], t_final: f64) -> Vec<Arc> {
    let n = labels.len();
    let mut arcs: Vec<Arc> = Vec::new();
    for (i, &label) in labels.iter().enumerate() {
        let (t0, t1) = (t_final * i as f64 / n as f64, t_final * (i + 1) as f64 / n as f64);
        match arcs.last_mut() {
            Some(last) if last.label == label => last.t1 = t1,
            _ => arcs.push(Arc { t0, t1, label }),
        }
    }
    arcs
}

/// Terminal adjoint `(0, 1 / v'(T))` normalising `p0 = -1` so that `H(T) = 0`.
pub fn terminal_adjoint(end: State, a_end: f64, p: &StructParams) -> (f64, f64) {
    let (_, dv) = vector_field(end, a_end, p);
    (0.0, 1.0 / dv)
}

/// `H = p . f - 1` at each trajectory sample.
pub fn hamiltonian_path(traj: &Trajectory, adj: &AdjointPath, p: &StructParams) -> Vec<f64> {
    (0..traj.len())
        .map(|k| {
            let (du, dv) = vector_field(traj.states[k], traj.controls[k], p);
            adj.p_u[k] * du + adj.p_v[k] * dv - 1.0
        })
        .collect()
}

/// Minimum-time strategy with values in `[m, M]` driving `v` to zero.
pub fn minimize_time(s0: State, p: &StructParams, m: f64, big_m: f64, o: &OptimalOptions) -> Result<OptimalResult> {
    p.validate()?;
    o.sim.validate()?;
    if !(m >= 0.0) || !(big_m >= m) || !(big_m > 0.0) || !big_m.is_finite() {
        return Err(Error::InvalidInput(format!("need 0 <= m <= M, M > 0; got [{m}, {big_m}]")));
    }
    if o.n_nodes == 0 || o.substeps < 2 {
        return Err(Error::InvalidInput("need n_nodes >= 1 and substeps >= 2".into()));
    }
    if !(s0.u > 0.0 && s0.v > 0.0) {
        return Err(Error::InvalidInput(format!("start {s0:?} must have u > 0 and v > 0")));
    }
    let starts = initializers(s0, p, m, big_m, o)?;
    if starts.is_empty() {
        return Err(Error::Infeasible(format!(
            "no strategy in [{m}, {big_m}] tried from {s0:?} reaches v = 0 before t = {}",
            o.sim.t_max
        )));
    }
    let tr = Transcription { s0, p, n: o.n_nodes, sub: o.substeps };
    let runs: Vec<Option<Search>> = starts
        .par_iter()
        .map(|st| search(&tr, st.nodes.clone(), st.t_initial, m, big_m, o))
        .collect();
    let reports: Vec<StartReport> = starts
        .iter()
        .zip(&runs)
        .map(|(st, r)| StartReport {
            name: st.name,
            t_initial: st.t_initial,
            t_final: r.as_ref().map(|r| r.t),
        })
        .collect();
    let best = runs
        .into_iter()
        .flatten()
        .min_by(|x, y| x.t.total_cmp(&y.t))
        .ok_or_else(|| Error::Numeric("no start produced a feasible transcription".into()))?;

    let grid = ControlGrid { values: best.a.clone(), t_final: best.t };
    let strategy = grid.to_strategy();
    let (trajectory, outcome) = simulate(s0, &strategy, p, &o.sim)?;
    if !outcome.is_extinction() {
        return Err(Error::Numeric(format!(
            "replay of the optimised strategy ended in {outcome:?}"
        )));
    }
    let t_opt = outcome.stopping_time();
    let end = trajectory.last_state().unwrap();
    let a_end = *trajectory.controls.last().unwrap();
    let adjoint = integrate_adjoint(&trajectory, &strategy, p, terminal_adjoint(end, a_end, p), &o.sim)?;
    let h = hamiltonian_path(&trajectory, &adjoint, p);
    let hamiltonian_residual = h.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let node_labels = label_nodes(&best.a, &best.rollout.mid, p, m, big_m, o.tol_arc);
    let arcs = merge_arcs(&node_labels, t_opt);
    Ok(OptimalResult {
        strategy,
        grid,
        t_opt,
        t_transcription: best.t,
        node_states: best.rollout.mid,
        node_labels,
        arcs,
        trajectory,
        adjoint,
        hamiltonian_residual,
        converged: best.converged,
        iterations: best.iterations,
        starts: reports,
        m,
        big_m,
    })
}

impl OptimalResult {
    /// Longest run of consecutive nodes with `|a_i - a_s(x_i)| < tol`, as a
    /// fraction of the scaled horizon.
    pub fn singular_window(&self, p: &StructParams, tol: f64) -> f64 {
        let n = self.grid.values.len();
        let (mut best, mut run) = (0usize, 0usize);
        for (a, s) in self.grid.values.iter().zip(&self.node_states) {
            let near = singular_control(*s, p).map_or(false, |a_s| (a - a_s).abs() < tol);
            run = if near { run + 1 } else { 0 };
            best = best.max(run);
        }
        best as f64 / n as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PontryaginReport {
    /// `max |H|` along the replayed path.
    pub h_max: f64,
    /// Share of nodes whose label agrees with the sign of `phi`.
    pub sign_consistency: f64,
    pub terminal_v: f64,
    pub terminal_u: f64,
    /// False when the adjoint vanishes identically.
    pub adjoint_valid: bool,
    /// Switching function `c p_u + p_v` at each node midpoint.
    pub phi: Vec<f64>,
}

/// Checks `H = 0`, the switching law and the terminal conditions.
///
/// `phi` counts as zero below `phi_tol` times its largest magnitude.
pub fn verify_pontryagin(res: &OptimalResult, p: &StructParams, phi_tol: f64) -> PontryaginReport {
    let traj = &res.trajectory;
    let adj = &res.adjoint;
    let adjoint_valid = adj.p_u.iter().chain(&adj.p_v).any(|x| *x != 0.0 && x.is_finite());
    let h = hamiltonian_path(traj, adj, p);
    let h_max = h.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let n = res.grid.values.len();
    let phi: Vec<f64> = (0..n)
        .map(|i| {
            let t = res.t_opt * (i as f64 + 0.5) / n as f64;
            let k = traj.times.partition_point(|&x| x <= t).saturating_sub(1).min(traj.len() - 1);
            p.c * adj.p_u[k] + adj.p_v[k]
        })
        .collect();
    let scale = phi.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let agree = res
        .node_labels
        .iter()
        .zip(&phi)
        .filter(|(label, &f)| {
            let zero = f.abs() <= phi_tol * scale;
            match label {
                ArcLabel::Singular => zero,
                ArcLabel::Min => f > 0.0 || zero,
                ArcLabel::Max => f < 0.0 || zero,
                ArcLabel::Other => zero,
            }
        })
        .count();
    let end = traj.last_state().unwrap_or_default();
    PontryaginReport {
        h_max,
        sign_consistency: if n > 0 { agree as f64 / n as f64 } else { 0.0 },
        terminal_v: end.v,
        terminal_u: end.u,
        adjoint_valid: adjoint_valid && scale > 0.0,
        phi,
    }
}
