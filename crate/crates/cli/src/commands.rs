//! One function per subcommand. Each validates its keys, runs, writes
//! files when an output path is set and returns the stdout summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use conflict_dyn::emit::{
    self, basin_svg, curve_csv, equilibria_csv, lines_svg, optimal_csv, optimal_rows, sweep_csv,
    trajectory_csv, victory_csv, Series,
};
use conflict_dyn::equilibria::find_equilibria;
use conflict_dyn::optimal::{minimize_time, verify_pontryagin, ArcLabel, OptimalOptions};
use conflict_dyn::separatrix::{trace_gamma, SeparatrixRegime, TraceOptions};
use conflict_dyn::sweep::{basin_grid, sweep, victory_grid, BasinOptions, GridSpec, SweepBase, SweepKind};
use conflict_dyn::synth::{default_constant_grid, synthesize, SynthOptions, SynthResult, Synthesis};
use conflict_dyn::victory::{constrained_bound, eps_range, victory_boundary};
use conflict_dyn::{simulate, Error, Outcome, SimOptions, State, Strategy, StructParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{parse_list, ConfigError, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] Error),
    #[error("synthesis failed: {0}")]
    Synthesis(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Synthesis(_) => 4,
            CliError::Core(e) => match e {
                Error::InvalidParams(_)
                | Error::InvalidRawParams(_)
                | Error::InvalidStrategy(_)
                | Error::InvalidInput(_)
                | Error::Range { .. }
                | Error::Regime { .. }
                | Error::Precondition(_) => 2,
                Error::Infeasible(_) => 3,
                Error::SearchExhausted { .. } => 4,
                _ => 5,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Simulate,
    Basin,
    SweepC,
    SweepRho,
    SweepA,
    Equilibria,
    Separatrix,
    Victory,
    Synth,
    Optimize,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Basin => "basin",
            Command::SweepC => "sweep-c",
            Command::SweepRho => "sweep-rho",
            Command::SweepA => "sweep-a",
            Command::Equilibria => "equilibria",
            Command::Separatrix => "separatrix",
            Command::Victory => "victory",
            Command::Synth => "synth",
            Command::Optimize => "optimize",
        }
    }

    fn keys(self) -> Vec<&'static str> {
        const GRID: [&str; 6] = ["nx", "ny", "u_min", "u_max", "v_min", "v_max"];
        let own: &'static [&'static str] = match self {
            Command::Simulate => &["c", "rho", "a", "u0", "v0", "strategy"],
            Command::Basin => &["c", "rho", "a", "curve_tol", "band"],
            Command::SweepC => &["a", "rho", "values", "probe_u", "probe_v", "curve_tol", "band"],
            Command::SweepRho => &["a", "c", "values", "probe_u", "probe_v", "curve_tol", "band"],
            Command::SweepA => &["c", "rho", "values", "probe_u", "probe_v", "curve_tol", "band"],
            Command::Equilibria => &["c", "rho", "a"],
            Command::Separatrix => &["c", "rho", "a", "curve_tol", "delta"],
            Command::Victory => &["c", "rho", "u0", "v0", "m", "M", "eps", "samples"],
            Command::Synth => &["c", "rho", "u0", "v0", "attempts", "m_floor"],
            Command::Optimize => &["c", "rho", "u0", "v0", "m", "M", "n_nodes", "substeps", "max_iter"],
        };
        let grid = matches!(
            self,
            Command::Basin | Command::SweepC | Command::SweepRho | Command::SweepA | Command::Victory
        );
        let sim = ["t_max", "rel_tol", "abs_tol", "sink_eps", "event_tol", "max_steps", "seed"];
        let mut all: Vec<&'static str> = own.to_vec();
        all.extend(sim);
        if grid {
            all.extend(GRID);
        }
        all
    }
}

pub struct Context {
    pub cfg: RunConfig,
    pub out: Option<PathBuf>,
}

pub fn run(cmd: Command, ctx: &Context) -> CliResult<String> {
    ctx.cfg.check_keys(cmd.name(), &cmd.keys())?;
    match cmd {
        Command::Simulate => cmd_simulate(ctx),
        Command::Basin => cmd_basin(ctx),
        Command::SweepC => cmd_sweep(ctx, SweepKind::C),
        Command::SweepRho => cmd_sweep(ctx, SweepKind::Rho),
        Command::SweepA => cmd_sweep(ctx, SweepKind::A),
        Command::Equilibria => cmd_equilibria(ctx),
        Command::Separatrix => cmd_separatrix(ctx),
        Command::Victory => cmd_victory(ctx),
        Command::Synth => cmd_synth(ctx),
        Command::Optimize => cmd_optimize(ctx),
    }
}

fn write_file(path: &Path, body: &str) -> CliResult<()> {
    std::fs::write(path, body).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit_files(ctx: &Context, csv: impl FnOnce() -> CliResult<String>, svg: Option<String>) -> CliResult<()> {
    let Some(path) = &ctx.out else {
        return Ok(());
    };
    write_file(path, &csv()?)?;
    if let Some(svg) = svg {
        write_file(&path.with_extension("svg"), &svg)?;
    }
    Ok(())
}

fn params(cfg: &RunConfig) -> CliResult<StructParams> {
    Ok(StructParams::new(cfg.f64("c")?, cfg.f64("rho")?)?)
}

fn start(cfg: &RunConfig) -> CliResult<State> {
    Ok(State::new(cfg.f64("u0")?, cfg.f64("v0")?))
}

fn sim_options(cfg: &RunConfig) -> CliResult<SimOptions> {
    let d = SimOptions::default();
    let o = SimOptions {
        t_max: cfg.f64_or("t_max", d.t_max)?,
        rel_tol: cfg.f64_or("rel_tol", d.rel_tol)?,
        abs_tol: cfg.f64_or("abs_tol", d.abs_tol)?,
        sink_eps: cfg.f64_or("sink_eps", d.sink_eps)?,
        event_tol: cfg.f64_or("event_tol", d.event_tol)?,
        max_steps: cfg.usize_or("max_steps", d.max_steps)?,
    };
    o.validate()?;
    Ok(o)
}

fn trace_options(cfg: &RunConfig) -> CliResult<TraceOptions> {
    let d = TraceOptions::default();
    Ok(TraceOptions {
        sim: sim_options(cfg)?,
        curve_tol: cfg.f64_or("curve_tol", d.curve_tol)?,
        delta: cfg.f64_or("delta", d.delta)?,
        ..d
    })
}

fn basin_options(cfg: &RunConfig) -> CliResult<BasinOptions> {
    Ok(BasinOptions {
        trace: trace_options(cfg)?,
        fallback_band: cfg.f64_or("band", BasinOptions::default().fallback_band)?,
    })
}

fn grid_spec(cfg: &RunConfig, default_n: usize) -> CliResult<GridSpec> {
    let spec = GridSpec {
        nx: cfg.usize_or("nx", default_n)?,
        ny: cfg.usize_or("ny", default_n)?,
        u_range: (cfg.f64_or("u_min", 0.0)?, cfg.f64_or("u_max", 1.0)?),
        v_range: (cfg.f64_or("v_min", 0.0)?, cfg.f64_or("v_max", 1.0)?),
    };
    spec.validate()?;
    Ok(spec)
}

/// `constant:A`, `heaviside:BEFORE,AFTER,T`, `piecewise:T1,..;A0,..` or
/// `singular:MIN,MAX`.
pub fn parse_strategy(spec: &str) -> CliResult<Strategy> {
    let bad = |expected: &'static str| {
        CliError::Config(ConfigError::BadValue {
            key: "strategy".into(),
            value: spec.into(),
            expected,
        })
    };
    let (kind, rest) = spec.split_once(':').ok_or_else(|| bad("kind:arguments"))?;
    let nums = |s: &str| parse_list("strategy", s).map_err(CliError::from);
    let s = match kind.trim() {
        "constant" => match nums(rest)?.as_slice() {
            [a] => Strategy::constant(*a)?,
            _ => return Err(bad("constant:A")),
        },
        "heaviside" => match nums(rest)?.as_slice() {
            [b, a, t] => Strategy::heaviside(*b, *a, *t)?,
            _ => return Err(bad("heaviside:BEFORE,AFTER,T")),
        },
        "piecewise" => {
            let (bps, vals) = rest.split_once(';').ok_or_else(|| bad("piecewise:T1,..;A0,.."))?;
            Strategy::piecewise(nums(bps)?, nums(vals)?)?
        }
        "singular" => match nums(rest)?.as_slice() {
            [lo, hi] => Strategy::singular_feedback(*lo, *hi)?,
            _ => return Err(bad("singular:MIN,MAX")),
        },
        _ => return Err(bad("one of constant, heaviside, piecewise, singular")),
    };
    Ok(s)
}

pub fn outcome_summary(o: &Outcome) -> String {
    match o {
        Outcome::Extinction { t_s, u_final } => {
            format!("extinction T_s={} u_final={}", emit::fmt_num(*t_s), emit::fmt_num(*u_final))
        }
        Outcome::ConvergedToSink { t_enter } => format!("converged-to-sink t={}", emit::fmt_num(*t_enter)),
        Outcome::Undecided { t_max } => format!("undecided t_max={}", emit::fmt_num(*t_max)),
        Outcome::DegenerateStart => "degenerate-start".into(),
    }
}

fn cmd_simulate(ctx: &Context) -> CliResult<String> {
    let cfg = &ctx.cfg;
    let p = params(cfg)?;
    let s0 = start(cfg)?;
    let strat = match cfg.get("strategy") {
        Some(s) => parse_strategy(s)?,
        None => Strategy::constant(cfg.f64("a")?)?,
    };
    let (traj, outcome) = simulate(s0, &strat, &p, &sim_options(cfg)?)?;
    emit_files(ctx, || Ok(trajectory_csv(&traj)?), None)?;
    Ok(outcome_summary(&outcome) + "\n")
}

fn cmd_basin(ctx: &Context) -> CliResult<String> {
    let cfg = &ctx.cfg;
    let p = params(cfg)?;
    let a = cfg.f64("a")?;
    let spec = grid_spec(cfg, 101)?;
    let g = basin_grid(a, &p, &spec, &basin_options(cfg)?)?;
    emit_files(ctx, || Ok(emit::basin_csv(&g)?), Some(basin_svg(&g, 600.0)))?;
    let mut s = format!(
        "basin a={} c={} rho={} grid={}x{} E={} B={} M={} U={} simulated={}",
        a,
        p.c,
        p.rho,
        spec.nx,
        spec.ny,
        g.e_area(),
        g.fraction(conflict_dyn::Cell::B),
        g.fraction(conflict_dyn::Cell::MBand),
        g.fraction(conflict_dyn::Cell::Undecided),
        g.simulated,
    );
    if g.trace_failed {
        s.push_str(" trace=failed(simulation-only)");
    }
    s.push('\n');
    Ok(s)
}

fn cmd_sweep(ctx: &Context, kind: SweepKind) -> CliResult<String> {
    let cfg = &ctx.cfg;
    let values = cfg.list("values")?;
    let base = SweepBase {
        a: if kind == SweepKind::A { 0.0 } else { cfg.f64("a")? },
        c: if kind == SweepKind::C { 0.0 } else { cfg.f64("c")? },
        rho: if kind == SweepKind::Rho { 0.0 } else { cfg.f64("rho")? },
    };
    let probe = match (cfg.opt_f64("probe_u")?, cfg.opt_f64("probe_v")?) {
        (Some(u), Some(v)) => Some(State::new(u, v)),
        (None, None) => None,
        _ => return Err(ConfigError::Invalid("probe_u and probe_v go together".into()).into()),
    };
    let spec = grid_spec(cfg, 61)?;
    let rows = sweep(kind, &values, base, &spec, probe, &basin_options(cfg)?)?;
    emit_files(ctx, || Ok(sweep_csv(kind, &rows)?), None)?;
    let mut s = String::new();
    for r in &rows {
        let _ = write!(s, "{}={} E={} violation={}", kind.name(), r.value, r.e_area, r.nesting_violation);
        if r.limit_area.is_finite() {
            let _ = write!(s, " limit={}", r.limit_area);
        }
        if let Some(c) = r.probe {
            let _ = write!(s, " probe={}", c.code());
        }
        if r.trace_failed {
            let _ = write!(s, " trace=failed");
        }
        s.push('\n');
    }
    Ok(s)
}

fn cmd_equilibria(ctx: &Context) -> CliResult<String> {
    let cfg = &ctx.cfg;
    let p = params(cfg)?;
    let a = cfg.f64("a")?;
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::InvalidInput(format!("a = {a} must be finite and >= 0")).into());
    }
    let eqs = find_equilibria(a, &p);
    emit_files(ctx, || Ok(equilibria_csv(&eqs)?), None)?;
    let mut s = String::new();
    for e in &eqs {
        let _ = write!(
            s,
            "{} ({}, {}) eigenvalues {}{:+}i, {}{:+}i",
            emit::class_name(e.class),
            e.location.u,
            e.location.v,
            e.eigenvalues[0].re,
            e.eigenvalues[0].im,
            e.eigenvalues[1].re,
            e.eigenvalues[1].im
        );
        if let Some((from, to)) = e.segment {
            let _ = write!(s, " segment ({}, {})-({}, {})", from.u, from.v, to.u, to.v);
        }
        s.push('\n');
    }
    Ok(s)
}

fn cmd_separatrix(ctx: &Context) -> CliResult<String> {
    let cfg = &ctx.cfg;
    let p = params(cfg)?;
    let a = cfg.f64("a")?;
    let curve = trace_gamma(a, &p, &trace_options(cfg)?)?;
    let pts: Vec<State> = curve
        .u_samples
        .iter()
        .zip(&curve.v_samples)
        .map(|(&u, &v)| State::new(u, v))
        .collect();
    let svg = lines_svg(
        &[Series {
            label: "gamma",
            color: "#7a3fa3",
            points: pts.iter().map(|s| (s.u, s.v)).collect(),
        }],
        500.0,
        500.0,
    );
    emit_files(ctx, || Ok(curve_csv(&pts)?), Some(svg))?;
    let regime = match curve.regime {
        SeparatrixRegime::SaddleInterior => "saddle-interior",
        SeparatrixRegime::SaddleOrigin => "saddle-origin",
        SeparatrixRegime::CenterDegenerate => "center",
    };
    let mut s = format!(
        "separatrix regime={regime} samples={} u_M={} endpoint=({}, {})",
        pts.len(),
        curve.u_max(),
        curve.endpoint.u,
        curve.endpoint.v
    );
    if let Some(d) = curve.diagonal_crossing() {
        let _ = write!(s, " diagonal=({}, {})", d.u, d.v);
    }
    s.push('\n');
    Ok(s)
}

/// Piecewise-constant strategy with `pieces` levels, log-uniform on
/// `[lo, hi]`, switching at uniform random times before `horizon`.
pub fn random_piecewise(rng: &mut impl Rng, lo: f64, hi: f64, horizon: f64, pieces: usize) -> Strategy {
    let mut bps: Vec<f64> = (1..pieces).map(|_| rng.gen::<f64>() * horizon).collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    let (l0, l1) = (lo.max(1e-300).ln(), hi.ln());
    let vals: Vec<f64> = (0..=bps.len())
        .map(|_| {
            if lo == hi {
                lo
            } else if lo == 0.0 && rng.gen::<f64>() < 0.1 {
                0.0
            } else {
                (l0 + (l1 - l0) * rng.gen::<f64>()).exp().clamp(lo, hi)
            }
        })
        .collect();
    Strategy::PiecewiseConstant {
        breakpoints: bps,
        values: vals,
    }
}

fn cmd_victory(ctx: &Context) -> CliResult<String> {
    let cfg = &ctx.cfg;
    let p = params(cfg)?;
    let spec = grid_spec(cfg, 41)?;
    let vb = victory_boundary(&p)?;
    let inside = victory_grid(&p, &spec)?;
    let area = inside.iter().filter(|b| **b).count() as f64 / inside.len() as f64;
    let n = 400;
    let boundary: Vec<(f64, f64)> = (0..=n)
        .filter_map(|k| {
            let u = k as f64 / n as f64;
            vb.eval(u).map(|v| (u, v.min(1.0)))
        })
        .collect();
    let mut series = vec![Series {
        label: "victory boundary",
        color: "#7a3fa3",
        points: boundary,
    }];

    let mut s = format!("victory c={} rho={} grid={}x{} area={area}\n", p.c, p.rho, spec.nx, spec.ny);
    let bound = match (cfg.opt_f64("m")?, cfg.opt_f64("M")?) {
        (Some(m), Some(big_m)) => {
            let (lo, hi) = eps_range(&p, big_m);
            let eps = cfg.f64_or("eps", 0.5 * (lo + hi))?;
            let b = constrained_bound(&p, m, big_m, eps)?;
            let _ = writeln!(s, "bound m={m} M={big_m} eps={eps} max_jump={}", b.max_jump());
            series.push(Series {
                label: "constrained bound",
                color: "#c04000",
                points: (0..=n).map(|k| k as f64 / n as f64).map(|u| (u, b.eval(u).min(1.0))).collect(),
            });
            Some(b)
        }
        (None, None) => None,
        _ => return Err(ConfigError::Invalid("m and M go together".into()).into()),
    };
    if cfg.has("u0") || cfg.has("v0") {
        let s0 = start(cfg)?;
        let _ = write!(s, "point ({}, {}) in_victory_set={}", s0.u, s0.v, vb.contains(s0));
        if let Some(b) = &bound {
            let _ = write!(s, " excluded_by_bound={}", b.excludes(s0));
        }
        s.push('\n');
    }

    let samples = cfg.usize_or("samples", 0)?;
    if samples > 0 {
        let seed = cfg.u64_or("seed", 0)?;
        let sim = sim_options(cfg)?;
        let (lo, hi) = bound.as_ref().map_or((1e-3, 1e3), |b| (b.m, b.big_m));
        let wins: Vec<usize> = (0..spec.len())
            .into_par_iter()
            .filter(|&k| !inside[k])
            .map(|k| {
                let s0 = spec.point(k);
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
                (0..samples)
                    .filter(|_| {
                        let st = random_piecewise(&mut rng, lo, hi, sim.t_max.min(50.0), 4);
                        matches!(simulate(s0, &st, &p, &sim), Ok((_, o)) if o.is_extinction())
                    })
                    .count()
            })
            .collect();
        let outside = wins.len();
        let _ = writeln!(
            s,
            "checked {outside} outside points x {samples} random strategies: {} wins",
            wins.iter().sum::<usize>()
        );
    }
    emit_files(ctx, || Ok(victory_csv(&spec, &inside)?), Some(lines_svg(&series, 500.0, 500.0)))?;
    Ok(s)
}

pub fn strategy_text(st: &Strategy) -> String {
    let list = |v: &[f64]| v.iter().map(|x| emit::fmt_num(*x)).collect::<Vec<_>>().join(", ");
    match st {
        Strategy::Constant(a) => format!(r#"{{"kind": "constant", "a": {}}}"#, emit::fmt_num(*a)),
        Strategy::Heaviside { before, after, t_switch } => format!(
            r#"{{"kind": "heaviside", "before": {}, "after": {}, "t_switch": {}}}"#,
            emit::fmt_num(*before),
            emit::fmt_num(*after),
            emit::fmt_num(*t_switch)
        ),
        Strategy::PiecewiseConstant { breakpoints, values } => format!(
            r#"{{"kind": "piecewise", "breakpoints": [{}], "values": [{}]}}"#,
            list(breakpoints),
            list(values)
        ),
        Strategy::Sampled { times, values } => format!(
            r#"{{"kind": "sampled", "times": [{}], "values": [{}]}}"#,
            list(times),
            list(values)
        ),
        Strategy::SingularFeedback { min, max } => format!(
            r#"{{"kind": "singular-feedback", "min": {}, "max": {}}}"#,
            emit::fmt_num(*min),
            emit::fmt_num(*max)
        ),
    }
}

fn synth_lines(r: &SynthResult) -> String {
    let mut s = format!(
        "strategy = {}\nverified = {}\nT_s = {}\n",
        strategy_text(&r.strategy),
        r.verified,
        emit::fmt_num(r.t_s)
    );
    if let Some(w) = r.switch_state {
        let _ = writeln!(s, "switch_state = ({}, {})", w.u, w.v);
    }
    s
}

fn cmd_synth(ctx: &Context) -> CliResult<String> {
    let cfg = &ctx.cfg;
    let p = params(cfg)?;
    let s0 = start(cfg)?;
    let d = SynthOptions::default();
    let opts = SynthOptions {
        sim: sim_options(cfg)?,
        trace: trace_options(cfg)?,
        attempts: cfg.usize_or("attempts", d.attempts)?,
        m_floor: cfg.f64_or("m_floor", d.m_floor)?,
        ..d
    };
    let grid = default_constant_grid();
    let res = synthesize(s0, &p, &grid, &opts).map_err(|e| match e {
        Error::InvalidInput(_) | Error::InvalidParams(_) => CliError::Core(e),
        e => CliError::Synthesis(format!(
            "start ({}, {}) is in the victory set but no strategy verified: {e}",
            s0.u, s0.v
        )),
    })?;
    let (body, witness) = match &res {
        Synthesis::NotInVictorySet => {
            return Ok(format!(
                "not in victory set: no strategy wins from ({}, {})\n",
                s0.u, s0.v
            ))
        }
        Synthesis::Constant { a, result } => (format!("constant winner a = {a}\n{}", synth_lines(result)), result),
        Synthesis::Heaviside(r) => (format!("heaviside winner\n{}", synth_lines(r)), r),
    };
    if !witness.verified {
        return Err(CliError::Synthesis(format!("unverified strategy\n{body}")));
    }
    emit_files(ctx, || Ok(trajectory_csv(&witness.witness)?), None)?;
    Ok(body)
}

fn cmd_optimize(ctx: &Context) -> CliResult<String> {
    let cfg = &ctx.cfg;
    let p = params(cfg)?;
    let s0 = start(cfg)?;
    let m = cfg.f64("m")?;
    let big_m = cfg.f64("M")?;
    let d = OptimalOptions::default();
    let sim = sim_options(cfg)?;
    let o = OptimalOptions {
        n_nodes: cfg.usize_or("n_nodes", d.n_nodes)?,
        substeps: cfg.usize_or("substeps", d.substeps)?,
        max_iter: cfg.usize_or("max_iter", d.max_iter)?,
        t_cap: sim.t_max,
        sim,
        ..d
    };
    let r = minimize_time(s0, &p, m, big_m, &o)?;
    let rep = verify_pontryagin(&r, &p, 1e-3);
    let rows = optimal_rows(&r, &p);
    let svg = lines_svg(
        &[
            Series {
                label: "a",
                color: "#c04000",
                points: rows.iter().map(|x| (x.t, x.a)).collect(),
            },
            Series {
                label: "a_s",
                color: "#2060c0",
                points: rows.iter().map(|x| (x.t, x.a_s.clamp(m, big_m))).collect(),
            },
        ],
        700.0,
        400.0,
    );
    emit_files(ctx, || Ok(optimal_csv(&rows)?), Some(svg))?;
    let mut s = format!(
        "T = {}\nT_transcription = {}\nconverged = {} iterations = {}\nH_residual = {}\nsign_consistency = {}\nterminal = ({}, {})\nsingular_window = {}\n",
        emit::fmt_num(r.t_opt),
        emit::fmt_num(r.t_transcription),
        r.converged,
        r.iterations,
        rep.h_max,
        rep.sign_consistency,
        rep.terminal_u,
        rep.terminal_v,
        r.singular_window(&p, 0.05 * (big_m - m)),
    );
    for st in &r.starts {
        let _ = writeln!(
            s,
            "start {}: initial T = {} optimised T = {}",
            st.name,
            st.t_initial,
            st.t_final.map_or("-".to_string(), |t| t.to_string())
        );
    }
    for a in &r.arcs {
        let label = match a.label {
            ArcLabel::Min => "min",
            ArcLabel::Max => "max",
            ArcLabel::Singular => "singular",
            ArcLabel::Other => "other",
        };
        let _ = writeln!(s, "arc {label} [{}, {}]", a.t0, a.t1);
    }
    Ok(s)
}
