//! Acceptance criteria 1-10. Prints one `PASS`/`FAIL` line per criterion
//! and exits non-zero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use conflict_dyn::equilibria::{find_equilibria, EquilibriumClass};
use conflict_dyn::optimal::verify_pontryagin;
use conflict_dyn::sweep::{nesting_violation, BasinOptions};
use conflict_dyn::synth::{default_constant_grid, find_constant_winner, heaviside_construction, in_p, in_q, synth_heaviside};
use conflict_dyn::victory::{constrained_bound, eps_range, ConstrainedBound};
use conflict_dyn::{
    basin_grid, in_victory_set, minimize_time, simulate, trace_gamma, BasinClass, GridSpec,
    OptimalOptions, Outcome, SimOptions, State, Strategy, StructParams, SynthOptions, TraceOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Check = Result<String, String>;

fn params(c: f64, rho: f64) -> StructParams {
    StructParams::new(c, rho).unwrap()
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn centre_grid(n: usize) -> Vec<State> {
    (0..n * n)
        .map(|k| State::new(((k % n) as f64 + 0.5) / n as f64, ((k / n) as f64 + 0.5) / n as f64))
        .collect()
}

fn random_piecewise(rng: &mut ChaCha8Rng, lo: f64, hi: f64, log: bool) -> Strategy {
    let pieces = rng.gen_range(1..=5);
    let mut bps: Vec<f64> = (1..pieces).map(|_| rng.gen_range(0.0..20.0)).collect();
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    let values = (0..=bps.len())
        .map(|_| if log { rng.gen_range(lo.ln()..=hi.ln()).exp() } else { rng.gen_range(lo..=hi) })
        .collect();
    Strategy::piecewise(bps, values).unwrap()
}

fn wins(s: State, strat: &Strategy, p: &StructParams, sim: &SimOptions) -> bool {
    simulate(s, strat, p, sim).map_or(false, |(_, o)| o.is_extinction())
}

fn equilibrium_regimes() -> Check {
    use EquilibriumClass::*;
    let cases = [
        (0.8, 0.5, 2.0, vec![Source, Sink, Saddle]),
        (0.8, 3.0, 2.0, vec![Saddle, Sink]),
        (2.0, 0.5, 1.0, vec![DegenerateZeroEigen, Sink]),
    ];
    let mut worst = 0.0f64;
    for (a, c, rho, want) in cases {
        let eqs = find_equilibria(a, &params(c, rho));
        let got: Vec<_> = eqs.iter().map(|e| e.class).collect();
        if got != want {
            return Err(format!("a={a} c={c} rho={rho}: {got:?}"));
        }
        for e in &eqs {
            let expect = if e.location == State::ORIGIN {
                [rho, 1.0 - a * c]
            } else if e.location == State::SINK {
                [-a * c, -rho]
            } else {
                continue;
            };
            let mut g = [e.eigenvalues[0].re, e.eigenvalues[1].re];
            let mut w = expect;
            g.sort_by(f64::total_cmp);
            w.sort_by(f64::total_cmp);
            worst = worst
                .max((g[0] - w[0]).abs())
                .max((g[1] - w[1]).abs())
                .max(e.eigenvalues[0].im.abs())
                .max(e.eigenvalues[1].im.abs());
        }
    }
    ensure(worst < 1e-12, format!("max eigenvalue error {worst:.1e}"))
}

fn rho_one_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let c = rng.gen_range(0.2..=5.0);
        let a = rng.gen_range(0.1..=10.0);
        let u0: f64 = rng.gen_range(0.05..=1.0);
        let v0 = rng.gen_range(0.01..0.99) * (u0 / c).min(1.0);
        let want = (1.0 / (1.0 - c * v0 / u0)).ln() / c / a;
        let (_, out) = simulate(State::new(u0, v0), &Strategy::Constant(a), &params(c, 1.0), &SimOptions::default())
            .map_err(|e| e.to_string())?;
        let Outcome::Extinction { t_s, .. } = out else {
            return Err(format!("({u0}, {v0}) c={c} a={a}: {out:?}"));
        };
        worst = worst.max((t_s - want).abs() / want);
    }
    ensure(worst < 1e-4, format!("max relative error {worst:.1e}"))
}

fn no_aggression_invariant() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut drift, mut miss) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let rho: f64 = rng.gen_range(0.5..=3.0);
        let p = params(rng.gen_range(0.2..=5.0), rho);
        let s0 = State::new(rng.gen_range(0.05..=1.0), rng.gen_range(0.05..=1.0));
        let (traj, _) = simulate(s0, &Strategy::Constant(0.0), &p, &SimOptions::default().with_t_max(50.0))
            .map_err(|e| e.to_string())?;
        let k0 = s0.v / s0.u.powf(rho);
        for s in &traj.states {
            drift = drift.max((s.v / s.u.powf(rho) / k0 - 1.0).abs());
        }
        let g = |x: f64| k0 * x.powf(rho) + x - 1.0;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while hi - lo > 1e-15 {
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let end = traj.last_state().unwrap();
        miss = miss.max(end.dist(&State::new(lo, 1.0 - lo)));
    }
    ensure(drift < 1e-6 && miss < 1e-4, format!("max drift {drift:.1e}, max terminal distance {miss:.1e}"))
}

fn separatrix_agreement() -> Check {
    let mut report = Vec::new();
    let mut ok = true;
    for (a, c, rho) in [(0.8, 0.5, 2.0), (0.8, 3.0, 2.0), (2.0, 0.5, 1.0)] {
        let p = params(c, rho);
        let opts = TraceOptions::default();
        let curve = trace_gamma(a, &p, &opts).map_err(|e| e.to_string())?;
        let sim = SimOptions::default();
        let tally: Vec<Option<bool>> = centre_grid(61)
            .into_par_iter()
            .map(|s| {
                if curve.distance(s) <= 2.0 * opts.curve_tol {
                    return None;
                }
                let truth = match simulate(s, &Strategy::Constant(a), &p, &sim) {
                    Ok((_, Outcome::Extinction { .. })) => Some(BasinClass::InE),
                    Ok((_, Outcome::ConvergedToSink { .. })) => Some(BasinClass::InB),
                    _ => None,
                };
                Some(truth == Some(curve.classify(s)))
            })
            .collect();
        let counted = tally.iter().flatten().count();
        let agree = tally.iter().flatten().filter(|x| **x).count();
        let frac = agree as f64 / counted as f64;
        ok &= frac >= 0.99;
        report.push(format!("a={a} c={c} rho={rho}: {:.2}%", 100.0 * frac));
    }
    ensure(ok, report.join("; "))
}

fn won_by_catalogue(s: State, p: &StructParams, grid: &[f64], opts: &SynthOptions) -> bool {
    if matches!(find_constant_winner(s, p, grid, &opts.sim), Ok(Some(_))) {
        return true;
    }
    if p.rho == 1.0 {
        return false;
    }
    let member = if p.rho < 1.0 { in_p(s, p) } else { in_q(s, p) };
    matches!(member, Ok(true)) && synth_heaviside(s, p, opts).map_or(false, |r| r.verified)
}

fn survives(s: State, p: &StructParams, grid: &[f64], seed: u64) -> bool {
    let sim = SimOptions::default().with_t_max(200.0);
    if grid.iter().any(|&a| wins(s, &Strategy::Constant(a), p, &sim)) {
        return false;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..50).all(|_| !wins(s, &random_piecewise(&mut rng, 1e-3, 1e3, true), p, &sim))
}

fn victory_formulas() -> Check {
    const N: usize = 41;
    let grid = default_constant_grid();
    let opts = SynthOptions::default();
    let mut report = Vec::new();
    let mut ok = true;
    for (c, rho) in [(4.0, 0.5), (4.0, 1.0), (4.0, 2.0), (2.0, 1.0)] {
        let p = params(c, rho);
        let pts = centre_grid(N);
        let member: Vec<bool> = pts.iter().map(|s| in_victory_set(*s, &p).unwrap()).collect();
        let in_band = |k: usize| {
            let (i, j) = ((k % N) as isize, (k / N) as isize);
            (-2..=2).any(|di| {
                (-2..=2).any(|dj| {
                    let (x, y) = (i + di, j + dj);
                    (0..N as isize).contains(&x)
                        && (0..N as isize).contains(&y)
                        && member[(y * N as isize + x) as usize] != member[k]
                })
            })
        };
        let bad: Vec<(usize, bool)> = (0..pts.len())
            .into_par_iter()
            .filter_map(|k| {
                let right = if member[k] {
                    won_by_catalogue(pts[k], &p, &grid, &opts)
                } else {
                    survives(pts[k], &p, &grid, k as u64)
                };
                (!right).then(|| (k, in_band(k)))
            })
            .collect();
        let outside = bad.iter().filter(|(_, b)| !b).count();
        ok &= outside == 0;
        report.push(format!("c={c} rho={rho}: {outside} outside band, {} in band", bad.len() - outside));
    }
    ensure(ok, report.join("; "))
}

fn constants_insufficient() -> Check {
    let grid = default_constant_grid();
    let opts = SynthOptions::default();
    let mut report = Vec::new();
    let mut ok = true;
    for (c, rho) in [(4.0, 0.5), (4.0, 2.0)] {
        let p = params(c, rho);
        let n = 200;
        let found = (1..n).flat_map(|i| (1..n).map(move |j| (i, j))).find_map(|(i, j)| {
            let s = State::new(i as f64 / n as f64, j as f64 / n as f64);
            let member = if rho < 1.0 { in_p(s, &p) } else { in_q(s, &p) };
            if !matches!(member, Ok(true)) || !matches!(find_constant_winner(s, &p, &grid, &opts.sim), Ok(None)) {
                return None;
            }
            heaviside_construction(s, &p, &opts).ok().filter(|r| r.verified).map(|r| (s, r.strategy))
        });
        match found {
            Some((s, strat)) => report.push(format!("rho={rho}: ({}, {}) by {strat:?}", s.u, s.v)),
            None => {
                ok = false;
                report.push(format!("rho={rho}: no witness"));
            }
        }
    }
    ensure(ok, report.join("; "))
}

fn excluded_starts(bound: &ConstrainedBound, rng: &mut ChaCha8Rng, n: usize) -> Vec<State> {
    let mut out = Vec::new();
    while out.len() < n {
        let s = State::new(rng.gen_range(0.01..=1.0), rng.gen_range(0.0..=1.0));
        if bound.excludes(s) {
            out.push(s);
        }
    }
    out
}

fn constrained_bounds() -> Check {
    let (m, big_m) = (0.05, 5.0);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let sim = SimOptions::default().with_t_max(200.0);
    let mut report = Vec::new();
    let mut ok = true;
    for (c, rho) in [(4.0, 0.5), (4.0, 2.0)] {
        let p = params(c, rho);
        let (lo, hi) = eps_range(&p, big_m);
        let bound = constrained_bound(&p, m, big_m, 0.5 * (lo + hi)).map_err(|e| e.to_string())?;
        let jump = bound.max_jump();
        let starts = excluded_starts(&bound, &mut rng, 30);
        let seeds: Vec<u64> = (0..30).map(|_| rng.gen()).collect();
        let winners = starts
            .par_iter()
            .zip(seeds)
            .filter(|(s, seed)| {
                let mut r = ChaCha8Rng::seed_from_u64(*seed);
                (0..100).any(|_| wins(**s, &random_piecewise(&mut r, m, big_m, false), &p, &sim))
            })
            .count();
        let w = bound.witness(0.5).map_err(|e| e.to_string())?;
        let witness_ok = in_victory_set(w, &p).unwrap() && bound.excludes(w);
        ok &= jump < 1e-12 && winners == 0 && witness_ok;
        report.push(format!(
            "rho={rho}: jump {jump:.1e}, {winners} excluded starts won, witness ({:.4}, {:.4}) {}",
            w.u,
            w.v,
            if witness_ok { "ok" } else { "bad" }
        ));
    }
    ensure(ok, report.join("; "))
}

fn singular_arc_optimum() -> Check {
    let p = params(4.0, 0.5);
    let s0 = State::new(0.5, 0.1875);
    let res = minimize_time(s0, &p, 0.0, 10.0, &OptimalOptions::default()).map_err(|e| e.to_string())?;
    let fine = OptimalOptions { n_nodes: 128, ..OptimalOptions::default() };
    let refined = minimize_time(s0, &p, 0.0, 10.0, &fine).map_err(|e| e.to_string())?;
    let h = verify_pontryagin(&refined, &p, 0.2).h_max;
    let window = res.singular_window(&p, 0.5);
    let sim = SimOptions::default();
    let replay = simulate(s0, &res.strategy, &p, &sim).map_err(|e| e.to_string())?.1;
    let replay_err = match replay {
        Outcome::Extinction { t_s, .. } => (t_s - res.t_opt).abs(),
        _ => f64::INFINITY,
    };
    let beaten = res.starts.iter().all(|s| res.t_opt <= s.t_initial);
    ensure(
        res.converged && window >= 0.2 && h < 1e-2 && replay_err < 10.0 * sim.event_tol && beaten,
        format!(
            "T={:.8}, converged={}, singular window {window:.3}, |H| {h:.1e}, replay error {replay_err:.1e}, beats initializers={beaten}",
            res.t_opt, res.converged
        ),
    )
}

fn nesting_in_c() -> Check {
    let spec = GridSpec::unit(61, 61);
    let o = BasinOptions::default();
    let inner = basin_grid(0.8, &params(2.0, 2.0), &spec, &o).map_err(|e| e.to_string())?;
    let outer = basin_grid(0.8, &params(0.5, 2.0), &spec, &o).map_err(|e| e.to_string())?;
    let v = nesting_violation(&inner, &outer).map_err(|e| e.to_string())?;
    ensure(v <= 0.02, format!("violation fraction {v:.4}"))
}

fn outcome_flip() -> Check {
    let s0 = State::new(1.4045, 1.1);
    let run = |rho: f64| {
        simulate(s0, &Strategy::Constant(0.2), &params(0.1, rho), &SimOptions::default()).map(|(_, o)| o)
    };
    let (o3, o7) = (run(3.0).map_err(|e| e.to_string())?, run(7.0).map_err(|e| e.to_string())?);
    ensure(
        matches!(o3, Outcome::ConvergedToSink { .. }) && o7.is_extinction(),
        format!("rho=3: {o3:?}; rho=7: {o7:?}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("equilibrium regimes", equilibrium_regimes),
        ("rho = 1 stopping-time oracle", rho_one_oracle),
        ("a = 0 invariant and limit", no_aggression_invariant),
        ("separatrix agrees with simulated basins", separatrix_agreement),
        ("victory-set formulas", victory_formulas),
        ("constant strategies insufficient for rho != 1", constants_insufficient),
        ("box-constrained bounds", constrained_bounds),
        ("minimum time with singular arc", singular_arc_optimum),
        ("extinction basins nest in c", nesting_in_c),
        ("outcome flip between rho = 3 and rho = 7", outcome_flip),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t0.elapsed().as_secs_f64();
        match res {
            Ok(d) => println!("PASS {:>2} {name} ({secs:.1} s): {d}", k + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.1} s): {d}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
