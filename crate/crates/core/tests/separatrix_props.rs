use conflict_dyn::equilibria::saddle_point;
use conflict_dyn::separatrix::{gamma0, gamma0_u_max, SeparatrixRegime};
use conflict_dyn::{simulate, trace_gamma, BasinClass, Outcome, SimOptions, State, Strategy, StructParams, TraceOptions};
use proptest::prelude::*;

fn p(c: f64, rho: f64) -> StructParams {
    StructParams::new(c, rho).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn traced_curves_are_increasing_graphs(a in 0.05f64..5.0, c in 0.1f64..5.0, rho in 0.2f64..5.0) {
        let curve = trace_gamma(a, &p(c, rho), &TraceOptions::default()).unwrap();
        prop_assert!(curve.u_samples.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(curve.v_samples.windows(2).all(|w| w[1] >= w[0]));
        let e = curve.endpoint;
        prop_assert!((e.u - 1.0).abs() < 1e-9 || (e.v - 1.0).abs() < 1e-9, "{e:?}");
    }
}

#[test]
fn curve_separates_the_simulated_basins() {
    let cases = [
        (0.8, 0.5, 2.0, SeparatrixRegime::SaddleInterior),
        (0.5, 4.0, 0.5, SeparatrixRegime::SaddleOrigin),
        (2.0, 0.5, 1.5, SeparatrixRegime::CenterDegenerate),
    ];
    let sim = SimOptions::default().with_t_max(2000.0);
    for (a, c, rho, regime) in cases {
        let pp = p(c, rho);
        let opts = TraceOptions::default();
        let curve = trace_gamma(a, &pp, &opts).unwrap();
        assert_eq!(curve.regime, regime);
        let (mut checked, mut bad) = (0, Vec::new());
        for i in 0..20 {
            for j in 0..10 {
                let s = State::new((i as f64 + 0.5) / 20.0, (j as f64 + 0.5) / 10.0);
                if curve.distance(s) < 2.0 * opts.curve_tol {
                    continue;
                }
                let (_, out) = simulate(s, &Strategy::Constant(a), &pp, &sim).unwrap();
                let want = match out {
                    Outcome::Extinction { .. } => BasinClass::InE,
                    Outcome::ConvergedToSink { .. } => BasinClass::InB,
                    other => panic!("{s:?}: {other:?}"),
                };
                checked += 1;
                if curve.classify(s) != want {
                    bad.push(s);
                }
            }
        }
        assert!(checked > 150, "{checked}");
        assert!(bad.is_empty(), "{regime:?}: {bad:?}");
    }
}

#[test]
fn saddle_regime_stays_on_the_proper_side_of_u_over_rho_c() {
    for (a, c, rho) in [(0.1, 4.0, 0.5), (0.3, 1.0, 0.3), (0.8, 0.5, 2.0), (0.1, 2.0, 4.0)] {
        let pp = p(c, rho);
        let curve = trace_gamma(a, &pp, &TraceOptions::default()).unwrap();
        let us = saddle_point(a, &pp).unwrap().u;
        let tol = curve.curve_tol;
        let sign = if rho < 1.0 { 1.0 } else { -1.0 };
        for k in 0..=400 {
            let u = curve.u_max() * k as f64 / 400.0;
            let d = sign * (curve.eval(u).unwrap() - u / (rho * c));
            if u <= us {
                assert!(d >= -tol, "rho={rho} u={u} d={d}");
            } else {
                assert!(d <= tol, "rho={rho} u={u} d={d}");
            }
        }
    }
}

#[test]
fn larger_c_lowers_the_curve() {
    for (a, rho) in [(0.5, 0.5), (0.5, 2.0), (2.0, 1.0)] {
        let cs = [0.25, 0.5, 1.0, 2.0, 4.0];
        let curves: Vec<_> = cs
            .iter()
            .map(|&c| trace_gamma(a, &p(c, rho), &TraceOptions::default()).unwrap())
            .collect();
        for w in curves.windows(2) {
            let hi = w[0].u_max().min(w[1].u_max());
            for k in 0..=200 {
                let u = hi * k as f64 / 200.0;
                let (g1, g2) = (w[0].eval(u).unwrap(), w[1].eval(u).unwrap());
                assert!(g2 <= g1 + w[1].curve_tol, "a={a} rho={rho} u={u}: {g2} > {g1}");
            }
        }
    }
}

#[test]
fn small_a_curves_approach_the_limit() {
    for (c, rho) in [(4.0, 0.5), (0.5, 2.0), (2.0, 3.0)] {
        let pp = p(c, rho);
        let hi = gamma0_u_max(&pp);
        let sup: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&a| {
                let curve = trace_gamma(a, &pp, &TraceOptions::default()).unwrap();
                let top = hi.min(curve.u_max());
                (0..=500)
                    .map(|k| {
                        let u = top * k as f64 / 500.0;
                        (curve.eval(u).unwrap() - gamma0(u, &pp)).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(sup[0] > sup[1] && sup[1] > sup[2], "c={c} rho={rho}: {sup:?}");
    }
}
