use conflict_dyn::equilibria::{
    classify_eigenvalues, find_equilibria, nullcline_sigma, saddle_point, zero_band, EquilibriumClass,
};
use conflict_dyn::model::{jacobian, vector_field};
use conflict_dyn::{State, StructParams};
use num_complex::Complex64;
use proptest::prelude::*;

fn sorted_re(e: &[Complex64; 2]) -> [f64; 2] {
    let mut r = [e[0].re, e[1].re];
    r.sort_by(f64::total_cmp);
    r
}

fn close(got: [f64; 2], mut want: [f64; 2]) -> bool {
    want.sort_by(f64::total_cmp);
    (got[0] - want[0]).abs() < 1e-12 && (got[1] - want[1]).abs() < 1e-12
}

fn classify_tight(e: &[Complex64; 2]) -> EquilibriumClass {
    let band = 0.1 * zero_band(e);
    let (r0, r1) = (e[0].re, e[1].re);
    if r0.abs() < band || r1.abs() < band {
        EquilibriumClass::DegenerateZeroEigen
    } else if r0 < 0.0 && r1 < 0.0 {
        EquilibriumClass::Sink
    } else if r0 > 0.0 && r1 > 0.0 {
        EquilibriumClass::Source
    } else {
        EquilibriumClass::Saddle
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn equilibria_are_rest_points_with_closed_form_spectra(
        a in 0.001f64..20.0,
        c in 0.01f64..10.0,
        rho in 0.01f64..10.0,
    ) {
        let p = StructParams::new(c, rho).unwrap();
        for eq in find_equilibria(a, &p) {
            let (du, dv) = vector_field(eq.location, a, &p);
            prop_assert!(du.hypot(dv) < 1e-12, "{eq:?}");
            prop_assert_eq!(eq.class, classify_tight(&eq.eigenvalues));
            let s = eq.location;
            if s == State::ORIGIN {
                prop_assert!(close(sorted_re(&eq.eigenvalues), [rho, 1.0 - a * c]));
            } else if s == State::SINK {
                prop_assert!(close(sorted_re(&eq.eigenvalues), [-a * c, -rho]));
                prop_assert_eq!(eq.class, EquilibriumClass::Sink);
            } else {
                prop_assert!(a * c < 1.0);
                let j = jacobian(s, a, &p);
                prop_assert!(j[0][0] * j[1][1] - j[0][1] * j[1][0] < 0.0);
                prop_assert_eq!(eq.class, EquilibriumClass::Saddle);
            }
        }
        prop_assert_eq!(find_equilibria(a, &p).len(), if a * c < 1.0 { 3 } else { 2 });
    }

    #[test]
    fn sigma_is_the_v_nullcline(v in 0.0f64..=1.0, a in 0.01f64..10.0, c in 0.1f64..5.0, rho in 0.1f64..5.0) {
        let p = StructParams::new(c, rho).unwrap();
        let u = nullcline_sigma(v, a, &p);
        let (_, dv) = vector_field(State::new(u, v), a, &p);
        prop_assert!(dv.abs() < 1e-12);
    }
}

#[test]
fn saddle_lies_on_the_nullcline() {
    let p = StructParams::new(0.5, 2.0).unwrap();
    let s = saddle_point(0.8, &p).unwrap();
    assert!((s.u - 0.3).abs() < 1e-15 && (s.v - 0.3).abs() < 1e-15);
    assert!((nullcline_sigma(s.v, 0.8, &p) - 0.3).abs() < 1e-12);
}

#[test]
fn regimes_match_the_classification() {
    use EquilibriumClass::*;
    let cases = [
        (0.8, 0.5, 2.0, vec![Source, Sink, Saddle]),
        (0.8, 3.0, 2.0, vec![Saddle, Sink]),
        (2.0, 0.5, 1.0, vec![DegenerateZeroEigen, Sink]),
    ];
    for (a, c, rho, want) in cases {
        let p = StructParams::new(c, rho).unwrap();
        let got: Vec<_> = find_equilibria(a, &p).iter().map(|e| e.class).collect();
        assert_eq!(got, want, "a={a} c={c} rho={rho}");
        for e in find_equilibria(a, &p) {
            assert_eq!(classify_eigenvalues(&e.eigenvalues), e.class);
        }
    }
}
