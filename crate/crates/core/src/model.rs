//! State, parameters, strategies and the controlled vector field
//!
//! ```text
//! u' = u (1 - u - v) - a c u
//! v' = rho v (1 - u - v) - a u
//! ```
//!
//! `u` is the attacking population, `v` the attacked one, `a >= 0` the
//! aggressiveness of the attack, `c` the ratio of damage endured by `u` to
//! damage inflicted on `v`, and `rho` the fitness of `v` relative to `u`.

use crate::error::{Error, Result};

/// Structural constants of the rescaled model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructParams {
    pub c: f64,
    pub rho: f64,
}

impl StructParams {
    pub fn new(c: f64, rho: f64) -> Result<Self> {
        let p = Self { c, rho };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c >= 0.0) {
            return Err(Error::InvalidParams(format!("c = {} must be finite and >= 0", self.c)));
        }
        if !(self.rho.is_finite() && self.rho >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "rho = {} must be finite and >= 0",
                self.rho
            )));
        }
        Ok(())
    }
}

/// Population densities. Not restricted to the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State {
    pub u: f64,
    pub v: f64,
}

impl State {
    pub const ORIGIN: State = State { u: 0.0, v: 0.0 };
    pub const SINK: State = State { u: 0.0, v: 1.0 };

    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }

    pub fn dist(&self, other: &State) -> f64 {
        (self.u - other.u).hypot(self.v - other.v)
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.u, self.v]
    }

    pub fn from_array(y: [f64; 2]) -> Self {
        Self { u: y[0], v: y[1] }
    }
}

impl From<(f64, f64)> for State {
    fn from((u, v): (f64, f64)) -> Self {
        Self { u, v }
    }
}

/// Evaluates the controlled field at `s`.
pub fn vector_field(s: State, a: f64, p: &StructParams) -> (f64, f64) {
    let w = 1.0 - s.u - s.v;
    (s.u * w - a * p.c * s.u, p.rho * s.v * w - a * s.u)
}

/// Control-free part `F` of the field `F + a G`.
pub fn drift(s: State, p: &StructParams) -> (f64, f64) {
    let w = 1.0 - s.u - s.v;
    (s.u * w, p.rho * s.v * w)
}

/// Control direction `G` of the field `F + a G`.
pub fn control_direction(s: State, p: &StructParams) -> (f64, f64) {
    (-p.c * s.u, -s.u)
}

/// Jacobian of [`vector_field`] with respect to `(u, v)`, row major.
pub fn jacobian(s: State, a: f64, p: &StructParams) -> [[f64; 2]; 2] {
    let State { u, v } = s;
    [
        [1.0 - 2.0 * u - v - a * p.c, -u],
        [-p.rho * v - a, p.rho * (1.0 - u - 2.0 * v)],
    ]
}

/// Feedback value of the control that keeps the switching function at zero.
///
/// Defined for `u > 0` only; the expression diverges as `u -> 0+`.
pub fn singular_control(s: State, p: &StructParams) -> Result<f64> {
    if !(s.u > 0.0) {
        return Err(Error::DegenerateState { u: s.u });
    }
    let c = p.c;
    let num = (1.0 - s.u - s.v) * (s.u * (2.0 * c + 1.0 - p.rho * c) + p.rho * c);
    Ok(num / (2.0 * c * s.u * (c + 1.0)))
}

/// Time-dependent aggressiveness `a(t)`.
///
/// Piecewise variants are right-continuous at their breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    Constant(f64),
    Heaviside {
        before: f64,
        after: f64,
        t_switch: f64,
    },
    /// `values[0]` on `[0, breakpoints[0])`, `values[k]` on
    /// `[breakpoints[k-1], breakpoints[k])`, the last value afterwards.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    /// `values[i]` on `[times[i], times[i+1])`; the last value is held.
    Sampled { times: Vec<f64>, values: Vec<f64> },
    /// Singular-arc feedback clipped to `[min, max]`.
    SingularFeedback { min: f64, max: f64 },
}

fn check_level(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidStrategy(format!("{what} = {x} must be finite and >= 0")))
    }
}

fn check_increasing(ts: &[f64], what: &str) -> Result<()> {
    for t in ts {
        if !t.is_finite() {
            return Err(Error::InvalidStrategy(format!("{what} contains non-finite time")));
        }
    }
    if ts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidStrategy(format!("{what} must be strictly increasing")));
    }
    Ok(())
}

impl Strategy {
    pub fn constant(a: f64) -> Result<Self> {
        let s = Strategy::Constant(a);
        s.validate()?;
        Ok(s)
    }

    pub fn heaviside(before: f64, after: f64, t_switch: f64) -> Result<Self> {
        let s = Strategy::Heaviside {
            before,
            after,
            t_switch,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let s = Strategy::PiecewiseConstant {
            breakpoints,
            values,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn sampled(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let s = Strategy::Sampled { times, values };
        s.validate()?;
        Ok(s)
    }

    pub fn singular_feedback(min: f64, max: f64) -> Result<Self> {
        let s = Strategy::SingularFeedback { min, max };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Strategy::Constant(a) => check_level(*a, "a"),
            Strategy::Heaviside {
                before,
                after,
                t_switch,
            } => {
                check_level(*before, "a_before")?;
                check_level(*after, "a_after")?;
                if !(t_switch.is_finite() && *t_switch >= 0.0) {
                    return Err(Error::InvalidStrategy(format!(
                        "t_switch = {t_switch} must be finite and >= 0"
                    )));
                }
                Ok(())
            }
            Strategy::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                if values.len() != breakpoints.len() + 1 {
                    return Err(Error::InvalidStrategy(format!(
                        "{} breakpoints need {} values, got {}",
                        breakpoints.len(),
                        breakpoints.len() + 1,
                        values.len()
                    )));
                }
                check_increasing(breakpoints, "breakpoints")?;
                values.iter().try_for_each(|&x| check_level(x, "value"))
            }
            Strategy::Sampled { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(Error::InvalidStrategy(format!(
                        "sampled strategy needs matching non-empty grids, got {} times and {} values",
                        times.len(),
                        values.len()
                    )));
                }
                check_increasing(times, "time grid")?;
                values.iter().try_for_each(|&x| check_level(x, "value"))
            }
            Strategy::SingularFeedback { min, max } => {
                check_level(*min, "m")?;
                check_level(*max, "M")?;
                if min > max {
                    return Err(Error::InvalidStrategy(format!("m = {min} exceeds M = {max}")));
                }
                Ok(())
            }
        }
    }

    /// Times at which the strategy may jump, in increasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Strategy::Constant(_) | Strategy::SingularFeedback { .. } => Vec::new(),
            Strategy::Heaviside { t_switch, .. } => {
                if *t_switch > 0.0 {
                    vec![*t_switch]
                } else {
                    Vec::new()
                }
            }
            Strategy::PiecewiseConstant { breakpoints, .. } => {
                breakpoints.iter().copied().filter(|&t| t > 0.0).collect()
            }
            Strategy::Sampled { times, .. } => {
                times.iter().skip(1).copied().filter(|&t| t > 0.0).collect()
            }
        }
    }

    /// Whether the value depends on the state rather than on time alone.
    pub fn is_feedback(&self) -> bool {
        matches!(self, Strategy::SingularFeedback { .. })
    }

    /// Rewrites a Heaviside strategy as a one-breakpoint piecewise-constant one.
    pub fn to_piecewise(&self) -> Option<Strategy> {
        match self {
            Strategy::Heaviside {
                before,
                after,
                t_switch,
            } => Some(Strategy::PiecewiseConstant {
                breakpoints: vec![*t_switch],
                values: vec![*before, *after],
            }),
            Strategy::PiecewiseConstant { .. } => Some(self.clone()),
            _ => None,
        }
    }

    /// Value of `a` at time `t` and state `s`.
    pub fn value(&self, t: f64, s: State, p: &StructParams) -> Result<f64> {
        eval_strategy(self, t, s, p)
    }
}

/// Evaluates any strategy variant at `(t, s)`.
pub fn eval_strategy(strat: &Strategy, t: f64, s: State, p: &StructParams) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("strategy evaluated at t = {t} < 0")));
    }
    Ok(match strat {
        Strategy::Constant(a) => *a,
        Strategy::Heaviside {
            before,
            after,
            t_switch,
        } => {
            if t >= *t_switch {
                *after
            } else {
                *before
            }
        }
        Strategy::PiecewiseConstant {
            breakpoints,
            values,
        } => values[breakpoints.partition_point(|&b| b <= t)],
        Strategy::Sampled { times, values } => {
            let k = times.partition_point(|&x| x <= t);
            values[k.saturating_sub(1)]
        }
        Strategy::SingularFeedback { min, max } => singular_control(s, p)?.clamp(*min, *max),
    })
}

/// Pre-rescaling constants of the dimensional model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawParams {
    pub r_u: f64,
    pub r_v: f64,
    pub k: f64,
    pub a_raw: f64,
    pub c_u: f64,
    pub c_v: f64,
    pub zeta_u: f64,
    pub zeta_v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rescaled {
    pub params: StructParams,
    pub a: f64,
    /// Multiplier taking physical time to model time.
    pub time_scale: f64,
    /// Divisor taking physical densities to model densities.
    pub density_scale: f64,
}

/// Maps the dimensional constants onto `(c, rho, a)` and the two scales.
pub fn rescale_raw(raw: &RawParams) -> Result<Rescaled> {
    let all = [
        raw.r_u, raw.r_v, raw.k, raw.a_raw, raw.c_u, raw.c_v, raw.zeta_u, raw.zeta_v,
    ];
    if all.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidRawParams(
            "all raw constants must be finite and >= 0".into(),
        ));
    }
    let damage_v = raw.c_v + raw.zeta_v;
    if damage_v <= 0.0 {
        return Err(Error::InvalidRawParams("c_v + zeta_v must be > 0".into()));
    }
    if raw.r_u <= 0.0 {
        return Err(Error::InvalidRawParams("r_u must be > 0".into()));
    }
    if raw.k <= 0.0 {
        return Err(Error::InvalidRawParams("k must be > 0".into()));
    }
    Ok(Rescaled {
        params: StructParams {
            c: (raw.c_u + raw.zeta_u) / damage_v,
            rho: raw.r_v / raw.r_u,
        },
        a: raw.a_raw * damage_v / raw.r_u,
        time_scale: raw.r_u,
        density_scale: raw.k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::Strategy;
    use proptest::prelude::*;

    fn p(c: f64, rho: f64) -> StructParams {
        StructParams::new(c, rho).unwrap()
    }

    fn eig(m: [[f64; 2]; 2]) -> (f64, f64) {
        let tr = m[0][0] + m[1][1];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let disc = (tr * tr / 4.0 - det).sqrt();
        (tr / 2.0 - disc, tr / 2.0 + disc)
    }

    #[test]
    fn field_vanishes_at_equilibria() {
        for &a in &[0.0, 0.3, 5.0] {
            let pp = p(1.7, 0.4);
            assert_eq!(vector_field(State::ORIGIN, a, &pp), (0.0, 0.0));
            assert_eq!(vector_field(State::SINK, a, &pp), (0.0, 0.0));
        }
        let (du, dv) = vector_field(State::new(0.3, 0.3), 0.8, &p(0.5, 2.0));
        assert!(du.abs() < 1e-15 && dv.abs() < 1e-15, "{du} {dv}");
    }

    #[test]
    fn jacobian_eigenvalues_at_corners() {
        let (l1, l2) = eig(jacobian(State::SINK, 0.8, &p(0.5, 2.0)));
        assert!((l1 + 2.0).abs() < 1e-14 && (l2 + 0.4).abs() < 1e-14);
        let (l1, l2) = eig(jacobian(State::ORIGIN, 0.8, &p(0.5, 2.0)));
        assert!((l1 - 0.6).abs() < 1e-14 && (l2 - 2.0).abs() < 1e-14);
        let (l1, l2) = eig(jacobian(State::ORIGIN, 2.0, &p(1.0, 0.5)));
        assert!((l1 + 1.0).abs() < 1e-14 && (l2 - 0.5).abs() < 1e-14);
        assert!(l1 * l2 < 0.0);
    }

    #[test]
    fn heaviside_is_right_continuous() {
        let h = Strategy::heaviside(5.0, 0.1, 2.0).unwrap();
        let pp = p(1.0, 1.0);
        let s = State::new(0.5, 0.5);
        assert_eq!(h.value(1.9, s, &pp).unwrap(), 5.0);
        assert_eq!(h.value(2.0, s, &pp).unwrap(), 0.1);
    }

    #[test]
    fn singular_feedback_matches_hand_value() {
        let f = Strategy::singular_feedback(0.0, 10.0).unwrap();
        let a = f.value(0.0, State::new(0.5, 0.1875), &p(4.0, 0.5)).unwrap();
        assert!((a - 0.0859375).abs() < 1e-15);
        assert!(matches!(
            f.value(0.0, State::new(0.0, 0.5), &p(4.0, 0.5)),
            Err(Error::DegenerateState { .. })
        ));
        let clipped = Strategy::singular_feedback(0.0, 0.05).unwrap();
        assert_eq!(clipped.value(0.0, State::new(0.5, 0.1875), &p(4.0, 0.5)).unwrap(), 0.05);
    }

    #[test]
    fn sampled_and_piecewise_lookup() {
        let pp = p(1.0, 1.0);
        let s = State::default();
        let st = Strategy::sampled(vec![0.0, 1.0, 2.0], vec![3.0, 4.0, 5.0]).unwrap();
        assert_eq!(st.value(0.0, s, &pp).unwrap(), 3.0);
        assert_eq!(st.value(0.999, s, &pp).unwrap(), 3.0);
        assert_eq!(st.value(1.0, s, &pp).unwrap(), 4.0);
        assert_eq!(st.value(7.0, s, &pp).unwrap(), 5.0);
        assert_eq!(st.breakpoints(), vec![1.0, 2.0]);
        let pw = Strategy::piecewise(vec![1.0, 3.0], vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(pw.value(0.5, s, &pp).unwrap(), 1.0);
        assert_eq!(pw.value(3.0, s, &pp).unwrap(), 3.0);
    }

    #[test]
    fn invalid_strategies_rejected() {
        assert!(Strategy::constant(-1.0).is_err());
        assert!(Strategy::piecewise(vec![2.0, 1.0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(Strategy::piecewise(vec![1.0], vec![1.0]).is_err());
        assert!(Strategy::sampled(vec![], vec![]).is_err());
        assert!(Strategy::singular_feedback(2.0, 1.0).is_err());
        assert!(Strategy::constant(f64::NAN).is_err());
        assert!(eval_strategy(&Strategy::Constant(1.0), -0.5, State::default(), &p(1.0, 1.0)).is_err());
    }

    #[test]
    fn rescaling() {
        let id = RawParams {
            r_u: 1.0,
            r_v: 1.0,
            k: 1.0,
            a_raw: 0.8,
            c_u: 0.5,
            c_v: 0.25,
            zeta_u: 0.5,
            zeta_v: 0.75,
        };
        let r = rescale_raw(&id).unwrap();
        assert_eq!((r.params.c, r.params.rho, r.a), (1.0, 1.0, 0.8));

        let raw = RawParams {
            r_u: 2.0,
            r_v: 1.0,
            k: 100.0,
            a_raw: 4.0,
            c_u: 1.0,
            c_v: 0.5,
            zeta_u: 0.0,
            zeta_v: 0.0,
        };
        let r = rescale_raw(&raw).unwrap();
        assert_eq!((r.params.c, r.params.rho, r.a), (2.0, 0.5, 1.0));
        assert_eq!((r.time_scale, r.density_scale), (2.0, 100.0));

        let bad = RawParams { c_v: 0.0, zeta_v: 0.0, ..raw };
        assert!(matches!(rescale_raw(&bad), Err(Error::InvalidRawParams(_))));
    }

    #[test]
    fn boundary_edges_point_inward() {
        let pp = p(0.7, 1.3);
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            for &a in &[0.0, 0.5, 3.0] {
                let (_, dv) = vector_field(State::new(x, 1.0), a, &pp);
                assert!(-dv >= 0.0 && (-dv - x * (pp.rho + a)).abs() < 1e-14);
                let (du, _) = vector_field(State::new(1.0, x), a, &pp);
                assert!(-du >= 0.0 && (-du - (x + a * pp.c)).abs() < 1e-14);
            }
        }
    }

    proptest! {
        #[test]
        fn field_is_affine_in_control(u in -0.5f64..1.5, v in -0.5f64..1.5,
                                      c in 0.0f64..5.0, rho in 0.0f64..5.0) {
            let pp = p(c, rho);
            let s = State::new(u, v);
            let f = drift(s, &pp);
            let g = control_direction(s, &pp);
            for a in [0.0, 1.0, 2.0] {
                let (du, dv) = vector_field(s, a, &pp);
                prop_assert!((du - (f.0 + a * g.0)).abs() < 1e-14);
                prop_assert!((dv - (f.1 + a * g.1)).abs() < 1e-14);
            }
            let f0 = vector_field(s, 0.0, &pp);
            let f1 = vector_field(s, 1.0, &pp);
            let f2 = vector_field(s, 2.0, &pp);
            prop_assert!((f2.0 - 2.0 * f1.0 + f0.0).abs() < 1e-14);
            prop_assert!((f2.1 - 2.0 * f1.1 + f0.1).abs() < 1e-14);
        }

        #[test]
        fn jacobian_matches_central_differences(u in 0.0f64..1.0, v in 0.0f64..1.0,
                                                a in 0.0f64..5.0, c in 0.0f64..5.0,
                                                rho in 0.0f64..5.0) {
            let pp = p(c, rho);
            let h = 1e-6;
            let j = jacobian(State::new(u, v), a, &pp);
            let fu_p = vector_field(State::new(u + h, v), a, &pp);
            let fu_m = vector_field(State::new(u - h, v), a, &pp);
            let fv_p = vector_field(State::new(u, v + h), a, &pp);
            let fv_m = vector_field(State::new(u, v - h), a, &pp);
            let fd = [
                [(fu_p.0 - fu_m.0) / (2.0 * h), (fv_p.0 - fv_m.0) / (2.0 * h)],
                [(fu_p.1 - fu_m.1) / (2.0 * h), (fv_p.1 - fv_m.1) / (2.0 * h)],
            ];
            for r in 0..2 {
                for k in 0..2 {
                    prop_assert!((j[r][k] - fd[r][k]).abs() < 1e-6);
                }
            }
        }

        #[test]
        fn heaviside_agrees_with_piecewise(a1 in 0.0f64..10.0, a2 in 0.0f64..10.0,
                                           ts in 0.0f64..5.0, t in 0.0f64..10.0) {
            let pp = p(1.0, 1.0);
            let h = Strategy::heaviside(a1, a2, ts).unwrap();
            let pw = h.to_piecewise().unwrap();
            let s = State::default();
            prop_assert_eq!(h.value(t, s, &pp).unwrap(), pw.value(t, s, &pp).unwrap());
            prop_assert_eq!(h.value(ts, s, &pp).unwrap(), pw.value(ts, s, &pp).unwrap());
        }
    }
}
