//! Equilibria of the model under constant aggressiveness.

use num_complex::Complex64;

use crate::model::{jacobian, State, StructParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumClass {
    Source,
    Sink,
    Saddle,
    DegenerateZeroEigen,
    LineOfEquilibria,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumInfo {
    /// For a line of equilibria, the midpoint of `segment`.
    pub location: State,
    /// Eigenvalues of the Jacobian at `location`.
    pub eigenvalues: [Complex64; 2],
    pub class: EquilibriumClass,
    pub segment: Option<(State, State)>,
}

/// Eigenvalues of a real 2x2 matrix by the quadratic formula.
pub fn eigenvalues_2x2(m: [[f64; 2]; 2]) -> [Complex64; 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = Complex64::new(0.25 * tr * tr - det, 0.0).sqrt();
    let half = Complex64::new(0.5 * tr, 0.0);
    [half + disc, half - disc]
}

pub fn eigenvalues_at(s: State, a: f64, p: &StructParams) -> [Complex64; 2] {
    eigenvalues_2x2(jacobian(s, a, p))
}

/// `|re(lambda)|` below `1e-10 (1 + |trace|)` counts as zero.
pub fn zero_band(eig: &[Complex64; 2]) -> f64 {
    1e-10 * (1.0 + (eig[0] + eig[1]).re.abs())
}

pub fn classify_eigenvalues(eig: &[Complex64; 2]) -> EquilibriumClass {
    let band = zero_band(eig);
    let (r0, r1) = (eig[0].re, eig[1].re);
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

fn point(s: State, a: f64, p: &StructParams) -> EquilibriumInfo {
    let eigenvalues = eigenvalues_at(s, a, p);
    EquilibriumInfo {
        location: s,
        eigenvalues,
        class: classify_eigenvalues(&eigenvalues),
        segment: None,
    }
}

fn line(from: State, to: State, a: f64, p: &StructParams) -> EquilibriumInfo {
    let mid = State::new(0.5 * (from.u + to.u), 0.5 * (from.v + to.v));
    EquilibriumInfo {
        location: mid,
        eigenvalues: eigenvalues_at(mid, a, p),
        class: EquilibriumClass::LineOfEquilibria,
        segment: Some((from, to)),
    }
}

/// All equilibria in the closed unit square for constant `a`.
///
/// With `a = 0` the segment `u + v = 1` is a line of equilibria; with
/// `rho = 0` so is the segment `u = 0`.
pub fn find_equilibria(a: f64, p: &StructParams) -> Vec<EquilibriumInfo> {
    let mut out = Vec::new();
    if p.rho == 0.0 {
        out.push(line(State::ORIGIN, State::SINK, a, p));
        if a == 0.0 {
            out.push(line(State::SINK, State::new(1.0, 0.0), a, p));
        }
        return out;
    }
    if a == 0.0 {
        out.push(point(State::ORIGIN, a, p));
        out.push(line(State::SINK, State::new(1.0, 0.0), a, p));
        return out;
    }
    out.push(point(State::ORIGIN, a, p));
    out.push(point(State::SINK, a, p));
    let ac = a * p.c;
    if ac > 0.0 && ac < 1.0 {
        if let Some(s) = saddle_point(a, p) {
            out.push(point(s, a, p));
        }
    }
    out
}

/// Interior saddle for `0 < ac < 1`, the origin for `ac >= 1`; `None`
/// outside `a > 0, rho > 0`.
pub fn saddle_point(a: f64, p: &StructParams) -> Option<State> {
    if !(a > 0.0) || !(p.rho > 0.0) {
        return None;
    }
    let ac = a * p.c;
    if ac >= 1.0 {
        return Some(State::ORIGIN);
    }
    let k = (1.0 - ac) / (1.0 + p.rho * p.c);
    Some(State::new(k * p.rho * p.c, k))
}

/// Limit of the saddle as `a -> 0`: `(rho c, 1) / (1 + rho c)`.
pub fn saddle_limit(p: &StructParams) -> State {
    let d = 1.0 + p.rho * p.c;
    State::new(p.rho * p.c / d, 1.0 / d)
}

/// The `v' = 0` locus as a graph `u = sigma(v)`.
pub fn nullcline_sigma(v: f64, a: f64, p: &StructParams) -> f64 {
    1.0 - (p.rho * v * v + a) / (p.rho * v + a)
}
