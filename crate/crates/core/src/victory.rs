//! Closed-form victory sets and bounds for box-constrained strategies.

use crate::equilibria::saddle_limit;
use crate::error::{Error, Result};
use crate::model::{State, StructParams};
use crate::separatrix::gamma0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    RhoEq1,
    RhoLt1,
    RhoGt1,
}

impl Regime {
    pub fn of(rho: f64) -> Self {
        if rho == 1.0 {
            Regime::RhoEq1
        } else if rho < 1.0 {
            Regime::RhoLt1
        } else {
            Regime::RhoGt1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PieceKind {
    /// `v = u / c`
    LineUC,
    /// `v = gamma0(u)`
    Gamma0,
    /// `v = u / c + (1 - rho) / (1 + rho c)`
    ShiftedLine,
    /// `v = u^rho / (c u_inf^(rho - 1))`
    Zeta,
    /// Every `v <= 1` is admissible.
    Top,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub kind: PieceKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VictoryBoundary {
    pub params: StructParams,
    pub regime: Regime,
    /// Ordered pieces tiling `[0, 1]`; a Top piece is open on the left.
    pub pieces: Vec<Piece>,
    pub u_s0: f64,
    pub u_inf: f64,
    /// `c u_inf^(rho - 1)`, the denominator of `zeta`.
    pub zeta_scale: f64,
}

/// `u / c`.
pub fn line_uc(u: f64, p: &StructParams) -> f64 {
    u / p.c
}

pub fn shifted_line(u: f64, p: &StructParams) -> f64 {
    u / p.c + (1.0 - p.rho) / (1.0 + p.rho * p.c)
}

pub fn u_inf(p: &StructParams) -> f64 {
    p.c / (p.c + 1.0)
}

pub fn zeta(u: f64, p: &StructParams) -> f64 {
    u.powf(p.rho) / (p.c * u_inf(p).powf(p.rho - 1.0))
}

pub fn victory_boundary(p: &StructParams) -> Result<VictoryBoundary> {
    p.validate()?;
    if !(p.c > 0.0) || !(p.rho > 0.0) {
        return Err(Error::InvalidParams("victory set needs c > 0 and rho > 0".into()));
    }
    let (c, rho) = (p.c, p.rho);
    let regime = Regime::of(rho);
    let u_s0 = saddle_limit(p).u;
    let ui = u_inf(p);
    let mut pieces = Vec::new();
    let push_top = |pieces: &mut Vec<Piece>, from: f64| {
        if from < 1.0 {
            pieces.push(Piece { lo: from, hi: 1.0, kind: PieceKind::Top });
        }
    };
    match regime {
        Regime::RhoEq1 => {
            pieces.push(Piece { lo: 0.0, hi: c.min(1.0), kind: PieceKind::LineUC });
            push_top(&mut pieces, c);
        }
        Regime::RhoLt1 => {
            let b = rho * c * (c + 1.0) / (1.0 + rho * c);
            pieces.push(Piece { lo: 0.0, hi: u_s0, kind: PieceKind::Gamma0 });
            pieces.push(Piece { lo: u_s0, hi: b.min(1.0), kind: PieceKind::ShiftedLine });
            push_top(&mut pieces, b);
        }
        Regime::RhoGt1 => {
            let w = c / (c + 1.0).powf((rho - 1.0) / rho);
            pieces.push(Piece { lo: 0.0, hi: ui, kind: PieceKind::LineUC });
            pieces.push(Piece { lo: ui, hi: w.min(1.0), kind: PieceKind::Zeta });
            push_top(&mut pieces, w);
        }
    }
    Ok(VictoryBoundary {
        params: *p,
        regime,
        pieces,
        u_s0,
        u_inf: ui,
        zeta_scale: c * ui.powf(rho - 1.0),
    })
}

impl VictoryBoundary {
    /// The piece governing abscissa `u`; earlier pieces win ties.
    pub fn piece_at(&self, u: f64) -> Option<&Piece> {
        if !(0.0..=1.0).contains(&u) {
            return None;
        }
        self.pieces.iter().find(|pc| u <= pc.hi)
    }

    /// Boundary height at `u`; Top pieces report 1.
    pub fn eval(&self, u: f64) -> Option<f64> {
        let p = &self.params;
        let pc = self.piece_at(u)?;
        Some(match pc.kind {
            PieceKind::LineUC => line_uc(u, p),
            PieceKind::Gamma0 => gamma0(u, p),
            PieceKind::ShiftedLine => shifted_line(u, p),
            PieceKind::Zeta => zeta(u, p),
            PieceKind::Top => 1.0,
        })
    }

    /// Strict inequality below curve pieces, `v <= 1` on Top pieces.
    pub fn contains(&self, s: State) -> bool {
        if !(s.v >= 0.0) {
            return false;
        }
        match self.piece_at(s.u) {
            None => false,
            Some(pc) if pc.kind == PieceKind::Top => s.v <= 1.0,
            Some(_) => s.v < self.eval(s.u).unwrap(),
        }
    }
}

/// Whether some admissible strategy wins from `s0`.
pub fn in_victory_set(s0: State, p: &StructParams) -> Result<bool> {
    Ok(victory_boundary(p)?.contains(s0))
}

/// Exact ratio law `mu = v/u` for `rho = 1` in the clock `tau = a t`.
pub fn rho1_mu_flow(mu0: f64, c: f64, tau: f64) -> f64 {
    ((c * tau).exp() * (c * mu0 - 1.0) + 1.0) / c
}

/// The `tau` at which `mu` vanishes, infinite when `c mu0 >= 1`.
pub fn rho1_zero_time(mu0: f64, c: f64) -> f64 {
    if c * mu0 >= 1.0 {
        f64::INFINITY
    } else {
        (1.0 / (1.0 - c * mu0)).ln() / c
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundShape {
    /// `f_eps` for `rho < 1`.
    Lower { h: f64, u1: f64, p: f64, u_sm: f64, u_s0: f64 },
    /// `g_eps` for `rho > 1`.
    Upper { k: f64, q: f64, u2: f64, u3: f64 },
}

/// A curve above which no strategy with values in `[m, M]` wins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstrainedBound {
    pub params: StructParams,
    pub m: f64,
    pub big_m: f64,
    pub eps: f64,
    pub shape: BoundShape,
}

/// Admissible interval `(0, min{M(c+1)/(M+1), 1})` for `eps`.
pub fn eps_range(p: &StructParams, big_m: f64) -> (f64, f64) {
    (0.0, (big_m * (p.c + 1.0) / (big_m + 1.0)).min(1.0))
}

pub fn constrained_bound(p: &StructParams, m: f64, big_m: f64, eps: f64) -> Result<ConstrainedBound> {
    p.validate()?;
    if !(p.c > 0.0) || !(p.rho > 0.0) {
        return Err(Error::InvalidParams("bound needs c > 0 and rho > 0".into()));
    }
    if !(m >= 0.0) || !(big_m >= m) || !(big_m > 0.0) || !big_m.is_finite() {
        return Err(Error::InvalidInput(format!("need M >= m >= 0 and M > 0, got m = {m}, M = {big_m}")));
    }
    let (lo, hi) = eps_range(p, big_m);
    if !(eps > lo && eps < hi) {
        return Err(Error::Range { name: "eps", value: eps, lo, hi });
    }
    let (c, rho) = (p.c, p.rho);
    let shape = match Regime::of(rho) {
        Regime::RhoEq1 => return Err(Error::Regime { expected: "rho != 1", rho }),
        Regime::RhoLt1 => {
            let r = rho * c + rho + eps - eps * rho;
            let d = (1.0 + rho * c) * (c + 1.0 - eps);
            let h = (1.0 - eps * eps * (1.0 - rho) / (big_m * d * (c + 1.0 - eps) + eps * r)) / c;
            let u1 = c * r / d;
            let pp = (c + 1.0 - h * c * r) / d;
            let u_sm = ((1.0 - m * c) * rho * c / (1.0 + rho * c)).max(0.0);
            BoundShape::Lower { h, u1, p: pp, u_sm, u_s0: saddle_limit(p).u }
        }
        Regime::RhoGt1 => {
            let k = (c + 1.0 - eps) * big_m / ((rho - 1.0) * eps * c + (c + 1.0 - eps) * big_m * c);
            let den = k - k * eps + 1.0;
            let q = (k * c - 1.0) * (1.0 - eps) / (c * den);
            let u2 = (1.0 - eps) / den;
            let u3 = (c + 1.0 - eps) / ((c + 1.0) * den);
            BoundShape::Upper { k, q, u2, u3 }
        }
    };
    Ok(ConstrainedBound { params: *p, m, big_m, eps, shape })
}

impl ConstrainedBound {
    pub fn eval(&self, u: f64) -> f64 {
        let (c, rho) = (self.params.c, self.params.rho);
        match self.shape {
            BoundShape::Lower { h, u1, p, u_sm, u_s0 } => {
                if u < u_sm {
                    u_sm.powf(1.0 - rho) * u.powf(rho) / (rho * c)
                } else if u < u_s0 {
                    u / (rho * c)
                } else if u < u1 {
                    shifted_line(u, &self.params)
                } else {
                    h * u + p
                }
            }
            BoundShape::Upper { k, q, u2, u3 } => {
                if u < u2 {
                    k * u
                } else if u < u3 {
                    u / c + q
                } else {
                    (1.0 - u3) * (u / u3).powf(rho)
                }
            }
        }
    }

    /// Abscissae where consecutive pieces meet.
    pub fn junctions(&self) -> Vec<f64> {
        match self.shape {
            BoundShape::Lower { u1, u_sm, u_s0, .. } => {
                let mut v = Vec::new();
                if u_sm > 0.0 {
                    v.push(u_sm);
                }
                if u_s0 > u_sm {
                    v.push(u_s0);
                }
                v.push(u1);
                v
            }
            BoundShape::Upper { u2, u3, .. } => vec![u2, u3],
        }
    }

    /// Largest jump of the bound across its junctions.
    pub fn max_jump(&self) -> f64 {
        self.junctions()
            .into_iter()
            .map(|u| (self.eval(u * (1.0 - f64::EPSILON)) - self.eval(u)).abs())
            .fold(0.0, f64::max)
    }

    /// `v >= bound(u)`: no strategy in `[m, M]` wins from here.
    pub fn excludes(&self, s: State) -> bool {
        s.v >= self.eval(s.u)
    }

    /// A point in the unconstrained victory set that the bound excludes;
    /// `t` in `(0, 1)` places `u` inside the admissible interval.
    pub fn witness(&self, t: f64) -> Result<State> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::Range { name: "t", value: t, lo: 0.0, hi: 1.0 });
        }
        let p = &self.params;
        let (c, rho) = (p.c, p.rho);
        match self.shape {
            BoundShape::Lower { h, u1, p: pp, .. } => {
                let cap = rho * c * (c + 1.0) / (1.0 + rho * c);
                if !(self.eps < cap) {
                    return Err(Error::Range { name: "eps", value: self.eps, lo: 0.0, hi: cap });
                }
                let hi = cap.min(1.0);
                let u = u1 + t * (hi - u1);
                Ok(State::new(u, 0.5 * (h * u + pp) + 0.5 * shifted_line(u, p)))
            }
            BoundShape::Upper { k, u2, .. } => {
                let u = t * u2.min(u_inf(p));
                Ok(State::new(u, 0.5 * (1.0 / c + k) * u))
            }
        }
    }
}

pub fn above_bound_excluded(s0: State, bound: &ConstrainedBound) -> bool {
    bound.excludes(s0)
}
