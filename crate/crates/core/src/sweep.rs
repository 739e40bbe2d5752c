//! Basin grids over a rectangle of initial states and scans of the basin
//! of extinction against one parameter.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::integrator::{simulate, Outcome, SimOptions};
use crate::model::{State, Strategy, StructParams};
use crate::separatrix::{gamma0, gamma0_u_max, trace_gamma, BasinClass, SeparatrixCurve, TraceOptions};
use crate::victory::{line_uc, victory_boundary};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub u_range: (f64, f64),
    pub v_range: (f64, f64),
}

impl GridSpec {
    pub fn unit(nx: usize, ny: usize) -> Self {
        Self {
            nx,
            ny,
            u_range: (0.0, 1.0),
            v_range: (0.0, 1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::InvalidInput(format!("grid {}x{} is empty", self.nx, self.ny)));
        }
        for (name, (lo, hi)) in [("u", self.u_range), ("v", self.v_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi && lo >= 0.0) {
                return Err(Error::InvalidInput(format!("bad {name} range [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    fn axis(n: usize, (lo, hi): (f64, f64), i: usize) -> f64 {
        if n == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    }

    pub fn u_at(&self, i: usize) -> f64 {
        Self::axis(self.nx, self.u_range, i)
    }

    pub fn v_at(&self, j: usize) -> f64 {
        Self::axis(self.ny, self.v_range, j)
    }

    /// Row-major over `v`, then `u`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, k: usize) -> State {
        State::new(self.u_at(k % self.nx), self.v_at(k / self.nx))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    E,
    B,
    MBand,
    Undecided,
}

impl Cell {
    pub fn code(self) -> &'static str {
        match self {
            Cell::E => "E",
            Cell::B => "B",
            Cell::MBand => "M",
            Cell::Undecided => "U",
        }
    }

    pub fn from_code(s: &str) -> Option<Self> {
        Some(match s {
            "E" => Cell::E,
            "B" => Cell::B,
            "M" => Cell::MBand,
            "U" => Cell::Undecided,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasinGrid {
    pub spec: GridSpec,
    pub a: f64,
    pub params: StructParams,
    pub cells: Vec<Cell>,
    /// Cells decided by simulation rather than by the curve.
    pub simulated: usize,
    /// True when the separatrix could not be traced and every cell was simulated.
    pub trace_failed: bool,
    pub curve: Option<SeparatrixCurve>,
}

impl BasinGrid {
    pub fn cell(&self, i: usize, j: usize) -> Cell {
        self.cells[self.spec.index(i, j)]
    }

    pub fn fraction(&self, c: Cell) -> f64 {
        self.cells.iter().filter(|&&x| x == c).count() as f64 / self.cells.len() as f64
    }

    pub fn e_area(&self) -> f64 {
        self.fraction(Cell::E)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasinOptions {
    pub trace: TraceOptions,
    /// Cells with `|v - gamma(u)|` under this multiple of `curve_tol`, but
    /// outside the band itself, are confirmed by simulation.
    pub fallback_band: f64,
}

impl Default for BasinOptions {
    fn default() -> Self {
        Self {
            trace: TraceOptions::default(),
            fallback_band: 3.0,
        }
    }
}

fn cell_of(o: Outcome) -> Cell {
    match o {
        Outcome::Extinction { .. } => Cell::E,
        Outcome::ConvergedToSink { .. } => Cell::B,
        Outcome::Undecided { .. } | Outcome::DegenerateStart => Cell::Undecided,
    }
}

pub fn simulate_cell(s0: State, a: f64, p: &StructParams, sim: &SimOptions) -> Cell {
    match simulate(s0, &Strategy::Constant(a), p, sim) {
        Ok((_, o)) => cell_of(o),
        Err(_) => Cell::Undecided,
    }
}

/// Classifies every grid point under the constant strategy `a`.
pub fn basin_grid(a: f64, p: &StructParams, spec: &GridSpec, o: &BasinOptions) -> Result<BasinGrid> {
    p.validate()?;
    spec.validate()?;
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::InvalidInput(format!("aggressiveness {a} must be finite and >= 0")));
    }
    let curve = if a > 0.0 { trace_gamma(a, p, &o.trace).ok() } else { None };
    let sim = &o.trace.sim;
    let decided: Vec<(Cell, bool)> = (0..spec.len())
        .into_par_iter()
        .map(|k| {
            let s = spec.point(k);
            let Some(curve) = &curve else {
                return (simulate_cell(s, a, p, sim), true);
            };
            let tol = curve.curve_tol;
            let near = curve
                .eval(s.u.max(0.0))
                .map_or(false, |g| (s.v - g).abs() < o.fallback_band * tol);
            match curve.classify(s) {
                BasinClass::OnM => (Cell::MBand, false),
                _ if near => (simulate_cell(s, a, p, sim), true),
                BasinClass::InE => (Cell::E, false),
                BasinClass::InB => (Cell::B, false),
            }
        })
        .collect();
    Ok(BasinGrid {
        spec: *spec,
        a,
        params: *p,
        simulated: decided.iter().filter(|x| x.1).count(),
        cells: decided.into_iter().map(|x| x.0).collect(),
        trace_failed: a > 0.0 && curve.is_none(),
        curve,
    })
}

/// Share of cells in `E` for `inner` but not for `outer`, i.e. violations
/// of `E(inner) ⊆ E(outer)`.
pub fn nesting_violation(inner: &BasinGrid, outer: &BasinGrid) -> Result<f64> {
    if inner.spec != outer.spec {
        return Err(Error::InvalidInput("grids have different specs".into()));
    }
    let bad = inner
        .cells
        .iter()
        .zip(&outer.cells)
        .filter(|(x, y)| **x == Cell::E && **y != Cell::E)
        .count();
    Ok(bad as f64 / inner.cells.len() as f64)
}

/// Marks cells within `band` grid steps of a cell with a different label.
pub fn boundary_band_mask(g: &BasinGrid, band: usize) -> Vec<bool> {
    let (nx, ny) = (g.spec.nx, g.spec.ny);
    let mut mask = vec![false; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let c = g.cell(i, j);
            let i0 = i.saturating_sub(band);
            let j0 = j.saturating_sub(band);
            let hit = (j0..=(j + band).min(ny - 1))
                .any(|jj| (i0..=(i + band).min(nx - 1)).any(|ii| g.cell(ii, jj) != c));
            mask[g.spec.index(i, j)] = hit;
        }
    }
    mask
}

/// Membership of each grid point in the unconstrained victory set.
pub fn victory_grid(p: &StructParams, spec: &GridSpec) -> Result<Vec<bool>> {
    spec.validate()?;
    let vb = victory_boundary(p)?;
    Ok((0..spec.len()).map(|k| vb.contains(spec.point(k))).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    C,
    Rho,
    A,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::C => "c",
            SweepKind::Rho => "rho",
            SweepKind::A => "a",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepBase {
    pub a: f64,
    pub c: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub e_area: f64,
    pub b_area: f64,
    pub m_area: f64,
    pub undecided_area: f64,
    /// Violation of `E(this) ⊆ E(previous)`; `NaN` on the first row.
    pub nesting_violation: f64,
    /// Area of the limiting closed-form region on the same grid, when defined.
    pub limit_area: f64,
    pub trace_failed: bool,
    /// Outcome code of the probe start, if one was given.
    pub probe: Option<Cell>,
}

/// E-area of the limit sets as `a -> 0` and `a -> inf`, counted on `spec`.
pub fn limit_area(kind_small: bool, p: &StructParams, spec: &GridSpec) -> f64 {
    let u_m = gamma0_u_max(p);
    let inside = (0..spec.len())
        .filter(|&k| {
            let s = spec.point(k);
            if kind_small {
                if s.u <= u_m {
                    s.v < gamma0(s.u, p)
                } else {
                    s.v <= 1.0
                }
            } else {
                s.v < line_uc(s.u, p)
            }
        })
        .count();
    inside as f64 / spec.len() as f64
}

/// Basin measures for each value of one parameter, others fixed at `base`.
pub fn sweep(
    kind: SweepKind,
    values: &[f64],
    base: SweepBase,
    spec: &GridSpec,
    probe: Option<State>,
    o: &BasinOptions,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::InvalidInput("sweep needs at least one value".into()));
    }
    if values.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidInput("sweep values must be strictly increasing".into()));
    }
    let setups: Vec<(f64, StructParams)> = values
        .iter()
        .map(|&x| {
            let (a, c, rho) = match kind {
                SweepKind::C => (base.a, x, base.rho),
                SweepKind::Rho => (base.a, base.c, x),
                SweepKind::A => (x, base.c, base.rho),
            };
            StructParams::new(c, rho).map(|p| (a, p))
        })
        .collect::<Result<_>>()?;
    let grids: Vec<BasinGrid> = setups
        .iter()
        .map(|(a, p)| basin_grid(*a, p, spec, o))
        .collect::<Result<_>>()?;
    let probes: Vec<Option<Cell>> = setups
        .par_iter()
        .map(|(a, p)| probe.map(|s| simulate_cell(s, *a, p, &o.trace.sim)))
        .collect();
    let n = values.len();
    let mut rows = Vec::with_capacity(n);
    for k in 0..n {
        let g = &grids[k];
        let nesting = if k == 0 { f64::NAN } else { nesting_violation(g, &grids[k - 1])? };
        let limit = match kind {
            SweepKind::A if k == 0 => limit_area(true, &g.params, spec),
            SweepKind::A if k == n - 1 => limit_area(false, &g.params, spec),
            _ => f64::NAN,
        };
        rows.push(SweepRow {
            value: values[k],
            e_area: g.e_area(),
            b_area: g.fraction(Cell::B),
            m_area: g.fraction(Cell::MBand),
            undecided_area: g.fraction(Cell::Undecided),
            nesting_violation: nesting,
            limit_area: limit,
            trace_failed: g.trace_failed,
            probe: probes[k],
        });
    }
    Ok(rows)
}
