//! CSV and SVG output, plus parsers for every CSV written here.
//!
//! Numbers are written with 17 significant digits so that parsing
//! recovers the exact `f64`.

use std::fmt::Write as _;

use crate::equilibria::{EquilibriumClass, EquilibriumInfo};
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::model::{singular_control, State, StructParams};
use crate::optimal::{hamiltonian_path, OptimalResult};
use crate::sweep::{BasinGrid, Cell, GridSpec, SweepKind, SweepRow};

/// Shortest of fixed or exponent notation with 17 significant digits,
/// trailing zeros removed.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-5..17).contains(&exp) {
        trim_zeros(format!("{:.*}", (16 - exp) as usize, x))
    } else {
        format!("{}e{exp}", trim_zeros(mant.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn write_table<I>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Csv(e.to_string()))
}

fn read_table(text: &str, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let got: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if got != header {
        return Err(Error::Csv(format!("expected header {header:?}, found {got:?}")));
    }
    let rows: Vec<csv::StringRecord> = r.records().collect::<std::result::Result<_, _>>()?;
    Ok(rows)
}

fn num(rec: &csv::StringRecord, i: usize) -> Result<f64> {
    let s = rec.get(i).unwrap_or("");
    s.parse()
        .map_err(|_| Error::Csv(format!("bad number {s:?} in column {i}")))
}

fn int(rec: &csv::StringRecord, i: usize) -> Result<usize> {
    let s = rec.get(i).unwrap_or("");
    s.parse()
        .map_err(|_| Error::Csv(format!("bad index {s:?} in column {i}")))
}

const TRAJ_HEADER: [&str; 4] = ["t", "u", "v", "a"];

pub fn trajectory_csv(traj: &Trajectory) -> Result<String> {
    write_table(
        &TRAJ_HEADER,
        (0..traj.len()).map(|k| {
            let s = traj.states[k];
            vec![
                fmt_num(traj.times[k]),
                fmt_num(s.u),
                fmt_num(s.v),
                fmt_num(traj.controls[k]),
            ]
        }),
    )
}

pub fn parse_trajectory_csv(text: &str) -> Result<Trajectory> {
    let rows = read_table(text, &TRAJ_HEADER)?;
    let mut t = Trajectory::default();
    for r in &rows {
        t.times.push(num(r, 0)?);
        t.states.push(State::new(num(r, 1)?, num(r, 2)?));
        t.controls.push(num(r, 3)?);
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalRow {
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub a: f64,
    /// `NaN` where `u = 0`.
    pub a_s: f64,
    pub phi: f64,
    pub h: f64,
}

const OPT_HEADER: [&str; 7] = ["t", "u", "v", "a", "a_s", "phi", "H"];

pub fn optimal_rows(res: &OptimalResult, p: &StructParams) -> Vec<OptimalRow> {
    let traj = &res.trajectory;
    let adj = &res.adjoint;
    let h = hamiltonian_path(traj, adj, p);
    (0..traj.len())
        .map(|k| {
            let s = traj.states[k];
            OptimalRow {
                t: traj.times[k],
                u: s.u,
                v: s.v,
                a: traj.controls[k],
                a_s: singular_control(s, p).unwrap_or(f64::NAN),
                phi: p.c * adj.p_u[k] + adj.p_v[k],
                h: h[k],
            }
        })
        .collect()
}

pub fn optimal_csv(rows: &[OptimalRow]) -> Result<String> {
    write_table(
        &OPT_HEADER,
        rows.iter().map(|r| {
            [r.t, r.u, r.v, r.a, r.a_s, r.phi, r.h]
                .iter()
                .map(|&x| fmt_num(x))
                .collect()
        }),
    )
}

pub fn parse_optimal_csv(text: &str) -> Result<Vec<OptimalRow>> {
    read_table(text, &OPT_HEADER)?
        .iter()
        .map(|r| {
            Ok(OptimalRow {
                t: num(r, 0)?,
                u: num(r, 1)?,
                v: num(r, 2)?,
                a: num(r, 3)?,
                a_s: num(r, 4)?,
                phi: num(r, 5)?,
                h: num(r, 6)?,
            })
        })
        .collect()
}

/// Cells and coordinates recovered from a grid CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedGrid<T> {
    pub nx: usize,
    pub ny: usize,
    pub points: Vec<State>,
    pub cells: Vec<T>,
}

fn grid_csv<T>(spec: &GridSpec, last: &str, cells: &[T], show: impl Fn(&T) -> String) -> Result<String> {
    write_table(
        &["i", "j", "u", "v", last],
        (0..spec.len()).map(|k| {
            let s = spec.point(k);
            vec![
                (k % spec.nx).to_string(),
                (k / spec.nx).to_string(),
                fmt_num(s.u),
                fmt_num(s.v),
                show(&cells[k]),
            ]
        }),
    )
}

fn parse_grid<T>(text: &str, last: &str, read: impl Fn(&str) -> Option<T>) -> Result<ParsedGrid<T>> {
    let rows = read_table(text, &["i", "j", "u", "v", last])?;
    if rows.is_empty() {
        return Err(Error::Csv("grid has no rows".into()));
    }
    let mut nx = 0;
    let mut ny = 0;
    let mut points = Vec::with_capacity(rows.len());
    let mut cells = Vec::with_capacity(rows.len());
    for r in &rows {
        nx = nx.max(int(r, 0)? + 1);
        ny = ny.max(int(r, 1)? + 1);
        points.push(State::new(num(r, 2)?, num(r, 3)?));
        let code = r.get(4).unwrap_or("");
        cells.push(read(code).ok_or_else(|| Error::Csv(format!("bad cell {code:?}")))?);
    }
    if nx * ny != rows.len() {
        return Err(Error::Csv(format!("{} rows for a {nx}x{ny} grid", rows.len())));
    }
    for (k, r) in rows.iter().enumerate() {
        if int(r, 0)? != k % nx || int(r, 1)? != k / nx {
            return Err(Error::Csv(format!("row {k} out of order")));
        }
    }
    Ok(ParsedGrid { nx, ny, points, cells })
}

pub fn basin_csv(g: &BasinGrid) -> Result<String> {
    grid_csv(&g.spec, "cell", &g.cells, |c| c.code().to_string())
}

pub fn parse_basin_csv(text: &str) -> Result<ParsedGrid<Cell>> {
    parse_grid(text, "cell", Cell::from_code)
}

pub fn victory_csv(spec: &GridSpec, inside: &[bool]) -> Result<String> {
    grid_csv(spec, "in_victory", inside, |b| u8::from(*b).to_string())
}

pub fn parse_victory_csv(text: &str) -> Result<ParsedGrid<bool>> {
    parse_grid(text, "in_victory", |s| match s {
        "0" => Some(false),
        "1" => Some(true),
        _ => None,
    })
}

pub fn curve_csv(points: &[State]) -> Result<String> {
    write_table(&["u", "v"], points.iter().map(|s| vec![fmt_num(s.u), fmt_num(s.v)]))
}

pub fn parse_curve_csv(text: &str) -> Result<Vec<State>> {
    read_table(text, &["u", "v"])?
        .iter()
        .map(|r| Ok(State::new(num(r, 0)?, num(r, 1)?)))
        .collect()
}

const SWEEP_TAIL: [&str; 8] = [
    "e_area",
    "b_area",
    "m_area",
    "undecided_area",
    "nesting_violation",
    "limit_area",
    "trace_failed",
    "probe",
];

fn sweep_header(kind: SweepKind) -> Vec<&'static str> {
    let mut h = vec![kind.name()];
    h.extend(SWEEP_TAIL);
    h
}

pub fn sweep_csv(kind: SweepKind, rows: &[SweepRow]) -> Result<String> {
    write_table(
        &sweep_header(kind),
        rows.iter().map(|r| {
            vec![
                fmt_num(r.value),
                fmt_num(r.e_area),
                fmt_num(r.b_area),
                fmt_num(r.m_area),
                fmt_num(r.undecided_area),
                fmt_num(r.nesting_violation),
                fmt_num(r.limit_area),
                u8::from(r.trace_failed).to_string(),
                r.probe.map_or(String::new(), |c| c.code().to_string()),
            ]
        }),
    )
}

pub fn parse_sweep_csv(text: &str) -> Result<(SweepKind, Vec<SweepRow>)> {
    let first = text.lines().next().unwrap_or("");
    let kind = match first.split(',').next() {
        Some("c") => SweepKind::C,
        Some("rho") => SweepKind::Rho,
        Some("a") => SweepKind::A,
        other => return Err(Error::Csv(format!("unknown sweep column {other:?}"))),
    };
    let rows = read_table(text, &sweep_header(kind))?
        .iter()
        .map(|r| {
            let probe = match r.get(8).unwrap_or("") {
                "" => None,
                s => Some(Cell::from_code(s).ok_or_else(|| Error::Csv(format!("bad probe {s:?}")))?),
            };
            Ok(SweepRow {
                value: num(r, 0)?,
                e_area: num(r, 1)?,
                b_area: num(r, 2)?,
                m_area: num(r, 3)?,
                undecided_area: num(r, 4)?,
                nesting_violation: num(r, 5)?,
                limit_area: num(r, 6)?,
                trace_failed: r.get(7) == Some("1"),
                probe,
            })
        })
        .collect::<Result<_>>()?;
    Ok((kind, rows))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumRow {
    pub class: EquilibriumClass,
    pub u: f64,
    pub v: f64,
    pub eig: [(f64, f64); 2],
}

const EQ_HEADER: [&str; 7] = ["class", "u", "v", "re1", "im1", "re2", "im2"];

pub fn class_name(c: EquilibriumClass) -> &'static str {
    match c {
        EquilibriumClass::Source => "source",
        EquilibriumClass::Sink => "sink",
        EquilibriumClass::Saddle => "saddle",
        EquilibriumClass::DegenerateZeroEigen => "degenerate",
        EquilibriumClass::LineOfEquilibria => "line",
    }
}

fn class_from_name(s: &str) -> Option<EquilibriumClass> {
    [
        EquilibriumClass::Source,
        EquilibriumClass::Sink,
        EquilibriumClass::Saddle,
        EquilibriumClass::DegenerateZeroEigen,
        EquilibriumClass::LineOfEquilibria,
    ]
    .into_iter()
    .find(|c| class_name(*c) == s)
}

pub fn equilibria_csv(eqs: &[EquilibriumInfo]) -> Result<String> {
    write_table(
        &EQ_HEADER,
        eqs.iter().map(|e| {
            let mut r = vec![
                class_name(e.class).to_string(),
                fmt_num(e.location.u),
                fmt_num(e.location.v),
            ];
            for z in e.eigenvalues {
                r.push(fmt_num(z.re));
                r.push(fmt_num(z.im));
            }
            r
        }),
    )
}

pub fn parse_equilibria_csv(text: &str) -> Result<Vec<EquilibriumRow>> {
    read_table(text, &EQ_HEADER)?
        .iter()
        .map(|r| {
            let name = r.get(0).unwrap_or("");
            Ok(EquilibriumRow {
                class: class_from_name(name).ok_or_else(|| Error::Csv(format!("bad class {name:?}")))?,
                u: num(r, 1)?,
                v: num(r, 2)?,
                eig: [(num(r, 3)?, num(r, 4)?), (num(r, 5)?, num(r, 6)?)],
            })
        })
        .collect()
}

fn cell_color(c: Cell) -> &'static str {
    match c {
        Cell::E => "#7a3fa3",
        Cell::B => "#f3ead2",
        Cell::MBand => "#202020",
        Cell::Undecided => "#9a9a9a",
    }
}

/// Heat map of the grid with the separatrix drawn on top.
pub fn basin_svg(g: &BasinGrid, size: f64) -> String {
    let spec = &g.spec;
    let (u0, u1) = spec.u_range;
    let (v0, v1) = spec.v_range;
    let du = (u1 - u0).max(1e-12);
    let dv = (v1 - v0).max(1e-12);
    let cw = size / spec.nx as f64;
    let ch = size / spec.ny as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0}" height="{size:.0}" viewBox="0 0 {size:.3} {size:.3}">"#
    );
    for j in 0..spec.ny {
        for i in 0..spec.nx {
            let x = i as f64 * cw;
            let y = size - (j + 1) as f64 * ch;
            let _ = writeln!(
                s,
                r#"<rect x="{x:.3}" y="{y:.3}" width="{cw:.3}" height="{ch:.3}" fill="{}"/>"#,
                cell_color(g.cell(i, j))
            );
        }
    }
    if let Some(curve) = &g.curve {
        let pts: Vec<String> = curve
            .u_samples
            .iter()
            .zip(&curve.v_samples)
            .map(|(u, v)| {
                format!(
                    "{:.3},{:.3}",
                    (u - u0) / du * size,
                    size - (v - v0) / dv * size
                )
            })
            .collect();
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#e0a000" stroke-width="2"/>"##,
            pts.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}

pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub points: Vec<(f64, f64)>,
}

/// Line plot of several series over a shared box fitted to their finite points.
pub fn lines_svg(series: &[Series], width: f64, height: f64) -> String {
    let finite = series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in finite {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let dx = (x1 - x0).max(1e-12);
    let dy = (y1 - y0).max(1e-12);
    let pad = 30.0;
    let (w, h) = (width - 2.0 * pad, height - 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.3} {height:.3}">"#
    );
    let _ = writeln!(
        s,
        r##"<rect x="{pad:.3}" y="{pad:.3}" width="{w:.3}" height="{h:.3}" fill="none" stroke="#000"/>"##
    );
    for (k, ser) in series.iter().enumerate() {
        let pts: Vec<String> = ser
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(x, y)| format!("{:.3},{:.3}", pad + (x - x0) / dx * w, pad + h - (y - y0) / dy * h))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            pts.join(" "),
            ser.color
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}" font-size="12" fill="{}">{}</text>"#,
            pad + 8.0,
            pad + 16.0 * (k + 1) as f64,
            ser.color,
            ser.label
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::find_equilibria;
    use crate::model::Strategy;
    use crate::sweep::{basin_grid, BasinOptions};
    use crate::{simulate, SimOptions};
    use proptest::prelude::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1.0), "1");
        assert_eq!(fmt_num(0.1), "0.10000000000000001");
        assert_eq!(fmt_num(-2.5e-7), "-2.4999999999999999e-7");
        assert_eq!(fmt_num(-0.5e-6), "-4.9999999999999998e-7");
        assert_eq!(fmt_num(2f64.powi(-30)), "9.3132257461547852e-10");
        assert_eq!(fmt_num(1e20), "1e20");
        assert_eq!(fmt_num(123.0), "123");
        assert_eq!(fmt_num(f64::NAN), "NaN");
    }

    proptest! {
        #[test]
        fn number_round_trip(x in any::<f64>()) {
            let y: f64 = fmt_num(x).parse().unwrap();
            prop_assert!(y.to_bits() == x.to_bits() || (x.is_nan() && y.is_nan()));
        }
    }

    #[test]
    fn trajectory_round_trip() {
        let p = StructParams::new(2.0, 1.0).unwrap();
        let (t, _) = simulate(State::new(0.5, 0.2), &Strategy::Constant(1.0), &p, &SimOptions::default()).unwrap();
        let text = trajectory_csv(&t).unwrap();
        assert!(text.ends_with('\n'));
        assert_eq!(text.lines().count(), t.len() + 1);
        assert_eq!(parse_trajectory_csv(&text).unwrap(), t);
    }

    #[test]
    fn basin_round_trip() {
        let p = StructParams::new(0.5, 2.0).unwrap();
        let g = basin_grid(0.8, &p, &GridSpec::unit(7, 5), &BasinOptions::default()).unwrap();
        let back = parse_basin_csv(&basin_csv(&g).unwrap()).unwrap();
        assert_eq!((back.nx, back.ny), (7, 5));
        assert_eq!(back.cells, g.cells);
        assert!(basin_svg(&g, 200.0).contains("<polyline"));
    }

    #[test]
    fn other_round_trips() {
        let p = StructParams::new(0.5, 2.0).unwrap();
        let eqs = find_equilibria(0.8, &p);
        let back = parse_equilibria_csv(&equilibria_csv(&eqs).unwrap()).unwrap();
        assert_eq!(back.len(), 3);
        for (e, r) in eqs.iter().zip(&back) {
            assert_eq!(e.class, r.class);
            assert_eq!(e.location, State::new(r.u, r.v));
        }
        let pts = vec![State::new(0.0, 0.0), State::new(0.25, 1.0 / 3.0)];
        assert_eq!(parse_curve_csv(&curve_csv(&pts).unwrap()).unwrap(), pts);
        let spec = GridSpec::unit(2, 2);
        let flags = vec![true, false, false, true];
        assert_eq!(parse_victory_csv(&victory_csv(&spec, &flags).unwrap()).unwrap().cells, flags);
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(parse_trajectory_csv("t,u,v\n0,1,2\n").is_err());
        assert!(parse_basin_csv("i,j,u,v,cell\n0,0,0,0,Q\n").is_err());
    }
}
