//! Parameter grids, scans over `(N, c)`, and extrapolation in `1/L`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::Convention;
use crate::error::{Error, Result};
use crate::jordan::{measure_tt, probe_pair, BMeasurement, Descent, NullKind};
use crate::linalg::{dot, norm};

/// `c = k pi / divisor` strictly inside `(-2, 1)`, optionally without `c = 0`.
pub fn c_grid(divisor: u32, exclude_zero: bool) -> Result<Vec<f64>> {
    if divisor == 0 {
        return Err(Error::invalid("grid divisor must be at least 1"));
    }
    let d = divisor as f64;
    let lo = (-2.0 * d / PI).floor() as i64 + 1;
    let hi = (d / PI).ceil() as i64 - 1;
    Ok((lo..=hi).filter(|&k| !(exclude_zero && k == 0)).map(|k| k as f64 * PI / d).collect())
}

/// Integer range of the grid, `(k_min, k_max)`.
pub fn c_grid_bounds(divisor: u32) -> (i64, i64) {
    let d = divisor as f64;
    ((-2.0 * d / PI).floor() as i64 + 1, (d / PI).ceil() as i64 - 1)
}

#[derive(Clone, Debug, Serialize)]
pub struct Extrapolation {
    pub limit: f64,
    /// Coefficients of `1, 1/L, 1/L^2, ...`.
    pub coefficients: Vec<f64>,
    /// Euclidean norm of the fit residual.
    pub residual: f64,
    /// Change of the limit when the smallest `L` is dropped, when the
    /// remaining points still determine the fit.
    pub sensitivity: Option<f64>,
}

fn fit(points: &[(f64, f64)], degree: usize) -> Result<(Vec<f64>, f64)> {
    if points.len() < degree + 1 {
        return Err(Error::invalid(format!("{} points cannot fix a degree-{degree} polynomial", points.len())));
    }
    if points.iter().any(|&(l, y)| !(l > 0.0) || !y.is_finite() || !l.is_finite()) {
        return Err(Error::invalid("extrapolation needs positive sizes and finite values"));
    }
    let a = Mat::<f64>::from_fn(points.len(), degree + 1, |i, k| points[i].0.powi(-(k as i32)));
    let b = Mat::<f64>::from_fn(points.len(), 1, |i, _| points[i].1);
    let x = a.qr().solve_lstsq(&b);
    let coef: Vec<f64> = (0..=degree).map(|k| x[(k, 0)]).collect();
    let r = &a * &x - &b;
    let residual = (0..points.len()).map(|i| r[(i, 0)].powi(2)).sum::<f64>().sqrt();
    Ok((coef, residual))
}

/// Least-squares polynomial in `1/L`; the limit is the constant term.
pub fn extrapolate(points: &[(f64, f64)], degree: usize) -> Result<Extrapolation> {
    let (coefficients, residual) = fit(points, degree)?;
    let limit = coefficients[0];
    let smallest = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let rest: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0 != smallest).collect();
    let sensitivity = fit(&rest, degree).ok().map(|(c, _)| (c[0] - limit).abs());
    Ok(Extrapolation { limit, coefficients, residual, sensitivity })
}

/// Continuum value of `b`: `1/(x+1)` for `(1,1)`, `4/(x+1) - 2/x^2` for `(1,2)`.
pub fn theory_b(kind: NullKind, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!("x must be positive and finite, got {x}")));
    }
    match kind {
        NullKind::B11 => Ok(1.0 / (x + 1.0)),
        NullKind::B12 => Ok(4.0 / (x + 1.0) - 2.0 / (x * x)),
        NullKind::Tt => Err(Error::invalid("no closed form for b(T, t) at finite x")),
    }
}

/// Twelve significant digits; plain decimals where that is readable.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if (-4..12).contains(&e) {
        let s = format!("{:.*}", (11 - e).max(0) as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

/// What a scan measures per cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanPlan {
    pub kind: NullKind,
    pub sizes: Vec<usize>,
    pub c_values: Vec<f64>,
    pub convention: Convention,
    pub descent: Descent,
    pub degree: usize,
}

impl Default for ScanPlan {
    fn default() -> Self {
        ScanPlan {
            kind: NullKind::B11,
            sizes: Vec::new(),
            c_values: Vec::new(),
            convention: Convention::Plain,
            descent: Descent::Symmetric,
            degree: 2,
        }
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| Error::invalid(format!("bad entry {t:?} for {key}"))))
        .collect()
}

impl ScanPlan {
    /// Parses `key = value` lines; `#` starts a comment.
    ///
    /// Keys: `pair` (`b11`, `b12`, `tt`), `N` (list), `c` (list, or
    /// `grid:<divisor>`), `c_min`, `c_max`, `convention`, `descent`
    /// (`H` or `L`), `degree`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut plan = ScanPlan::default();
        let (mut c_min, mut c_max) = (f64::NEG_INFINITY, f64::INFINITY);
        let mut grid: Option<u32> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("line {}: expected key = value", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            let num = |v: &str| v.parse::<f64>().map_err(|_| Error::invalid(format!("line {}: bad number {v:?}", lineno + 1)));
            match k {
                "pair" | "kind" => plan.kind = v.parse()?,
                "N" | "sizes" => plan.sizes = parse_list(k, v)?,
                "c" => match v.strip_prefix("grid:") {
                    Some(d) => grid = Some(d.trim().parse().map_err(|_| Error::invalid(format!("bad grid divisor {d:?}")))?),
                    None => plan.c_values = parse_list(k, v)?,
                },
                "c_min" => c_min = num(v)?,
                "c_max" => c_max = num(v)?,
                "convention" => plan.convention = v.parse()?,
                "descent" => {
                    plan.descent = match v {
                        "H" | "symmetric" => Descent::Symmetric,
                        "L" | "chiral" => Descent::Chiral,
                        _ => return Err(Error::invalid(format!("unknown descent {v:?}"))),
                    }
                }
                "degree" => plan.degree = v.parse().map_err(|_| Error::invalid(format!("bad degree {v:?}")))?,
                _ => return Err(Error::invalid(format!("line {}: unknown key {k:?}", lineno + 1))),
            }
        }
        if let Some(d) = grid {
            // c = 0 is singular for the glued module
            plan.c_values = c_grid(d, plan.kind == NullKind::Tt)?;
        }
        plan.c_values.retain(|&c| c >= c_min && c <= c_max);
        plan.c_values.sort_by(f64::total_cmp);
        plan.c_values.dedup();
        plan.sizes.sort_unstable();
        plan.sizes.dedup();
        Ok(plan)
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty() || self.c_values.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanCell {
    pub n: usize,
    pub c: f64,
    pub result: std::result::Result<BMeasurement, String>,
    /// `|<psi(c_prev)|psi(c)>|` against the previous cell of the same `N`.
    pub continuity: Option<f64>,
    pub marker: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanTable {
    pub plan: ScanPlan,
    pub cells: Vec<ScanCell>,
}

/// Overlap below which adjacent cells are flagged as a tracking break.
pub const CONTINUITY_FLOOR: f64 = 0.5;

fn measure_cell(plan: &ScanPlan, n: usize, c: f64) -> Result<BMeasurement> {
    match plan.kind {
        NullKind::Tt => measure_tt(n, c),
        k => probe_pair(k, n, c, plan.convention, plan.descent),
    }
}

/// Runs every `(N, c)` cell in parallel; output is sorted by `(N, c)` and
/// independent of scheduling.
pub fn run_scan(plan: &ScanPlan) -> ScanTable {
    let grid: Vec<(usize, f64)> = plan.sizes.iter().flat_map(|&n| plan.c_values.iter().map(move |&c| (n, c))).collect();
    let results: Vec<Result<BMeasurement>> = grid.par_iter().map(|&(n, c)| measure_cell(plan, n, c)).collect();
    let mut cells: Vec<ScanCell> = grid
        .into_iter()
        .zip(results)
        .map(|((n, c), r)| {
            let marker = r.as_ref().err().map(|e| e.to_string());
            ScanCell { n, c, result: r.map_err(|e| e.to_string()), continuity: None, marker }
        })
        .collect();
    for i in 1..cells.len() {
        if cells[i].n != cells[i - 1].n {
            continue;
        }
        if let (Ok(a), Ok(b)) = (&cells[i - 1].result, &cells[i].result) {
            let (u, v) = (&a.vectors.0, &b.vectors.0);
            let ov = dot(u, v).norm() / (norm(u) * norm(v));
            cells[i].continuity = Some(ov);
            if ov <= CONTINUITY_FLOOR && cells[i].marker.is_none() {
                cells[i].marker = Some(format!("tracking break: overlap {ov:.3} with previous c"));
            }
        }
    }
    ScanTable { plan: plan.clone(), cells }
}

pub const CSV_HEADER: &str = "N,c,module,pair,J,b1_re,b1_im,b2_re,b2_im,loop_norm_re,loop_norm_im,continuity,marker";

impl ScanTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for cell in &self.cells {
            let cont = cell.continuity.map(fmt_num).unwrap_or_default();
            let marker = cell.marker.as_deref().unwrap_or("").replace([',', '\n'], ";");
            match &cell.result {
                Ok(m) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},{}/{},{},{},{},{},{},{},{},{},{}",
                        cell.n,
                        fmt_num(cell.c),
                        m.module.replace(',', ";"),
                        m.pair.0,
                        m.pair.1,
                        fmt_num(m.j),
                        fmt_num(m.b1().re),
                        fmt_num(m.b1().im),
                        fmt_num(m.b2().re),
                        fmt_num(m.b2().im),
                        fmt_num(m.loop_norm_psi.re),
                        fmt_num(m.loop_norm_psi.im),
                        cont,
                        marker
                    );
                }
                Err(_) => {
                    let _ = writeln!(out, "{},{},,,,,,,,,,{},{}", cell.n, fmt_num(cell.c), cont, marker);
                }
            }
        }
        out
    }

    /// Parameters and counts, free of timestamps so reruns compare equal.
    pub fn manifest(&self) -> serde_json::Value {
        let failures = self.cells.iter().filter(|c| c.result.is_err()).count();
        serde_json::json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "plan": self.plan,
            "cells": self.cells.len(),
            "failures": failures,
        })
    }

    /// `b1` per `N` at each `c`, for extrapolation.
    pub fn b1_by_c(&self) -> BTreeMap<String, Vec<(f64, f64)>> {
        let mut out: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
        for cell in &self.cells {
            if let Ok(m) = &cell.result {
                out.entry(fmt_num(cell.c)).or_default().push(((cell.n / 2) as f64, m.b1().re));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = c_grid(1000, false).unwrap();
        assert!((g[0] - (-636.0 * PI / 1000.0)).abs() < 1e-15);
        assert!((g.last().unwrap() - 318.0 * PI / 1000.0).abs() < 1e-15);
        assert_eq!(c_grid_bounds(1000), (-636, 318));
        let g = c_grid(2, false).unwrap();
        assert_eq!(g, vec![-PI / 2.0, 0.0]);
        assert!(!c_grid(50, true).unwrap().contains(&0.0));
        assert!(c_grid(50, false).unwrap().contains(&0.0));
        assert!(c_grid(0, false).is_err());
    }

    #[test]
    fn exact_polynomial_and_constant() {
        let pts: Vec<(f64, f64)> = [3.0, 4.0, 5.0, 6.0].iter().map(|&l: &f64| (l, 0.7 - 1.3 / l + 2.1 / (l * l))).collect();
        let e = extrapolate(&pts, 2).unwrap();
        assert!((e.limit - 0.7).abs() < 1e-12);
        assert!((e.coefficients[1] + 1.3).abs() < 1e-11 && (e.coefficients[2] - 2.1).abs() < 1e-10);
        assert!(e.residual < 1e-12 && e.sensitivity.unwrap() < 1e-10);
        let c: Vec<(f64, f64)> = [3.0, 4.0, 5.0].iter().map(|&l| (l, -2.5)).collect();
        assert!((extrapolate(&c, 1).unwrap().limit + 2.5).abs() < 1e-13);
        assert!(extrapolate(&c[..2], 2).is_err());
    }

    #[test]
    fn theory_values() {
        assert!((theory_b(NullKind::B11, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(theory_b(NullKind::B12, 1.0).unwrap().abs() < 1e-15);
        assert!(theory_b(NullKind::B11, 1e12).unwrap() < 1e-11);
        assert!(theory_b(NullKind::B12, 0.0).is_err());
    }

    #[test]
    fn numbers_print_with_twelve_digits() {
        assert_eq!(fmt_num(PI), "3.14159265359");
        assert_eq!(fmt_num(-1.5), "-1.5");
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1.25e-7), "1.25000000000e-7");
        assert_eq!(fmt_num(123456.0), "123456");
    }

    #[test]
    fn plan_parsing() {
        let p = ScanPlan::parse("pair = b11\nN = 8, 6 # comment\nc = grid:50\nc_min = -1.2\nc_max = -0.9\n").unwrap();
        assert_eq!(p.sizes, vec![6, 8]);
        assert!(p.c_values.iter().all(|&c| (-1.2..=-0.9).contains(&c)));
        assert!(!p.c_values.is_empty());
        assert!(ScanPlan::parse("bogus = 1").is_err());
        let empty = ScanPlan::parse("").unwrap();
        assert!(empty.is_empty());
        assert!(run_scan(&empty).cells.is_empty());
    }

    #[test]
    fn scan_is_deterministic() {
        let p = ScanPlan::parse("pair = b11\nN = 6\nc = -1.0, -0.9").unwrap();
        let a = run_scan(&p).to_csv();
        let b = run_scan(&p).to_csv();
        assert_eq!(a, b);
        assert_eq!(a.lines().count(), 3);
    }
}
