//! Action of the generators `e_j` and the translation `tau` on link states.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{Basis, Convention, LinkState, ModuleKind, ModuleSpec};
use crate::error::{Error, Result};
use crate::koosaleur::{e_infinity, fermi_velocity};
use crate::linalg::{SparseOp, C64, ONE};

/// Numerical parameters of the lattice model.
///
/// `m` is the loop weight attached to closed diagram loops; under the
/// `Negated` convention it is the negated weight and every `e_j` carries an
/// extra factor `-1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LatticeParams {
    pub n: usize,
    pub x: f64,
    pub gamma: f64,
    pub m: f64,
    pub c: f64,
    pub e_infty: f64,
    pub v_f: f64,
    pub convention: Convention,
}

/// Loop weights smaller than this are treated as zero and rejected.
const M_FLOOR: f64 = 1e-12;

impl LatticeParams {
    pub fn from_x(n: usize, x: f64, convention: Convention) -> Result<Self> {
        check_sites(n)?;
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::invalid(format!("x must be positive and finite, got {x}")));
        }
        let gamma = PI / (x + 1.0);
        let m = convention.sign() * 2.0 * gamma.cos();
        if m.abs() < M_FLOOR {
            return Err(Error::invalid("loop weight m = 0 (x = 1) makes the loop product degenerate"));
        }
        Ok(LatticeParams {
            n,
            x,
            gamma,
            m,
            c: crate::characters::central_charge(x),
            e_infty: e_infinity(gamma)?,
            v_f: fermi_velocity(gamma),
            convention,
        })
    }

    pub fn from_c(n: usize, c: f64, convention: Convention) -> Result<Self> {
        Self::from_x(n, crate::characters::param_from_c(c)?, convention)
    }

    /// Free loop weight and `e_infty`, with no conformal data attached. Useful
    /// for symbolic matrix checks; the Koo-Saleur operators reject it.
    pub fn custom(n: usize, m: f64, e_infty: f64, convention: Convention) -> Result<Self> {
        check_sites(n)?;
        if m.abs() < M_FLOOR {
            return Err(Error::invalid("loop weight m = 0 is not allowed"));
        }
        Ok(LatticeParams {
            n,
            x: f64::NAN,
            gamma: f64::NAN,
            m,
            c: f64::NAN,
            e_infty,
            v_f: f64::NAN,
            convention,
        })
    }

    pub fn has_conformal_data(&self) -> bool {
        self.x.is_finite() && self.v_f.is_finite() && self.c.is_finite()
    }

    /// Coefficient in `e_j^2 = lambda e_j` for the generators as acted.
    pub fn relation_weight(&self) -> f64 {
        self.convention.sign() * self.m
    }

    pub fn half_length(&self) -> usize {
        self.n / 2
    }
}

fn check_sites(n: usize) -> Result<()> {
    if n < 2 || n % 2 == 1 || n > crate::basis::MAX_SITES {
        return Err(Error::invalid(format!("N must be even and in 2..={}, got {n}", crate::basis::MAX_SITES)));
    }
    Ok(())
}

/// Result of acting on one link state: at most one term per state.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightedStates {
    pub terms: Vec<(C64, LinkState)>,
}

impl WeightedStates {
    fn single(coef: C64, s: LinkState) -> Self {
        if coef == C64::new(0.0, 0.0) {
            return Self::default();
        }
        WeightedStates { terms: vec![(coef, s)] }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

impl ModuleSpec {
    /// Whether `s` is a basis state of this module.
    pub fn contains(&self, s: &LinkState) -> bool {
        let j = s.sector();
        match self.kind {
            ModuleKind::Standard { j: jj, .. } => j == jj,
            ModuleKind::QuotientZero => j == 0 && !s.crosses_boundary(),
            ModuleKind::Glued { jmax } => j <= jmax,
            ModuleKind::GluedQuotient { jmax } => j <= jmax && (j > 0 || !s.crosses_boundary()),
        }
    }
}

fn check_member(s: &LinkState, spec: &ModuleSpec, params: &LatticeParams) -> Result<()> {
    if s.n_sites() != params.n || !spec.contains(s) {
        return Err(Error::invalid(format!("state {s} is not in module {:?} at N={}", spec.kind, params.n)));
    }
    Ok(())
}

/// Acts with `e` on sites `a = jj`, `b = jj + 1 (mod N)`, 0-based.
pub(crate) fn act_e(jj: usize, s: LinkState, p: &[Option<usize>], spec: &ModuleSpec, params: &LatticeParams) -> Option<(C64, LinkState)> {
    let n = s.n_sites();
    let a = jj;
    let b = (jj + 1) % n;
    let phi = spec.phi();
    let standard = spec.is_standard();
    let mut bits = s.bits();
    let mut set = |i: usize, up: bool| {
        if up {
            bits |= 1 << i;
        } else {
            bits &= !(1 << i);
        }
    };
    let coef = match (p[a], p[b]) {
        (Some(pa), _) if pa == b => {
            if s.is_up(a) {
                C64::from(params.m)
            } else {
                // arc b -> a around the back: the closed loop winds the annulus
                set(a, true);
                set(b, false);
                match spec.kind {
                    ModuleKind::Standard { j: 0, phi } => C64::from(2.0 * (phi / 2.0).cos()),
                    _ => C64::from(params.m),
                }
            }
        }
        (None, None) => {
            if standard {
                return None;
            }
            set(a, true);
            set(b, false);
            // left member a is on odd site a + 1
            C64::from(if a % 2 == 0 { spec.y } else { 1.0 })
        }
        (None, Some(q)) => {
            set(a, true);
            set(b, false);
            set(q, true);
            if standard {
                let d = (q + n - a) % n;
                C64::from_polar(1.0, phi * d as f64 / (2 * n) as f64)
            } else {
                ONE
            }
        }
        (Some(q), None) => {
            set(a, true);
            set(b, false);
            set(q, true);
            if standard {
                let d = (b + n - q) % n;
                C64::from_polar(1.0, -phi * d as f64 / (2 * n) as f64)
            } else {
                ONE
            }
        }
        (Some(pa), Some(pb)) => {
            let (o, cl) = if !s.is_up(a) && s.is_up(b) { (pa, pb) } else { (pb, pa) };
            set(a, true);
            set(b, false);
            set(o, true);
            set(cl, false);
            ONE
        }
    };
    let mut out = LinkState::raw(n, bits);
    if spec.rewires(&out) {
        out = out.rewired();
    }
    Some((coef * params.convention.sign(), out))
}

/// Applies `e_j` (1-based, `e_N` joins sites `N` and `1`).
pub fn apply_e(j: usize, s: &LinkState, spec: &ModuleSpec, params: &LatticeParams) -> Result<WeightedStates> {
    check_member(s, spec, params)?;
    if j == 0 || j > params.n {
        return Err(Error::invalid(format!("generator index j={j} outside 1..={}", params.n)));
    }
    let p = s.partners();
    Ok(act_e(j - 1, *s, &p, spec, params).map_or_else(WeightedStates::default, |(c, t)| WeightedStates::single(c, t)))
}

pub(crate) fn act_tau(power: i64, s: LinkState, spec: &ModuleSpec) -> (C64, LinkState) {
    let n = s.n_sites();
    let mut out = s.shifted(power);
    if spec.rewires(&out) {
        out = out.rewired();
    }
    let coef = if spec.is_standard() {
        C64::from_polar(1.0, spec.phi() * (s.n_through() as f64) * power as f64 / (2 * n) as f64)
    } else {
        ONE
    };
    (coef, out)
}

/// Applies `tau^power`: every site moves `power` steps to the right.
pub fn apply_tau(power: i64, s: &LinkState, spec: &ModuleSpec, params: &LatticeParams) -> Result<WeightedStates> {
    check_member(s, spec, params)?;
    let (c, t) = act_tau(power, *s, spec);
    Ok(WeightedStates::single(c, t))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    Identity,
    /// `e_j`, 1-based.
    E(usize),
    Tau(i64),
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Identity => write!(f, "1"),
            Generator::E(j) => write!(f, "e_{j}"),
            Generator::Tau(1) => write!(f, "tau"),
            Generator::Tau(p) => write!(f, "tau^{p}"),
        }
    }
}

impl std::str::FromStr for Generator {
    type Err = Error;

    /// Accepts `1`, `eJ`, `e_J`, `tau`, `tau^P`.
    fn from_str(text: &str) -> Result<Self> {
        let t = text.trim();
        if t == "1" || t == "id" {
            return Ok(Generator::Identity);
        }
        if let Some(rest) = t.strip_prefix("tau") {
            let p = match rest.strip_prefix('^') {
                None if rest.is_empty() => 1,
                Some(p) => p.parse().map_err(|_| Error::invalid(format!("bad tau power in {text:?}")))?,
                None => return Err(Error::invalid(format!("bad generator {text:?}"))),
            };
            return Ok(Generator::Tau(p));
        }
        if let Some(rest) = t.strip_prefix('e') {
            let j = rest.trim_start_matches('_').parse().map_err(|_| Error::invalid(format!("bad generator {text:?}")))?;
            return Ok(Generator::E(j));
        }
        Err(Error::invalid(format!("bad generator {text:?}")))
    }
}

/// A labeled operator on an ordered basis.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub label: String,
    pub op: SparseOp,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn to_dense(&self) -> faer::Mat<C64> {
        self.op.to_dense()
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        self.op.apply(v)
    }
}

/// Builds a column-sparse matrix from a per-state action.
pub(crate) fn assemble_with<F>(basis: &Basis, f: F) -> Result<SparseOp>
where
    F: Fn(usize, LinkState) -> Option<(C64, LinkState)> + Sync,
{
    let cols: Vec<Result<Vec<(usize, C64)>>> = (0..basis.len())
        .into_par_iter()
        .map(|k| match f(k, basis.state(k)) {
            None => Ok(Vec::new()),
            Some((c, t)) => basis
                .index_of(&t)
                .map(|r| vec![(r, c)])
                .ok_or_else(|| Error::NumericalFailure(format!("image {t} of {} left the basis", basis.state(k)))),
        })
        .collect();
    Ok(SparseOp::from_columns(basis.len(), cols.into_iter().collect::<Result<_>>()?))
}

pub(crate) fn e_sparse(jj: usize, basis: &Basis, params: &LatticeParams) -> Result<SparseOp> {
    let spec = basis.spec;
    assemble_with(basis, |k, s| act_e(jj, s, basis.partners_of(k), &spec, params))
}

pub fn assemble(generator: Generator, basis: &Basis, params: &LatticeParams) -> Result<OperatorMatrix> {
    if basis.n_sites() != params.n {
        return Err(Error::invalid(format!("basis has N={} but parameters have N={}", basis.n_sites(), params.n)));
    }
    let spec = basis.spec;
    let op = match generator {
        Generator::Identity => SparseOp::identity(basis.len()),
        Generator::E(j) => {
            if j == 0 || j > params.n {
                return Err(Error::invalid(format!("generator index j={j} outside 1..={}", params.n)));
            }
            e_sparse(j - 1, basis, params)?
        }
        Generator::Tau(p) => assemble_with(basis, |_, s| Some(act_tau(p, s, &spec)))?,
    };
    Ok(OperatorMatrix { label: generator.to_string(), op })
}

/// Every `e_1..e_N` as sparse matrices, index `jj` holding `e_{jj+1}`.
pub fn all_generators(basis: &Basis, params: &LatticeParams) -> Result<Vec<SparseOp>> {
    (0..params.n).map(|jj| e_sparse(jj, basis, params)).collect()
}

/// Largest residual of each defining relation.
#[derive(Clone, Debug, Serialize)]
pub struct RelationReport {
    pub residuals: Vec<(String, f64)>,
}

impl RelationReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.1).fold(0.0, f64::max)
    }

    pub fn all_below(&self, tol: f64) -> bool {
        self.residuals.iter().all(|r| r.1 < tol)
    }
}

pub fn verify_relations(basis: &Basis, params: &LatticeParams) -> Result<RelationReport> {
    let n = params.n;
    let e = all_generators(basis, params)?;
    let tau = assemble(Generator::Tau(1), basis, params)?.op;
    let tau_inv = assemble(Generator::Tau(-1), basis, params)?.op;
    let tau2 = assemble(Generator::Tau(2), basis, params)?.op;
    let lam = C64::from(params.relation_weight());
    let mut worst = [0.0f64; 5];
    for j in 0..n {
        worst[0] = worst[0].max(e[j].compose(&e[j]).max_diff(&e[j].scaled(lam)));
        for nb in [(j + 1) % n, (j + n - 1) % n] {
            worst[1] = worst[1].max(e[j].compose(&e[nb]).compose(&e[j]).max_diff(&e[j]));
        }
        for k in 0..n {
            let dist = (k + n - j) % n;
            if dist >= 2 && dist <= n - 2 {
                worst[2] = worst[2].max(e[j].compose(&e[k]).max_diff(&e[k].compose(&e[j])));
            }
        }
        worst[3] = worst[3].max(tau.compose(&e[j]).compose(&tau_inv).max_diff(&e[(j + 1) % n]));
    }
    let mut word = SparseOp::identity(basis.len());
    for ek in e.iter().take(n - 1) {
        word = word.compose(ek);
    }
    worst[4] = tau2.compose(&e[n - 2]).max_diff(&word);
    let names = ["e_j^2 = m e_j", "e_j e_(j+-1) e_j = e_j", "[e_j, e_k] = 0 at distance", "tau e_j tau^-1 = e_(j+1)", "tau^2 e_(N-1) = e_1...e_(N-1)"];
    Ok(RelationReport { residuals: names.iter().map(|s| s.to_string()).zip(worst).collect() })
}
