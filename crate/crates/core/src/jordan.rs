//! Emerging Jordan blocks: the J measure, the emerging Jordan vector, and
//! measurements of the indecomposability parameters `b`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{LatticeParams, OperatorMatrix};
use crate::basis::{build_basis, Convention, ModuleKind, ModuleSpec};
use crate::characters::kac_weight;
use crate::error::{Error, Result};
use crate::inner::{gram, GramKind, GramMatrix};
use crate::koosaleur::{Chirality, LatticeOperators};
use crate::linalg::{axpy, dot, norm, scale, SparseOp, C64};
use crate::spectral::{identify_fields, identify_tt, FieldName, ModuleSpectrum, TaggedState};

/// Loop-product denominators below this abort a measurement.
pub const DENOMINATOR_FLOOR: f64 = 1e-13;

/// `|<u, v>| / (|u| |v|)` in the Euclidean product.
pub fn j_measure(u: &[C64], v: &[C64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::invalid(format!("vector lengths {} and {} differ", u.len(), v.len())));
    }
    let (nu, nv) = (norm(u), norm(v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::invalid("J is undefined for a zero vector"));
    }
    Ok((dot(u, v).norm() / (nu * nv)).min(1.0))
}

/// Orthonormal Gram-Schmidt pair `(u_hat, v')` from `(u, v)`.
pub fn gram_schmidt_pair(u: &[C64], v: &[C64]) -> Result<(Vec<C64>, Vec<C64>)> {
    let (nu, nv) = (norm(u), norm(v));
    if u.len() != v.len() || nu == 0.0 || nv == 0.0 {
        return Err(Error::invalid("Gram-Schmidt needs two nonzero vectors of equal length"));
    }
    let uh = scale(u, C64::from(1.0 / nu));
    let w = axpy(v, -dot(&uh, v), &uh);
    let nw = norm(&w);
    if nw <= 1e-14 * nv {
        return Err(Error::invalid("vectors are parallel"));
    }
    Ok((uh, scale(&w, C64::from(1.0 / nw))))
}

/// Gram-Schmidt of `psi_prime` against `psi` (normalized first), rescaled so
/// that `(psi | H0 | psi_tilde) = 2`.
pub fn emerging_jordan_vector(psi: &[C64], psi_prime: &[C64], h0: &SparseOp) -> Result<Vec<C64>> {
    if psi.len() != psi_prime.len() || psi.len() != h0.dim() {
        return Err(Error::invalid("psi, psi' and H0 must share one dimension"));
    }
    let np = norm(psi);
    if np == 0.0 {
        return Err(Error::invalid("psi is the zero vector"));
    }
    let psi = scale(psi, C64::from(1.0 / np));
    let t = axpy(psi_prime, -dot(&psi, psi_prime), &psi);
    let h = dot(&psi, &h0.apply(&t));
    if h.norm() < DENOMINATOR_FLOOR {
        return Err(Error::DegenerateNormalization(h.norm()));
    }
    Ok(scale(&t, C64::from(2.0) / h))
}

#[derive(Clone, Debug, Serialize)]
pub struct JordanProbe {
    pub j: f64,
    #[serde(skip)]
    pub psi_tilde: Vec<C64>,
    /// `|<psi, psi_tilde>|`, should be at rounding level.
    pub orthogonality: f64,
}

pub fn probe(psi: &[C64], psi_prime: &[C64], h0: &SparseOp) -> Result<JordanProbe> {
    let j = j_measure(psi, psi_prime)?;
    let psi_tilde = emerging_jordan_vector(psi, psi_prime, h0)?;
    let orthogonality = dot(psi, &psi_tilde).norm() / norm(psi);
    Ok(JordanProbe { j, psi_tilde, orthogonality })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NullKind {
    /// `A = H_{-1}`.
    B11,
    /// `A = H_{-2} - 3/(2(2 h_{1,2} + 1)) H_{-1}^2`.
    B12,
    /// `A = H_{-2}`.
    Tt,
}

impl std::str::FromStr for NullKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "11" | "1,1" | "b11" => Ok(NullKind::B11),
            "12" | "1,2" | "b12" => Ok(NullKind::B12),
            "tt" | "Tt" | "TT" => Ok(NullKind::Tt),
            _ => Err(Error::invalid(format!("unknown null-descent kind {s:?}"))),
        }
    }
}

/// Which lattice modes build the descent operator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum Descent {
    /// `H_{-n}` (both chiralities); converges faster with `L`.
    #[default]
    Symmetric,
    /// Left-moving `L_{-n}` only.
    Chiral,
}

pub fn descent_coefficient(x: f64) -> Result<f64> {
    let h12 = kac_weight(1.0, 2.0, x);
    let d = 2.0 * (2.0 * h12 + 1.0);
    if !(d.abs() >= 1e-12) {
        return Err(Error::invalid(format!("2 h_12 + 1 vanishes at x = {x}")));
    }
    Ok(-3.0 / d)
}

pub fn null_descent_operator(kind: NullKind, ops: &LatticeOperators, descent: Descent) -> Result<OperatorMatrix> {
    let mode = |n: i64| match descent {
        Descent::Symmetric => ops.h_n(n),
        Descent::Chiral => ops.koo_saleur(n, Chirality::Left),
    };
    Ok(match kind {
        NullKind::B11 => mode(-1)?,
        NullKind::Tt => mode(-2)?,
        NullKind::B12 => {
            let k = descent_coefficient(ops.params.x)?;
            let m1 = mode(-1)?.op;
            let op = mode(-2)?.op.add_scaled(&m1.compose(&m1), C64::from(k));
            OperatorMatrix { label: "A_12".into(), op }
        }
    })
}

/// One ordering of the `b` ratio with its pieces.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BRatio {
    #[serde(serialize_with = "ser_c64")]
    pub b: C64,
    /// `|<psi_tilde | A | Phi>|^2`.
    pub numerator: f64,
    #[serde(serialize_with = "ser_c64")]
    pub denominator: C64,
}

fn ser_c64<S: serde::Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

/// `b = |<psi_tilde | A | Phi>|^2 / <psi_tilde | psi>`, loop products, with
/// `Phi` normalized to `|<Phi|Phi>| = 1` and the sign of its norm divided out.
pub fn measure_b(psi: &[C64], psi_prime: &[C64], phi: &[C64], a: &SparseOp, g: &GramMatrix, h0: &SparseOp) -> Result<BRatio> {
    let np = norm(psi);
    if np == 0.0 {
        return Err(Error::invalid("psi is the zero vector"));
    }
    let psi = scale(psi, C64::from(1.0 / np));
    let t = emerging_jordan_vector(&psi, psi_prime, h0)?;
    let nphi = g.norm_sq(phi)?;
    if nphi.norm() < DENOMINATOR_FLOOR {
        return Err(Error::DegenerateMeasurement(format!("loop norm of Phi is {:e}", nphi.norm())));
    }
    let phi = scale(phi, C64::from(1.0 / nphi.norm().sqrt()));
    let s = nphi.re.signum();
    let numerator = g.product(&t, &a.apply(&phi))?.norm_sqr();
    let denominator = g.product(&t, &psi)? * s;
    if denominator.norm() < DENOMINATOR_FLOOR {
        return Err(Error::DegenerateMeasurement(format!("<psi_tilde|psi> = {:e}", denominator.norm())));
    }
    Ok(BRatio { b: C64::from(numerator) / denominator, numerator, denominator })
}

#[derive(Clone, Debug, Serialize)]
pub struct BMeasurement {
    pub n: usize,
    pub c: f64,
    pub module: String,
    pub pair: (FieldName, FieldName),
    pub j: f64,
    pub first: BRatio,
    /// Roles of `psi` and `psi'` exchanged.
    pub second: BRatio,
    #[serde(serialize_with = "ser_c64")]
    pub loop_norm_psi: C64,
    #[serde(serialize_with = "ser_c64")]
    pub loop_norm_psi_prime: C64,
    /// The Euclidean-normalized pair, kept for tracking across grids.
    #[serde(skip)]
    pub vectors: (Vec<C64>, Vec<C64>),
}

impl BMeasurement {
    pub fn b1(&self) -> C64 {
        self.first.b
    }

    pub fn b2(&self) -> C64 {
        self.second.b
    }
}

/// A module with its operators, loop Gram matrix and `H0` spectrum.
#[derive(Clone, Debug)]
pub struct ModuleSetup {
    pub ops: LatticeOperators,
    pub h0: SparseOp,
    pub gram: GramMatrix,
    pub spectrum: ModuleSpectrum,
}

impl ModuleSetup {
    pub fn new(spec: ModuleSpec, params: LatticeParams) -> Result<Self> {
        let basis = build_basis(spec, params.n)?;
        let state_sectors = basis.sectors();
        let ops = LatticeOperators::new(basis, params)?;
        let h0 = ops.h_n(0)?.op;
        let tau = ops.tau(1)?.op;
        let gram = gram(&ops.basis, GramKind::Loop, &params)?;
        let spectrum = ModuleSpectrum::new(&h0, &tau, params.n, state_sectors)?;
        Ok(ModuleSetup { ops, h0, gram, spectrum })
    }

    pub fn params(&self) -> &LatticeParams {
        &self.ops.params
    }

    pub fn loop_norm(&self, v: &[C64]) -> Result<C64> {
        self.gram.norm_sq(v)
    }

    fn measure(&self, pair: (&TaggedState, &TaggedState), phi: &[C64], a: &SparseOp) -> Result<BMeasurement> {
        let (u, v) = (&pair.0.datum.eigenvector, &pair.1.datum.eigenvector);
        let first = measure_b(u, v, phi, a, &self.gram, &self.h0)?;
        let second = measure_b(v, u, phi, a, &self.gram, &self.h0)?;
        let p = self.params();
        Ok(BMeasurement {
            n: p.n,
            c: p.c,
            module: self.ops.basis.spec.kind.to_string(),
            pair: (pair.0.tag, pair.1.tag),
            j: j_measure(u, v)?,
            first,
            second,
            loop_norm_psi: self.loop_norm(u)?,
            loop_norm_psi_prime: self.loop_norm(v)?,
            vectors: (u.clone(), v.clone()),
        })
    }
}

/// The pair probed by a null-descent kind in its standard module.
pub fn pair_tags(kind: NullKind) -> Result<(FieldName, FieldName, FieldName, usize)> {
    match kind {
        NullKind::B11 => Ok((FieldName::Alpha, FieldName::Beta, FieldName::Phi11, 1)),
        NullKind::B12 => Ok((FieldName::Mu, FieldName::Nu, FieldName::Phi12, 2)),
        NullKind::Tt => Err(Error::invalid("the (T, T') pair lives in the glued module; use measure_tt")),
    }
}

fn resolve(spectrum: &ModuleSpectrum, tags: &[FieldName]) -> Result<Vec<TaggedState>> {
    identify_fields(spectrum, tags).into_iter().collect()
}

/// `J` of the pair `(alpha, beta)` (`B11`) or `(mu, nu)` (`B12`) in
/// `Standard(j, 0)`.
pub fn j_pair(kind: NullKind, n: usize, c: f64, convention: Convention) -> Result<f64> {
    let (a, b, _, j) = pair_tags(kind)?;
    let setup = ModuleSetup::new(ModuleSpec::standard(j, 0.0, convention), LatticeParams::from_c(n, c, convention)?)?;
    let t = resolve(&setup.spectrum, &[a, b])?;
    j_measure(&t[0].datum.eigenvector, &t[1].datum.eigenvector)
}

/// `b_{1,1}` or `b_{1,2}` measured on the tagged pair of `Standard(j, 0)`.
pub fn probe_pair(kind: NullKind, n: usize, c: f64, convention: Convention, descent: Descent) -> Result<BMeasurement> {
    let (a, b, f, j) = pair_tags(kind)?;
    let setup = ModuleSetup::new(ModuleSpec::standard(j, 0.0, convention), LatticeParams::from_c(n, c, convention)?)?;
    let t = resolve(&setup.spectrum, &[a, b, f])?;
    let op = null_descent_operator(kind, &setup.ops, descent)?;
    setup.measure((&t[0], &t[1]), &t[2].datum.eigenvector, &op.op)
}

/// Module used for the `(T, T')` measurement.
pub fn tt_module() -> ModuleSpec {
    ModuleSpec::new(ModuleKind::GluedQuotient { jmax: 2 }, Convention::Negated)
}

/// `b(T, t)` at one value of `c`, away from `c = 0`.
pub fn measure_tt(n: usize, c: f64) -> Result<BMeasurement> {
    measure_tt_params(LatticeParams::from_c(n, c, Convention::Negated)?)
}

pub fn measure_tt_params(params: LatticeParams) -> Result<BMeasurement> {
    let setup = ModuleSetup::new(tt_module(), params)?;
    let op = null_descent_operator(NullKind::Tt, &setup.ops, Descent::Symmetric)?;
    let [i, t, tp] = identify_tt(&setup.spectrum, &op.op)?;
    setup.measure((&t, &tp), &i.datum.eigenvector, &op.op)
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitStep {
    pub k: u32,
    pub c: f64,
    /// `(b1, b2)` at `+c` and at `-c`.
    pub plus: (f64, f64),
    pub minus: (f64, f64),
    pub mean: (f64, f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct TtLimit {
    pub n: usize,
    pub b1: f64,
    pub b2: f64,
    /// Richardson estimates from consecutive steps.
    pub richardson: Vec<(f64, f64)>,
    pub steps: Vec<LimitStep>,
    /// Change of the last Richardson estimate against the one before.
    pub spread: f64,
    /// Largest imaginary part seen along the sequence.
    pub max_imag: f64,
}

/// Exponents `k` of the sequence `c = +-pi 10^(-k)`.
pub const LIMIT_EXPONENTS: [u32; 4] = [2, 3, 4, 5];

/// `lim_{c -> 0} b(T, t)` from the symmetric sequence `c = +-pi 10^(-k)`.
///
/// Averaging `+c` and `-c` removes the odd part, so the remainder is
/// `O(c^2)` and one Richardson step with ratio 100 cancels it.
pub fn measure_b_tt_limit(n: usize) -> Result<TtLimit> {
    measure_b_tt_limit_with(n, &LIMIT_EXPONENTS, 1e-4)
}

pub fn measure_b_tt_limit_with(n: usize, exponents: &[u32], tolerance: f64) -> Result<TtLimit> {
    if exponents.len() < 2 {
        return Err(Error::invalid("the limit needs at least two exponents"));
    }
    let points: Vec<(u32, f64, f64)> = exponents
        .iter()
        .flat_map(|&k| {
            let c = PI * 10f64.powi(-(k as i32));
            [(k, c, 1.0), (k, c, -1.0)]
        })
        .collect();
    let values: Vec<Result<(C64, C64)>> =
        points.par_iter().map(|&(_, c, s)| measure_tt(n, s * c).map(|m| (m.b1(), m.b2()))).collect();
    let mut max_imag: f64 = 0.0;
    let mut steps = Vec::new();
    for (pair, vals) in points.chunks(2).zip(values.chunks(2)) {
        let (p, m) = match (&vals[0], &vals[1]) {
            (Ok(p), Ok(m)) => (*p, *m),
            (Err(e), _) | (_, Err(e)) => return Err(Error::LimitFailure(format!("N={n}, c=+-{:e}: {e}", pair[0].1))),
        };
        max_imag = [p.0, p.1, m.0, m.1].iter().map(|z| z.im.abs()).fold(max_imag, f64::max);
        steps.push(LimitStep {
            k: pair[0].0,
            c: pair[0].1,
            plus: (p.0.re, p.1.re),
            minus: (m.0.re, m.1.re),
            mean: ((p.0.re + m.0.re) / 2.0, (p.1.re + m.1.re) / 2.0),
        });
    }
    let richardson: Vec<(f64, f64)> = steps
        .windows(2)
        .map(|w| {
            let r = 10f64.powi(2 * (w[1].k as i32 - w[0].k as i32));
            let f = |a: f64, b: f64| (r * b - a) / (r - 1.0);
            (f(w[0].mean.0, w[1].mean.0), f(w[0].mean.1, w[1].mean.1))
        })
        .collect();
    let last = *richardson.last().expect("at least two steps");
    let spread = richardson.len().checked_sub(2).map_or(f64::INFINITY, |i| {
        let prev = richardson[i];
        (last.0 - prev.0).abs().max((last.1 - prev.1).abs())
    });
    if !(spread <= tolerance) || !last.0.is_finite() || !last.1.is_finite() {
        return Err(Error::LimitFailure(format!(
            "N={n}: Richardson estimates {richardson:?} do not settle within {tolerance:e}"
        )));
    }
    Ok(TtLimit { n, b1: last.0, b2: last.1, richardson, steps, spread, max_imag })
}

/// Loop norms of a tagged pair at one size.
#[derive(Clone, Debug, Serialize)]
pub struct PairNorms {
    pub n: usize,
    /// `<psi|psi>` and `<psi'|psi'>` of the Euclidean-normalized vectors.
    #[serde(serialize_with = "ser_c64")]
    pub psi: C64,
    #[serde(serialize_with = "ser_c64")]
    pub psi_prime: C64,
    /// `<Phi|Phi>` of the Euclidean-normalized primary of the same module.
    #[serde(serialize_with = "ser_c64")]
    pub primary: C64,
}

impl PairNorms {
    /// `|<psi|psi>| / |<Phi|Phi>|`: the loop norm in units where the primary
    /// has unit loop norm, which removes the growth of the Gram matrix with N.
    pub fn relative_psi(&self) -> f64 {
        self.psi.norm() / self.primary.norm()
    }

    pub fn relative_psi_prime(&self) -> f64 {
        self.psi_prime.norm() / self.primary.norm()
    }
}

/// Loop norms of the tagged pair `(alpha, beta)` or `(mu, nu)` across sizes.
pub fn loop_norm_decay(kind: NullKind, sizes: &[usize], c: f64, convention: Convention) -> Vec<Result<PairNorms>> {
    sizes
        .par_iter()
        .map(|&n| {
            let (a, b, f, j) = pair_tags(kind)?;
            let setup = ModuleSetup::new(ModuleSpec::standard(j, 0.0, convention), LatticeParams::from_c(n, c, convention)?)?;
            let t = resolve(&setup.spectrum, &[a, b, f])?;
            let ln = |k: usize| setup.loop_norm(&t[k].datum.eigenvector);
            Ok(PairNorms { n, psi: ln(0)?, psi_prime: ln(1)?, primary: ln(2)? })
        })
        .collect()
}

/// `<T|T>` in the glued module at one `c`, `T` Euclidean-normalized.
pub fn t_loop_norm(n: usize, c: f64) -> Result<C64> {
    let setup = ModuleSetup::new(tt_module(), LatticeParams::from_c(n, c, Convention::Negated)?)?;
    let op = null_descent_operator(NullKind::Tt, &setup.ops, Descent::Symmetric)?;
    let [_, t, _] = identify_tt(&setup.spectrum, &op.op)?;
    setup.loop_norm(&t.datum.eigenvector)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    fn re(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| C64::from(x)).collect()
    }

    #[test]
    fn j_toy() {
        for x in [0.0, 0.3, 2.0] {
            let j = j_measure(&re(&[1.0, 0.0]), &re(&[1.0, x])).unwrap();
            assert!((j - 1.0 / (1.0 + x * x).sqrt()).abs() < 1e-15);
        }
        assert!((j_measure(&re(&[0.3, -2.0]), &re(&[0.3, -2.0])).unwrap() - 1.0).abs() < 1e-15);
        assert!(j_measure(&re(&[0.0, 0.0]), &re(&[1.0, 0.0])).is_err());
    }

    fn toy(x: f64) -> SparseOp {
        // [[0, 1], [0, x]]
        SparseOp::from_columns(2, vec![vec![], vec![(0, ONE), (1, C64::from(x))]])
    }

    #[test]
    fn toy_gram_schmidt() {
        let close = |a: &[C64], b: &[f64], tol: f64| a.iter().zip(b).all(|(p, q)| (p - q).norm() < tol);
        for x in [0.5, 1e-3, 1e-6] {
            let (u, v) = (re(&[1.0, 0.0]), re(&[1.0, x]));
            let (uh, vp) = gram_schmidt_pair(&u, &v).unwrap();
            assert!(close(&uh, &[1.0, 0.0], 1e-15) && close(&vp, &[0.0, 1.0], 1e-15));
            let (vh, up) = gram_schmidt_pair(&v, &u).unwrap();
            assert!(close(&vh, &[1.0, 0.0], 2.0 * x) && close(&up, &[0.0, -1.0], 2.0 * x));
            // (u|M|t) = t_2 = 2
            let t = emerging_jordan_vector(&u, &v, &toy(x)).unwrap();
            assert!(close(&t, &[0.0, 2.0], 1e-12));
            let t = emerging_jordan_vector(&v, &u, &toy(x)).unwrap();
            assert!(dot(&v, &t).norm() < 1e-10 * norm(&v) * norm(&t));
        }
        assert!(gram_schmidt_pair(&re(&[1.0, 2.0]), &re(&[2.0, 4.0])).is_err());
        assert!(emerging_jordan_vector(&re(&[0.0, 1.0]), &re(&[1.0, 1.0]), &SparseOp::identity(2)).is_err());
    }

    #[test]
    fn descent_coefficient_matches_kac() {
        // h_12 = (x - 2)/(4(x + 1))
        for x in [0.7, 1.0, 2.0, 5.5] {
            let h12 = (x - 2.0) / (4.0 * (x + 1.0));
            assert!((descent_coefficient(x).unwrap() + 3.0 / (2.0 * (2.0 * h12 + 1.0))).abs() < 1e-14);
        }
        // 2 h_12 + 1 = 3x / (2(x + 1)) only vanishes at x = 0
        assert!(descent_coefficient(0.0).is_err());
    }

    #[test]
    fn null_kinds() {
        let spec = ModuleSpec::standard(1, 0.0, Convention::Plain);
        let ops = LatticeOperators::new(build_basis(spec, 6).unwrap(), LatticeParams::from_c(6, -1.0, Convention::Plain).unwrap()).unwrap();
        let a = null_descent_operator(NullKind::B11, &ops, Descent::Symmetric).unwrap();
        assert_eq!(a.op.max_diff(&ops.h_n(-1).unwrap().op), 0.0);
        let a = null_descent_operator(NullKind::Tt, &ops, Descent::Chiral).unwrap();
        assert_eq!(a.op.max_diff(&ops.koo_saleur(-2, Chirality::Left).unwrap().op), 0.0);
    }

    #[test]
    fn l2_closed_form() {
        for x in [0.6, 0.8, 1.5, 2.0 + 1e-3, 3.0, 7.0] {
            let p = LatticeParams::from_x(4, x, Convention::Negated).unwrap();
            let b = measure_tt_params(p).unwrap();
            let want = -8.0 * (1.0 - p.m) / (PI * p.v_f);
            assert!((b.b1() - want).norm() < 1e-9, "x={x}: {} vs {want}", b.b1());
        }
    }

    #[test]
    fn b_invariant_under_rescaling() {
        let setup = ModuleSetup::new(ModuleSpec::standard(1, 0.0, Convention::Plain), LatticeParams::from_c(6, -1.0, Convention::Plain).unwrap()).unwrap();
        let t = resolve(&setup.spectrum, &[FieldName::Alpha, FieldName::Beta, FieldName::Phi11]).unwrap();
        let a = setup.ops.h_n(-1).unwrap().op;
        let (u, v, f) = (&t[0].datum.eigenvector, &t[1].datum.eigenvector, &t[2].datum.eigenvector);
        let r0 = measure_b(u, v, f, &a, &setup.gram, &setup.h0).unwrap();
        let k = C64::new(-0.4, 2.3);
        let r1 = measure_b(u, &scale(v, k), f, &a, &setup.gram, &setup.h0).unwrap();
        let r2 = measure_b(&scale(u, k), v, &scale(f, k), &a, &setup.gram, &setup.h0).unwrap();
        assert!((r0.b - r1.b).norm() < 1e-10 * r0.b.norm().max(1.0));
        assert!((r0.b - r2.b).norm() < 1e-10 * r0.b.norm().max(1.0));
        assert!((j_measure(u, v).unwrap() - j_measure(u, &scale(v, k)).unwrap()).abs() < 1e-12);
    }
}
