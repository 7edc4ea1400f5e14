//! Loop and Euclidean scalar products on link-state modules.

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::LatticeParams;
use crate::basis::{Basis, LinkState, ModuleKind, ModuleSpec};
use crate::error::{Error, Result};
use crate::linalg::{mat_vec, C64, ONE, ZERO};

/// Signed step along the arc leaving site `i`; openers move right.
fn step(s: &LinkState, p: &[Option<usize>], i: usize, n: usize) -> (usize, i64) {
    let k = p[i].expect("step along a through-line");
    let d = if s.is_up(i) { ((k + n - i) % n) as i64 } else { -(((i + n - k) % n) as i64) };
    (k, d)
}

fn overlap_with(u: &LinkState, pu: &[Option<usize>], v: &LinkState, pv: &[Option<usize>], spec: &ModuleSpec, m: f64) -> C64 {
    let n = u.n_sites();
    let standard = spec.is_standard();
    let phi = spec.phi();
    let winding_weight = match spec.kind {
        ModuleKind::Standard { j: 0, phi } => 2.0 * (phi / 2.0).cos(),
        _ => m,
    };
    let mut seen = vec![false; n];
    let mut val = ONE;

    // paths entering from through-lines of v
    for start in 0..n {
        if pv[start].is_some() || seen[start] {
            continue;
        }
        let mut i = start;
        let mut disp = 0i64;
        seen[i] = true;
        let mut through = true;
        while pu[i].is_some() {
            let (k, d) = step(u, pu, i, n);
            disp += d;
            i = k;
            seen[i] = true;
            if pv[i].is_none() {
                if standard {
                    return ZERO;
                }
                through = false;
                break;
            }
            let (k, d) = step(v, pv, i, n);
            disp += d;
            i = k;
            seen[i] = true;
        }
        if through && standard {
            val *= C64::from_polar(1.0, phi * disp as f64 / (2 * n) as f64);
        }
    }
    // paths joining two through-lines of u
    for start in 0..n {
        if pu[start].is_some() || seen[start] {
            continue;
        }
        let mut i = start;
        seen[i] = true;
        loop {
            let (k, _) = step(v, pv, i, n);
            i = k;
            seen[i] = true;
            if pu[i].is_none() {
                if standard {
                    return ZERO;
                }
                break;
            }
            let (k, _) = step(u, pu, i, n);
            i = k;
            seen[i] = true;
        }
    }
    // closed loops
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut i = start;
        let mut disp = 0i64;
        loop {
            seen[i] = true;
            let (k, d) = step(u, pu, i, n);
            disp += d;
            i = k;
            seen[i] = true;
            let (k, d) = step(v, pv, i, n);
            disp += d;
            i = k;
            if i == start {
                break;
            }
        }
        val *= if disp == 0 { m } else { winding_weight };
    }
    val
}

/// Loop overlap `<u|v>`: the mirror image of `u` glued on top of `v`.
pub fn loop_overlap(u: &LinkState, v: &LinkState, spec: &ModuleSpec, params: &LatticeParams) -> Result<C64> {
    if u.n_sites() != params.n || v.n_sites() != params.n || !spec.contains(u) || !spec.contains(v) {
        return Err(Error::invalid(format!("states {u} and {v} are not both in module {:?}", spec.kind)));
    }
    Ok(overlap_with(u, &u.partners(), v, &v.partners(), spec, params.m))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GramKind {
    Loop,
    Euclidean,
}

#[derive(Clone, Debug)]
pub struct GramMatrix {
    pub kind: GramKind,
    pub data: Mat<C64>,
}

pub fn gram(basis: &Basis, kind: GramKind, params: &LatticeParams) -> Result<GramMatrix> {
    let d = basis.len();
    if basis.n_sites() != params.n {
        return Err(Error::invalid("basis and parameters disagree on N"));
    }
    let data = match kind {
        GramKind::Euclidean => Mat::<C64>::identity(d, d),
        GramKind::Loop => {
            let spec = basis.spec;
            let rows: Vec<Vec<C64>> = (0..d)
                .into_par_iter()
                .map(|r| {
                    let (u, pu) = (basis.state(r), basis.partners_of(r));
                    (0..d).map(|k| overlap_with(&u, pu, &basis.state(k), basis.partners_of(k), &spec, params.m)).collect()
                })
                .collect();
            Mat::from_fn(d, d, |r, k| rows[r][k])
        }
    };
    Ok(GramMatrix { kind, data })
}

impl GramMatrix {
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    /// `conj(a)^T G b`.
    pub fn product(&self, a: &[C64], b: &[C64]) -> Result<C64> {
        if a.len() != self.dim() || b.len() != self.dim() {
            return Err(Error::invalid(format!("vector lengths {}, {} do not match Gram dimension {}", a.len(), b.len(), self.dim())));
        }
        let gb = match self.kind {
            GramKind::Euclidean => b.to_vec(),
            GramKind::Loop => mat_vec(&self.data, b),
        };
        Ok(a.iter().zip(&gb).map(|(x, y)| x.conj() * y).sum())
    }

    pub fn norm_sq(&self, a: &[C64]) -> Result<C64> {
        self.product(a, a)
    }
}

pub fn loop_product(a: &[C64], b: &[C64], gram: &GramMatrix) -> Result<C64> {
    gram.product(a, b)
}

/// Divides a `b`-type ratio by the sign of the ground-state norm, which is
/// `+-1` after normalization.
pub fn sign_corrected_ratio(numerator: C64, denominator: C64, ground_norm: C64) -> Result<C64> {
    let s = ground_norm.re.signum();
    if ground_norm.re == 0.0 || denominator == ZERO {
        return Err(Error::DegenerateMeasurement("zero denominator or null ground-state norm".into()));
    }
    Ok(numerator / (denominator * s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::all_generators;
    use crate::basis::{build_basis, Convention};

    fn st(n: usize, t: &str) -> LinkState {
        LinkState::parse(n, t).unwrap()
    }

    #[test]
    fn worked_examples() {
        let p4 = LatticeParams::custom(4, 0.73, 0.0, Convention::Plain).unwrap();
        let std1 = ModuleSpec::standard(1, 0.0, Convention::Plain);
        let a = st(4, "(12)(3)(4)");
        let b = st(4, "(34)(1)(2)");
        assert_eq!(loop_overlap(&a, &b, &std1, &p4).unwrap(), ZERO);
        let glued = ModuleSpec::new(ModuleKind::Glued { jmax: 2 }, Convention::Plain);
        assert_eq!(loop_overlap(&a, &b, &glued, &p4).unwrap(), ONE);
        // noncontractible loops weighted like contractible ones: 2 cos(phi/2) = m
        let std0 = ModuleSpec::standard(0, 2.0 * (0.73f64 / 2.0).acos(), Convention::Plain);
        let v = loop_overlap(&st(4, "(23)(41)"), &st(4, "(14)(23)"), &std0, &p4).unwrap();
        assert!((v - 0.73 * 0.73).norm() < 1e-14);
        let phi = 0.61;
        let p6 = LatticeParams::custom(6, 0.73, 0.0, Convention::Plain).unwrap();
        let spec = ModuleSpec::standard(1, phi, Convention::Plain);
        let v = loop_overlap(&st(6, "(14)(23)(5)(6)"), &st(6, "(23)(45)(1)(6)"), &spec, &p6).unwrap();
        assert!((v - C64::from_polar(0.73, phi / 3.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_foreign_state() {
        let p = LatticeParams::custom(4, 0.73, 0.0, Convention::Plain).unwrap();
        let spec = ModuleSpec::standard(1, 0.0, Convention::Plain);
        assert!(loop_overlap(&st(4, "(12)(34)"), &st(4, "(12)(3)(4)"), &spec, &p).is_err());
    }

    #[test]
    fn euclidean_is_identity_and_products() {
        let spec = ModuleSpec::standard(1, 0.0, Convention::Plain);
        let b = build_basis(spec, 4).unwrap();
        let p = LatticeParams::custom(4, 0.73, 0.0, Convention::Plain).unwrap();
        let g = gram(&b, GramKind::Euclidean, &p).unwrap();
        let e = [ONE, ZERO, ZERO, ZERO];
        assert_eq!(g.product(&e, &e).unwrap(), ONE);
        let gl = gram(&b, GramKind::Loop, &p).unwrap();
        assert!((gl.product(&e, &e).unwrap() - 0.73).norm() < 1e-15);
        assert!(gl.product(&e, &[ONE]).is_err());
    }

    #[test]
    fn generators_self_adjoint() {
        for (kind, conv) in [
            (ModuleKind::Standard { j: 1, phi: 0.5 }, Convention::Plain),
            (ModuleKind::Standard { j: 0, phi: 0.3 }, Convention::Negated),
            (ModuleKind::GluedQuotient { jmax: 2 }, Convention::Negated),
            (ModuleKind::Glued { jmax: 3 }, Convention::Plain),
        ] {
            let spec = ModuleSpec::new(kind, conv);
            let b = build_basis(spec, 6).unwrap();
            let p = LatticeParams::from_x(6, 1.8, conv).unwrap();
            let g = gram(&b, GramKind::Loop, &p).unwrap().data;
            for e in all_generators(&b, &p).unwrap() {
                let ed = e.to_dense();
                let lhs = &g * &ed;
                let rhs = ed.adjoint() * &g;
                let diff = crate::linalg::fro_norm(&(lhs - rhs));
                assert!(diff < 1e-11, "{kind:?}: {diff}");
            }
        }
    }

    #[test]
    fn sign_correction() {
        let r = sign_corrected_ratio(C64::from(3.0), C64::from(1.5), C64::from(-1.0)).unwrap();
        assert_eq!(r, C64::from(-2.0));
        let r = sign_corrected_ratio(C64::from(3.0), C64::from(1.5), C64::from(1.0)).unwrap();
        assert_eq!(r, C64::from(2.0));
        assert!(sign_corrected_ratio(ONE, ZERO, ONE).is_err());
    }
}
