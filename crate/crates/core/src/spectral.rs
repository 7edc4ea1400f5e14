//! Eigendecomposition, momentum blocking, field tagging and state tracking.

use std::collections::BTreeMap;
use std::fmt;

use faer::Mat;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::OperatorMatrix;
use crate::error::{Error, Result};
use crate::koosaleur::conformal_momentum;
use crate::linalg::{axpy, dot, eig, fro_norm, norm, normalized, rank, SparseOp, C64, ZERO};

/// Largest matrix handed to the dense solver.
pub const DEFAULT_DIM_CAP: usize = 6000;

#[derive(Clone, Debug, Serialize)]
pub struct SpectralDatum {
    #[serde(serialize_with = "ser_c64")]
    pub eigenvalue: C64,
    #[serde(skip)]
    pub eigenvector: Vec<C64>,
    /// Lattice label `p` with tau-eigenvalue `exp(-2 pi i p / N)`, `0 <= p < N`.
    pub momentum: Option<usize>,
    pub weight_estimate: f64,
    pub track_id: Option<String>,
}

fn ser_c64<S: serde::Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

/// An eigenvalue cluster whose eigenvectors span less than its multiplicity.
#[derive(Clone, Debug, Serialize)]
pub struct DefectiveCluster {
    #[serde(serialize_with = "ser_c64")]
    pub eigenvalue: C64,
    pub algebraic: usize,
    pub geometric: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub data: Vec<SpectralDatum>,
    pub worst_residual: f64,
    pub defective: Vec<DefectiveCluster>,
}

/// Groups indices of eigenvalues (sorted by real part) closer than `tol`.
pub fn clusters(values: &[C64], tol: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(last) if (values[last[0]] - v).norm() < tol => last.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

fn decompose_dense(m: &Mat<C64>) -> Result<Decomposition> {
    let pairs = eig(m).map_err(Error::NumericalFailure)?;
    let scale = fro_norm(m).max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for (lam, v) in &pairs {
        let mv = crate::linalg::mat_vec(m, v);
        let r = norm(&axpy(&mv, -lam, v));
        worst = worst.max(r);
    }
    if worst > 1e-9 * scale {
        return Err(Error::NumericalFailure(format!("eigenpair residual {worst:e} exceeds 1e-9 * |M| = {:e}", 1e-9 * scale)));
    }
    let values: Vec<C64> = pairs.iter().map(|p| p.0).collect();
    let mut defective = Vec::new();
    for cl in clusters(&values, 1e-6 * scale.max(1.0)) {
        if cl.len() < 2 {
            continue;
        }
        let vecs: Vec<Vec<C64>> = cl.iter().map(|&i| pairs[i].1.clone()).collect();
        let g = rank(&vecs, 1e-6);
        if g < cl.len() {
            defective.push(DefectiveCluster { eigenvalue: values[cl[0]], algebraic: cl.len(), geometric: g });
        }
    }
    let data = pairs
        .into_iter()
        .map(|(l, v)| SpectralDatum { eigenvalue: l, eigenvector: v, momentum: None, weight_estimate: l.re, track_id: None })
        .collect();
    Ok(Decomposition { data, worst_residual: worst, defective })
}

/// Full eigendecomposition of a module operator.
pub fn eigendecompose(op: &OperatorMatrix) -> Result<Decomposition> {
    eigendecompose_capped(op, DEFAULT_DIM_CAP)
}

pub fn eigendecompose_capped(op: &OperatorMatrix, cap: usize) -> Result<Decomposition> {
    if op.dim() > cap {
        return Err(Error::invalid(format!("matrix dimension {} exceeds cap {cap}", op.dim())));
    }
    decompose_dense(&op.to_dense())
}

/// Orthonormal bases of the eigenspaces of a monomial translation operator.
#[derive(Clone, Debug)]
pub struct MomentumBlocks {
    n: usize,
    dim: usize,
    /// `sectors[p]` lists sparse unit vectors `(index, value)`.
    sectors: BTreeMap<usize, Vec<Vec<(usize, C64)>>>,
}

impl MomentumBlocks {
    pub fn new(tau: &SparseOp, n: usize) -> Result<Self> {
        let dim = tau.dim();
        let mut seen = vec![false; dim];
        let mut sectors: BTreeMap<usize, Vec<Vec<(usize, C64)>>> = BTreeMap::new();
        for s0 in 0..dim {
            if seen[s0] {
                continue;
            }
            // follow tau^k s0 = coef_k e_{orb_k} until it returns to s0
            let mut orbit = vec![(s0, C64::from(1.0))];
            seen[s0] = true;
            let mu = loop {
                let &(cur, coef) = orbit.last().unwrap();
                let col = tau.column(cur);
                if col.len() != 1 {
                    return Err(Error::invalid("translation operator is not monomial"));
                }
                let (next, c) = col[0];
                if next == s0 {
                    break coef * c;
                }
                if seen[next] || orbit.len() > n {
                    return Err(Error::invalid("translation orbit does not close"));
                }
                seen[next] = true;
                orbit.push((next, coef * c));
            };
            let l = orbit.len();
            if (mu.powi((n / l) as i32) - 1.0).norm() > 1e-9 {
                return Err(Error::invalid("translation eigenvalues are not N-th roots of unity (nonzero pseudomomentum)"));
            }
            for p in 0..n {
                let lam = C64::from_polar(1.0, -2.0 * std::f64::consts::PI * p as f64 / n as f64);
                if (lam.powi(l as i32) - mu).norm() > 1e-9 {
                    continue;
                }
                let scale = 1.0 / (l as f64).sqrt();
                let v: Vec<(usize, C64)> = orbit.iter().enumerate().map(|(k, &(idx, c))| (idx, c * lam.powi(-(k as i32)) * scale)).collect();
                sectors.entry(p).or_default().push(v);
            }
        }
        Ok(MomentumBlocks { n, dim, sectors })
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn momenta(&self) -> Vec<usize> {
        self.sectors.keys().copied().collect()
    }

    pub fn sector_dim(&self, p: usize) -> usize {
        self.sectors.get(&p).map_or(0, Vec::len)
    }

    fn lift(&self, p: usize, coords: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.dim];
        for (b, &c) in self.sectors[&p].iter().zip(coords) {
            for &(i, v) in b {
                out[i] += v * c;
            }
        }
        out
    }

    /// Coordinates of the orthogonal projection of `v` onto sector `p`.
    pub fn coordinates(&self, p: usize, v: &[C64]) -> Vec<C64> {
        self.sectors.get(&p).map_or_else(Vec::new, |bs| bs.iter().map(|b| b.iter().map(|&(i, x)| x.conj() * v[i]).sum()).collect())
    }

    pub fn projection_norm(&self, p: usize, v: &[C64]) -> f64 {
        norm(&self.coordinates(p, v))
    }

    /// `B^dagger op B` on sector `p`.
    pub fn restrict(&self, op: &SparseOp, p: usize) -> Mat<C64> {
        let bs = match self.sectors.get(&p) {
            Some(b) => b,
            None => return Mat::zeros(0, 0),
        };
        let k = bs.len();
        let cols: Vec<Vec<C64>> = bs
            .par_iter()
            .map(|b| {
                let mut x = vec![ZERO; self.dim];
                for &(i, v) in b {
                    x[i] = v;
                }
                self.coordinates(p, &op.apply(&x))
            })
            .collect();
        Mat::from_fn(k, k, |r, c| cols[c][r])
    }

    /// Eigenpairs of `op` inside sector `p`, lifted to the full space.
    pub fn spectrum(&self, op: &SparseOp, p: usize) -> Result<Vec<SpectralDatum>> {
        let h = self.restrict(op, p);
        let dec = decompose_dense(&h)?;
        Ok(dec
            .data
            .into_iter()
            .map(|d| SpectralDatum { eigenvector: normalized(&self.lift(p, &d.eigenvector)), momentum: Some(p), ..d })
            .collect())
    }
}

/// Block decomposition of `op` using its commuting translation `tau`.
pub fn block_by_momentum(op: &OperatorMatrix, tau: &OperatorMatrix, n: usize) -> Result<Vec<SpectralDatum>> {
    let comm = op.op.compose(&tau.op).max_diff(&tau.op.compose(&op.op));
    if comm > 1e-10 {
        return Err(Error::invalid(format!("operator does not commute with translation: residual {comm:e}")));
    }
    let blocks = MomentumBlocks::new(&tau.op, n)?;
    let per: Vec<Result<Vec<SpectralDatum>>> = blocks.momenta().into_par_iter().map(|p| blocks.spectrum(&op.op, p)).collect();
    let mut all = Vec::new();
    for r in per {
        all.extend(r?);
    }
    all.sort_by(|a, b| a.eigenvalue.re.total_cmp(&b.eigenvalue.re).then(a.momentum.cmp(&b.momentum)));
    Ok(all)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum FieldName {
    I,
    T,
    Tprime,
    Alpha,
    Beta,
    Mu,
    Nu,
    Phi11,
    Phi12,
}

impl fmt::Display for FieldName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FieldName::I => "I",
            FieldName::T => "T",
            FieldName::Tprime => "Tprime",
            FieldName::Alpha => "alpha",
            FieldName::Beta => "beta",
            FieldName::Mu => "mu",
            FieldName::Nu => "nu",
            FieldName::Phi11 => "Phi11",
            FieldName::Phi12 => "Phi12",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for FieldName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "I" => FieldName::I,
            "T" => FieldName::T,
            "Tprime" | "T'" => FieldName::Tprime,
            "alpha" => FieldName::Alpha,
            "beta" => FieldName::Beta,
            "mu" => FieldName::Mu,
            "nu" => FieldName::Nu,
            "Phi11" => FieldName::Phi11,
            "Phi12" => FieldName::Phi12,
            _ => return Err(Error::invalid(format!("unknown field tag {s:?}"))),
        })
    }
}

/// Spectrum of `H0` on one module, organised by lattice momentum.
#[derive(Clone, Debug)]
pub struct ModuleSpectrum {
    pub n: usize,
    pub blocks: MomentumBlocks,
    pub sectors: BTreeMap<usize, Vec<SpectralDatum>>,
    /// Through-line sector `j` of every basis vector.
    pub state_sectors: Vec<usize>,
    pub ground_momentum: usize,
}

/// Eigenvalues closer than this (relative) count as one degenerate level.
pub const DEGENERACY_TOL: f64 = 1e-8;

impl ModuleSpectrum {
    pub fn new(h0: &SparseOp, tau: &SparseOp, n: usize, state_sectors: Vec<usize>) -> Result<Self> {
        let blocks = MomentumBlocks::new(tau, n)?;
        let per: Vec<(usize, Result<Vec<SpectralDatum>>)> = blocks.momenta().into_par_iter().map(|p| (p, blocks.spectrum(h0, p))).collect();
        let mut sectors = BTreeMap::new();
        for (p, r) in per {
            sectors.insert(p, r?);
        }
        let ground_momentum = sectors
            .iter()
            .filter_map(|(p, v)| v.first().map(|d| (*p, d.eigenvalue.re)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|g| g.0)
            .ok_or_else(|| Error::invalid("empty module"))?;
        Ok(ModuleSpectrum { n, blocks, sectors, state_sectors, ground_momentum })
    }

    pub fn ground(&self) -> &SpectralDatum {
        &self.sectors[&self.ground_momentum][0]
    }

    /// Lattice momentum at conformal offset `k` above the excitations that
    /// carry the macroscopic momentum `pi` relative to the ground state.
    pub fn shifted_momentum(&self, k: i64) -> usize {
        (self.ground_momentum as i64 + (self.n / 2) as i64 + k).rem_euclid(self.n as i64) as usize
    }

    /// Conformal momentum of a lattice label, measured from the sector that
    /// holds the zero-momentum excitations.
    pub fn conformal_label(&self, p: usize) -> i64 {
        conformal_momentum(p as i64 - self.shifted_momentum(0) as i64, self.n)
    }

    pub fn sector(&self, p: usize) -> &[SpectralDatum] {
        self.sectors.get(&p).map_or(&[], Vec::as_slice)
    }

    /// Euclidean weight of `v` on basis states of sector `j`.
    pub fn sector_weight(&self, v: &[C64], j: usize) -> f64 {
        v.iter().zip(&self.state_sectors).filter(|(_, &k)| k == j).map(|(x, _)| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Euclidean weight of `v` on basis states with `j > 0`.
    pub fn higher_sector_weight(&self, v: &[C64]) -> f64 {
        v.iter().zip(&self.state_sectors).filter(|(_, &j)| j > 0).map(|(x, _)| x.norm_sqr()).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct TaggedState {
    pub tag: FieldName,
    pub datum: SpectralDatum,
}

/// First two eigenvalue levels of a sector that are not exact doublets.
/// A degenerate lower level is represented by the projection of the upper
/// state onto its eigenspace.
fn singlet_pair(sector: &[SpectralDatum], tags: (FieldName, FieldName)) -> Result<(SpectralDatum, SpectralDatum)> {
    let values: Vec<C64> = sector.iter().map(|d| d.eigenvalue).collect();
    let scale = values.iter().map(|v| v.norm()).fold(1.0, f64::max);
    let levels: Vec<Vec<usize>> = clusters(&values, DEGENERACY_TOL * scale).into_iter().filter(|c| c.len() != 2).collect();
    if levels.len() < 2 {
        return Err(Error::Unresolved {
            tag: format!("{}/{}", tags.0, tags.1),
            reason: format!("sector holds {} non-doublet levels, need 2", levels.len()),
        });
    }
    let upper = sector[levels[1][0]].clone();
    let lower = if levels[0].len() == 1 {
        sector[levels[0][0]].clone()
    } else {
        // orthonormalize the eigenspace, project the upper state on it
        let mut q: Vec<Vec<C64>> = Vec::new();
        for &i in &levels[0] {
            let mut w = sector[i].eigenvector.clone();
            for qi in &q {
                w = axpy(&w, -dot(qi, &w), qi);
            }
            if norm(&w) > 1e-8 {
                q.push(normalized(&w));
            }
        }
        let mut proj = vec![ZERO; upper.eigenvector.len()];
        for qi in &q {
            proj = axpy(&proj, dot(qi, &upper.eigenvector), qi);
        }
        if norm(&proj) < 1e-12 {
            return Err(Error::Unresolved { tag: tags.0.to_string(), reason: "degenerate level orthogonal to partner".into() });
        }
        SpectralDatum { eigenvector: normalized(&proj), ..sector[levels[0][0]].clone() }
    };
    Ok((lower, upper))
}

fn tagged(tag: FieldName, mut d: SpectralDatum) -> TaggedState {
    d.track_id = Some(tag.to_string());
    TaggedState { tag, datum: d }
}

/// Resolves standard-module tags from the `H0` spectrum of that module.
///
/// The pairs sit in the sector carrying momentum `pi` relative to the
/// ground state; `Phi_{1,s}` is the lowest state `s` steps above it, so
/// that `H_{-s}` maps it into the pair sector.
pub fn identify_fields(spectrum: &ModuleSpectrum, tags: &[FieldName]) -> Vec<Result<TaggedState>> {
    let pair_sector = spectrum.sector(spectrum.shifted_momentum(0));
    tags.iter()
        .map(|&tag| match tag {
            FieldName::I => Ok(tagged(tag, spectrum.ground().clone())),
            FieldName::Alpha | FieldName::Mu => singlet_pair(pair_sector, (tag, tag)).map(|(a, _)| tagged(tag, a)),
            FieldName::Beta | FieldName::Nu => singlet_pair(pair_sector, (tag, tag)).map(|(_, b)| tagged(tag, b)),
            FieldName::Phi11 | FieldName::Phi12 => {
                let s = if tag == FieldName::Phi11 { 1 } else { 2 };
                spectrum
                    .sector(spectrum.shifted_momentum(s))
                    .first()
                    .cloned()
                    .map(|d| tagged(tag, d))
                    .ok_or_else(|| Error::Unresolved { tag: tag.to_string(), reason: "empty sector".into() })
            }
            FieldName::T | FieldName::Tprime => Err(Error::Unresolved {
                tag: tag.to_string(),
                reason: "T and T' are resolved in the glued module by identify_tt".into(),
            }),
        })
        .collect()
}

/// Resolves `I`, `T`, `T'` in a glued module. `descent` is the operator
/// that creates `T` from `I` (`H_{-2}`).
///
/// `I` is the lowest eigenvector inside the zero-through-line submodule,
/// `T` the zero-through-line state of momentum `p_I - 2` best reached by
/// `descent`, and `T'` the state of that sector closest in energy to `T`
/// among those with components on the four-through-line sector.
pub fn identify_tt(spectrum: &ModuleSpectrum, descent: &SparseOp) -> Result<[TaggedState; 3]> {
    let pure = |d: &SpectralDatum| spectrum.higher_sector_weight(&d.eigenvector) < PURE_TOL;
    let ground = spectrum
        .sectors
        .values()
        .flat_map(|v| v.iter().filter(|d| pure(d)).take(1))
        .min_by(|a, b| a.eigenvalue.re.total_cmp(&b.eigenvalue.re))
        .cloned()
        .ok_or_else(|| Error::Unresolved { tag: "I".into(), reason: "no zero-through-line eigenvector".into() })?;
    let image = descent.apply(&ground.eigenvector);
    let p_i = ground.momentum.unwrap_or(spectrum.ground_momentum);
    let p = (p_i + spectrum.n - 2) % spectrum.n;
    let sector = spectrum.sector(p);
    let t = (0..sector.len())
        .filter(|&i| pure(&sector[i]))
        .max_by(|&a, &b| dot(&sector[a].eigenvector, &image).norm().total_cmp(&dot(&sector[b].eigenvector, &image).norm()))
        .ok_or_else(|| Error::Unresolved { tag: "T".into(), reason: format!("no zero-through-line eigenvector at momentum {p}") })?;
    let lam = sector[t].eigenvalue;
    let tp = (0..sector.len())
        .filter(|&i| spectrum.sector_weight(&sector[i].eigenvector, 2) > PURE_TOL)
        .min_by(|&a, &b| (sector[a].eigenvalue - lam).norm().total_cmp(&(sector[b].eigenvalue - lam).norm()))
        .ok_or_else(|| Error::Unresolved { tag: "Tprime".into(), reason: "no partner with four-through-line components".into() })?;
    Ok([tagged(FieldName::I, ground), tagged(FieldName::T, sector[t].clone()), tagged(FieldName::Tprime, sector[tp].clone())])
}

/// Euclidean weight on `j > 0` below which a vector counts as lying in the
/// zero-through-line part.
pub const PURE_TOL: f64 = 1e-7;

/// Carries tags to the eigenvectors of `current` with maximal overlap.
pub fn track_states(previous: &[TaggedState], current: &[SpectralDatum]) -> Vec<Result<TaggedState>> {
    previous
        .iter()
        .map(|t| {
            let best = current
                .iter()
                .map(|d| (dot(&t.datum.eigenvector, &d.eigenvector).norm() / (norm(&t.datum.eigenvector) * norm(&d.eigenvector)), d))
                .max_by(|a, b| a.0.total_cmp(&b.0).then(b.1.eigenvalue.re.total_cmp(&a.1.eigenvalue.re)));
            match best {
                Some((ov, d)) if ov >= 0.5 => Ok(tagged(t.tag, d.clone())),
                Some((ov, _)) => Err(Error::Unresolved { tag: t.tag.to_string(), reason: format!("best overlap {ov:.3} below 0.5") }),
                None => Err(Error::Unresolved { tag: t.tag.to_string(), reason: "empty spectrum".into() }),
            }
        })
        .collect()
}
