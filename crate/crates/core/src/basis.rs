//! Link states on the annulus and ordered module bases.
//!
//! A link state on `N` sites is stored as an `N`-bit word: bit `i` is set when
//! site `i` (0-based) opens an arc or carries a through-line, and clear when it
//! closes an arc. The pairing is recovered by cyclic parenthesis matching, which
//! makes the encoding a bijection between words with `N/2 + j` set bits and
//! planar annular link states with `2j` through-lines.

use std::collections::HashMap;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest lattice size supported by the bit encoding.
pub const MAX_SITES: usize = 32;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkState {
    n: u8,
    bits: u64,
}

impl LinkState {
    /// Builds a state from its raw bit word. Every word is a valid state.
    pub fn from_bits(n: usize, bits: u64) -> Result<Self> {
        check_n(n)?;
        if n < 64 && bits >> n != 0 {
            return Err(Error::invalid(format!("bit word {bits:#x} too wide for N={n}")));
        }
        Ok(LinkState { n: n as u8, bits })
    }

    pub(crate) fn raw(n: usize, bits: u64) -> Self {
        LinkState { n: n as u8, bits }
    }

    /// Builds a state from 1-based directed arcs `(i, j)`; every site not used by
    /// an arc carries a through-line. Fails on crossings, repeated sites, or
    /// arcs that would enclose a through-line.
    pub fn from_arcs(n: usize, arcs: &[(usize, usize)]) -> Result<Self> {
        check_n(n)?;
        let mut used = vec![false; n];
        let mut bits = (1u64 << n) - 1;
        for &(i, j) in arcs {
            if i == 0 || j == 0 || i > n || j > n || i == j {
                return Err(Error::invalid(format!("arc ({i},{j}) out of range for N={n}")));
            }
            for s in [i, j] {
                if used[s - 1] {
                    return Err(Error::invalid(format!("site {s} used twice")));
                }
                used[s - 1] = true;
            }
            bits &= !(1u64 << (j - 1));
        }
        let s = LinkState { n: n as u8, bits };
        let p = s.partners();
        for &(i, j) in arcs {
            if p[i - 1] != Some(j - 1) {
                return Err(Error::invalid(format!("arcs are not a planar annular pairing at ({i},{j})")));
            }
        }
        Ok(s)
    }

    /// Parses the pairing notation `(12)(3)(4)`; sites may be comma separated,
    /// as in `(1,12)(2)(3)`, which is required once N > 9.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let mut arcs = Vec::new();
        let mut singles = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let open = rest
                .strip_prefix('(')
                .ok_or_else(|| Error::invalid(format!("expected '(' in {text:?}")))?;
            let close = open
                .find(')')
                .ok_or_else(|| Error::invalid(format!("unclosed group in {text:?}")))?;
            let body = &open[..close];
            let sites: Vec<usize> = if body.contains(',') || n > 9 {
                body.split(',')
                    .map(|t| t.trim().parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| Error::invalid(format!("bad site in {body:?}: {e}")))?
            } else {
                body.chars()
                    .map(|ch| ch.to_digit(10).map(|d| d as usize))
                    .collect::<Option<_>>()
                    .ok_or_else(|| Error::invalid(format!("bad site in {body:?}")))?
            };
            match sites.as_slice() {
                [a] => singles.push(*a),
                [a, b] => arcs.push((*a, *b)),
                _ => return Err(Error::invalid(format!("group {body:?} must hold one or two sites"))),
            }
            rest = open[close + 1..].trim_start();
        }
        let s = Self::from_arcs(n, &arcs)?;
        let through: Vec<usize> = s.through_sites().iter().map(|i| i + 1).collect();
        let mut given = singles.clone();
        given.sort_unstable();
        if given != through {
            return Err(Error::invalid(format!("singletons {singles:?} disagree with unpaired sites {through:?}")));
        }
        Ok(s)
    }

    pub fn n_sites(&self) -> usize {
        self.n as usize
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub(crate) fn is_up(&self, i: usize) -> bool {
        self.bits >> i & 1 == 1
    }

    /// Partner of every site (0-based), `None` for through-lines.
    pub fn partners(&self) -> Vec<Option<usize>> {
        let n = self.n_sites();
        let mut partner = vec![None; n];
        let mut stack = Vec::with_capacity(n);
        let mut pending = Vec::new();
        for i in 0..n {
            if self.is_up(i) {
                stack.push(i);
            } else if let Some(o) = stack.pop() {
                partner[o] = Some(i);
                partner[i] = Some(o);
            } else {
                pending.push(i);
            }
        }
        for c in pending {
            if let Some(o) = stack.pop() {
                partner[o] = Some(c);
                partner[c] = Some(o);
            }
        }
        partner
    }

    /// Directed arcs `(opener, closer)`, 0-based, sorted by opener.
    pub fn arcs(&self) -> Vec<(usize, usize)> {
        let p = self.partners();
        (0..self.n_sites())
            .filter_map(|i| p[i].filter(|_| self.is_up(i)).map(|k| (i, k)))
            .collect()
    }

    pub fn through_sites(&self) -> Vec<usize> {
        let p = self.partners();
        (0..self.n_sites()).filter(|&i| p[i].is_none()).collect()
    }

    pub fn n_through(&self) -> usize {
        2 * self.bits.count_ones() as usize - self.n_sites()
    }

    /// Half the number of through-lines.
    pub fn sector(&self) -> usize {
        self.n_through() / 2
    }

    pub fn crosses_boundary(&self) -> bool {
        self.arcs().iter().any(|&(i, k)| i > k)
    }

    /// Redraws a zero-through-line state with the same matching but no arc
    /// crossing the periodic boundary.
    pub fn psi_rewire(&self) -> Result<Self> {
        if self.n_through() != 0 {
            return Err(Error::invalid("psi_rewire acts only on states without through-lines"));
        }
        Ok(self.rewired())
    }

    pub(crate) fn rewired(&self) -> Self {
        let p = self.partners();
        let mut bits = 0u64;
        for (i, q) in p.iter().enumerate() {
            if let Some(k) = q {
                if i < *k {
                    bits |= 1 << i;
                }
            }
        }
        LinkState { n: self.n, bits }
    }

    /// Cyclic shift `s'[i] = s[i - 1]`.
    pub(crate) fn shifted(&self, power: i64) -> Self {
        let n = self.n_sites();
        let r = power.rem_euclid(n as i64) as u32;
        let mask = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let bits = if r == 0 {
            self.bits
        } else {
            ((self.bits << r) | (self.bits >> (n as u32 - r))) & mask
        };
        LinkState { n: self.n, bits }
    }
}

/// Prints the same syntax that `ModuleSpec::parse_kind` reads.
impl fmt::Display for ModuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModuleKind::Standard { j, phi } if *phi == 0.0 => write!(f, "standard:{j}"),
            ModuleKind::Standard { j, phi } => write!(f, "standard:{j}:{phi}"),
            ModuleKind::QuotientZero => write!(f, "quotient-zero"),
            ModuleKind::Glued { jmax } => write!(f, "glued:{jmax}"),
            ModuleKind::GluedQuotient { jmax } => write!(f, "glued-quotient:{jmax}"),
        }
    }
}

impl fmt::Display for LinkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wide = self.n_sites() > 9;
        for (i, k) in self.arcs() {
            if wide {
                write!(f, "({},{})", i + 1, k + 1)?;
            } else {
                write!(f, "({}{})", i + 1, k + 1)?;
            }
        }
        for i in self.through_sites() {
            write!(f, "({})", i + 1)?;
        }
        Ok(())
    }
}

impl fmt::Debug for LinkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinkState[{}]", self)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n % 2 == 1 || n > MAX_SITES {
        return Err(Error::invalid(format!("N must be even and in 2..={MAX_SITES}, got {n}")));
    }
    Ok(())
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// All link states with `2j` through-lines, lexicographic in the positions of
/// the set bits.
pub fn enumerate_sector(n: usize, j: usize) -> Result<Vec<LinkState>> {
    check_n(n)?;
    if j > n / 2 {
        return Err(Error::invalid(format!("j={j} exceeds N/2={}", n / 2)));
    }
    Ok((0..n)
        .combinations(n / 2 + j)
        .map(|ups| LinkState::raw(n, ups.iter().fold(0u64, |b, &i| b | 1 << i)))
        .collect())
}

pub fn dim_standard(n: usize, j: usize) -> Result<usize> {
    check_n(n)?;
    if j > n / 2 {
        return Err(Error::invalid(format!("j={j} exceeds N/2={}", n / 2)));
    }
    Ok(binomial(n, n / 2 + j))
}

pub fn dim_quotient_zero(n: usize) -> Result<usize> {
    check_n(n)?;
    Ok(binomial(n, n / 2) - binomial(n, n / 2 + 1))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ModuleKind {
    /// Standard module with `2j` through-lines and pseudomomentum `phi`.
    Standard { j: usize, phi: f64 },
    /// Zero-through-line quotient: non-crossing representatives only.
    QuotientZero,
    /// All sectors `0..=jmax`, through-line contraction allowed.
    Glued { jmax: usize },
    /// As `Glued` with the zero sector replaced by the quotient.
    GluedQuotient { jmax: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Convention {
    Plain,
    /// `e_j -> -e_j`, `m -> -m`.
    Negated,
}

impl Convention {
    pub fn sign(self) -> f64 {
        match self {
            Convention::Plain => 1.0,
            Convention::Negated => -1.0,
        }
    }
}

impl std::str::FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" | "Plain" => Ok(Convention::Plain),
            "negated" | "Negated" | "neg" => Ok(Convention::Negated),
            _ => Err(Error::invalid(format!("unknown convention {s:?} (plain or negated)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuleSpec {
    pub kind: ModuleKind,
    pub convention: Convention,
    pub y: f64,
}

impl ModuleSpec {
    pub fn new(kind: ModuleKind, convention: Convention) -> Self {
        ModuleSpec { kind, convention, y: 1.0 }
    }

    pub fn standard(j: usize, phi: f64, convention: Convention) -> Self {
        Self::new(ModuleKind::Standard { j, phi }, convention)
    }

    pub fn with_y(mut self, y: f64) -> Self {
        self.y = y;
        self
    }

    /// Pseudomomentum in effect; glued and quotient modules always use zero.
    pub fn phi(&self) -> f64 {
        match self.kind {
            ModuleKind::Standard { phi, .. } => phi,
            _ => 0.0,
        }
    }

    pub fn is_standard(&self) -> bool {
        matches!(self.kind, ModuleKind::Standard { .. })
    }

    /// Whether zero-through-line states are identified through `psi_rewire`.
    pub(crate) fn rewires(&self, s: &LinkState) -> bool {
        match self.kind {
            ModuleKind::QuotientZero => true,
            ModuleKind::GluedQuotient { .. } => s.n_through() == 0,
            _ => false,
        }
    }

    /// Parses `standard:J[:PHI]`, `quotient-zero`, `glued:JMAX`, `glued-quotient:JMAX`.
    pub fn parse_kind(text: &str) -> Result<ModuleKind> {
        let parts: Vec<&str> = text.split(':').collect();
        let num = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::invalid(format!("bad integer {s:?} in module {text:?}")))
        };
        match parts.as_slice() {
            ["standard", j] => Ok(ModuleKind::Standard { j: num(j)?, phi: 0.0 }),
            ["standard", j, phi] => Ok(ModuleKind::Standard {
                j: num(j)?,
                phi: phi.parse().map_err(|_| Error::invalid(format!("bad phi {phi:?}")))?,
            }),
            ["quotient-zero"] => Ok(ModuleKind::QuotientZero),
            ["glued", j] => Ok(ModuleKind::Glued { jmax: num(j)? }),
            ["glued-quotient", j] => Ok(ModuleKind::GluedQuotient { jmax: num(j)? }),
            _ => Err(Error::invalid(format!("unknown module {text:?}"))),
        }
    }
}

/// An ordered basis of link states for one module.
#[derive(Clone, Debug)]
pub struct Basis {
    pub spec: ModuleSpec,
    n: usize,
    states: Vec<LinkState>,
    index: HashMap<LinkState, usize>,
    partners: Vec<Vec<Option<usize>>>,
}

impl Basis {
    fn from_states(spec: ModuleSpec, n: usize, states: Vec<LinkState>) -> Self {
        let index = states.iter().enumerate().map(|(k, s)| (*s, k)).collect();
        let partners = states.iter().map(|s| s.partners()).collect();
        Basis { spec, n, states, index, partners }
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[LinkState] {
        &self.states
    }

    pub fn state(&self, k: usize) -> LinkState {
        self.states[k]
    }

    pub fn index_of(&self, s: &LinkState) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub(crate) fn partners_of(&self, k: usize) -> &[Option<usize>] {
        &self.partners[k]
    }

    /// Sector label `j` of every basis vector.
    pub fn sectors(&self) -> Vec<usize> {
        self.states.iter().map(|s| s.sector()).collect()
    }

    /// Same states in a caller-supplied order; the set must match exactly.
    pub fn reordered(&self, order: &[LinkState]) -> Result<Basis> {
        if order.len() != self.len() || order.iter().any(|s| self.index_of(s).is_none()) {
            return Err(Error::invalid("reordering must be a permutation of the basis"));
        }
        let mut seen = std::collections::HashSet::new();
        if !order.iter().all(|s| seen.insert(*s)) {
            return Err(Error::invalid("reordering repeats a state"));
        }
        Ok(Basis::from_states(self.spec, self.n, order.to_vec()))
    }

    /// The explicit seven-state ordering used for the N=4 glued quotient
    /// module with `jmax = 2`.
    pub fn appendix_order(&self) -> Result<Basis> {
        if self.n != 4 || !matches!(self.spec.kind, ModuleKind::GluedQuotient { jmax: 2 }) {
            return Err(Error::invalid("appendix ordering exists only for N=4, glued-quotient:2"));
        }
        let order = ["(12)(34)", "(14)(23)", "(41)(2)(3)", "(12)(3)(4)", "(23)(1)(4)", "(34)(1)(2)", "(1)(2)(3)(4)"]
            .iter()
            .map(|t| LinkState::parse(4, t))
            .collect::<Result<Vec<_>>>()?;
        self.reordered(&order)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "N": self.n,
            "spec": self.spec,
            "states": self.states.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        })
    }
}

pub fn build_basis(spec: ModuleSpec, n: usize) -> Result<Basis> {
    check_n(n)?;
    let quotient = |n| -> Result<Vec<LinkState>> {
        Ok(enumerate_sector(n, 0)?.into_iter().filter(|s| !s.crosses_boundary()).collect())
    };
    let states = match spec.kind {
        ModuleKind::Standard { j, .. } => enumerate_sector(n, j)?,
        ModuleKind::QuotientZero => quotient(n)?,
        ModuleKind::Glued { jmax } | ModuleKind::GluedQuotient { jmax } => {
            if jmax > n / 2 {
                return Err(Error::invalid(format!("jmax={jmax} exceeds N/2={}", n / 2)));
            }
            let mut all = Vec::new();
            for j in (0..=jmax).rev() {
                if j == 0 && matches!(spec.kind, ModuleKind::GluedQuotient { .. }) {
                    all.extend(quotient(n)?);
                } else {
                    all.extend(enumerate_sector(n, j)?);
                }
            }
            all
        }
    };
    Ok(Basis::from_states(spec, n, states))
}
