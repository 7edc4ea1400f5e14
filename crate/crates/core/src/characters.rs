//! Kac weights, Virasoro characters and the torus partition-function series.

use std::f64::consts::PI;

use serde::Serialize;

use crate::basis::Convention;
use crate::error::{Error, Result};
use crate::linalg::C64;

pub fn kac_weight(r: f64, s: f64, x: f64) -> f64 {
    let a = r * (x + 1.0) - s * x;
    (a * a - 1.0) / (4.0 * x * (x + 1.0))
}

pub fn central_charge(x: f64) -> f64 {
    1.0 - 6.0 / (x * (x + 1.0))
}

/// Positive root `x` of `c = 1 - 6/(x(x+1))`.
pub fn param_from_c(c: f64) -> Result<f64> {
    if !(c < 1.0) || !c.is_finite() {
        return Err(Error::invalid(format!("central charge must be finite and below 1, got {c}")));
    }
    Ok((-1.0 + (1.0 + 24.0 / (1.0 - c)).sqrt()) / 2.0)
}

pub fn loop_weight(x: f64, convention: Convention) -> f64 {
    convention.sign() * 2.0 * (PI / (x + 1.0)).cos()
}

/// `Q = m^2`.
pub fn potts_q(x: f64) -> f64 {
    loop_weight(x, Convention::Plain).powi(2)
}

/// Partition numbers `p(0..=n)` by Euler's pentagonal recurrence.
pub fn partition_numbers(n: usize) -> Vec<u64> {
    let mut p = vec![0u64; n + 1];
    p[0] = 1;
    for k in 1..=n {
        let mut acc: i128 = 0;
        for i in 1.. {
            let sign = if i % 2 == 1 { 1 } else { -1 };
            let g1 = i * (3 * i - 1) / 2;
            if g1 > k {
                break;
            }
            acc += sign * p[k - g1] as i128;
            let g2 = i * (3 * i + 1) / 2;
            if g2 <= k {
                acc += sign * p[k - g2] as i128;
            }
        }
        p[k] = acc as u64;
    }
    p
}

/// Truncated double series `q^(-c/24) qbar^(-c/24) sum coef q^h qbar^hbar`,
/// complete for all exponents `h, hbar <= cutoff`.
#[derive(Clone, Debug, Serialize)]
pub struct QSeries {
    /// Common shift `-c/24` applied to both exponents.
    pub shift: f64,
    /// `(h, hbar, coefficient)`, sorted, exponents merged within `1e-9`.
    pub terms: Vec<(f64, f64, f64)>,
    pub cutoff: f64,
    pub warnings: Vec<String>,
}

const MERGE_TOL: f64 = 1e-9;

impl QSeries {
    fn new(shift: f64, mut raw: Vec<(f64, f64, f64)>, cutoff: f64) -> Self {
        raw.retain(|t| t.0 <= cutoff + MERGE_TOL && t.1 <= cutoff + MERGE_TOL);
        raw.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut terms: Vec<(f64, f64, f64)> = Vec::with_capacity(raw.len());
        for t in raw {
            match terms.iter_mut().rev().take_while(|u| t.0 - u.0 < MERGE_TOL).find(|u| (u.1 - t.1).abs() < MERGE_TOL) {
                Some(u) => u.2 += t.2,
                None => terms.push(t),
            }
        }
        QSeries { shift, terms, cutoff, warnings: Vec::new() }
    }

    pub fn coefficient(&self, h: f64, hbar: f64) -> f64 {
        self.terms
            .iter()
            .filter(|t| (t.0 - h).abs() < MERGE_TOL && (t.1 - hbar).abs() < MERGE_TOL)
            .map(|t| t.2)
            .sum()
    }

    /// Lowest `(h, hbar)` with a nonzero coefficient.
    pub fn leading(&self) -> Option<(f64, f64)> {
        self.terms.iter().filter(|t| t.2.abs() > 1e-12).map(|t| (t.0, t.1)).min_by(|a, b| (a.0 + a.1).total_cmp(&(b.0 + b.1)))
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.terms.iter_mut().for_each(|t| t.2 *= s);
        out
    }

    /// `self + s * other`, truncated at the smaller cutoff.
    pub fn add_scaled(&self, other: &QSeries, s: f64) -> Self {
        let raw = self.terms.iter().copied().chain(other.terms.iter().map(|t| (t.0, t.1, s * t.2))).collect();
        let mut out = QSeries::new(self.shift, raw, self.cutoff.min(other.cutoff));
        out.warnings = self.warnings.iter().chain(&other.warnings).cloned().collect();
        out
    }

    /// Holomorphic `self` times the antiholomorphic copy of `other`; both are
    /// taken to be chiral (all `hbar = 0`).
    pub fn times_antiholomorphic(&self, other: &QSeries) -> Self {
        let mut raw = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                raw.push((a.0, b.0, a.2 * b.2));
            }
        }
        QSeries::new(self.shift, raw, self.cutoff.min(other.cutoff))
    }

    /// Largest coefficient difference against `other` over shared exponents.
    pub fn max_difference(&self, other: &QSeries) -> f64 {
        let d = self.add_scaled(other, -1.0);
        d.terms.iter().map(|t| t.2.abs()).fold(0.0, f64::max)
    }
}

/// Chiral Kac character `q^(h_rs - c/24) (1 - q^(rs)) / P(q)`, complete to
/// `cutoff` levels above its leading exponent.
pub fn kac_character(r: usize, s: usize, x: f64, cutoff: usize) -> Result<QSeries> {
    if r == 0 || s == 0 {
        return Err(Error::invalid("Kac labels must be positive integers"));
    }
    let p = partition_numbers(cutoff);
    let h = kac_weight(r as f64, s as f64, x);
    let rs = r * s;
    let raw = (0..=cutoff)
        .map(|k| {
            let c = p[k] as f64 - if k >= rs { p[k - rs] as f64 } else { 0.0 };
            (h + k as f64, 0.0, c)
        })
        .collect();
    Ok(QSeries::new(-central_charge(x) / 24.0, raw, h + cutoff as f64))
}

/// `F_{j, e^{i phi}}`, complete for exponents up to `cutoff`.
pub fn f_sector(j: usize, phi: f64, x: f64, cutoff: f64, e_range: Option<i64>) -> QSeries {
    let e_phi = phi / (2.0 * PI);
    let j = j as f64;
    let range = e_range.unwrap_or(cutoff.ceil() as i64 + j as i64 + 2);
    let levels = cutoff.max(0.0).ceil() as usize + 1;
    let p = partition_numbers(levels);
    let mut raw = Vec::new();
    for e in -range..=range {
        let r = e as f64 - e_phi;
        let (h, hb) = (kac_weight(r, -j, x), kac_weight(r, j, x));
        for a in 0..=levels {
            if h + a as f64 > cutoff + MERGE_TOL {
                break;
            }
            for b in 0..=levels {
                if hb + b as f64 > cutoff + MERGE_TOL {
                    break;
                }
                raw.push((h + a as f64, hb + b as f64, (p[a] * p[b]) as f64));
            }
        }
    }
    let mut out = QSeries::new(-central_charge(x) / 24.0, raw, cutoff);
    for e in [-range - 1, range + 1] {
        let r = e as f64 - e_phi;
        if kac_weight(r, -j, x) <= cutoff && kac_weight(r, j, x) <= cutoff {
            out.warnings.push(format!("e_range {range} too small: e = {e} still contributes below the cutoff"));
        }
    }
    out
}

/// `sum_{n >= 1} K_{n,1} Kbar_{n,1}`.
pub fn f0_bar(x: f64, cutoff: f64) -> Result<QSeries> {
    let shift = -central_charge(x) / 24.0;
    let mut acc = QSeries::new(shift, Vec::new(), cutoff);
    for n in 1.. {
        let h = kac_weight(n as f64, 1.0, x);
        if h > cutoff + MERGE_TOL {
            break;
        }
        let levels = (cutoff - h).max(0.0).floor() as usize;
        let k = kac_character(n, 1, x, levels)?;
        let mut kk = k.times_antiholomorphic(&k);
        kk.cutoff = cutoff;
        acc = acc.add_scaled(&kk, 1.0);
    }
    acc.cutoff = cutoff;
    Ok(acc)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `w(j, d) = q^{2d} + q^{-2d} + (-1)^d (Q - 1)`, `q = e^{i gamma}`.
pub fn weight_w(_j: usize, d: usize, x: f64) -> f64 {
    let gamma = PI / (x + 1.0);
    let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
    2.0 * (2.0 * d as f64 * gamma).cos() + sign * (potts_q(x) - 1.0)
}

/// `D_{j,K}` with its (vanishing) imaginary part kept.
pub fn multiplicity_d_complex(j: usize, k: f64, x: f64) -> Result<C64> {
    if j == 0 {
        return Err(Error::invalid("D_{j,K} needs j >= 1"));
    }
    let sum: C64 = (0..j).map(|r| C64::from_polar(1.0, 2.0 * k * r as f64) * weight_w(j, gcd(j, r), x)).sum();
    Ok(sum / j as f64)
}

pub fn multiplicity_d(j: usize, k: f64, x: f64) -> Result<f64> {
    Ok(multiplicity_d_complex(j, k, x)?.re)
}

/// Whether `e^{i phi} = q^{2j+2k}` for some `k >= 1`; returns the smallest such `k`.
pub fn resonance(j: usize, phi: f64, x: f64, k_max: usize) -> Option<usize> {
    let gamma = PI / (x + 1.0);
    (1..=k_max).find(|&k| {
        let d = phi - 2.0 * (j + k) as f64 * gamma;
        (d - 2.0 * PI * (d / (2.0 * PI)).round()).abs() < 1e-10
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionTerm {
    pub label: String,
    pub coefficient: f64,
    pub series: QSeries,
}

/// Terms of the rewritten partition function, keeping sectors `j <= j_max`.
pub fn partition_terms(x: f64, cutoff: f64, j_max: usize) -> Result<Vec<PartitionTerm>> {
    let q = potts_q(x);
    let mut out = vec![
        PartitionTerm { label: "F0bar".into(), coefficient: 1.0, series: f0_bar(x, cutoff)? },
        PartitionTerm { label: "F_{0,-1}".into(), coefficient: (q - 1.0) / 2.0, series: f_sector(0, PI, x, cutoff, None) },
    ];
    for j in 1..=j_max {
        let mut d = multiplicity_d(j, 0.0, x)?;
        if j == 1 {
            d += 1.0;
        }
        out.push(PartitionTerm { label: format!("F_{{{j},1}}"), coefficient: d, series: f_sector(j, 0.0, x, cutoff, None) });
        for k in 2..=j {
            if j % k != 0 {
                continue;
            }
            for p in 1..k {
                if gcd(p, k) != 1 {
                    continue;
                }
                let kk = PI * p as f64 / k as f64;
                out.push(PartitionTerm {
                    label: format!("F_{{{j},e^(2 pi i {p}/{k})}}"),
                    coefficient: multiplicity_d(j, kk, x)?,
                    series: f_sector(j, 2.0 * PI * p as f64 / k as f64, x, cutoff, None),
                });
            }
        }
    }
    Ok(out)
}

/// Sum of all partition terms as one series.
pub fn partition_function(x: f64, cutoff: f64, j_max: usize) -> Result<QSeries> {
    let terms = partition_terms(x, cutoff, j_max)?;
    let mut acc = QSeries::new(-central_charge(x) / 24.0, Vec::new(), cutoff);
    for t in &terms {
        acc = acc.add_scaled(&t.series, t.coefficient);
    }
    Ok(acc)
}
