//! Column-sparse complex operators and small dense helpers.

use faer::Mat;
use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Square operator stored by columns: `cols[k]` lists `(row, value)` of the
/// image of basis vector `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOp {
    dim: usize,
    cols: Vec<Vec<(usize, C64)>>,
}

impl SparseOp {
    pub fn zeros(dim: usize) -> Self {
        SparseOp { dim, cols: vec![Vec::new(); dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(dim, ONE)
    }

    pub fn diagonal(dim: usize, value: C64) -> Self {
        SparseOp { dim, cols: (0..dim).map(|k| vec![(k, value)]).collect() }
    }

    pub fn from_columns(dim: usize, cols: Vec<Vec<(usize, C64)>>) -> Self {
        assert_eq!(cols.len(), dim);
        let mut op = SparseOp { dim, cols };
        op.compress();
        op
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn column(&self, k: usize) -> &[(usize, C64)] {
        &self.cols[k]
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    /// Sorts rows inside each column, merges duplicates, drops exact zeros.
    fn compress(&mut self) {
        for col in &mut self.cols {
            col.sort_by_key(|e| e.0);
            let mut out: Vec<(usize, C64)> = Vec::with_capacity(col.len());
            for &(r, v) in col.iter() {
                match out.last_mut() {
                    Some(last) if last.0 == r => last.1 += v,
                    _ => out.push((r, v)),
                }
            }
            out.retain(|e| e.1 != ZERO);
            *col = out;
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.cols[col].iter().find(|e| e.0 == row).map_or(ZERO, |e| e.1)
    }

    pub fn scaled(&self, s: C64) -> Self {
        SparseOp {
            dim: self.dim,
            cols: self.cols.iter().map(|c| c.iter().map(|&(r, v)| (r, v * s)).collect()).collect(),
        }
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &SparseOp, s: C64) -> Self {
        assert_eq!(self.dim, other.dim);
        let cols = self
            .cols
            .iter()
            .zip(&other.cols)
            .map(|(a, b)| a.iter().copied().chain(b.iter().map(|&(r, v)| (r, v * s))).collect())
            .collect();
        Self::from_columns(self.dim, cols)
    }

    /// Operator product `self * other`.
    pub fn compose(&self, other: &SparseOp) -> Self {
        assert_eq!(self.dim, other.dim);
        let cols = other
            .cols
            .iter()
            .map(|col| {
                let mut out = Vec::new();
                for &(mid, v) in col {
                    out.extend(self.cols[mid].iter().map(|&(r, w)| (r, w * v)));
                }
                out
            })
            .collect();
        Self::from_columns(self.dim, cols)
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim);
        let mut y = vec![ZERO; self.dim];
        for (k, &xk) in x.iter().enumerate() {
            if xk == ZERO {
                continue;
            }
            for &(r, v) in &self.cols[k] {
                y[r] += v * xk;
            }
        }
        y
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut cols = vec![Vec::new(); self.dim];
        for (k, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                cols[r].push((k, v.conj()));
            }
        }
        Self::from_columns(self.dim, cols)
    }

    pub fn to_dense(&self) -> Mat<C64> {
        let mut m = Mat::<C64>::zeros(self.dim, self.dim);
        for (k, col) in self.cols.iter().enumerate() {
            for &(r, v) in col {
                m[(r, k)] += v;
            }
        }
        m
    }

    pub fn from_dense(m: &Mat<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols());
        let n = m.nrows();
        let cols = (0..n)
            .map(|k| (0..n).filter_map(|r| Some((r, m[(r, k)])).filter(|e| e.1 != ZERO)).collect())
            .collect();
        SparseOp { dim: n, cols }
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_diff(&self, other: &SparseOp) -> f64 {
        self.add_scaled(other, -ONE).max_abs()
    }

    pub fn max_abs(&self) -> f64 {
        self.cols.iter().flatten().map(|e| e.1.norm()).fold(0.0, f64::max)
    }
}

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalized(a: &[C64]) -> Vec<C64> {
    let n = norm(a);
    a.iter().map(|x| x / n).collect()
}

pub fn scale(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`.
pub fn axpy(a: &[C64], s: C64, b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn mat_vec(m: &Mat<C64>, x: &[C64]) -> Vec<C64> {
    let mut y = vec![ZERO; m.nrows()];
    for (k, &xk) in x.iter().enumerate() {
        if xk == ZERO {
            continue;
        }
        for (r, yr) in y.iter_mut().enumerate() {
            *yr += m[(r, k)] * xk;
        }
    }
    y
}

/// Eigenpairs of a dense complex matrix, sorted by real part of the
/// eigenvalue, eigenvectors Euclidean-normalized.
pub fn eig(m: &Mat<C64>) -> Result<Vec<(C64, Vec<C64>)>, String> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let e = m.eigen().map_err(|err| format!("eigendecomposition failed: {err:?}"))?;
    let s = e.S();
    let u = e.U();
    let mut out: Vec<(C64, Vec<C64>)> = (0..n)
        .map(|k| {
            let v: Vec<C64> = (0..n).map(|r| u[(r, k)]).collect();
            (s[k], normalized(&v))
        })
        .collect();
    out.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    Ok(out)
}

/// Frobenius norm.
pub fn fro_norm(m: &Mat<C64>) -> f64 {
    let mut s = 0.0;
    for k in 0..m.ncols() {
        for r in 0..m.nrows() {
            s += m[(r, k)].norm_sqr();
        }
    }
    s.sqrt()
}

/// Numerical rank of a set of vectors via modified Gram-Schmidt.
pub fn rank(vectors: &[Vec<C64>], tol: f64) -> usize {
    let mut q: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for qi in &q {
            let c = dot(qi, &w);
            w = axpy(&w, -c, qi);
        }
        let nw = norm(&w);
        if nw > tol * norm(v).max(f64::MIN_POSITIVE) {
            q.push(scale(&w, C64::from(1.0 / nw)));
        }
    }
    q.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn compose_matches_dense() {
        let a = SparseOp::from_columns(2, vec![vec![(0, c(1.0)), (1, c(2.0))], vec![(1, c(3.0))]]);
        let b = SparseOp::from_columns(2, vec![vec![(1, c(1.0))], vec![(0, c(4.0)), (0, c(1.0))]]);
        let ab = a.compose(&b);
        let dense = a.to_dense() * b.to_dense();
        for r in 0..2 {
            for k in 0..2 {
                assert_eq!(ab.entry(r, k), dense[(r, k)]);
            }
        }
        assert_eq!(b.entry(0, 1), c(5.0));
    }

    #[test]
    fn eig_identity() {
        let m = SparseOp::identity(3).to_dense();
        let e = eig(&m).unwrap();
        assert!(e.iter().all(|(l, _)| (l - ONE).norm() < 1e-14));
    }

    #[test]
    fn adjoint_roundtrip() {
        let a = SparseOp::from_columns(2, vec![vec![(0, C64::new(1.0, 2.0))], vec![(0, C64::new(0.0, 1.0))]]);
        assert_eq!(a.adjoint().entry(1, 0), C64::new(0.0, -1.0));
        assert_eq!(a.adjoint().adjoint(), a);
    }

    #[test]
    fn rank_detects_parallel() {
        let v = vec![c(1.0), c(1.0)];
        let w = vec![c(2.0), c(2.0 + 1e-14)];
        assert_eq!(rank(&[v.clone(), w], 1e-8), 1);
        assert_eq!(rank(&[v, vec![c(1.0), c(-1.0)]], 1e-8), 2);
    }
}
