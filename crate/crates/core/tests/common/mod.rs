//! Independent gluing oracle shared by the integration tests.
//!
//! Glues two link patterns with a union-find over sites, classifies each
//! connected component, and reads its winding off the arcs that cross the
//! periodic seam.

use loopjordan::basis::{LinkState, ModuleKind, ModuleSpec};
use loopjordan::linalg::C64;

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, i: usize) -> usize {
        let p = self.0[i];
        if p == i {
            return i;
        }
        let r = self.find(p);
        self.0[i] = r;
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
    }
}

/// Arc data for one layer: partner and signed seam crossing when leaving each site.
fn layer(s: &LinkState) -> (Vec<Option<usize>>, Vec<i64>) {
    let n = s.n_sites();
    let mut partner = vec![None; n];
    let mut seam = vec![0i64; n];
    for (a, b) in s.arcs() {
        partner[a] = Some(b);
        partner[b] = Some(a);
        if b < a {
            seam[a] = 1;
            seam[b] = -1;
        }
    }
    (partner, seam)
}

pub fn oracle(u: &LinkState, v: &LinkState, spec: &ModuleSpec, m: f64) -> C64 {
    let n = u.n_sites();
    let (pu, su) = layer(u);
    let (pv, sv) = layer(v);
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        if let Some(k) = pu[i] {
            uf.union(i, k);
        }
        if let Some(k) = pv[i] {
            uf.union(i, k);
        }
    }
    let standard = matches!(spec.kind, ModuleKind::Standard { .. });
    let phi = spec.phi();
    let noncontractible = match spec.kind {
        ModuleKind::Standard { j: 0, phi } => 2.0 * (phi / 2.0).cos(),
        _ => m,
    };
    let mut roots: Vec<usize> = (0..n).map(|i| uf.find(i)).collect();
    roots.sort_unstable();
    roots.dedup();
    let mut value = C64::new(1.0, 0.0);
    for r in roots {
        let sites: Vec<usize> = (0..n).filter(|&i| uf.find(i) == r).collect();
        let ends_u: Vec<usize> = sites.iter().copied().filter(|&i| pu[i].is_none()).collect();
        let ends_v: Vec<usize> = sites.iter().copied().filter(|&i| pv[i].is_none()).collect();
        match (ends_v.len(), ends_u.len()) {
            (0, 0) => {
                // closed loop: walk it once, alternating layers
                let start = sites[0];
                let (mut i, mut w, mut on_u) = (start, 0i64, true);
                loop {
                    let (p, s) = if on_u { (&pu, &su) } else { (&pv, &sv) };
                    w += s[i];
                    i = p[i].unwrap();
                    on_u = !on_u;
                    if i == start && on_u {
                        break;
                    }
                }
                value *= if w == 0 { m } else { noncontractible };
            }
            (1, 1) => {
                if standard {
                    let (start, end) = (ends_v[0], ends_u[0]);
                    let (mut i, mut w, mut on_u) = (start, 0i64, true);
                    while i != end || !on_u {
                        let (p, s) = if on_u { (&pu, &su) } else { (&pv, &sv) };
                        w += s[i];
                        i = p[i].unwrap();
                        on_u = !on_u;
                    }
                    let disp = end as i64 - start as i64 + n as i64 * w;
                    value *= C64::from_polar(1.0, phi * disp as f64 / (2 * n) as f64);
                }
            }
            _ => {
                if standard {
                    return C64::new(0.0, 0.0);
                }
            }
        }
    }
    value
}
