//! Hamiltonian, translation and lattice Virasoro (Koo-Saleur) generators.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::algebra::{all_generators, assemble, Generator, LatticeParams, OperatorMatrix};
use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::linalg::{SparseOp, C64, ONE};

/// Integrand on `t > 0`, rewritten with exponentials of negative arguments.
fn e_infinity_integrand(gamma: f64, t: f64) -> f64 {
    if t == 0.0 {
        return (PI - gamma) / PI;
    }
    let g = (-2.0 * gamma * t).exp();
    2.0 * g * (-(-2.0 * (PI - gamma) * t).exp_m1()) / ((-(-2.0 * PI * t).exp_m1()) * (1.0 + g))
}

/// Ground-state average of `e_j` in the thermodynamic limit,
/// `sin(gamma) * integral over the real line of sinh((pi-gamma)t)/(sinh(pi t) cosh(gamma t))`.
pub fn e_infinity(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < PI) {
        return Err(Error::invalid(format!("gamma must lie in (0, pi), got {gamma}")));
    }
    // integrand ~ 2 exp(-2 gamma t): cut where the tail is below 1e-16
    let cut = ((1.0 / (gamma * 1e-16)).ln() / (2.0 * gamma)).max(1.0);
    let f = |t: f64| e_infinity_integrand(gamma, t);
    // unit panels keep the double-exponential rule near machine precision
    let mut total = 0.0;
    let mut err = 0.0;
    let mut a = 0.0;
    while a < cut {
        let b = (a + 1.0).min(cut);
        let out = quadrature::double_exponential::integrate(f, a, b, 1e-16);
        total += out.integral;
        err += out.error_estimate;
        a = b;
    }
    if !(err < 1e-12) {
        return Err(Error::NumericalFailure(format!("e_infinity quadrature error estimate {err:e}")));
    }
    Ok(2.0 * gamma.sin() * total)
}

pub fn fermi_velocity(gamma: f64) -> f64 {
    if gamma == 0.0 {
        return PI;
    }
    PI * gamma.sin() / gamma
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chirality {
    Left,
    Right,
}

impl Chirality {
    fn sign(self) -> f64 {
        match self {
            Chirality::Left => 1.0,
            Chirality::Right => -1.0,
        }
    }
}

/// Generators of one module assembled once and combined on demand.
#[derive(Clone, Debug)]
pub struct LatticeOperators {
    pub basis: Basis,
    pub params: LatticeParams,
    e: Vec<SparseOp>,
}

impl LatticeOperators {
    pub fn new(basis: Basis, params: LatticeParams) -> Result<Self> {
        if basis.n_sites() != params.n {
            return Err(Error::invalid(format!("basis has N={} but parameters have N={}", basis.n_sites(), params.n)));
        }
        let e = all_generators(&basis, &params)?;
        Ok(LatticeOperators { basis, params, e })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `e_j`, 1-based.
    pub fn e(&self, j: usize) -> &SparseOp {
        &self.e[j - 1]
    }

    fn identity(&self) -> SparseOp {
        SparseOp::identity(self.dim())
    }

    fn require_conformal(&self) -> Result<()> {
        if !self.params.has_conformal_data() {
            return Err(Error::invalid("Koo-Saleur operators need parameters built from x or c"));
        }
        Ok(())
    }

    /// `H = sum_j (e_infty - e_j)`.
    pub fn hamiltonian_unscaled(&self) -> OperatorMatrix {
        let n = self.params.n;
        let mut h = self.identity().scaled(C64::from(n as f64 * self.params.e_infty));
        for e in &self.e {
            h = h.add_scaled(e, -ONE);
        }
        OperatorMatrix { label: "H".into(), op: h }
    }

    /// Fourier sum `sum_j w^(j) (e_j - e_infty)` with `w = exp(i s n pi / L)`, `j` 1-based.
    fn fourier(&self, n: i64, s: f64, commutator: Option<f64>) -> SparseOp {
        let nn = self.params.n;
        let l = self.params.half_length() as f64;
        let mut acc = SparseOp::zeros(self.dim());
        let mut phase_sum = C64::new(0.0, 0.0);
        for jj in 0..nn {
            let w = C64::from_polar(1.0, s * n as f64 * PI * (jj + 1) as f64 / l);
            phase_sum += w;
            acc = acc.add_scaled(&self.e[jj], w);
            if let Some(cs) = commutator {
                let (a, b) = (&self.e[jj], &self.e[(jj + 1) % nn]);
                let comm = a.compose(b).add_scaled(&b.compose(a), -ONE);
                acc = acc.add_scaled(&comm, w * C64::new(0.0, cs / self.params.v_f));
            }
        }
        acc.add_scaled(&self.identity(), -phase_sum * self.params.e_infty)
    }

    /// Single-chirality generator `L_n` (left) or `Lbar_n` (right).
    pub fn koo_saleur(&self, n: i64, chirality: Chirality) -> Result<OperatorMatrix> {
        self.require_conformal()?;
        let p = &self.params;
        let l = p.half_length() as f64;
        let s = chirality.sign();
        let mut op = self.fourier(n, s, Some(s)).scaled(C64::from(-l / (2.0 * PI * p.v_f)));
        if n == 0 {
            op = op.add_scaled(&self.identity(), C64::from(p.c / 24.0));
        }
        let label = match chirality {
            Chirality::Left => format!("L_{n}"),
            Chirality::Right => format!("Lbar_{n}"),
        };
        Ok(OperatorMatrix { label, op })
    }

    /// `H_n = L_n + Lbar_{-n}`; the commutator parts cancel identically.
    pub fn h_n(&self, n: i64) -> Result<OperatorMatrix> {
        self.require_conformal()?;
        let p = &self.params;
        let l = p.half_length() as f64;
        let mut op = self.fourier(n, 1.0, None).scaled(C64::from(-l / (PI * p.v_f)));
        if n == 0 {
            op = op.add_scaled(&self.identity(), C64::from(p.c / 12.0));
        }
        Ok(OperatorMatrix { label: format!("H_{n}"), op })
    }

    pub fn tau(&self, power: i64) -> Result<OperatorMatrix> {
        assemble(Generator::Tau(power), &self.basis, &self.params)
    }

    /// Translation by one site; an eigenvalue `exp(-2 pi i p / N)` carries momentum `p`.
    pub fn momentum_operator(&self) -> Result<OperatorMatrix> {
        self.tau(1)
    }
}

pub fn hamiltonian_unscaled(basis: &Basis, params: &LatticeParams) -> Result<OperatorMatrix> {
    Ok(LatticeOperators::new(basis.clone(), *params)?.hamiltonian_unscaled())
}

pub fn koo_saleur(n: i64, chirality: Chirality, basis: &Basis, params: &LatticeParams) -> Result<OperatorMatrix> {
    LatticeOperators::new(basis.clone(), *params)?.koo_saleur(n, chirality)
}

pub fn h_n(n: i64, basis: &Basis, params: &LatticeParams) -> Result<OperatorMatrix> {
    LatticeOperators::new(basis.clone(), *params)?.h_n(n)
}

pub fn momentum_operator(basis: &Basis, params: &LatticeParams) -> Result<OperatorMatrix> {
    assemble(Generator::Tau(1), basis, params)
}

/// Reduces a momentum label to the window `(-N/2, N/2]`.
pub fn conformal_momentum(p: i64, n: usize) -> i64 {
    let n = n as i64;
    let r = p.rem_euclid(n);
    if r > n / 2 {
        r - n
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis, Convention, ModuleKind, ModuleSpec};

    /// Composite 8-point Gauss-Legendre on uniform panels of the raw integrand.
    fn oracle(gamma: f64) -> f64 {
        let nodes = [
            (0.1834346424956498, 0.3626837833783620),
            (0.5255324099163290, 0.3137066458778873),
            (0.7966664774136267, 0.2223810344533745),
            (0.9602898564975363, 0.1012285362903763),
        ];
        let f = |t: f64| {
            if t == 0.0 {
                (PI - gamma) / PI
            } else {
                ((PI - gamma) * t).sinh() / ((PI * t).sinh() * (gamma * t).cosh())
            }
        };
        // sinh overflows past t ~ 225
        let (upper, panels) = ((35.0 / gamma).min(200.0), 6000);
        let h = upper / panels as f64;
        let mut s = 0.0;
        for k in 0..panels {
            let mid = (k as f64 + 0.5) * h;
            for &(x, w) in &nodes {
                s += w * (f(mid + x * h / 2.0) + f(mid - x * h / 2.0)) * h / 2.0;
            }
        }
        2.0 * gamma.sin() * s
    }

    #[test]
    fn e_infinity_against_oracle() {
        for gamma in [PI / 2.0, PI / 3.0, 0.2, 1.0, 2.5, 3.0] {
            let a = e_infinity(gamma).unwrap();
            let b = oracle(gamma);
            assert!((a - b).abs() < 1e-10, "gamma={gamma}: {a} vs {b}");
        }
    }

    #[test]
    fn e_infinity_known_points() {
        assert!((e_infinity(PI / 2.0).unwrap() - 2.0 / PI).abs() < 1e-12);
        assert!((e_infinity(PI / 3.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(e_infinity(0.0).is_err());
        assert!(e_infinity(PI).is_err());
    }

    #[test]
    fn fermi_velocity_values() {
        assert!((fermi_velocity(PI / 3.0) - 3.0 * 3f64.sqrt() / 2.0).abs() < 1e-14);
        assert!((fermi_velocity(PI / 2.0) - 2.0).abs() < 1e-14);
        assert!((fermi_velocity(1e-9) - PI).abs() < 1e-12);
    }

    #[test]
    fn zero_mode_relation() {
        for n in [4, 6] {
            let spec = ModuleSpec::new(ModuleKind::GluedQuotient { jmax: 2 }, Convention::Negated);
            let p = LatticeParams::from_x(n, 1.6, Convention::Negated).unwrap();
            let ops = LatticeOperators::new(build_basis(spec, n).unwrap(), p).unwrap();
            let l0 = ops.koo_saleur(0, Chirality::Left).unwrap().op;
            let lb0 = ops.koo_saleur(0, Chirality::Right).unwrap().op;
            let l = (n / 2) as f64;
            let want = ops
                .hamiltonian_unscaled()
                .op
                .scaled(C64::from(l / (PI * p.v_f)))
                .add_scaled(&SparseOp::identity(ops.dim()), C64::from(p.c / 12.0));
            assert!(l0.add_scaled(&lb0, ONE).max_diff(&want) < 1e-12);
            assert!(ops.h_n(0).unwrap().op.max_diff(&want) < 1e-12);
            for k in [-2i64, -1, 1, 2] {
                let sum = ops.koo_saleur(k, Chirality::Left).unwrap().op.add_scaled(&ops.koo_saleur(-k, Chirality::Right).unwrap().op, ONE);
                assert!(sum.max_diff(&ops.h_n(k).unwrap().op) < 1e-12);
            }
        }
    }

    #[test]
    fn e_infinity_drops_out_for_nonzero_n() {
        let spec = ModuleSpec::standard(1, 0.0, Convention::Plain);
        let p = LatticeParams::from_x(6, 1.6, Convention::Plain).unwrap();
        let mut q = p;
        q.e_infty = 0.0;
        let b = build_basis(spec, 6).unwrap();
        let a = LatticeOperators::new(b.clone(), p).unwrap();
        let z = LatticeOperators::new(b, q).unwrap();
        for k in [-3i64, -2, -1, 1, 2, 3] {
            for ch in [Chirality::Left, Chirality::Right] {
                let d = a.koo_saleur(k, ch).unwrap().op.max_diff(&z.koo_saleur(k, ch).unwrap().op);
                assert!(d < 1e-12, "n={k}: {d}");
            }
        }
    }

    #[test]
    fn hamiltonian_commutes_with_translation() {
        for kind in [ModuleKind::Standard { j: 1, phi: 0.4 }, ModuleKind::QuotientZero, ModuleKind::Glued { jmax: 2 }] {
            let spec = ModuleSpec::new(kind, Convention::Plain);
            let p = LatticeParams::from_x(6, 2.3, Convention::Plain).unwrap();
            let ops = LatticeOperators::new(build_basis(spec, 6).unwrap(), p).unwrap();
            let h = ops.h_n(0).unwrap().op;
            let t = ops.momentum_operator().unwrap().op;
            assert!(h.compose(&t).max_diff(&t.compose(&h)) < 1e-11);
        }
    }

    #[test]
    fn custom_params_rejected_for_virasoro() {
        let spec = ModuleSpec::standard(1, 0.0, Convention::Plain);
        let p = LatticeParams::custom(4, 1.0, 1.0, Convention::Plain).unwrap();
        let ops = LatticeOperators::new(build_basis(spec, 4).unwrap(), p).unwrap();
        assert!(ops.h_n(-1).is_err());
    }

    #[test]
    fn momentum_window() {
        assert_eq!(conformal_momentum(7, 8), -1);
        assert_eq!(conformal_momentum(4, 8), 4);
        assert_eq!(conformal_momentum(-4, 8), 4);
        assert_eq!(conformal_momentum(1, 8), 1);
    }
}
