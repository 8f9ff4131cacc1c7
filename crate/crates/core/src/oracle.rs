//! Brute-force M-scheme realizations of small irreps and products.
//!
//! Everything here is explicit dense matrices over `|L M⟩` states, built from
//! reduced elements by the Wigner–Eckart convention and checked against the
//! su(3) commutation relations. It validates the conventions used by the
//! reduced-element pipeline and is not meant to scale.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::coupled::{self, Tolerances};
use crate::error::{Error, Result};
use crate::kbasis::{self, z_block, z_coefficient};
use crate::linalg::{max_abs, symmetric_eigen};
use crate::su3::{symmetric_rme_unchecked, IrrepLabel};
use crate::table::IrrepBlocks;
use crate::wigner::{clebsch_gordan, AngMom};

/// Largest symmetric irrep the oracle will build by default.
pub const MAX_SYMMETRIC_LAMBDA: u32 = 12;
/// Largest product dimension the oracle will build by default.
pub const MAX_PRODUCT_DIM: usize = 10_000;

/// `(j₁ m₁, j₂ m₂ | j m)`; injectable so tests can perturb the convention.
pub type CgFn = dyn Fn(AngMom, i32, AngMom, i32, AngMom, i32) -> f64 + Sync;

fn standard_cg(j1: AngMom, m1: i32, j2: AngMom, m2: i32, j: AngMom, m: i32) -> f64 {
    clebsch_gordan(j1, m1, j2, m2, j, m)
}

/// Dense spherical components `Q_ν` (`ν = -2..=2`) and `L_k` (`k = -1..=1`).
#[derive(Clone, Debug)]
pub struct MSchemeRep {
    /// `(L, M)` of each basis state; for products, of each factor pair.
    pub labels: Vec<Vec<(AngMom, i32)>>,
    pub q: [DMatrix<f64>; 5],
    pub l: [DMatrix<f64>; 3],
}

fn sgn(n: i32) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

impl MSchemeRep {
    pub fn dim(&self) -> usize {
        self.q[0].nrows()
    }

    pub fn q(&self, nu: i32) -> &DMatrix<f64> {
        &self.q[(nu + 2) as usize]
    }

    pub fn lk(&self, k: i32) -> &DMatrix<f64> {
        &self.l[(k + 1) as usize]
    }

    /// `Σ_ν (-1)^ν A_ν B_{-ν}` for rank-2 families.
    pub fn dot2(a: &[DMatrix<f64>; 5], b: &[DMatrix<f64>; 5]) -> DMatrix<f64> {
        (-2..=2).map(|nu: i32| &a[(nu + 2) as usize] * &b[(2 - nu) as usize] * sgn(nu)).sum()
    }

    pub fn l_dot_l(&self) -> DMatrix<f64> {
        (-1..=1).map(|k: i32| self.lk(k) * self.lk(-k) * sgn(k)).sum()
    }

    /// `C₂ = Q·Q + 3 L·L`.
    pub fn casimir(&self) -> DMatrix<f64> {
        Self::dot2(&self.q, &self.q) + self.l_dot_l() * 3.0
    }

    /// `[Q ⊗ Q]₂` components.
    pub fn qq2(&self, cg: &CgFn) -> [DMatrix<f64>; 5] {
        std::array::from_fn(|i| {
            let nu = i as i32 - 2;
            let mut acc = DMatrix::zeros(self.dim(), self.dim());
            for a in -2..=2 {
                let b = nu - a;
                if b.abs() > 2 {
                    continue;
                }
                let c = cg(2, a, 2, b, 2, nu);
                if c != 0.0 {
                    acc += self.q(a) * self.q(b) * c;
                }
            }
            acc
        })
    }

    /// `((L ⊗ T)₁ ⊗ L)₀` for a rank-2 family `T`.
    pub fn sandwich(&self, t: &[DMatrix<f64>; 5], cg: &CgFn) -> DMatrix<f64> {
        let n = self.dim();
        let mut out = DMatrix::zeros(n, n);
        for m in -1..=1i32 {
            let mut left = DMatrix::zeros(n, n);
            for k in -1..=1i32 {
                let nu = m - k;
                if nu.abs() > 2 {
                    continue;
                }
                let c = cg(1, k, 2, nu, 1, m);
                if c != 0.0 {
                    left += self.lk(k) * &t[(nu + 2) as usize] * c;
                }
            }
            out += left * self.lk(-m) * cg(1, m, 1, -m, 0, 0);
        }
        out
    }

    pub fn x3(&self, cg: &CgFn) -> DMatrix<f64> {
        self.sandwich(&self.q, cg)
    }

    pub fn x4(&self, cg: &CgFn) -> DMatrix<f64> {
        self.sandwich(&self.qq2(cg), cg)
    }
}

fn sym_states(lambda: u32) -> Vec<(AngMom, i32)> {
    let mut out = Vec::new();
    for l in (lambda % 2..=lambda).step_by(2) {
        for m in -(l as i32)..=l as i32 {
            out.push((l, m));
        }
    }
    out
}

/// Spherical `L_k` on a list of `|L M⟩` states.
fn angular_momentum(states: &[(AngMom, i32)]) -> [DMatrix<f64>; 3] {
    let n = states.len();
    let index: BTreeMap<(AngMom, i32), usize> = states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let mut lm = DMatrix::zeros(n, n);
    let mut l0 = DMatrix::zeros(n, n);
    let mut lp = DMatrix::zeros(n, n);
    for (c, &(l, m)) in states.iter().enumerate() {
        l0[(c, c)] = m as f64;
        let lf = l as f64;
        let mf = m as f64;
        if let Some(&r) = index.get(&(l, m + 1)) {
            lp[(r, c)] = -((lf - mf) * (lf + mf + 1.0)).sqrt() / 2f64.sqrt();
        }
        if let Some(&r) = index.get(&(l, m - 1)) {
            lm[(r, c)] = ((lf + mf) * (lf - mf + 1.0)).sqrt() / 2f64.sqrt();
        }
    }
    [lm, l0, lp]
}

/// `(λ,0)` with `Q_ν` un-reduced from the analytic reduced elements.
pub fn build_symmetric_mscheme(lambda: u32) -> Result<MSchemeRep> {
    build_symmetric_mscheme_with(lambda, MAX_SYMMETRIC_LAMBDA, &standard_cg)
}

pub fn build_symmetric_mscheme_with(lambda: u32, cap: u32, cg: &CgFn) -> Result<MSchemeRep> {
    if lambda > cap {
        return Err(Error::OracleTooLarge { what: "lambda", size: lambda as usize, cap: cap as usize });
    }
    let states = sym_states(lambda);
    let n = states.len();
    let q = std::array::from_fn(|i| {
        let nu = i as i32 - 2;
        DMatrix::from_fn(n, n, |r, c| {
            let (lf, mf) = states[r];
            let (li, mi) = states[c];
            if mf != mi + nu {
                return 0.0;
            }
            let red = symmetric_rme_unchecked(lambda, lf, li);
            if red == 0.0 {
                return 0.0;
            }
            cg(li, mi, 2, nu, lf, mf) * red / ((2 * lf + 1) as f64).sqrt()
        })
    });
    Ok(MSchemeRep { labels: states.iter().map(|s| vec![*s]).collect(), q, l: angular_momentum(&states) })
}

fn kron_sum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let ia = DMatrix::identity(a.nrows(), a.nrows());
    let ib = DMatrix::identity(b.nrows(), b.nrows());
    a.kronecker(&ib) + ia.kronecker(b)
}

/// `(λ₁,0) ⊗ (λ₂,0)` with generators `X⁽¹⁾ ⊗ 1 + 1 ⊗ X⁽²⁾`.
pub fn build_product_mscheme(lambda1: u32, lambda2: u32) -> Result<MSchemeRep> {
    build_product_mscheme_with(lambda1, lambda2, MAX_PRODUCT_DIM, &standard_cg)
}

pub fn build_product_mscheme_with(lambda1: u32, lambda2: u32, cap: usize, cg: &CgFn) -> Result<MSchemeRep> {
    let d = ((lambda1 + 1) * (lambda1 + 2) * (lambda2 + 1) * (lambda2 + 2) / 4) as usize;
    if d > cap {
        return Err(Error::OracleTooLarge { what: "product dimension", size: d, cap });
    }
    let a = build_symmetric_mscheme_with(lambda1, u32::MAX, cg)?;
    let b = build_symmetric_mscheme_with(lambda2, u32::MAX, cg)?;
    let mut labels = Vec::with_capacity(d);
    for la in &a.labels {
        for lb in &b.labels {
            labels.push(vec![la[0], lb[0]]);
        }
    }
    Ok(MSchemeRep {
        labels,
        q: std::array::from_fn(|i| kron_sum(&a.q[i], &b.q[i])),
        l: std::array::from_fn(|i| kron_sum(&a.l[i], &b.l[i])),
    })
}

/// Maximum residuals of the commutation relations and of `[C₂, ·]`.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct CommutatorResiduals {
    pub ll: f64,
    pub lq: f64,
    pub qq: f64,
    pub casimir: f64,
    pub hermiticity: f64,
}

impl CommutatorResiduals {
    pub fn max(&self) -> f64 {
        self.ll.max(self.lq).max(self.qq).max(self.casimir).max(self.hermiticity)
    }
}

fn comm(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

/// Residuals of the su(3) relations in the spherical basis, using the
/// standard (unperturbed) coefficients on the right-hand side.
pub fn commutator_residuals(rep: &MSchemeRep) -> CommutatorResiduals {
    let n = rep.dim();
    let zero = DMatrix::<f64>::zeros(n, n);
    let mut r = CommutatorResiduals::default();
    for k in -1..=1i32 {
        for kp in -1..=1i32 {
            let rhs = if (k + kp).abs() <= 1 {
                rep.lk(k + kp) * (-(2f64.sqrt()) * clebsch_gordan(1, k, 1, kp, 1, k + kp))
            } else {
                zero.clone()
            };
            r.ll = r.ll.max(max_abs(&(comm(rep.lk(k), rep.lk(kp)) - rhs)));
        }
        for nu in -2..=2i32 {
            let rhs = if (nu + k).abs() <= 2 {
                rep.q(nu + k) * (-(6f64.sqrt()) * clebsch_gordan(1, k, 2, nu, 2, nu + k))
            } else {
                zero.clone()
            };
            r.lq = r.lq.max(max_abs(&(comm(rep.lk(k), rep.q(nu)) - rhs)));
        }
    }
    r.qq = qq_commutator_residual(rep, QqOrder::Consistent);
    for nu in -2..=2i32 {
        r.hermiticity = r.hermiticity.max(max_abs(&(rep.q(nu).transpose() - rep.q(-nu) * sgn(nu))));
    }
    for k in -1..=1i32 {
        r.hermiticity = r.hermiticity.max(max_abs(&(rep.lk(k).transpose() - rep.lk(-k) * sgn(k))));
    }
    let c2 = rep.casimir();
    for m in rep.q.iter().chain(rep.l.iter()) {
        r.casimir = r.casimir.max(max_abs(&comm(&c2, m)));
    }
    r
}

/// Argument order of the coefficient in `[Q_ν, Q_μ] = 3√10 (· · | 1 μ+ν) L_{μ+ν}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QqOrder {
    /// `(2ν, 2μ | 1 μ+ν)`: the order satisfied by Hermitian `Q` with
    /// `C₂ = 4(λ² + μ² + λμ + 3λ + 3μ)`.
    Consistent,
    /// `(2μ, 2ν | 1 μ+ν)`: the exchanged order, which differs by an overall sign.
    Exchanged,
}

pub fn qq_commutator_residual(rep: &MSchemeRep, order: QqOrder) -> f64 {
    let mut worst: f64 = 0.0;
    for nu in -2..=2i32 {
        for mu in -2..=2i32 {
            let c = match order {
                QqOrder::Consistent => clebsch_gordan(2, nu, 2, mu, 1, mu + nu),
                QqOrder::Exchanged => clebsch_gordan(2, mu, 2, nu, 1, mu + nu),
            };
            let lhs = comm(rep.q(nu), rep.q(mu));
            let d = if (mu + nu).abs() <= 1 { lhs - rep.lk(mu + nu) * (3.0 * 10f64.sqrt() * c) } else { lhs };
            worst = worst.max(max_abs(&d));
        }
    }
    worst
}

/// What the oracle extracts for one irrep inside a representation.
#[derive(Clone, Debug)]
pub struct OracleExtraction {
    /// Reduced `Q` blocks, multiplicity basis = the highest-`M` states found.
    pub blocks: IrrepBlocks,
    /// `X₃` restricted to the highest-`M` states at each `L`.
    pub x3: BTreeMap<AngMom, DMatrix<f64>>,
    /// `X₄` restricted likewise.
    pub x4: BTreeMap<AngMom, DMatrix<f64>>,
}

/// Project `target` out of `rep`, find highest-`M` states at each `L`, and
/// divide out Clebsch–Gordan factors to get reduced elements.
pub fn extract_rme_mscheme(rep: &MSchemeRep, target: IrrepLabel) -> Result<OracleExtraction> {
    let c2 = rep.casimir();
    let eig = symmetric_eigen(&c2);
    let want = target.casimir2();
    let cols: Vec<usize> = (0..eig.values.len()).filter(|&i| (eig.values[i] - want).abs() < 1e-6 * want.max(1.0)).collect();
    if cols.len() as u64 != target.dimension() {
        return Err(Error::NotInProduct { target, lambda1: 0, lambda2: 0 });
    }
    let v = eig.vectors.select_columns(&cols);

    let l_max = target.l_values().last().copied().unwrap_or(0);
    let alpha = 0.5 / (l_max + 1) as f64;
    let probe = v.transpose() * (rep.l_dot_l() + rep.lk(0) * alpha) * &v;
    let pe = symmetric_eigen(&probe);
    let mut top: BTreeMap<AngMom, DMatrix<f64>> = BTreeMap::new();
    for l in target.l_values() {
        let key = (l * (l + 1)) as f64 + alpha * l as f64;
        let idx: Vec<usize> = (0..pe.values.len()).filter(|&i| (pe.values[i] - key).abs() < 1e-6).collect();
        if idx.len() != target.multiplicity(l) {
            return Err(Error::NotInProduct { target, lambda1: 0, lambda2: 0 });
        }
        top.insert(l, &v * pe.vectors.select_columns(&idx));
    }

    // |L M-1⟩ = L₋|L M⟩ / √((L+M)(L-M+1)), with L₋ = √2 L_{-1}
    let lower = rep.lk(-1) * 2f64.sqrt();
    let state_at = |l: AngMom, m: i32| -> DMatrix<f64> {
        let mut s = top[&l].clone();
        let mut cur = l as i32;
        while cur > m {
            let norm = (((l as i32 + cur) * (l as i32 - cur + 1)) as f64).sqrt();
            s = &lower * s / norm;
            cur -= 1;
        }
        s
    };

    let mut blocks = IrrepBlocks::new(target);
    for l in target.l_values() {
        blocks.set_dim(l, target.multiplicity(l));
    }
    let ls = target.l_values();
    for &li in &ls {
        for &lf in ls.iter().filter(|&&lf| lf <= li + 2 && li <= lf + 2 && lf + li >= 2) {
            let ket = &top[&li];
            let mut done = false;
            for nu in [0i32, 1, -1, 2, -2] {
                let mf = li as i32 + nu;
                if mf.abs() > lf as i32 {
                    continue;
                }
                let c = clebsch_gordan(li, li as i32, 2, nu, lf, mf);
                if c.abs() < 1e-8 {
                    continue;
                }
                let bra = state_at(lf, mf);
                let b = bra.transpose() * rep.q(nu) * ket * (((2 * lf + 1) as f64).sqrt() / c);
                blocks.insert_block(lf, li, b);
                done = true;
                break;
            }
            if !done {
                return Err(Error::NoWitness { bra: format!("L={lf}"), ket: format!("L={li}") });
            }
        }
    }

    let x3_full = rep.x3(&standard_cg);
    let x4_full = rep.x4(&standard_cg);
    let restrict = |m: &DMatrix<f64>| -> BTreeMap<AngMom, DMatrix<f64>> {
        top.iter().map(|(&l, w)| (l, w.transpose() * m * w)).collect()
    };
    Ok(OracleExtraction { blocks, x3: restrict(&x3_full), x4: restrict(&x4_full) })
}

/// `max |A - c B|` for the least-squares `c`, relative to `max |A|`.
pub fn proportionality_defect(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let bb = b.dot(b);
    if bb == 0.0 {
        return max_abs(a);
    }
    let c = a.dot(b) / bb;
    max_abs(&(a - b * c)) / max_abs(a).max(f64::MIN_POSITIVE)
}

/// Largest `‖u_i ∓ v_i‖` over eigenvector pairs (both ascending), sign aligned.
pub fn eigenvector_mismatch(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let ea = symmetric_eigen(a);
    let eb = symmetric_eigen(b);
    (0..ea.vectors.ncols())
        .map(|i| {
            let (u, v) = (ea.vectors.column(i), eb.vectors.column(i));
            let s = if u.dot(&v) < 0.0 { -1.0 } else { 1.0 };
            (u - v * s).norm()
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        CheckResult { name: name.into(), value, tolerance, passed: value.is_finite() && value <= tolerance }
    }
}

/// Cross-pipeline comparison on one irrep: both tables are resolved with the
/// same labeling and phase rules, then compared entrywise.
pub fn cross_pipeline_defect(target: IrrepLabel) -> Result<f64> {
    let (a, b) = coupled::default_parents(target);
    let sub = coupled::extract_irrep(a, b, target, &Tolerances::default())?;
    let pipeline = coupled::reduced_q_table(&sub, &sub.casimir_basis());
    let rep = build_product_mscheme(a, b)?;
    let ext = extract_rme_mscheme(&rep, target)?;
    let p = kbasis::alt3_basis(&pipeline, 1e-7).table;
    let o = kbasis::alt3_basis(&ext.blocks, 1e-7).table;
    Ok(p.max_abs_diff(&o))
}

/// X₃ proportionality and Z eigenvector agreement at every `L` of `target`.
pub fn reduction_defects(target: IrrepLabel) -> Result<(f64, f64)> {
    let (a, b) = coupled::default_parents(target);
    let rep = build_product_mscheme(a, b)?;
    let ext = extract_rme_mscheme(&rep, target)?;
    let mut prop: f64 = 0.0;
    let mut vecs: f64 = 0.0;
    for l in target.l_values() {
        if l == 0 {
            continue;
        }
        prop = prop.max(proportionality_defect(&ext.x3[&l], &ext.blocks.block(l, l)));
        let explicit = &ext.x4[&l] - &ext.x3[&l] * z_coefficient(target);
        vecs = vecs.max(eigenvector_mismatch(&explicit, &z_block(&ext.blocks, l)));
    }
    Ok((prop, vecs))
}

/// The checks behind `su3k check`, sized by `max_lambda`.
pub fn validation_suite(max_lambda: u32) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let mut push = |r: Result<CheckResult>, name: &str| match r {
        Ok(c) => out.push(c),
        Err(e) => out.push(CheckResult { name: format!("{name}: {e}"), value: f64::NAN, tolerance: 0.0, passed: false }),
    };
    for lambda in 1..=max_lambda.min(MAX_SYMMETRIC_LAMBDA) {
        push(
            build_symmetric_mscheme(lambda).map(|r| CheckResult::new(format!("commutators ({lambda},0)"), commutator_residuals(&r).max(), 1e-10)),
            "commutators",
        );
        push(
            build_symmetric_mscheme(lambda).map(|r| {
                let c = IrrepLabel::new(lambda, 0).casimir2();
                let d = max_abs(&(r.casimir() - DMatrix::identity(r.dim(), r.dim()) * c));
                CheckResult::new(format!("sum-rule c2({lambda},0) vs 4λ(λ+3)"), d, 1e-9)
            }),
            "casimir",
        );
    }
    for (a, b) in [(1u32, 1u32), (2, 2), (3, 1), (4, 2)] {
        if a > max_lambda {
            continue;
        }
        push(
            build_product_mscheme(a, b).map(|r| CheckResult::new(format!("commutators ({a},0)x({b},0)"), commutator_residuals(&r).max(), 1e-10)),
            "product commutators",
        );
        push(
            build_product_mscheme(a, b).map(|r| {
                let got = symmetric_eigen(&r.casimir()).values;
                let mut want: Vec<f64> = Vec::new();
                for irrep in coupled::decompose_product(a, b).unwrap() {
                    want.extend(std::iter::repeat_n(irrep.casimir2(), irrep.dimension() as usize));
                }
                want.sort_by(f64::total_cmp);
                let d = got.iter().zip(&want).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                CheckResult::new(format!("casimir spectrum ({a},0)x({b},0)"), d, 1e-8)
            }),
            "product casimir",
        );
    }
    for target in [IrrepLabel::new(2, 1), IrrepLabel::new(2, 2)] {
        if target.lambda + target.mu > max_lambda {
            continue;
        }
        push(cross_pipeline_defect(target).map(|d| CheckResult::new(format!("cross-pipeline table {target}"), d, 1e-9)), "cross-pipeline");
        push(
            reduction_defects(target).map(|(p, _)| CheckResult::new(format!("X3 proportional to M^L {target}"), p, 1e-9)),
            "x3",
        );
        push(
            reduction_defects(target).map(|(_, v)| CheckResult::new(format!("Z eigenvectors {target}"), v, 1e-8)),
            "z",
        );
    }
    out
}
