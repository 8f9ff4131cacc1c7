//! SU(3) irreps carved out of `(λ₁,0) ⊗ (λ₂,0)`.
//!
//! The product space is handled one angular momentum at a time. At each `L`
//! the coupled states `|(L₁ L₂) L⟩` carry dense matrices of `Q·Q`, `Q⁽¹⁾·Q⁽²⁾`
//! and `L₁·L₂`; the Casimir `C₂ = Q·Q + 3L·L` separates the irreps of the
//! product, and `Q⁽¹⁾·Q⁽²⁾` restricted to one irrep gives the GTW basis.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, symmetric_eigen};
use crate::su3::{symmetric_rme_unchecked, IrrepLabel};
use crate::table::IrrepBlocks;
use crate::wigner::{six_j, AngMom};

/// `|(L₁ L₂) L⟩` with `L₁ ∈ (λ₁,0)` and `L₂ ∈ (λ₂,0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoupledState {
    pub l1: AngMom,
    pub l2: AngMom,
    pub l: AngMom,
}

/// Which factor of the product a one-body quadrupole acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Relative width of a Casimir eigenvalue cluster.
    pub cluster: f64,
    /// Eigenvalue gap (relative to the block norm) below which a K-resolving
    /// operator is reported as degenerate.
    pub degeneracy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { cluster: 1e-6, degeneracy: 1e-7 }
    }
}

fn parity_range(lambda: u32) -> impl Iterator<Item = AngMom> {
    (lambda % 2..=lambda).step_by(2)
}

fn sign(n: u32) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Coupled states at `l`, ordered by `(L₁, L₂)`.
pub fn coupled_basis(lambda1: u32, lambda2: u32, l: AngMom) -> Vec<CoupledState> {
    let mut out = Vec::new();
    for l1 in parity_range(lambda1) {
        for l2 in parity_range(lambda2) {
            if l1.abs_diff(l2) <= l && l <= l1 + l2 {
                out.push(CoupledState { l1, l2, l });
            }
        }
    }
    out
}

/// SO(3)-reduced `<bra‖Q⁽ˢ⁾‖ket>` of a one-body quadrupole in the coupled basis.
pub fn rme_q_single(side: Side, bra: CoupledState, ket: CoupledState, lambda1: u32, lambda2: u32) -> f64 {
    let geom = (((2 * ket.l + 1) * (2 * bra.l + 1)) as f64).sqrt();
    match side {
        Side::First => {
            if bra.l2 != ket.l2 {
                return 0.0;
            }
            let rme = symmetric_rme_unchecked(lambda1, bra.l1, ket.l1);
            if rme == 0.0 {
                return 0.0;
            }
            sign(bra.l1 + ket.l2 + ket.l) * geom * six_j(bra.l1, bra.l, ket.l2, ket.l, ket.l1, 2) * rme
        }
        Side::Second => {
            if bra.l1 != ket.l1 {
                return 0.0;
            }
            let rme = symmetric_rme_unchecked(lambda2, bra.l2, ket.l2);
            if rme == 0.0 {
                return 0.0;
            }
            sign(ket.l1 + ket.l2 + bra.l) * geom * six_j(bra.l2, bra.l, ket.l1, ket.l, ket.l2, 2) * rme
        }
    }
}

/// Reduced total `Q = Q⁽¹⁾ + Q⁽²⁾` between the coupled bases at `lf` and `li`.
pub fn coupled_q_block(lambda1: u32, lambda2: u32, lf: AngMom, li: AngMom) -> DMatrix<f64> {
    let bra = coupled_basis(lambda1, lambda2, lf);
    let ket = coupled_basis(lambda1, lambda2, li);
    DMatrix::from_fn(bra.len(), ket.len(), |r, c| {
        rme_q_single(Side::First, bra[r], ket[c], lambda1, lambda2)
            + rme_q_single(Side::Second, bra[r], ket[c], lambda1, lambda2)
    })
}

/// Matrices of SO(3) scalars over the coupled states at one `L`.
#[derive(Clone, Debug)]
pub struct LBlock {
    pub l: AngMom,
    pub states: Vec<CoupledState>,
    pub qq: DMatrix<f64>,
    pub q1q2: DMatrix<f64>,
    pub l1l2: DMatrix<f64>,
}

impl LBlock {
    pub fn dim(&self) -> usize {
        self.states.len()
    }
}

/// `Q⁽¹⁾·Q⁽²⁾` from the scalar-product recoupling formula.
fn q1q2_element(bra: CoupledState, ket: CoupledState, lambda1: u32, lambda2: u32) -> f64 {
    let r1 = symmetric_rme_unchecked(lambda1, bra.l1, ket.l1);
    let r2 = symmetric_rme_unchecked(lambda2, bra.l2, ket.l2);
    if r1 == 0.0 || r2 == 0.0 {
        return 0.0;
    }
    sign(ket.l1 + bra.l2 + ket.l) * six_j(ket.l, bra.l2, bra.l1, 2, ket.l1, ket.l2) * r1 * r2
}

pub fn build_block(lambda1: u32, lambda2: u32, l: AngMom) -> Result<LBlock> {
    if lambda1 < lambda2 {
        return Err(Error::ParentOrder { lambda1, lambda2 });
    }
    let states = coupled_basis(lambda1, lambda2, l);
    let n = states.len();
    let q1q2 = DMatrix::from_fn(n, n, |r, c| q1q2_element(states[r], states[c], lambda1, lambda2));
    let c1 = IrrepLabel::new(lambda1, 0).casimir2();
    let c2 = IrrepLabel::new(lambda2, 0).casimir2();
    let one_body = |s: &CoupledState| {
        let ll = |x: u32| (x * (x + 1)) as f64;
        (c1 - 3.0 * ll(s.l1)) + (c2 - 3.0 * ll(s.l2))
    };
    let mut qq = &q1q2 * 2.0;
    let mut l1l2 = DMatrix::zeros(n, n);
    for (i, s) in states.iter().enumerate() {
        qq[(i, i)] += one_body(s);
        let ll = |x: u32| (x * (x + 1)) as f64;
        l1l2[(i, i)] = 0.5 * (ll(s.l) - ll(s.l1) - ll(s.l2));
    }
    Ok(LBlock { l, states, qq, q1q2, l1l2 })
}

/// `(λ₁,0) ⊗ (λ₂,0) = ⊕_k (λ₁+λ₂-2k, k)`, `k = 0..=λ₂`.
pub fn decompose_product(lambda1: u32, lambda2: u32) -> Result<Vec<IrrepLabel>> {
    if lambda1 < lambda2 {
        return Err(Error::ParentOrder { lambda1, lambda2 });
    }
    Ok((0..=lambda2).map(|k| IrrepLabel::new(lambda1 + lambda2 - 2 * k, k)).collect())
}

/// Smallest symmetric parents containing `target` exactly once.
pub fn default_parents(target: IrrepLabel) -> (u32, u32) {
    (target.lambda + target.mu, target.mu)
}

/// One `L` sector of an irrep inside a product: the coupled-space block and an
/// orthonormal set of columns spanning the irrep there.
#[derive(Clone, Debug)]
pub struct IrrepSector {
    pub block: LBlock,
    pub columns: DMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct IrrepSubspace {
    pub irrep: IrrepLabel,
    pub lambda1: u32,
    pub lambda2: u32,
    pub per_l: BTreeMap<AngMom, IrrepSector>,
}

/// Project `target` out of `(λ₁,0) ⊗ (λ₂,0)` by diagonalizing `Q·Q` per `L`.
pub fn extract_irrep(lambda1: u32, lambda2: u32, target: IrrepLabel, tol: &Tolerances) -> Result<IrrepSubspace> {
    let decomposition = decompose_product(lambda1, lambda2)?;
    if !decomposition.contains(&target) {
        return Err(Error::NotInProduct { target, lambda1, lambda2 });
    }
    let c2 = target.casimir2();
    let sectors: Vec<Result<(AngMom, IrrepSector)>> = target
        .l_values()
        .into_par_iter()
        .map(|l| {
            let block = build_block(lambda1, lambda2, l)?;
            let expected = c2 - 3.0 * (l * (l + 1)) as f64;
            let width = (tol.cluster * expected.abs()).max(1e-8 * max_abs(&block.qq));
            let eig = symmetric_eigen(&block.qq);
            let picked: Vec<usize> =
                (0..eig.values.len()).filter(|&i| (eig.values[i] - expected).abs() <= width).collect();
            let needed = target.multiplicity(l);
            if picked.len() != needed {
                let colliding: Vec<String> = decomposition
                    .iter()
                    .filter(|r| **r != target)
                    .filter(|r| {
                        let e = r.casimir2() - 3.0 * (l * (l + 1)) as f64;
                        (e - expected).abs() <= width.max(1e-3 * expected.abs())
                    })
                    .map(|r| r.to_string())
                    .collect();
                return Err(Error::ClusterNotSeparable {
                    target,
                    l,
                    expected,
                    found: picked.len(),
                    needed,
                    colliding: if colliding.is_empty() { "none".into() } else { colliding.join(", ") },
                });
            }
            let columns = eig.vectors.select_columns(&picked);
            Ok((l, IrrepSector { block, columns }))
        })
        .collect();
    let mut per_l = BTreeMap::new();
    for s in sectors {
        let (l, sector) = s?;
        per_l.insert(l, sector);
    }
    Ok(IrrepSubspace { irrep: target, lambda1, lambda2, per_l })
}

/// A per-`L` orthonormal basis, columns in coupled-state coordinates.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    pub eigenvalues: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl IrrepSubspace {
    /// The Casimir eigenvectors themselves, as an (arbitrary) starting basis.
    pub fn casimir_basis(&self) -> BTreeMap<AngMom, DMatrix<f64>> {
        self.per_l.iter().map(|(&l, s)| (l, s.columns.clone())).collect()
    }

    /// Restriction of a block operator to the irrep at `l`.
    pub fn restrict(&self, l: AngMom, op: impl Fn(&LBlock) -> &DMatrix<f64>) -> DMatrix<f64> {
        let s = &self.per_l[&l];
        s.columns.transpose() * op(&s.block) * &s.columns
    }
}

/// GTW basis: eigenvectors of `Q⁽¹⁾·Q⁽²⁾` restricted to the irrep at each `L`,
/// ascending eigenvalue, largest component positive.
pub fn gtw_basis(sub: &IrrepSubspace) -> BTreeMap<AngMom, SectorBasis> {
    sub.per_l
        .par_iter()
        .map(|(&l, s)| {
            let restricted = s.columns.transpose() * &s.block.q1q2 * &s.columns;
            let eig = symmetric_eigen(&restricted);
            let mut vectors = &s.columns * eig.vectors;
            for mut c in vectors.column_iter_mut() {
                let mut v = c.clone_owned();
                crate::linalg::normalize_sign(&mut v);
                c.copy_from(&v);
            }
            (l, SectorBasis { eigenvalues: eig.values, vectors })
        })
        .collect()
}

/// Reduced `Q` between two sectors in the given per-`L` bases.
pub fn reduced_q_block(sub: &IrrepSubspace, basis: &BTreeMap<AngMom, DMatrix<f64>>, lf: AngMom, li: AngMom) -> DMatrix<f64> {
    let r = coupled_q_block(sub.lambda1, sub.lambda2, lf, li);
    basis[&lf].transpose() * r * &basis[&li]
}

/// Reduced quadrupole blocks of the irrep in the given bases.
pub fn reduced_q_table(sub: &IrrepSubspace, basis: &BTreeMap<AngMom, DMatrix<f64>>) -> IrrepBlocks {
    let mut out = IrrepBlocks::new(sub.irrep);
    for (&l, b) in basis {
        out.set_dim(l, b.ncols());
    }
    let ls: Vec<AngMom> = basis.keys().copied().collect();
    let pairs: Vec<(AngMom, AngMom)> =
        ls.iter().flat_map(|&li| ls.iter().filter(move |&&lf| lf <= li && li - lf <= 2).map(move |&lf| (lf, li))).collect();
    let computed: Vec<((AngMom, AngMom), DMatrix<f64>)> =
        pairs.par_iter().map(|&(lf, li)| ((lf, li), reduced_q_block(sub, basis, lf, li))).collect();
    for ((lf, li), b) in computed {
        out.insert_block(lf, li, b);
    }
    out
}
