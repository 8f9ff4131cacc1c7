//! Closed-form large-`λ` (asymptotic) and rigid-rotor reduced matrix elements,
//! and the rotor `[Q⊗Q]₂ / Q` ratio and `Z̄` diagnostics.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kbasis::qq2_sum;
use crate::su3::{IrrepLabel, KLState};
use crate::table::{BasisChoice, ReducedMatrixTable};
use crate::wigner::{clebsch_gordan, AngMom};

/// Intrinsic quadrupole moments of the rotor attached to `(λ,μ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotorParams {
    pub qbar0: f64,
    pub qbar2: f64,
}

impl RotorParams {
    pub fn for_irrep(irrep: IrrepLabel) -> Self {
        RotorParams {
            qbar0: (2 * irrep.lambda + irrep.mu + 3) as f64,
            qbar2: 1.5f64.sqrt() * irrep.mu as f64,
        }
    }
}

/// `√(8/7)`, the coefficient tying `X₄` to `X₃` in the rotor limit.
pub fn sqrt_8_7() -> f64 {
    (8.0f64 / 7.0).sqrt()
}

fn phase(n: i64) -> f64 {
    if n.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn lsq(l: AngMom) -> f64 {
    (l * (l + 1)) as f64
}

/// K = 1 staggering term of the asymptotic formulas.
pub fn sigma(irrep: IrrepLabel, lp: AngMom, l: AngMom) -> f64 {
    let f = 0.5 * (irrep.mu + 1) as f64 * phase((irrep.lambda + l) as i64);
    if lp == l {
        f * (-3.0 * lsq(l) / (3.0 - lsq(l)))
    } else if lp == l + 1 {
        f * (l + 1) as f64
    } else if lp + 1 == l {
        f * -(l as f64)
    } else {
        -f
    }
}

fn check_state(irrep: IrrepLabel, s: KLState) -> Result<()> {
    if irrep.contains(s) {
        Ok(())
    } else {
        Err(Error::StateNotInIrrep { irrep, state: s })
    }
}

/// Asymptotic `<f‖Q‖i>` for `λ → ∞` at fixed `μ`.
///
/// Errors with [`Error::AsymptoticDomain`] when an amplitude's radicand goes
/// negative, which happens at the top of the irrep where the large-`λ`
/// expansion no longer applies.
pub fn asymptotic_rme(irrep: IrrepLabel, f: KLState, i: KLState) -> Result<f64> {
    if !irrep.is_standard() {
        return Err(Error::ConjugateIrrep(irrep));
    }
    check_state(irrep, f)?;
    check_state(irrep, i)?;
    asymptotic_unchecked(irrep, f, i)
}

fn asymptotic_unchecked(irrep: IrrepLabel, f: KLState, i: KLState) -> Result<f64> {
    if f.l.abs_diff(i.l) > 2 {
        return Ok(0.0);
    }
    let big = (2 * irrep.lambda + irrep.mu + 3) as f64;
    let domain = || Error::AsymptoticDomain { irrep, bra: f, ket: i };
    if f.k == i.k {
        if f.l < i.l {
            return Ok(phase(i.l as i64 - f.l as i64) * asymptotic_unchecked(irrep, i, f)?);
        }
        let (k, l) = (i.k, i.l);
        let s = if k == 1 { sigma(irrep, f.l, l) } else { 0.0 };
        let kk = k as i32;
        let root = ((2 * l + 1) as f64).sqrt() * clebsch_gordan(l, kk, 2, 0, f.l, kk);
        let amp = match f.l - l {
            0 => big + s,
            d => {
                let a = if d == 1 { (l + 1) as f64 } else { (2 * l + 3) as f64 };
                let r = (big - a + s) * (big + a + s);
                if r < 0.0 {
                    return Err(domain());
                }
                r.sqrt()
            }
        };
        Ok(root * amp)
    } else if f.k == i.k + 2 {
        let (k, l) = (i.k, i.l);
        let r = 1.5 * (irrep.mu as f64 - k as f64) * (irrep.mu + k + 2) as f64;
        if r < 0.0 {
            return Err(domain());
        }
        let dbl = if k == 0 { 2.0 } else { 1.0 };
        Ok(((2 * l + 1) as f64 * dbl).sqrt() * clebsch_gordan(l, k as i32, 2, 2, f.l, k as i32 + 2) * r.sqrt())
    } else if i.k == f.k + 2 {
        Ok(phase(i.l as i64 - f.l as i64) * asymptotic_unchecked(irrep, i, f)?)
    } else {
        Ok(0.0)
    }
}

/// Rigid-rotor `<f‖Q‖i>` with intrinsic moments from [`RotorParams`].
///
/// Defined on the full (untruncated) rotor bands: no upper bound on `L`.
pub fn rotor_rme(irrep: IrrepLabel, f: KLState, i: KLState) -> f64 {
    if f.l.abs_diff(i.l) > 2 {
        return 0.0;
    }
    let p = RotorParams::for_irrep(irrep);
    let (l, k) = (i.l, i.k as i32);
    let root = ((2 * l + 1) as f64).sqrt();
    if f.k == i.k {
        let mut v = clebsch_gordan(l, k, 2, 0, f.l, k) * p.qbar0;
        if i.k == 1 {
            v += phase((irrep.lambda + l + 1) as i64) * clebsch_gordan(l, -1, 2, 2, f.l, 1) * p.qbar2;
        }
        root * v
    } else if f.k == i.k + 2 {
        let dbl = if i.k == 0 { 2f64.sqrt() } else { 1.0 };
        root * dbl * clebsch_gordan(l, k, 2, 2, f.l, k + 2) * p.qbar2
    } else if i.k == f.k + 2 {
        phase(i.l as i64 - f.l as i64) * rotor_rme(irrep, i, f)
    } else {
        0.0
    }
}

/// Whether `s` lies in one of the infinite rotor bands attached to `irrep`.
pub fn in_rotor_band(irrep: IrrepLabel, s: KLState) -> bool {
    if !irrep.k_values().contains(&s.k) {
        return false;
    }
    if s.k == 0 {
        s.l % 2 == irrep.lambda.max(irrep.mu) % 2
    } else {
        s.l >= s.k
    }
}

fn rotor_neighbours(irrep: IrrepLabel, f: KLState, i: KLState) -> Vec<KLState> {
    let lo = f.l.max(i.l).saturating_sub(2);
    let hi = f.l.min(i.l) + 2;
    let mut out = Vec::new();
    for l in lo..=hi {
        for k in irrep.k_values() {
            let s = KLState::new(k, l);
            if in_rotor_band(irrep, s) {
                out.push(s);
            }
        }
    }
    out
}

/// `<f‖[Q⊗Q]₂‖i>` in the rotor model, with intermediates over the full bands.
pub fn rotor_qq2(irrep: IrrepLabel, f: KLState, i: KLState) -> f64 {
    qq2_sum(f, i, rotor_neighbours(irrep, f, i), |a, b| rotor_rme(irrep, a, b))
}

/// `<K+2 L‖[Q⊗Q]₂‖K L> / <K+2 L‖Q‖K L>` in the rotor model.
pub fn rotor_ratio(irrep: IrrepLabel, k: u32, l: AngMom) -> Result<f64> {
    let (lo, hi) = (KLState::new(k, l), KLState::new(k + 2, l));
    for s in [lo, hi] {
        check_state(irrep, s)?;
    }
    let den = rotor_rme(irrep, hi, lo);
    if den.abs() < 1e-12 {
        return Err(Error::VanishingRatio { k, l });
    }
    Ok(rotor_qq2(irrep, hi, lo) / den)
}

/// `<K' L‖Z̄‖K L>` with `Z̄ = X̄₄ − √(8/7) q̄₀ X̄₃` reduced at fixed `L`.
pub fn rotor_zbar(irrep: IrrepLabel, f: KLState, i: KLState) -> f64 {
    let q0 = RotorParams::for_irrep(irrep).qbar0;
    rotor_qq2(irrep, f, i) - sqrt_8_7() * q0 * rotor_rme(irrep, f, i)
}

#[derive(Clone, Debug, Serialize)]
pub struct ZbarBlock {
    pub l: AngMom,
    pub ks: Vec<u32>,
    pub diagonal: Vec<f64>,
    pub max_offdiag: f64,
    pub norm: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ZbarReport {
    pub irrep: IrrepLabel,
    pub blocks: Vec<ZbarBlock>,
}

impl ZbarReport {
    /// Largest off-diagonal relative to its block norm.
    pub fn worst_relative_offdiag(&self) -> f64 {
        self.blocks.iter().map(|b| if b.norm > 0.0 { b.max_offdiag / b.norm } else { 0.0 }).fold(0.0, f64::max)
    }
}

pub fn rotor_zbar_matrix(irrep: IrrepLabel, l: AngMom) -> (Vec<u32>, DMatrix<f64>) {
    let ks = irrep.k_at(l);
    let m = DMatrix::from_fn(ks.len(), ks.len(), |r, c| {
        rotor_zbar(irrep, KLState::new(ks[r], l), KLState::new(ks[c], l))
    });
    (ks, m)
}

pub fn rotor_zbar_check(irrep: IrrepLabel) -> ZbarReport {
    let blocks = irrep
        .l_values()
        .into_iter()
        .map(|l| {
            let (ks, m) = rotor_zbar_matrix(irrep, l);
            let n = ks.len();
            let mut max_offdiag: f64 = 0.0;
            for r in 0..n {
                for c in 0..n {
                    if r != c {
                        max_offdiag = max_offdiag.max(m[(r, c)].abs());
                    }
                }
            }
            ZbarBlock { l, ks, diagonal: m.diagonal().iter().copied().collect(), max_offdiag, norm: m.norm() }
        })
        .collect();
    ZbarReport { irrep, blocks }
}

/// Pairs tabulated by the model columns: `|ΔL| ≤ 2`, `ΔK ∈ {0, ±2}`, canonical order.
pub fn model_pairs(irrep: IrrepLabel) -> Vec<(KLState, KLState)> {
    let content = irrep.so3_content();
    let mut out = Vec::new();
    for &ket in &content {
        for &bra in content.iter().filter(|&&b| b <= ket) {
            if ket.l - bra.l <= 2 && (bra.k == ket.k || bra.k.abs_diff(ket.k) == 2) {
                out.push((bra, ket));
            }
        }
    }
    out
}

/// Asymptotic table; entries outside the formula's domain are left out and
/// listed in the returned warnings.
pub fn asymptotic_table(irrep: IrrepLabel) -> Result<(ReducedMatrixTable, Vec<String>)> {
    if !irrep.is_standard() {
        return Err(Error::ConjugateIrrep(irrep));
    }
    let mut t = ReducedMatrixTable::new(irrep, BasisChoice::Asymptotic);
    let mut warnings = Vec::new();
    for (bra, ket) in model_pairs(irrep) {
        match asymptotic_unchecked(irrep, bra, ket) {
            Ok(v) => t.insert(bra, ket, v),
            Err(e) => warnings.push(e.to_string()),
        }
    }
    Ok((t, warnings))
}

pub fn rotor_table(irrep: IrrepLabel) -> ReducedMatrixTable {
    let mut t = ReducedMatrixTable::new(irrep, BasisChoice::Rotor);
    for (bra, ket) in model_pairs(irrep) {
        t.insert(bra, ket, rotor_rme(irrep, bra, ket));
    }
    t
}

/// Diagonal rotor references per `L`, keyed by `K`.
pub fn rotor_diagonals(irrep: IrrepLabel, f: impl Fn(KLState) -> f64) -> BTreeMap<AngMom, Vec<(u32, f64)>> {
    irrep
        .l_values()
        .into_iter()
        .map(|l| (l, irrep.k_at(l).into_iter().map(|k| (k, f(KLState::new(k, l)))).collect()))
        .collect()
}
