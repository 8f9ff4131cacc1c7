//! Reduced quadrupole matrix tables.
//!
//! [`IrrepBlocks`] holds `<βL'‖Q‖αL>` as dense blocks over an arbitrary
//! orthonormal multiplicity basis at each `L`; [`ReducedMatrixTable`] is the
//! same data after the multiplicity index has been resolved into `K` labels.
//! Both store only the canonical half (bra `≤` ket in `(L, K)` order) and
//! derive the other half from `<a‖Q‖b> = (-1)^(L_b-L_a) <b‖Q‖a>`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::su3::{IrrepLabel, KLState};
use crate::wigner::AngMom;

/// Which multiplicity resolution produced a table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BasisChoice {
    #[serde(rename = "GTW")]
    Gtw,
    AltI,
    AltII,
    AltIII,
    Asymptotic,
    Rotor,
}

impl BasisChoice {
    pub const ALL: [BasisChoice; 6] = [
        BasisChoice::Gtw,
        BasisChoice::AltI,
        BasisChoice::AltII,
        BasisChoice::AltIII,
        BasisChoice::Asymptotic,
        BasisChoice::Rotor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BasisChoice::Gtw => "GTW",
            BasisChoice::AltI => "AltI",
            BasisChoice::AltII => "AltII",
            BasisChoice::AltIII => "AltIII",
            BasisChoice::Asymptotic => "Asymptotic",
            BasisChoice::Rotor => "Rotor",
        }
    }
}

impl fmt::Display for BasisChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BasisChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "gtw" | "q1q2" => Ok(BasisChoice::Gtw),
            "alt1" | "alti" | "i" => Ok(BasisChoice::AltI),
            "alt2" | "altii" | "ii" => Ok(BasisChoice::AltII),
            "alt3" | "altiii" | "iii" => Ok(BasisChoice::AltIII),
            "asymptotic" | "as" | "a.s." => Ok(BasisChoice::Asymptotic),
            "rotor" | "rot3" | "rot" => Ok(BasisChoice::Rotor),
            other => Err(format!("unknown basis '{other}' (expected gtw, alt1, alt2, alt3, asymptotic or rotor)")),
        }
    }
}

fn transpose_sign(l_bra: AngMom, l_ket: AngMom) -> f64 {
    if (l_bra + l_ket) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Map `(K_f, L_f, K_i, L_i) → <K_f L_f‖Q‖K_i L_i>` for one irrep and one basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedMatrixTable {
    pub irrep: IrrepLabel,
    pub basis: BasisChoice,
    /// keyed by `(ket, bra)` so iteration runs in `(L_i, K_i, L_f, K_f)` order
    entries: BTreeMap<(KLState, KLState), f64>,
}

impl ReducedMatrixTable {
    pub fn new(irrep: IrrepLabel, basis: BasisChoice) -> Self {
        ReducedMatrixTable { irrep, basis, entries: BTreeMap::new() }
    }

    /// Insert `<bra‖Q‖ket>`; non-canonical pairs are stored transposed.
    pub fn insert(&mut self, bra: KLState, ket: KLState, value: f64) {
        if bra <= ket {
            self.entries.insert((ket, bra), value);
        } else {
            self.entries.insert((bra, ket), transpose_sign(bra.l, ket.l) * value);
        }
    }

    /// `<bra‖Q‖ket>`, or `None` if the pair is not tabulated.
    pub fn get(&self, bra: KLState, ket: KLState) -> Option<f64> {
        if bra <= ket {
            self.entries.get(&(ket, bra)).copied()
        } else {
            self.entries.get(&(bra, ket)).map(|v| transpose_sign(bra.l, ket.l) * v)
        }
    }

    /// Like [`get`](Self::get) with untabulated pairs reading as zero.
    pub fn value(&self, bra: KLState, ket: KLState) -> f64 {
        self.get(bra, ket).unwrap_or(0.0)
    }

    /// Canonical entries as `(bra, ket, value)` in `(L_i, K_i, L_f, K_f)` order.
    pub fn entries(&self) -> impl Iterator<Item = (KLState, KLState, f64)> + '_ {
        self.entries.iter().map(|(&(ket, bra), &v)| (bra, ket, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_l(&self) -> Option<AngMom> {
        self.entries.keys().map(|(ket, _)| ket.l).max()
    }

    /// `Γ^(μλ) = -Γ^(λμ)`: the same entries, negated, relabeled to the conjugate irrep.
    pub fn conjugated(&self) -> ReducedMatrixTable {
        ReducedMatrixTable {
            irrep: self.irrep.conjugate(),
            basis: self.basis,
            entries: self.entries.iter().map(|(k, v)| (*k, -v)).collect(),
        }
    }

    pub fn with_basis(mut self, basis: BasisChoice) -> Self {
        self.basis = basis;
        self
    }

    /// Dense blocks with the multiplicity index at each `L` ordered by ascending `K`.
    pub fn to_blocks(&self) -> IrrepBlocks {
        let mut blocks = IrrepBlocks::new(self.irrep);
        for l in self.irrep.l_values() {
            blocks.set_dim(l, self.irrep.multiplicity(l));
        }
        let ls = self.irrep.l_values();
        for &li in &ls {
            let ki = self.irrep.k_at(li);
            for &lf in ls.iter().filter(|&&lf| lf <= li && li - lf <= 2) {
                let kf = self.irrep.k_at(lf);
                let b = DMatrix::from_fn(kf.len(), ki.len(), |r, c| {
                    self.value(KLState::new(kf[r], lf), KLState::new(ki[c], li))
                });
                blocks.insert_block(lf, li, b);
            }
        }
        blocks
    }

    /// `max |a - b|` over the union of tabulated pairs.
    pub fn max_abs_diff(&self, other: &ReducedMatrixTable) -> f64 {
        let mut keys: Vec<(KLState, KLState)> = self.entries().map(|(b, k, _)| (b, k)).collect();
        keys.extend(other.entries().map(|(b, k, _)| (b, k)));
        keys.iter().map(|&(b, k)| (self.value(b, k) - other.value(b, k)).abs()).fold(0.0, f64::max)
    }
}

/// Reduced `Q` over an arbitrary orthonormal multiplicity basis at each `L`.
///
/// `block(lf, li)[(β, α)] = <β lf‖Q‖α li>`.
#[derive(Clone, Debug)]
pub struct IrrepBlocks {
    pub irrep: IrrepLabel,
    dims: BTreeMap<AngMom, usize>,
    blocks: BTreeMap<(AngMom, AngMom), DMatrix<f64>>,
}

impl IrrepBlocks {
    pub fn new(irrep: IrrepLabel) -> Self {
        IrrepBlocks { irrep, dims: BTreeMap::new(), blocks: BTreeMap::new() }
    }

    pub fn set_dim(&mut self, l: AngMom, dim: usize) {
        self.dims.insert(l, dim);
    }

    pub fn dim(&self, l: AngMom) -> usize {
        self.dims.get(&l).copied().unwrap_or(0)
    }

    pub fn l_values(&self) -> impl Iterator<Item = AngMom> + '_ {
        self.dims.keys().copied()
    }

    /// Store `<lf‖Q‖li>`; `lf > li` is stored transposed.
    pub fn insert_block(&mut self, lf: AngMom, li: AngMom, b: DMatrix<f64>) {
        if lf <= li {
            self.blocks.insert((lf, li), b);
        } else {
            self.blocks.insert((li, lf), b.transpose() * transpose_sign(lf, li));
        }
    }

    pub fn block(&self, lf: AngMom, li: AngMom) -> DMatrix<f64> {
        if lf <= li {
            if let Some(b) = self.blocks.get(&(lf, li)) {
                return b.clone();
            }
        } else if let Some(b) = self.blocks.get(&(li, lf)) {
            return b.transpose() * transpose_sign(lf, li);
        }
        DMatrix::zeros(self.dim(lf), self.dim(li))
    }

    /// Change of basis: columns of `bases[l]` are the new vectors at `l`.
    pub fn transform(&self, bases: &BTreeMap<AngMom, DMatrix<f64>>) -> IrrepBlocks {
        let mut out = IrrepBlocks::new(self.irrep);
        for (&l, u) in bases {
            out.set_dim(l, u.ncols());
        }
        for (&(lf, li), b) in &self.blocks {
            if let (Some(uf), Some(ui)) = (bases.get(&lf), bases.get(&li)) {
                out.blocks.insert((lf, li), uf.transpose() * b * ui);
            }
        }
        out
    }

    /// Attach `K` labels (one per column at each `L`).
    pub fn to_table(&self, labels: &BTreeMap<AngMom, Vec<u32>>, basis: BasisChoice) -> ReducedMatrixTable {
        let mut t = ReducedMatrixTable::new(self.irrep, basis);
        for (&(lf, li), b) in &self.blocks {
            let (kf, ki) = (&labels[&lf], &labels[&li]);
            for r in 0..b.nrows() {
                for c in 0..b.ncols() {
                    t.insert(KLState::new(kf[r], lf), KLState::new(ki[c], li), b[(r, c)]);
                }
            }
        }
        t
    }

    /// `Σ_f <f‖Q‖i>²` for every multiplicity column at `l`.
    pub fn column_norms_sq(&self, l: AngMom) -> Vec<f64> {
        let mut acc = vec![0.0; self.dim(l)];
        for lf in l.saturating_sub(2)..=l + 2 {
            if self.dim(lf) == 0 {
                continue;
            }
            let b = self.block(lf, l);
            for (c, a) in acc.iter_mut().enumerate() {
                *a += b.column(c).norm_squared();
            }
        }
        acc
    }
}
