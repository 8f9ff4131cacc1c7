//! SU(3) irrep labels, SO(3) branching, and the analytic matrix elements of the
//! multiplicity-free `(λ,0)` irreps.
//!
//! Reduced matrix elements throughout the crate follow the convention
//!
//! ```text
//! <a L' M'| Q_ν |b L M> = (L M, 2 ν | L' M') <a L'‖Q‖b L> / sqrt(2L'+1)
//! ```
//!
//! under which `<a‖Q‖b> = (-1)^(L_b - L_a) <b‖Q‖a>` and
//! `Σ_f <f‖Q‖i>² = (2L_i+1) <Q·Q>_i`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wigner::{clebsch_gordan, AngMom};

/// An SU(3) irrep `(λ,μ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IrrepLabel {
    pub lambda: u32,
    pub mu: u32,
}

impl fmt::Display for IrrepLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.lambda, self.mu)
    }
}

/// A basis label `(K, L)` inside one irrep. Ordered by `L`, then `K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KLState {
    pub k: u32,
    pub l: AngMom,
}

impl KLState {
    pub const fn new(k: u32, l: AngMom) -> Self {
        KLState { k, l }
    }
}

impl Ord for KLState {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.l, self.k).cmp(&(other.l, other.k))
    }
}

impl PartialOrd for KLState {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for KLState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};{}", self.k, self.l)
    }
}

/// `λ² + μ² + λμ + 3λ + 3μ`, the integer that the quadratic Casimir is a
/// multiple of.
pub fn casimir_core(lambda: u32, mu: u32) -> u64 {
    let (l, m) = (lambda as u64, mu as u64);
    l * l + m * m + l * m + 3 * l + 3 * m
}

impl IrrepLabel {
    pub const fn new(lambda: u32, mu: u32) -> Self {
        IrrepLabel { lambda, mu }
    }

    /// The conjugate irrep `(μ,λ)`.
    pub const fn conjugate(self) -> Self {
        IrrepLabel { lambda: self.mu, mu: self.lambda }
    }

    pub fn is_standard(self) -> bool {
        self.lambda >= self.mu
    }

    /// Allowed `K` values, descending: `μ, μ-2, …, 0 or 1` (for `λ ≥ μ`).
    pub fn k_values(self) -> Vec<u32> {
        let (_, mu) = self.ordered();
        (0..=mu).rev().step_by(2).collect()
    }

    /// `(λ,μ)` with the larger label first; conjugation preserves SO(3) content.
    fn ordered(self) -> (u32, u32) {
        if self.lambda >= self.mu {
            (self.lambda, self.mu)
        } else {
            (self.mu, self.lambda)
        }
    }

    /// SO(3) branching `(λ,μ) ↓ SO(3)`, sorted by `(L, K)`.
    pub fn so3_content(self) -> Vec<KLState> {
        let (lambda, _) = self.ordered();
        let mut out = Vec::new();
        for k in self.k_values() {
            if k == 0 {
                out.extend((lambda % 2..=lambda).step_by(2).map(|l| KLState::new(0, l)));
            } else {
                out.extend((k..=lambda + k).map(|l| KLState::new(k, l)));
            }
        }
        out.sort();
        out
    }

    pub fn contains(self, s: KLState) -> bool {
        let (lambda, mu) = self.ordered();
        if s.k > mu || (mu - s.k) % 2 != 0 {
            return false;
        }
        if s.k == 0 {
            s.l <= lambda && (lambda - s.l) % 2 == 0
        } else {
            s.l >= s.k && s.l <= lambda + s.k
        }
    }

    /// `K` values occurring at angular momentum `l`, ascending.
    pub fn k_at(self, l: AngMom) -> Vec<u32> {
        let mut ks: Vec<u32> = self.k_values().into_iter().filter(|&k| self.contains(KLState::new(k, l))).collect();
        ks.sort_unstable();
        ks
    }

    pub fn multiplicity(self, l: AngMom) -> usize {
        self.k_at(l).len()
    }

    /// Distinct `L` values, ascending.
    pub fn l_values(self) -> Vec<AngMom> {
        let mut ls: Vec<AngMom> = self.so3_content().into_iter().map(|s| s.l).collect();
        ls.dedup();
        ls
    }

    pub fn dimension(self) -> u64 {
        let (l, m) = (self.lambda as u64, self.mu as u64);
        (l + 1) * (m + 1) * (l + m + 2) / 2
    }

    /// Eigenvalue of `C₂ = Q·Q + 3 L·L`: `4(λ² + μ² + λμ + 3λ + 3μ)`.
    pub fn casimir2(self) -> f64 {
        4.0 * casimir_core(self.lambda, self.mu) as f64
    }

    /// Contraction parameter `ε(λμ) = ½ (λ² + μ² + λμ + 3λ + 3μ)^(-1/2)`.
    pub fn epsilon(self) -> Result<f64> {
        let c = casimir_core(self.lambda, self.mu);
        if c == 0 {
            return Err(Error::TrivialIrrep);
        }
        Ok(0.5 / (c as f64).sqrt())
    }
}

/// Reduced matrix element `<L_f‖Q‖L_i>` in the symmetric irrep `(λ,0)`.
pub fn symmetric_irrep_rme(lambda: u32, lf: AngMom, li: AngMom) -> Result<f64> {
    let irrep = IrrepLabel::new(lambda, 0);
    for l in [lf, li] {
        if !irrep.contains(KLState::new(0, l)) {
            return Err(Error::StateNotInIrrep { irrep, state: KLState::new(0, l) });
        }
    }
    Ok(symmetric_rme_unchecked(lambda, lf, li))
}

pub(crate) fn symmetric_rme_unchecked(lambda: u32, lf: AngMom, li: AngMom) -> f64 {
    let root = ((2 * li + 1) as f64).sqrt();
    if lf == li {
        root * clebsch_gordan(li, 0, 2, 0, li, 0) * (2 * lambda + 3) as f64
    } else if lf == li + 2 {
        let amp = (4 * (lambda - li) as u64 * (lambda + li + 3) as u64) as f64;
        root * clebsch_gordan(li, 0, 2, 0, lf, 0) * amp.sqrt()
    } else if li == lf + 2 {
        // (-1)^(Li-Lf) = +1
        symmetric_rme_unchecked(lambda, li, lf)
    } else {
        0.0
    }
}
