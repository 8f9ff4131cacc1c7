//! Side-by-side comparison of tables of one irrep in several bases.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::su3::{IrrepLabel, KLState};
use crate::table::{BasisChoice, ReducedMatrixTable};

/// Relative deviation above which a row is flagged.
pub const FLAG_RELATIVE: f64 = 0.03;

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRow {
    pub ket: KLState,
    pub bra: KLState,
    /// One value per column; `None` where that table has no entry.
    pub values: Vec<Option<f64>>,
    /// Largest `|a - b|` over pairs of present values.
    pub max_deviation: f64,
    /// Largest `|a - b| / max(|a|, |b|)` over pairs of present values.
    pub max_relative: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub irrep: IrrepLabel,
    pub columns: Vec<BasisChoice>,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn max_deviation(&self) -> f64 {
        self.rows.iter().map(|r| r.max_deviation).fold(0.0, f64::max)
    }

    pub fn flagged(&self) -> impl Iterator<Item = &ComparisonRow> {
        self.rows.iter().filter(|r| r.flagged)
    }

    pub fn row(&self, bra: KLState, ket: KLState) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.bra == bra && r.ket == ket)
    }

    /// Fixed-width text, one row per matrix element.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "irrep {}", self.irrep);
        let _ = write!(s, "{:>6} {:>6}", "Ki;Li", "Kf;Lf");
        for c in &self.columns {
            let _ = write!(s, " {:>14}", c.as_str());
        }
        let _ = writeln!(s, " {:>12}", "max|diff|");
        for r in &self.rows {
            let _ = write!(s, "{:>6} {:>6}", r.ket.to_string(), r.bra.to_string());
            for v in &r.values {
                match v {
                    Some(v) => {
                        let _ = write!(s, " {v:>14.6}");
                    }
                    None => {
                        let _ = write!(s, " {:>14}", "-");
                    }
                }
            }
            let _ = writeln!(s, " {:>12.6}{}", r.max_deviation, if r.flagged { "  *" } else { "" });
        }
        let flagged = self.flagged().count();
        let _ = writeln!(s, "max |diff| = {:.6}", self.max_deviation());
        let _ = writeln!(s, "{flagged} row(s) differ by more than {:.0}%", FLAG_RELATIVE * 100.0);
        s
    }
}

/// Align `tables` (same irrep) on their `(K, L)` labels.
pub fn compare(tables: &[ReducedMatrixTable]) -> ComparisonReport {
    let irrep = tables.first().map(|t| t.irrep).unwrap_or(IrrepLabel::new(0, 0));
    let keys: BTreeSet<(KLState, KLState)> =
        tables.iter().flat_map(|t| t.entries().map(|(bra, ket, _)| (ket, bra))).collect();
    let rows = keys
        .into_iter()
        .map(|(ket, bra)| {
            let values: Vec<Option<f64>> = tables.iter().map(|t| t.get(bra, ket)).collect();
            let present: Vec<f64> = values.iter().flatten().copied().collect();
            let mut max_deviation: f64 = 0.0;
            let mut max_relative: f64 = 0.0;
            for (i, a) in present.iter().enumerate() {
                for b in &present[i + 1..] {
                    let d = (a - b).abs();
                    max_deviation = max_deviation.max(d);
                    let scale = a.abs().max(b.abs());
                    if scale > 1e-9 {
                        max_relative = max_relative.max(d / scale);
                    }
                }
            }
            ComparisonRow { ket, bra, values, max_deviation, max_relative, flagged: max_relative > FLAG_RELATIVE }
        })
        .collect();
    ComparisonReport { irrep, columns: tables.iter().map(|t| t.basis).collect(), rows }
}
