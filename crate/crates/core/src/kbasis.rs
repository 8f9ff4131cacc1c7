//! Resolution of the `K` multiplicity inside one irrep.
//!
//! Starting from reduced `Q` blocks in any orthonormal basis, each `L` sector
//! is diagonalized with a `K`-resolving scalar (`M^L` for Alternative I, the
//! `Z` combination for Alternative III), the eigenvectors are labeled by rank
//! against rotor reference values, and signs are fixed against the asymptotic
//! formulas.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;

use crate::coupled::{self, IrrepSubspace, Tolerances};
use crate::error::{Error, Result};
use crate::linalg::{max_abs, symmetric_eigen};
use crate::models::{self, sqrt_8_7};
use crate::su3::{casimir_core, IrrepLabel, KLState};
use crate::table::{BasisChoice, IrrepBlocks, ReducedMatrixTable};
use crate::wigner::{racah_u, AngMom};

/// `Σ_m U(L_f 2 L_i 2; L_m 2) <f‖Q‖m><m‖Q‖i> / √(2L_m+1)`.
pub fn qq2_sum(
    f: KLState,
    i: KLState,
    intermediates: impl IntoIterator<Item = KLState>,
    get: impl Fn(KLState, KLState) -> f64,
) -> f64 {
    let mut s = 0.0;
    for m in intermediates {
        if m.l.abs_diff(f.l) > 2 || m.l.abs_diff(i.l) > 2 {
            continue;
        }
        let u = racah_u(f.l, 2, i.l, 2, m.l, 2);
        if u == 0.0 {
            continue;
        }
        s += u * get(f, m) * get(m, i) / ((2 * m.l + 1) as f64).sqrt();
    }
    s
}

/// `<f‖[Q⊗Q]₂‖i>` from a complete table of the irrep.
pub fn qq2_rme(table: &ReducedMatrixTable, f: KLState, i: KLState) -> f64 {
    qq2_sum(f, i, table.irrep.so3_content(), |a, b| table.value(a, b))
}

/// `M^L`: same-`L` reduced `Q` over the multiplicity index, `K` ascending.
pub fn m_matrix(table: &ReducedMatrixTable, l: AngMom) -> DMatrix<f64> {
    let ks = table.irrep.k_at(l);
    DMatrix::from_fn(ks.len(), ks.len(), |r, c| table.value(KLState::new(ks[r], l), KLState::new(ks[c], l)))
}

/// Same-`L` `[Q⊗Q]₂` block in whatever basis `blocks` is expressed in.
pub fn qq2_block(blocks: &IrrepBlocks, l: AngMom) -> DMatrix<f64> {
    let n = blocks.dim(l);
    let mut out = DMatrix::zeros(n, n);
    for lm in l.saturating_sub(2)..=l + 2 {
        if blocks.dim(lm) == 0 {
            continue;
        }
        let u = racah_u(l, 2, l, 2, lm, 2);
        out += blocks.block(l, lm) * blocks.block(lm, l) * (u / ((2 * lm + 1) as f64).sqrt());
    }
    out
}

pub fn z_coefficient(irrep: IrrepLabel) -> f64 {
    sqrt_8_7() * (2 * irrep.lambda + irrep.mu + 3) as f64
}

/// `<β L‖[Q⊗Q]₂‖α L> − √(8/7)(2λ+μ+3) <β L‖Q‖α L>` in the basis of `blocks`.
pub fn z_block(blocks: &IrrepBlocks, l: AngMom) -> DMatrix<f64> {
    qq2_block(blocks, l) - blocks.block(l, l) * z_coefficient(blocks.irrep)
}

/// [`z_block`] for a labeled table (`K` ascending).
pub fn z_matrix(table: &ReducedMatrixTable, l: AngMom) -> DMatrix<f64> {
    z_block(&table.to_blocks(), l)
}

/// Match ascending operator eigenvalues to `K` labels ordered by ascending
/// reference value. Returns the label for each eigenvalue and whether the
/// references collided (in which case `K` ascending is used instead).
pub fn assign_k(eigenvalues: &[f64], references: &[(u32, f64)]) -> (Vec<u32>, bool) {
    assert_eq!(eigenvalues.len(), references.len(), "one reference per eigenvector");
    let mut refs = references.to_vec();
    refs.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let scale = refs.iter().map(|r| r.1.abs()).fold(1.0, f64::max);
    let collided = refs.windows(2).any(|w| (w[1].1 - w[0].1).abs() <= 1e-9 * scale);
    if collided {
        refs.sort_by_key(|r| r.0);
    }
    let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
    let mut labels = vec![0; eigenvalues.len()];
    for (rank, &idx) in order.iter().enumerate() {
        labels[idx] = refs[rank].0;
    }
    (labels, collided)
}

/// Reference `<f‖Q‖i>` for sign fixing: asymptotic where defined, rotor otherwise.
pub fn phase_reference(irrep: IrrepLabel, f: KLState, i: KLState) -> f64 {
    models::asymptotic_rme(irrep, f, i).unwrap_or_else(|_| models::rotor_rme(irrep, f, i))
}

/// Per-state signs `s` such that `s_f s_i <f‖Q‖i>` follows the asymptotic sign
/// pattern along each band, with cross-band anchors for band heads.
pub fn fix_phases(table: &ReducedMatrixTable) -> BTreeMap<KLState, f64> {
    let irrep = table.irrep;
    let mut signs: BTreeMap<KLState, f64> = BTreeMap::new();
    for s in irrep.so3_content() {
        let usable = |c: &KLState| phase_reference(irrep, s, *c).abs() > 1e-8;
        let in_band: Vec<KLState> = [s.l.checked_sub(1), s.l.checked_sub(2)]
            .into_iter()
            .flatten()
            .map(|l| KLState::new(s.k, l))
            .filter(|c| signs.contains_key(c) && usable(c))
            .collect();
        let candidates = if in_band.is_empty() && s.k >= 2 {
            (s.l.saturating_sub(2)..=s.l)
                .map(|l| KLState::new(s.k - 2, l))
                .filter(|c| signs.contains_key(c) && usable(c))
                .collect()
        } else {
            in_band
        };
        let best = candidates
            .into_iter()
            .max_by(|a, b| table.value(s, *a).abs().total_cmp(&table.value(s, *b).abs()).then(b.cmp(a)));
        let sign = match best {
            None => 1.0,
            Some(c) => {
                let computed = table.value(s, c) * signs[&c];
                if computed * phase_reference(irrep, s, c) >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        signs.insert(s, sign);
    }
    signs
}

pub fn apply_signs(table: &ReducedMatrixTable, signs: &BTreeMap<KLState, f64>) -> ReducedMatrixTable {
    let mut out = ReducedMatrixTable::new(table.irrep, table.basis);
    for (bra, ket, v) in table.entries() {
        out.insert(bra, ket, signs[&bra] * signs[&ket] * v);
    }
    out
}

/// A resolved basis: the labeled, phase-fixed table plus the per-`L` change
/// of basis (columns in the input coordinates, ordered by ascending `K`).
#[derive(Clone, Debug)]
pub struct Resolution {
    pub table: ReducedMatrixTable,
    pub bases: BTreeMap<AngMom, DMatrix<f64>>,
    pub warnings: Vec<String>,
}

/// Which scalar resolves the multiplicity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Resolver {
    /// Eigenvectors of `M^L`.
    AltI,
    /// Eigenvectors of `Z`.
    AltIII,
}

/// Label columns of `vectors` (input coordinates) by ranking `keys` against
/// `refs`, reorder to ascending `K`, then fix phases.
fn finish(
    input: &IrrepBlocks,
    per_l: BTreeMap<AngMom, (DMatrix<f64>, Vec<f64>, Vec<(u32, f64)>)>,
    basis: BasisChoice,
    mut warnings: Vec<String>,
) -> Resolution {
    let mut bases = BTreeMap::new();
    let mut labels = BTreeMap::new();
    for (l, (vectors, keys, refs)) in per_l {
        let (ks, collided) = assign_k(&keys, &refs);
        if collided {
            warnings.push(format!("L={l}: rotor reference values collide, K assigned in ascending order"));
        }
        let mut order: Vec<usize> = (0..ks.len()).collect();
        order.sort_by_key(|&c| ks[c]);
        bases.insert(l, vectors.select_columns(&order));
        labels.insert(l, order.iter().map(|&c| ks[c]).collect::<Vec<_>>());
    }
    let raw = input.transform(&bases).to_table(&labels, basis);
    let signs = fix_phases(&raw);
    for (l, b) in bases.iter_mut() {
        for (c, &k) in labels[l].iter().enumerate() {
            if signs[&KLState::new(k, *l)] < 0.0 {
                b.column_mut(c).neg_mut();
            }
        }
    }
    Resolution { table: apply_signs(&raw, &signs), bases, warnings }
}

fn degeneracy_warning(l: AngMom, values: &[f64], m: &DMatrix<f64>, tol: f64, what: &str) -> Option<String> {
    let scale = max_abs(m).max(f64::MIN_POSITIVE);
    let gap = values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    (gap < tol * scale).then(|| format!("L={l}: {what} eigenvalue gap {gap:.3e} below {tol:e}·‖block‖"))
}

/// Resolve the multiplicity of `input` (any orthonormal basis) by `resolver`.
pub fn resolve(input: &IrrepBlocks, resolver: Resolver, degeneracy_tol: f64) -> Resolution {
    let irrep = input.irrep;
    let mut warnings = Vec::new();
    let mut per_l = BTreeMap::new();
    for l in irrep.l_values() {
        let (m, name) = match resolver {
            Resolver::AltI => (input.block(l, l), "M^L"),
            Resolver::AltIII => (z_block(input, l), "Z"),
        };
        let eig = symmetric_eigen(&m);
        if let Some(w) = degeneracy_warning(l, &eig.values, &m, degeneracy_tol, name) {
            warnings.push(w);
        }
        let refs: Vec<(u32, f64)> = irrep
            .k_at(l)
            .into_iter()
            .map(|k| {
                let s = KLState::new(k, l);
                let v = match resolver {
                    Resolver::AltI => models::rotor_rme(irrep, s, s),
                    Resolver::AltIII => models::rotor_zbar(irrep, s, s),
                };
                (k, v)
            })
            .collect();
        per_l.insert(l, (eig.vectors, eig.values, refs));
    }
    let basis = match resolver {
        Resolver::AltI => BasisChoice::AltI,
        Resolver::AltIII => BasisChoice::AltIII,
    };
    finish(input, per_l, basis, warnings)
}

pub fn alt1_basis(input: &IrrepBlocks, degeneracy_tol: f64) -> Resolution {
    resolve(input, Resolver::AltI, degeneracy_tol)
}

pub fn alt3_basis(input: &IrrepBlocks, degeneracy_tol: f64) -> Resolution {
    resolve(input, Resolver::AltIII, degeneracy_tol)
}

/// Label a fixed basis (for GTW): each vector is ranked by its own `M^L`
/// diagonal element against the rotor diagonal.
pub fn label_fixed_basis(input: &IrrepBlocks, bases: &BTreeMap<AngMom, DMatrix<f64>>, basis: BasisChoice) -> Resolution {
    let irrep = input.irrep;
    let moved = input.transform(bases);
    let per_l = bases
        .iter()
        .map(|(&l, v)| {
            let keys: Vec<f64> = moved.block(l, l).diagonal().iter().copied().collect();
            let refs = irrep.k_at(l).into_iter().map(|k| (k, models::rotor_rme(irrep, KLState::new(k, l), KLState::new(k, l)))).collect();
            (l, (v.clone(), keys, refs))
        })
        .collect();
    finish(input, per_l, basis, Vec::new())
}

/// Reduced-`Q` prefactor relating a table entry `<β L'‖Q‖α L>` to the
/// coefficient `((λμ)αL; (11)2 ‖ (λμ)βL')`.
pub fn cg_prefactor(irrep: IrrepLabel, lp: AngMom) -> f64 {
    (4.0 / 3.0 * (2 * lp + 1) as f64 * casimir_core(irrep.lambda, irrep.mu) as f64).sqrt()
}

/// SU(3) coupling coefficients `((λμ)αL; (11)2 ‖ (λμ)βL')` for one irrep.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CgCoefficients {
    pub irrep: Option<IrrepLabel>,
    /// keyed by `(ket (α,L), bra (β,L'))`, with the source line
    pub values: BTreeMap<(KLState, KLState), (f64, usize)>,
}

/// Alternative II: build the table from externally supplied coefficients.
///
/// A pair listed in only one orientation is completed by the transpose rule;
/// pairs listed in neither orientation are zero. States of the irrep that
/// appear in no line at all are an error.
pub fn alt2_from_cg(cg: &CgCoefficients, irrep: IrrepLabel) -> Result<(ReducedMatrixTable, Vec<String>)> {
    let content = irrep.so3_content();
    let mut seen = BTreeSet::new();
    for (&(ket, bra), &(_, line)) in &cg.values {
        for s in [ket, bra] {
            if !irrep.contains(s) {
                return Err(Error::Parse { line, msg: format!("state {s} is not in irrep {irrep}") });
            }
            seen.insert(s);
        }
    }
    let gaps: Vec<String> = content.iter().filter(|s| !seen.contains(s)).map(|s| s.to_string()).collect();
    if !gaps.is_empty() {
        return Err(Error::MissingCoefficients { irrep, gaps: gaps.join(" ") });
    }
    let mut warnings = Vec::new();
    let mut t = ReducedMatrixTable::new(irrep, BasisChoice::AltII);
    let entry = |bra: KLState, ket: KLState| cg.values.get(&(ket, bra)).map(|(c, _)| c * cg_prefactor(irrep, bra.l));
    for &ket in &content {
        for &bra in content.iter().filter(|b| **b <= ket && ket.l - b.l <= 2) {
            let fwd = entry(bra, ket);
            let back = entry(ket, bra).map(|v| if (ket.l + bra.l) % 2 == 0 { v } else { -v });
            let v = match (fwd, back) {
                (Some(a), Some(b)) => {
                    if (a - b).abs() > 1e-6 * a.abs().max(b.abs()).max(1e-12) {
                        warnings.push(format!("<{bra}|Q|{ket}>: transposed coefficients disagree ({a} vs {b})"));
                    }
                    a
                }
                (Some(a), None) => a,
                (None, Some(b)) => b,
                (None, None) => 0.0,
            };
            t.insert(bra, ket, v);
        }
    }
    Ok((t, warnings))
}

/// Inverse of [`alt2_from_cg`]: the coefficients that reproduce `table`, both
/// orientations, nonzero only.
pub fn cg_from_table(table: &ReducedMatrixTable) -> CgCoefficients {
    let irrep = table.irrep;
    let mut values = BTreeMap::new();
    for (bra, ket, _) in table.entries() {
        for (f, i) in [(bra, ket), (ket, bra)] {
            let v = table.value(f, i);
            if v != 0.0 {
                values.insert((i, f), (v / cg_prefactor(irrep, f.l), 0));
            }
        }
    }
    CgCoefficients { irrep: Some(irrep), values }
}

/// Options for [`build_table`].
#[derive(Clone, Copy, Debug, Default)]
pub struct BuildOptions {
    pub parents: Option<(u32, u32)>,
    pub tolerances: Tolerances,
}

/// Output of [`build_table`].
#[derive(Clone, Debug)]
pub struct BuiltTable {
    pub table: ReducedMatrixTable,
    pub warnings: Vec<String>,
}

pub fn extract(irrep: IrrepLabel, opts: &BuildOptions) -> Result<IrrepSubspace> {
    let (a, b) = opts.parents.unwrap_or_else(|| coupled::default_parents(irrep));
    coupled::extract_irrep(a, b, irrep, &opts.tolerances)
}

/// Compute the reduced quadrupole table of `irrep` in a computed basis.
///
/// Alternative II needs external coefficients; use [`alt2_from_cg`]. For
/// `λ < μ` the conjugate irrep is built (with `opts.parents` applying to it)
/// and negated.
pub fn build_table(irrep: IrrepLabel, basis: BasisChoice, opts: &BuildOptions) -> Result<BuiltTable> {
    if irrep.lambda == 0 && irrep.mu == 0 {
        let mut table = ReducedMatrixTable::new(irrep, basis);
        table.insert(KLState::new(0, 0), KLState::new(0, 0), 0.0);
        return Ok(BuiltTable { table, warnings: Vec::new() });
    }
    match basis {
        BasisChoice::Asymptotic => {
            let (table, warnings) = models::asymptotic_table(irrep)?;
            Ok(BuiltTable { table, warnings })
        }
        BasisChoice::Rotor if irrep.is_standard() => Ok(BuiltTable { table: models::rotor_table(irrep), warnings: Vec::new() }),
        BasisChoice::AltII => Err(Error::NeedsCoefficients),
        _ if !irrep.is_standard() => {
            let built = build_table(irrep.conjugate(), basis, opts)?;
            Ok(BuiltTable { table: built.table.conjugated(), warnings: built.warnings })
        }
        _ => {
            let sub = extract(irrep, opts)?;
            let start = coupled::reduced_q_table(&sub, &sub.casimir_basis());
            let tol = opts.tolerances.degeneracy;
            let res = match basis {
                BasisChoice::AltI => alt1_basis(&start, tol),
                BasisChoice::AltIII => alt3_basis(&start, tol),
                BasisChoice::Gtw => {
                    let gtw = coupled::gtw_basis(&sub);
                    let mut warnings = Vec::new();
                    let mut local = BTreeMap::new();
                    for (&l, sb) in &gtw {
                        let restricted = sub.restrict(l, |b| &b.q1q2);
                        if let Some(w) = degeneracy_warning(l, &sb.eigenvalues, &restricted, tol, "Q1·Q2") {
                            warnings.push(w);
                        }
                        local.insert(l, sub.per_l[&l].columns.transpose() * &sb.vectors);
                    }
                    let mut r = label_fixed_basis(&start, &local, BasisChoice::Gtw);
                    r.warnings.extend(warnings);
                    r
                }
                _ => unreachable!(),
            };
            Ok(BuiltTable { table: res.table, warnings: res.warnings })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(k: u32, l: u32) -> KLState {
        KLState::new(k, l)
    }

    #[test]
    fn assign_k_ranks() {
        let (l, c) = assign_k(&[5.0, -3.0, 1.0], &[(0, -10.0), (2, 0.0), (4, 10.0)]);
        assert_eq!(l, vec![4, 0, 2]);
        assert!(!c);
        let (l, c) = assign_k(&[1.0, 2.0], &[(3, 4.0), (1, 4.0)]);
        assert_eq!(l, vec![1, 3]);
        assert!(c);
        assert_eq!(assign_k(&[7.0], &[(5, -1.0)]).0, vec![5]);
    }

    #[test]
    fn qq2_of_empty_chain_is_zero() {
        assert_eq!(qq2_sum(st(0, 0), st(0, 4), Vec::new(), |_, _| 1.0), 0.0);
    }

    fn small(irrep: IrrepLabel) -> (IrrepBlocks, IrrepSubspace) {
        let sub = extract(irrep, &BuildOptions::default()).unwrap();
        (coupled::reduced_q_table(&sub, &sub.casimir_basis()), sub)
    }

    #[test]
    fn alt1_zeroes_same_l_offdiagonals() {
        let (b, _) = small(IrrepLabel::new(6, 4));
        let r = alt1_basis(&b, 1e-7);
        for l in r.table.irrep.l_values() {
            let m = m_matrix(&r.table, l);
            for i in 0..m.nrows() {
                for j in 0..m.ncols() {
                    if i != j {
                        assert!(m[(i, j)].abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn alt3_diagonalizes_z() {
        let (b, _) = small(IrrepLabel::new(6, 4));
        let r = alt3_basis(&b, 1e-7);
        for l in r.table.irrep.l_values() {
            let z = z_matrix(&r.table, l);
            let scale = z.norm();
            for i in 0..z.nrows() {
                for j in 0..z.ncols() {
                    if i != j {
                        assert!(z[(i, j)].abs() <= 1e-8 * scale.max(1.0));
                    }
                }
            }
            let u = &r.bases[&l];
            assert!(crate::linalg::orthogonality_defect(u) < 1e-10);
        }
    }

    #[test]
    fn phases_are_a_diagonal_congruence() {
        let (b, _) = small(IrrepLabel::new(4, 2));
        let r = alt1_basis(&b, 1e-7);
        let mut signs: BTreeMap<KLState, f64> = r.table.irrep.so3_content().into_iter().map(|s| (s, 1.0)).collect();
        *signs.get_mut(&st(2, 3)).unwrap() = -1.0;
        let flipped = apply_signs(&r.table, &signs);
        for l in r.table.irrep.l_values() {
            let a = symmetric_eigen(&m_matrix(&r.table, l)).values;
            let c = symmetric_eigen(&m_matrix(&flipped, l)).values;
            for (x, y) in a.iter().zip(&c) {
                assert!((x - y).abs() < 1e-10);
            }
        }
        for (bra, ket, v) in r.table.entries() {
            assert!((flipped.value(bra, ket).abs() - v.abs()).abs() < 1e-12);
        }
        // fixing again restores the original convention
        let again = apply_signs(&flipped, &fix_phases(&flipped));
        assert!(again.max_abs_diff(&r.table) < 1e-12);
    }

    #[test]
    fn cg_round_trip() {
        let (b, _) = small(IrrepLabel::new(4, 2));
        let r = alt3_basis(&b, 1e-7);
        let cg = cg_from_table(&r.table);
        let (back, w) = alt2_from_cg(&cg, r.table.irrep).unwrap();
        assert!(w.is_empty());
        assert!(back.max_abs_diff(&r.table) < 1e-12);
        assert_eq!(back.basis, BasisChoice::AltII);
    }

    #[test]
    fn cg_gaps_are_reported() {
        let irrep = IrrepLabel::new(2, 2);
        let mut cg = CgCoefficients::default();
        cg.values.insert((st(0, 0), st(0, 2)), (0.5, 3));
        match alt2_from_cg(&cg, irrep) {
            Err(Error::MissingCoefficients { gaps, .. }) => assert!(gaps.contains("2;2")),
            other => panic!("{other:?}"),
        }
        cg.values.insert((st(0, 0), st(3, 9)), (0.5, 4));
        assert!(matches!(alt2_from_cg(&cg, irrep), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn multiplicity_free_bases_agree() {
        let irrep = IrrepLabel::new(5, 0);
        let opts = BuildOptions::default();
        let a = build_table(irrep, BasisChoice::AltIII, &opts).unwrap().table;
        for basis in [BasisChoice::AltI, BasisChoice::Gtw] {
            let b = build_table(irrep, basis, &opts).unwrap().table;
            assert!(a.max_abs_diff(&b) < 1e-9);
        }
        for (bra, ket, v) in a.entries() {
            let want = crate::su3::symmetric_irrep_rme(5, bra.l, ket.l).unwrap();
            assert!((v - want).abs() < 1e-9, "{bra} {ket}");
        }
    }

    #[test]
    fn conjugate_requests_negate() {
        let opts = BuildOptions::default();
        let a = build_table(IrrepLabel::new(4, 2), BasisChoice::AltIII, &opts).unwrap().table;
        let b = build_table(IrrepLabel::new(2, 4), BasisChoice::AltIII, &opts).unwrap().table;
        assert_eq!(b.irrep, IrrepLabel::new(2, 4));
        for (bra, ket, v) in a.entries() {
            assert_eq!(b.value(bra, ket), -v);
        }
        assert!(matches!(
            build_table(IrrepLabel::new(2, 4), BasisChoice::Asymptotic, &opts),
            Err(Error::ConjugateIrrep(_))
        ));
    }
}
