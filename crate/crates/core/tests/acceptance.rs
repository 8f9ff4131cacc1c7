//! Acceptance checks against the published tables. Prints one PASS/FAIL line
//! per criterion and exits nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::process::ExitCode;

use su3_kbasis::compare::{compare, FLAG_RELATIVE};
use su3_kbasis::coupled::reduced_q_block;
use su3_kbasis::io::{read_cg, write_cg};
use su3_kbasis::kbasis::{alt2_from_cg, cg_from_table, extract, m_matrix};
use su3_kbasis::linalg::symmetric_eigen;
use su3_kbasis::models::{self, asymptotic_rme, rotor_ratio, rotor_rme, sigma, sqrt_8_7};
use su3_kbasis::oracle::{
    build_product_mscheme, build_symmetric_mscheme, commutator_residuals, cross_pipeline_defect, reduction_defects,
};
use su3_kbasis::su3::symmetric_irrep_rme;
use su3_kbasis::wigner::clebsch_gordan;
use su3_kbasis::{build_table, BasisChoice, BuildOptions, IrrepLabel, KLState, ReducedMatrixTable};

const GTW: usize = 0;
const ALT1: usize = 1;
const ALT2: usize = 2;
const ALT3: usize = 3;
const AS: usize = 4;
const ROT: usize = 5;

/// Printed values carry six decimals.
const PRINT_ROUNDING: f64 = 5e-7;

#[derive(Clone, Copy, Debug)]
struct Row {
    ket: KLState,
    bra: KLState,
    cols: [f64; 6],
}

struct Golden {
    irrep: IrrepLabel,
    rows: Vec<Row>,
}

impl Golden {
    fn parse(irrep: IrrepLabel, text: &str) -> Golden {
        let rows = text
            .lines()
            .skip(1)
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                let f: Vec<f64> = line.split(',').map(|x| x.trim().parse().expect("numeric golden field")).collect();
                let mut cols = [0.0; 6];
                cols.copy_from_slice(&f[4..10]);
                Row { ket: KLState::new(f[0] as u32, f[1] as u32), bra: KLState::new(f[2] as u32, f[3] as u32), cols }
            })
            .collect();
        Golden { irrep, rows }
    }

    fn row(&self, ket: KLState, bra: KLState) -> Row {
        *self.rows.iter().find(|r| r.ket == ket && r.bra == bra).expect("row present")
    }

    fn column_table(&self, col: usize, basis: BasisChoice) -> ReducedMatrixTable {
        let mut t = ReducedMatrixTable::new(self.irrep, basis);
        for r in &self.rows {
            t.insert(r.bra, r.ket, r.cols[col]);
        }
        t
    }
}

fn st(k: u32, l: u32) -> KLState {
    KLState::new(k, l)
}

fn table_10_4() -> Golden {
    Golden::parse(IrrepLabel::new(10, 4), include_str!("data/table_10_4.csv"))
}

fn table_32_5() -> Golden {
    Golden::parse(IrrepLabel::new(32, 5), include_str!("data/table_32_5.csv"))
}

fn built(irrep: IrrepLabel, basis: BasisChoice) -> ReducedMatrixTable {
    build_table(irrep, basis, &BuildOptions::default()).expect("table builds").table
}

struct Report {
    failed: Vec<u32>,
}

impl Report {
    fn line(&mut self, id: u32, passed: bool, text: String) {
        println!("{} criterion {id}: {text}", if passed { "PASS" } else { "FAIL" });
        if !passed {
            self.failed.push(id);
        }
    }
}

/// Largest `|computed − printed|` over rows not in `skip`.
fn column_deviation(g: &Golden, t: &ReducedMatrixTable, col: usize, skip: &[(KLState, KLState)]) -> (f64, usize) {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for r in g.rows.iter().filter(|r| !skip.contains(&(r.ket, r.bra))) {
        worst = worst.max((t.value(r.bra, r.ket) - r.cols[col]).abs());
        n += 1;
    }
    (worst, n)
}

/// A printed entry shown to be inconsistent with the rest of its own column:
/// the basis-invariant of its `(L_f, L_i)` block disagrees with the same
/// invariant of a reference column, and the value the invariant implies
/// matches the computed one.
struct InvariantProof {
    gap: f64,
    rounding: f64,
    implied: f64,
}

fn invariant_proof(g: &Golden, ket: KLState, bra: KLState, col: usize, reference: usize) -> InvariantProof {
    let (lf, li) = (bra.l, ket.l);
    let block: Vec<&Row> = g.rows.iter().filter(|r| r.bra.l == lf && r.ket.l == li).collect();
    let target = g.row(ket, bra).cols[col];
    if lf == li {
        let diag: Vec<&&Row> = block.iter().filter(|r| r.bra == r.ket).collect();
        let trace = |c: usize| diag.iter().map(|r| r.cols[c]).sum::<f64>();
        let (tc, tr) = (trace(col), trace(reference));
        InvariantProof {
            gap: (tc - tr).abs(),
            rounding: 2.0 * diag.len() as f64 * PRINT_ROUNDING,
            implied: tr - (tc - target),
        }
    } else {
        let frob = |c: usize| block.iter().map(|r| r.cols[c] * r.cols[c]).sum::<f64>();
        let (fc, fr) = (frob(col), frob(reference));
        let rounding = block.iter().map(|r| 2.0 * (r.cols[col].abs() + r.cols[reference].abs()) * PRINT_ROUNDING).sum();
        InvariantProof {
            gap: (fc - fr).abs(),
            rounding,
            implied: target.signum() * (fr - (fc - target * target)).sqrt(),
        }
    }
}

/// Asymptotic `ΔK = 0, ΔL = 2` element with the amplitude shift `a` as a parameter.
fn asymptotic_dl2(irrep: IrrepLabel, k: u32, l: u32, a: f64) -> f64 {
    let big = (2 * irrep.lambda + irrep.mu + 3) as f64;
    let s = if k == 1 { sigma(irrep, l + 2, l) } else { 0.0 };
    let root = ((2 * l + 1) as f64).sqrt() * clebsch_gordan(l, k as i32, 2, 0, l + 2, k as i32);
    root * ((big - a + s) * (big + a + s)).sqrt()
}

fn differing_chars(a: &str, b: &str) -> usize {
    if a.len() != b.len() {
        return usize::MAX;
    }
    a.chars().zip(b.chars()).filter(|(x, y)| x != y).count()
}

fn criterion_alt3(rep: &mut Report, id: u32, g: &Golden) {
    let t = built(g.irrep, BasisChoice::AltIII);
    let (worst, n) = column_deviation(g, &t, ALT3, &[]);
    rep.line(
        id,
        worst <= 1e-3 && n == g.rows.len(),
        format!("{} Alternative III, {n} printed entries, max |Δ| = {worst:.2e} (tol 1e-3)", g.irrep),
    );
}

fn criterion_alt1(rep: &mut Report, tables: &[Golden]) {
    // (irrep, ket, bra) of the two printed entries that contradict their own column
    let errata = [(IrrepLabel::new(10, 4), st(4, 4), st(4, 4)), (IrrepLabel::new(32, 5), st(1, 4), st(1, 2))];
    let zeros: [(IrrepLabel, &[(KLState, KLState)]); 2] = [
        (IrrepLabel::new(32, 5), &[(st(1, 3), st(3, 3)), (st(1, 4), st(3, 4)), (st(1, 5), st(3, 5)), (st(3, 5), st(5, 5))]),
        (IrrepLabel::new(10, 4), &[(st(0, 2), st(2, 2)), (st(0, 4), st(2, 4)), (st(2, 4), st(4, 4))]),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    let mut worst_all: f64 = 0.0;
    let mut worst_zero: f64 = 0.0;
    let mut rows = 0;
    for g in tables {
        let t = built(g.irrep, BasisChoice::AltI);
        let skip: Vec<(KLState, KLState)> =
            errata.iter().filter(|e| e.0 == g.irrep).map(|e| (e.1, e.2)).collect();
        let (worst, n) = column_deviation(g, &t, ALT1, &skip);
        worst_all = worst_all.max(worst);
        rows += n;
        for (irrep, list) in &zeros {
            if *irrep == g.irrep {
                for &(bra, ket) in *list {
                    worst_zero = worst_zero.max(t.value(bra, ket).abs());
                }
            }
        }
        for &(ket, bra) in &skip {
            let computed = t.value(bra, ket);
            for reference in [ALT3, ALT2] {
                let p = invariant_proof(g, ket, bra, ALT1, reference);
                let proven = p.gap > 100.0 * p.rounding && (p.implied - computed).abs() <= 1e-3;
                ok &= proven;
                if reference == ALT3 {
                    notes.push(format!(
                        "{} {ket}|{bra} printed {:.6} contradicts its block invariant by {:.3e} (rounding {:.1e}); implied {:.6}, computed {computed:.6}",
                        g.irrep,
                        g.row(ket, bra).cols[ALT1],
                        p.gap,
                        p.rounding,
                        p.implied
                    ));
                }
            }
        }
    }
    ok &= worst_all <= 1e-3 && worst_zero <= 1e-9;
    rep.line(
        3,
        ok,
        format!(
            "Alternative I, {rows} entries max |Δ| = {worst_all:.2e} (tol 1e-3), structural zeros max {worst_zero:.1e} (tol 1e-9), {} misprints proven",
            notes.len()
        ),
    );
    for n in notes {
        println!("    misprint: {n}");
    }
}

fn criterion_models(rep: &mut Report, tables: &[Golden]) {
    let t325 = IrrepLabel::new(32, 5);
    let as_errata = [(st(1, 5), st(1, 3)), (st(3, 5), st(3, 3))];
    let rot_errata = [(st(1, 4), st(1, 3))];
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut n = 0;
    let mut notes = Vec::new();
    for g in tables {
        for r in &g.rows {
            let a = asymptotic_rme(g.irrep, r.bra, r.ket);
            let skip_as = g.irrep == t325 && as_errata.contains(&(r.ket, r.bra));
            let skip_rot = g.irrep == t325 && rot_errata.contains(&(r.ket, r.bra));
            if !skip_as {
                match a {
                    Ok(v) => worst = worst.max((v - r.cols[AS]).abs()),
                    Err(_) => ok = false,
                }
                n += 1;
            }
            if !skip_rot {
                worst = worst.max((rotor_rme(g.irrep, r.bra, r.ket) - r.cols[ROT]).abs());
                n += 1;
            }
        }
    }
    let g = &tables[1];
    for &(ket, bra) in &as_errata {
        let row = g.row(ket, bra);
        let faithful = asymptotic_rme(t325, bra, ket).unwrap_or(f64::NAN);
        let shifted = asymptotic_dl2(t325, ket.k, bra.l, (2 * bra.l + 1) as f64);
        let proven = (shifted - row.cols[AS]).abs() <= 1e-5
            && (faithful - asymptotic_dl2(t325, ket.k, bra.l, (2 * bra.l + 3) as f64)).abs() <= 1e-12
            && (faithful - row.cols[ALT3]).abs() < (row.cols[AS] - row.cols[ALT3]).abs();
        ok &= proven;
        notes.push(format!(
            "A.S. {t325} {ket}|{bra} printed {:.6} is the amplitude with shift 2L+1 ({shifted:.6}); with 2L+3 it is {faithful:.6}, closer to column III {:.6}",
            row.cols[AS], row.cols[ALT3]
        ));
    }
    for &(ket, bra) in &rot_errata {
        let row = g.row(ket, bra);
        let computed = rotor_rme(t325, bra, ket);
        let (a, b) = (format!("{computed:.6}"), format!("{:.6}", row.cols[ROT]));
        let proven = differing_chars(&a, &b) == 1;
        ok &= proven;
        notes.push(format!("ROT(3) {t325} {ket}|{bra} printed {b} differs from the closed form {a} in a single digit"));
    }
    ok &= worst <= 1e-5;
    rep.line(
        4,
        ok,
        format!("asymptotic and rotor columns, {n} entries max |Δ| = {worst:.2e} (tol 1e-5), {} misprints proven", notes.len()),
    );
    for n in notes {
        println!("    misprint: {n}");
    }
}

fn criterion_ratio(rep: &mut Report) {
    let mut worst: f64 = 0.0;
    let mut n = 0;
    let mut ok = true;
    for irrep in [IrrepLabel::new(10, 4), IrrepLabel::new(32, 5)] {
        let expected = sqrt_8_7() * models::RotorParams::for_irrep(irrep).qbar0;
        for l in irrep.l_values() {
            let ks = irrep.k_at(l);
            for &k in &ks {
                if ks.contains(&(k + 2)) {
                    match rotor_ratio(irrep, k, l) {
                        Ok(r) => worst = worst.max((r / expected - 1.0).abs()),
                        Err(_) => ok = false,
                    }
                    n += 1;
                }
            }
        }
    }
    rep.line(5, ok && worst <= 1e-9, format!("rotor ratio over {n} (K,L) pairs, max relative deviation {worst:.2e} (tol 1e-9)"));
}

fn criterion_oracle(rep: &mut Report) {
    let sym = commutator_residuals(&build_symmetric_mscheme(2).expect("oracle (2,0)")).max();
    let prod = commutator_residuals(&build_product_mscheme(2, 2).expect("oracle (2,0)x(2,0)")).max();
    let mut casimir: f64 = 0.0;
    for lambda in 1..=10u32 {
        let expected = (4 * lambda * (lambda + 3)) as f64;
        let ls: Vec<u32> = (0..=lambda).filter(|l| (lambda - l) % 2 == 0).collect();
        for &li in &ls {
            let sum: f64 = ls
                .iter()
                .map(|&lf| symmetric_irrep_rme(lambda, lf, li).expect("symmetric rme").powi(2))
                .sum::<f64>();
            let c2 = sum / (2 * li + 1) as f64 + (3 * li * (li + 1)) as f64;
            casimir = casimir.max((c2 / expected - 1.0).abs());
        }
    }
    let cross = cross_pipeline_defect(IrrepLabel::new(2, 2)).unwrap_or(f64::INFINITY);
    let (_, z) = reduction_defects(IrrepLabel::new(2, 2)).unwrap_or((f64::INFINITY, f64::INFINITY));
    let ok = sym <= 1e-10 && prod <= 1e-10 && casimir <= 1e-12 && cross <= 1e-9 && z <= 1e-8;
    rep.line(
        6,
        ok,
        format!(
            "oracle: commutators (2,0) {sym:.1e}, (2,0)x(2,0) {prod:.1e} (tol 1e-10); c2 = 4λ(λ+3) rel {casimir:.1e}; (2,2) cross-pipeline {cross:.1e} (tol 1e-9); Z eigenvectors {z:.1e} (tol 1e-8)"
        ),
    );
}

fn sum_rule_defect(t: &ReducedMatrixTable) -> f64 {
    let irrep = t.irrep;
    let c2 = irrep.casimir2();
    let content = irrep.so3_content();
    let mut worst: f64 = 0.0;
    for &i in &content {
        let sum: f64 = content.iter().map(|&f| t.value(f, i).powi(2)).sum();
        let expected = (2 * i.l + 1) as f64 * (c2 - (3 * i.l * (i.l + 1)) as f64);
        worst = worst.max(((sum - expected) / expected).abs());
    }
    worst
}

fn spectrum(t: &ReducedMatrixTable, l: u32) -> Vec<f64> {
    symmetric_eigen(&m_matrix(t, l)).values.as_slice().to_vec()
}

fn criterion_properties(rep: &mut Report) {
    let opts = BuildOptions::default();
    let mut spectra: f64 = 0.0;
    let mut sum_rule: f64 = 0.0;
    let mut transpose: f64 = 0.0;
    for irrep in [IrrepLabel::new(10, 4), IrrepLabel::new(32, 5)] {
        let tables: Vec<ReducedMatrixTable> =
            [BasisChoice::Gtw, BasisChoice::AltI, BasisChoice::AltIII].iter().map(|&b| built(irrep, b)).collect();
        for l in irrep.l_values() {
            let base = spectrum(&tables[0], l);
            for t in &tables[1..] {
                for (a, b) in base.iter().zip(spectrum(t, l)) {
                    spectra = spectra.max((a - b).abs());
                }
            }
        }
        for t in &tables {
            sum_rule = sum_rule.max(sum_rule_defect(t));
        }
        let sub = extract(irrep, &opts).expect("extraction");
        let basis = sub.casimir_basis();
        for li in irrep.l_values() {
            for lf in irrep.l_values().into_iter().filter(|&lf| lf <= li && li - lf <= 2) {
                let up = reduced_q_block(&sub, &basis, lf, li);
                let down = reduced_q_block(&sub, &basis, li, lf).transpose();
                let sign = if (li - lf) % 2 == 0 { 1.0 } else { -1.0 };
                transpose = transpose.max((up - down * sign).abs().max());
            }
        }
        for (bra, ket) in models::model_pairs(irrep) {
            let sign = if (ket.l - bra.l) % 2 == 0 { 1.0 } else { -1.0 };
            transpose = transpose.max((rotor_rme(irrep, bra, ket) - sign * rotor_rme(irrep, ket, bra)).abs());
            if let (Ok(a), Ok(b)) = (asymptotic_rme(irrep, bra, ket), asymptotic_rme(irrep, ket, bra)) {
                transpose = transpose.max((a - sign * b).abs());
            }
        }
    }
    let (a, b) = (IrrepLabel::new(4, 2), IrrepLabel::new(2, 4));
    let sa = extract(a, &opts).expect("(4,2) extraction");
    let sb = extract(b, &opts).expect("(2,4) extraction");
    let mut conjugation: f64 = 0.0;
    for l in a.l_values() {
        let ea = symmetric_eigen(&reduced_q_block(&sa, &sa.casimir_basis(), l, l)).values;
        let eb = symmetric_eigen(&reduced_q_block(&sb, &sb.casimir_basis(), l, l)).values;
        let n = ea.len();
        for j in 0..n {
            conjugation = conjugation.max((ea[j] + eb[n - 1 - j]).abs());
        }
    }
    let ok = spectra <= 1e-8 && sum_rule <= 1e-8 && conjugation <= 1e-8 && transpose <= 1e-9;
    rep.line(
        7,
        ok,
        format!(
            "properties: spectra across GTW/I/III {spectra:.1e} (tol 1e-8), sum rule rel {sum_rule:.1e} (tol 1e-8), (4,2)/(2,4) negation {conjugation:.1e} (tol 1e-8), transpose {transpose:.1e} (tol 1e-9)"
        ),
    );
}

fn criterion_contraction(rep: &mut Report, shape: &Golden) {
    let keys: BTreeSet<(KLState, KLState)> = shape.rows.iter().map(|r| (r.bra, r.ket)).collect();
    let mut devs = Vec::new();
    for lambda in [10u32, 20, 40, 80] {
        let irrep = IrrepLabel::new(lambda, 4);
        let t = built(irrep, BasisChoice::AltIII);
        let mut worst: f64 = 0.0;
        for &(bra, ket) in &keys {
            let a = asymptotic_rme(irrep, bra, ket).expect("asymptotic entry");
            worst = worst.max((t.value(bra, ket) - a).abs() / a.abs());
        }
        devs.push(worst);
    }
    let monotone = devs.windows(2).all(|w| w[1] <= w[0]);
    let irrep = IrrepLabel::new(10, 4);
    let (t1, t3) = (built(irrep, BasisChoice::AltI), built(irrep, BasisChoice::AltIII));
    let (mut s1, mut s3) = (0.0, 0.0);
    for &(bra, ket) in &keys {
        let a = asymptotic_rme(irrep, bra, ket).expect("asymptotic entry");
        s1 += (t1.value(bra, ket) - a).abs();
        s3 += (t3.value(bra, ket) - a).abs();
    }
    let shown: Vec<String> = devs.iter().map(|d| format!("{d:.3e}")).collect();
    rep.line(
        8,
        monotone && s1 > s3,
        format!(
            "contraction: max rel |III − A.S.| for λ = 10,20,40,80 (μ=4): [{}]; (10,4) Σ|I − A.S.| = {s1:.4} > Σ|III − A.S.| = {s3:.4}",
            shown.join(", ")
        ),
    );
}

fn criterion_alt2(rep: &mut Report, tables: &[Golden]) {
    let dir = std::path::PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let mut reports = Vec::new();
    for g in tables {
        let alt3 = built(g.irrep, BasisChoice::AltIII);
        let path = dir.join(format!("acceptance_cg_{}_{}.txt", g.irrep.lambda, g.irrep.mu));
        let file = std::fs::File::create(&path).expect("create coefficient file");
        write_cg(&cg_from_table(&alt3), std::io::BufWriter::new(file)).expect("write coefficients");
        let cg = read_cg(std::io::BufReader::new(std::fs::File::open(&path).expect("open coefficient file")))
            .expect("read coefficients");
        match alt2_from_cg(&cg, g.irrep) {
            Ok((t, _)) => worst = worst.max(t.max_abs_diff(&alt3)),
            Err(_) => ok = false,
        }
        let report = compare(&[g.column_table(ALT2, BasisChoice::AltII), alt3]);
        reports.push(format!(
            "{} printed II vs computed III: max |Δ| {:.4}, {} row(s) above {:.0}%",
            g.irrep,
            report.max_deviation(),
            report.flagged().count(),
            FLAG_RELATIVE * 100.0
        ));
    }
    rep.line(9, ok && worst <= 1e-12, format!("Alternative II coefficient-file round trip max |Δ| = {worst:.1e} (tol 1e-12)"));
    for r in reports {
        println!("    report: {r}");
    }
}

fn main() -> ExitCode {
    let started = std::time::Instant::now();
    let tables = [table_10_4(), table_32_5()];
    assert_eq!(tables[0].rows.len(), 19);
    assert_eq!(tables[1].rows.len(), 31);
    // the GTW column is not a target; read it only to keep the layout honest
    assert!(tables.iter().all(|g| g.rows.iter().all(|r| r.cols[GTW].is_finite())));

    let mut rep = Report { failed: Vec::new() };
    criterion_alt3(&mut rep, 1, &tables[0]);
    criterion_alt3(&mut rep, 2, &tables[1]);
    criterion_alt1(&mut rep, &tables);
    criterion_models(&mut rep, &tables);
    criterion_ratio(&mut rep);
    criterion_oracle(&mut rep);
    criterion_properties(&mut rep);
    criterion_contraction(&mut rep, &tables[0]);
    criterion_alt2(&mut rep, &tables);
    println!("acceptance finished in {:.1}s", started.elapsed().as_secs_f64());
    if rep.failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {:?}", rep.failed);
        ExitCode::FAILURE
    }
}
