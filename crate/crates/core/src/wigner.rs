//! Angular-momentum coupling coefficients for integer spins.
//!
//! Clebsch–Gordan coefficients (Condon–Shortley phase), Wigner 6j symbols and
//! the Racah `W`/`U` recoupling coefficients. Every value is evaluated from the
//! Racah closed-form sums in exact rational arithmetic; the square root is taken
//! once, on the exact square of the result, so the only rounding is the final
//! conversion to `f64`.
//!
//! Results are memoized in process-wide caches guarded by `RwLock`s, so the
//! functions are safe to call from many threads at once.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// An integer angular momentum quantum number.
pub type AngMom = u32;

type Key = [i32; 6];

fn factorial(n: u32) -> BigInt {
    static TABLE: OnceLock<RwLock<Vec<BigInt>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| RwLock::new(vec![BigInt::one()]));
    {
        let t = table.read().unwrap();
        if let Some(v) = t.get(n as usize) {
            return v.clone();
        }
    }
    let mut t = table.write().unwrap();
    while t.len() <= n as usize {
        let k = t.len();
        let next = &t[k - 1] * BigInt::from(k);
        t.push(next);
    }
    t[n as usize].clone()
}

fn fact_ratio(num: &[i64], den: &[i64]) -> BigRational {
    let mut n = BigInt::one();
    for &k in num {
        n *= factorial(k as u32);
    }
    let mut d = BigInt::one();
    for &k in den {
        d *= factorial(k as u32);
    }
    BigRational::new(n, d)
}

/// `sign(s) * sqrt(p * s^2)` for exact rationals `p >= 0`.
fn signed_sqrt(p: &BigRational, s: &BigRational) -> f64 {
    if s.is_zero() || p.is_zero() {
        return 0.0;
    }
    let sq = p * s * s;
    let mag = sq.to_f64().expect("finite rational").sqrt();
    if s.is_negative() {
        -mag
    } else {
        mag
    }
}

fn triangle(a: i64, b: i64, c: i64) -> bool {
    c >= (a - b).abs() && c <= a + b
}

struct Cache(OnceLock<RwLock<HashMap<Key, f64>>>);

impl Cache {
    const fn new() -> Self {
        Cache(OnceLock::new())
    }

    fn get_or_insert_with(&self, key: Key, f: impl FnOnce() -> f64) -> f64 {
        let map = self.0.get_or_init(|| RwLock::new(HashMap::new()));
        if let Some(&v) = map.read().unwrap().get(&key) {
            return v;
        }
        let v = f();
        map.write().unwrap().insert(key, v);
        v
    }
}

static CG_CACHE: Cache = Cache::new();
static SIXJ_CACHE: Cache = Cache::new();

/// Clebsch–Gordan coefficient `(j1 m1, j2 m2 | j m)`.
///
/// Returns 0 when `m1 + m2 != m`, when the triangle rule fails, or when a
/// magnetic number lies outside its range.
pub fn clebsch_gordan(j1: AngMom, m1: i32, j2: AngMom, m2: i32, j: AngMom, m: i32) -> f64 {
    let (j1i, j2i, ji) = (j1 as i64, j2 as i64, j as i64);
    let (m1i, m2i, mi) = (m1 as i64, m2 as i64, m as i64);
    if m1i + m2i != mi || m1i.abs() > j1i || m2i.abs() > j2i || mi.abs() > ji {
        return 0.0;
    }
    if !triangle(j1i, j2i, ji) {
        return 0.0;
    }
    let key = [j1 as i32, m1, j2 as i32, m2, j as i32, m];
    CG_CACHE.get_or_insert_with(key, || cg_exact(j1i, m1i, j2i, m2i, ji, mi))
}

fn cg_exact(j1: i64, m1: i64, j2: i64, m2: i64, j: i64, m: i64) -> f64 {
    let mut p = fact_ratio(&[j + j1 - j2, j - j1 + j2, j1 + j2 - j], &[j1 + j2 + j + 1]);
    p *= fact_ratio(&[j + m, j - m, j1 - m1, j1 + m1, j2 - m2, j2 + m2], &[]);
    p *= BigRational::from_integer(BigInt::from(2 * j + 1));

    let kmin = 0.max(j2 - j - m1).max(j1 + m2 - j);
    let kmax = (j1 + j2 - j).min(j1 - m1).min(j2 + m2);
    let mut s = BigRational::zero();
    for k in kmin..=kmax {
        let term = fact_ratio(
            &[],
            &[k, j1 + j2 - j - k, j1 - m1 - k, j2 + m2 - k, j - j2 + m1 + k, j - j1 - m2 + k],
        );
        if k % 2 == 0 {
            s += term;
        } else {
            s -= term;
        }
    }
    signed_sqrt(&p, &s)
}

/// Wigner 6j symbol `{a b c; d e f}`.
pub fn six_j(a: AngMom, b: AngMom, c: AngMom, d: AngMom, e: AngMom, f: AngMom) -> f64 {
    let [ai, bi, ci, di, ei, fi] = [a, b, c, d, e, f].map(|x| x as i64);
    if !(triangle(ai, bi, ci) && triangle(ai, ei, fi) && triangle(di, bi, fi) && triangle(di, ei, ci)) {
        return 0.0;
    }
    let key = [a, b, c, d, e, f].map(|x| x as i32);
    SIXJ_CACHE.get_or_insert_with(key, || six_j_exact(ai, bi, ci, di, ei, fi))
}

fn delta_sq(a: i64, b: i64, c: i64) -> BigRational {
    fact_ratio(&[a + b - c, a - b + c, -a + b + c], &[a + b + c + 1])
}

fn six_j_exact(a: i64, b: i64, c: i64, d: i64, e: i64, f: i64) -> f64 {
    let p = delta_sq(a, b, c) * delta_sq(a, e, f) * delta_sq(d, b, f) * delta_sq(d, e, c);
    let alphas = [a + b + c, a + e + f, d + b + f, d + e + c];
    let betas = [a + b + d + e, a + c + d + f, b + c + e + f];
    let tmin = *alphas.iter().max().unwrap();
    let tmax = *betas.iter().min().unwrap();
    let mut s = BigRational::zero();
    for t in tmin..=tmax {
        let den: Vec<i64> = alphas.iter().map(|x| t - x).chain(betas.iter().map(|x| x - t)).collect();
        let term = fact_ratio(&[t + 1], &den);
        if t % 2 == 0 {
            s += term;
        } else {
            s -= term;
        }
    }
    signed_sqrt(&p, &s)
}

/// Racah coefficient `W(abcd;ef) = (-1)^(a+b+c+d) {a b e; d c f}`.
pub fn racah_w(a: AngMom, b: AngMom, c: AngMom, d: AngMom, e: AngMom, f: AngMom) -> f64 {
    let v = six_j(a, b, e, d, c, f);
    if (a + b + c + d) % 2 == 0 {
        v
    } else {
        -v
    }
}

/// Unitary Racah coefficient `U(abcd;ef) = sqrt((2e+1)(2f+1)) W(abcd;ef)`.
pub fn racah_u(a: AngMom, b: AngMom, c: AngMom, d: AngMom, e: AngMom, f: AngMom) -> f64 {
    (((2 * e + 1) * (2 * f + 1)) as f64).sqrt() * racah_w(a, b, c, d, e, f)
}
