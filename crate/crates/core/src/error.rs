use thiserror::Error;

use crate::su3::{IrrepLabel, KLState};

#[derive(Debug, Error)]
pub enum Error {
    #[error("state {state} is not in irrep {irrep}")]
    StateNotInIrrep { irrep: IrrepLabel, state: KLState },

    #[error("L = {l} does not occur in irrep {irrep}")]
    MissingL { irrep: IrrepLabel, l: u32 },

    #[error("epsilon is undefined for the trivial irrep (0,0)")]
    TrivialIrrep,

    #[error("asymptotic formulas require lambda >= mu, got {0}")]
    ConjugateIrrep(IrrepLabel),

    #[error("asymptotic amplitude for <{bra}|Q|{ket}> in {irrep} has a negative radicand")]
    AsymptoticDomain { irrep: IrrepLabel, bra: KLState, ket: KLState },

    #[error("parents ({lambda1},0)x({lambda2},0) require lambda1 >= lambda2")]
    ParentOrder { lambda1: u32, lambda2: u32 },

    #[error("{target} does not occur in ({lambda1},0)x({lambda2},0); try --parents {},{}", target.lambda + target.mu, target.mu.min(target.lambda))]
    NotInProduct { target: IrrepLabel, lambda1: u32, lambda2: u32 },

    #[error("Casimir eigenvalue cluster at L = {l} not separable for {target}: found {found} eigenvalues near {expected}, need {needed} (colliding: {colliding})")]
    ClusterNotSeparable {
        target: IrrepLabel,
        l: u32,
        expected: f64,
        found: usize,
        needed: usize,
        colliding: String,
    },

    #[error("vanishing denominator in rotor ratio at K = {k}, L = {l}")]
    VanishingRatio { k: u32, l: u32 },

    #[error("oracle size guard: {what} = {size} exceeds cap {cap}")]
    OracleTooLarge { what: &'static str, size: usize, cap: usize },

    #[error("no Clebsch-Gordan witness for <{bra}|Q|{ket}> (all candidate coefficients vanish)")]
    NoWitness { bra: String, ket: String },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("coefficient file is missing states of {irrep}: {gaps}")]
    MissingCoefficients { irrep: IrrepLabel, gaps: String },

    #[error("alternative II needs SU(3) coupling coefficients (--cg-file)")]
    NeedsCoefficients,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
