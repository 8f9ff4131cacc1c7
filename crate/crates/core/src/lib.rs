//! SU(3) irreps `(λ,μ)` in SO(3)-coupled bases, with the intrinsic-`K`
//! multiplicity resolved several ways.

pub mod compare;
pub mod coupled;
pub mod error;
pub mod io;
pub mod kbasis;
pub mod linalg;
pub mod models;
pub mod oracle;
pub mod su3;
pub mod table;
pub mod wigner;

pub use error::{Error, Result};
pub use kbasis::{build_table, BuildOptions, BuiltTable};
pub use su3::{IrrepLabel, KLState};
pub use table::{BasisChoice, IrrepBlocks, ReducedMatrixTable};
