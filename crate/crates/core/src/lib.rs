//! Generalized inverses of dense complex matrices (Moore-Penrose, (1,3),
//! group, Drazin, core, pseudo core) with residual certificates, plus
//! numerical checks of identities about the pseudo core inverse of sums and
//! 2x2 block matrices.

pub mod cli;
pub mod error;
pub mod geninv;
pub mod instances;
pub mod matrix;
pub mod theorems;

pub use error::{Error, Result};
pub use matrix::{ComplexMatrix, TolerancePolicy};
