//! Counting abelian extensions of the rationals by conductor, weighted by
//! frobenian functions, and the local and global harmonic analysis behind
//! their asymptotics.

pub mod arith;
pub mod brauer;
pub mod census;
pub mod constant;
pub mod error;
pub mod exact;
pub mod exponent;
pub mod fit;
pub mod frobenian;
pub mod global;
pub mod group;
pub mod lattice;
pub mod local;
pub mod report;
pub mod sieve;
pub mod units;
pub mod witness;

pub use census::{census, CensusConfig, CensusRecord, CensusSummary, Checkpoint};
pub use constant::{leading_constant, ConstantReport, LocalConditions};
pub use error::{Error, Result};
pub use exponent::{varpi_mean, ExponentReport, Rationals};
pub use fit::{fit_exponent, FitReport};
pub use frobenian::{FrobenianFunction, FunctionSpec};
pub use global::{membership, poisson_check, PoissonReport, SUnitBasis, TensorClass, Verdict};
pub use group::FiniteAbelianGroup;
pub use report::RunManifest;
pub use sieve::FactorizationTable;
pub use witness::{find_witness_sots, find_witness_split, Witness, WitnessSearch};
