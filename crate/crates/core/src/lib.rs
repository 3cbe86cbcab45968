//! Exact arithmetic for totally ramified elementary abelian `p`-extensions of
//! `F_q((t))`: ramification data, ramification diagrams, semistability and
//! stability certificates, and Galois scaffolds in both directions.

pub mod diagram;
pub mod digits;
pub mod error;
pub mod fq;
pub mod group_algebra;
pub mod job;
pub mod scaffold;
pub mod series;
pub mod tower;

pub use diagram::{Coset, Diagram, Precision, TensorElem, WitnessVerdict};
pub use digits::DigitTables;
pub use error::{Error, Result};
pub use fq::{FiniteField, Fq};
pub use group_algebra::GroupAlgebraElem;
pub use scaffold::{Scaffold, VerifyReport};
pub use series::{LocalField, Series, Valuation};
pub use tower::{Automorphism, ExtElem, Extension, ExtensionSpec, Generator, LambdaFamily, RamificationData};
