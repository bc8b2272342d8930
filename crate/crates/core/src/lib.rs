//! Nearest-codeword search through decision-tree learning.
//!
//! A syndrome-decoding instance `Hx = t` becomes a learning problem over the
//! blockwise-parity lift of the uniform distribution on the span of `H`'s
//! rows; a small decision tree for that problem yields a sparse solution.

pub mod dtree;
pub mod error;
pub mod f2;
pub mod gadget;
pub mod instance;
pub mod learners;
pub mod oracle;
pub mod parity;
pub mod reduction;
pub mod rng;
pub mod selftest;
pub mod source;
pub mod span;

pub type Rational = num_rational::BigRational;

pub use dtree::DecisionTree;
pub use error::{Error, Result};
pub use f2::{BitMatrix, BitVector};
pub use gadget::{GadgetOracle, GadgetParams};
pub use instance::{Alpha, Instance, LabeledSet, NcpInstance, SyndromeInstance};
pub use learners::{Learner, LearnerBudget, LearnerKind};
pub use parity::ParityIndexSet;
pub use reduction::{Answer, ReductionConfig};
pub use span::SpanOracle;
