//! Provability logic GL: a tableau prover with countermodel extraction and
//! an explicit arithmetical evaluation of refuted formulas.

pub mod arith;
pub mod emitter;
pub mod kripke;
pub mod modal;
pub mod oracle;
pub mod prover;
pub mod scenario;
pub mod tower;

pub use kripke::{TreeFrame, TreeModel, World};
pub use modal::{parse_modal, print_modal, ModalFormat, ModalFormula};
pub use prover::{check_derivation, is_provable, prove, Derivation, Verdict};
