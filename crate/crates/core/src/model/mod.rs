//! Functions, their tails, and GLS generating functions.

mod psi;
mod spec;
mod tail;

pub use psi::{eval_psi, GeneratingFunction, PsiKind, PsiTable, Support};
pub use spec::{tail_of, FunctionSpec, Interval};
pub use tail::{eval_tail, TailEval, TailFunction, TailTable};
