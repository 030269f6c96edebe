//! Exact computations with restricted enveloping algebras of unipotent
//! radicals, divided-power algebras and their modules over finite fields:
//! endotriviality certificates, Jordan types at p-points, nullcone equations
//! and connectedness, and the SL₂ Weyl-module classification.

pub mod algebra;
pub mod endotest;
pub mod exactfield;
pub mod modrep;
pub mod nullcone;
pub mod rootdata;
pub mod sl2weyl;

pub use exactfield::{Field, JordanType, Matrix};
