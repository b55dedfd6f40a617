pub mod algebra;
pub mod numeric;
pub mod signals;
pub mod operators;
pub mod bounds;
pub mod realization;
pub mod harness;
