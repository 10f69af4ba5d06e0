//! Lie point-symmetry engine and verification harness for the potential
//! (3+1)-dimensional CBS equation.

pub mod dsl;
pub mod expr;
pub mod catalog;
pub mod lie;
pub mod par;
pub mod reduction;
pub mod verify;
