//! Finite Boolean-valued model theory.

pub mod algebra;
pub mod bvalued;
pub mod cli;
pub mod dist;
pub mod index;
pub mod io;
pub mod suite;
pub mod finder;
pub mod logic;
pub mod transfer;
pub mod ultrapower;
