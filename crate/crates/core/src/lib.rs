//! Finite levels of the Sierpiński gasket, their renormalized energy forms,
//! and solvers for `Δu + αu = λ f(x,u)` with zero boundary values.

pub mod cli;
pub mod config;
pub mod embedding;
pub mod energy;
pub mod gasket;
pub mod output;
pub mod problem;
pub mod solver;
pub mod verify;
