pub mod cli;
pub mod diagnostics;
pub mod domains;
pub mod energy;
pub mod error;
pub mod linear;
pub mod multipliers;
pub mod nonlinear;
pub mod operators;
pub mod pool;
pub mod quadrature;
pub mod spectral;
pub mod suite;
