//! One-dimensional quasicontinuum laboratory.

pub mod acceptance;
pub mod chain;
pub mod cli;
pub mod config;
pub mod consistency;
pub mod error;
pub mod impossibility;
pub mod model;
pub mod partition;
pub mod potential;
pub mod scalar;
pub mod convergence;
pub mod witness;

use num_rational::BigRational;

/// Displacement field in double precision.
pub type Field = chain::PeriodicField<f64>;
/// Linearised operator in double precision.
pub type Operator = model::LinearChainOperator<f64>;
/// Exact scalar.
pub type Rational = BigRational;
/// Linearised operator in exact arithmetic.
pub type ExactOperator = model::LinearChainOperator<Rational>;
/// Pair potential in double precision.
pub type Potential = potential::PairPotential<f64>;
