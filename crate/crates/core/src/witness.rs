//! Smooth 1-periodic test functions used by the sweeps and convergence runs.

use std::fmt;
use std::str::FromStr;

use crate::error::QcError;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Witness {
    /// `sin(2πx + 0.3)`; the phase keeps the curvature nonzero at `x = 0`
    /// and `x = 1/2`.
    #[default]
    PhasedSine,
    /// `sin(2πx)`.
    Sine,
    /// `cos(4πx)`.
    DoubleCosine,
    /// `exp(sin(2πx))`, nonzero mean.
    ExpSine,
}

impl Witness {
    pub fn eval<T: Real>(self, x: T) -> T {
        let tau = T::TAU();
        match self {
            Witness::PhasedSine => (tau * x + T::from_f64(0.3)).sin(),
            Witness::Sine => (tau * x).sin(),
            Witness::DoubleCosine => (T::from_int(2) * tau * x).cos(),
            Witness::ExpSine => (tau * x).sin().exp(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Witness::PhasedSine => "sin(2pi x+0.3)",
            Witness::Sine => "sin(2pi x)",
            Witness::DoubleCosine => "cos(4pi x)",
            Witness::ExpSine => "exp(sin(2pi x))",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Witness::PhasedSine => "phased_sine",
            Witness::Sine => "sine",
            Witness::DoubleCosine => "double_cosine",
            Witness::ExpSine => "exp_sine",
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Witness {
    type Err = QcError;

    fn from_str(s: &str) -> Result<Self, QcError> {
        Ok(match s.trim() {
            "phased_sine" => Witness::PhasedSine,
            "sine" => Witness::Sine,
            "double_cosine" => Witness::DoubleCosine,
            "exp_sine" => Witness::ExpSine,
            other => return Err(QcError::Config(format!("unknown witness '{other}'"))),
        })
    }
}
