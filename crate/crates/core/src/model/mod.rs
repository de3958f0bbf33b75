//! Atomistic, continuum and coupled chain models.
//!
//! Energy-based models are described as a list of bond terms
//! `w · ε · φ(rF + (c_a u_a + c_b u_b)/ε)`; energies, ghost forces and
//! Hessians are all read off that list. The force-based coupling and custom
//! interface stencils are assembled row by row.

mod assembly;
mod checks;
mod operator;
mod strain;
mod terms;

use std::fmt;
use std::str::FromStr;

pub use assembly::{
    assemble_operator, assemble_with_potential, atomistic_stencil, continuum_stencil,
};
pub use checks::{ghost_gradient_check, hessian_consistency_check};
pub use operator::{LinearChainOperator, Stencil};
pub use strain::{to_strain_form, StrainFormOperator};
pub use terms::total_energy;

use crate::error::{QcError, Result};
use crate::potential::PairPotential;
use crate::scalar::{Real, Scalar};

/// Symmetric `m×m` block of second-neighbour coefficients on the interface,
/// in dimensionless L₂ units. Local index 1 is the atom deepest in the
/// continuum, index `m` the one deepest in the atomistic region.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceStencil<T> {
    m: usize,
    block: Vec<T>,
}

impl<T: Scalar> InterfaceStencil<T> {
    /// Row-major block; rejects non-square or asymmetric input.
    pub fn new(m: usize, block: Vec<T>) -> Result<Self> {
        let s = Self::new_unchecked(m, block)?;
        for i in 1..=m {
            for j in i + 1..=m {
                if s.get(i, j) != s.get(j, i) {
                    return Err(QcError::StencilAsymmetric(i, j));
                }
            }
        }
        Ok(s)
    }

    /// Same as [`new`](Self::new) without the symmetry requirement; used by
    /// the diagnostics that drop symmetry on purpose.
    pub fn new_unchecked(m: usize, block: Vec<T>) -> Result<Self> {
        if m == 0 {
            return Err(QcError::InterfaceWidth);
        }
        if block.len() != m * m {
            return Err(QcError::StencilSize {
                expected: m,
                got: (block.len() as f64).sqrt() as usize,
            });
        }
        Ok(Self { m, block })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Entry at local `(i, j)`, both 1-based.
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.block[(i - 1) * self.m + (j - 1)]
    }

    pub fn is_symmetric(&self) -> bool {
        (1..=self.m).all(|i| (i + 1..=self.m).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> InterfaceStencil<U> {
        InterfaceStencil {
            m: self.m,
            block: self.block.iter().map(f).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind<T> {
    Atomistic,
    /// Cauchy–Born continuum on every atom.
    Continuum,
    /// Energy-based coupling with per-atom energy splitting.
    Qce,
    /// Quasinonlocal coupling with per-bond treatment.
    Qnl,
    /// Force-based coupling: each atom keeps its native force law.
    Qcf,
    /// Nearest-neighbour term everywhere, prescribed second-neighbour block
    /// on each interface.
    CustomQc(InterfaceStencil<T>),
}

impl<T> ModelKind<T> {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Atomistic => "atomistic",
            ModelKind::Continuum => "continuum",
            ModelKind::Qce => "qce",
            ModelKind::Qnl => "qnl",
            ModelKind::Qcf => "qcf",
            ModelKind::CustomQc(_) => "custom",
        }
    }

    pub fn is_energy_based(&self) -> bool {
        matches!(
            self,
            ModelKind::Atomistic | ModelKind::Continuum | ModelKind::Qce | ModelKind::Qnl
        )
    }

    pub fn needs_partition(&self) -> bool {
        !matches!(self, ModelKind::Atomistic | ModelKind::Continuum)
    }
}

impl<T> fmt::Display for ModelKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl<T> FromStr for ModelKind<T> {
    type Err = QcError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "atomistic" | "a" => ModelKind::Atomistic,
            "continuum" | "c" => ModelKind::Continuum,
            "qce" => ModelKind::Qce,
            "qnl" => ModelKind::Qnl,
            "qcf" => ModelKind::Qcf,
            other => return Err(QcError::Config(format!("unknown model '{other}'"))),
        })
    }
}

/// Per-shell linearisation data: `curvature[r-1] = φ''(rF)` and
/// `slope[r-1] = φ'(rF)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Moduli<T> {
    curvature: Vec<T>,
    slope: Vec<T>,
}

impl<T: Scalar> Moduli<T> {
    pub fn new(curvature: Vec<T>, slope: Vec<T>) -> Self {
        assert_eq!(curvature.len(), slope.len(), "one slope per shell");
        Self { curvature, slope }
    }

    /// Curvatures only; slopes (hence ghost forces) are zero.
    pub fn from_curvatures(curvature: Vec<T>) -> Self {
        let slope = vec![T::zero(); curvature.len()];
        Self { curvature, slope }
    }

    pub fn shells(&self) -> usize {
        self.curvature.len()
    }

    /// `φ''(rF)` for shell `r` (1-based).
    pub fn curvature(&self, r: usize) -> &T {
        &self.curvature[r - 1]
    }

    /// `φ'(rF)` for shell `r` (1-based).
    pub fn slope(&self, r: usize) -> &T {
        &self.slope[r - 1]
    }
}

impl<T: Real> Moduli<T> {
    pub fn from_potential(pot: &PairPotential<T>, deformation: T, shells: usize) -> Result<Self> {
        let mut curvature = Vec::with_capacity(shells);
        let mut slope = Vec::with_capacity(shells);
        for r in 1..=shells {
            let s = T::from_int(r as i64) * deformation;
            curvature.push(pot.curvature(s)?);
            slope.push(pot.slope(s)?);
        }
        Ok(Self { curvature, slope })
    }
}
