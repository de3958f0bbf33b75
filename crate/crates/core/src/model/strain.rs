use crate::chain::PeriodicField;
use crate::error::{QcError, Result};
use crate::scalar::Scalar;

use super::operator::{LinearChainOperator, RowTable, Stencil};

/// Operator written on nearest-neighbour strains: `(L u)_i = (1/ε) Σ_k d_k (Du)_{i+k}`.
///
/// Rows hold the coefficients `d_k` of `ε·L̃`. `bound` is the largest row
/// ℓ¹ norm of `ε·L̃`, so `‖L v‖_∞ ≤ (bound/ε) ‖Dv‖_∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct StrainFormOperator<T> {
    n: usize,
    stencils: Vec<Stencil<T>>,
    row_stencil: Vec<usize>,
    bound: T,
}

impl<T: Scalar> StrainFormOperator<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: i64) -> &Stencil<T> {
        &self.stencils[self.row_stencil[crate::chain::wrap_index(i, self.n) - 1]]
    }

    pub fn bound(&self) -> &T {
        &self.bound
    }

    /// Applies `L̃` to a strain field `Du`.
    pub fn apply_strain(&self, strain: &PeriodicField<T>) -> Result<PeriodicField<T>> {
        strain.check_len(self.n)?;
        let inv_eps = T::from_int(self.n as i64);
        Ok(PeriodicField::from_fn(self.n, |i| {
            let i = i as i64;
            self.row(i)
                .pairs()
                .fold(T::zero(), |acc, (k, d)| acc + d.clone() * strain.at(i + k).clone())
                * inv_eps.clone()
        }))
    }
}

/// Telescopes every row `Σ_o c_o u_{i+o}` into `Σ_k d_k (u_{i+k} − u_{i+k−1})`
/// with `d_k = Σ_{o ≥ k} c_o`.
pub fn to_strain_form<T: Scalar>(op: &LinearChainOperator<T>) -> Result<StrainFormOperator<T>> {
    if op.has_ghost() {
        return Err(QcError::NonzeroGhost(op.ghost().sup_norm().to_f64()));
    }
    op.check_shift_invariant()?;
    let mut table = RowTable::default();
    for row in op.rows() {
        table.push(telescope(row));
    }
    let (stencils, row_stencil) = table.finish();
    let bound = stencils
        .iter()
        .map(|s| s.coeffs().iter().fold(T::zero(), |a, d| a + d.abs()))
        .fold(T::zero(), |m, v| if v > m { v } else { m });
    Ok(StrainFormOperator {
        n: op.n(),
        stencils,
        row_stencil,
        bound,
    })
}

fn telescope<T: Scalar>(row: &Stencil<T>) -> Stencil<T> {
    let offsets = row.offsets();
    let (Some(&lo), Some(&hi)) = (offsets.first(), offsets.last()) else {
        return Stencil::from_pairs(Vec::new());
    };
    let out = (lo + 1..=hi).map(|k| {
        let d = row
            .pairs()
            .filter(|(o, _)| *o >= k)
            .fold(T::zero(), |a, (_, c)| a + c.clone());
        (k, d)
    });
    Stencil::from_pairs(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::ChainConfig;
    use crate::model::{assemble_operator, ModelKind, Moduli};

    #[test]
    fn continuum_strain_row() {
        let cfg = ChainConfig::new(32, 1.0, 2).unwrap();
        let m = Moduli::from_curvatures(vec![1.0, 1.0]);
        let op = assemble_operator(&ModelKind::Continuum, &cfg, None, &m).unwrap();
        let s = to_strain_form(&op).unwrap();
        assert_eq!(s.row(5).offsets(), &[0, 1]);
        assert_eq!(s.row(5).coeffs(), &[5.0, -5.0]);
        assert_eq!(*s.bound(), 10.0);
    }

    #[test]
    fn atomistic_strain_row() {
        let cfg = ChainConfig::new(32, 1.0, 2).unwrap();
        let m = Moduli::from_curvatures(vec![1.0, 1.0]);
        let op = assemble_operator(&ModelKind::Atomistic, &cfg, None, &m).unwrap();
        let s = to_strain_form(&op).unwrap();
        // (-1,-1,4,-1,-1) telescopes to d = (1, 2, -2, -1) on offsets -1..2
        assert_eq!(s.row(1).offsets(), &[-1, 0, 1, 2]);
        assert_eq!(s.row(1).coeffs(), &[1.0, 2.0, -2.0, -1.0]);
        assert_eq!(*s.bound(), 6.0);
    }

    #[test]
    fn rejects_nonzero_row_sums() {
        let cfg = ChainConfig::new(12, 1.0, 2).unwrap();
        let rows = vec![Stencil::from_pairs(vec![(0, 1.0)]); 12];
        let op = LinearChainOperator::from_rows(cfg, rows, PeriodicField::zeros(12)).unwrap();
        assert!(matches!(to_strain_form(&op), Err(QcError::NotShiftInvariant { row: 1, .. })));
    }
}
