use std::fmt;

use crate::chain::{wrap_index, ChainConfig, PeriodicField};
use crate::error::{QcError, Result};
use crate::scalar::Scalar;

/// One row of a lattice operator: sorted offsets with their coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil<T> {
    offsets: Vec<i64>,
    coeffs: Vec<T>,
}

impl<T: Scalar> Stencil<T> {
    /// Builds a stencil from `(offset, coefficient)` pairs. Repeated offsets
    /// are summed and exact zeros dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, T)>) -> Self {
        let mut v: Vec<(i64, T)> = pairs.into_iter().collect();
        v.sort_by_key(|(o, _)| *o);
        let mut offsets: Vec<i64> = Vec::with_capacity(v.len());
        let mut coeffs: Vec<T> = Vec::with_capacity(v.len());
        for (o, c) in v {
            if offsets.last() == Some(&o) {
                let last = coeffs.last_mut().expect("parallel vectors");
                *last = last.clone() + c;
            } else {
                offsets.push(o);
                coeffs.push(c);
            }
        }
        let (offsets, coeffs) = offsets
            .into_iter()
            .zip(coeffs)
            .filter(|(_, c)| !c.is_zero())
            .unzip();
        Self { offsets, coeffs }
    }

    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn pairs(&self) -> impl Iterator<Item = (i64, &T)> {
        self.offsets.iter().copied().zip(self.coeffs.iter())
    }

    /// Coefficient at `offset`, zero when absent.
    pub fn coeff(&self, offset: i64) -> T {
        match self.offsets.binary_search(&offset) {
            Ok(k) => self.coeffs[k].clone(),
            Err(_) => T::zero(),
        }
    }

    pub fn sum(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |a, c| a + c.clone())
    }

    /// `Σ c_o · p(offset_base + o)`, used by the polynomial moment tests.
    pub fn moment(&self, base: i64, power: u32) -> T {
        self.pairs().fold(T::zero(), |acc, (o, c)| {
            acc + c.clone() * T::from_int((base + o).pow(power))
        })
    }

    pub fn max_reach(&self) -> i64 {
        self.offsets.iter().map(|o| o.abs()).max().unwrap_or(0)
    }

    pub fn scale(&self, a: &T) -> Self {
        Self::from_pairs(self.pairs().map(|(o, c)| (o, a.clone() * c.clone())))
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: &T, other: &Self, b: &T) -> Self {
        Self::from_pairs(
            self.pairs()
                .map(|(o, c)| (o, a.clone() * c.clone()))
                .chain(other.pairs().map(|(o, c)| (o, b.clone() * c.clone()))),
        )
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Stencil<U> {
        Stencil::from_pairs(self.pairs().map(|(o, c)| (o, f(c))))
    }
}

impl<T: Scalar> fmt::Display for Stencil<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.pairs().map(|(o, c)| format!("{o:+}:{c}")).collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

/// Interns identical rows so interior regions share one stencil.
#[derive(Debug)]
pub(crate) struct RowTable<T> {
    stencils: Vec<Stencil<T>>,
    rows: Vec<usize>,
}

impl<T> Default for RowTable<T> {
    fn default() -> Self {
        Self {
            stencils: Vec::new(),
            rows: Vec::new(),
        }
    }
}

impl<T: Scalar> RowTable<T> {
    pub(crate) fn push(&mut self, s: Stencil<T>) {
        // recent rows are the most likely match
        let hit = self.stencils.iter().rposition(|t| *t == s);
        let k = hit.unwrap_or_else(|| {
            self.stencils.push(s);
            self.stencils.len() - 1
        });
        self.rows.push(k);
    }

    pub(crate) fn finish(self) -> (Vec<Stencil<T>>, Vec<usize>) {
        (self.stencils, self.rows)
    }
}

/// Linearised lattice operator `u ↦ (1/ε²) Σ_o c_o u_{i+o} + g_i`.
///
/// Row coefficients are stored in ε²-scaled units, so interface blocks are
/// ε-independent; the `1/ε²` factor is applied by [`apply`](Self::apply).
/// `ghost` is the affine force at `u = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearChainOperator<T> {
    config: ChainConfig<T>,
    stencils: Vec<Stencil<T>>,
    row_stencil: Vec<usize>,
    ghost: PeriodicField<T>,
}

impl<T: Scalar> LinearChainOperator<T> {
    pub fn from_rows(
        config: ChainConfig<T>,
        rows: Vec<Stencil<T>>,
        ghost: PeriodicField<T>,
    ) -> Result<Self> {
        let n = config.n();
        if rows.len() != n {
            return Err(QcError::LengthMismatch {
                expected: n,
                got: rows.len(),
            });
        }
        ghost.check_len(n)?;
        let mut table = RowTable::default();
        for r in rows {
            table.push(r);
        }
        let (stencils, row_stencil) = table.finish();
        Ok(Self {
            config,
            stencils,
            row_stencil,
            ghost,
        })
    }

    pub(crate) fn from_table(
        config: ChainConfig<T>,
        table: RowTable<T>,
        ghost: PeriodicField<T>,
    ) -> Self {
        let (stencils, row_stencil) = table.finish();
        debug_assert_eq!(row_stencil.len(), config.n());
        Self {
            config,
            stencils,
            row_stencil,
            ghost,
        }
    }

    pub fn config(&self) -> &ChainConfig<T> {
        &self.config
    }

    pub fn n(&self) -> usize {
        self.config.n()
    }

    /// Row of atom `i` (any integer label; wraps periodically).
    pub fn row(&self, i: i64) -> &Stencil<T> {
        &self.stencils[self.row_stencil[wrap_index(i, self.n()) - 1]]
    }

    pub fn rows(&self) -> impl Iterator<Item = &Stencil<T>> {
        self.row_stencil.iter().map(|&k| &self.stencils[k])
    }

    /// Number of distinct row stencils stored.
    pub fn distinct_rows(&self) -> usize {
        self.stencils.len()
    }

    pub fn ghost(&self) -> &PeriodicField<T> {
        &self.ghost
    }

    pub fn has_ghost(&self) -> bool {
        self.ghost.iter().any(|g| !g.is_zero())
    }

    pub fn max_reach(&self) -> i64 {
        self.stencils.iter().map(Stencil::max_reach).max().unwrap_or(0)
    }

    /// Linear part only: `(1/ε²) Σ_o c_o u_{i+o}`.
    pub fn apply_linear(&self, u: &PeriodicField<T>) -> Result<PeriodicField<T>> {
        let inv_eps_sq = T::from_int((self.n() * self.n()) as i64);
        Ok(self.apply_scaled(u)?.scale(&inv_eps_sq))
    }

    /// Linear part in ε²-units: `Σ_o c_o u_{i+o}`.
    pub fn apply_scaled(&self, u: &PeriodicField<T>) -> Result<PeriodicField<T>> {
        u.check_len(self.n())?;
        Ok(PeriodicField::from_fn(self.n(), |i| {
            let i = i as i64;
            // difference form: Σ c_o (u_{i+o} − u_i) + u_i Σ c_o keeps the
            // O(ε²) cancellation out of the 1/ε² amplification
            let ui = u.at(i).clone();
            let row = self.row(i);
            let s = row.pairs().fold(T::zero(), |acc, (o, c)| {
                acc + c.clone() * (u.at(i + o).clone() - ui.clone())
            });
            s + row.sum() * ui
        }))
    }

    /// `(L u)_i = (1/ε²) Σ_o c_o u_{i+o} + g_i`.
    pub fn apply(&self, u: &PeriodicField<T>) -> Result<PeriodicField<T>> {
        self.apply_linear(u)?.add(&self.ghost)
    }

    /// Entry `(i, j)` of the periodic matrix in ε²-units.
    pub fn entry(&self, i: i64, j: i64) -> T {
        let n = self.n();
        let jw = wrap_index(j, n);
        self.row(i)
            .pairs()
            .filter(|(o, _)| wrap_index(i + o, n) == jw)
            .fold(T::zero(), |acc, (_, c)| acc + c.clone())
    }

    /// Dense periodic realisation in ε²-units, row-major, `[i-1][j-1]`.
    pub fn dense(&self) -> Vec<Vec<T>> {
        let n = self.n();
        let mut m = vec![vec![T::zero(); n]; n];
        for i in 1..=n {
            for (o, c) in self.row(i as i64).pairs() {
                let j = wrap_index(i as i64 + o, n);
                m[i - 1][j - 1] = m[i - 1][j - 1].clone() + c.clone();
            }
        }
        m
    }

    /// `max |L_ij − L_ji|` over the periodic matrix (ε²-units).
    pub fn symmetry_defect(&self) -> T {
        let n = self.n();
        let mut worst = T::zero();
        for i in 1..=n as i64 {
            for &o in self.row(i).offsets() {
                let j = i + o;
                let d = (self.entry(i, j) - self.entry(j, i)).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Fails on the first row whose coefficients do not sum to zero (exactly
    /// for rationals, up to rounding relative to the row's ℓ¹ norm for floats).
    pub fn check_shift_invariant(&self) -> Result<()> {
        for (k, row) in self.rows().enumerate() {
            let s = row.sum();
            let scale = row.coeffs().iter().fold(T::zero(), |a, c| a + c.abs());
            if s.abs() > T::rounding_tolerance() * scale {
                return Err(QcError::NotShiftInvariant {
                    row: k + 1,
                    sum: s.to_f64(),
                });
            }
        }
        Ok(())
    }

    /// `a·self + b·other` on the same chain, ghosts included.
    pub fn combine(&self, a: &T, other: &Self, b: &T) -> Result<Self> {
        if self.n() != other.n() {
            return Err(QcError::ChainMismatch(self.n(), other.n()));
        }
        let mut table = RowTable::default();
        for (r, s) in self.rows().zip(other.rows()) {
            table.push(r.combine(a, s, b));
        }
        let ghost = self.ghost.combine(a, &other.ghost, b)?;
        Ok(Self::from_table(self.config.clone(), table, ghost))
    }

    /// Matrix transpose (the ghost field is carried over unchanged).
    pub fn transpose(&self) -> Self {
        let n = self.n();
        let mut pairs: Vec<Vec<(i64, T)>> = vec![Vec::new(); n];
        for i in 1..=n as i64 {
            for (o, c) in self.row(i).pairs() {
                let j = wrap_index(i + o, n);
                pairs[j - 1].push((-o, c.clone()));
            }
        }
        let mut table = RowTable::default();
        for p in pairs {
            table.push(Stencil::from_pairs(p));
        }
        Self::from_table(self.config.clone(), table, self.ghost.clone())
    }

    /// Same operator without its affine term.
    pub fn without_ghost(&self) -> Self {
        Self {
            ghost: PeriodicField::zeros(self.n()),
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_merges_and_drops_zeros() {
        let s = Stencil::from_pairs(vec![(1, 2.0), (-1, 1.0), (1, -2.0), (0, 3.0)]);
        assert_eq!(s.offsets(), &[-1, 0]);
        assert_eq!(s.coeff(1), 0.0);
        assert_eq!(s.coeff(0), 3.0);
        assert_eq!(s.sum(), 4.0);
    }

    #[test]
    fn rows_are_interned() {
        let cfg = ChainConfig::new(16, 1.0, 2).unwrap();
        let row = Stencil::from_pairs(vec![(-1, -1.0), (0, 2.0), (1, -1.0)]);
        let op =
            LinearChainOperator::from_rows(cfg, vec![row; 16], PeriodicField::zeros(16)).unwrap();
        assert_eq!(op.distinct_rows(), 1);
        assert_eq!(op.symmetry_defect(), 0.0);
        assert!(op.check_shift_invariant().is_ok());
        let d = op.dense();
        assert_eq!(d[0][15], -1.0);
        assert_eq!(d[15][0], -1.0);
        assert_eq!(op.transpose(), op);
    }

    #[test]
    fn asymmetric_transpose() {
        let cfg = ChainConfig::new(12, 1.0, 2).unwrap();
        let mut rows = vec![Stencil::from_pairs(vec![(-1, -1.0), (0, 1.0)]); 12];
        rows[3] = Stencil::from_pairs(vec![(-2, -1.0), (0, 1.0)]);
        let op = LinearChainOperator::from_rows(cfg, rows, PeriodicField::zeros(12)).unwrap();
        let t = op.transpose();
        for i in 1..=12 {
            for j in 1..=12 {
                assert_eq!(op.entry(i, j), t.entry(j, i));
            }
        }
        assert_eq!(op.symmetry_defect(), 1.0);
    }
}
