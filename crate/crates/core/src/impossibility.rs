//! No symmetric interface block reproduces the atomistic moments.
//!
//! For an interface block of `m` atoms, rows `i ∈ 1..=m` of a coupled
//! second-neighbour operator must satisfy `Σ_j (L_ij − L^a_ij) p(j) = 0` for
//! `p ∈ {1, j, j²}`. Columns `j < 1` carry continuum values and columns
//! `j > m` atomistic values; the block entries are unknown. This module
//! builds that system exactly, produces the weighted combination that
//! cancels every unknown and leaves `−2`, and measures how far the best
//! least-squares block misses.

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::consistency::Moment;
use crate::error::{QcError, Result};
use crate::model::InterfaceStencil;
use crate::scalar::Scalar;
use crate::Rational;

/// Options of [`ConstraintSystem::with_options`].
#[derive(Debug, Clone, PartialEq)]
pub struct SystemOptions {
    /// Restrict the unknowns to symmetric blocks.
    pub symmetric: bool,
    /// Moment equations per row, in this order.
    pub moments: Vec<Moment>,
    /// Columns `1 − reach ..= m + reach` enter the sums.
    pub reach: usize,
}

impl Default for SystemOptions {
    fn default() -> Self {
        Self {
            symmetric: true,
            moments: Moment::ALL.to_vec(),
            reach: 2,
        }
    }
}

/// Linear system `A x + c = 0` for the block entries `x`, exact and in
/// second-neighbour units (continuum row `(−4, 8, −4)`, atomistic row
/// `(−1, 0, 2, 0, −1)`).
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    m: usize,
    options: SystemOptions,
    unknowns: Vec<(usize, usize)>,
    equations: Vec<(usize, Moment)>,
    matrix: Vec<Vec<Rational>>,
    offset: Vec<Rational>,
}

fn atomistic_entry(offset: i64) -> i64 {
    match offset {
        0 => 2,
        2 | -2 => -1,
        _ => 0,
    }
}

fn continuum_entry(offset: i64) -> i64 {
    match offset {
        0 => 8,
        1 | -1 => -4,
        _ => 0,
    }
}

fn int(v: i64) -> Rational {
    Rational::from_int(v)
}

impl ConstraintSystem {
    /// Symmetric blocks, all three moments, reach 2.
    pub fn new(m: usize) -> Result<Self> {
        Self::with_options(m, SystemOptions::default())
    }

    pub fn with_options(m: usize, options: SystemOptions) -> Result<Self> {
        if m == 0 {
            return Err(QcError::InterfaceWidth);
        }
        if options.reach < 2 {
            return Err(QcError::Config(format!(
                "interface reach {} is below the second-neighbour range",
                options.reach
            )));
        }
        let unknowns: Vec<(usize, usize)> = (1..=m)
            .flat_map(|i| {
                let lo = if options.symmetric { i } else { 1 };
                (lo..=m).map(move |j| (i, j))
            })
            .collect();
        let index = |i: usize, j: usize| {
            let key = if options.symmetric { (i.min(j), i.max(j)) } else { (i, j) };
            unknowns.iter().position(|&u| u == key).expect("block entry")
        };
        let (mi, reach) = (m as i64, options.reach as i64);
        let mut equations = Vec::with_capacity(m * options.moments.len());
        let mut matrix = Vec::with_capacity(equations.capacity());
        let mut offset = Vec::with_capacity(equations.capacity());
        for i in 1..=mi {
            for &p in &options.moments {
                let mut row = vec![Rational::zero(); unknowns.len()];
                let mut c = Rational::zero();
                for j in 1 - reach..=mi + reach {
                    let pj = int(j.pow(p.power()));
                    let reference = atomistic_entry(j - i);
                    if j < 1 {
                        c += int(continuum_entry(j - i) - reference) * &pj;
                    } else if j > mi {
                        // atomistic on both sides
                    } else {
                        row[index(i as usize, j as usize)] += &pj;
                        c -= int(reference) * &pj;
                    }
                }
                equations.push((i as usize, p));
                matrix.push(row);
                offset.push(c);
            }
        }
        Ok(Self {
            m,
            options,
            unknowns,
            equations,
            matrix,
            offset,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn options(&self) -> &SystemOptions {
        &self.options
    }

    /// Block positions `(i, j)` of the unknowns, `i ≤ j` when symmetric.
    pub fn unknowns(&self) -> &[(usize, usize)] {
        &self.unknowns
    }

    /// `(row, moment)` of every equation.
    pub fn equations(&self) -> &[(usize, Moment)] {
        &self.equations
    }

    pub fn matrix(&self) -> &[Vec<Rational>] {
        &self.matrix
    }

    /// Constant term `c` of `A x + c = 0`.
    pub fn offset(&self) -> &[Rational] {
        &self.offset
    }

    /// Right-hand side `b = −c` of `A x = b`.
    pub fn rhs(&self) -> Vec<Rational> {
        self.offset.iter().map(|c| -c.clone()).collect()
    }

    /// Unknown vector of a block.
    pub fn unknowns_of<T: Scalar>(&self, block: &InterfaceStencil<T>) -> Result<Vec<T>> {
        if block.m() != self.m {
            return Err(QcError::StencilSize {
                expected: self.m,
                got: block.m(),
            });
        }
        if self.options.symmetric && !block.is_symmetric() {
            return Err(QcError::Config("symmetric system needs a symmetric block".into()));
        }
        Ok(self
            .unknowns
            .iter()
            .map(|&(i, j)| block.get(i, j).clone())
            .collect())
    }

    /// Block holding the unknown vector `x`.
    pub fn block_of<T: Scalar>(&self, x: &[T]) -> Result<InterfaceStencil<T>> {
        if x.len() != self.unknowns.len() {
            return Err(QcError::LengthMismatch {
                expected: self.unknowns.len(),
                got: x.len(),
            });
        }
        let m = self.m;
        let mut block = vec![T::zero(); m * m];
        for (&(i, j), v) in self.unknowns.iter().zip(x) {
            block[(i - 1) * m + (j - 1)] = v.clone();
            if self.options.symmetric {
                block[(j - 1) * m + (i - 1)] = v.clone();
            }
        }
        InterfaceStencil::new_unchecked(m, block)
    }

    /// Exact residual vector `A x + c` of a block.
    pub fn evaluate(&self, block: &InterfaceStencil<Rational>) -> Result<Vec<Rational>> {
        let x = self.unknowns_of(block)?;
        Ok(self
            .matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, c)| row.iter().zip(&x).fold(c.clone(), |acc, (a, v)| acc + a * v))
            .collect())
    }

    fn float_parts(&self) -> (DMatrix<f64>, DVector<f64>) {
        let rows = self.equations.len();
        let cols = self.unknowns.len();
        let a = DMatrix::from_fn(rows, cols, |r, c| Scalar::to_f64(&self.matrix[r][c]));
        let b = DVector::from_fn(rows, |r, _| -Scalar::to_f64(&self.offset[r]));
        (a, b)
    }

    /// Least-squares block and the Euclidean norm of its residual `A x + c`.
    pub fn least_squares(&self) -> Result<(f64, InterfaceStencil<f64>)> {
        let (a, b) = self.float_parts();
        let svd = a.clone().svd(true, true);
        let x = svd
            .solve(&b, 1e-12)
            .map_err(|e| QcError::RankDeficient(e.to_string()))?;
        let residual = (&a * &x - &b).norm();
        let block = self.block_of(x.as_slice())?;
        Ok((residual, block))
    }
}

/// Exact weighted combination of a constraint system.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub m: usize,
    /// One weight per equation, in [`ConstraintSystem::equations`] order.
    pub weights: Vec<Rational>,
    /// `Σ w_k c_k`; the unknowns cancel, so `Σ w_k (A x + c)_k` equals this
    /// for every block.
    pub value: Rational,
}

impl Certificate {
    pub fn weight_norm(&self) -> f64 {
        self.weights
            .iter()
            .map(|w| Scalar::to_f64(w).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `|value| / ‖w‖₂`, a lower bound on `‖A x + c‖₂` over all blocks.
    pub fn bound(&self) -> f64 {
        Scalar::to_f64(&self.value.abs()) / self.weight_norm()
    }

    pub fn certifies(&self) -> bool {
        !self.value.is_zero()
    }
}

/// Weights `i²` on the `j`-moment and `−i` on the `j²`-moment of row `i`,
/// zero on row sums.
fn weights(system: &ConstraintSystem) -> Vec<Rational> {
    system
        .equations()
        .iter()
        .map(|&(i, p)| {
            let i = i as i64;
            match p {
                Moment::Constant => Rational::zero(),
                Moment::Linear => int(i * i),
                Moment::Quadratic => int(-i),
            }
        })
        .collect()
}

/// Applies the cancelling weights to `system` in exact arithmetic.
///
/// Fails with [`QcError::CertificateCancellation`] if some unknown keeps a
/// nonzero coefficient.
pub fn certificate_for(system: &ConstraintSystem) -> Result<Certificate> {
    if !system.options().symmetric {
        return Err(QcError::CertificateCancellation(
            "the weights only cancel symmetric unknowns".into(),
        ));
    }
    let w = weights(system);
    for (k, &(i, j)) in system.unknowns().iter().enumerate() {
        let coef = system
            .matrix()
            .iter()
            .zip(&w)
            .fold(Rational::zero(), |acc, (row, wk)| acc + &row[k] * wk);
        if !coef.is_zero() {
            return Err(QcError::CertificateCancellation(format!(
                "unknown ({i},{j}) keeps coefficient {coef}"
            )));
        }
    }
    let value = system
        .offset()
        .iter()
        .zip(&w)
        .fold(Rational::zero(), |acc, (c, wk)| acc + c * wk);
    Ok(Certificate {
        m: system.m(),
        weights: w,
        value,
    })
}

/// Certificate of the symmetric reach-2 system of width `m`; its value is −2.
pub fn certificate(m: usize) -> Result<Certificate> {
    certificate_for(&ConstraintSystem::new(m)?)
}

/// Smallest `‖A x + c‖₂` over symmetric blocks, with the minimiser.
pub fn min_residual(m: usize) -> Result<(f64, InterfaceStencil<f64>)> {
    ConstraintSystem::new(m)?.least_squares()
}

/// Same as [`min_residual`] over arbitrary (nonsymmetric) blocks.
pub fn nonsymmetric_min_residual(m: usize) -> Result<(f64, InterfaceStencil<f64>)> {
    ConstraintSystem::with_options(
        m,
        SystemOptions {
            symmetric: false,
            ..SystemOptions::default()
        },
    )?
    .least_squares()
}

/// Force-based block: the `⌊m/2⌋` continuum-side rows keep the continuum
/// stencil, the rest the atomistic one.
pub fn qcf_block(m: usize) -> Result<InterfaceStencil<Rational>> {
    let split = (m / 2) as i64;
    let mi = m as i64;
    let mut block = Vec::with_capacity(m * m);
    for i in 1..=mi {
        for j in 1..=mi {
            let v = if i <= split {
                continuum_entry(j - i)
            } else {
                atomistic_entry(j - i)
            };
            block.push(int(v));
        }
    }
    InterfaceStencil::new_unchecked(m, block)
}

/// Exact residual norm² of the force-based block in the nonsymmetric system.
/// Zero once the atomistic rows no longer reach across the block (`m ≥ 4`).
pub fn qcf_witness_residual(m: usize) -> Result<Rational> {
    let system = ConstraintSystem::with_options(
        m,
        SystemOptions {
            symmetric: false,
            ..SystemOptions::default()
        },
    )?;
    let r = system.evaluate(&qcf_block(m)?)?;
    Ok(r.iter().fold(Rational::zero(), |acc, v| acc + v * v))
}

/// One line of a certification run.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifyRecord {
    pub m: usize,
    pub value: Rational,
    pub min_residual: f64,
    pub bound: f64,
}

impl CertifyRecord {
    pub fn csv_header() -> &'static str {
        "m,value,min_residual,bound"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.12e},{:.12e}",
            self.m, self.value, self.min_residual, self.bound
        )
    }
}

/// Certificate and least-squares residual for every width in `ms`.
pub fn certify_range(ms: &[usize]) -> Result<Vec<CertifyRecord>> {
    ms.par_iter()
        .map(|&m| {
            let system = ConstraintSystem::new(m)?;
            let cert = certificate_for(&system)?;
            let (min_residual, _) = system.least_squares()?;
            Ok(CertifyRecord {
                m,
                bound: cert.bound(),
                value: cert.value,
                min_residual,
            })
        })
        .collect()
}

/// `2 / sqrt(Σ_{i≤m} (i⁴ + i²))`, the certificate bound in closed form.
pub fn closed_form_bound(m: usize) -> f64 {
    let s: u64 = (1..=m as u64).map(|i| i.pow(4) + i * i).sum();
    2.0 / (s as f64).sqrt()
}

/// True when every entry of the matrix is an integer.
pub fn is_integral(system: &ConstraintSystem) -> bool {
    system
        .matrix()
        .iter()
        .flatten()
        .chain(system.offset())
        .all(|v| v.denom().is_one())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        let s = ConstraintSystem::new(4).unwrap();
        assert_eq!(s.unknowns().len(), 10);
        assert_eq!(s.equations().len(), 12);
        let s = ConstraintSystem::new(1).unwrap();
        assert_eq!((s.unknowns().len(), s.equations().len()), (1, 3));
        assert!(matches!(ConstraintSystem::new(0), Err(QcError::InterfaceWidth)));
    }

    #[test]
    fn integral_entries() {
        assert!(is_integral(&ConstraintSystem::new(3).unwrap()));
    }

    #[test]
    fn certificate_value_is_minus_two() {
        for m in 1..=6 {
            let c = certificate(m).unwrap();
            assert_eq!(c.value, Rational::from_int(-2), "m = {m}");
            assert!(c.certifies());
            assert!((c.bound() - closed_form_bound(m)).abs() < 1e-15);
        }
    }

    #[test]
    fn m4_bound() {
        assert!((closed_form_bound(4) - 2.0 / 384f64.sqrt()).abs() < 1e-16);
        assert!((closed_form_bound(2) - 2.0 / 22f64.sqrt()).abs() < 1e-16);
    }

    #[test]
    fn nonsymmetric_system_refuses_certificate() {
        let s = ConstraintSystem::with_options(
            3,
            SystemOptions {
                symmetric: false,
                ..SystemOptions::default()
            },
        )
        .unwrap();
        assert!(matches!(
            certificate_for(&s),
            Err(QcError::CertificateCancellation(_))
        ));
    }

    #[test]
    fn qcf_witness() {
        for m in 4..=8 {
            assert!(qcf_witness_residual(m).unwrap().is_zero(), "m = {m}");
        }
        assert!(!qcf_witness_residual(3).unwrap().is_zero());
    }

    #[test]
    fn block_roundtrip() {
        let s = ConstraintSystem::new(3).unwrap();
        let x: Vec<f64> = (1..=6).map(f64::from).collect();
        let b = s.block_of(&x).unwrap();
        assert!(b.is_symmetric());
        assert_eq!(s.unknowns_of(&b).unwrap(), x);
    }

    #[test]
    fn wider_reach_adds_only_zero_columns() {
        let two = ConstraintSystem::new(5).unwrap();
        let four = ConstraintSystem::with_options(
            5,
            SystemOptions {
                reach: 4,
                ..SystemOptions::default()
            },
        )
        .unwrap();
        assert_eq!(two.matrix(), four.matrix());
        assert_eq!(two.offset(), four.offset());
    }
}
