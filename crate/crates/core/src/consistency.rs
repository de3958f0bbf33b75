//! Consistency of coupled operators against the atomistic reference:
//! polynomial moment tests, smooth-field sweeps and ghost-force scaling.

use std::fmt;

use rayon::prelude::*;

use crate::chain::{sample_field, ChainConfig, PeriodicField};
use crate::convergence::{fit_slope, SlopeFit};
use crate::error::{QcError, Result};
use crate::model::{assemble_with_potential, LinearChainOperator, ModelKind, Stencil};
use crate::partition::{Boundary, RegionPartition};
use crate::potential::PairPotential;
use crate::scalar::{Real, Scalar};
use crate::witness::Witness;

/// Test polynomial `p(j)` of a moment test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Moment {
    Constant,
    Linear,
    Quadratic,
}

impl Moment {
    pub const ALL: [Moment; 3] = [Moment::Constant, Moment::Linear, Moment::Quadratic];

    pub fn power(self) -> u32 {
        match self {
            Moment::Constant => 0,
            Moment::Linear => 1,
            Moment::Quadratic => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Moment::Constant => "1",
            Moment::Linear => "j",
            Moment::Quadratic => "j^2",
        }
    }
}

impl fmt::Display for Moment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Row-wise residuals `ρ_i^(p) = Σ_j (L − L^ref)_{ij} p(j)` in ε²-units,
/// with `j = i + offset` unwrapped.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport<T> {
    differences: Vec<Stencil<T>>,
    residuals: Vec<[T; 3]>,
}

impl<T: Scalar> MomentReport<T> {
    pub fn n(&self) -> usize {
        self.residuals.len()
    }

    /// Residual of atom `i ∈ 1..=N`.
    pub fn residual(&self, i: usize, p: Moment) -> &T {
        &self.residuals[i - 1][p.power() as usize]
    }

    pub fn row(&self, i: usize) -> &[T; 3] {
        &self.residuals[i - 1]
    }

    /// Difference stencil `L − L^ref` of atom `i`.
    pub fn difference(&self, i: usize) -> &Stencil<T> {
        &self.differences[i - 1]
    }

    pub fn max_abs(&self, p: Moment) -> T {
        self.residuals
            .iter()
            .map(|r| r[p.power() as usize].abs())
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    /// Atoms whose `p`-residual exceeds `tol` in magnitude.
    pub fn nonzero_rows(&self, p: Moment, tol: &T) -> Vec<usize> {
        (1..=self.n())
            .filter(|&i| self.residual(i, p).abs() > *tol)
            .collect()
    }

    /// Moments of the block rows at `boundary` measured in the block's local
    /// frame, where column `j` is the local label (1 deepest in the continuum).
    /// Row `l − 1` of the result belongs to block atom `l`.
    pub fn interface_residuals(&self, boundary: &Boundary) -> Vec<[T; 3]> {
        let dir = boundary.direction();
        let n = self.n() as i64;
        (1..=boundary.width() as i64)
            .map(|l| {
                let atom = boundary.block_atom(l);
                let d = &self.differences[((atom - 1).rem_euclid(n)) as usize];
                let mut out = [T::zero(), T::zero(), T::zero()];
                for (o, c) in d.pairs() {
                    let j = l + dir * o;
                    let mut pj = T::one();
                    for slot in out.iter_mut() {
                        *slot = slot.clone() + c.clone() * pj.clone();
                        pj = pj * T::from_int(j);
                    }
                }
                out
            })
            .collect()
    }
}

/// Moment tests of `op` against `reference`.
///
/// The tests are local statements about rows, so every difference stencil
/// must fit well inside the chain: `N ≥ 4 (reach + 4)`.
pub fn moment_residuals<T: Scalar>(
    op: &LinearChainOperator<T>,
    reference: &LinearChainOperator<T>,
) -> Result<MomentReport<T>> {
    let n = op.n();
    if reference.n() != n {
        return Err(QcError::ChainMismatch(n, reference.n()));
    }
    let reach = op.max_reach().max(reference.max_reach()) as usize;
    let needed = 4 * (reach + 4);
    if n < needed {
        return Err(QcError::MomentRange {
            n,
            reach,
            min: needed,
        });
    }
    let minus_one = -T::one();
    let differences: Vec<Stencil<T>> = (1..=n as i64)
        .map(|i| op.row(i).combine(&T::one(), reference.row(i), &minus_one))
        .collect();
    let residuals = differences
        .iter()
        .zip(1..=n as i64)
        .map(|(d, i)| [d.moment(i, 0), d.moment(i, 1), d.moment(i, 2)])
        .collect();
    Ok(MomentReport {
        differences,
        residuals,
    })
}

/// Ghost field (scaled force at `u = 0`) of `kind` and its sup-norm.
pub fn ghost_force<T: Real>(
    kind: &ModelKind<T>,
    config: &ChainConfig<T>,
    partition: Option<&RegionPartition>,
    potential: &PairPotential<T>,
) -> Result<(PeriodicField<T>, T)> {
    let op = assemble_with_potential(kind, config, partition, potential)?;
    let ghost = op.ghost().clone();
    let sup = ghost.sup_norm();
    Ok((ghost, sup))
}

/// A residual measured over a range of chain lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub model: String,
    /// `(N, residual)`, N strictly increasing.
    pub points: Vec<(usize, f64)>,
    /// Fit of residual against ε; `None` when a residual vanishes or fewer
    /// than two N were run.
    pub fit: Option<SlopeFit>,
}

impl SweepResult {
    fn new(model: &str, mut points: Vec<(usize, f64)>) -> Result<Self> {
        points.sort_by_key(|p| p.0);
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(QcError::Config("N list contains duplicates".into()));
        }
        let fit = fit_slope(
            &points
                .iter()
                .map(|&(n, r)| (1.0 / n as f64, r))
                .collect::<Vec<_>>(),
        )
        .ok();
        Ok(Self {
            model: model.to_string(),
            points,
            fit,
        })
    }

    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    /// Ratios `r(2N)/r(N)` and the like between consecutive entries.
    pub fn ratios(&self) -> Vec<f64> {
        self.points.windows(2).map(|w| w[1].1 / w[0].1).collect()
    }

    pub fn min_residual(&self) -> f64 {
        self.points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min)
    }

    /// CSV with columns `N,epsilon,residual,model`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("N,epsilon,residual,model\n");
        for &(n, r) in &self.points {
            s.push_str(&format!("{n},{:.9e},{r:.9e},{}\n", 1.0 / n as f64, self.model));
        }
        s
    }

    /// Whitespace-separated `epsilon residual` data.
    pub fn to_plot_data(&self) -> String {
        let mut s = format!("# model {}\n# epsilon residual\n", self.model);
        for &(n, r) in &self.points {
            s.push_str(&format!("{:.9e} {r:.9e}\n", 1.0 / n as f64));
        }
        s
    }
}

/// `‖L^kind u − L^a u‖_∞` (ghost included) for `u` sampled from `witness`
/// at every N, with a least-squares exponent against ε.
pub fn consistency_sweep(
    kind: &ModelKind<f64>,
    witness: Witness,
    template: &ChainConfig<f64>,
    partition: Option<&RegionPartition>,
    potential: &PairPotential<f64>,
    n_list: &[usize],
) -> Result<SweepResult> {
    let points = n_list
        .par_iter()
        .map(|&n| {
            let config = template.with_n(n)?;
            let op = assemble_with_potential(kind, &config, partition, potential)?;
            let reference = assemble_with_potential(&ModelKind::Atomistic, &config, None, potential)?;
            let diff = op.combine(&1.0, &reference, &-1.0)?;
            let u = sample_field(|x| witness.eval(x), n);
            Ok((n, diff.apply(&u)?.sup_norm()))
        })
        .collect::<Result<Vec<_>>>()?;
    SweepResult::new(kind.name(), points)
}

/// Ghost-force sup-norm at every N.
pub fn ghost_sweep(
    kind: &ModelKind<f64>,
    template: &ChainConfig<f64>,
    partition: Option<&RegionPartition>,
    potential: &PairPotential<f64>,
    n_list: &[usize],
) -> Result<SweepResult> {
    let points = n_list
        .par_iter()
        .map(|&n| {
            let config = template.with_n(n)?;
            Ok((n, ghost_force(kind, &config, partition, potential)?.1))
        })
        .collect::<Result<Vec<_>>>()?;
    SweepResult::new(kind.name(), points)
}
