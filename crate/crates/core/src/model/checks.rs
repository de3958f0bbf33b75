use crate::chain::{ChainConfig, PeriodicField};
use crate::error::{QcError, Result};
use crate::partition::RegionPartition;
use crate::potential::PairPotential;
use crate::scalar::Real;

use super::{assemble_with_potential, total_energy, ModelKind};

/// Largest deviation, in ε²-units, between the assembled linear part and a
/// central finite-difference Hessian of `total_energy` at `u = 0`,
/// Richardson-extrapolated from steps `step` and `step/2`.
///
/// `ε²·(1/ε)∂²ℰ = ε ∂²ℰ` is the quantity compared.
pub fn hessian_consistency_check<T: Real>(
    kind: &ModelKind<T>,
    config: &ChainConfig<T>,
    partition: Option<&RegionPartition>,
    potential: &PairPotential<T>,
    step: T,
) -> Result<T> {
    if !kind.is_energy_based() {
        return Err(QcError::NoEnergy(kind.name()));
    }
    let op = assemble_with_potential(kind, config, partition, potential)?;
    let n = config.n();
    let eps = config.epsilon();
    let energy = |u: &PeriodicField<T>| total_energy(kind, config, partition, potential, u);
    let shifted = |moves: &[(usize, T)]| {
        let mut u = PeriodicField::zeros(n);
        for &(k, d) in moves {
            let v = *u.at(k as i64) + d;
            u.set(k as i64, v);
        }
        energy(&u)
    };
    let e0 = energy(&PeriodicField::zeros(n))?;
    let second = |k: usize, l: usize, h: T| -> Result<T> {
        Ok(if k == l {
            (shifted(&[(k, h)])? - e0 - e0 + shifted(&[(k, -h)])?) / (h * h)
        } else {
            (shifted(&[(k, h), (l, h)])? - shifted(&[(k, h), (l, -h)])?
                - shifted(&[(k, -h), (l, h)])?
                + shifted(&[(k, -h), (l, -h)])?)
                / (T::from_int(4) * h * h)
        })
    };
    let half = step / T::from_int(2);
    let mut worst = T::zero();
    for k in 1..=n {
        for l in k..=n {
            // Richardson: (4 D(h/2) − D(h)) / 3 cancels the h² term
            let fd = (T::from_int(4) * second(k, l, half)? - second(k, l, step)?) / T::from_int(3);
            let scaled = fd * eps;
            for (a, b) in [(k, l), (l, k)] {
                let d = (op.entry(a as i64, b as i64) - scaled).abs();
                worst = worst.max(d);
            }
        }
    }
    Ok(worst)
}

/// Largest deviation between the assembled ghost field and the central
/// finite-difference scaled gradient `(1/ε) ∂ℰ/∂u` at `u = 0`.
pub fn ghost_gradient_check<T: Real>(
    kind: &ModelKind<T>,
    config: &ChainConfig<T>,
    partition: Option<&RegionPartition>,
    potential: &PairPotential<T>,
    step: T,
) -> Result<T> {
    if !kind.is_energy_based() {
        return Err(QcError::NoEnergy(kind.name()));
    }
    let op = assemble_with_potential(kind, config, partition, potential)?;
    let n = config.n();
    let inv_eps = T::from_int(n as i64);
    let mut worst = T::zero();
    for k in 1..=n as i64 {
        let mut up = PeriodicField::zeros(n);
        up.set(k, step);
        let down = up.scale(&-T::one());
        let g = (total_energy(kind, config, partition, potential, &up)?
            - total_energy(kind, config, partition, potential, &down)?)
            / (step + step)
            * inv_eps;
        worst = worst.max((g - *op.ghost().at(k)).abs());
    }
    Ok(worst)
}
