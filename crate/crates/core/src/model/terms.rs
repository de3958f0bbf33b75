use crate::chain::{ChainConfig, PeriodicField};
use crate::error::{QcError, Result};
use crate::partition::RegionPartition;
use crate::potential::PairPotential;
use crate::scalar::{Real, Scalar};

use super::ModelKind;

/// `weight · ε · φ(rF + (coef_a u_a + coef_b u_b)/ε)`, atom labels unwrapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Term {
    pub num: i64,
    pub den: i64,
    pub shell: usize,
    pub atoms: [(i64, i64); 2],
}

impl Term {
    /// Direct bond `(i − r, i)`: argument `rF + r D_r u_i`.
    fn bond(i: i64, r: usize, num: i64, den: i64) -> Self {
        Term {
            num,
            den,
            shell: r,
            atoms: [(i, 1), (i - r as i64, -1)],
        }
    }

    /// Cauchy–Born bond of shell `r` on element `(j − 1, j)`: `rF + r D u_j`.
    fn element(j: i64, r: usize, num: i64, den: i64) -> Self {
        let r = r as i64;
        Term {
            num,
            den,
            shell: r as usize,
            atoms: [(j, r), (j - 1, -r)],
        }
    }

    pub fn weight<T: Scalar>(&self) -> T {
        T::from_ratio(self.num, self.den)
    }
}

/// Bond terms of an energy-based model. `QCF` and custom stencils have none.
pub(crate) fn energy_terms<T: Scalar>(
    kind: &ModelKind<T>,
    config: &ChainConfig<T>,
    partition: Option<&RegionPartition>,
) -> Result<Vec<Term>> {
    let n = config.n() as i64;
    let cutoff = config.cutoff();
    let mut terms = Vec::new();
    match kind {
        ModelKind::Atomistic => {
            for r in 1..=cutoff {
                terms.extend((1..=n).map(|i| Term::bond(i, r, 1, 1)));
            }
        }
        ModelKind::Continuum => {
            for r in 1..=cutoff {
                terms.extend((1..=n).map(|j| Term::element(j, r, 1, 1)));
            }
        }
        ModelKind::Qnl | ModelKind::Qce => {
            let partition = partition.ok_or(QcError::MissingPartition(kind.name()))?;
            if cutoff != 2 {
                return Err(QcError::CouplingCutoff(cutoff));
            }
            partition.checked_boundaries(config.n())?;
            let inside = partition.membership(config.n());
            let in_a = |i: i64| inside[config.wrap(i) - 1];
            if matches!(kind, ModelKind::Qnl) {
                for i in 1..=n {
                    terms.push(Term::bond(i, 1, 1, 1));
                    if in_a(i - 2) || in_a(i) {
                        terms.push(Term::bond(i, 2, 1, 1));
                    } else {
                        terms.push(Term::element(i - 1, 2, 1, 2));
                        terms.push(Term::element(i, 2, 1, 2));
                    }
                }
            } else {
                for i in 1..=n {
                    for r in 1..=2usize {
                        if in_a(i) {
                            terms.push(Term::bond(i + r as i64, r, 1, 2));
                            terms.push(Term::bond(i, r, 1, 2));
                        } else {
                            terms.push(Term::element(i + 1, r, 1, 2));
                            terms.push(Term::element(i, r, 1, 2));
                        }
                    }
                }
            }
        }
        ModelKind::Qcf | ModelKind::CustomQc(_) => return Err(QcError::NoEnergy(kind.name())),
    }
    Ok(terms)
}

/// Scaled total energy `Σ w ε φ(·)` of an energy-based model.
pub fn total_energy<T: Real>(
    kind: &ModelKind<T>,
    config: &ChainConfig<T>,
    partition: Option<&RegionPartition>,
    potential: &PairPotential<T>,
    u: &PeriodicField<T>,
) -> Result<T> {
    u.check_len(config.n())?;
    let terms = energy_terms(kind, config, partition)?;
    let eps = config.epsilon();
    let inv_eps = T::from_int(config.n() as i64);
    let f = *config.deformation();
    let mut total = T::zero();
    for t in &terms {
        let [(a, ca), (b, cb)] = t.atoms;
        let stretch = (T::from_int(ca) * *u.at(a) + T::from_int(cb) * *u.at(b)) * inv_eps;
        let s = T::from_int(t.shell as i64) * f + stretch;
        total = total + t.weight::<T>() * potential.energy(s)?;
    }
    Ok(total * eps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic() -> PairPotential<f64> {
        PairPotential::harmonic(1.0, 1.0)
    }

    #[test]
    fn uniform_deformation_energies() {
        let cfg = ChainConfig::new(16, 1.0, 2).unwrap();
        let part = RegionPartition::half_open(0.5).unwrap();
        let u = PeriodicField::zeros(16);
        for kind in [ModelKind::Atomistic, ModelKind::Continuum, ModelKind::Qnl, ModelKind::Qce] {
            let e = total_energy(&kind, &cfg, Some(&part), &harmonic(), &u).unwrap();
            assert!((e - 0.5).abs() < 1e-15, "{kind}: {e}");
        }
    }

    #[test]
    fn qcf_has_no_energy() {
        let cfg = ChainConfig::new(16, 1.0, 2).unwrap();
        let part = RegionPartition::half_open(0.5).unwrap();
        let u = PeriodicField::zeros(16);
        assert_eq!(
            total_energy(&ModelKind::Qcf, &cfg, Some(&part), &harmonic(), &u),
            Err(QcError::NoEnergy("qcf"))
        );
    }

    #[test]
    fn coupled_models_need_a_partition() {
        let cfg = ChainConfig::new(16, 1.0, 2).unwrap();
        let u = PeriodicField::zeros(16);
        assert!(matches!(
            total_energy(&ModelKind::Qnl, &cfg, None, &harmonic(), &u),
            Err(QcError::MissingPartition(_))
        ));
        let cfg3 = ChainConfig::new(32, 1.0, 3).unwrap();
        let part = RegionPartition::half_open(0.5).unwrap();
        assert!(matches!(
            total_energy(&ModelKind::Qce, &cfg3, Some(&part), &harmonic(), &PeriodicField::zeros(32)),
            Err(QcError::CouplingCutoff(3))
        ));
    }
}
