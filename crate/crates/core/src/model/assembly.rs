use crate::chain::{ChainConfig, PeriodicField};
use crate::error::{QcError, Result};
use crate::partition::{Boundary, RegionPartition};
use crate::potential::PairPotential;
use crate::scalar::{Real, Scalar};

use super::operator::{LinearChainOperator, RowTable, Stencil};
use super::terms::energy_terms;
use super::{InterfaceStencil, ModelKind, Moduli};

/// Interior atomistic row `Σ_r φ''(rF) (−1, 2, −1)` at offsets `(−r, 0, r)`.
pub fn atomistic_stencil<T: Scalar>(moduli: &Moduli<T>, cutoff: usize) -> Stencil<T> {
    Stencil::from_pairs((1..=cutoff).flat_map(|r| {
        let k = moduli.curvature(r).clone();
        let r = r as i64;
        [(-r, -k.clone()), (0, k.clone() + k.clone()), (r, -k)]
    }))
}

/// Interior Cauchy–Born row `Σ_r r² φ''(rF) (−1, 2, −1)` at offsets `(−1, 0, 1)`.
pub fn continuum_stencil<T: Scalar>(moduli: &Moduli<T>, cutoff: usize) -> Stencil<T> {
    let k = (1..=cutoff).fold(T::zero(), |acc, r| {
        acc + T::from_int((r * r) as i64) * moduli.curvature(r).clone()
    });
    Stencil::from_pairs([(-1, -k.clone()), (0, k.clone() + k.clone()), (1, -k)])
}

/// Second-neighbour stencil inside the atomistic region, L₂ units.
fn second_atomistic<T: Scalar>(offset: i64) -> T {
    match offset {
        0 => T::from_int(2),
        2 | -2 => -T::one(),
        _ => T::zero(),
    }
}

/// Second-neighbour stencil inside the continuum region, L₂ units.
fn second_continuum<T: Scalar>(offset: i64) -> T {
    match offset {
        0 => T::from_int(8),
        1 | -1 => T::from_int(-4),
        _ => T::zero(),
    }
}

/// Assembles the linearised operator of `kind` for the given moduli.
///
/// Energy-based kinds get the scaled Hessian `(1/ε) ∂²ℰ` as linear part and
/// the scaled gradient `(1/ε) ∂ℰ` at `u = 0` as ghost field. The force-based
/// and custom kinds carry no ghost field.
pub fn assemble_operator<T: Scalar>(
    kind: &ModelKind<T>,
    config: &ChainConfig<T>,
    partition: Option<&RegionPartition>,
    moduli: &Moduli<T>,
) -> Result<LinearChainOperator<T>> {
    let cutoff = config.cutoff();
    if moduli.shells() < cutoff {
        return Err(QcError::Config(format!(
            "moduli cover {} shells, cutoff is {cutoff}",
            moduli.shells()
        )));
    }
    match kind {
        ModelKind::Qcf => assemble_force_based(config, partition, moduli),
        ModelKind::CustomQc(block) => assemble_custom(block, config, partition, moduli),
        _ => assemble_energy(kind, config, partition, moduli),
    }
}

/// [`assemble_operator`] with moduli taken from `potential` at the chain's
/// deformation gradient.
pub fn assemble_with_potential<T: Real>(
    kind: &ModelKind<T>,
    config: &ChainConfig<T>,
    partition: Option<&RegionPartition>,
    potential: &PairPotential<T>,
) -> Result<LinearChainOperator<T>> {
    let moduli = Moduli::from_potential(potential, *config.deformation(), config.cutoff())?;
    assemble_operator(kind, config, partition, &moduli)
}

fn assemble_energy<T: Scalar>(
    kind: &ModelKind<T>,
    config: &ChainConfig<T>,
    partition: Option<&RegionPartition>,
    moduli: &Moduli<T>,
) -> Result<LinearChainOperator<T>> {
    let n = config.n();
    let inv_eps = T::from_int(n as i64);
    let terms = energy_terms(kind, config, partition)?;
    let mut rows: Vec<Vec<(i64, T)>> = vec![Vec::with_capacity(9); n];
    let mut ghost = vec![T::zero(); n];
    for t in &terms {
        let w: T = t.weight();
        let h = w.clone() * moduli.curvature(t.shell).clone();
        let g = w * moduli.slope(t.shell).clone() * inv_eps.clone();
        for &(ka, ca) in &t.atoms {
            let row = config.wrap(ka) - 1;
            ghost[row] = ghost[row].clone() + g.clone() * T::from_int(ca);
            for &(kb, cb) in &t.atoms {
                rows[row].push((kb - ka, h.clone() * T::from_int(ca * cb)));
            }
        }
    }
    let mut table = RowTable::default();
    for r in rows {
        table.push(Stencil::from_pairs(r));
    }
    Ok(LinearChainOperator::from_table(
        config.clone(),
        table,
        PeriodicField::from_values(ghost),
    ))
}

fn assemble_force_based<T: Scalar>(
    config: &ChainConfig<T>,
    partition: Option<&RegionPartition>,
    moduli: &Moduli<T>,
) -> Result<LinearChainOperator<T>> {
    let partition = partition.ok_or(QcError::MissingPartition("qcf"))?;
    partition.checked_boundaries(config.n())?;
    let atomistic = atomistic_stencil(moduli, config.cutoff());
    let continuum = continuum_stencil(moduli, config.cutoff());
    let mut table = RowTable::default();
    for a in partition.membership(config.n()) {
        table.push(if a { atomistic.clone() } else { continuum.clone() });
    }
    Ok(LinearChainOperator::from_table(
        config.clone(),
        table,
        PeriodicField::zeros(config.n()),
    ))
}

fn assemble_custom<T: Scalar>(
    block: &InterfaceStencil<T>,
    config: &ChainConfig<T>,
    partition: Option<&RegionPartition>,
    moduli: &Moduli<T>,
) -> Result<LinearChainOperator<T>> {
    let partition = partition.ok_or(QcError::MissingPartition("custom"))?;
    if config.cutoff() != 2 {
        return Err(QcError::CouplingCutoff(config.cutoff()));
    }
    if block.m() != partition.interface_width() {
        return Err(QcError::StencilSize {
            expected: partition.interface_width(),
            got: block.m(),
        });
    }
    let n = config.n();
    let bounds = partition.checked_boundaries(n)?;
    let k1 = moduli.curvature(1).clone();
    let k2 = moduli.curvature(2).clone();
    let first: Vec<(i64, T)> = vec![(-1, -k1.clone()), (0, k1.clone() + k1.clone()), (1, -k1)];
    let inside = partition.membership(n);
    let mut second: Vec<Vec<(i64, T)>> = inside
        .iter()
        .map(|&a| {
            (-2..=2)
                .map(|o| {
                    let c: T = if a { second_atomistic(o) } else { second_continuum(o) };
                    (o, c)
                })
                .collect()
        })
        .collect();
    for b in &bounds {
        for (row, pairs) in custom_block_rows(block, b) {
            second[config.wrap(row) - 1] = pairs;
        }
    }
    let mut table = RowTable::default();
    for s in second {
        table.push(Stencil::from_pairs(
            first
                .iter()
                .cloned()
                .chain(s.into_iter().map(|(o, c)| (o, c * k2.clone()))),
        ));
    }
    Ok(LinearChainOperator::from_table(
        config.clone(),
        table,
        PeriodicField::zeros(n),
    ))
}

/// Second-neighbour rows of the block atoms at one boundary as
/// `(unwrapped atom, [(global offset, L₂ coefficient)])`.
///
/// Within the block the prescribed entries apply; columns left of the block
/// take continuum values and columns right of it atomistic values, the ones
/// symmetry with the neighbouring pure rows forces.
fn custom_block_rows<T: Scalar>(
    block: &InterfaceStencil<T>,
    boundary: &Boundary,
) -> Vec<(i64, Vec<(i64, T)>)> {
    let m = block.m() as i64;
    let dir = boundary.direction();
    (1..=m)
        .map(|i| {
            let pairs = (i - 2..=m.max(i + 2))
                .map(|j| {
                    let c = if j < 1 {
                        second_continuum(j - i)
                    } else if j > m {
                        second_atomistic(j - i)
                    } else {
                        block.get(i as usize, j as usize).clone()
                    };
                    ((j - i) * dir, c)
                })
                .chain((1..i - 2).map(|j| ((j - i) * dir, block.get(i as usize, j as usize).clone())))
                .collect();
            (boundary.block_atom(i), pairs)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Moduli;

    fn unit() -> Moduli<f64> {
        Moduli::from_curvatures(vec![1.0, 1.0])
    }

    #[test]
    fn closed_form_interior_rows() {
        let a = atomistic_stencil(&unit(), 2);
        assert_eq!(a.offsets(), &[-2, -1, 0, 1, 2]);
        assert_eq!(a.coeffs(), &[-1.0, -1.0, 4.0, -1.0, -1.0]);
        let c = continuum_stencil(&unit(), 2);
        assert_eq!(c.offsets(), &[-1, 0, 1]);
        assert_eq!(c.coeffs(), &[-5.0, 10.0, -5.0]);
    }

    #[test]
    fn energy_assembly_matches_closed_form() {
        let cfg = ChainConfig::new(32, 1.0, 2).unwrap();
        let a = assemble_operator(&ModelKind::Atomistic, &cfg, None, &unit()).unwrap();
        assert_eq!(a.distinct_rows(), 1);
        assert_eq!(*a.row(7), atomistic_stencil(&unit(), 2));
        let c = assemble_operator(&ModelKind::Continuum, &cfg, None, &unit()).unwrap();
        assert_eq!(*c.row(1), continuum_stencil(&unit(), 2));
    }

    #[test]
    fn custom_rows_cover_whole_block() {
        // a dense block: every in-block entry must appear in the row
        let m = 6;
        let block: Vec<f64> = (0..m * m)
            .map(|k| {
                let (i, j) = (k / m, k % m);
                1.0 + (i.min(j) * 10 + i.max(j)) as f64
            })
            .collect();
        let st = InterfaceStencil::new(m, block).unwrap();
        let part = RegionPartition::with_interface(vec![(0.0, 0.5)], m, 2).unwrap();
        let b = part.boundaries(64)[0];
        for (_, pairs) in custom_block_rows(&st, &b) {
            let s = Stencil::from_pairs(pairs);
            assert!(s.offsets().len() >= m);
        }
    }

    #[test]
    fn custom_size_mismatch() {
        let cfg = ChainConfig::new(64, 1.0, 2).unwrap();
        let part = RegionPartition::half_open(0.5).unwrap();
        let st = InterfaceStencil::new(3, vec![0.0; 9]).unwrap();
        assert!(matches!(
            assemble_operator(&ModelKind::CustomQc(st), &cfg, Some(&part), &unit()),
            Err(QcError::StencilSize { expected: 4, got: 3 })
        ));
    }
}
