//! Invariants over random chains, deformations and fields.

use proptest::prelude::*;

use qclab::chain::{lp_norm, strain, wrap_index, ChainConfig, NormOrder, PeriodicField};
use qclab::impossibility::certificate;
use qclab::model::{assemble_operator, assemble_with_potential, ModelKind, Moduli};
use qclab::partition::{AtomLabel, RegionPartition};
use qclab::potential::PairPotential;
use qclab::Rational;

fn kinds() -> Vec<ModelKind<f64>> {
    vec![
        ModelKind::Atomistic,
        ModelKind::Continuum,
        ModelKind::Qce,
        ModelKind::Qnl,
        ModelKind::Qcf,
    ]
}

fn field(values: &[f64], n: usize) -> PeriodicField<f64> {
    PeriodicField::from_fn(n, |i| values[(i - 1) % values.len()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn wrap_index_stays_in_range(i in -10_000i64..10_000, n in 1usize..500) {
        let w = wrap_index(i, n);
        prop_assert!((1..=n).contains(&w));
        prop_assert_eq!(wrap_index(i + n as i64, n), w);
    }

    #[test]
    fn constants_are_in_every_kernel(n in 8usize..96, f in 0.95f64..1.4, c in -5.0f64..5.0) {
        let part = RegionPartition::half_open(0.5).unwrap();
        let cfg = ChainConfig::new(n * 2, f, 2).unwrap();
        for kind in kinds() {
            let p = kind.needs_partition().then_some(&part);
            let op = assemble_with_potential(&kind, &cfg, p, &PairPotential::LennardJones).unwrap();
            let out = op.apply_linear(&PeriodicField::constant(n * 2, c)).unwrap();
            prop_assert!(out.sup_norm() <= 1e-9 * (n * n) as f64);
        }
    }

    #[test]
    fn energy_based_operators_are_symmetric(n in 16usize..80, k1 in -2.0f64..3.0, k2 in -1.0f64..1.0) {
        let part = RegionPartition::half_open(0.5).unwrap();
        let cfg = ChainConfig::new(n, 1.0, 2).unwrap();
        let moduli = Moduli::from_curvatures(vec![k1, k2]);
        for kind in [ModelKind::Atomistic, ModelKind::Continuum, ModelKind::Qce, ModelKind::Qnl] {
            let p = kind.needs_partition().then_some(&part);
            let op = assemble_operator(&kind, &cfg, p, &moduli).unwrap();
            prop_assert!(op.symmetry_defect() <= 1e-14);
        }
    }

    #[test]
    fn application_is_linear(
        a in prop::collection::vec(-1.0f64..1.0, 5..20),
        b in prop::collection::vec(-1.0f64..1.0, 5..20),
        s in -3.0f64..3.0,
    ) {
        let n = 40;
        let part = RegionPartition::half_open(0.5).unwrap();
        let cfg = ChainConfig::new(n, 1.2, 2).unwrap();
        let (u, v) = (field(&a, n), field(&b, n));
        for kind in kinds() {
            let p = kind.needs_partition().then_some(&part);
            let op = assemble_with_potential(&kind, &cfg, p, &PairPotential::default()).unwrap();
            let lhs = op.apply_linear(&u.combine(&1.0, &v, &s).unwrap()).unwrap();
            let rhs = op.apply_linear(&u).unwrap().combine(&1.0, &op.apply_linear(&v).unwrap(), &s).unwrap();
            prop_assert!(lhs.sub(&rhs).unwrap().sup_norm() <= 1e-9 * (n * n) as f64);
        }
    }

    #[test]
    fn strain_sums_to_zero(a in prop::collection::vec(-10.0f64..10.0, 3..64)) {
        let u = PeriodicField::from_values(a.clone());
        let s = strain(&u).unwrap();
        prop_assert!(s.sum().abs() <= 1e-9 * a.len() as f64 * s.sup_norm().max(1.0));
    }

    #[test]
    fn discrete_norms_are_ordered(a in prop::collection::vec(-10.0f64..10.0, 4..64)) {
        let u = PeriodicField::from_values(a);
        let one = lp_norm(&u, NormOrder::Finite(1.0)).unwrap();
        let two = lp_norm(&u, NormOrder::Finite(2.0)).unwrap();
        let inf = lp_norm(&u, NormOrder::Infinity).unwrap();
        prop_assert!(one <= two * (1.0 + 1e-12) + 1e-300);
        prop_assert!(two <= inf * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn classification_covers_every_atom(k in 6usize..11, frac in 0.25f64..0.75) {
        let n = 1usize << k;
        let part = RegionPartition::half_open(frac).unwrap();
        let labels = part.classify(n).unwrap();
        let total = labels.count(AtomLabel::InteriorAtomistic)
            + labels.count(AtomLabel::InteriorContinuum)
            + labels.count(AtomLabel::Interface);
        prop_assert_eq!(total, n);
        prop_assert_eq!(labels.count(AtomLabel::Interface), 2 * part.interface_width());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn certificate_value_is_minus_two(m in 1usize..24) {
        let c = certificate(m).unwrap();
        prop_assert_eq!(&c.value, &Rational::from_integer((-2).into()));
        prop_assert!(c.certifies());
    }
}
