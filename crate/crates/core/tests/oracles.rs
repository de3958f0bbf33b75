//! Library results checked against oracles built here from first principles.

use nalgebra::{DMatrix, DVector};
use num_traits::{ToPrimitive, Zero};

use qclab::chain::{sample_field, ChainConfig, PeriodicField};
use qclab::consistency::moment_residuals;
use qclab::convergence::solve_equilibrium;
use qclab::impossibility::{certificate, min_residual, ConstraintSystem};
use qclab::model::{assemble_operator, assemble_with_potential, total_energy, ModelKind, Moduli};
use qclab::partition::RegionPartition;
use qclab::potential::PairPotential;
use qclab::Rational;

fn lj_curvature(s: f64) -> f64 {
    156.0 * s.powi(-14) - 84.0 * s.powi(-8)
}

fn dense_scaled(op: &qclab::Operator) -> DMatrix<f64> {
    let n = op.n();
    let rows = op.dense();
    DMatrix::from_fn(n, n, |i, j| rows[i][j] * (n * n) as f64)
}

#[test]
fn certificate_weights_annihilate_every_column() {
    for m in 1..=12 {
        let system = ConstraintSystem::new(m).unwrap();
        let c = certificate(m).unwrap();
        let cols = system.unknowns().len();
        for k in 0..cols {
            let s = system
                .matrix()
                .iter()
                .zip(&c.weights)
                .fold(Rational::zero(), |acc, (row, w)| acc + &row[k] * w);
            assert!(s.is_zero(), "m={m} column {k}");
        }
        let value = system
            .offset()
            .iter()
            .zip(&c.weights)
            .fold(Rational::zero(), |acc, (o, w)| acc + o * w);
        assert_eq!(value, Rational::from_integer((-2).into()));
        // any x: wᵀ(Ax + c) = −2, so ‖Ax + c‖ ≥ 2/‖w‖ by Cauchy–Schwarz
        let w2: f64 = c.weights.iter().map(|w| w.to_f64().unwrap().powi(2)).sum();
        assert!((c.bound() - 2.0 / w2.sqrt()).abs() < 1e-15);
    }
}

#[test]
fn least_squares_matches_normal_equations() {
    for m in [2usize, 4, 7] {
        let system = ConstraintSystem::new(m).unwrap();
        let rows = system.matrix().len();
        let cols = system.unknowns().len();
        let a = DMatrix::from_fn(rows, cols, |i, j| system.matrix()[i][j].to_f64().unwrap());
        let b = DVector::from_fn(rows, |i, _| -system.offset()[i].to_f64().unwrap());
        let qr = a.clone().col_piv_qr();
        let (q, r) = (qr.q(), qr.r());
        let rank = (0..r.nrows().min(r.ncols()))
            .filter(|&k| r[(k, k)].abs() > 1e-10)
            .count();
        let qb = q.transpose() * &b;
        let head: f64 = qb.iter().take(rank).map(|v| v * v).sum();
        let want = (b.norm_squared() - head).max(0.0).sqrt();
        let (lib, _) = min_residual(m).unwrap();
        assert!((lib - want).abs() < 1e-10, "m={m}: {lib} vs {want}");
        assert!(lib >= certificate(m).unwrap().bound());
    }
}

#[test]
fn equilibrium_matches_dense_bordered_solve() {
    let n = 64;
    let part = RegionPartition::half_open(0.5).unwrap();
    let cfg = ChainConfig::new(n, 1.2, 2).unwrap();
    for kind in [ModelKind::Atomistic, ModelKind::Qnl, ModelKind::Qce] {
        let p = kind.needs_partition().then_some(&part);
        let op = assemble_with_potential(&kind, &cfg, p, &PairPotential::default()).unwrap();
        let f = sample_field(|x: f64| (6.0 * x).sin() + x * x, n);
        let mean = f.mean();
        let f = f.map(|v| v - mean);
        let k = dense_scaled(&op);
        let mut big = DMatrix::zeros(n + 1, n + 1);
        big.view_mut((0, 0), (n, n)).copy_from(&k);
        for i in 0..n {
            big[(i, n)] = 1.0;
            big[(n, i)] = 1.0;
        }
        let mut rhs = DVector::zeros(n + 1);
        for i in 0..n {
            rhs[i] = f.values()[i];
        }
        let x = big.lu().solve(&rhs).unwrap();
        let u = solve_equilibrium(&op, &f).unwrap();
        let dev = (0..n).map(|i| (u.values()[i] - x[i]).abs()).fold(0.0, f64::max);
        let scale = x.amax();
        assert!(dev <= 1e-10 * scale, "{}: {dev:e}", kind.name());
    }
}

#[test]
fn fourier_modes_diagonalise_bulk_operators() {
    let n = 48;
    let f = 1.1;
    let (k1, k2) = (lj_curvature(f), lj_curvature(2.0 * f));
    let cfg = ChainConfig::new(n, f, 2).unwrap();
    let eps = 1.0 / n as f64;
    for mode in [1usize, 3, 7] {
        let theta = std::f64::consts::TAU * mode as f64 * eps;
        let u = sample_field(|x: f64| (std::f64::consts::TAU * mode as f64 * x).cos(), n);
        let atom = k1 * 2.0 * (1.0 - theta.cos()) + k2 * 2.0 * (1.0 - (2.0 * theta).cos());
        let cont = (k1 + 4.0 * k2) * 2.0 * (1.0 - theta.cos());
        for (kind, symbol) in [(ModelKind::Atomistic, atom), (ModelKind::Continuum, cont)] {
            let op = assemble_with_potential(&kind, &cfg, None, &PairPotential::LennardJones).unwrap();
            let got = op.apply_linear(&u).unwrap();
            for i in 0..n {
                let want = symbol / (eps * eps) * u.values()[i];
                assert!((got.values()[i] - want).abs() <= 1e-9 * symbol.abs() / (eps * eps));
            }
        }
    }
}

#[test]
fn harmonic_energy_hessian_by_polarisation() {
    // harmonic energies are quadratic, so the polarisation identity is exact
    // up to rounding
    let n = 16;
    let h = 1e-2;
    let part = RegionPartition::half_open(0.5).unwrap();
    let pot = PairPotential::harmonic(1.3, 0.9);
    let cfg = ChainConfig::new(n, 1.05, 2).unwrap();
    for kind in [ModelKind::Atomistic, ModelKind::Continuum, ModelKind::Qce, ModelKind::Qnl] {
        let p = kind.needs_partition().then_some(&part);
        let op = assemble_with_potential(&kind, &cfg, p, &pot).unwrap();
        let e = |u: &PeriodicField<f64>| total_energy(&kind, &cfg, p, &pot, u).unwrap();
        let bump = |is: &[usize]| {
            PeriodicField::from_fn(n, |k| is.iter().filter(|&&i| i == k).count() as f64 * h)
        };
        let e0 = e(&PeriodicField::zeros(n));
        for i in 1..=n {
            for j in [i, i % n + 1, (i + 1) % n + 1] {
                let hij = (e(&bump(&[i, j])) - e(&bump(&[i])) - e(&bump(&[j])) + e0) / (h * h);
                // Hessian of Σ ε φ(·) equals ε times the force operator
                let want = op.entry(i as i64, j as i64) * n as f64;
                assert!((hij - want).abs() < 1e-6 * want.abs().max(1.0), "{} ({i},{j})", kind.name());
            }
        }
    }
}

#[test]
fn custom_model_with_least_squares_block_reproduces_residual() {
    for m in [2usize, 4, 5] {
        let (r, block) = min_residual(m).unwrap();
        let part = RegionPartition::with_interface(vec![(0.0, 0.5)], m, 2).unwrap();
        let n = 128;
        let cfg = ChainConfig::new(n, 1.0, 2).unwrap();
        let k2 = 0.75;
        let moduli = Moduli::from_curvatures(vec![1.0, k2]);
        let op = assemble_operator(&ModelKind::CustomQc(block), &cfg, Some(&part), &moduli).unwrap();
        let reference = assemble_operator(&ModelKind::Atomistic, &cfg, None, &moduli).unwrap();
        let report = moment_residuals(&op, &reference).unwrap();
        for b in part.boundaries(n) {
            let sq: f64 = report
                .interface_residuals(&b)
                .iter()
                .flat_map(|row| row.iter())
                .map(|v| v * v)
                .sum();
            let got = sq.sqrt();
            assert!((got - k2 * r).abs() < 1e-10, "m={m}: {got} vs {}", k2 * r);
        }
    }
}
