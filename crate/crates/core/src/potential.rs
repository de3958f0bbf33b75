//! Pair potentials with analytic first and second derivatives.

use crate::error::{QcError, Result};
use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub enum PairPotential<T> {
    /// `φ(s) = k/2 (s − s0)²`.
    Harmonic { k: T, s0: T },
    /// `φ(s) = s⁻¹² − 2 s⁻⁶`: unit well depth at unit spacing.
    LennardJones,
}

impl<T: Real> Default for PairPotential<T> {
    fn default() -> Self {
        PairPotential::Harmonic {
            k: T::one(),
            s0: T::one(),
        }
    }
}

impl<T: Real> PairPotential<T> {
    pub fn harmonic(k: T, s0: T) -> Self {
        PairPotential::Harmonic { k, s0 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PairPotential::Harmonic { .. } => "harmonic",
            PairPotential::LennardJones => "lennard_jones",
        }
    }

    /// φ, φ' or φ'' at `s` for `order` 0, 1, 2.
    pub fn evaluate(&self, s: T, order: u8) -> Result<T> {
        if order > 2 {
            return Err(QcError::DerivativeOrder(order));
        }
        match self {
            PairPotential::Harmonic { k, s0 } => {
                let d = s - *s0;
                Ok(match order {
                    0 => *k * d * d / T::from_int(2),
                    1 => *k * d,
                    _ => *k,
                })
            }
            PairPotential::LennardJones => {
                if !(s > T::zero()) {
                    return Err(QcError::PotentialDomain(Scalar::to_f64(&s)));
                }
                let inv = s.recip();
                let i6 = inv.powi(6);
                let i12 = i6 * i6;
                Ok(match order {
                    0 => i12 - T::from_int(2) * i6,
                    1 => T::from_int(12) * (i6 - i12) * inv,
                    _ => (T::from_int(156) * i12 - T::from_int(84) * i6) * inv * inv,
                })
            }
        }
    }

    #[inline]
    pub fn energy(&self, s: T) -> Result<T> {
        self.evaluate(s, 0)
    }

    #[inline]
    pub fn slope(&self, s: T) -> Result<T> {
        self.evaluate(s, 1)
    }

    #[inline]
    pub fn curvature(&self, s: T) -> Result<T> {
        self.evaluate(s, 2)
    }

    /// Worst relative deviation between the analytic φ', φ'' and central
    /// differences (step 1e−6) of the next-lower order. Empty input gives 0.
    pub fn derivative_check(&self, samples: &[T]) -> Result<T> {
        let h = T::from_f64(1e-6);
        let two = T::from_int(2);
        let mut worst = T::zero();
        for &s in samples {
            for order in 1..=2u8 {
                let analytic = self.evaluate(s, order)?;
                let fd = (self.evaluate(s + h, order - 1)? - self.evaluate(s - h, order - 1)?)
                    / (two * h);
                let scale = analytic.abs().max(T::one());
                let rel = (analytic - fd).abs() / scale;
                worst = worst.max(rel);
            }
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_values() {
        let p = PairPotential::<f64>::harmonic(1.0, 1.0);
        assert_eq!(p.evaluate(2.0, 0).unwrap(), 0.5);
        assert_eq!(p.evaluate(2.0, 1).unwrap(), 1.0);
        assert_eq!(p.evaluate(2.0, 2).unwrap(), 1.0);
        assert!(p.evaluate(2.0, 3).is_err());
        // constant curvature
        for s in [-3.0, 0.1, 7.0] {
            assert_eq!(p.curvature(s).unwrap(), 1.0);
        }
        // default ghost-force slope at F = 1.2
        assert!((p.slope(2.4).unwrap() - 1.4).abs() < 1e-15);
    }

    #[test]
    fn lennard_jones_minimum() {
        let p = PairPotential::<f64>::LennardJones;
        assert_eq!(p.evaluate(1.0, 0).unwrap(), -1.0);
        assert_eq!(p.evaluate(1.0, 1).unwrap(), 0.0);
        assert_eq!(p.evaluate(1.0, 2).unwrap(), 72.0);
        assert!(matches!(p.evaluate(0.0, 0), Err(QcError::PotentialDomain(_))));
        assert!(p.evaluate(-1.0, 2).is_err());
    }

    #[test]
    fn lennard_jones_slope_matches_finite_difference() {
        let p = PairPotential::<f64>::LennardJones;
        let h = 1e-6;
        let fd = (p.energy(1.1 + h).unwrap() - p.energy(1.1 - h).unwrap()) / (2.0 * h);
        let a = p.slope(1.1).unwrap();
        assert!(((a - fd) / a).abs() < 1e-6, "{a} vs {fd}");
    }

    #[test]
    fn derivative_checks() {
        let h = PairPotential::harmonic(1.0, 1.0);
        assert!(h.derivative_check(&[0.5, 1.0, 2.0]).unwrap() <= 1e-9);
        let lj = PairPotential::<f64>::LennardJones;
        assert!(lj.derivative_check(&[0.9, 1.0, 1.2]).unwrap() <= 1e-5);
        assert_eq!(lj.derivative_check(&[]).unwrap(), 0.0);
    }

    #[test]
    fn second_derivative_matches_second_difference() {
        let h = 1e-4;
        for pot in [PairPotential::harmonic(2.0, 0.7), PairPotential::LennardJones] {
            for k in 0..20 {
                let s = 0.9 + 0.05 * k as f64;
                let fd = (pot.energy(s + h).unwrap() - 2.0 * pot.energy(s).unwrap()
                    + pot.energy(s - h).unwrap())
                    / (h * h);
                let a = pot.curvature(s).unwrap();
                assert!((a - fd).abs() <= 1e-5 * a.abs().max(1.0), "{s}: {a} vs {fd}");
            }
        }
    }

    #[test]
    fn single_precision() {
        let p = PairPotential::<f32>::LennardJones;
        assert_eq!(p.evaluate(1.0f32, 0).unwrap(), -1.0);
    }
}
