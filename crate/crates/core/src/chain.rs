//! Periodic chain bookkeeping: configuration, periodic fields, difference
//! quotients and the discrete ε-weighted ℓ^p norms.
//!
//! Atoms are labelled `1..=N`. Reads at any integer index wrap periodically,
//! so `u[0] == u[N]` and `u[-1] == u[N-1]`. Fields hold raw values; every
//! ε-scaling happens inside the operations.

use std::fmt;

use crate::error::{QcError, Result};
use crate::scalar::{Real, Scalar};

/// Periodic chain parameters shared by every assembly routine.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig<T> {
    n: usize,
    deformation: T,
    cutoff: usize,
}

impl<T: Scalar> ChainConfig<T> {
    /// Builds a chain of `n` atoms per period with macroscopic deformation
    /// gradient `deformation` and an interaction cutoff of `cutoff` neighbours.
    pub fn new(n: usize, deformation: T, cutoff: usize) -> Result<Self> {
        let min = 4 * cutoff + 4;
        if cutoff == 0 || n < min {
            return Err(QcError::ChainTooShort { n, cutoff, min });
        }
        Ok(Self {
            n,
            deformation,
            cutoff,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Lattice spacing `1/N`, always derived from `N`.
    pub fn epsilon(&self) -> T {
        T::from_ratio(1, self.n as i64)
    }

    pub fn deformation(&self) -> &T {
        &self.deformation
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Same chain with a different atom count.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(n, self.deformation.clone(), self.cutoff)
    }

    /// Maps any integer label onto `1..=N`.
    #[inline]
    pub fn wrap(&self, i: i64) -> usize {
        wrap_index(i, self.n)
    }
}

/// Maps an integer atom label onto `1..=n`.
#[inline]
pub fn wrap_index(i: i64, n: usize) -> usize {
    ((i - 1).rem_euclid(n as i64) + 1) as usize
}

/// An N-periodic vector of values indexed `1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField<T> {
    values: Vec<T>,
}

impl<T: Scalar> PeriodicField<T> {
    pub fn from_values(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![T::zero(); n],
        }
    }

    pub fn constant(n: usize, c: T) -> Self {
        Self { values: vec![c; n] }
    }

    /// Unit impulse at atom `k`.
    pub fn impulse(n: usize, k: i64) -> Self {
        let mut f = Self::zeros(n);
        f.values[wrap_index(k, n) - 1] = T::one();
        f
    }

    /// Builds a field from a function of the atom label `1..=n`.
    pub fn from_fn(n: usize, f: impl FnMut(usize) -> T) -> Self {
        Self {
            values: (1..=n).map(f).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Periodic read at any integer label.
    #[inline]
    pub fn at(&self, i: i64) -> &T {
        &self.values[wrap_index(i, self.values.len()) - 1]
    }

    pub fn set(&mut self, i: i64, v: T) {
        let n = self.values.len();
        self.values[wrap_index(i, n) - 1] = v;
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.values.iter()
    }

    pub fn map(&self, f: impl Fn(&T) -> T) -> Self {
        Self {
            values: self.values.iter().map(f).collect(),
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: &T, other: &Self, b: &T) -> Result<Self> {
        self.check_len(other.len())?;
        Ok(Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a.clone() * x.clone() + b.clone() * y.clone())
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(&T::one(), other, &-T::one())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(&T::one(), other, &T::one())
    }

    pub fn scale(&self, a: &T) -> Self {
        self.map(|x| a.clone() * x.clone())
    }

    pub fn sum(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, x| acc + x.clone())
    }

    pub fn mean(&self) -> T {
        self.sum() / T::from_int(self.values.len() as i64)
    }

    /// max_j |u_j|.
    pub fn sup_norm(&self) -> T {
        self.values
            .iter()
            .map(|v| v.abs())
            .fold(T::zero(), |m, v| if v > m { v } else { m })
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.values.len() != n {
            return Err(QcError::LengthMismatch {
                expected: n,
                got: self.values.len(),
            });
        }
        Ok(())
    }
}

impl<T: Scalar> fmt::Display for PeriodicField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, v) in self.values.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Samples a 1-periodic function at the atom positions: `u_i = f(i/N)`.
pub fn sample_field<T: Real>(f: impl Fn(T) -> T, n: usize) -> PeriodicField<T> {
    let nn = T::from_int(n as i64);
    PeriodicField::from_fn(n, |i| f(T::from_int(i as i64) / nn))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DifferenceOrder {
    /// Backward quotient `(u_i − u_{i−r}) / (rε)`.
    First,
    /// Centred quotient `(u_{i+r} − 2u_i + u_{i−r}) / (rε)²`.
    Second,
}

/// Difference quotients `D_r u` or `D_r² u` with periodic wrap; ε = 1/len.
pub fn difference<T: Scalar>(
    u: &PeriodicField<T>,
    r: usize,
    order: DifferenceOrder,
) -> Result<PeriodicField<T>> {
    let n = u.len();
    if r == 0 || 2 * r > n {
        return Err(QcError::DifferenceRange { r, half: n / 2 });
    }
    let ri = r as i64;
    // 1/(rε) = N/r
    let inv_step = T::from_ratio(n as i64, ri);
    let two = T::from_int(2);
    let out = match order {
        DifferenceOrder::First => PeriodicField::from_fn(n, |i| {
            let i = i as i64;
            (u.at(i).clone() - u.at(i - ri).clone()) * inv_step.clone()
        }),
        DifferenceOrder::Second => {
            let inv_sq = inv_step.clone() * inv_step;
            PeriodicField::from_fn(n, |i| {
                let i = i as i64;
                (u.at(i + ri).clone() - two.clone() * u.at(i).clone() + u.at(i - ri).clone())
                    * inv_sq.clone()
            })
        }
    };
    Ok(out)
}

/// Shorthand for the nearest-neighbour backward quotient `D u`.
pub fn strain<T: Scalar>(u: &PeriodicField<T>) -> Result<PeriodicField<T>> {
    difference(u, 1, DifferenceOrder::First)
}

/// Order of a discrete norm. `p = ∞` is its own variant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormOrder {
    Finite(f64),
    Infinity,
}

impl NormOrder {
    pub fn validate(self) -> Result<Self> {
        match self {
            NormOrder::Finite(p) if !(p >= 1.0) || !p.is_finite() => Err(QcError::NormOrder(p)),
            _ => Ok(self),
        }
    }

    /// `1/p`, zero for `p = ∞`.
    pub fn reciprocal(self) -> f64 {
        match self {
            NormOrder::Finite(p) => 1.0 / p,
            NormOrder::Infinity => 0.0,
        }
    }

    pub fn label(self) -> String {
        match self {
            NormOrder::Finite(p) => format!("{p}"),
            NormOrder::Infinity => "inf".to_string(),
        }
    }
}

impl fmt::Display for NormOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl std::str::FromStr for NormOrder {
    type Err = QcError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if matches!(t, "inf" | "Inf" | "infinity" | "oo") {
            return Ok(NormOrder::Infinity);
        }
        let p: f64 = t
            .parse()
            .map_err(|_| QcError::Config(format!("malformed norm order '{t}'")))?;
        if p.is_infinite() {
            return Ok(NormOrder::Infinity);
        }
        NormOrder::Finite(p).validate()
    }
}

/// Discrete norm `(ε Σ |u_j|^p)^(1/p)`, or `max |u_j|` for `p = ∞`.
pub fn lp_norm<T: Real>(u: &PeriodicField<T>, p: NormOrder) -> Result<T> {
    match p.validate()? {
        NormOrder::Infinity => Ok(u.sup_norm()),
        NormOrder::Finite(p) => {
            let eps = T::from_ratio(1, u.len() as i64);
            if p == 1.0 {
                let s = u.iter().fold(T::zero(), |acc, v| acc + v.abs());
                return Ok(eps * s);
            }
            // scale by the sup norm to keep the powers in range
            let top = u.sup_norm();
            if top == T::zero() {
                return Ok(T::zero());
            }
            let pt = T::from_f64(p);
            let s = u
                .iter()
                .fold(T::zero(), |acc, v| acc + (v.abs() / top).powf(pt));
            Ok(top * (eps * s).powf(T::one() / pt))
        }
    }
}
