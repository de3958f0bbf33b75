//! Atomistic/continuum decomposition of the period `(0, 1]`.
//!
//! The atomistic region is a finite union of half-open intervals `(a, b]`;
//! the continuum region is its complement. Atom `i` is atomistic when
//! `i/N` lies in one of the intervals.
//!
//! Every boundary between the two regions carries an interface segment: the
//! `m` atoms of the coupling block (split with `⌈m/2⌉` atoms on the
//! atomistic side) together with the collar of atoms whose `reach`
//! neighbourhood crosses the boundary. Everything else is interior.

use std::fmt;

use crate::chain::wrap_index;
use crate::error::{QcError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AtomLabel {
    InteriorAtomistic,
    InteriorContinuum,
    Interface,
}

impl AtomLabel {
    pub fn name(self) -> &'static str {
        match self {
            AtomLabel::InteriorAtomistic => "interior_atomistic",
            AtomLabel::InteriorContinuum => "interior_continuum",
            AtomLabel::Interface => "interface",
        }
    }
}

/// Which side of a boundary holds the continuum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Continuum at lower labels, atomistic at higher labels.
    ContinuumToAtomistic,
    /// Atomistic at lower labels, continuum at higher labels.
    AtomisticToContinuum,
}

/// A region boundary between atoms `left` and `left + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Boundary {
    /// Last atom before the boundary, in `1..=N`.
    pub left: i64,
    pub orientation: Orientation,
    m: usize,
    reach: usize,
}

impl Boundary {
    /// Unwrapped label of block atom `local` (1-based). Local label 1 is the
    /// block atom farthest into the continuum, local label `m` the one
    /// farthest into the atomistic region.
    pub fn block_atom(&self, local: i64) -> i64 {
        let cont_side = (self.m / 2) as i64;
        match self.orientation {
            Orientation::ContinuumToAtomistic => self.left - cont_side + local,
            Orientation::AtomisticToContinuum => self.left + cont_side + 1 - local,
        }
    }

    /// Number of atoms in the interface block.
    pub fn width(&self) -> usize {
        self.m
    }

    /// +1 when local labels increase with global labels, −1 when mirrored.
    pub fn direction(&self) -> i64 {
        match self.orientation {
            Orientation::ContinuumToAtomistic => 1,
            Orientation::AtomisticToContinuum => -1,
        }
    }

    /// Inclusive unwrapped label range covered by block and collar.
    pub fn segment(&self) -> (i64, i64) {
        let m = self.m as i64;
        let reach = self.reach as i64;
        let a = self.block_atom(1);
        let b = self.block_atom(m);
        let (blo, bhi) = (a.min(b), a.max(b));
        let (clo, chi) = (self.left - reach + 1, self.left + reach);
        (blo.min(clo), bhi.max(chi))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionPartition {
    intervals: Vec<(f64, f64)>,
    m: usize,
    reach: usize,
}

impl RegionPartition {
    pub const DEFAULT_WIDTH: usize = 4;
    pub const DEFAULT_REACH: usize = 2;

    /// Validated partition with default interface width and reach.
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        Self::with_interface(intervals, Self::DEFAULT_WIDTH, Self::DEFAULT_REACH)
    }

    pub fn with_interface(intervals: Vec<(f64, f64)>, m: usize, reach: usize) -> Result<Self> {
        if m == 0 {
            return Err(QcError::InterfaceWidth);
        }
        if reach == 0 {
            return Err(QcError::InvalidPartition("reach must be positive".into()));
        }
        let violations = validate(&intervals);
        if !violations.is_empty() {
            let msg: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(QcError::InvalidPartition(msg.join("; ")));
        }
        Ok(Self { intervals, m, reach })
    }

    /// Atomistic region is one interval `(0, fraction]`.
    pub fn half_open(fraction: f64) -> Result<Self> {
        Self::new(vec![(0.0, fraction)])
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn interface_width(&self) -> usize {
        self.m
    }

    pub fn reach(&self) -> usize {
        self.reach
    }

    /// True when position `x` lies in the atomistic region.
    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a < x && x <= b)
    }

    /// Per-atom membership in the atomistic region, index 0 is atom 1.
    pub fn membership(&self, n: usize) -> Vec<bool> {
        (1..=n).map(|i| self.contains(i as f64 / n as f64)).collect()
    }

    pub fn boundaries(&self, n: usize) -> Vec<Boundary> {
        let inside = self.membership(n);
        (1..=n)
            .filter_map(|k| {
                let here = inside[k - 1];
                let next = inside[wrap_index(k as i64 + 1, n) - 1];
                (here != next).then(|| Boundary {
                    left: k as i64,
                    orientation: if next {
                        Orientation::ContinuumToAtomistic
                    } else {
                        Orientation::AtomisticToContinuum
                    },
                    m: self.m,
                    reach: self.reach,
                })
            })
            .collect()
    }

    /// Boundaries after checking that their interface segments stay apart:
    /// consecutive segments must be separated by at least `2·reach` atoms.
    pub fn checked_boundaries(&self, n: usize) -> Result<Vec<Boundary>> {
        let bounds = self.boundaries(n);
        let needed: usize = bounds
            .iter()
            .map(|b| {
                let (lo, hi) = b.segment();
                (hi - lo + 1) as usize + 2 * self.reach
            })
            .sum();
        if needed > n {
            return Err(QcError::CollarOverlap { n, needed });
        }
        for (k, b) in bounds.iter().enumerate() {
            let next = &bounds[(k + 1) % bounds.len()];
            let (_, hi) = b.segment();
            let (mut lo, _) = next.segment();
            if lo <= b.left {
                lo += n as i64;
            }
            if bounds.len() > 1 && lo - hi - 1 < 2 * self.reach as i64 {
                return Err(QcError::CollarOverlap { n, needed });
            }
        }
        Ok(bounds)
    }

    /// Labels every atom as interior atomistic, interior continuum or interface.
    pub fn classify(&self, n: usize) -> Result<AtomLabels> {
        let bounds = self.checked_boundaries(n)?;
        let inside = self.membership(n);
        let mut labels: Vec<AtomLabel> = inside
            .iter()
            .map(|&a| {
                if a {
                    AtomLabel::InteriorAtomistic
                } else {
                    AtomLabel::InteriorContinuum
                }
            })
            .collect();
        for b in &bounds {
            let (lo, hi) = b.segment();
            for i in lo..=hi {
                labels[wrap_index(i, n) - 1] = AtomLabel::Interface;
            }
        }
        Ok(AtomLabels { labels })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty { index: usize },
    OutOfRange { index: usize },
    Overlap { first: usize, second: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty { index } => write!(f, "interval {index} is empty"),
            Violation::OutOfRange { index } => write!(f, "interval {index} leaves (0, 1]"),
            Violation::Overlap { first, second } => {
                write!(f, "intervals {first} and {second} overlap")
            }
        }
    }
}

/// Lists every structural problem with an interval set. An empty list of
/// intervals is a valid, purely continuum, chain.
pub fn validate(intervals: &[(f64, f64)]) -> Vec<Violation> {
    let mut out = Vec::new();
    for (k, &(a, b)) in intervals.iter().enumerate() {
        if !(a < b) {
            out.push(Violation::Empty { index: k });
        }
        if !(a >= 0.0 && b <= 1.0) {
            out.push(Violation::OutOfRange { index: k });
        }
    }
    for i in 0..intervals.len() {
        for j in i + 1..intervals.len() {
            let (a1, b1) = intervals[i];
            let (a2, b2) = intervals[j];
            if a1 < b2 && a2 < b1 && a1 < b1 && a2 < b2 {
                out.push(Violation::Overlap { first: i, second: j });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomLabels {
    labels: Vec<AtomLabel>,
}

impl AtomLabels {
    pub fn labels(&self) -> &[AtomLabel] {
        &self.labels
    }

    /// Label of atom `i` (periodic).
    pub fn label(&self, i: i64) -> AtomLabel {
        self.labels[wrap_index(i, self.labels.len()) - 1]
    }

    /// Sorted atom labels (1-based) carrying `label`.
    pub fn atoms(&self, label: AtomLabel) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == label)
            .map(|(k, _)| k + 1)
            .collect()
    }

    pub fn count(&self, label: AtomLabel) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixteen_atoms_half_atomistic() {
        let p = RegionPartition::half_open(0.5).unwrap();
        let l = p.classify(16).unwrap();
        assert_eq!(l.atoms(AtomLabel::InteriorAtomistic), vec![3, 4, 5, 6]);
        assert_eq!(l.atoms(AtomLabel::InteriorContinuum), vec![11, 12, 13, 14]);
        assert_eq!(
            l.atoms(AtomLabel::Interface),
            vec![1, 2, 7, 8, 9, 10, 15, 16]
        );
    }

    #[test]
    fn fully_atomistic() {
        let p = RegionPartition::new(vec![(0.0, 1.0)]).unwrap();
        let l = p.classify(12).unwrap();
        assert_eq!(l.count(AtomLabel::InteriorAtomistic), 12);
        let c = RegionPartition::new(vec![]).unwrap();
        assert_eq!(c.classify(12).unwrap().count(AtomLabel::InteriorContinuum), 12);
    }

    #[test]
    fn overlapping_collars_rejected() {
        let p = RegionPartition::half_open(0.5).unwrap();
        assert!(matches!(p.classify(8), Err(QcError::CollarOverlap { .. })));
    }

    #[test]
    fn validation() {
        assert_eq!(
            validate(&[(0.0, 0.5), (0.25, 0.75)]),
            vec![Violation::Overlap { first: 0, second: 1 }]
        );
        assert!(validate(&[(0.0, 0.5)]).is_empty());
        assert!(validate(&[]).is_empty());
        assert!(validate(&[(0.0, 0.5), (0.5, 1.0)]).is_empty());
        assert_eq!(validate(&[(0.4, 0.4)]), vec![Violation::Empty { index: 0 }]);
        assert_eq!(validate(&[(-0.1, 0.4)]), vec![Violation::OutOfRange { index: 0 }]);
        assert!(RegionPartition::new(vec![(0.2, 0.1)]).is_err());
        assert!(RegionPartition::with_interface(vec![(0.0, 0.5)], 0, 2).is_err());
    }

    #[test]
    fn block_placement() {
        let p = RegionPartition::half_open(0.5).unwrap();
        let b = p.boundaries(32);
        assert_eq!(b.len(), 2);
        // atoms 1..16 atomistic: A->C between 16|17, C->A between 32|1
        let ac = b.iter().find(|b| b.left == 16).unwrap();
        assert_eq!(ac.orientation, Orientation::AtomisticToContinuum);
        let ca = b.iter().find(|b| b.left == 32).unwrap();
        assert_eq!(ca.orientation, Orientation::ContinuumToAtomistic);
        // continuum side holds floor(m/2) = 2 atoms, local 1 deepest in C
        assert_eq!((1..=4).map(|l| ca.block_atom(l)).collect::<Vec<_>>(), vec![31, 32, 33, 34]);
        assert_eq!((1..=4).map(|l| ac.block_atom(l)).collect::<Vec<_>>(), vec![18, 17, 16, 15]);
    }

    #[test]
    fn odd_width_puts_extra_atom_on_atomistic_side() {
        let p = RegionPartition::with_interface(vec![(0.0, 0.5)], 5, 2).unwrap();
        let b = p.boundaries(64);
        let ca = b.iter().find(|b| b.left == 64).unwrap();
        // 2 continuum atoms (63, 64) and 3 atomistic atoms (65=1, 2, 3)
        assert_eq!((1..=5).map(|l| ca.block_atom(l)).collect::<Vec<_>>(), vec![63, 64, 65, 66, 67]);
        let l = p.classify(64).unwrap();
        assert_eq!(l.label(3), AtomLabel::Interface);
        assert_eq!(l.label(4), AtomLabel::InteriorAtomistic);
    }

    #[test]
    fn interface_size_does_not_grow() {
        let p = RegionPartition::new(vec![(0.25, 0.5)]).unwrap();
        for n in [32, 64, 128, 1024] {
            let l = p.classify(n).unwrap();
            assert_eq!(l.count(AtomLabel::Interface), 8);
        }
    }
}
