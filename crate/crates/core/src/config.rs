//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored.
//! Every key has a default and unknown keys are errors.

use std::collections::BTreeSet;
use std::path::PathBuf;

use num_traits::{One, Zero};

use crate::chain::{ChainConfig, NormOrder};
use crate::error::{QcError, Result};
use crate::impossibility::min_residual;
use crate::model::{InterfaceStencil, ModelKind, Moduli};
use crate::partition::RegionPartition;
use crate::potential::PairPotential;
use crate::scalar::Scalar;
use crate::witness::Witness;
use crate::Rational;

/// Model selector; `custom` carries an optional explicit block.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelChoice {
    Atomistic,
    Continuum,
    Qce,
    Qnl,
    Qcf,
    /// Row-major `m×m` block in second-neighbour units; `None` selects the
    /// least-squares optimal symmetric block.
    Custom(Option<Vec<f64>>),
}

impl ModelChoice {
    pub fn name(&self) -> &'static str {
        match self {
            ModelChoice::Atomistic => "atomistic",
            ModelChoice::Continuum => "continuum",
            ModelChoice::Qce => "qce",
            ModelChoice::Qnl => "qnl",
            ModelChoice::Qcf => "qcf",
            ModelChoice::Custom(_) => "custom",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialChoice {
    Harmonic { k: String, s0: String },
    LennardJones,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelChoice,
    pub potential: PotentialChoice,
    /// Deformation gradient, kept as written so it can be read exactly.
    pub deformation: String,
    pub cutoff: usize,
    pub partition: Vec<(f64, f64)>,
    pub m: usize,
    pub reach: usize,
    pub n: usize,
    pub n_list: Vec<usize>,
    pub p_list: Vec<NormOrder>,
    pub witness: Witness,
    /// Amplitude of the witness displacement used by `energy`.
    pub amplitude: f64,
    pub m_list: Vec<usize>,
    pub out: Option<PathBuf>,
    pub exact: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelChoice::Atomistic,
            potential: PotentialChoice::Harmonic {
                k: "1".into(),
                s0: "1".into(),
            },
            deformation: "1.2".into(),
            cutoff: 2,
            partition: vec![(0.0, 0.5)],
            m: 4,
            reach: 2,
            n: 64,
            n_list: (6..=13).map(|k| 1usize << k).collect(),
            p_list: vec![NormOrder::Finite(1.0), NormOrder::Finite(2.0), NormOrder::Infinity],
            witness: Witness::PhasedSine,
            amplitude: 0.01,
            m_list: (1..=12).collect(),
            out: None,
            exact: false,
        }
    }
}

pub const KEYS: [&str; 18] = [
    "model", "block", "potential", "k", "s0", "F", "cutoff", "partition", "m", "reach", "N",
    "N_list", "p_list", "witness", "amplitude", "m_list", "out", "exact",
];

fn bad(line: usize, key: &str, msg: impl std::fmt::Display) -> QcError {
    QcError::Config(format!("line {line}: {key}: {msg}"))
}

fn number<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| bad(line, key, format!("'{v}': {e}")))
}

fn list<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<T> = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| number(line, key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(bad(line, key, "empty list"));
    }
    Ok(items)
}

/// `a..b` (inclusive) or a comma list.
fn usize_range(line: usize, key: &str, v: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = v.split_once("..") {
        let a: usize = number(line, key, a.trim())?;
        let b: usize = number(line, key, b.trim().trim_start_matches('='))?;
        if a > b {
            return Err(bad(line, key, "empty range"));
        }
        return Ok((a..=b).collect());
    }
    list(line, key, v)
}

/// Exact value of a decimal literal such as `1.2`, `-3`, `2.5e-1`.
pub fn parse_decimal(text: &str) -> Result<Rational> {
    let err = || QcError::Config(format!("'{text}' is not a decimal number"));
    let t = text.trim();
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(k) => (&t[..k], t[k + 1..].parse::<i32>().map_err(|_| err())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(err());
    }
    let all: String = format!("{int_part}{frac_part}");
    let numer: num_bigint::BigInt = all.parse().map_err(|_| err())?;
    let ten = Rational::from_int(10);
    let mut value = Rational::from_integer(numer);
    let shift = exponent - frac_part.len() as i32;
    for _ in 0..shift.unsigned_abs() {
        value = if shift > 0 { value * &ten } else { value / &ten };
    }
    Ok(if neg { -value } else { value })
}

fn decimal_f64(line: usize, key: &str, v: &str) -> Result<String> {
    let x: f64 = number(line, key, v)?;
    if !x.is_finite() {
        return Err(bad(line, key, "must be finite"));
    }
    parse_decimal(v).map_err(|e| bad(line, key, e))?;
    Ok(v.to_string())
}

/// Parses a configuration document; defaults fill every missing key.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut seen = BTreeSet::new();
    let mut model: Option<(usize, String)> = None;
    let mut block: Option<(usize, Vec<f64>)> = None;
    let mut potential: Option<(usize, String)> = None;
    let mut k = None;
    let mut s0 = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| QcError::Config(format!("line {line}: expected key=value")))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(QcError::Config(format!("line {line}: unknown key '{key}'")));
        }
        if !seen.insert(key.to_string()) {
            return Err(bad(line, key, "given twice"));
        }
        match key {
            "model" => model = Some((line, value.to_ascii_lowercase())),
            "block" => block = Some((line, list(line, key, value)?)),
            "potential" => potential = Some((line, value.to_ascii_lowercase())),
            "k" => k = Some(decimal_f64(line, key, value)?),
            "s0" => s0 = Some(decimal_f64(line, key, value)?),
            "F" => cfg.deformation = decimal_f64(line, key, value)?,
            "cutoff" => cfg.cutoff = number(line, key, value)?,
            "partition" => cfg.partition = parse_intervals(line, value)?,
            "m" => cfg.m = number(line, key, value)?,
            "reach" => cfg.reach = number(line, key, value)?,
            "N" => cfg.n = number(line, key, value)?,
            "N_list" => cfg.n_list = usize_list_or_powers(line, key, value)?,
            "p_list" => {
                cfg.p_list = list::<NormOrder>(line, key, value)?;
                for p in &cfg.p_list {
                    p.validate().map_err(|e| bad(line, key, e))?;
                }
            }
            "witness" => cfg.witness = number(line, key, value)?,
            "amplitude" => cfg.amplitude = number(line, key, value)?,
            "m_list" => cfg.m_list = usize_range(line, key, value)?,
            "out" => cfg.out = Some(PathBuf::from(value)),
            "exact" => cfg.exact = number(line, key, value)?,
            _ => unreachable!("key list checked above"),
        }
    }
    cfg.model = match model.as_ref().map(|(l, s)| (*l, s.as_str())) {
        None | Some((_, "atomistic")) => ModelChoice::Atomistic,
        Some((_, "continuum")) => ModelChoice::Continuum,
        Some((_, "qce")) => ModelChoice::Qce,
        Some((_, "qnl")) => ModelChoice::Qnl,
        Some((_, "qcf")) => ModelChoice::Qcf,
        Some((_, "custom" | "custom_qc")) => ModelChoice::Custom(None),
        Some((l, other)) => return Err(bad(l, "model", format!("unknown model '{other}'"))),
    };
    if let Some((line, values)) = block {
        match &mut cfg.model {
            ModelChoice::Custom(b) => *b = Some(values),
            _ => return Err(bad(line, "block", "only used with model=custom")),
        }
    }
    cfg.potential = match potential.as_ref().map(|(l, s)| (*l, s.as_str())) {
        None | Some((_, "harmonic")) => PotentialChoice::Harmonic {
            k: k.unwrap_or_else(|| "1".into()),
            s0: s0.unwrap_or_else(|| "1".into()),
        },
        Some((l, "lennard_jones" | "lj")) => {
            if k.is_some() || s0.is_some() {
                return Err(bad(l, "potential", "k and s0 only apply to the harmonic potential"));
            }
            PotentialChoice::LennardJones
        }
        Some((l, other)) => return Err(bad(l, "potential", format!("unknown potential '{other}'"))),
    };
    if cfg.m == 0 {
        return Err(QcError::InterfaceWidth);
    }
    if cfg.amplitude.is_nan() {
        return Err(QcError::Config("amplitude: not a number".into()));
    }
    // make sure every derived object can be built before any command runs
    cfg.chain(cfg.n)?;
    cfg.region()?;
    cfg.potential_f64()?;
    Ok(cfg)
}

/// `a,b` pairs separated by `;`, e.g. `0,0.25; 0.5,0.75`.
fn parse_intervals(line: usize, v: &str) -> Result<Vec<(f64, f64)>> {
    v.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| {
            let (a, b) = pair
                .split_once(',')
                .ok_or_else(|| bad(line, "partition", format!("'{pair}' is not 'a,b'")))?;
            Ok((number(line, "partition", a.trim())?, number(line, "partition", b.trim())?))
        })
        .collect()
}

/// Comma list, or `2^a..2^b` for consecutive powers of two.
fn usize_list_or_powers(line: usize, key: &str, v: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = v.split_once("..") {
        let exp = |s: &str| -> Result<u32> {
            let s = s.trim();
            let e = s
                .strip_prefix("2^")
                .ok_or_else(|| bad(line, key, format!("'{s}' is not of the form 2^k")))?;
            let e: u32 = number(line, key, e)?;
            if e > 40 {
                return Err(bad(line, key, "exponent too large"));
            }
            Ok(e)
        };
        let (a, b) = (exp(a)?, exp(b)?);
        if a > b {
            return Err(bad(line, key, "empty range"));
        }
        return Ok((a..=b).map(|k| 1usize << k).collect());
    }
    list(line, key, v)
}

impl RunConfig {
    pub fn deformation_f64(&self) -> f64 {
        self.deformation.parse().expect("validated while parsing")
    }

    pub fn chain(&self, n: usize) -> Result<ChainConfig<f64>> {
        ChainConfig::new(n, self.deformation_f64(), self.cutoff)
    }

    pub fn chain_exact(&self, n: usize) -> Result<ChainConfig<Rational>> {
        ChainConfig::new(n, parse_decimal(&self.deformation)?, self.cutoff)
    }

    pub fn region(&self) -> Result<RegionPartition> {
        RegionPartition::with_interface(self.partition.clone(), self.m, self.reach)
    }

    /// Partition for kinds that use one.
    pub fn region_for(&self, kind_needs: bool) -> Result<Option<RegionPartition>> {
        kind_needs.then(|| self.region()).transpose()
    }

    pub fn potential_f64(&self) -> Result<PairPotential<f64>> {
        Ok(match &self.potential {
            PotentialChoice::Harmonic { k, s0 } => {
                PairPotential::harmonic(k.parse().map_err(cfg_err)?, s0.parse().map_err(cfg_err)?)
            }
            PotentialChoice::LennardJones => PairPotential::LennardJones,
        })
    }

    pub fn model_f64(&self) -> Result<ModelKind<f64>> {
        Ok(match &self.model {
            ModelChoice::Atomistic => ModelKind::Atomistic,
            ModelChoice::Continuum => ModelKind::Continuum,
            ModelChoice::Qce => ModelKind::Qce,
            ModelChoice::Qnl => ModelKind::Qnl,
            ModelChoice::Qcf => ModelKind::Qcf,
            ModelChoice::Custom(Some(values)) => {
                ModelKind::CustomQc(InterfaceStencil::new(self.m, values.clone())?)
            }
            ModelChoice::Custom(None) => ModelKind::CustomQc(min_residual(self.m)?.1),
        })
    }

    /// Exact model. A least-squares block is converted from its double value.
    pub fn model_exact(&self) -> Result<ModelKind<Rational>> {
        let to_exact = |v: &f64| {
            crate::scalar::rational_from_f64(*v)
                .ok_or_else(|| QcError::Config(format!("{v} has no exact value")))
        };
        Ok(match self.model_f64()? {
            ModelKind::Atomistic => ModelKind::Atomistic,
            ModelKind::Continuum => ModelKind::Continuum,
            ModelKind::Qce => ModelKind::Qce,
            ModelKind::Qnl => ModelKind::Qnl,
            ModelKind::Qcf => ModelKind::Qcf,
            ModelKind::CustomQc(block) => {
                let m = block.m();
                let mut values = Vec::with_capacity(m * m);
                for i in 1..=m {
                    for j in 1..=m {
                        values.push(to_exact(block.get(i, j))?);
                    }
                }
                ModelKind::CustomQc(InterfaceStencil::new(m, values)?)
            }
        })
    }

    /// Moduli `φ''(rF)`, `φ'(rF)` evaluated in exact arithmetic.
    pub fn moduli_exact(&self) -> Result<Moduli<Rational>> {
        let f = parse_decimal(&self.deformation)?;
        let mut curvature = Vec::with_capacity(self.cutoff);
        let mut slope = Vec::with_capacity(self.cutoff);
        for r in 1..=self.cutoff {
            let s = Rational::from_int(r as i64) * &f;
            let (c, d) = match &self.potential {
                PotentialChoice::Harmonic { k, s0 } => {
                    let k = parse_decimal(k)?;
                    let s0 = parse_decimal(s0)?;
                    (k.clone(), k * (s - s0))
                }
                PotentialChoice::LennardJones => {
                    if s <= Rational::zero() {
                        return Err(QcError::PotentialDomain(Scalar::to_f64(&s)));
                    }
                    let inv = Rational::one() / s;
                    let p = |e: i32| {
                        let mut acc = Rational::one();
                        for _ in 0..e {
                            acc *= &inv;
                        }
                        acc
                    };
                    (
                        Rational::from_int(156) * p(14) - Rational::from_int(84) * p(8),
                        Rational::from_int(12) * (p(7) - p(13)),
                    )
                }
            };
            curvature.push(c);
            slope.push(d);
        }
        Ok(Moduli::new(curvature, slope))
    }
}

fn cfg_err(e: std::num::ParseFloatError) -> QcError {
    QcError::Config(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.model, ModelChoice::Atomistic);
        assert_eq!(c.n, 64);
        assert_eq!(c.deformation_f64(), 1.2);
        assert!(matches!(c.potential, PotentialChoice::Harmonic { .. }));
    }

    #[test]
    fn overrides() {
        let c = parse_config("model=qnl\nN=1024\nF=1.2").unwrap();
        assert_eq!(c.model, ModelChoice::Qnl);
        assert_eq!(c.n, 1024);
        assert_eq!(c.m, 4);
    }

    #[test]
    fn unknown_key_is_named() {
        let e = parse_config("modle=qnl").unwrap_err();
        assert!(e.to_string().contains("modle"), "{e}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn comments_lists_and_ranges() {
        let text = "# header\nN_list = 2^6..2^8  # powers\np_list=1, inf\nm_list=2..4\npartition=0,0.25;0.5,0.75\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.n_list, vec![64, 128, 256]);
        assert_eq!(c.p_list, vec![NormOrder::Finite(1.0), NormOrder::Infinity]);
        assert_eq!(c.m_list, vec![2, 3, 4]);
        assert_eq!(c.partition, vec![(0.0, 0.25), (0.5, 0.75)]);
    }

    #[test]
    fn malformed_values() {
        for text in ["N=abc", "F=1.2.3", "model=qxx", "p_list=0.5", "N_list=", "N=64\nN=128", "x"] {
            let e = parse_config(text).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{text}");
        }
    }

    #[test]
    fn inadmissible_combinations() {
        assert!(parse_config("block=1,2,3,4").is_err());
        assert!(parse_config("potential=lj\nk=2").is_err());
        assert!(parse_config("N=8").is_err());
        assert!(parse_config("partition=0,0.5;0.4,0.9").is_err());
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_decimal("1.2").unwrap(), Rational::from_ratio(6, 5));
        assert_eq!(parse_decimal("-0.25").unwrap(), Rational::from_ratio(-1, 4));
        assert_eq!(parse_decimal("2.5e-1").unwrap(), Rational::from_ratio(1, 4));
        assert_eq!(parse_decimal("3E2").unwrap(), Rational::from_int(300));
        assert!(parse_decimal("1.x").is_err());
        assert!(parse_decimal(".").is_err());
    }

    #[test]
    fn exact_moduli_match_floats() {
        for pot in ["", "potential=lj\nF=1.1"] {
            let c = parse_config(pot).unwrap();
            let exact = c.moduli_exact().unwrap();
            let float = Moduli::from_potential(&c.potential_f64().unwrap(), c.deformation_f64(), 2).unwrap();
            for r in 1..=2 {
                let a = Scalar::to_f64(exact.curvature(r));
                assert!((a - float.curvature(r)).abs() <= 1e-12 * a.abs().max(1.0));
                let b = Scalar::to_f64(exact.slope(r));
                assert!((b - float.slope(r)).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }
}
