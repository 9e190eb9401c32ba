use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::norms::RiNorm;
use crate::scalar::{Exponent, Mode};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Lemma31,
    Thm32,
    Thm41,
    Thm43,
    Rearrange,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Lemma31, Suite::Thm32, Suite::Thm41, Suite::Thm43, Suite::Rearrange];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Lemma31 => "lemma31",
            Suite::Thm32 => "thm32",
            Suite::Thm41 => "thm41",
            Suite::Thm43 => "thm43",
            Suite::Rearrange => "rearrange",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WeightScheme {
    #[serde(rename = "equal")]
    Equal,
    /// Integers in `1..=64`, normalized to sum 1.
    #[serde(rename = "random-rational")]
    RandomRational,
    /// Equal on even trial indices, random on odd ones.
    #[serde(rename = "mixed")]
    Mixed,
}

impl FromStr for WeightScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal" => Ok(WeightScheme::Equal),
            "random" | "random-rational" => Ok(WeightScheme::RandomRational),
            "mixed" => Ok(WeightScheme::Mixed),
            other => Err(Error::InvalidConfig(format!("unknown weight scheme `{other}`"))),
        }
    }
}

/// Inclusive range of atom counts; trial `i` uses `min + i mod (max - min + 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AtomRange {
    pub min: usize,
    pub max: usize,
}

impl AtomRange {
    pub fn single(n: usize) -> Self {
        AtomRange { min: n, max: n }
    }

    pub fn atoms_for(&self, trial: u64) -> usize {
        let span = (self.max - self.min + 1) as u64;
        self.min + (trial % span) as usize
    }
}

impl FromStr for AtomRange {
    type Err = Error;

    /// `"4"`, `"2-8"` or `"2..8"` (inclusive).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("invalid atom count `{s}`"));
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let range = match s.split_once("..").or_else(|| s.split_once('-')) {
            Some((a, b)) => AtomRange { min: num(a)?, max: num(b.trim_start_matches('='))? },
            None => AtomRange::single(num(s)?),
        };
        if range.min == 0 || range.min > range.max {
            return Err(bad());
        }
        Ok(range)
    }
}

impl fmt::Display for AtomRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.min == self.max {
            write!(f, "{}", self.min)
        } else {
            write!(f, "{}-{}", self.min, self.max)
        }
    }
}

impl Serialize for AtomRange {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AtomRange {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Values `k / denominator` for integers `lo <= k <= hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Lattice {
    pub lo: i64,
    pub hi: i64,
    pub denominator: i64,
}

impl Default for Lattice {
    fn default() -> Self {
        Lattice { lo: -8, hi: 8, denominator: 4 }
    }
}

/// `(r, p1, q1, p2, q2)` with `1/r = 1/p1 + 1/q1 = 1/p2 + 1/q2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExponentTuple {
    pub r: Exponent,
    pub p1: Exponent,
    pub q1: Exponent,
    pub p2: Exponent,
    pub q2: Exponent,
}

impl ExponentTuple {
    pub fn new(r: Exponent, p1: Exponent, q1: Exponent, p2: Exponent, q2: Exponent) -> Result<Self> {
        let lhs = r.reciprocal();
        let first = p1.reciprocal() + q1.reciprocal();
        let second = p2.reciprocal() + q2.reciprocal();
        if lhs != first || lhs != second {
            return Err(Error::InvalidExponent(format!(
                "1/r = {lhs} but 1/p1 + 1/q1 = {first} and 1/p2 + 1/q2 = {second}"
            )));
        }
        if lhs > BigRational::one() {
            return Err(Error::InvalidExponent("r must be at least 1".into()));
        }
        Ok(ExponentTuple { r, p1, q1, p2, q2 })
    }

    /// `(p, ∞, p, ∞, p)`, the tuple matching the `L^∞`-weighted form.
    pub fn sup_weighted(p: Exponent) -> Self {
        ExponentTuple { r: p.clone(), p1: Exponent::Infinite, q1: p.clone(), p2: Exponent::Infinite, q2: p }
    }

    pub fn is_exact(&self) -> bool {
        [&self.r, &self.p1, &self.q1, &self.p2, &self.q2].iter().all(|e| e.is_exact())
    }
}

impl FromStr for ExponentTuple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts = s.split(',').map(Exponent::parse).collect::<Result<Vec<_>>>()?;
        let [r, p1, q1, p2, q2]: [Exponent; 5] = parts
            .try_into()
            .map_err(|_| Error::InvalidExponent(format!("expected five exponents in `{s}`")))?;
        ExponentTuple::new(r, p1, q1, p2, q2)
    }
}

impl fmt::Display for ExponentTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{},{}", self.r, self.p1, self.q1, self.p2, self.q2)
    }
}

impl Serialize for ExponentTuple {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExponentTuple {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// Parameters of one verification run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialConfig {
    pub suite: Suite,
    pub atoms: AtomRange,
    pub weights: WeightScheme,
    pub lattice: Lattice,
    pub trials: usize,
    pub seed: u64,
    pub mode: Mode,
    /// Only for `thm41`; defaults to `(1,∞,1,∞,1)`.
    pub exponents: Option<ExponentTuple>,
    /// Only for `thm43`; defaults to `L^1`.
    pub norm: Option<RiNorm>,
}

impl TrialConfig {
    /// Defaults: `10^4` trials over `n ∈ {2,…,8}` in exact mode, seed 0,
    /// mixed weights (equal weights for `thm43`).
    pub fn new(suite: Suite) -> Self {
        TrialConfig {
            suite,
            atoms: AtomRange { min: 2, max: 8 },
            weights: if suite == Suite::Thm43 { WeightScheme::Equal } else { WeightScheme::Mixed },
            lattice: Lattice::default(),
            trials: 10_000,
            seed: 0,
            mode: Mode::Exact,
            exponents: None,
            norm: None,
        }
    }

    pub fn with_atoms(mut self, atoms: AtomRange) -> Self {
        self.atoms = atoms;
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_weights(mut self, weights: WeightScheme) -> Self {
        self.weights = weights;
        self
    }

    pub fn with_exponents(mut self, exponents: ExponentTuple) -> Self {
        self.exponents = Some(exponents);
        self
    }

    pub fn with_norm(mut self, norm: RiNorm) -> Self {
        self.norm = Some(norm);
        self
    }

    pub fn exponent_tuple(&self) -> ExponentTuple {
        self.exponents.clone().unwrap_or_else(|| ExponentTuple::sup_weighted(Exponent::one()))
    }

    pub fn ri_norm(&self) -> RiNorm {
        self.norm.clone().unwrap_or_else(RiNorm::l1)
    }

    /// True when every quantity the suite computes is rational on rational
    /// data, so exact arithmetic can evaluate (or recheck) it.
    pub fn exact_capable(&self) -> bool {
        match self.suite {
            Suite::Lemma31 | Suite::Thm32 | Suite::Rearrange => true,
            Suite::Thm41 => self.exponent_tuple().is_exact(),
            Suite::Thm43 => {
                let x = self.ri_norm();
                x.is_exact() && RiNorm::associate(x).is_exact()
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.trials == 0 {
            return bad("trial count must be positive".into());
        }
        if self.atoms.min == 0 || self.atoms.min > self.atoms.max {
            return bad(format!("invalid atom range {}", self.atoms));
        }
        if self.lattice.lo > self.lattice.hi || self.lattice.denominator < 1 {
            return bad("invalid value lattice".into());
        }
        if self.exponents.is_some() && self.suite != Suite::Thm41 {
            return bad(format!("exponents do not apply to suite {}", self.suite));
        }
        if self.norm.is_some() && self.suite != Suite::Thm43 {
            return bad(format!("a norm does not apply to suite {}", self.suite));
        }
        if self.suite == Suite::Thm43 && self.weights != WeightScheme::Equal && !self.ri_norm().accepts_weighted() {
            return bad("thm43 with this norm requires equal weights".into());
        }
        if self.mode == Mode::Exact && !self.exact_capable() {
            return bad(format!("suite {} with these parameters needs irrational roots; use float mode", self.suite));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuples_are_validated_exactly() {
        assert!("1,2,2,3,1.5".parse::<ExponentTuple>().is_ok());
        assert!("1,2,2,3,2".parse::<ExponentTuple>().is_err());
        assert!("1,inf,1,inf,1".parse::<ExponentTuple>().is_ok());
        assert!("1,inf,1,4,4/3".parse::<ExponentTuple>().is_ok());
        assert!("2,inf,2,inf".parse::<ExponentTuple>().is_err());
        assert!("1/2,1,1,1,1".parse::<ExponentTuple>().is_err());
        let t: ExponentTuple = "2,inf,2,inf,2".parse().unwrap();
        assert_eq!(t, ExponentTuple::sup_weighted(Exponent::integer(2)));
        assert_eq!(t.to_string(), "2,inf,2,inf,2");
    }

    #[test]
    fn atom_ranges() {
        assert_eq!("4".parse::<AtomRange>().unwrap(), AtomRange::single(4));
        assert_eq!("2-8".parse::<AtomRange>().unwrap(), AtomRange { min: 2, max: 8 });
        assert_eq!("2..=6".parse::<AtomRange>().unwrap(), AtomRange { min: 2, max: 6 });
        assert!("0".parse::<AtomRange>().is_err());
        assert!("5-3".parse::<AtomRange>().is_err());
        let r = AtomRange { min: 2, max: 4 };
        assert_eq!((0..6).map(|i| r.atoms_for(i)).collect::<Vec<_>>(), vec![2, 3, 4, 2, 3, 4]);
    }

    #[test]
    fn config_validation() {
        assert!(TrialConfig::new(Suite::Thm32).validate().is_ok());
        let l2 = ExponentTuple::sup_weighted(Exponent::integer(2));
        assert!(TrialConfig::new(Suite::Thm41).with_exponents(l2.clone()).validate().is_err());
        assert!(TrialConfig::new(Suite::Thm41).with_exponents(l2.clone()).with_mode(Mode::Float).validate().is_ok());
        assert!(TrialConfig::new(Suite::Thm32).with_exponents(l2).validate().is_err());
        assert!(TrialConfig::new(Suite::Thm43).with_weights(WeightScheme::Mixed).validate().is_ok());
        let lorentz = RiNorm::lorentz(crate::verify::default_phi());
        assert!(TrialConfig::new(Suite::Thm43).with_norm(lorentz.clone()).validate().is_ok());
        assert!(TrialConfig::new(Suite::Thm43).with_norm(lorentz).with_weights(WeightScheme::Mixed).validate().is_err());
        assert!(TrialConfig::new(Suite::Thm32).with_trials(0).validate().is_err());
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = TrialConfig::new(Suite::Thm41)
            .with_exponents("1,inf,1,4,4/3".parse().unwrap())
            .with_mode(Mode::Float)
            .with_atoms(AtomRange::single(5));
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<TrialConfig>(&text).unwrap(), cfg);
    }
}
