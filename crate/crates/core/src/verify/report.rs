use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::{Suite, TrialConfig};
use super::generate::generate_instance;
use super::suites::{evaluate, fixtures, Check, Fixture, Relation};
use crate::io::Instance;
use crate::rearrange::decreasing_rearrangement;
use crate::scalar::{format_rational, FloatWidth, Mode, Quad, Scalar};
use crate::Result;

/// Violations at 128 bits must exceed this fraction of the larger side to be
/// certified.
pub const QUAD_CERTIFY_TOLERANCE: f64 = 1e-25;

/// At most this many grazes are listed individually.
pub const GRAZE_LIST_LIMIT: usize = 100;

const BIN_EDGES: [f64; 6] = [1e-12, 1e-9, 1e-6, 1e-3, 1e-1, 1.0];
const BIN_LABELS: [&str; 8] = ["<0", "0", "(0,1e-12]", "(1e-12,1e-9]", "(1e-9,1e-6]", "(1e-6,1e-3]", "(1e-3,1e-1]", "(1e-1,1]"];
const BIN_OVERFLOW: &str = ">1";

/// The recomputation that confirmed a violation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recheck {
    /// `exact` or `quad`.
    pub mode: String,
    pub lhs: String,
    pub rhs: String,
}

/// A confirmed violation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    /// `trial:<index>` or `fixture:<name>`.
    pub source: String,
    pub property: String,
    pub instance: Value,
    pub lhs: String,
    pub rhs: String,
    pub recheck: Recheck,
}

/// A float-mode failure that did not survive the precise recheck.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Graze {
    pub source: String,
    pub property: String,
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub bin: String,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyTally {
    pub name: String,
    pub checks: usize,
    pub passed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureOutcome {
    pub name: String,
    pub passed: bool,
    pub lhs: Option<String>,
    pub rhs: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: Suite,
    pub trials: usize,
    pub violations: Vec<Certificate>,
    /// Smallest `rhs − lhs` over inequality checks of the random trials.
    pub min_gap: Option<String>,
    pub argmin_instance: Option<Value>,
    pub argmin_trial: Option<u64>,
    /// Bits of the float type used, absent in exact mode.
    pub precision: Option<u32>,
    pub grazes: Vec<Graze>,
    pub graze_count: usize,
    /// Per-trial smallest gap relative to the larger side.
    pub histogram: Vec<Bin>,
    pub properties: Vec<PropertyTally>,
    pub fixtures: Vec<FixtureOutcome>,
    pub config: TrialConfig,
}

impl VerificationReport {
    /// Serialization with a fixed field order; byte-identical for identical
    /// configurations.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::Error::Malformed(format!("report: {e}")))
    }

    pub fn has_violations(&self) -> bool {
        !self.violations.is_empty()
    }
}

/// Runs `cfg` with `f64` in float mode.
pub fn run(cfg: &TrialConfig) -> Result<VerificationReport> {
    run_with(cfg, FloatWidth::Double)
}

/// Runs `cfg`, using `width` for float mode.
pub fn run_with(cfg: &TrialConfig, width: FloatWidth) -> Result<VerificationReport> {
    cfg.validate()?;
    match (cfg.mode, width) {
        (Mode::Exact, _) => run_in::<BigRational>(cfg, None),
        (Mode::Float, FloatWidth::Double) => run_in::<f64>(cfg, Some(width.bits())),
        (Mode::Float, FloatWidth::Quad) => run_in::<Quad>(cfg, Some(width.bits())),
    }
}

struct Outcome<T> {
    checks: Vec<Check<T>>,
    certificates: Vec<Certificate>,
    grazes: Vec<Graze>,
}

fn assess<T: Scalar>(cfg: &TrialConfig, source: &str, instance: &Instance, checks: Vec<Check<T>>) -> Outcome<T> {
    let mut certificates = Vec::new();
    let mut grazes = Vec::new();
    let failing: Vec<usize> = (0..checks.len()).filter(|&i| !checks[i].holds()).collect();
    if !failing.is_empty() {
        let recheck = if T::is_exact() { None } else { Some(recompute(cfg, instance)) };
        for i in failing {
            let c = &checks[i];
            let confirmed = match &recheck {
                None => Some(Recheck { mode: "exact".into(), lhs: c.lhs.to_literal(), rhs: c.rhs.to_literal() }),
                Some(precise) => precise.get(i).cloned().flatten(),
            };
            match confirmed {
                Some(recheck) => certificates.push(Certificate {
                    source: source.to_string(),
                    property: c.property.to_string(),
                    instance: instance.to_value(),
                    lhs: c.lhs.to_literal(),
                    rhs: c.rhs.to_literal(),
                    recheck,
                }),
                None => grazes.push(Graze {
                    source: source.to_string(),
                    property: c.property.to_string(),
                    lhs: c.lhs.to_literal(),
                    rhs: c.rhs.to_literal(),
                }),
            }
        }
    }
    Outcome { checks, certificates, grazes }
}

/// For each check, `Some` when a precise recomputation still fails it.
/// Exact arithmetic when the configuration allows it, 128-bit otherwise.
fn recompute(cfg: &TrialConfig, instance: &Instance) -> Vec<Option<Recheck>> {
    if cfg.exact_capable() {
        if let Ok(checks) = evaluate::<BigRational>(cfg, instance) {
            return checks
                .iter()
                .map(|c| (!c.holds()).then(|| Recheck { mode: "exact".into(), lhs: c.lhs.to_literal(), rhs: c.rhs.to_literal() }))
                .collect();
        }
    }
    match evaluate::<Quad>(cfg, instance) {
        Ok(checks) => checks
            .iter()
            .map(|c| {
                (!c.holds_within(QUAD_CERTIFY_TOLERANCE))
                    .then(|| Recheck { mode: "quad".into(), lhs: c.lhs.to_literal(), rhs: c.rhs.to_literal() })
            })
            .collect(),
        Err(_) => Vec::new(),
    }
}

fn run_fixture<T: Scalar>(cfg: &TrialConfig, fx: &Fixture) -> (FixtureOutcome, Outcome<T>) {
    let fcfg = fx.config(cfg);
    let checks = match evaluate::<T>(&fcfg, &fx.instance) {
        Ok(c) => c,
        Err(e) => {
            let outcome = FixtureOutcome { name: fx.name.clone(), passed: false, lhs: None, rhs: None, detail: Some(e.to_string()) };
            return (outcome, Outcome { checks: Vec::new(), certificates: Vec::new(), grazes: Vec::new() });
        }
    };
    let mut detail = None;
    if let (Some((l, r)), Some(first)) = (&fx.expected, checks.first()) {
        let close = |a: &T, b: &BigRational| {
            let b = T::from_rational(b);
            crate::scalar::nearly_equal(a, &b, crate::rearrange::FLOAT_CHECK_TOLERANCE)
        };
        if !close(&first.lhs, l) || !close(&first.rhs, r) {
            detail = Some(format!("expected ({}, {})", format_rational(l), format_rational(r)));
        }
    }
    if let Some(expected) = &fx.expected_profile {
        let profile = fx
            .instance
            .space::<T>()
            .and_then(|s| fx.instance.function(&s, "f"))
            .map(|f| decreasing_rearrangement(&f));
        let want = crate::rearrange::StepProfile::new(
            expected.iter().map(|(v, l)| (T::from_rational(v), T::from_rational(l))).collect(),
        );
        let matches = match (profile, want) {
            (Ok(p), Ok(w)) => p.same_function(&w),
            _ => false,
        };
        if !matches {
            detail = Some("profile differs from the expected profile".into());
        }
    }
    let first = checks.first().map(|c| (c.lhs.to_literal(), c.rhs.to_literal()));
    let outcome = assess(&fcfg, &format!("fixture:{}", fx.name), &fx.instance, checks);
    let passed = detail.is_none() && outcome.certificates.is_empty();
    let (lhs, rhs) = first.unzip();
    (FixtureOutcome { name: fx.name.clone(), passed, lhs, rhs, detail }, outcome)
}

fn bin_label<T: Scalar>(checks: &[Check<T>]) -> Option<&'static str> {
    let rel = checks
        .iter()
        .filter(|c| c.relation == Relation::Le)
        .map(|c| {
            let scale = c.lhs.abs().to_f64().max(c.rhs.abs().to_f64());
            let gap = c.gap().to_f64();
            if gap == 0.0 {
                0.0
            } else {
                gap / scale
            }
        })
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.min(r))))?;
    Some(if rel < 0.0 {
        BIN_LABELS[0]
    } else if rel == 0.0 {
        BIN_LABELS[1]
    } else {
        BIN_EDGES.iter().position(|&e| rel <= e).map_or(BIN_OVERFLOW, |i| BIN_LABELS[i + 2])
    })
}

fn run_in<T: Scalar>(cfg: &TrialConfig, precision: Option<u32>) -> Result<VerificationReport> {
    let outcomes: Vec<(Instance, Outcome<T>)> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let instance = generate_instance(cfg, trial);
            let checks = evaluate::<T>(cfg, &instance)?;
            let outcome = assess(cfg, &format!("trial:{trial}"), &instance, checks);
            Ok((instance, outcome))
        })
        .collect::<Result<_>>()?;

    let mut violations = Vec::new();
    let mut grazes = Vec::new();
    let mut tallies: Vec<PropertyTally> = Vec::new();
    let mut min_gap: Option<(T, u64)> = None;
    let mut counts = vec![0usize; BIN_LABELS.len() + 1];

    for (trial, (_, outcome)) in outcomes.iter().enumerate() {
        for c in &outcome.checks {
            let tally = match tallies.iter_mut().find(|t| t.name == c.property) {
                Some(t) => t,
                None => {
                    tallies.push(PropertyTally { name: c.property.to_string(), checks: 0, passed: 0 });
                    tallies.last_mut().expect("just pushed")
                }
            };
            tally.checks += 1;
            tally.passed += usize::from(c.holds());
            if c.relation == Relation::Le {
                let gap = c.gap();
                if min_gap.as_ref().map_or(true, |(m, _)| gap < *m) {
                    min_gap = Some((gap, trial as u64));
                }
            }
        }
        if let Some(label) = bin_label(&outcome.checks) {
            let slot = BIN_LABELS.iter().position(|&l| l == label).unwrap_or(BIN_LABELS.len());
            counts[slot] += 1;
        }
        violations.extend(outcome.certificates.iter().cloned());
        grazes.extend(outcome.grazes.iter().cloned());
    }

    let mut fixture_outcomes = Vec::new();
    for fx in fixtures(cfg.suite) {
        let (summary, outcome) = run_fixture::<T>(cfg, &fx);
        if !summary.passed && outcome.certificates.is_empty() {
            violations.push(Certificate {
                source: format!("fixture:{}", fx.name),
                property: "fixture_expectation".into(),
                instance: fx.instance.to_value(),
                lhs: summary.lhs.clone().unwrap_or_default(),
                rhs: summary.rhs.clone().unwrap_or_default(),
                recheck: Recheck {
                    mode: if T::is_exact() { "exact".into() } else { "float".into() },
                    lhs: summary.detail.clone().unwrap_or_default(),
                    rhs: String::new(),
                },
            });
        }
        violations.extend(outcome.certificates);
        grazes.extend(outcome.grazes);
        fixture_outcomes.push(summary);
    }

    let labels = BIN_LABELS.iter().copied().chain([BIN_OVERFLOW]);
    let histogram = labels.zip(counts).map(|(bin, count)| Bin { bin: bin.to_string(), count }).collect();
    let graze_count = grazes.len();
    grazes.truncate(GRAZE_LIST_LIMIT);
    let (min_gap, argmin_instance, argmin_trial) = match min_gap {
        Some((gap, t)) => (Some(gap.to_literal()), Some(outcomes[t as usize].0.to_value()), Some(t)),
        None => (None, None, None),
    };
    Ok(VerificationReport {
        suite: cfg.suite,
        trials: cfg.trials,
        violations,
        min_gap,
        argmin_instance,
        argmin_trial,
        precision,
        grazes,
        graze_count,
        histogram,
        properties: tallies,
        fixtures: fixture_outcomes,
        config: cfg.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::config::AtomRange;

    #[test]
    fn exact_thm32_small_run_is_clean() {
        let cfg = TrialConfig::new(Suite::Thm32).with_trials(300).with_atoms(AtomRange { min: 2, max: 5 }).with_seed(3);
        let r = run(&cfg).unwrap();
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        assert!(r.fixtures.iter().all(|f| f.passed));
        assert!(r.min_gap.is_some());
        assert_eq!(r.histogram.iter().map(|b| b.count).sum::<usize>(), 300);
    }

    #[test]
    fn report_is_reproducible_and_round_trips() {
        let cfg = TrialConfig::new(Suite::Lemma31).with_trials(100).with_seed(9);
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.to_canonical_json(), b.to_canonical_json());
        assert_eq!(VerificationReport::from_json(&a.to_canonical_json()).unwrap(), a);
    }

    #[test]
    fn float_run_reports_precision() {
        let cfg = TrialConfig::new(Suite::Thm41).with_trials(50).with_mode(Mode::Float);
        let r = run(&cfg).unwrap();
        assert_eq!(r.precision, Some(53));
        assert!(r.violations.is_empty());
        let q = run_with(&cfg.with_trials(5), FloatWidth::Quad).unwrap();
        assert_eq!(q.precision, Some(128));
    }

    #[test]
    fn invalid_config_is_rejected() {
        assert!(run(&TrialConfig::new(Suite::Thm32).with_trials(0)).is_err());
    }
}
