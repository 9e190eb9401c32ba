//! Hill-climbing search for instances where the Leibniz-type bounds are
//! nearly attained, and ratio tables over one or two parameters.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::io::Instance;
use crate::norms::RiNorm;
use crate::scalar::{Exponent, Quad, Scalar};
use crate::space::{DiscreteSpace, SimpleFunction};
use crate::verify::{thm32_sides, thm41_sides, thm43_sides, Certificate, ExponentTuple, Recheck};
use crate::{Error, Result};

/// Ratios above `1 + RATIO_TOLERANCE` are rechecked precisely.
pub const RATIO_TOLERANCE: f64 = 1e-9;

/// Number of points kept in a search trace, at most.
const TRACE_POINTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    Thm32,
    Thm41,
    Thm43,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Thm32 => "thm32-ratio",
            Target::Thm41 => "thm41-ratio",
            Target::Thm43 => "thm43-ratio",
        }
    }

    fn functions(self) -> &'static [&'static str] {
        match self {
            Target::Thm32 => &["f", "g", "h"],
            Target::Thm41 | Target::Thm43 => &["f", "g"],
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim_end_matches("-ratio") {
            "thm32" => Ok(Target::Thm32),
            "thm41" => Ok(Target::Thm41),
            "thm43" => Ok(Target::Thm43),
            other => Err(Error::InvalidConfig(format!("unknown search target `{other}`"))),
        }
    }
}

impl Serialize for Target {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Target {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// What to maximize: `LHS/RHS` of one inequality over functions on a fixed
/// space, with values kept in `[−bound, bound]` and `g` centered for
/// `thm32`. For `thm43` the larger of the two forms' ratios is used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchProblem {
    pub target: Target,
    #[serde(with = "crate::scalar::rational_list")]
    pub weights: Vec<BigRational>,
    pub exponents: Option<ExponentTuple>,
    pub norm: Option<RiNorm>,
    pub bound: f64,
}

impl SearchProblem {
    /// `n` equal atoms, default exponents `(1,∞,1,∞,1)` and norm `L^1`,
    /// values in `[−8, 8]`.
    pub fn uniform(target: Target, n: usize) -> Self {
        let w = if n == 0 { Vec::new() } else { vec![BigRational::new(BigInt::from(1), BigInt::from(n)); n] };
        SearchProblem { target, weights: w, exponents: None, norm: None, bound: 8.0 }
    }

    pub fn with_exponents(mut self, t: ExponentTuple) -> Self {
        self.exponents = Some(t);
        self
    }

    pub fn with_norm(mut self, x: RiNorm) -> Self {
        self.norm = Some(x);
        self
    }

    pub fn exponent_tuple(&self) -> ExponentTuple {
        self.exponents.clone().unwrap_or_else(|| ExponentTuple::sup_weighted(Exponent::one()))
    }

    pub fn ri_norm(&self) -> RiNorm {
        self.norm.clone().unwrap_or_else(RiNorm::l1)
    }

    fn exact_capable(&self) -> bool {
        match self.target {
            Target::Thm32 => true,
            Target::Thm41 => self.exponent_tuple().is_exact(),
            Target::Thm43 => {
                let x = self.ri_norm();
                x.is_exact() && RiNorm::associate(x).is_exact()
            }
        }
    }

    fn check(&self) -> Result<()> {
        if self.weights.len() < 2 {
            return Err(Error::InfeasibleProblem(format!(
                "{} atoms: every centered function vanishes, so RHS = 0 throughout",
                self.weights.len()
            )));
        }
        if !(self.bound.is_finite() && self.bound > 0.0) {
            return Err(Error::InvalidConfig("bound must be positive".into()));
        }
        if self.exponents.is_some() && self.target != Target::Thm41 {
            return Err(Error::InvalidConfig("exponents only apply to thm41-ratio".into()));
        }
        if self.norm.is_some() && self.target != Target::Thm43 {
            return Err(Error::InvalidConfig("a norm only applies to thm43-ratio".into()));
        }
        DiscreteSpace::<BigRational>::from_rationals(&self.weights)?;
        Ok(())
    }

    /// `(LHS, RHS)` of the objective on `values` (one vector per function).
    pub fn sides<T: Scalar>(&self, space: &Arc<DiscreteSpace<T>>, values: &[Vec<T>]) -> Result<(T, T)> {
        let func = |i: usize| SimpleFunction::new(Arc::clone(space), values[i].clone());
        match self.target {
            Target::Thm32 => thm32_sides(&func(0)?, &func(1)?, &func(2)?),
            Target::Thm41 => thm41_sides(&func(0)?, &func(1)?, &self.exponent_tuple()),
            Target::Thm43 => {
                let [a, b] = thm43_sides(&func(0)?, &func(1)?, &self.ri_norm())?;
                Ok(if ratio_f64(&b) > ratio_f64(&a) { b } else { a })
            }
        }
    }
}

fn ratio_f64<T: Scalar>((lhs, rhs): &(T, T)) -> f64 {
    let r = rhs.to_f64();
    if r > 0.0 {
        lhs.to_f64() / r
    } else {
        f64::NEG_INFINITY
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub ratio: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub target: Target,
    /// Ratio of the best instance, recomputed exactly when the problem
    /// allows it and at 128 bits otherwise.
    pub best_ratio: String,
    pub best_lhs: String,
    pub best_rhs: String,
    pub recheck_mode: String,
    pub best_instance: Value,
    pub best_restart: usize,
    /// Best-so-far ratio over all restarts, nondecreasing.
    pub trace: Vec<TracePoint>,
    pub iters: usize,
    pub restarts: usize,
    pub seed: u64,
    pub violations: Vec<Certificate>,
    pub problem: SearchProblem,
}

impl SearchResult {
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("search result serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Malformed(format!("search result: {e}")))
    }
}

struct Climb {
    values: Vec<Vec<f64>>,
    ratio: f64,
    /// Best ratio after each iteration.
    history: Vec<f64>,
}

fn center_f64(v: &mut [f64], w: &[f64]) {
    let mean: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
    v.iter_mut().for_each(|x| *x -= mean);
}

fn climb(problem: &SearchProblem, space: &Arc<DiscreteSpace<f64>>, iters: usize, seed: u64, restart: usize) -> Climb {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    let n = space.atoms();
    let b = problem.bound;
    let centered = problem.target == Target::Thm32;
    let weights = space.weights().to_vec();
    let objective = |vals: &[Vec<f64>]| problem.sides(space, vals).map(|s| ratio_f64(&s)).unwrap_or(f64::NEG_INFINITY);

    let mut values: Vec<Vec<f64>> =
        problem.target.functions().iter().map(|_| (0..n).map(|_| rng.gen_range(-b..=b)).collect()).collect();
    if centered {
        center_f64(&mut values[1], &weights);
    }
    let mut ratio = objective(&values);
    let mut step = 0.5;
    let mut history = Vec::with_capacity(iters);
    for _ in 0..iters {
        let which = rng.gen_range(0..values.len());
        let atom = rng.gen_range(0..n);
        let mut candidate = values.clone();
        let v = &mut candidate[which][atom];
        match rng.gen_range(0..4) {
            0 => *v *= 1.0 + step * rng.gen_range(-1.0..=1.0),
            1 => *v += step * b * rng.gen_range(-1.0..=1.0),
            2 => *v = values[which][rng.gen_range(0..n)],
            _ => *v = -*v,
        }
        *v = v.clamp(-b, b);
        if centered && which == 1 {
            center_f64(&mut candidate[1], &weights);
        }
        let r = objective(&candidate);
        if r > ratio {
            values = candidate;
            ratio = r;
            step = (step * 1.5).min(1.0);
        } else {
            step = (step * 0.95).max(1e-6);
        }
        history.push(ratio);
    }
    Climb { values, ratio, history }
}

/// Exact rationals for the climbed values, with `g` recentered exactly when
/// required.
fn to_instance(problem: &SearchProblem, values: &[Vec<f64>]) -> Instance {
    let mut inst = Instance::new(problem.weights.clone());
    for (name, v) in problem.target.functions().iter().zip(values) {
        let mut q: Vec<BigRational> = v.iter().map(|&x| BigRational::from_float(x).unwrap_or_else(<BigRational as Zero>::zero)).collect();
        if problem.target == Target::Thm32 && *name == "g" {
            let mean: BigRational = q.iter().zip(&problem.weights).map(|(a, w)| a * w).sum();
            q.iter_mut().for_each(|x| *x -= &mean);
        }
        inst = inst.with(name, q);
    }
    inst
}

fn precise_sides(problem: &SearchProblem, inst: &Instance) -> Result<(String, String, String, bool)> {
    fn run<T: Scalar>(problem: &SearchProblem, inst: &Instance) -> Result<(T, T)> {
        let space = inst.space::<T>()?;
        let values = problem
            .target
            .functions()
            .iter()
            .map(|name| inst.function(&space, name).map(|f| f.values().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        problem.sides(&space, &values)
    }
    let fmt_ratio = |l: f64, r: f64| if r > 0.0 { (l / r).to_string() } else { "nan".to_string() };
    if problem.exact_capable() {
        let (l, r) = run::<BigRational>(problem, inst)?;
        let exceeds = r.is_positive() && {
            let tol = BigRational::from_float(1.0 + RATIO_TOLERANCE).expect("finite");
            l > r.clone() * tol
        };
        let ratio = if r.is_positive() { (l.clone() / r.clone()).to_literal() } else { "nan".into() };
        let _ = fmt_ratio;
        return Ok((ratio, l.to_literal(), r.to_literal(), exceeds));
    }
    let (l, r) = run::<Quad>(problem, inst)?;
    let exceeds = r > Quad::zero() && l.clone() > r.clone() * Quad::from_f64(1.0 + RATIO_TOLERANCE);
    Ok((fmt_ratio(l.to_f64(), r.to_f64()), l.to_literal(), r.to_literal(), exceeds))
}

/// Maximizes the objective by coordinate hill climbing from `restarts`
/// random starts (run concurrently), `iters` moves each. Moves scale,
/// shift, copy or negate one value; `g` is recentered after each move for
/// `thm32`. The result depends only on the arguments.
pub fn search(problem: &SearchProblem, iters: usize, restarts: usize, seed: u64) -> Result<SearchResult> {
    if iters == 0 || restarts == 0 {
        return Err(Error::InvalidConfig("iters and restarts must be at least 1".into()));
    }
    problem.check()?;
    let space = Arc::new(DiscreteSpace::<f64>::from_rationals(&problem.weights)?);
    let climbs: Vec<Climb> = (0..restarts).into_par_iter().map(|r| climb(problem, &space, iters, seed, r)).collect();

    let (best_restart, best) = climbs
        .iter()
        .enumerate()
        .fold(None, |acc: Option<(usize, &Climb)>, (i, c)| match acc {
            Some((_, b)) if b.ratio >= c.ratio => acc,
            _ => Some((i, c)),
        })
        .expect("at least one restart");
    if best.ratio == f64::NEG_INFINITY {
        return Err(Error::InfeasibleProblem("no visited instance had RHS > 0".into()));
    }

    let stride = (iters / TRACE_POINTS).max(1);
    let mut trace = Vec::new();
    for i in (0..iters).filter(|i| i % stride == stride - 1 || *i + 1 == iters) {
        let r = climbs.iter().map(|c| c.history[i]).fold(f64::NEG_INFINITY, f64::max);
        if trace.last().map_or(true, |t: &TracePoint| t.iteration != i + 1) {
            trace.push(TracePoint { iteration: i + 1, ratio: r.to_string() });
        }
    }

    let instance = to_instance(problem, &best.values);
    let (best_ratio, best_lhs, best_rhs, exceeds) = precise_sides(problem, &instance)?;
    let recheck_mode = if problem.exact_capable() { "exact" } else { "quad" };
    let violations = if exceeds {
        vec![Certificate {
            source: format!("restart:{best_restart}"),
            property: problem.target.name().to_string(),
            instance: instance.to_value(),
            lhs: best_lhs.clone(),
            rhs: best_rhs.clone(),
            recheck: Recheck { mode: recheck_mode.into(), lhs: best_lhs.clone(), rhs: best_rhs.clone() },
        }]
    } else {
        Vec::new()
    };
    Ok(SearchResult {
        target: problem.target,
        best_ratio,
        best_lhs,
        best_rhs,
        recheck_mode: recheck_mode.into(),
        best_instance: instance.to_value(),
        best_restart,
        trace,
        iters,
        restarts,
        seed,
        violations,
        problem: problem.clone(),
    })
}

/// One varied value: atom `atom` of function `function`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub function: String,
    pub atom: usize,
}

impl FromStr for Param {
    type Err = Error;

    /// `f[1]` or `f:1`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("parameter `{s}` is not of the form f[1]"));
        let (name, rest) = s.split_once(['[', ':']).ok_or_else(bad)?;
        let atom = rest.trim_end_matches(']').parse().map_err(|_| bad())?;
        Ok(Param { function: name.to_string(), atom })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LandscapeRow {
    pub param1: f64,
    pub param2: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
}

impl LandscapeRow {
    /// `None` when `RHS = 0`.
    pub fn ratio(&self) -> Option<f64> {
        (self.rhs != 0.0).then(|| self.lhs / self.rhs)
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// The two-atom reduction used when no parameters are named: values scaled
/// so the first atom is 1, leaving one free value for each of two
/// functions (`g` is fixed by centering for `thm32`).
fn default_parameters(problem: &SearchProblem, base: &Instance) -> Result<(Instance, Vec<Param>)> {
    let n = problem.weights.len();
    let names = problem.target.functions();
    if n != 2 {
        let free = names.len() * n.saturating_sub(1);
        return Err(Error::TooManyFreeParameters(free));
    }
    let mut inst = base.clone();
    let p = |name: &str| Param { function: name.into(), atom: 1 };
    let params = match problem.target {
        Target::Thm32 => {
            let w = &problem.weights;
            let g = if w[1] >= w[0] { vec![q(1, 1), -(w[0].clone() / w[1].clone())] } else { vec![w[1].clone() / w[0].clone(), q(-1, 1)] };
            inst = inst.with("f", vec![q(1, 1), q(0, 1)]).with("g", g).with("h", vec![q(1, 1), q(0, 1)]);
            vec![p("f"), p("h")]
        }
        Target::Thm41 | Target::Thm43 => {
            inst = inst.with("f", vec![q(1, 1), q(0, 1)]).with("g", vec![q(1, 1), q(0, 1)]);
            vec![p("f"), p("g")]
        }
    };
    Ok((inst, params))
}

/// Tabulates `LHS` and `RHS` with up to two values varied over
/// `[lo, hi]` on a grid of `resolution` points per axis. With no `params`
/// the two-atom reduction is used; more than two, or no parameters on a
/// space of more than two atoms, is [`Error::TooManyFreeParameters`].
/// Varying `g` in `thm32` recenters it.
pub fn ratio_landscape(
    problem: &SearchProblem,
    base: &Instance,
    params: &[Param],
    lo: &BigRational,
    hi: &BigRational,
    resolution: usize,
) -> Result<Vec<LandscapeRow>> {
    problem.check()?;
    if params.len() > 2 {
        return Err(Error::TooManyFreeParameters(params.len()));
    }
    if resolution == 0 || lo > hi {
        return Err(Error::InvalidConfig("grid needs a resolution of at least 1 and lo <= hi".into()));
    }
    let (base, params) = if params.is_empty() {
        default_parameters(problem, &Instance::new(problem.weights.clone()).with_all(base))?
    } else {
        (Instance::new(problem.weights.clone()).with_all(base), params.to_vec())
    };
    for p in &params {
        let values = base
            .functions
            .get(&p.function)
            .ok_or_else(|| Error::Malformed(format!("instance has no function `{}`", p.function)))?;
        if p.atom >= values.len() {
            return Err(Error::AtomOutOfRange { index: p.atom, atoms: values.len() });
        }
    }
    let grid: Vec<BigRational> = (0..resolution)
        .map(|i| {
            if resolution == 1 {
                lo.clone()
            } else {
                lo + (hi - lo) * q(i as i64, resolution as i64 - 1)
            }
        })
        .collect();
    let points: Vec<Vec<BigRational>> = if params.len() == 2 {
        grid.iter().flat_map(|a| grid.iter().map(move |b| vec![a.clone(), b.clone()])).collect()
    } else {
        grid.iter().map(|a| vec![a.clone()]).collect()
    };
    points
        .into_par_iter()
        .map(|point| {
            let mut inst = base.clone();
            for (p, v) in params.iter().zip(&point) {
                inst.functions.get_mut(&p.function).expect("checked")[p.atom] = v.clone();
            }
            if problem.target == Target::Thm32 && params.iter().any(|p| p.function == "g") {
                let g = inst.functions.get_mut("g").expect("checked");
                let mean: BigRational = g.iter().zip(&problem.weights).map(|(a, w)| a * w).sum();
                g.iter_mut().for_each(|x| *x -= &mean);
            }
            let (lhs, rhs) = if problem.exact_capable() {
                let (l, r) = sides_of::<BigRational>(problem, &inst)?;
                (l.to_f64(), r.to_f64())
            } else {
                let (l, r) = sides_of::<f64>(problem, &inst)?;
                (l, r)
            };
            Ok(LandscapeRow { param1: point[0].to_f64(), param2: point.get(1).map(Scalar::to_f64), lhs, rhs })
        })
        .collect()
}

fn sides_of<T: Scalar>(problem: &SearchProblem, inst: &Instance) -> Result<(T, T)> {
    let space = inst.space::<T>()?;
    let values = problem
        .target
        .functions()
        .iter()
        .map(|name| inst.function(&space, name).map(|f| f.values().to_vec()))
        .collect::<Result<Vec<_>>>()?;
    problem.sides(&space, &values)
}

/// CSV with header `param1,param2,lhs,rhs,ratio`; `param2` is empty for a
/// single parameter and the ratio is `nan` when `RHS = 0`.
pub fn landscape_csv(rows: &[LandscapeRow]) -> String {
    let mut out = String::from("param1,param2,lhs,rhs,ratio\n");
    for r in rows {
        let p2 = r.param2.map(|v| v.to_string()).unwrap_or_default();
        let ratio = r.ratio().map_or_else(|| "nan".to_string(), |v| v.to_string());
        out.push_str(&format!("{},{},{},{},{}\n", r.param1, p2, r.lhs, r.rhs, ratio));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(r: &SearchResult) -> f64 {
        r.best_ratio.parse::<f64>().unwrap_or_else(|_| {
            crate::scalar::parse_rational(&r.best_ratio).unwrap().to_f64()
        })
    }

    #[test]
    fn thm41_reaches_one() {
        let r = search(&SearchProblem::uniform(Target::Thm41, 2), 400, 4, 1).unwrap();
        assert!((ratio(&r) - 1.0).abs() < 1e-9, "{}", r.best_ratio);
        assert!(r.violations.is_empty());
    }

    #[test]
    fn thm32_reaches_one() {
        let r = search(&SearchProblem::uniform(Target::Thm32, 2), 2000, 8, 5).unwrap();
        assert!(ratio(&r) > 0.999, "{}", r.best_ratio);
        assert!(ratio(&r) <= 1.0 + RATIO_TOLERANCE);
    }

    #[test]
    fn deterministic_and_monotone() {
        let p = SearchProblem::uniform(Target::Thm43, 3);
        let a = search(&p, 300, 3, 9).unwrap();
        assert_eq!(a, search(&p, 300, 3, 9).unwrap());
        let t: Vec<f64> = a.trace.iter().map(|t| t.ratio.parse().unwrap()).collect();
        assert!(t.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(SearchResult::from_json(&a.to_canonical_json()).unwrap(), a);
    }

    #[test]
    fn one_atom_is_infeasible() {
        assert!(matches!(search(&SearchProblem::uniform(Target::Thm32, 1), 10, 1, 0), Err(Error::InfeasibleProblem(_))));
        assert!(search(&SearchProblem::uniform(Target::Thm32, 2), 0, 1, 0).is_err());
    }

    #[test]
    fn landscape_rows_and_limits() {
        let p = SearchProblem::uniform(Target::Thm41, 2);
        let base = Instance::new(vec![]).with("f", vec![q(1, 1), q(0, 1)]).with("g", vec![q(1, 1), q(-1, 1)]);
        let rows = ratio_landscape(&p, &base, &["f[1]".parse().unwrap()], &q(-2, 1), &q(2, 1), 101).unwrap();
        assert_eq!(rows.len(), 101);
        assert!(rows.iter().all(|r| r.ratio().map_or(true, |x| x <= 1.0 + 1e-12)));
        let one = ratio_landscape(&p, &base, &["f[1]".parse().unwrap()], &q(-2, 1), &q(2, 1), 1).unwrap();
        assert_eq!(one.len(), 1);
        let params: Vec<Param> = ["f[0]", "f[1]", "g[0]"].iter().map(|s| s.parse().unwrap()).collect();
        assert!(matches!(ratio_landscape(&p, &base, &params, &q(0, 1), &q(1, 1), 3), Err(Error::TooManyFreeParameters(3))));
        let wide = SearchProblem::uniform(Target::Thm41, 3);
        assert!(matches!(ratio_landscape(&wide, &Instance::new(vec![]), &[], &q(0, 1), &q(1, 1), 3), Err(Error::TooManyFreeParameters(4))));
        let grid = ratio_landscape(&p, &Instance::new(vec![]), &[], &q(-1, 1), &q(1, 1), 5).unwrap();
        assert_eq!(grid.len(), 25);
        assert!(landscape_csv(&grid).starts_with("param1,param2,lhs,rhs,ratio\n"));
    }

    #[test]
    fn thm32_landscape_hits_equality() {
        let p = SearchProblem::uniform(Target::Thm32, 2);
        let base = Instance::new(vec![])
            .with("f", vec![q(1, 1), q(0, 1)])
            .with("g", vec![q(1, 1), q(-1, 1)])
            .with("h", vec![q(-1, 1), q(1, 1)]);
        let rows = ratio_landscape(&p, &base, &["f[1]".parse().unwrap()], &q(0, 1), &q(2, 1), 5).unwrap();
        let at_one = rows.iter().find(|r| r.param1 == 1.0).unwrap();
        assert_eq!(at_one.ratio(), Some(1.0));
    }
}
