//! Rearrangement-invariant norms and their associates.
//!
//! [`RiNorm`] describes a norm; [`norm`] evaluates it on a function and
//! [`norm_of_profile`] on a decreasing rearrangement. Lorentz, associate and
//! generated norms other than `L^p` are only defined on spaces whose atoms
//! all have equal measure.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::rearrange::{decreasing_rearrangement, profile_integrate_product, StepProfile};
use crate::scalar::{self, format_rational, parse_rational, Exponent, Scalar};
use crate::space::{DiscreteSpace, SimpleFunction};
use crate::{Error, Result};

/// `(∫|f|^p dμ)^{1/p}`, or `max |f|` for `p = ∞`. Valid on any space.
pub fn lp_norm<T: Scalar>(f: &SimpleFunction<T>, p: &Exponent) -> Result<T> {
    match p {
        Exponent::Infinite => Ok(f.sup_abs()),
        Exponent::Finite(e) => {
            let mut total = T::zero();
            for (v, w) in f.values().iter().zip(f.space().weights()) {
                total = total + v.abs().powf(e)? * w.clone();
            }
            total.powf(&e.recip())
        }
    }
}

/// `∫|f|^k dμ`.
pub fn lp_power<T: Scalar>(f: &SimpleFunction<T>, k: u32) -> T {
    scalar::sum(f.values().iter().zip(f.space().weights()).map(|(v, w)| v.abs().powi(k) * w.clone()))
}

/// A concave, nondecreasing, piecewise-linear `φ: [0,1] → [0,1]` with
/// `φ(0) = 0` and `φ(1) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<[String; 2]>", into = "Vec<[String; 2]>")]
pub struct ConcaveWeight {
    breakpoints: Vec<(BigRational, BigRational)>,
}

impl ConcaveWeight {
    pub fn new(breakpoints: Vec<(BigRational, BigRational)>) -> Result<Self> {
        let bad = |m: &str| Err(Error::InvalidWeight(m.to_string()));
        if breakpoints.len() < 2 {
            return bad("need at least two breakpoints");
        }
        let (t0, p0) = &breakpoints[0];
        if !Zero::is_zero(t0) || !Zero::is_zero(p0) {
            return bad("first breakpoint must be (0, 0)");
        }
        let (tn, pn) = &breakpoints[breakpoints.len() - 1];
        if !tn.is_one() || !pn.is_one() {
            return bad("last breakpoint must be (1, 1)");
        }
        let mut previous_slope: Option<BigRational> = None;
        for w in breakpoints.windows(2) {
            let dt = w[1].0.clone() - w[0].0.clone();
            let dp = w[1].1.clone() - w[0].1.clone();
            if dt <= <BigRational as Zero>::zero() {
                return bad("breakpoints must be strictly increasing in t");
            }
            if dp < <BigRational as Zero>::zero() {
                return bad("weight must be nondecreasing");
            }
            let slope = dp / dt;
            if previous_slope.as_ref().is_some_and(|s| slope > *s) {
                return bad("slopes must be nonincreasing");
            }
            previous_slope = Some(slope);
        }
        Ok(ConcaveWeight { breakpoints })
    }

    /// `φ(t) = t`, for which `Λ_φ = L^1`.
    pub fn identity() -> Self {
        ConcaveWeight { breakpoints: vec![(Zero::zero(), Zero::zero()), (One::one(), One::one())] }
    }

    pub fn breakpoints(&self) -> &[(BigRational, BigRational)] {
        &self.breakpoints
    }

    /// Evaluates `φ(t)` by linear interpolation; clamps outside `[0,1]`.
    pub fn eval<T: Scalar>(&self, t: &T) -> T {
        if *t <= T::zero() {
            return T::zero();
        }
        for w in self.breakpoints.windows(2) {
            let t1 = T::from_rational(&w[1].0);
            if *t <= t1 {
                let t0 = T::from_rational(&w[0].0);
                let p0 = T::from_rational(&w[0].1);
                let p1 = T::from_rational(&w[1].1);
                return p0.clone() + (p1 - p0) * (t.clone() - t0.clone()) / (t1 - t0);
            }
        }
        T::one()
    }

    fn at_fraction<T: Scalar>(&self, k: usize, n: usize) -> T {
        let t = BigRational::new(k.into(), n.into());
        T::from_rational(&self.eval(&t))
    }
}

impl TryFrom<Vec<[String; 2]>> for ConcaveWeight {
    type Error = Error;

    fn try_from(v: Vec<[String; 2]>) -> Result<Self> {
        let points = v
            .iter()
            .map(|[t, p]| Ok((parse_rational(t)?, parse_rational(p)?)))
            .collect::<Result<Vec<_>>>()?;
        ConcaveWeight::new(points)
    }
}

impl From<ConcaveWeight> for Vec<[String; 2]> {
    fn from(w: ConcaveWeight) -> Self {
        w.breakpoints.iter().map(|(t, p)| [format_rational(t), format_rational(p)]).collect()
    }
}

/// A rearrangement-invariant norm, normalized so that `‖1‖ = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum RiNorm {
    /// `L^p`, including `L^∞`.
    Lp { p: Exponent },
    /// `Λ_φ`: `‖f‖ = ∫_0^1 f* dφ`.
    Lorentz { phi: ConcaveWeight },
    /// `‖|f|^p‖_base^{1/p}`.
    Generated { base: Box<RiNorm>, p: Exponent },
    /// The associate (Köthe dual) of `base`.
    Associate { base: Box<RiNorm> },
}

impl RiNorm {
    pub fn lp(p: Exponent) -> Self {
        RiNorm::Lp { p }
    }

    pub fn l1() -> Self {
        RiNorm::Lp { p: Exponent::one() }
    }

    pub fn linf() -> Self {
        RiNorm::Lp { p: Exponent::Infinite }
    }

    pub fn lorentz(phi: ConcaveWeight) -> Self {
        RiNorm::Lorentz { phi }
    }

    pub fn generated(base: RiNorm, p: Exponent) -> Self {
        RiNorm::Generated { base: Box::new(base), p }
    }

    pub fn associate(base: RiNorm) -> Self {
        RiNorm::Associate { base: Box::new(base) }
    }

    /// Parses the JSON descriptor form.
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Malformed(format!("norm descriptor: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("norm descriptors serialize")
    }

    /// True when the norm is defined on spaces with unequal atoms.
    pub fn accepts_weighted(&self) -> bool {
        match self {
            RiNorm::Lp { .. } => true,
            RiNorm::Lorentz { .. } => false,
            RiNorm::Generated { base, .. } => base.accepts_weighted(),
            RiNorm::Associate { base } => match base.as_ref() {
                RiNorm::Lp { .. } => true,
                RiNorm::Associate { base: inner } => matches!(inner.as_ref(), RiNorm::Lp { .. }),
                _ => false,
            },
        }
    }

    /// True when values on rational data are rational, so exact mode can
    /// evaluate the norm without roots.
    pub fn is_exact(&self) -> bool {
        match self {
            RiNorm::Lp { p } => p.is_exact(),
            RiNorm::Lorentz { .. } => true,
            RiNorm::Generated { base, p } => p.is_one() && base.is_exact(),
            RiNorm::Associate { base } => associate_is_exact(base),
        }
    }

    fn check_space<T: Scalar>(&self, space: &DiscreteSpace<T>) -> Result<()> {
        if self.accepts_weighted() {
            Ok(())
        } else {
            space.require_equal_atoms()
        }
    }
}

/// `‖f‖_X`.
pub fn norm<T: Scalar>(x: &RiNorm, f: &SimpleFunction<T>) -> Result<T> {
    x.check_space(f.space())?;
    match x {
        RiNorm::Lp { p } => lp_norm(f, p),
        RiNorm::Lorentz { phi } => Ok(lorentz_of_sorted(phi, &sorted_magnitudes(f))),
        RiNorm::Generated { base, p } => {
            let powered = power_abs(f, p)?;
            norm(base, &powered)?.powf(&p.reciprocal())
        }
        RiNorm::Associate { base } => associate_norm(base, f),
    }
}

/// `‖f‖_X` computed from `f*` alone. `atoms` is the atom count of the
/// underlying equal-atom space; it fixes the grid on which associate norms
/// take their supremum and is ignored by the other kinds.
pub fn norm_of_profile<T: Scalar>(x: &RiNorm, profile: &StepProfile<T>, atoms: usize) -> Result<T> {
    match x {
        RiNorm::Lp { p } => profile.lp_norm(p),
        RiNorm::Lorentz { phi } => {
            let mut start = T::zero();
            let mut total = T::zero();
            for s in profile.segments() {
                let end = start.clone() + s.length.clone();
                total = total + s.value.clone() * (phi.eval(&end) - phi.eval(&start));
                start = end;
            }
            Ok(total)
        }
        RiNorm::Generated { base, p } => {
            let Exponent::Finite(e) = p else {
                return norm_of_profile(&RiNorm::linf(), profile, atoms);
            };
            let powered = StepProfile::new(
                profile
                    .segments()
                    .iter()
                    .map(|s| Ok((s.value.powf(e)?, s.length.clone())))
                    .collect::<Result<Vec<_>>>()?,
            )?;
            norm_of_profile(base, &powered, atoms)?.powf(&e.recip())
        }
        RiNorm::Associate { base } => {
            if let RiNorm::Lp { p } = base.as_ref() {
                return profile.lp_norm(&p.conjugate());
            }
            if atoms == 0 {
                return Err(Error::EmptySpace);
            }
            let n = T::from_i64(atoms as i64);
            let values = (0..atoms).map(|i| profile.value_at(&(T::from_i64(i as i64) / n.clone()))).collect();
            let space = Arc::new(DiscreteSpace::uniform(atoms)?);
            associate_norm(base, &SimpleFunction::new(space, values)?)
        }
    }
}

/// `‖h‖_{X'} = sup { ∫ f h dμ : ‖f‖_X ≤ 1 }`, by closed form where one is
/// known and by [`associate_norm_oracle`] otherwise.
///
/// | `X` | `‖h‖_{X'}` |
/// |---|---|
/// | `L^p` | `‖h‖_{p'}` |
/// | `Λ_φ` | `max_k (Σ_{i≤k} h*_i / n) / φ(k/n)` |
/// | `L^p` associate | `‖h‖_{p''}` |
/// | `Λ_φ` associate | `Σ_k (h*_k − h*_{k+1}) φ(k/n)` |
/// | `Y''` | `‖h‖_{Y'}` |
pub fn associate_norm<T: Scalar>(x: &RiNorm, h: &SimpleFunction<T>) -> Result<T> {
    RiNorm::associate(x.clone()).check_space(h.space())?;
    match x {
        RiNorm::Lp { p } => lp_norm(h, &p.conjugate()),
        RiNorm::Lorentz { phi } => Ok(marcinkiewicz_of_sorted(phi, &sorted_magnitudes(h))),
        RiNorm::Generated { .. } => associate_norm_oracle(x, h),
        RiNorm::Associate { base } => match base.as_ref() {
            RiNorm::Lp { p } => lp_norm(h, &p.conjugate().conjugate()),
            RiNorm::Lorentz { phi } => Ok(abel_of_sorted(phi, &sorted_magnitudes(h))),
            RiNorm::Associate { base: inner } => associate_norm(inner, h),
            // A generated norm is a Banach function norm with the Fatou
            // property, so it is its own second associate.
            generated @ RiNorm::Generated { .. } => norm(generated, h),
        },
    }
}

/// Number of random starts used by the smooth branch of the oracle.
pub const ORACLE_STARTS: usize = 32;
const ORACLE_SEED: u64 = 0x0a55_0c1a_7e;
const ORACLE_SWEEPS: usize = 400;
const GOLDEN_STEPS: usize = 64;
/// Largest space for which the oracle enumerates LP vertices.
pub const ORACLE_LP_ATOMS: usize = 8;

/// Brute-force associate norm: maximizes `Σ h*_i g_i / n` over
/// nonincreasing `g ≥ 0` with `‖g‖_X ≤ 1`.
///
/// Writing `g = Σ_k c_k 1_{[1..k]}` with `c ≥ 0`, the objective is a ratio
/// of a linear form and `‖g‖_X`. When `‖·‖_X` is linear on that cone (`L^1`,
/// `L^∞`, `Λ_φ`) the maximum sits on an extreme ray and is found exactly.
/// Otherwise the ratio is quasi-concave and is maximized by coordinate
/// ascent with golden-section line searches from [`ORACLE_STARTS`] seeded
/// starts; this path needs float mode. When `X` is the associate of such a
/// base its norm on the cone is the maximum of the linear forms
/// `g ↦ (Σ_{i≤k} g_i / n) / ‖1_{[1..k]}‖_base`, so the problem is a linear
/// program in `c`; for up to [`ORACLE_LP_ATOMS`] atoms it is solved exactly
/// by enumerating vertices.
pub fn associate_norm_oracle<T: Scalar>(x: &RiNorm, h: &SimpleFunction<T>) -> Result<T> {
    h.space().require_equal_atoms()?;
    let n = h.atoms();
    let sorted = sorted_magnitudes(h);
    let space = Arc::new(DiscreteSpace::<T>::uniform(n)?);
    let n_t = T::from_i64(n as i64);

    if is_cone_linear(x) {
        let mut best = T::zero();
        let mut partial = T::zero();
        for k in 1..=n {
            partial = partial + sorted[k - 1].clone();
            let ray = SimpleFunction::new(
                Arc::clone(&space),
                (0..n).map(|i| if i < k { T::one() } else { T::zero() }).collect(),
            )?;
            let value = partial.clone() / n_t.clone() / norm(x, &ray)?;
            best = best.max(value);
        }
        return Ok(best);
    }
    if let RiNorm::Associate { base } = x {
        if is_cone_linear(base) && n <= ORACLE_LP_ATOMS {
            return polyhedral_oracle(base, &sorted, &space);
        }
    }
    if T::is_exact() {
        return Err(Error::Inexact(format!("associate of {} has no closed form", x.to_json())));
    }

    let hs: Vec<f64> = sorted.iter().map(Scalar::to_f64).collect();
    if hs.iter().all(|v| *v == 0.0) {
        return Ok(T::zero());
    }
    let fspace = Arc::new(DiscreteSpace::<f64>::uniform(n)?);
    let ratio = |c: &[f64]| -> Result<f64> {
        let mut g = vec![0.0; n];
        let mut acc = 0.0;
        for i in (0..n).rev() {
            acc += c[i];
            g[i] = acc;
        }
        let denom = norm(x, &SimpleFunction::new(Arc::clone(&fspace), g.clone())?)?;
        if denom <= 0.0 {
            return Ok(0.0);
        }
        Ok(hs.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>() / n as f64 / denom)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(ORACLE_SEED);
    let mut best = 0.0f64;
    for start in 0..ORACLE_STARTS {
        let mut c: Vec<f64> = if start == 0 {
            vec![1.0 / n as f64; n]
        } else {
            (0..n).map(|_| rng.gen::<f64>()).collect()
        };
        normalize_top(&mut c);
        let mut current = ratio(&c)?;
        for _ in 0..ORACLE_SWEEPS {
            let before = current;
            for k in 0..n {
                let (arg, value) = golden_section(0.0, 4.0, |t| {
                    let mut trial = c.clone();
                    trial[k] = t;
                    ratio(&trial).unwrap_or(f64::NEG_INFINITY)
                });
                if value > current {
                    c[k] = arg;
                    current = value;
                }
            }
            normalize_top(&mut c);
            if current - before <= 1e-15 * current {
                break;
            }
        }
        best = best.max(current);
    }
    Ok(T::from_f64(best))
}

/// Mirrors the dispatch in [`associate_norm`].
fn associate_is_exact(base: &RiNorm) -> bool {
    match base {
        RiNorm::Lp { p } => p.is_exact(),
        RiNorm::Lorentz { .. } => true,
        RiNorm::Generated { .. } => is_cone_linear(base),
        RiNorm::Associate { base: inner } => match inner.as_ref() {
            RiNorm::Lp { p } => p.is_exact(),
            RiNorm::Lorentz { .. } => true,
            RiNorm::Associate { base: z } => associate_is_exact(z),
            generated @ RiNorm::Generated { .. } => generated.is_exact(),
        },
    }
}

fn is_cone_linear(x: &RiNorm) -> bool {
    match x {
        RiNorm::Lp { p } => p.is_exact(),
        RiNorm::Lorentz { .. } => true,
        RiNorm::Generated { base, p } => p.is_one() && is_cone_linear(base),
        RiNorm::Associate { base } => matches!(base.as_ref(), RiNorm::Lp { p } if p.is_exact()),
    }
}

/// Rescales so that `Σ c = 1`, i.e. `g_1 = 1`.
/// Maximizes `Σ_j c_j H_j / n` subject to `c ≥ 0` and
/// `Σ_j c_j min(j,k) / (n ρ_k) ≤ 1` for every `k`, where `H_j` are partial
/// sums of `h*` and `ρ_k = ‖1_{[1..k]}‖_base`, by checking every basic
/// solution.
fn polyhedral_oracle<T: Scalar>(base: &RiNorm, sorted: &[T], space: &Arc<DiscreteSpace<T>>) -> Result<T> {
    let n = sorted.len();
    let n_t = T::from_i64(n as i64);
    let mut rho = Vec::with_capacity(n);
    for k in 1..=n {
        let ray = SimpleFunction::new(Arc::clone(space), (0..n).map(|i| if i < k { T::one() } else { T::zero() }).collect())?;
        rho.push(norm(base, &ray)?);
    }
    let mut partial = T::zero();
    let objective: Vec<T> = sorted
        .iter()
        .map(|v| {
            partial = partial.clone() + v.clone();
            partial.clone() / n_t.clone()
        })
        .collect();
    // Rows 0..n are the norm constraints, rows n..2n the sign constraints
    // written as `-c_j <= 0`.
    let mut rows: Vec<(Vec<T>, T)> = (1..=n)
        .map(|k| {
            let scale = n_t.clone() * rho[k - 1].clone();
            let row = (1..=n).map(|j| T::from_i64(j.min(k) as i64) / scale.clone()).collect();
            (row, T::one())
        })
        .collect();
    for j in 0..n {
        rows.push(((0..n).map(|i| if i == j { -T::one() } else { T::zero() }).collect(), T::zero()));
    }
    let slack = if T::is_exact() { T::zero() } else { T::from_f64(1e-12) };
    let mut best = T::zero();
    let mut chosen: Vec<usize> = (0..n).collect();
    loop {
        let a: Vec<Vec<T>> = chosen.iter().map(|&r| rows[r].0.clone()).collect();
        let b: Vec<T> = chosen.iter().map(|&r| rows[r].1.clone()).collect();
        if let Some(c) = solve_linear(a, b) {
            let feasible = rows.iter().all(|(row, rhs)| {
                let lhs = scalar::sum(row.iter().zip(&c).map(|(u, v)| u.clone() * v.clone()));
                lhs <= rhs.clone() + slack.clone()
            });
            if feasible {
                let value = scalar::sum(objective.iter().zip(&c).map(|(u, v)| u.clone() * v.clone()));
                best = best.max(value);
            }
        }
        if !next_combination(&mut chosen, 2 * n) {
            break;
        }
    }
    Ok(best)
}

/// Advances `c` to the next increasing `c.len()`-subset of `0..total`.
fn next_combination(c: &mut [usize], total: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < total - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Gaussian elimination with largest-magnitude pivots; `None` when singular.
fn solve_linear<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    let tiny = if T::is_exact() { 0.0 } else { 1e-12 };
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][col].is_zero() || a[pivot][col].abs().to_f64() <= tiny {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..n {
            let factor = a[r][col].clone() / a[col][col].clone();
            if factor.is_zero() {
                continue;
            }
            for k in col..n {
                let v = a[r][k].clone() - factor.clone() * a[col][k].clone();
                a[r][k] = v;
            }
            b[r] = b[r].clone() - factor * b[col].clone();
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let tail = scalar::sum((r + 1..n).map(|k| a[r][k].clone() * x[k].clone()));
        x[r] = (b[r].clone() - tail) / a[r][r].clone();
    }
    Some(x)
}

fn normalize_top(c: &mut [f64]) {
    let total: f64 = c.iter().sum();
    if total > 0.0 {
        c.iter_mut().for_each(|v| *v /= total);
    } else {
        c[0] = 1.0;
    }
}

/// Maximizes a unimodal function on `[lo, hi]`.
fn golden_section(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - phi * (hi - lo);
    let mut b = lo + phi * (hi - lo);
    let mut fa = f(a);
    let mut fb = f(b);
    for _ in 0..GOLDEN_STEPS {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + phi * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - phi * (hi - lo);
            fa = f(a);
        }
    }
    let candidates = [(lo, f(lo)), (a, fa), (b, fb), (hi, f(hi))];
    candidates.into_iter().fold((lo, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best })
}

/// `|f|` sorted in nonincreasing order.
fn sorted_magnitudes<T: Scalar>(f: &SimpleFunction<T>) -> Vec<T> {
    f.order_by_magnitude().into_iter().map(|i| f.value(i).abs()).collect()
}

fn power_abs<T: Scalar>(f: &SimpleFunction<T>, p: &Exponent) -> Result<SimpleFunction<T>> {
    match p {
        Exponent::Infinite => Err(Error::InvalidExponent("generated norms need a finite exponent".into())),
        Exponent::Finite(e) => {
            let values = f.values().iter().map(|v| v.abs().powf(e)).collect::<Result<Vec<_>>>()?;
            SimpleFunction::new(Arc::clone(f.space()), values)
        }
    }
}

/// `Σ_i h*_i (φ(i/n) − φ((i−1)/n))`.
fn lorentz_of_sorted<T: Scalar>(phi: &ConcaveWeight, sorted: &[T]) -> T {
    let n = sorted.len();
    scalar::sum(sorted.iter().enumerate().map(|(i, v)| {
        v.clone() * (phi.at_fraction::<T>(i + 1, n) - phi.at_fraction::<T>(i, n))
    }))
}

/// `max_k (Σ_{i≤k} h*_i / n) / φ(k/n)`.
fn marcinkiewicz_of_sorted<T: Scalar>(phi: &ConcaveWeight, sorted: &[T]) -> T {
    let n = sorted.len();
    let n_t = T::from_i64(n as i64);
    let mut partial = T::zero();
    let mut best = T::zero();
    for k in 1..=n {
        partial = partial + sorted[k - 1].clone();
        let weight: T = phi.at_fraction(k, n);
        if weight > T::zero() {
            best = best.max(partial.clone() / n_t.clone() / weight);
        }
    }
    best
}

/// `Σ_k (h*_k − h*_{k+1}) φ(k/n)` with `h*_{n+1} = 0`.
fn abel_of_sorted<T: Scalar>(phi: &ConcaveWeight, sorted: &[T]) -> T {
    let n = sorted.len();
    scalar::sum((1..=n).map(|k| {
        let next = sorted.get(k).cloned().unwrap_or_else(T::zero);
        (sorted[k - 1].clone() - next) * phi.at_fraction::<T>(k, n)
    }))
}

/// `(∫|fg| dμ, ∫_0^∞ f* g*)`; the first never exceeds the second.
pub fn hardy_littlewood_check<T: Scalar>(f: &SimpleFunction<T>, g: &SimpleFunction<T>) -> Result<(T, T)> {
    let lhs = f.pointwise_mul(g)?.abs().integrate();
    let rhs = profile_integrate_product(&[&decreasing_rearrangement(f), &decreasing_rearrangement(g)])?;
    Ok((lhs, rhs))
}

/// `(∫|fg| dμ, ∫ f* g*, ‖f‖_X ‖g‖_{X'})`, nondecreasing left to right.
pub fn holder_check<T: Scalar>(x: &RiNorm, f: &SimpleFunction<T>, g: &SimpleFunction<T>) -> Result<(T, T, T)> {
    let (a, b) = hardy_littlewood_check(f, g)?;
    let c = norm(x, f)? * associate_norm(x, g)?;
    Ok((a, b, c))
}

/// `(‖f‖_X, ‖f‖_{X''})`; equal for every norm in the family.
pub fn lorentz_luxemburg_check<T: Scalar>(x: &RiNorm, f: &SimpleFunction<T>) -> Result<(T, T)> {
    f.space().require_equal_atoms()?;
    Ok((norm(x, f)?, associate_norm(&RiNorm::associate(x.clone()), f)?))
}

/// `(‖f‖_1, ‖f‖_X, ‖f‖_∞)`, nondecreasing left to right when `‖1‖_X = 1`.
pub fn embedding_chain<T: Scalar>(x: &RiNorm, f: &SimpleFunction<T>) -> Result<(T, T, T)> {
    Ok((lp_norm(f, &Exponent::one())?, norm(x, f)?, f.sup_abs()))
}
