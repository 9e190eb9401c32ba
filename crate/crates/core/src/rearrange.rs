//! Decreasing rearrangements and layer-cake decompositions.
//!
//! The decreasing rearrangement `f*` of a function on a finite space is a
//! nonincreasing step function on `[0, ∞)`, stored as a [`StepProfile`].
//! Rearrangement always refers to `|f|`: `f*(t)` is the value of the atom
//! that sits at position `t` once atoms are sorted by magnitude and laid out
//! end to end with their measures as lengths.

use std::sync::Arc;

use crate::norms::{lp_norm, lp_power};
use crate::scalar::{self, nearly_equal, Exponent, Scalar};
use crate::space::{AtomSet, DiscreteSpace, SimpleFunction};
use crate::{Error, Result};

/// Relative tolerance for float comparisons in consistency checks.
pub const FLOAT_CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Segment<T> {
    pub value: T,
    pub length: T,
}

/// A nonnegative, nonincreasing, right-continuous step function on
/// `[0, ∞)`, zero beyond its total length.
///
/// Segment values are strictly decreasing and positive; adjacent equal
/// values are merged on construction, so two profiles describing the same
/// function compare equal in exact mode.
#[derive(Clone, Debug, PartialEq)]
pub struct StepProfile<T> {
    segments: Vec<Segment<T>>,
}

impl<T: Scalar> StepProfile<T> {
    pub fn empty() -> Self {
        StepProfile { segments: Vec::new() }
    }

    /// Builds a profile from `(value, length)` pairs. Values must be
    /// nonnegative and nonincreasing, lengths positive, and the total length
    /// at most 1. Zero-valued segments are dropped.
    pub fn new(pairs: Vec<(T, T)>) -> Result<Self> {
        for (i, (v, l)) in pairs.iter().enumerate() {
            if *v < T::zero() {
                return Err(Error::InvalidProfile(format!("segment {i} has a negative value")));
            }
            if *l <= T::zero() {
                return Err(Error::InvalidProfile(format!("segment {i} has a non-positive length")));
            }
            if i > 0 && *v > pairs[i - 1].0 {
                return Err(Error::InvalidProfile(format!("segment {i} increases")));
            }
        }
        let total = scalar::sum(pairs.iter().map(|(_, l)| l.clone()));
        let over = total.clone() - T::one();
        let too_long = if T::is_exact() {
            over > T::zero()
        } else {
            over.to_f64() > scalar::WEIGHT_SUM_TOLERANCE
        };
        if too_long {
            return Err(Error::InvalidProfile(format!("total length {} exceeds 1", total.to_literal())));
        }
        Ok(Self::from_sorted(pairs))
    }

    /// Merges equal neighbours and drops zero values; input must already be
    /// nonincreasing.
    fn from_sorted(pairs: impl IntoIterator<Item = (T, T)>) -> Self {
        let mut segments: Vec<Segment<T>> = Vec::new();
        for (value, length) in pairs {
            if value.is_zero() || length.is_zero() {
                continue;
            }
            match segments.last_mut() {
                Some(last) if last.value == value => last.length = last.length.clone() + length,
                _ => segments.push(Segment { value, length }),
            }
        }
        StepProfile { segments }
    }

    /// `1` on `[0, length)`.
    pub fn indicator(length: T) -> Self {
        Self::from_sorted([(T::one(), length)])
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn total_length(&self) -> T {
        scalar::sum(self.segments.iter().map(|s| s.length.clone()))
    }

    /// `f*(0)`, which equals `‖f‖_∞`.
    pub fn sup(&self) -> T {
        self.segments.first().map_or_else(T::zero, |s| s.value.clone())
    }

    /// Right-continuous evaluation.
    pub fn value_at(&self, t: &T) -> T {
        let mut end = T::zero();
        for s in &self.segments {
            end = end + s.length.clone();
            if *t < end {
                return s.value.clone();
            }
        }
        T::zero()
    }

    /// Lebesgue measure of `{f* > t}`.
    pub fn measure_above(&self, t: &T) -> T {
        scalar::sum(self.segments.iter().filter(|s| s.value > *t).map(|s| s.length.clone()))
    }

    /// `∫ (f*)^k`.
    pub fn lp_power(&self, k: u32) -> T {
        scalar::sum(self.segments.iter().map(|s| s.value.powi(k) * s.length.clone()))
    }

    /// `‖f*‖_{L^p[0,∞)}`.
    pub fn lp_norm(&self, p: &Exponent) -> Result<T> {
        match p {
            Exponent::Infinite => Ok(self.sup()),
            Exponent::Finite(e) => {
                let integral = scalar::sum(
                    self.segments
                        .iter()
                        .map(|s| s.value.powf(e).map(|v| v * s.length.clone()))
                        .collect::<Result<Vec<_>>>()?,
                );
                integral.powf(&e.recip())
            }
        }
    }

    /// Pointwise sum of nonincreasing profiles, again nonincreasing.
    pub fn sum(profiles: &[&StepProfile<T>]) -> StepProfile<T> {
        let cells = merged_cells(profiles);
        Self::from_sorted(
            cells.into_iter().map(|c| (scalar::sum(c.values), c.length)),
        )
    }

    /// `self(t) <= other(t)` for all `t` (within float tolerance).
    pub fn pointwise_le(&self, other: &StepProfile<T>) -> bool {
        merged_cells(&[self, other]).iter().all(|c| {
            c.values[0] <= c.values[1] || nearly_equal(&c.values[0], &c.values[1], FLOAT_CHECK_TOLERANCE)
        })
    }

    /// Equality as functions: exact in exact mode, within float tolerance of
    /// the `L^1` distance otherwise.
    pub fn same_function(&self, other: &StepProfile<T>) -> bool {
        if T::is_exact() {
            return self == other;
        }
        let distance: f64 = merged_cells(&[self, other])
            .iter()
            .map(|c| (c.values[0].clone() - c.values[1].clone()).abs().to_f64() * c.length.to_f64())
            .sum();
        let scale = self.lp_power(1).to_f64().max(other.lp_power(1).to_f64()).max(f64::MIN_POSITIVE);
        distance <= FLOAT_CHECK_TOLERANCE * scale
    }
}

/// A maximal interval on which every profile in a merge is constant.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell<T> {
    pub length: T,
    pub values: Vec<T>,
}

/// Refines the breakpoints of all `profiles` into a common grid covering
/// `[0, longest total length)`. Profiles that have ended contribute 0.
pub fn merged_cells<T: Scalar>(profiles: &[&StepProfile<T>]) -> Vec<Cell<T>> {
    let mut cursor: Vec<usize> = vec![0; profiles.len()];
    let mut remaining: Vec<T> = profiles
        .iter()
        .map(|p| p.segments.first().map_or_else(T::zero, |s| s.length.clone()))
        .collect();
    let mut cells = Vec::new();
    loop {
        let step = profiles
            .iter()
            .enumerate()
            .filter(|(k, p)| cursor[*k] < p.segments.len())
            .map(|(k, _)| remaining[k].clone())
            .reduce(T::min);
        let Some(step) = step else { break };
        let values = profiles
            .iter()
            .enumerate()
            .map(|(k, p)| p.segments.get(cursor[k]).map_or_else(T::zero, |s| s.value.clone()))
            .collect();
        for (k, p) in profiles.iter().enumerate() {
            if cursor[k] >= p.segments.len() {
                continue;
            }
            if remaining[k] == step {
                cursor[k] += 1;
                remaining[k] = p.segments.get(cursor[k]).map_or_else(T::zero, |s| s.length.clone());
            } else {
                remaining[k] = remaining[k].clone() - step.clone();
            }
        }
        if step > T::zero() {
            cells.push(Cell { length: step, values });
        }
    }
    cells
}

/// `f*`: atoms sorted by `|f|` descending (ties by index) and laid end to
/// end.
pub fn decreasing_rearrangement<T: Scalar>(f: &SimpleFunction<T>) -> StepProfile<T> {
    let weights = f.space().weights();
    StepProfile::from_sorted(
        f.order_by_magnitude()
            .into_iter()
            .map(|i| (f.value(i).abs(), weights[i].clone())),
    )
}

/// `∫_0^∞ Π_k p_k(t) dt`, evaluated exactly on the merged breakpoint grid.
pub fn profile_integrate_product<T: Scalar>(profiles: &[&StepProfile<T>]) -> Result<T> {
    if profiles.is_empty() {
        return Err(Error::EmptyInput);
    }
    if profiles.iter().any(|p| p.is_empty()) {
        return Ok(T::zero());
    }
    Ok(scalar::sum(merged_cells(profiles).into_iter().map(|c| {
        c.values.into_iter().fold(c.length, |acc, v| acc * v)
    })))
}

/// `(‖f‖_p, ‖f*‖_p)`.
pub fn rearrangement_preserves_lp<T: Scalar>(f: &SimpleFunction<T>, p: &Exponent) -> Result<(T, T)> {
    Ok((lp_norm(f, p)?, decreasing_rearrangement(f).lp_norm(p)?))
}

/// `(∫|f|^k dμ, ∫(f*)^k)`, exact in exact mode for every integer `k`.
pub fn rearrangement_preserves_lp_power<T: Scalar>(f: &SimpleFunction<T>, k: u32) -> (T, T) {
    (lp_power(f, k), decreasing_rearrangement(f).lp_power(k))
}

/// Checks `μ({|f| > t}) = |{f* > t}|` at every level of `|f|`, which covers
/// all `t >= 0` since both sides are constant between levels.
pub fn equimeasurable<T: Scalar>(f: &SimpleFunction<T>, profile: &StepProfile<T>) -> bool {
    f.magnitude_levels().iter().all(|t| {
        nearly_equal(&f.distribution(t), &profile.measure_above(t), FLOAT_CHECK_TOLERANCE)
    })
}

/// Level sets of `f_+` and `f_-` between consecutive levels of `|f|`.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerCake<T> {
    space: Arc<DiscreteSpace<T>>,
    thresholds: Vec<T>,
    positive: Vec<AtomSet>,
    negative: Vec<AtomSet>,
}

impl<T: Scalar> LayerCake<T> {
    /// Strictly increasing levels, starting at 0; empty for the zero
    /// function.
    pub fn thresholds(&self) -> &[T] {
        &self.thresholds
    }

    /// `{f_+ > t}` for `t` in band `j`, i.e. `[thresholds[j], thresholds[j+1])`.
    pub fn positive_sets(&self) -> &[AtomSet] {
        &self.positive
    }

    /// `{f_- > t}` for `t` in band `j`.
    pub fn negative_sets(&self) -> &[AtomSet] {
        &self.negative
    }

    pub fn bands(&self) -> usize {
        self.positive.len()
    }
}

pub fn layer_decompose<T: Scalar>(f: &SimpleFunction<T>) -> LayerCake<T> {
    let space = Arc::clone(f.space());
    if f.is_zero() {
        return LayerCake { space, thresholds: Vec::new(), positive: Vec::new(), negative: Vec::new() };
    }
    let thresholds = f.magnitude_levels();
    let bands = thresholds.len() - 1;
    let mut positive = Vec::with_capacity(bands);
    let mut negative = Vec::with_capacity(bands);
    for t in &thresholds[..bands] {
        positive.push(f.values().iter().enumerate().filter(|(_, v)| **v > *t).map(|(i, _)| i).collect());
        negative.push(
            f.values().iter().enumerate().filter(|(_, v)| -(*v).clone() > *t).map(|(i, _)| i).collect(),
        );
    }
    LayerCake { space, thresholds, positive, negative }
}

/// `f(x) = Σ_bands (t_{j+1} - t_j) (1_{f_+ > t_j}(x) - 1_{f_- > t_j}(x))`.
pub fn layer_reconstruct<T: Scalar>(cake: &LayerCake<T>) -> SimpleFunction<T> {
    let mut values = vec![T::zero(); cake.space.atoms()];
    for j in 0..cake.bands() {
        let height = cake.thresholds[j + 1].clone() - cake.thresholds[j].clone();
        for i in cake.positive[j].iter() {
            values[i] = values[i].clone() + height.clone();
        }
        for i in cake.negative[j].iter() {
            values[i] = values[i].clone() - height.clone();
        }
    }
    SimpleFunction::new(Arc::clone(&cake.space), values).expect("layer cake matches its space")
}

/// Returns `((1_{f_+>t} - 1_{f_->t})*, 1_{[0, |{f*>t}|)})`; the two are
/// equal for every `t >= 0`.
pub fn indicator_difference_rearrangement<T: Scalar>(
    f: &SimpleFunction<T>,
    t: &T,
) -> Result<(StepProfile<T>, StepProfile<T>)> {
    if *t < T::zero() {
        return Err(Error::PreconditionViolated("threshold must be nonnegative".into()));
    }
    let signed = f.map(|v| {
        if *v > *t {
            T::one()
        } else if -v.clone() > *t {
            -T::one()
        } else {
            T::zero()
        }
    });
    let lhs = decreasing_rearrangement(&signed);
    let rhs = StepProfile::indicator(decreasing_rearrangement(f).measure_above(t));
    Ok((lhs, rhs))
}

/// `(‖f* - g*‖_{L^p[0,∞)}, ‖f - g‖_p)`; the first never exceeds the second.
pub fn nonexpansive_check<T: Scalar>(
    f: &SimpleFunction<T>,
    g: &SimpleFunction<T>,
    p: &Exponent,
) -> Result<(T, T)> {
    let diff = f.pointwise_sub(g)?;
    let rhs = lp_norm(&diff, p)?;
    let fs = decreasing_rearrangement(f);
    let gs = decreasing_rearrangement(g);
    let cells = merged_cells(&[&fs, &gs]);
    let lhs = match p {
        Exponent::Infinite => cells
            .iter()
            .map(|c| (c.values[0].clone() - c.values[1].clone()).abs())
            .fold(T::zero(), T::max),
        Exponent::Finite(e) => {
            let integral = scalar::sum(
                cells
                    .iter()
                    .map(|c| (c.values[0].clone() - c.values[1].clone()).abs().powf(e).map(|v| v * c.length.clone()))
                    .collect::<Result<Vec<_>>>()?,
            );
            integral.powf(&e.recip())?
        }
    };
    Ok((lhs, rhs))
}

/// Integer-`k` version of [`nonexpansive_check`] comparing `k`-th powers,
/// exact in exact mode.
pub fn nonexpansive_check_power<T: Scalar>(
    f: &SimpleFunction<T>,
    g: &SimpleFunction<T>,
    k: u32,
) -> Result<(T, T)> {
    let rhs = lp_power(&f.pointwise_sub(g)?, k);
    let fs = decreasing_rearrangement(f);
    let gs = decreasing_rearrangement(g);
    let lhs = scalar::sum(
        merged_cells(&[&fs, &gs])
            .into_iter()
            .map(|c| (c.values[0].clone() - c.values[1].clone()).abs().powi(k) * c.length),
    );
    Ok((lhs, rhs))
}

/// Truncations `f_n = sign(f) · min(|f|, n·δ)` for `n = 1..=levels`, with
/// `δ = ‖f‖_∞ / levels`; `|f_n|` increases to `|f|`.
pub fn truncation_ladder<T: Scalar>(f: &SimpleFunction<T>, levels: u32) -> Vec<SimpleFunction<T>> {
    let delta = f.sup_abs() / T::from_i64(levels as i64);
    (1..=levels)
        .map(|n| {
            let cap = delta.clone() * T::from_i64(n as i64);
            f.map(|v| {
                if v.abs() <= cap {
                    v.clone()
                } else if *v > T::zero() {
                    cap.clone()
                } else {
                    -cap.clone()
                }
            })
        })
        .collect()
}

/// Outcome of the finite monotone-convergence check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LadderCheck {
    /// Number of consecutive pairs with `f_n* ≤ f_{n+1}*` failing somewhere.
    pub decreasing_steps: usize,
    /// Whether the top rung rearranges to `f*`.
    pub reaches_limit: bool,
}

impl LadderCheck {
    pub fn holds(&self) -> bool {
        self.decreasing_steps == 0 && self.reaches_limit
    }
}

/// Checks `f_n* ↑ f*` along [`truncation_ladder`].
pub fn monotone_ladder_check<T: Scalar>(f: &SimpleFunction<T>, levels: u32) -> LadderCheck {
    let rungs: Vec<StepProfile<T>> = truncation_ladder(f, levels).iter().map(decreasing_rearrangement).collect();
    let decreasing_steps = rungs.windows(2).filter(|w| !w[0].pointwise_le(&w[1])).count();
    let limit = decreasing_rearrangement(f);
    let reaches_limit = rungs.last().map_or(limit.is_empty(), |top| top.same_function(&limit));
    LadderCheck { decreasing_steps, reaches_limit }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use proptest::prelude::*;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::new(BigInt::from(n), BigInt::from(d))
    }

    fn space(w: &[(i64, i64)]) -> Arc<DiscreteSpace<Q>> {
        Arc::new(DiscreteSpace::new(w.iter().map(|&(n, d)| q(n, d)).collect()).unwrap())
    }

    fn func(s: &Arc<DiscreteSpace<Q>>, v: &[Q]) -> SimpleFunction<Q> {
        SimpleFunction::new(Arc::clone(s), v.to_vec()).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| q(x, 1)).collect()
    }

    fn tenths() -> Arc<DiscreteSpace<Q>> {
        space(&[(1, 5), (3, 10), (1, 2)])
    }

    fn profile(pairs: &[(Q, Q)]) -> StepProfile<Q> {
        StepProfile::new(pairs.to_vec()).unwrap()
    }

    #[test]
    fn rearrangement_examples() {
        let f = func(&tenths(), &ints(&[3, -1, 2]));
        assert_eq!(
            decreasing_rearrangement(&f),
            profile(&[(q(3, 1), q(1, 5)), (q(2, 1), q(1, 2)), (q(1, 1), q(3, 10))])
        );
        assert!(decreasing_rearrangement(&func(&tenths(), &ints(&[0, 0, 0]))).is_empty());
        let half = space(&[(1, 2), (1, 2)]);
        assert_eq!(decreasing_rearrangement(&func(&half, &ints(&[1, -1]))), profile(&[(q(1, 1), q(1, 1))]));
    }

    #[test]
    fn profile_rejects_invalid_segments() {
        assert!(StepProfile::new(vec![(q(1, 1), q(1, 2)), (q(2, 1), q(1, 2))]).is_err());
        assert!(StepProfile::new(vec![(q(-1, 1), q(1, 2))]).is_err());
        assert!(StepProfile::new(vec![(q(1, 1), q(0, 1))]).is_err());
        assert!(StepProfile::new(vec![(q(1, 1), q(3, 4)), (q(1, 2), q(1, 2))]).is_err());
        let merged = profile(&[(q(2, 1), q(1, 4)), (q(2, 1), q(1, 4)), (q(0, 1), q(1, 2))]);
        assert_eq!(merged.segments().len(), 1);
        assert_eq!(merged.total_length(), q(1, 2));
    }

    #[test]
    fn evaluation_is_right_continuous() {
        let p = profile(&[(q(3, 1), q(1, 5)), (q(2, 1), q(1, 2))]);
        assert_eq!(p.value_at(&q(0, 1)), q(3, 1));
        assert_eq!(p.value_at(&q(1, 5)), q(2, 1));
        assert_eq!(p.value_at(&q(7, 10)), q(0, 1));
        assert_eq!(p.measure_above(&q(2, 1)), q(1, 5));
        assert_eq!(p.measure_above(&q(0, 1)), q(7, 10));
    }

    #[test]
    fn product_integral_examples() {
        let one = profile(&[(q(1, 1), q(1, 1))]);
        assert_eq!(profile_integrate_product(&[&one, &one]).unwrap(), q(1, 1));
        let f = profile(&[(q(2, 1), q(1, 2)), (q(1, 1), q(1, 2))]);
        let g = profile(&[(q(3, 1), q(1, 2)), (q(1, 1), q(1, 2))]);
        assert_eq!(profile_integrate_product(&[&f, &g]).unwrap(), q(7, 2));
        assert_eq!(profile_integrate_product(&[&f, &StepProfile::empty()]).unwrap(), q(0, 1));
        assert_eq!(profile_integrate_product::<Q>(&[]).unwrap_err(), Error::EmptyInput);
    }

    #[test]
    fn product_integral_with_unaligned_breakpoints() {
        // 2 on [0,1/3), 1 on [1/3,1)  x  5 on [0,1/2): 2*5/3 + 1*5/6
        let f = profile(&[(q(2, 1), q(1, 3)), (q(1, 1), q(2, 3))]);
        let g = profile(&[(q(5, 1), q(1, 2))]);
        assert_eq!(profile_integrate_product(&[&f, &g]).unwrap(), q(25, 6));
    }

    #[test]
    fn lp_preservation_examples() {
        let fs = Arc::new(DiscreteSpace::new(vec![0.2f64, 0.3, 0.5]).unwrap());
        let f = SimpleFunction::new(fs, vec![3.0, -1.0, 2.0]).unwrap();
        let (a, b) = rearrangement_preserves_lp(&f, &Exponent::integer(2)).unwrap();
        assert!((a - 4.1f64.sqrt()).abs() < 1e-14 && (b - 4.1f64.sqrt()).abs() < 1e-14);
        assert_eq!(rearrangement_preserves_lp(&f, &Exponent::Infinite).unwrap(), (3.0, 3.0));

        let g = func(&tenths(), &ints(&[3, -1, 2]));
        assert_eq!(rearrangement_preserves_lp_power(&g, 2), (q(41, 10), q(41, 10)));
        let zero = func(&tenths(), &ints(&[0, 0, 0]));
        assert_eq!(rearrangement_preserves_lp(&zero, &Exponent::integer(3)).unwrap(), (q(0, 1), q(0, 1)));
    }

    #[test]
    fn layer_cake_examples() {
        let half = space(&[(1, 2), (1, 2)]);
        let f = func(&half, &[q(2, 1), q(1, 2)]);
        let cake = layer_decompose(&f);
        assert_eq!(cake.thresholds(), &[q(0, 1), q(1, 2), q(2, 1)]);
        assert_eq!(cake.positive_sets(), &[AtomSet::full(2), [0].into_iter().collect()]);
        assert!(cake.negative_sets().iter().all(AtomSet::is_empty));
        assert_eq!(layer_reconstruct(&cake), f);

        let g = func(&half, &ints(&[1, -1]));
        let cake = layer_decompose(&g);
        assert_eq!(cake.thresholds(), &[q(0, 1), q(1, 1)]);
        assert_eq!(cake.positive_sets(), &[[0].into_iter().collect::<AtomSet>()]);
        assert_eq!(cake.negative_sets(), &[[1].into_iter().collect::<AtomSet>()]);

        let h = func(&tenths(), &ints(&[3, -1, 2]));
        assert_eq!(layer_reconstruct(&layer_decompose(&h)), h);

        let zero = func(&half, &ints(&[0, 0]));
        let cake = layer_decompose(&zero);
        assert!(cake.thresholds().is_empty() && cake.bands() == 0);
        assert_eq!(layer_reconstruct(&cake), zero);
    }

    #[test]
    fn indicator_difference_examples() {
        let half = space(&[(1, 2), (1, 2)]);
        let (l, r) = indicator_difference_rearrangement(&func(&half, &ints(&[1, -1])), &q(1, 2)).unwrap();
        assert_eq!(l, r);
        assert_eq!(l, StepProfile::indicator(q(1, 1)));

        let f = func(&tenths(), &ints(&[3, -1, 2]));
        let (l, r) = indicator_difference_rearrangement(&f, &q(1, 1)).unwrap();
        assert_eq!(l, StepProfile::indicator(q(7, 10)));
        assert_eq!(l, r);

        let (l, r) = indicator_difference_rearrangement(&f, &q(3, 1)).unwrap();
        assert!(l.is_empty() && r.is_empty());
        assert!(indicator_difference_rearrangement(&f, &q(-1, 1)).is_err());
    }

    #[test]
    fn nonexpansive_examples() {
        let half = space(&[(1, 2), (1, 2)]);
        let f = func(&half, &ints(&[1, -1]));
        assert_eq!(nonexpansive_check(&f, &f, &Exponent::one()).unwrap(), (q(0, 1), q(0, 1)));
        let g = func(&half, &ints(&[-1, 1]));
        assert_eq!(nonexpansive_check(&f, &g, &Exponent::one()).unwrap(), (q(0, 1), q(2, 1)));
        let f2 = func(&half, &ints(&[2, 0]));
        let g2 = func(&half, &ints(&[0, 1]));
        assert_eq!(nonexpansive_check(&f2, &g2, &Exponent::one()).unwrap(), (q(1, 2), q(3, 2)));
        assert_eq!(nonexpansive_check(&f2, &g2, &Exponent::Infinite).unwrap(), (q(1, 1), q(2, 1)));
        assert_eq!(nonexpansive_check_power(&f2, &g2, 2).unwrap(), (q(1, 2), q(5, 2)));
    }

    #[test]
    fn ladder_on_fixture() {
        let f = func(&tenths(), &ints(&[3, -1, 2]));
        let ladder = truncation_ladder(&f, 16);
        assert_eq!(ladder.len(), 16);
        assert_eq!(ladder[15], f);
        assert_eq!(ladder[0].values(), &[q(3, 16), q(-3, 16), q(3, 16)]);
        assert!(monotone_ladder_check(&f, 16).holds());
        assert!(monotone_ladder_check(&func(&tenths(), &ints(&[0, 0, 0])), 16).holds());
    }

    #[test]
    fn profile_sum_adds_pointwise() {
        let a = profile(&[(q(1, 1), q(1, 1))]);
        let b = profile(&[(q(2, 1), q(1, 4)), (q(1, 1), q(1, 2))]);
        let s = StepProfile::sum(&[&a, &b]);
        assert_eq!(s, profile(&[(q(3, 1), q(1, 4)), (q(2, 1), q(1, 2)), (q(1, 1), q(1, 4))]));
    }

    fn instance() -> impl Strategy<Value = (Vec<i64>, Vec<i64>, Vec<i64>)> {
        (1usize..8).prop_flat_map(|n| {
            (
                prop::collection::vec(1i64..65, n),
                prop::collection::vec(-8i64..=8, n),
                prop::collection::vec(-8i64..=8, n),
            )
        })
    }

    fn build(w: &[i64], a: &[i64]) -> (Arc<DiscreteSpace<Q>>, SimpleFunction<Q>) {
        let total: i64 = w.iter().sum();
        let s = Arc::new(DiscreteSpace::new(w.iter().map(|&x| q(x, total)).collect()).unwrap());
        let f = SimpleFunction::new(Arc::clone(&s), a.iter().map(|&x| q(x, 4)).collect()).unwrap();
        (s, f)
    }

    proptest! {
        #[test]
        fn rearrangement_is_equimeasurable((w, a, _b) in instance()) {
            let (_, f) = build(&w, &a);
            let fs = decreasing_rearrangement(&f);
            prop_assert!(equimeasurable(&f, &fs));
            prop_assert_eq!(fs.sup(), f.sup_abs());
            prop_assert!(fs.segments().windows(2).all(|s| s[0].value > s[1].value));
        }

        #[test]
        fn layer_cake_round_trip((w, a, _b) in instance()) {
            let (_, f) = build(&w, &a);
            prop_assert_eq!(layer_reconstruct(&layer_decompose(&f)), f);
        }

        #[test]
        fn sublinear_at_zero((w, a, b) in instance()) {
            let (s, f) = build(&w, &a);
            let g = SimpleFunction::new(s, b.iter().map(|&x| q(x, 4)).collect()).unwrap();
            let sum = f.pointwise_add(&g).unwrap();
            prop_assert!(decreasing_rearrangement(&sum).sup()
                <= decreasing_rearrangement(&f).sup() + decreasing_rearrangement(&g).sup());
        }

        #[test]
        fn rearrangement_is_permutation_invariant((w, a, _b) in instance(), rot in 0usize..8) {
            let (_, f) = build(&w, &a);
            let n = w.len();
            let k = rot % n;
            let mut w2 = w.clone();
            w2.rotate_left(k);
            let mut a2 = a.clone();
            a2.rotate_left(k);
            let (_, g) = build(&w2, &a2);
            prop_assert_eq!(decreasing_rearrangement(&f), decreasing_rearrangement(&g));
        }
    }
}
